//! Multi-user slotted simulation: per-user mobility, beam steering, rate and
//! state bookkeeping, then a per-tick admission pass over the shared slot.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{ChannelModel, WindowSearch};
use crate::error::{Error, Result};
use crate::geometry::{align, classify_state, BeamPair, FailurePrecedence, LinkGeometry, MovementThresholds};
use crate::learners::LinkObservation;
use crate::linkstate::{dwell_time, LinkState, StateDwell, TimingConfig};
use crate::math::Vec3;
use crate::mobility::{generate_trace_with_rng, pose_delta, Pose, RoomGeometry, ServiceProfile};
use crate::strategies::{AbfOptions, Probe, SlotFeedback, Strategy, StrategyKind};

#[derive(Debug, Clone, PartialEq)]
pub struct UserSpec {
    pub profile: ServiceProfile,
    /// Requested rate, bit/s.
    pub demand: f64,
    pub strategy: StrategyKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub room: RoomGeometry,
    pub users: Vec<UserSpec>,
    /// Full beamwidth shared by the AP and every UE, degrees.
    pub beamwidth: f64,
    pub timing: TimingConfig,
    pub channel: ChannelModel,
    /// Number of slots simulated.
    pub ticks: usize,
    pub seed: u64,
    pub abf: AbfOptions,
    pub thresholds: MovementThresholds,
    pub precedence: FailurePrecedence,
}

pub const DEFAULT_DEMAND: f64 = 10e9;
pub const DEFAULT_USERS: usize = 40;

impl Scenario {
    /// `n` identical users on default room, timing and channel.
    pub fn uniform(n: usize, profile: ServiceProfile, strategy: StrategyKind, beamwidth: f64) -> Self {
        Self {
            room: RoomGeometry::default(),
            users: vec![
                UserSpec {
                    profile,
                    demand: DEFAULT_DEMAND,
                    strategy,
                };
                n
            ],
            beamwidth,
            timing: TimingConfig::default(),
            channel: ChannelModel::default(),
            ticks: 1000,
            seed: 0,
            abf: AbfOptions::default(),
            thresholds: MovementThresholds::default(),
            precedence: FailurePrecedence::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.room.validate()?;
        self.timing.validate()?;
        self.channel.validate()?;
        if self.users.is_empty() {
            return Err(Error::validation("users", "need at least one user"));
        }
        for u in &self.users {
            u.profile.validate()?;
            if !(u.demand > 0.0 && u.demand.is_finite()) {
                return Err(Error::validation("demand", "must be positive and finite"));
            }
        }
        if !(self.beamwidth > 0.0 && self.beamwidth <= 360.0) {
            return Err(Error::validation(
                "beamwidth",
                format!("must lie in (0, 360] degrees, got {}", self.beamwidth),
            ));
        }
        if self.ticks == 0 {
            return Err(Error::validation("ticks", "must be >= 1"));
        }
        if !(self.abf.learning_rate > 0.0 && self.abf.learning_rate.is_finite()) {
            return Err(Error::validation("learning_rate", "must be positive and finite"));
        }
        Ok(())
    }
}

/// Outcome of one user in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord {
    pub user: usize,
    pub tick: usize,
    pub state: LinkState,
    pub dwell: StateDwell,
    /// Beams were realigned at the start of this slot.
    pub aligned: bool,
    /// ABF prediction (`true` = align).
    pub predicted: Option<bool>,
    /// Whether the retained beams would have failed; ABF users only.
    pub truth: Option<bool>,
    /// Achievable rate on the beams used, bit/s.
    pub rate: f64,
    pub cot: f64,
    pub success: bool,
    /// Admitted within the tick budget and successful.
    pub covered: bool,
}

/// Channel occupancy `T_slot * R* / R`, capped at one slot (a zero rate
/// occupies the whole slot).
pub fn compute_cot(requested: f64, rate: f64, slot: f64) -> f64 {
    if rate <= 0.0 {
        return slot;
    }
    (slot * requested / rate).min(slot)
}

struct LinkEval {
    geometry: LinkGeometry,
    gains: (f64, f64),
    rate: f64,
}

impl LinkEval {
    fn observation(&self) -> LinkObservation {
        LinkObservation {
            gain_tx: self.gains.0,
            gain_rx: self.gains.1,
            rate: self.rate,
        }
    }
}

fn evaluate(beams: &BeamPair, ap: Vec3, pose: &Pose, beamwidth: f64, search: &WindowSearch) -> Result<LinkEval> {
    let geometry = beams.geometry(ap, pose, beamwidth)?;
    let gains = geometry.gains(beamwidth, beamwidth)?;
    let product = gains.0 * gains.1;
    let rate = if product > 0.0 {
        search.best(geometry.distance, product)?.1
    } else {
        0.0
    };
    Ok(LinkEval { geometry, gains, rate })
}

/// Per-user random stream: the scenario seed selects the key, the user index
/// the stream, so users are independent of how many others exist.
pub fn user_rng(seed: u64, user: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(user as u64);
    rng
}

/// Simulates one user's slots; `covered` is left `false` for the admission
/// pass to fill in.
pub fn simulate_user(scenario: &Scenario, user: usize, search: &WindowSearch) -> Result<Vec<SlotRecord>> {
    let spec = &scenario.users[user];
    let timing = &scenario.timing;
    let per_slot = timing.samples_per_slot();
    let trace = generate_trace_with_rng(
        &spec.profile,
        &scenario.room,
        scenario.ticks * per_slot,
        timing.dt,
        &mut user_rng(scenario.seed, user),
    )?;
    let ap = scenario.room.ap_position;
    let delta = scenario.beamwidth;
    let mut strategy = Strategy::new(spec.strategy, &scenario.abf, spec.demand)?;
    let needs_probe = strategy.needs_probe();

    let mut beams = align(ap, &trace.poses[0])?;
    let mut prev_pose = trace.poses[0];
    let mut records = Vec::with_capacity(scenario.ticks);
    for tick in 0..scenario.ticks {
        let pose = trace.poses[tick * per_slot];
        let retained = if needs_probe {
            Some(evaluate(&beams, ap, &pose, delta, search)?)
        } else {
            None
        };
        let retained_failed = retained.as_ref().map(|r| r.rate < spec.demand);
        let probe = retained.as_ref().map(|r| Probe {
            observation: r.observation(),
            fails: r.rate < spec.demand,
        });
        let decision = strategy.decide(timing, probe.as_ref());

        let used = if decision.align_now {
            beams = align(ap, &pose)?;
            evaluate(&beams, ap, &pose, delta, search)?
        } else {
            match retained {
                Some(r) => r,
                None => evaluate(&beams, ap, &pose, delta, search)?,
            }
        };
        let success = used.rate >= spec.demand;
        let cot = compute_cot(spec.demand, used.rate, timing.slot);
        let motion = scenario.thresholds.motion(&pose_delta(&prev_pose, &pose));
        let state = classify_state(
            &used.geometry,
            delta,
            delta,
            used.rate,
            spec.demand,
            motion,
            decision.align_now,
            scenario.precedence,
        );
        let feedback = SlotFeedback {
            used: used.observation(),
            success,
            cot,
            retained_failed: retained_failed.unwrap_or(!success),
        };
        strategy.observe(&decision, &feedback)?;
        records.push(SlotRecord {
            user,
            tick,
            state,
            dwell: dwell_time(state, cot, timing),
            aligned: decision.align_now,
            predicted: decision.predicted,
            truth: retained_failed,
            rate: used.rate,
            cot,
            success,
            covered: false,
        });
        prev_pose = pose;
    }
    Ok(records)
}

/// Marks which users of one tick fit in the slot. Users are taken in index
/// order starting from `tick mod N`; a user is admitted when its dwell fits
/// in what is left of the slot, and covered when admitted and successful.
/// Users that do not fit are skipped without consuming time.
pub fn admit(tick_records: &mut [SlotRecord], tick: usize, slot: f64) {
    let n = tick_records.len();
    if n == 0 {
        return;
    }
    let mut used = 0.0;
    for k in 0..n {
        let r = &mut tick_records[(tick + k) % n];
        let fits = used + r.dwell.total <= slot * (1.0 + 1e-12);
        if fits {
            used += r.dwell.total;
        }
        r.covered = fits && r.success;
    }
}

/// Runs the scenario. Records are ordered by tick, then user.
pub fn run(scenario: &Scenario) -> Result<Vec<SlotRecord>> {
    scenario.validate()?;
    let search = WindowSearch::new(&scenario.channel)?;
    let per_user: Vec<Vec<SlotRecord>> = (0..scenario.users.len())
        .into_par_iter()
        .map(|u| simulate_user(scenario, u, &search))
        .collect::<Result<_>>()?;
    let n = per_user.len();
    let mut records = Vec::with_capacity(n * scenario.ticks);
    for tick in 0..scenario.ticks {
        let start = records.len();
        records.extend(per_user.iter().map(|u| u[tick]));
        admit(&mut records[start..start + n], tick, scenario.timing.slot);
    }
    Ok(records)
}
