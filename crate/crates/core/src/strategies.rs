//! Per-user beam alignment policies: always align, align after failure
//! (AAF) and align before failure (ABF) with an online learner.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::learners::{ClassifierKind, FeatureVector, LabeledSample, LinkObservation, OnlineClassifier};
use crate::linkstate::TimingConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    Baseline,
    Aaf,
    AbfPerceptron,
    AbfSgd,
    /// ABF driven by the true outcome of the retained beams. A reference
    /// point for the learners, not a realizable policy.
    AbfOracle,
}

impl StrategyKind {
    pub fn is_abf(self) -> bool {
        matches!(self, StrategyKind::AbfPerceptron | StrategyKind::AbfSgd | StrategyKind::AbfOracle)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::Baseline => "baseline",
            StrategyKind::Aaf => "aaf",
            StrategyKind::AbfPerceptron => "abf_perceptron",
            StrategyKind::AbfSgd => "abf_sgd",
            StrategyKind::AbfOracle => "abf_oracle",
        })
    }
}

impl FromStr for StrategyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" => Ok(StrategyKind::Baseline),
            "aaf" => Ok(StrategyKind::Aaf),
            "abf_perceptron" => Ok(StrategyKind::AbfPerceptron),
            "abf_sgd" => Ok(StrategyKind::AbfSgd),
            "abf_oracle" => Ok(StrategyKind::AbfOracle),
            other => Err(Error::validation("strategy", format!("unknown strategy `{other}`"))),
        }
    }
}

/// What a policy chose for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SlotDecision {
    /// Realign before transmitting; otherwise the previous beams are kept.
    pub align_now: bool,
    /// Learner output, ABF only.
    pub predicted: Option<bool>,
    /// Features the prediction was made from, ABF only.
    pub features: Option<FeatureVector>,
}

/// Which measurements ABF features are differenced from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureTiming {
    /// Retained beams probed at the start of slot `i` against slot `i-1`.
    Current,
    /// Slot `i-1` against slot `i-2`: only completed transmissions are used.
    #[default]
    Lagged,
}

impl fmt::Display for FeatureTiming {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureTiming::Current => "current",
            FeatureTiming::Lagged => "lagged",
        })
    }
}

impl FromStr for FeatureTiming {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "current" => Ok(FeatureTiming::Current),
            "lagged" => Ok(FeatureTiming::Lagged),
            other => Err(Error::validation("feature_timing", format!("expected current or lagged, got `{other}`"))),
        }
    }
}

/// The retained beams measured at the start of a slot, before deciding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub observation: LinkObservation,
    pub fails: bool,
}

/// ACK latency under the binary ACK abstraction: immediate on success,
/// never on failure.
pub fn ack_wait(success: bool) -> f64 {
    if success {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn baseline_step() -> SlotDecision {
    SlotDecision {
        align_now: true,
        ..Default::default()
    }
}

/// Realigns iff the last ACK took strictly longer than `T_fail`.
pub fn aaf_step(timing: &TimingConfig, ack_wait: f64) -> SlotDecision {
    SlotDecision {
        align_now: ack_wait > timing.fail(),
        ..Default::default()
    }
}

/// ABF decision from a learner prediction; `true` means align.
pub fn abf_step(learner: &OnlineClassifier, q: &FeatureVector) -> SlotDecision {
    let y = learner.predict(q);
    SlotDecision {
        align_now: y,
        predicted: Some(y),
        features: Some(*q),
    }
}

/// Label for a slot transmitted on retained beams: alignment was needed iff
/// the ACK arrived after the occupancy time.
pub fn retained_label(ack_wait: f64, cot: f64) -> bool {
    ack_wait > cot
}

/// Outcome of one slot as seen by the policy after transmitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotFeedback {
    /// Link actually used (aligned or retained).
    pub used: LinkObservation,
    pub success: bool,
    pub cot: f64,
    /// Whether the retained beams would have failed this slot. Equals
    /// `!success` on slots that did not realign.
    pub retained_failed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbfPolicy {
    learner: Option<OnlineClassifier>,
    retrain_on_align: bool,
    timing: FeatureTiming,
    requested_rate: f64,
    // observations of the two most recent slots, newest first
    history: [Option<LinkObservation>; 2],
}

impl AbfPolicy {
    /// `learner == None` selects the oracle.
    pub fn new(
        learner: Option<OnlineClassifier>,
        retrain_on_align: bool,
        timing: FeatureTiming,
        requested_rate: f64,
    ) -> Self {
        Self {
            learner,
            retrain_on_align,
            timing,
            requested_rate,
            history: [None, None],
        }
    }

    pub fn learner(&self) -> Option<&OnlineClassifier> {
        self.learner.as_ref()
    }

    /// Features for the coming decision. Missing history yields zeros.
    pub fn features(&self, probe: Option<&Probe>) -> FeatureVector {
        let pair = match self.timing {
            FeatureTiming::Current => probe.map(|p| p.observation).zip(self.history[0]),
            FeatureTiming::Lagged => self.history[0].zip(self.history[1]),
        };
        match pair {
            Some((newer, older)) => newer.delta_from(&older, self.requested_rate),
            None => FeatureVector::ZERO,
        }
    }
}

/// Learner settings shared by the ABF strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbfOptions {
    pub learning_rate: f64,
    /// Also train on slots where the policy realigned, labelled with what
    /// the retained beams would have done.
    pub retrain_on_align: bool,
    pub feature_timing: FeatureTiming,
}

impl Default for AbfOptions {
    fn default() -> Self {
        Self {
            learning_rate: crate::learners::DEFAULT_LEARNING_RATE,
            retrain_on_align: true,
            feature_timing: FeatureTiming::default(),
        }
    }
}

/// A running per-user policy.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    Baseline,
    Aaf { last_ack_wait: f64 },
    Abf(AbfPolicy),
}

impl Strategy {
    pub fn new(kind: StrategyKind, options: &AbfOptions, requested_rate: f64) -> Result<Self> {
        let abf = |learner| AbfPolicy::new(learner, options.retrain_on_align, options.feature_timing, requested_rate);
        let learner = |k| OnlineClassifier::initialized(k, options.learning_rate).map(Some);
        Ok(match kind {
            StrategyKind::Baseline => Strategy::Baseline,
            StrategyKind::Aaf => Strategy::Aaf { last_ack_wait: 0.0 },
            StrategyKind::AbfPerceptron => Strategy::Abf(abf(learner(ClassifierKind::Perceptron)?)),
            StrategyKind::AbfSgd => Strategy::Abf(abf(learner(ClassifierKind::Sgd)?)),
            StrategyKind::AbfOracle => Strategy::Abf(abf(None)),
        })
    }

    /// Whether `decide` wants a probe of the retained beams.
    pub fn needs_probe(&self) -> bool {
        matches!(self, Strategy::Abf(_))
    }

    /// Chooses the next slot's action.
    pub fn decide(&self, timing: &TimingConfig, probe: Option<&Probe>) -> SlotDecision {
        match self {
            Strategy::Baseline => baseline_step(),
            Strategy::Aaf { last_ack_wait } => aaf_step(timing, *last_ack_wait),
            Strategy::Abf(p) => {
                let q = p.features(probe);
                match &p.learner {
                    Some(l) => abf_step(l, &q),
                    None => {
                        let fails = probe.is_some_and(|p| p.fails);
                        SlotDecision {
                            align_now: fails,
                            predicted: Some(fails),
                            features: Some(q),
                        }
                    }
                }
            }
        }
    }

    pub fn observe(&mut self, decision: &SlotDecision, feedback: &SlotFeedback) -> Result<()> {
        match self {
            Strategy::Baseline => {}
            Strategy::Aaf { last_ack_wait } => *last_ack_wait = ack_wait(feedback.success),
            Strategy::Abf(p) => {
                let q = decision.features.unwrap_or(FeatureVector::ZERO);
                let label = if decision.align_now {
                    p.retrain_on_align.then_some(feedback.retained_failed)
                } else {
                    Some(retained_label(ack_wait(feedback.success), feedback.cot))
                };
                if let (Some(l), Some(label)) = (p.learner.as_mut(), label) {
                    l.update(&LabeledSample { features: q, label })?;
                }
                p.history = [Some(feedback.used), p.history[0]];
            }
        }
        Ok(())
    }
}
