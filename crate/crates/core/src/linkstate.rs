//! Link states, per-state dwell times and the allowed transitions of each
//! alignment policy.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkState {
    /// Freshly aligned and meeting demand.
    A,
    /// Running on retained (possibly drifted) beams and still meeting demand.
    B,
    /// Failure blamed on location change.
    C,
    /// Failure blamed on orientation change.
    D,
    /// Learning/decision state of the predictive policy.
    E,
}

impl LinkState {
    pub const ALL: [LinkState; 5] = [LinkState::A, LinkState::B, LinkState::C, LinkState::D, LinkState::E];

    pub fn is_failure(self) -> bool {
        matches!(self, LinkState::C | LinkState::D)
    }
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LinkState::A => "A",
            LinkState::B => "B",
            LinkState::C => "C",
            LinkState::D => "D",
            LinkState::E => "E",
        };
        f.write_str(s)
    }
}

/// Slot timing, all in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingConfig {
    pub slot: f64,
    pub align: f64,
    /// Fraction of a slot spent waiting for an ACK before declaring failure.
    pub alpha: f64,
    /// Mobility sampling interval.
    pub dt: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            slot: 0.010,
            align: 0.005,
            alpha: 0.25,
            dt: 0.001,
        }
    }
}

impl TimingConfig {
    pub fn fail(&self) -> f64 {
        self.alpha * self.slot
    }

    /// Mobility samples per slot.
    pub fn samples_per_slot(&self) -> usize {
        (self.slot / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slot > 0.0 && self.slot.is_finite()) {
            return Err(Error::validation("t_slot", "must be > 0"));
        }
        if !(self.align > 0.0 && self.align.is_finite()) {
            return Err(Error::validation("t_align", "must be > 0"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::validation("alpha", format!("must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.dt > 0.0 && self.dt <= self.slot) {
            return Err(Error::validation("dt", "must lie in (0, t_slot]"));
        }
        let ratio = self.slot / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::validation("dt", "t_slot must be a whole multiple of dt"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDwell {
    pub state: LinkState,
    pub cot: f64,
    /// `T_align` for A, `T_fail` for C/D, zero otherwise.
    pub extra: f64,
    pub total: f64,
}

pub fn dwell_time(state: LinkState, cot: f64, timing: &TimingConfig) -> StateDwell {
    let (cot, extra) = match state {
        LinkState::A => (cot, timing.align),
        LinkState::B => (cot, 0.0),
        LinkState::C | LinkState::D => (cot, timing.fail()),
        LinkState::E => (0.0, 0.0),
    };
    StateDwell {
        state,
        cot,
        extra,
        total: cot + extra,
    }
}

/// Running channel-occupancy, realignment and outage totals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimeTotals {
    pub cot: f64,
    /// Summed `T_align` charges.
    pub realignment: f64,
    /// Time spent in C/D dwells, ACK waits included.
    pub outage: f64,
    pub total: f64,
}

impl TimeTotals {
    pub fn add(&mut self, dwell: &StateDwell) {
        self.cot += dwell.cot;
        self.total += dwell.total;
        match dwell.state {
            LinkState::A => self.realignment += dwell.extra,
            LinkState::C | LinkState::D => self.outage += dwell.total,
            LinkState::B | LinkState::E => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Normal,
    Aaf,
    Abf,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(Variant::Normal),
            "aaf" => Ok(Variant::Aaf),
            "abf" => Ok(Variant::Abf),
            other => Err(Error::UnknownVariant(other.to_string())),
        }
    }
}

/// Successor states reachable from `from` in one step.
///
/// Under AAF a failure always forces a realignment, so C and D can no longer
/// fall back to retained beams (B). Under ABF every decision passes through
/// the learning state E.
pub fn allowed_transitions(variant: Variant, from: LinkState) -> Result<Vec<LinkState>> {
    use LinkState::*;
    let next = match (variant, from) {
        (_, E) if variant != Variant::Abf => {
            return Err(Error::Domain(format!("state E does not exist under {variant:?}")));
        }
        (Variant::Normal, A) => vec![B, C, D],
        (Variant::Normal, B) => vec![A, B, C, D],
        (Variant::Normal, C) => vec![A, B, C],
        (Variant::Normal, D) => vec![A, B, D],
        (Variant::Aaf, A) => vec![B, C, D],
        (Variant::Aaf, B) => vec![B, C, D],
        (Variant::Aaf, C) | (Variant::Aaf, D) => vec![A, C, D],
        (Variant::Abf, E) => vec![A, B, C, D],
        (Variant::Abf, _) => vec![E],
        (_, E) => unreachable!(),
    };
    Ok(next)
}
