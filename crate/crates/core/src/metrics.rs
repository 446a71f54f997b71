//! Classifier and system metrics over slot records.

use std::collections::BTreeMap;

use crate::engine::SlotRecord;
use crate::linkstate::TimeTotals;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    /// Counts over every record carrying both a prediction and a truth label.
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a SlotRecord>) -> Self {
        let mut c = Self::default();
        for r in records {
            if let (Some(p), Some(t)) = (r.predicted, r.truth) {
                c.record(p, t);
            }
        }
        c
    }
}

/// `None` marks a metric whose denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassifierMetrics {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn classifier_metrics(c: &ConfusionCounts) -> ClassifierMetrics {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    ClassifierMetrics {
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision,
        recall,
        f1,
    }
}

/// Fraction of slots that realigned (1.0 means alignment every slot).
pub fn misalignment_rate(records: &[SlotRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| r.aligned).count() as f64 / records.len() as f64
}

/// Mean over ticks of the fraction of the `n` users covered in that tick.
pub fn user_coverage(records: &[SlotRecord], n: usize) -> f64 {
    let mut per_tick: BTreeMap<usize, usize> = BTreeMap::new();
    for r in records {
        *per_tick.entry(r.tick).or_default() += r.covered as usize;
    }
    if per_tick.is_empty() || n == 0 {
        return 0.0;
    }
    let sum: f64 = per_tick.values().map(|&c| c as f64 / n as f64).sum();
    sum / per_tick.len() as f64
}

/// Mean achievable rate on the beams used, bit/s.
pub fn mean_rate(records: &[SlotRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().map(|r| r.rate).sum::<f64>() / records.len() as f64
}

pub fn time_totals(records: &[SlotRecord]) -> TimeTotals {
    let mut t = TimeTotals::default();
    for r in records {
        t.add(&r.dwell);
    }
    t
}

/// Share of accumulated dwell time spent in failure states.
pub fn outage_time_fraction(records: &[SlotRecord]) -> f64 {
    let t = time_totals(records);
    if t.total > 0.0 {
        t.outage / t.total
    } else {
        0.0
    }
}
