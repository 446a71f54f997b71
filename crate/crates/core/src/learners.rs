//! Online binary classifiers over four-element feature vectors (three
//! deltas plus a constant bias input).

use std::io::Write;

use crate::error::{Error, Result};

/// Gains below this (linear) are clamped before converting to dB so that an
/// out-of-cone zero gain still yields a finite feature.
pub const GAIN_FLOOR: f64 = 1e-3;

pub fn gain_db(gain: f64) -> f64 {
    10.0 * gain.max(GAIN_FLOOR).log10()
}

/// `(dG_t, dG_r, dR, 1)`: gain changes in dB and rate change in units of the
/// requested rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub d_gain_tx: f64,
    pub d_gain_rx: f64,
    pub d_rate: f64,
}

impl FeatureVector {
    pub const ZERO: FeatureVector = FeatureVector {
        d_gain_tx: 0.0,
        d_gain_rx: 0.0,
        d_rate: 0.0,
    };

    pub fn new(d_gain_tx: f64, d_gain_rx: f64, d_rate: f64) -> Self {
        Self { d_gain_tx, d_gain_rx, d_rate }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.d_gain_tx, self.d_gain_rx, self.d_rate, 1.0]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

/// One link observation the features are differenced from.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkObservation {
    pub gain_tx: f64,
    pub gain_rx: f64,
    /// bit/s
    pub rate: f64,
}

impl LinkObservation {
    /// Features describing the change from `prev` to `self`.
    pub fn delta_from(&self, prev: &LinkObservation, requested_rate: f64) -> FeatureVector {
        FeatureVector {
            d_gain_tx: gain_db(self.gain_tx) - gain_db(prev.gain_tx),
            d_gain_rx: gain_db(self.gain_rx) - gain_db(prev.gain_rx),
            d_rate: (self.rate - prev.rate) / requested_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierKind {
    Perceptron,
    Sgd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledSample {
    pub features: FeatureVector,
    /// `true` means the link needs realignment.
    pub label: bool,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineClassifier {
    weights: [f64; 4],
    kind: ClassifierKind,
    learning_rate: f64,
}

pub const DEFAULT_LEARNING_RATE: f64 = 0.01;

impl OnlineClassifier {
    /// Zero weights, untrained.
    pub fn new(kind: ClassifierKind, learning_rate: f64) -> Result<Self> {
        if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
            return Err(Error::validation("learning_rate", "must be finite and >= 0"));
        }
        Ok(Self {
            weights: [0.0; 4],
            kind,
            learning_rate,
        })
    }

    pub fn with_weights(kind: ClassifierKind, learning_rate: f64, weights: [f64; 4]) -> Result<Self> {
        let mut c = Self::new(kind, learning_rate)?;
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Domain("weights must be finite".into()));
        }
        c.weights = weights;
        Ok(c)
    }

    /// Zero weights followed by one training step on `(label 1, bias-only
    /// features)`, the starting point used by the predictive policy.
    pub fn initialized(kind: ClassifierKind, learning_rate: f64) -> Result<Self> {
        let mut c = Self::new(kind, learning_rate)?;
        c.update(&LabeledSample {
            features: FeatureVector::ZERO,
            label: true,
        })?;
        Ok(c)
    }

    pub fn weights(&self) -> [f64; 4] {
        self.weights
    }

    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn score(&self, q: &FeatureVector) -> f64 {
        self.weights.iter().zip(q.as_array()).map(|(w, x)| w * x).sum()
    }

    /// Both kinds threshold the same hyperplane; ties predict "align".
    pub fn predict(&self, q: &FeatureVector) -> bool {
        let z = self.score(q);
        match self.kind {
            ClassifierKind::Perceptron => z >= 0.0,
            ClassifierKind::Sgd => sigmoid(z) >= 0.5,
        }
    }

    /// Perceptron: mistake-driven `w += eta * (+-1) * q`. SGD: one logistic
    /// loss gradient step on every sample. Non-finite samples are rejected
    /// and leave the weights untouched.
    pub fn update(&mut self, sample: &LabeledSample) -> Result<()> {
        if !sample.features.is_finite() {
            return Err(Error::NonFiniteSample);
        }
        let q = sample.features.as_array();
        let step = match self.kind {
            ClassifierKind::Perceptron => {
                if self.predict(&sample.features) == sample.label {
                    return Ok(());
                }
                if sample.label {
                    self.learning_rate
                } else {
                    -self.learning_rate
                }
            }
            ClassifierKind::Sgd => {
                let y = if sample.label { 1.0 } else { 0.0 };
                self.learning_rate * (y - sigmoid(self.score(&sample.features)))
            }
        };
        let mut next = self.weights;
        for (w, x) in next.iter_mut().zip(q) {
            *w += step * x;
        }
        if next.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFiniteSample);
        }
        self.weights = next;
        Ok(())
    }

    /// Cross-entropy of the sigmoid output, probabilities clamped to
    /// `[1e-12, 1 - 1e-12]`.
    pub fn logistic_loss(&self, sample: &LabeledSample) -> f64 {
        let p = sigmoid(self.score(&sample.features)).clamp(1e-12, 1.0 - 1e-12);
        if sample.label {
            -p.ln()
        } else {
            -(1.0 - p).ln()
        }
    }

    /// Gradient of [`logistic_loss`](Self::logistic_loss) with respect to
    /// the weights, `(sigma(w.q) - y) q`.
    pub fn logistic_gradient(&self, sample: &LabeledSample) -> [f64; 4] {
        let y = if sample.label { 1.0 } else { 0.0 };
        let r = sigmoid(self.score(&sample.features)) - y;
        sample.features.as_array().map(|x| r * x)
    }
}

/// Writes one `w0 w1 w2 w3` row per snapshot.
pub fn write_weights<W: Write>(mut out: W, snapshots: &[[f64; 4]]) -> Result<()> {
    for w in snapshots {
        writeln!(out, "{} {} {} {}", w[0], w[1], w[2], w[3])?;
    }
    Ok(())
}
