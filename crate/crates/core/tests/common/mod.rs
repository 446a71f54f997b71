//! Independent reference implementations shared by the integration tests and
//! the acceptance harness. Nothing here calls into the code under test except
//! to read plain data (table rows, records).
#![allow(dead_code)]

use thzsim::engine::SlotRecord;
use thzsim::linkstate::{LinkState, TimingConfig};

pub const C: f64 = 299_792_458.0;

/// Piecewise-linear absorption coefficient with linear humidity scaling.
pub fn k_oracle(rows: &[(f64, f64)], rho_ref: f64, f: f64, rho: f64) -> f64 {
    let mut k = rows[0].1;
    for w in rows.windows(2) {
        let ((f0, k0), (f1, k1)) = (w[0], w[1]);
        if f >= f0 && f <= f1 {
            k = k0 + (f - f0) / (f1 - f0) * (k1 - k0);
            break;
        }
    }
    if f >= rows[rows.len() - 1].0 {
        k = rows[rows.len() - 1].1;
    }
    k * rho / rho_ref
}

/// Shannon rate over a flat window, written as one expression.
#[allow(clippy::too_many_arguments)]
pub fn rate_oracle(fc: f64, bw: f64, d: f64, delta_t: f64, delta_r: f64, k: f64, pt: f64, n0: f64) -> f64 {
    bw * (1.0
        + pt * (2.0 / (1.0 - (delta_t.to_radians() / 2.0).cos()))
            * (2.0 / (1.0 - (delta_r.to_radians() / 2.0).cos()))
            / ((k * d).exp() * (4.0 * std::f64::consts::PI * d * fc / C).powi(2) * n0 * bw))
        .log2()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Closed-form per-state dwell charges summed over a record sequence, in
/// record order: (cot, realignment, outage, total).
pub fn closed_form_totals(records: &[SlotRecord], t: &TimingConfig) -> (f64, f64, f64, f64) {
    let t_fail = t.slot * t.alpha;
    let (mut cot, mut rt, mut ot, mut total) = (0.0, 0.0, 0.0, 0.0);
    for r in records {
        let tau = match r.state {
            LinkState::A => t.align + r.cot,
            LinkState::B => r.cot,
            LinkState::C | LinkState::D => t_fail + r.cot,
            LinkState::E => 0.0,
        };
        if r.state != LinkState::E {
            cot += r.cot;
        }
        if r.state == LinkState::A {
            rt += t.align;
        }
        if matches!(r.state, LinkState::C | LinkState::D) {
            ot += tau;
        }
        total += tau;
    }
    (cot, rt, ot, total)
}

/// A linearly separable stream with margin at least `gamma` around the
/// hyperplane `u`, features bounded by `radius` (bias column included).
pub struct SeparableStream {
    pub samples: Vec<([f64; 3], bool)>,
    pub radius: f64,
    pub gamma: f64,
}

pub fn separable_stream(seed: u64, n: usize) -> SeparableStream {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    // unit separator over (x0, x1, x2, bias)
    let raw: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u = raw.map(|x| x / norm);
    let gamma_min = 0.05;
    let mut samples = Vec::with_capacity(n);
    let mut radius: f64 = 0.0;
    let mut gamma = f64::INFINITY;
    while samples.len() < n {
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let full = [x[0], x[1], x[2], 1.0];
        let m: f64 = full.iter().zip(u).map(|(a, b)| a * b).sum();
        if m.abs() < gamma_min {
            continue;
        }
        radius = radius.max(full.iter().map(|a| a * a).sum::<f64>().sqrt());
        gamma = gamma.min(m.abs());
        samples.push((x, m > 0.0));
    }
    SeparableStream { samples, radius, gamma }
}
