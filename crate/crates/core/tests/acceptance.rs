//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each with
//! the measured values, then a summary.
//!
//! By default the process exits 0 whenever every criterion *ran*; set
//! `THZSIM_ACCEPTANCE_STRICT=1` to exit non-zero on any FAIL line.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thzsim::channel::{data_rate, ChannelModel, FrequencyWindow};
use thzsim::config::ExperimentConfig;
use thzsim::engine::{run, Scenario, SlotRecord};
use thzsim::learners::{ClassifierKind, FeatureVector, LabeledSample, OnlineClassifier};
use thzsim::metrics::{classifier_metrics, misalignment_rate, time_totals, user_coverage, ConfusionCounts};
use thzsim::mobility::{ServiceProfile, ServiceType};
use thzsim::strategies::{aaf_step, ack_wait, StrategyKind};
use thzsim::sweep::{run_sweep, write_csv};

use common::{closed_form_totals, k_oracle, rate_oracle, rel_err, separable_stream};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn scenario(n: usize, service: ServiceType, strategy: StrategyKind, bw: f64, seed: u64, ticks: usize) -> Scenario {
    let mut s = Scenario::uniform(n, ServiceProfile::for_service(service), strategy, bw);
    s.seed = seed;
    s.ticks = ticks;
    s
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn rate_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut model = ChannelModel::default();
    let (lo, hi) = model.absorption.coverage();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        model.humidity = rng.random_range(0.0..20.0);
        let fc = rng.random_range(lo..=hi);
        let bw = rng.random_range(1e8..1e11);
        let d = rng.random_range(0.05..12.0);
        let (dt, dr) = (rng.random_range(0.2..120.0), rng.random_range(0.2..120.0));
        let got = data_rate(FrequencyWindow { center: fc, bandwidth: bw }, d, dt, dr, &model).unwrap();
        let t = &model.absorption;
        let k = k_oracle(t.entries(), t.reference_humidity(), fc, model.humidity);
        let want = rate_oracle(fc, bw, d, dt, dr, k, model.transmit_power, model.noise_psd);
        worst = worst.max(rel_err(got, want));
    }
    outcome(worst <= 1e-9, format!("1000 draws, max relative error {worst:.2e} (tol 1e-9)"))
}

fn classifier_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let w: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let s = LabeledSample {
            features: FeatureVector::new(x[0], x[1], x[2]),
            label: rng.random_bool(0.5),
        };
        let c = OnlineClassifier::with_weights(ClassifierKind::Sgd, 0.01, w).unwrap();
        let g = c.logistic_gradient(&s);
        let h = 1e-5;
        for i in 0..4 {
            let (mut p, mut m) = (w, w);
            p[i] += h;
            m[i] -= h;
            let loss = |w| OnlineClassifier::with_weights(ClassifierKind::Sgd, 0.01, w).unwrap().logistic_loss(&s);
            let num = (loss(p) - loss(m)) / (2.0 * h);
            if (g[i] - num).abs() > 1e-10 {
                worst = worst.max(rel_err(g[i], num));
            }
        }
    }
    let mut bound_ok = 0;
    let mut tightest: f64 = 0.0;
    for seed in 0..20 {
        let stream = separable_stream(1000 + seed, 300);
        let bound = (stream.radius / stream.gamma).powi(2);
        let mut p = OnlineClassifier::new(ClassifierKind::Perceptron, 1.0).unwrap();
        let mut mistakes = 0usize;
        for _ in 0..1000 {
            let before = mistakes;
            for (x, y) in &stream.samples {
                let s = LabeledSample {
                    features: FeatureVector::new(x[0], x[1], x[2]),
                    label: *y,
                };
                mistakes += (p.predict(&s.features) != *y) as usize;
                p.update(&s).unwrap();
            }
            if mistakes == before {
                break;
            }
        }
        tightest = tightest.max(mistakes as f64 / bound);
        bound_ok += (mistakes as f64 <= bound) as usize;
    }
    outcome(
        worst <= 1e-6 && bound_ok == 20,
        format!(
            "gradient max rel err {worst:.2e} (tol 1e-6, 100 draws); perceptron within (R/gamma)^2 on {bound_ok}/20 streams, max mistakes/bound {tightest:.3}"
        ),
    )
}

const TREND_BEAMWIDTHS: [f64; 5] = [1.0, 5.0, 10.0, 20.0, 40.0];
const TREND_SEEDS: u64 = 10;
const TREND_TICKS: usize = 2000;

fn mean_misalignment(service: ServiceType, kind: StrategyKind, bw: f64) -> f64 {
    let rates: Vec<f64> = (0..TREND_SEEDS)
        .map(|seed| misalignment_rate(&run(&scenario(1, service, kind, bw, seed, TREND_TICKS)).unwrap()))
        .collect();
    mean(&rates)
}

/// Non-increasing, allowing one rise of at most 2 percentage points.
fn near_monotone(series: &[f64]) -> bool {
    let rises: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
    rises.is_empty() || (rises.len() == 1 && rises[0] <= 0.02)
}

fn misalignment_trend() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for service in [ServiceType::S1, ServiceType::S2] {
        for kind in [StrategyKind::Baseline, StrategyKind::Aaf, StrategyKind::AbfPerceptron, StrategyKind::AbfSgd] {
            let series: Vec<f64> = TREND_BEAMWIDTHS.iter().map(|&bw| mean_misalignment(service, kind, bw)).collect();
            let good = if kind == StrategyKind::Baseline {
                series.iter().all(|&m| m == 1.0)
            } else {
                near_monotone(&series)
            };
            ok &= good;
            let pct: Vec<String> = series.iter().map(|m| format!("{:.1}", 100.0 * m)).collect();
            parts.push(format!("{service}/{kind} [{}]{}", pct.join(" "), if good { "" } else { " <- not monotone" }));
        }
    }
    outcome(ok, format!("% realigned at delta 1/5/10/20/40: {}", parts.join("; ")))
}

fn abf_beats_aaf() -> Outcome {
    let aaf = mean_misalignment(ServiceType::S1, StrategyKind::Aaf, 10.0);
    let perc = mean_misalignment(ServiceType::S1, StrategyKind::AbfPerceptron, 10.0);
    let sgd = mean_misalignment(ServiceType::S1, StrategyKind::AbfSgd, 10.0);
    let oracle = mean_misalignment(ServiceType::S1, StrategyKind::AbfOracle, 10.0);
    let best = perc.min(sgd);
    outcome(
        aaf - best >= 0.05,
        format!(
            "S1 delta=10: AAF {:.1}%, ABF-perceptron {:.1}%, ABF-SGD {:.1}%, (perfect predictor {:.1}%); need ABF <= AAF - 5pp",
            100.0 * aaf,
            100.0 * perc,
            100.0 * sgd,
            100.0 * oracle
        ),
    )
}

const COVERAGE_BEAMWIDTHS: [f64; 7] = [1.0, 3.0, 5.0, 10.0, 18.0, 25.0, 40.0];

fn coverage_peak() -> Outcome {
    let seeds = 5;
    let ticks = 300;
    let coverage: Vec<f64> = COVERAGE_BEAMWIDTHS
        .iter()
        .map(|&bw| {
            let per_seed: Vec<f64> = (0..seeds)
                .map(|seed| {
                    let recs = run(&scenario(40, ServiceType::S1, StrategyKind::AbfPerceptron, bw, seed, ticks)).unwrap();
                    user_coverage(&recs, 40)
                })
                .collect();
            mean(&per_seed)
        })
        .collect();
    let argmax = coverage
        .iter()
        .enumerate()
        .fold(0, |best, (i, &c)| if c > coverage[best] { i } else { best });
    let interior = argmax != 0 && argmax != coverage.len() - 1;
    let shown: Vec<String> = COVERAGE_BEAMWIDTHS
        .iter()
        .zip(&coverage)
        .map(|(bw, c)| format!("{bw}:{c:.3}"))
        .collect();
    outcome(
        interior,
        format!("N=40 S1 ABF-perceptron, {seeds} seeds: coverage {}; argmax delta={}", shown.join(" "), COVERAGE_BEAMWIDTHS[argmax]),
    )
}

fn per_user_metrics(recs: &[SlotRecord], n: usize) -> Vec<ConfusionCounts> {
    (0..n)
        .map(|u| ConfusionCounts::from_records(recs.iter().filter(|r| r.user == u)))
        .collect()
}

fn classifier_band() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for kind in [StrategyKind::AbfPerceptron, StrategyKind::AbfSgd] {
        let recs = run(&scenario(40, ServiceType::S1, kind, 10.0, 0, 1000)).unwrap();
        let users = per_user_metrics(&recs, 40);
        let metrics: Vec<_> = users.iter().map(classifier_metrics).collect();
        let in_band = metrics
            .iter()
            .filter(|m| m.accuracy.is_some_and(|a| (0.3..=0.9).contains(&a)))
            .count();
        let precision: Vec<f64> = metrics.iter().filter_map(|m| m.precision).collect();
        let recall: Vec<f64> = metrics.iter().filter_map(|m| m.recall).collect();
        let (p, r) = (mean(&precision), mean(&recall));
        let accuracy: Vec<f64> = metrics.iter().filter_map(|m| m.accuracy).collect();
        let good = in_band * 10 >= 40 * 9 && r > p;
        ok &= good;
        lines.push(format!(
            "{kind}: {in_band}/40 users in [30%,90%] (mean acc {:.2}), mean precision {p:.3} vs recall {r:.3}{}",
            mean(&accuracy),
            if good { "" } else { " <- fails" }
        ));
    }
    outcome(ok, format!("S1 delta=10, 40 users: {}", lines.join("; ")))
}

fn timing_audit() -> Outcome {
    let mut checked = 0;
    let mut mismatches = 0;
    for seed in 0..6u64 {
        for kind in [StrategyKind::Baseline, StrategyKind::Aaf, StrategyKind::AbfPerceptron, StrategyKind::AbfSgd] {
            let bw = [2.0, 7.0, 15.0][seed as usize % 3];
            let service = if seed % 2 == 0 { ServiceType::S1 } else { ServiceType::S2 };
            let s = scenario(1, service, kind, bw, 500 + seed, 1000);
            let recs = run(&s).unwrap();
            let t = time_totals(&recs);
            let (cot, rt, ot, total) = closed_form_totals(&recs, &s.timing);
            checked += 1;
            if (t.cot, t.realignment, t.outage, t.total) != (cot, rt, ot, total) {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{checked} traces of 1000 slots, {mismatches} with OT/RT/COT differing from closed form"),
    )
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig::parse(
        "users = 4\nticks = 150\nbeamwidth = [3, 10, 25]\nstrategy = [baseline, aaf, abf_perceptron, abf_sgd]\n\
         service = [S1, S2]\nseed = [0, 1]\n",
        None,
    )
    .unwrap();
    let render = |workers| {
        let rows = run_sweep(&cfg, 0, workers).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &cfg, 0, &rows).unwrap();
        buf
    };
    let a = render(1);
    let b = render(1);
    let c = render(4);
    outcome(
        a == b && a == c,
        format!(
            "{} bytes; repeat run identical: {}, workers 1 vs 4 identical: {}",
            a.len(),
            a == b,
            a == c
        ),
    )
}

fn aaf_boundary() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for alpha in [0.1, 0.25, 0.5, 1.0] {
        let timing = thzsim::linkstate::TimingConfig {
            alpha,
            ..Default::default()
        };
        let fail = timing.fail();
        let at = aaf_step(&timing, fail).align_now;
        let above = aaf_step(&timing, fail.next_up()).align_now;
        let above_eps = aaf_step(&timing, fail + 1e-9).align_now;
        ok &= !at && above && above_eps;
        notes.push(format!("alpha={alpha}: at T_fail realign={at}, T_fail+eps realign={above}"));
    }
    let ack_ok = !aaf_step(&Default::default(), ack_wait(true)).align_now
        && aaf_step(&Default::default(), ack_wait(false)).align_now;
    ok &= ack_ok;
    outcome(ok, format!("{}; ACK/no-ACK handled: {ack_ok}", notes.join(", ")))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 rate oracle equivalence", Duration::from_secs(1), rate_oracle_equivalence),
        ("2 classifier correctness", Duration::from_secs(5), classifier_correctness),
        ("3 misalignment falls with beamwidth", Duration::from_secs(120), misalignment_trend),
        ("4 ABF needs fewer alignments than AAF", Duration::from_secs(120), abf_beats_aaf),
        ("5 coverage peaks at interior beamwidth", Duration::from_secs(600), coverage_peak),
        ("6 classifier quality band", Duration::from_secs(300), classifier_band),
        ("7 state timing audit", Duration::from_secs(5), timing_audit),
        ("8 determinism", Duration::from_secs(120), determinism),
        ("9 AAF boundary semantics", Duration::from_secs(1), aaf_boundary),
    ];
    let mut failed = Vec::new();
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = result.pass && in_time;
        println!(
            "{} criterion {name}: {} [{:.2}s, budget {}s{}]",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
        if !pass {
            failed.push(name);
        }
    }
    println!("acceptance: {}/9 criteria pass", 9 - failed.len());
    if !failed.is_empty() {
        println!("failing: {}", failed.join(", "));
        if std::env::var("THZSIM_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
