//! Runs the (beamwidth x alpha x strategy x service x seed) grid of an
//! experiment config and renders it as CSV.

use std::io::Write;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::engine::{run, SlotRecord};
use crate::error::{Error, Result};
use crate::metrics::{
    classifier_metrics, misalignment_rate, outage_time_fraction, user_coverage, ClassifierMetrics, ConfusionCounts,
};
use crate::mobility::ServiceType;
use crate::strategies::StrategyKind;

pub const ARTIFACT_VERSION: &str = concat!("thzsim-core ", env!("CARGO_PKG_VERSION"));
pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "beamwidth,alpha,strategy,service,seed,misalignment_rate,user_coverage,\
accuracy,precision,recall,f1,mean_rate,outage_time_fraction,error";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub beamwidth: f64,
    pub alpha: f64,
    pub strategy: StrategyKind,
    pub service: ServiceType,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub misalignment_rate: f64,
    pub user_coverage: f64,
    pub classifier: ClassifierMetrics,
    pub mean_rate: f64,
    pub outage_time_fraction: f64,
}

pub fn summarize(records: &[SlotRecord], users: usize) -> RunSummary {
    RunSummary {
        misalignment_rate: misalignment_rate(records),
        user_coverage: user_coverage(records, users),
        classifier: classifier_metrics(&ConfusionCounts::from_records(records)),
        mean_rate: crate::metrics::mean_rate(records),
        outage_time_fraction: outage_time_fraction(records),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: Cell,
    pub outcome: std::result::Result<RunSummary, String>,
}

/// Grid cells in output order; `seed_offset` is added to every seed.
pub fn cells(config: &ExperimentConfig, seed_offset: u64) -> Vec<Cell> {
    let mut out = Vec::new();
    for &beamwidth in &config.beamwidths {
        for &alpha in &config.alphas {
            for &strategy in &config.strategies {
                for &service in &config.services {
                    for &seed in &config.seeds {
                        out.push(Cell {
                            beamwidth,
                            alpha,
                            strategy,
                            service,
                            seed: seed.wrapping_add(seed_offset),
                        });
                    }
                }
            }
        }
    }
    out
}

pub fn run_cell(config: &ExperimentConfig, cell: &Cell) -> Result<RunSummary> {
    let scenario = config.scenario(cell.beamwidth, cell.alpha, cell.strategy, cell.service, cell.seed);
    let records = run(&scenario)?;
    Ok(summarize(&records, scenario.users.len()))
}

/// Runs `cells` on a pool of `workers` threads. Results keep the input order
/// and do not depend on the worker count; a failing cell is reported in its
/// row without stopping the others.
pub fn run_cells(config: &ExperimentConfig, cells: &[Cell], workers: usize) -> Result<Vec<CellResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Io(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .map(|cell| CellResult {
                cell: *cell,
                outcome: run_cell(config, cell).map_err(|e| e.to_string()),
            })
            .collect()
    }))
}

pub fn run_sweep(config: &ExperimentConfig, seed_offset: u64, workers: usize) -> Result<Vec<CellResult>> {
    config.validate()?;
    run_cells(config, &cells(config, seed_offset), workers)
}

/// SHA-256 of the canonical config text, hex encoded.
pub fn config_hash(config: &ExperimentConfig) -> String {
    Sha256::digest(config.to_text().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_csv<W: Write>(mut out: W, config: &ExperimentConfig, seed_offset: u64, rows: &[CellResult]) -> Result<()> {
    writeln!(out, "# artifact_version: {ARTIFACT_VERSION}")?;
    writeln!(out, "# schema_version: {CSV_SCHEMA_VERSION}")?;
    writeln!(out, "# config_sha256: {}", config_hash(config))?;
    writeln!(out, "# seed_offset: {seed_offset}")?;
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        let c = &row.cell;
        write!(out, "{},{},{},{},{},", c.beamwidth, c.alpha, c.strategy, c.service, c.seed)?;
        match &row.outcome {
            Ok(s) => writeln!(
                out,
                "{},{},{},{},{},{},{},{},",
                s.misalignment_rate,
                s.user_coverage,
                opt(s.classifier.accuracy),
                opt(s.classifier.precision),
                opt(s.classifier.recall),
                opt(s.classifier.f1),
                s.mean_rate,
                s.outage_time_fraction,
            )?,
            Err(e) => writeln!(out, ",,,,,,,,{}", csv_field(e))?,
        }
    }
    Ok(())
}
