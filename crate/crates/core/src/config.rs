//! Flat `key = value` experiment configuration with list-valued sweep axes.
//!
//! ```text
//! # comment
//! users = 40
//! beamwidth = [1, 5, 10, 20, 40]
//! strategy = [aaf, abf_perceptron]
//! s1.yaw_peak = 12
//! ```
//!
//! Every key is optional; missing keys take their defaults.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::channel::{AbsorptionTable, ChannelModel};
use crate::engine::{Scenario, UserSpec, DEFAULT_DEMAND, DEFAULT_USERS};
use crate::error::{Error, Result};
use crate::geometry::{FailurePrecedence, MovementThresholds};
use crate::linkstate::TimingConfig;
use crate::math::Vec3;
use crate::mobility::{RoomGeometry, ServiceProfile, ServiceType};
use crate::strategies::{AbfOptions, StrategyKind};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub users: usize,
    pub demand: f64,
    pub ticks: usize,
    /// `alpha` here is ignored; the sweep axis supplies it per cell.
    pub timing: TimingConfig,
    pub abf: AbfOptions,
    pub channel: ChannelModel,
    /// Source of `channel.absorption` when not the built-in table.
    pub absorption_table: Option<PathBuf>,
    pub room: RoomGeometry,
    pub thresholds: MovementThresholds,
    pub precedence: FailurePrecedence,
    pub s1: ServiceProfile,
    pub s2: ServiceProfile,

    pub beamwidths: Vec<f64>,
    pub alphas: Vec<f64>,
    pub strategies: Vec<StrategyKind>,
    pub services: Vec<ServiceType>,
    pub seeds: Vec<u64>,
    pub output: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            users: DEFAULT_USERS,
            demand: DEFAULT_DEMAND,
            ticks: 1000,
            timing: TimingConfig::default(),
            abf: AbfOptions::default(),
            channel: ChannelModel::default(),
            absorption_table: None,
            room: RoomGeometry::default(),
            thresholds: MovementThresholds::default(),
            precedence: FailurePrecedence::default(),
            s1: ServiceProfile::s1(),
            s2: ServiceProfile::s2(),
            beamwidths: vec![1.0, 3.0, 5.0, 10.0, 18.0, 25.0, 40.0],
            alphas: vec![0.25],
            strategies: vec![
                StrategyKind::Baseline,
                StrategyKind::Aaf,
                StrategyKind::AbfPerceptron,
                StrategyKind::AbfSgd,
            ],
            services: vec![ServiceType::S1, ServiceType::S2],
            seeds: vec![0],
            output: "results.csv".to_string(),
        }
    }
}

const PROFILE_FIELDS: [&str; 10] = [
    "dxy_mean",
    "dxy_std",
    "dz_mean",
    "dz_std",
    "yaw_peak",
    "pitch_peak",
    "roll_peak",
    "rotation_period",
    "rotation_noise_std",
    "base_height",
];

fn profile_field<'a>(p: &'a mut ServiceProfile, field: &str) -> Option<&'a mut f64> {
    Some(match field {
        "dxy_mean" => &mut p.dxy_mean,
        "dxy_std" => &mut p.dxy_std,
        "dz_mean" => &mut p.dz_mean,
        "dz_std" => &mut p.dz_std,
        "yaw_peak" => &mut p.yaw_peak,
        "pitch_peak" => &mut p.pitch_peak,
        "roll_peak" => &mut p.roll_peak,
        "rotation_period" => &mut p.rotation_period,
        "rotation_noise_std" => &mut p.rotation_noise_std,
        "base_height" => &mut p.base_height,
        _ => return None,
    })
}

fn split_list(raw: &str) -> Vec<&str> {
    let raw = raw.trim();
    let inner = raw
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .unwrap_or(raw);
    inner.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn num(key: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Error::validation(key, format!("expected a number, got `{raw}`")))?;
    if !v.is_finite() {
        return Err(Error::validation(key, "must be finite"));
    }
    Ok(v)
}

fn count(key: &str, raw: &str) -> Result<usize> {
    raw.trim()
        .parse()
        .map_err(|_| Error::validation(key, format!("expected a non-negative integer, got `{raw}`")))
}

fn flag(key: &str, raw: &str) -> Result<bool> {
    match raw.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::validation(key, format!("expected true or false, got `{other}`"))),
    }
}

fn list<T>(key: &str, raw: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items = split_list(raw);
    if items.is_empty() {
        return Err(Error::validation(key, "sweep axis must not be empty"));
    }
    items.into_iter().map(parse).collect()
}

fn fmt_list<T: std::fmt::Display>(items: &[T]) -> String {
    let parts: Vec<String> = items.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

impl ExperimentConfig {
    /// Parses config text. Relative `absorption_table` paths are resolved
    /// against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        let mut seen = BTreeSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
            c.set(key, value, base_dir)?;
        }
        c.validate()?;
        Ok(c)
    }

    fn set(&mut self, key: &str, v: &str, base_dir: Option<&Path>) -> Result<()> {
        match key {
            "users" => self.users = count(key, v)?,
            "demand" => self.demand = num(key, v)?,
            "ticks" => self.ticks = count(key, v)?,
            "t_slot" => self.timing.slot = num(key, v)?,
            "t_align" => self.timing.align = num(key, v)?,
            "dt" => self.timing.dt = num(key, v)?,
            "learning_rate" => self.abf.learning_rate = num(key, v)?,
            "retrain_on_align" => self.abf.retrain_on_align = flag(key, v)?,
            "feature_timing" => self.abf.feature_timing = v.parse()?,
            "humidity" => self.channel.humidity = num(key, v)?,
            "transmit_power" => self.channel.transmit_power = num(key, v)?,
            "noise_psd" => self.channel.noise_psd = num(key, v)?,
            "window_step" => self.channel.window_step = num(key, v)?,
            "max_window" => self.channel.max_window = num(key, v)?,
            "absorption_table" => {
                let path = PathBuf::from(v);
                let resolved = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(&path),
                    _ => path.clone(),
                };
                self.channel.absorption = AbsorptionTable::load(&resolved)
                    .map_err(|e| Error::validation(key, format!("{}: {e}", resolved.display())))?;
                self.absorption_table = Some(path);
            }
            "room_side" => self.room.side = num(key, v)?,
            "ap_position" => {
                let xyz = list(key, v, |s| num(key, s))?;
                if xyz.len() != 3 {
                    return Err(Error::validation(key, "expected [x, y, z]"));
                }
                self.room.ap_position = Vec3::new(xyz[0], xyz[1], xyz[2]);
            }
            "location_threshold" => self.thresholds.location = num(key, v)?,
            "orientation_threshold" => self.thresholds.orientation = num(key, v)?,
            "failure_precedence" => {
                self.precedence = match v {
                    "orientation" => FailurePrecedence::Orientation,
                    "location" => FailurePrecedence::Location,
                    _ => return Err(Error::validation(key, "expected orientation or location")),
                }
            }
            "beamwidth" => self.beamwidths = list(key, v, |s| num(key, s))?,
            "alpha" => self.alphas = list(key, v, |s| num(key, s))?,
            "strategy" => self.strategies = list(key, v, str::parse)?,
            "service" => self.services = list(key, v, str::parse)?,
            "seed" => {
                self.seeds = list(key, v, |s| {
                    s.parse()
                        .map_err(|_| Error::validation(key, format!("expected an unsigned integer, got `{s}`")))
                })?
            }
            "output" => self.output = v.to_string(),
            _ => {
                let target = match key.split_once('.') {
                    Some(("s1", field)) => profile_field(&mut self.s1, field),
                    Some(("s2", field)) => profile_field(&mut self.s2, field),
                    _ => None,
                };
                match target {
                    Some(slot) => *slot = num(key, v)?,
                    None => return Err(Error::validation(key, "unknown key")),
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(Error::validation("users", "must be >= 1"));
        }
        if !(self.demand > 0.0) {
            return Err(Error::validation("demand", "must be > 0"));
        }
        if self.ticks == 0 {
            return Err(Error::validation("ticks", "must be >= 1"));
        }
        if !(self.abf.learning_rate > 0.0) {
            return Err(Error::validation("learning_rate", "must be > 0"));
        }
        if !(self.thresholds.location >= 0.0) {
            return Err(Error::validation("location_threshold", "must be >= 0"));
        }
        if !(self.thresholds.orientation >= 0.0) {
            return Err(Error::validation("orientation_threshold", "must be >= 0"));
        }
        self.channel.validate()?;
        self.room.validate()?;
        for (prefix, p) in [("s1", &self.s1), ("s2", &self.s2)] {
            p.validate().map_err(|e| match e {
                Error::Validation { key, message } => Error::validation(&format!("{prefix}.{key}"), message),
                other => other,
            })?;
        }
        for &b in &self.beamwidths {
            if !(b > 0.0 && b <= 360.0) {
                return Err(Error::validation("beamwidth", format!("must lie in (0, 360] degrees, got {b}")));
            }
        }
        for &alpha in &self.alphas {
            TimingConfig { alpha, ..self.timing }.validate()?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    /// Serializes every setting; parsing the result yields an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("users", self.users.to_string());
        kv("demand", self.demand.to_string());
        kv("ticks", self.ticks.to_string());
        kv("t_slot", self.timing.slot.to_string());
        kv("t_align", self.timing.align.to_string());
        kv("dt", self.timing.dt.to_string());
        kv("learning_rate", self.abf.learning_rate.to_string());
        kv("retrain_on_align", self.abf.retrain_on_align.to_string());
        kv("feature_timing", self.abf.feature_timing.to_string());
        kv("humidity", self.channel.humidity.to_string());
        kv("transmit_power", self.channel.transmit_power.to_string());
        kv("noise_psd", self.channel.noise_psd.to_string());
        kv("window_step", self.channel.window_step.to_string());
        kv("max_window", self.channel.max_window.to_string());
        if let Some(p) = &self.absorption_table {
            kv("absorption_table", p.display().to_string());
        }
        kv("room_side", self.room.side.to_string());
        let ap = self.room.ap_position;
        kv("ap_position", fmt_list(&[ap.x, ap.y, ap.z]));
        kv("location_threshold", self.thresholds.location.to_string());
        kv("orientation_threshold", self.thresholds.orientation.to_string());
        let precedence = match self.precedence {
            FailurePrecedence::Orientation => "orientation",
            FailurePrecedence::Location => "location",
        };
        kv("failure_precedence", precedence.to_string());
        for (prefix, p) in [("s1", &self.s1), ("s2", &self.s2)] {
            let mut p = p.clone();
            for field in PROFILE_FIELDS {
                let v = *profile_field(&mut p, field).expect("listed field");
                kv(&format!("{prefix}.{field}"), v.to_string());
            }
        }
        kv("beamwidth", fmt_list(&self.beamwidths));
        kv("alpha", fmt_list(&self.alphas));
        kv("strategy", fmt_list(&self.strategies));
        kv("service", fmt_list(&self.services));
        kv("seed", fmt_list(&self.seeds));
        kv("output", self.output.clone());
        s
    }

    pub fn profile(&self, service: ServiceType) -> &ServiceProfile {
        match service {
            ServiceType::S1 => &self.s1,
            ServiceType::S2 => &self.s2,
        }
    }

    /// Scenario for one sweep cell.
    pub fn scenario(
        &self,
        beamwidth: f64,
        alpha: f64,
        strategy: StrategyKind,
        service: ServiceType,
        seed: u64,
    ) -> Scenario {
        Scenario {
            room: self.room,
            users: vec![
                UserSpec {
                    profile: self.profile(service).clone(),
                    demand: self.demand,
                    strategy,
                };
                self.users
            ],
            beamwidth,
            timing: TimingConfig { alpha, ..self.timing },
            channel: self.channel.clone(),
            ticks: self.ticks,
            seed,
            abf: self.abf,
            thresholds: self.thresholds,
            precedence: self.precedence,
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path)
}
