//! Per-user 6-DoF pose traces: random-waypoint walking in a cube room with a
//! vertical bob and sinusoidal yaw/pitch/roll plus Gaussian jitter.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::math::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ServiceType {
    /// High mobility (action gaming).
    S1,
    /// Constrained mobility (walking).
    S2,
}

impl fmt::Display for ServiceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ServiceType::S1 => "S1",
            ServiceType::S2 => "S2",
        })
    }
}

impl FromStr for ServiceType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S1" => Ok(ServiceType::S1),
            "S2" => Ok(ServiceType::S2),
            other => Err(Error::validation("service", format!("unknown service type `{other}`"))),
        }
    }
}

/// Mobility parameters of one service type.
///
/// Planar and vertical values are speeds in m/s (mean and standard deviation
/// of a normal draw). Rotation peaks are in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceProfile {
    pub name: ServiceType,
    pub dxy_mean: f64,
    pub dxy_std: f64,
    pub dz_mean: f64,
    pub dz_std: f64,
    pub yaw_peak: f64,
    pub pitch_peak: f64,
    pub roll_peak: f64,
    /// Period of the rotation (and vertical bob) sinusoids, s.
    pub rotation_period: f64,
    pub rotation_noise_std: f64,
    pub base_height: f64,
}

impl ServiceProfile {
    pub fn s1() -> Self {
        Self {
            name: ServiceType::S1,
            dxy_mean: 1.0,
            dxy_std: 0.5,
            dz_mean: 0.5,
            dz_std: 0.05,
            yaw_peak: 15.5,
            pitch_peak: 13.8,
            roll_peak: 15.0,
            rotation_period: 1.0,
            rotation_noise_std: 0.5,
            base_height: 1.5,
        }
    }

    pub fn s2() -> Self {
        Self {
            name: ServiceType::S2,
            dxy_mean: 0.9,
            dxy_std: 0.7,
            dz_mean: 0.094,
            dz_std: 0.02,
            yaw_peak: 4.0,
            pitch_peak: 5.0,
            roll_peak: 5.0,
            rotation_period: 2.0,
            rotation_noise_std: 0.5,
            base_height: 1.5,
        }
    }

    pub fn for_service(service: ServiceType) -> Self {
        match service {
            ServiceType::S1 => Self::s1(),
            ServiceType::S2 => Self::s2(),
        }
    }

    /// A profile that never moves; handy for static-world checks.
    pub fn stationary(name: ServiceType) -> Self {
        Self {
            name,
            dxy_mean: 0.0,
            dxy_std: 0.0,
            dz_mean: 0.0,
            dz_std: 0.0,
            yaw_peak: 0.0,
            pitch_peak: 0.0,
            roll_peak: 0.0,
            rotation_period: 1.0,
            rotation_noise_std: 0.0,
            base_height: 1.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("dxy_mean", self.dxy_mean),
            ("dxy_std", self.dxy_std),
            ("dz_mean", self.dz_mean),
            ("dz_std", self.dz_std),
            ("yaw_peak", self.yaw_peak),
            ("pitch_peak", self.pitch_peak),
            ("roll_peak", self.roll_peak),
            ("rotation_period", self.rotation_period),
            ("rotation_noise_std", self.rotation_noise_std),
            ("base_height", self.base_height),
        ];
        for (key, v) in fields {
            if !v.is_finite() {
                return Err(Error::validation(key, format!("must be finite, got {v}")));
            }
        }
        for (key, v) in [
            ("dxy_std", self.dxy_std),
            ("dz_std", self.dz_std),
            ("rotation_noise_std", self.rotation_noise_std),
            ("yaw_peak", self.yaw_peak),
            ("pitch_peak", self.pitch_peak),
            ("roll_peak", self.roll_peak),
        ] {
            if v < 0.0 {
                return Err(Error::validation(key, format!("must be >= 0, got {v}")));
            }
        }
        if self.rotation_period <= 0.0 {
            return Err(Error::validation("rotation_period", "must be > 0"));
        }
        Ok(())
    }
}

/// Yaw, pitch and roll in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Orientation {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Orientation {
    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self { yaw, pitch, roll }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Orientation,
}

impl Pose {
    pub fn is_finite(&self) -> bool {
        let o = self.orientation;
        self.position.is_finite() && o.yaw.is_finite() && o.pitch.is_finite() && o.roll.is_finite()
    }
}

/// Cube-shaped room with the access point mounted at `ap_position`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomGeometry {
    pub side: f64,
    pub ap_position: Vec3,
}

impl Default for RoomGeometry {
    fn default() -> Self {
        Self {
            side: 6.0,
            ap_position: Vec3::new(3.0, 3.0, 6.0),
        }
    }
}

impl RoomGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.side > 0.0 && self.side.is_finite()) {
            return Err(Error::validation("room_side", "must be positive"));
        }
        let p = self.ap_position;
        let inside = |c: f64| (0.0..=self.side).contains(&c);
        if !(inside(p.x) && inside(p.y) && inside(p.z)) {
            return Err(Error::validation("ap_position", "must lie inside the room"));
        }
        Ok(())
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(0.0, self.side)
    }
}

/// Generated pose sequence plus the random draws that shaped it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt: f64,
    pub poses: Vec<Pose>,
    /// Phase offsets (radians) of the yaw, pitch and roll sinusoids.
    pub rotation_phases: [f64; 3],
    /// Peak-to-centre height of the vertical bob, m.
    pub bob_amplitude: f64,
}

/// `peak * sin(2 pi t / period + phase)`, the noiseless rotation angle.
pub fn rotation_angle(peak: f64, period: f64, phase: f64, t: f64) -> f64 {
    peak * (2.0 * PI * t / period + phase).sin()
}

fn normal(mean: f64, std: f64) -> Normal<f64> {
    Normal::new(mean, std).expect("validated profile has finite std >= 0")
}

/// Builds a deterministic trace of `ticks` poses spaced `dt` seconds apart.
///
/// Positions follow a random waypoint walk: a uniform target in the floor
/// square, approached at a speed drawn from `N(dxy_mean, dxy_std)` clamped at
/// zero, with a fresh target and speed on arrival. Height oscillates around
/// `base_height` with the peak vertical speed drawn once from
/// `N(dz_mean, dz_std)`. Each rotation axis is a sinusoid with its own
/// uniformly drawn phase plus per-sample `N(0, rotation_noise_std)` jitter.
pub fn generate_trace(
    profile: &ServiceProfile,
    room: &RoomGeometry,
    ticks: usize,
    dt: f64,
    seed: u64,
) -> Result<Trace> {
    generate_trace_with_rng(profile, room, ticks, dt, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Same as [`generate_trace`] but drawing from a caller-provided stream.
pub fn generate_trace_with_rng(
    profile: &ServiceProfile,
    room: &RoomGeometry,
    ticks: usize,
    dt: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Trace> {
    profile.validate()?;
    room.validate()?;
    if ticks == 0 {
        return Err(Error::validation("ticks", "must be >= 1"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::validation("dt", "must be > 0"));
    }

    let speed_dist = normal(profile.dxy_mean, profile.dxy_std);
    let draw_speed = |rng: &mut ChaCha8Rng| speed_dist.sample(rng).max(0.0);
    let side = room.side;
    let waypoint = |rng: &mut ChaCha8Rng| (rng.random_range(0.0..=side), rng.random_range(0.0..=side));

    let (mut x, mut y) = waypoint(rng);
    let mut target = waypoint(rng);
    let mut speed = draw_speed(rng);

    let phases = [
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
    ];
    let bob_phase = rng.random_range(0.0..2.0 * PI);
    let vertical_speed = normal(profile.dz_mean, profile.dz_std).sample(rng).max(0.0);
    // peak speed of A sin(2 pi t / P) is 2 pi A / P
    let bob_amplitude = vertical_speed * profile.rotation_period / (2.0 * PI);
    let jitter = normal(0.0, profile.rotation_noise_std);

    let mut poses = Vec::with_capacity(ticks);
    for tick in 0..ticks {
        let t = tick as f64 * dt;
        if tick > 0 {
            let mut step = speed * dt;
            while step > 0.0 {
                let (dx, dy) = (target.0 - x, target.1 - y);
                let dist = dx.hypot(dy);
                if dist > step {
                    x += dx / dist * step;
                    y += dy / dist * step;
                    break;
                }
                // arrive, then continue toward a fresh waypoint with what is left
                x = target.0;
                y = target.1;
                step -= dist;
                target = waypoint(rng);
                speed = draw_speed(rng);
                step = step.min(speed * dt);
            }
        }
        let z = profile.base_height + bob_amplitude * (2.0 * PI * t / profile.rotation_period + bob_phase).sin();
        let peaks = [profile.yaw_peak, profile.pitch_peak, profile.roll_peak];
        let mut angles = [0.0; 3];
        for axis in 0..3 {
            angles[axis] = rotation_angle(peaks[axis], profile.rotation_period, phases[axis], t);
            if profile.rotation_noise_std > 0.0 {
                angles[axis] += jitter.sample(rng);
            }
        }
        poses.push(Pose {
            position: Vec3::new(room.clamp(x), room.clamp(y), room.clamp(z)),
            orientation: Orientation::new(angles[0], angles[1], angles[2]),
        });
    }
    Ok(Trace {
        dt,
        poses,
        rotation_phases: phases,
        bob_amplitude,
    })
}

/// Wraps an angle in degrees to (-180, 180].
pub fn wrap_degrees(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoseDelta {
    pub position: Vec3,
    pub orientation: Orientation,
}

pub fn pose_delta(prev: &Pose, curr: &Pose) -> PoseDelta {
    let (a, b) = (prev.orientation, curr.orientation);
    PoseDelta {
        position: curr.position - prev.position,
        orientation: Orientation::new(
            wrap_degrees(b.yaw - a.yaw),
            wrap_degrees(b.pitch - a.pitch),
            wrap_degrees(b.roll - a.roll),
        ),
    }
}

/// Writes `tick x y z yaw pitch roll` rows.
pub fn write_trace<W: Write>(mut out: W, poses: &[Pose]) -> Result<()> {
    for (tick, p) in poses.iter().enumerate() {
        let o = p.orientation;
        writeln!(
            out,
            "{tick} {} {} {} {} {} {}",
            p.position.x, p.position.y, p.position.z, o.yaw, o.pitch, o.roll
        )?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<Pose>> {
    let mut poses = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        if cols.len() != 7 {
            return Err(parse_err(format!("expected 7 columns, found {}", cols.len())));
        }
        let tick: usize = cols[0]
            .parse()
            .map_err(|_| parse_err(format!("bad tick `{}`", cols[0])))?;
        if tick != poses.len() {
            return Err(parse_err(format!("expected tick {}, found {tick}", poses.len())));
        }
        let mut v = [0.0; 6];
        for (slot, tok) in v.iter_mut().zip(&cols[1..]) {
            *slot = tok.parse().map_err(|_| parse_err(format!("bad number `{tok}`")))?;
        }
        poses.push(Pose {
            position: Vec3::new(v[0], v[1], v[2]),
            orientation: Orientation::new(v[3], v[4], v[5]),
        });
    }
    Ok(poses)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_profile_holds_spawn_pose() {
        let room = RoomGeometry::default();
        let trace = generate_trace(&ServiceProfile::stationary(ServiceType::S1), &room, 50, 1e-3, 3).unwrap();
        let first = trace.poses[0];
        assert_eq!(first.position.z, 1.5);
        assert_eq!(first.orientation, Orientation::default());
        assert!(trace.poses.iter().all(|p| *p == first));
    }

    #[test]
    fn yaw_peaks_at_quarter_period() {
        let p = ServiceProfile::s1();
        let yaw = rotation_angle(p.yaw_peak, p.rotation_period, 0.0, p.rotation_period / 4.0);
        assert!((yaw - 15.5).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_trace() {
        let room = RoomGeometry::default();
        let a = generate_trace(&ServiceProfile::s1(), &room, 500, 1e-3, 9).unwrap();
        let b = generate_trace(&ServiceProfile::s1(), &room, 500, 1e-3, 9).unwrap();
        assert_eq!(a, b);
        let c = generate_trace(&ServiceProfile::s1(), &room, 500, 1e-3, 10).unwrap();
        assert_ne!(a.poses, c.poses);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let room = RoomGeometry::default();
        let mut p = ServiceProfile::s2();
        p.yaw_peak = f64::NAN;
        assert!(matches!(
            generate_trace(&p, &room, 10, 1e-3, 0),
            Err(Error::Validation { key, .. }) if key == "yaw_peak"
        ));
        let mut p = ServiceProfile::s2();
        p.rotation_period = 0.0;
        assert!(generate_trace(&p, &room, 10, 1e-3, 0).is_err());
        assert!(generate_trace(&ServiceProfile::s2(), &room, 0, 1e-3, 0).is_err());
        assert!(generate_trace(&ServiceProfile::s2(), &room, 10, 0.0, 0).is_err());
    }

    #[test]
    fn delta_of_identical_poses_is_zero() {
        let p = Pose {
            position: Vec3::new(1.0, 2.0, 1.5),
            orientation: Orientation::new(10.0, -3.0, 4.0),
        };
        assert_eq!(pose_delta(&p, &p), PoseDelta::default());
    }

    #[test]
    fn yaw_delta_wraps() {
        let a = Pose {
            orientation: Orientation::new(179.0, 0.0, 0.0),
            ..Pose::default()
        };
        let b = Pose {
            orientation: Orientation::new(-179.0, 0.0, 0.0),
            ..Pose::default()
        };
        assert!((pose_delta(&a, &b).orientation.yaw - 2.0).abs() < 1e-12);
        assert!((pose_delta(&b, &a).orientation.yaw + 2.0).abs() < 1e-12);
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_degrees(180.0), 180.0);
        assert_eq!(wrap_degrees(-180.0), 180.0);
        assert_eq!(wrap_degrees(540.0), 180.0);
        assert!((wrap_degrees(-190.0) - 170.0).abs() < 1e-12);
    }

    #[test]
    fn trace_text_round_trip() {
        let trace = generate_trace(&ServiceProfile::s1(), &RoomGeometry::default(), 20, 1e-3, 1).unwrap();
        let mut buf = Vec::new();
        write_trace(&mut buf, &trace.poses).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back, trace.poses);
        assert!(read_trace("0 1 2 3\n".as_bytes()).is_err());
        assert!(read_trace("1 0 0 0 0 0 0\n".as_bytes()).is_err());
    }

    #[test]
    fn service_parse() {
        assert_eq!("s1".parse::<ServiceType>().unwrap(), ServiceType::S1);
        assert!("S3".parse::<ServiceType>().is_err());
    }
}
