//! Beam directions, AP/UE relative angles and link-state classification.

use crate::channel::antenna_gain;
use crate::error::{Error, Result};
use crate::linkstate::LinkState;
use crate::math::{Mat3, Vec3};
use crate::mobility::{Orientation, Pose, PoseDelta};

/// Direction and full beamwidth of a conical main lobe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    boresight: Vec3,
    beamwidth: f64,
}

impl Beam {
    pub fn new(boresight: Vec3, beamwidth: f64) -> Result<Self> {
        if !(beamwidth > 0.0 && beamwidth <= 360.0) {
            return Err(Error::Domain(format!(
                "beamwidth must lie in (0, 360] degrees, got {beamwidth}"
            )));
        }
        if !boresight.is_finite() || (boresight.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Domain("boresight must be a unit vector".into()));
        }
        Ok(Self { boresight, beamwidth })
    }

    pub fn boresight(&self) -> Vec3 {
        self.boresight
    }

    pub fn beamwidth(&self) -> f64 {
        self.beamwidth
    }
}

/// Device-to-world rotation: yaw about world z, then pitch (nose up
/// positive), then roll about the device reference axis (+x).
pub fn orientation_matrix(o: &Orientation) -> Mat3 {
    Mat3::rot_z(o.yaw)
        .mul(&Mat3::rot_y(-o.pitch))
        .mul(&Mat3::rot_x(o.roll))
}

/// World direction of the device reference axis. Roll spins the device about
/// this axis and leaves it unchanged.
pub fn boresight_from_pose(pose: &Pose) -> Vec3 {
    let (sy, cy) = pose.orientation.yaw.to_radians().sin_cos();
    let (sp, cp) = pose.orientation.pitch.to_radians().sin_cos();
    Vec3::new(cp * cy, cp * sy, sp)
}

/// Angular offsets of each boresight from the line of sight, plus range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Degrees between the AP boresight and the AP->UE direction.
    pub tx_offset: f64,
    /// Degrees between the UE boresight and the UE->AP direction.
    pub rx_offset: f64,
    pub distance: f64,
}

impl LinkGeometry {
    pub fn in_cone(&self, beamwidth_tx: f64, beamwidth_rx: f64) -> bool {
        self.tx_offset <= beamwidth_tx / 2.0 && self.rx_offset <= beamwidth_rx / 2.0
    }

    /// `G_t * G_r` under the flat-cone pattern: full gain inside both cones,
    /// zero as soon as either end points away.
    pub fn gain_product(&self, beamwidth_tx: f64, beamwidth_rx: f64) -> Result<f64> {
        let g = antenna_gain(beamwidth_tx)? * antenna_gain(beamwidth_rx)?;
        Ok(if self.in_cone(beamwidth_tx, beamwidth_rx) { g } else { 0.0 })
    }

    /// Individual gains `(G_t, G_r)`, each zero outside its own cone.
    pub fn gains(&self, beamwidth_tx: f64, beamwidth_rx: f64) -> Result<(f64, f64)> {
        let gt = if self.tx_offset <= beamwidth_tx / 2.0 { antenna_gain(beamwidth_tx)? } else { 0.0 };
        let gr = if self.rx_offset <= beamwidth_rx / 2.0 { antenna_gain(beamwidth_rx)? } else { 0.0 };
        Ok((gt, gr))
    }
}

pub fn link_geometry(ap_position: Vec3, ap_beam: &Beam, ue_position: Vec3, ue_beam: &Beam) -> Result<LinkGeometry> {
    let los = ue_position - ap_position;
    let distance = los.norm();
    let dir = los
        .normalized()
        .filter(|_| distance > 0.0)
        .ok_or_else(|| Error::Domain("AP and UE positions coincide".into()))?;
    Ok(LinkGeometry {
        tx_offset: ap_beam.boresight().angle_deg(dir),
        rx_offset: ue_beam.boresight().angle_deg(-dir),
        distance,
    })
}

/// Steering state of one AP/UE link.
///
/// The AP beam is fixed in world coordinates. The UE beam is fixed in the
/// device frame, so it turns with the user between alignments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPair {
    pub ap_direction: Vec3,
    pub ue_local_direction: Vec3,
}

impl BeamPair {
    pub fn ue_direction(&self, pose: &Pose) -> Vec3 {
        orientation_matrix(&pose.orientation).mul_vec(self.ue_local_direction)
    }

    pub fn geometry(&self, ap_position: Vec3, pose: &Pose, beamwidth: f64) -> Result<LinkGeometry> {
        let ap_beam = Beam::new(self.ap_direction, beamwidth)?;
        let ue_beam = Beam::new(self.ue_direction(pose), beamwidth)?;
        link_geometry(ap_position, &ap_beam, pose.position, &ue_beam)
    }
}

/// Points both beams along the AP-UE line of sight for the given pose.
pub fn align(ap_position: Vec3, pose: &Pose) -> Result<BeamPair> {
    let dir = (pose.position - ap_position)
        .normalized()
        .ok_or_else(|| Error::Domain("AP and UE positions coincide".into()))?;
    let rotation = orientation_matrix(&pose.orientation);
    Ok(BeamPair {
        ap_direction: dir,
        ue_local_direction: rotation.transpose().mul_vec(-dir),
    })
}

/// Which degrees of freedom changed noticeably over the last slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Motion {
    pub moved_location: bool,
    pub moved_orientation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovementThresholds {
    /// m
    pub location: f64,
    /// degrees, compared against the largest of the three angle changes
    pub orientation: f64,
}

impl Default for MovementThresholds {
    fn default() -> Self {
        Self {
            location: 0.01,
            orientation: 0.5,
        }
    }
}

impl MovementThresholds {
    pub fn motion(&self, delta: &PoseDelta) -> Motion {
        let o = delta.orientation;
        Motion {
            moved_location: delta.position.norm() > self.location,
            moved_orientation: o.yaw.abs().max(o.pitch.abs()).max(o.roll.abs()) > self.orientation,
        }
    }
}

/// Cause assigned to a failure when location and orientation both moved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FailurePrecedence {
    #[default]
    Orientation,
    Location,
}

/// Buckets one slot into states A-D.
///
/// Success (`rate_available >= rate_requested`) on beams aligned for this
/// slot is A; success on retained beams is B. Failures are C when caused by
/// location change and D when caused by rotation, with `precedence` breaking
/// ties. A failure with no recorded motion is blamed on location (the link
/// budget at that position is insufficient).
#[allow(clippy::too_many_arguments)]
pub fn classify_state(
    geom: &LinkGeometry,
    beamwidth_tx: f64,
    beamwidth_rx: f64,
    rate_available: f64,
    rate_requested: f64,
    motion: Motion,
    realigned: bool,
    precedence: FailurePrecedence,
) -> LinkState {
    if rate_available >= rate_requested {
        if realigned && geom.in_cone(beamwidth_tx, beamwidth_rx) {
            LinkState::A
        } else {
            LinkState::B
        }
    } else {
        match (motion.moved_location, motion.moved_orientation) {
            (true, true) => match precedence {
                FailurePrecedence::Orientation => LinkState::D,
                FailurePrecedence::Location => LinkState::C,
            },
            (false, true) => LinkState::D,
            _ => LinkState::C,
        }
    }
}
