use crate::joints::{joint_role, JointKind, Side, JOINT_COUNT};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

/// Trunk height (trunk center above ground) of the nominal stance.
pub const NOMINAL_TRUNK_HEIGHT: f64 = 0.78;

/// How far the nominal ankle targets sit behind the hips. The bent-knee
/// stance carries the leg mass forward; setting the feet back this much
/// puts the static center of mass over the foot centers.
pub const NOMINAL_STANCE_BACKSET: f64 = 0.022;

/// Rotation axis of a revolute joint, in the frame of its parent link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn vector(&self) -> Vector3<f64> {
        match self {
            Axis::X => Vector3::x(),
            Axis::Y => Vector3::y(),
            Axis::Z => Vector3::z(),
        }
    }
}

/// Name and axis of one joint in the 12-joint layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointInfo {
    pub name: String,
    pub side: Side,
    pub kind: JointKind,
    pub axis: Axis,
}

fn axis_of(kind: JointKind) -> Axis {
    match kind {
        JointKind::HipYaw => Axis::Z,
        JointKind::HipRoll => Axis::X,
        JointKind::HipPitch => Axis::Y,
        JointKind::KneePitch => Axis::Y,
        JointKind::AnklePitch => Axis::Y,
        JointKind::AnkleRoll => Axis::X,
    }
}

/// Per-link rotational inertia tensors about each link's center of mass,
/// expressed in the link frame. Boxes for trunk and foot, thick rods
/// (cylinders) for thigh and shank so every tensor stays positive definite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkInertias {
    pub trunk: Matrix3<f64>,
    pub thigh: Matrix3<f64>,
    pub shank: Matrix3<f64>,
    pub foot: Matrix3<f64>,
}

fn box_inertia(mass: f64, size: Vector3<f64>) -> Matrix3<f64> {
    let (x2, y2, z2) = (size.x * size.x, size.y * size.y, size.z * size.z);
    Matrix3::from_diagonal(&Vector3::new(
        mass / 12.0 * (y2 + z2),
        mass / 12.0 * (x2 + z2),
        mass / 12.0 * (x2 + y2),
    ))
}

/// Rod along the local z axis with a small radius.
fn rod_inertia(mass: f64, length: f64, radius: f64) -> Matrix3<f64> {
    let perp = mass * (length * length / 12.0 + radius * radius / 4.0);
    let axial = mass * radius * radius / 2.0;
    Matrix3::from_diagonal(&Vector3::new(perp, perp, axial))
}

/// Geometry, masses and joint layout of the 12-joint biped.
///
/// Immutable after construction; shared freely across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    /// Trunk bounding box (x, y, z), meters.
    pub trunk_size: Vector3<f64>,
    pub trunk_mass: f64,
    pub thigh_length: f64,
    pub shank_length: f64,
    pub foot_length: f64,
    pub thigh_mass: f64,
    pub shank_mass: f64,
    pub foot_mass: f64,
    /// Hip joint centers in the trunk frame, [left, right].
    pub hip_offsets: [Vector3<f64>; 2],
    pub foot_width: f64,
    /// Vertical distance from the ankle node down to the foot sole.
    pub sole_offset: f64,
    /// Radius used for the thigh/shank rod inertias.
    pub leg_radius: f64,
    /// (min, max) per joint, radians, indexed like `JointVector`.
    pub joint_limits: [(f64, f64); JOINT_COUNT],
    /// Inner/outer margins of the reachable shell around each hip.
    pub workspace_margin_inner: f64,
    pub workspace_margin_outer: f64,
    pub link_inertias: LinkInertias,
}

impl Default for RobotModel {
    fn default() -> Self {
        RobotConfig::default().build().expect("default model is valid")
    }
}

impl RobotModel {
    pub fn hip_offset(&self, side: Side) -> Vector3<f64> {
        match side {
            Side::Left => self.hip_offsets[0],
            Side::Right => self.hip_offsets[1],
        }
    }

    /// Full leg length (thigh + shank).
    pub fn leg_length(&self) -> f64 {
        self.thigh_length + self.shank_length
    }

    /// Maximum reachable hip-to-ankle distance after workspace clamping.
    pub fn workspace_outer(&self) -> f64 {
        self.leg_length() - self.workspace_margin_outer
    }

    /// Minimum hip-to-ankle distance after workspace clamping.
    pub fn workspace_inner(&self) -> f64 {
        self.workspace_margin_inner
    }

    pub fn total_mass(&self) -> f64 {
        self.trunk_mass + 2.0 * (self.thigh_mass + self.shank_mass + self.foot_mass)
    }

    /// Joint names and axes in `JointVector` order.
    pub fn joint_axis_layout(&self) -> Vec<JointInfo> {
        (0..JOINT_COUNT)
            .map(|i| {
                let (side, kind) = joint_role(i);
                let side_tag = match side {
                    Side::Left => "left",
                    Side::Right => "right",
                };
                let kind_tag = match kind {
                    JointKind::HipYaw => "hip_yaw",
                    JointKind::HipRoll => "hip_roll",
                    JointKind::HipPitch => "hip_pitch",
                    JointKind::KneePitch => "knee_pitch",
                    JointKind::AnklePitch => "ankle_pitch",
                    JointKind::AnkleRoll => "ankle_roll",
                };
                JointInfo {
                    name: format!("{side_tag}_{kind_tag}"),
                    side,
                    kind,
                    axis: axis_of(kind),
                }
            })
            .collect()
    }

    pub fn joint_limit(&self, side: Side, kind: JointKind) -> (f64, f64) {
        self.joint_limits[crate::joints::joint_index(side, kind)]
    }

    /// Straight-down ankle targets for a double-support stance with the
    /// trunk `trunk_height` above ground, (left, right) in `F_B`.
    pub fn nominal_ankle_targets(
        &self,
        trunk_height: f64,
    ) -> (crate::pose::AnklePose, crate::pose::AnklePose) {
        let ankle_z = self.sole_offset - trunk_height;
        let left = self.hip_offset(Side::Left);
        let right = self.hip_offset(Side::Right);
        let x = left.x - NOMINAL_STANCE_BACKSET;
        (
            crate::pose::AnklePose::in_body(Vector3::new(x, left.y, ankle_z), 0.0),
            crate::pose::AnklePose::in_body(Vector3::new(x, right.y, ankle_z), 0.0),
        )
    }

    /// Sole corner points in the foot frame (origin at the ankle node).
    pub fn foot_corners(&self) -> [Vector3<f64>; 4] {
        let hx = self.foot_length * 0.5;
        let hy = self.foot_width * 0.5;
        let z = -self.sole_offset;
        [
            Vector3::new(hx, hy, z),
            Vector3::new(hx, -hy, z),
            Vector3::new(-hx, hy, z),
            Vector3::new(-hx, -hy, z),
        ]
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.thigh_length <= 0.0 || self.shank_length <= 0.0 {
            return Err(ModelError::NonPositiveLength);
        }
        for (i, (lo, hi)) in self.joint_limits.iter().enumerate() {
            if lo >= hi {
                return Err(ModelError::EmptyJointRange { joint: i });
            }
        }
        let (l, r) = (self.hip_offsets[0], self.hip_offsets[1]);
        let mirrored = l.x == r.x && l.y == -r.y && l.z == r.z;
        if !mirrored {
            return Err(ModelError::AsymmetricHips);
        }
        for m in [
            &self.link_inertias.trunk,
            &self.link_inertias.thigh,
            &self.link_inertias.shank,
            &self.link_inertias.foot,
        ] {
            if (m - m.transpose()).norm() > 1e-12 {
                return Err(ModelError::BadInertia);
            }
            // Diagonal-dominant SPD check is enough for the diagonal tensors
            // built here; a Cholesky factorization covers the general case.
            if nalgebra::Cholesky::new(*m).is_none() {
                return Err(ModelError::BadInertia);
            }
        }
        if self.workspace_margin_inner <= 0.0
            || self.workspace_margin_outer <= 0.0
            || self.workspace_margin_inner >= self.leg_length() - self.workspace_margin_outer
        {
            return Err(ModelError::BadWorkspaceMargins);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("link lengths must be positive")]
    NonPositiveLength,
    #[error("joint {joint} has an empty limit range")]
    EmptyJointRange { joint: usize },
    #[error("hip offsets must mirror across the sagittal plane")]
    AsymmetricHips,
    #[error("link inertia tensor is not symmetric positive definite")]
    BadInertia,
    #[error("workspace margins do not leave a reachable shell")]
    BadWorkspaceMargins,
}

/// Serializable robot description; mirrors the model table field names.
/// Defaults are compiled in, every field can be overridden from the
/// `[robot]` section of the experiment config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobotConfig {
    pub trunk_size: [f64; 3],
    pub trunk_mass: f64,
    pub thigh_length: f64,
    pub thigh_mass: f64,
    pub shank_length: f64,
    pub shank_mass: f64,
    pub foot_length: f64,
    pub foot_mass: f64,
    pub foot_width: f64,
    pub hip_offset_left: [f64; 3],
    pub sole_offset: f64,
    pub leg_radius: f64,
    /// Limits as [min, max] pairs keyed by per-leg joint role; applied to
    /// both legs symmetrically.
    pub limit_hip_yaw: [f64; 2],
    pub limit_hip_roll: [f64; 2],
    pub limit_hip_pitch: [f64; 2],
    pub limit_knee_pitch: [f64; 2],
    pub limit_ankle_pitch: [f64; 2],
    pub limit_ankle_roll: [f64; 2],
    pub workspace_margin_inner: f64,
    pub workspace_margin_outer: f64,
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self {
            trunk_size: [0.3, 0.3, 0.15],
            trunk_mass: 20.0,
            thigh_length: 0.4,
            thigh_mass: 6.4,
            shank_length: 0.35,
            shank_mass: 2.0,
            foot_length: 0.16,
            foot_mass: 1.0,
            foot_width: 0.08,
            hip_offset_left: [0.0, 0.15, -0.075],
            sole_offset: 0.04,
            leg_radius: 0.03,
            limit_hip_yaw: [-FRAC_PI_2, FRAC_PI_2],
            limit_hip_roll: [-FRAC_PI_2, FRAC_PI_2],
            limit_hip_pitch: [-2.0, 2.0],
            limit_knee_pitch: [0.0, 2.6],
            limit_ankle_pitch: [-1.2, 1.2],
            limit_ankle_roll: [-FRAC_PI_2, FRAC_PI_2],
            workspace_margin_inner: 0.05,
            workspace_margin_outer: 0.01,
        }
    }
}

impl RobotConfig {
    pub fn build(&self) -> Result<RobotModel, ModelError> {
        let trunk_size = Vector3::from(self.trunk_size);
        let left = Vector3::from(self.hip_offset_left);
        let right = Vector3::new(left.x, -left.y, left.z);
        let per_leg = |kind: JointKind| -> (f64, f64) {
            let l = match kind {
                JointKind::HipYaw => self.limit_hip_yaw,
                JointKind::HipRoll => self.limit_hip_roll,
                JointKind::HipPitch => self.limit_hip_pitch,
                JointKind::KneePitch => self.limit_knee_pitch,
                JointKind::AnklePitch => self.limit_ankle_pitch,
                JointKind::AnkleRoll => self.limit_ankle_roll,
            };
            (l[0], l[1])
        };
        let mut joint_limits = [(0.0, 0.0); JOINT_COUNT];
        for (i, lim) in joint_limits.iter_mut().enumerate() {
            let (_, kind) = joint_role(i);
            *lim = per_leg(kind);
        }
        let link_inertias = LinkInertias {
            trunk: box_inertia(self.trunk_mass, trunk_size),
            thigh: rod_inertia(self.thigh_mass, self.thigh_length, self.leg_radius),
            shank: rod_inertia(self.shank_mass, self.shank_length, self.leg_radius),
            foot: box_inertia(
                self.foot_mass,
                Vector3::new(self.foot_length, self.foot_width, self.sole_offset),
            ),
        };
        let model = RobotModel {
            trunk_size,
            trunk_mass: self.trunk_mass,
            thigh_length: self.thigh_length,
            shank_length: self.shank_length,
            foot_length: self.foot_length,
            thigh_mass: self.thigh_mass,
            shank_mass: self.shank_mass,
            foot_mass: self.foot_mass,
            hip_offsets: [left, right],
            foot_width: self.foot_width,
            sole_offset: self.sole_offset,
            leg_radius: self.leg_radius,
            joint_limits,
            workspace_margin_inner: self.workspace_margin_inner,
            workspace_margin_outer: self.workspace_margin_outer,
            link_inertias,
        };
        model.validate()?;
        Ok(model)
    }
}
