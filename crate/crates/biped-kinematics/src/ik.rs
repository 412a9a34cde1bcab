use crate::fk::leg_forward_kinematics;
use crate::joints::{joint_index, JointKind, JointVector, Side, JOINT_COUNT};
use crate::model::RobotModel;
use crate::pose::AnklePose;
use nalgebra::{Rotation3, Vector3};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum IkError {
    /// Target outside the leg workspace. Targets are expected to be
    /// workspace-clamped first, so hitting this signals a clamping bug.
    #[error("{side:?} ankle target at distance {distance:.4} m is outside the workspace")]
    Unreachable { side: Side, distance: f64 },
    /// Target coincident with the hip; the knee angle is undefined.
    #[error("{side:?} ankle target coincides with the hip")]
    DegenerateTarget { side: Side },
}

/// Joint solution plus a per-joint flag marking values that had to be
/// clamped to their limits (the returned angles are the clamped ones).
#[derive(Debug, Clone, Copy)]
pub struct IkSolution {
    pub joints: JointVector,
    pub clamped: [bool; JOINT_COUNT],
}

impl IkSolution {
    pub fn any_clamped(&self) -> bool {
        self.clamped.iter().any(|c| *c)
    }
}

/// Closed-form IK for one leg under the horizontal-feet constraint.
///
/// Hip yaw carries the ankle yaw, the ankle roll cancels the hip roll and
/// the three pitch angles sum to zero, which leaves hip roll, hip pitch
/// and knee pitch to place the ankle.
pub fn solve_leg(
    model: &RobotModel,
    side: Side,
    target: &AnklePose,
) -> Result<([f64; 6], [bool; 6]), IkError> {
    let (l1, l2) = (model.thigh_length, model.shank_length);
    let rel = target.position - model.hip_offset(side);
    let dist = rel.norm();
    if dist < 1e-9 {
        return Err(IkError::DegenerateTarget { side });
    }
    if dist > l1 + l2 + 1e-9 || dist < (l1 - l2).abs() - 1e-9 {
        return Err(IkError::Unreachable { side, distance: dist });
    }

    let hip_yaw = target.yaw;
    let w = Rotation3::from_axis_angle(&Vector3::z_axis(), -hip_yaw) * rel;
    let hip_roll = w.y.atan2(-w.z);
    let u = Rotation3::from_axis_angle(&Vector3::x_axis(), -hip_roll) * w;

    let cos_knee = ((dist * dist - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
    let knee = cos_knee.acos();
    let line_angle = (-u.x).atan2(-u.z);
    let thigh_offset = (l2 * knee.sin()).atan2(l1 + l2 * knee.cos());
    let hip_pitch = line_angle - thigh_offset;
    let ankle_pitch = -(hip_pitch + knee);
    let ankle_roll = -hip_roll;

    let raw = [hip_yaw, hip_roll, hip_pitch, knee, ankle_pitch, ankle_roll];
    let mut angles = raw;
    let mut clamped = [false; 6];
    for (k, kind) in JointKind::PER_LEG.iter().enumerate() {
        let (lo, hi) = model.joint_limit(side, *kind);
        let v = raw[k].clamp(lo, hi);
        clamped[k] = (v - raw[k]).abs() > 1e-12;
        angles[k] = v;
    }
    Ok((angles, clamped))
}

/// Solves both legs for workspace-clamped ankle targets in `F_B`.
pub fn ik_solve(
    model: &RobotModel,
    target_left: &AnklePose,
    target_right: &AnklePose,
) -> Result<IkSolution, IkError> {
    let (left, left_clamped) = solve_leg(model, Side::Left, target_left)?;
    let (right, right_clamped) = solve_leg(model, Side::Right, target_right)?;
    let mut joints = JointVector::zeros();
    joints.set_leg(Side::Left, left);
    joints.set_leg(Side::Right, right);
    let mut clamped = [false; JOINT_COUNT];
    for k in 0..6 {
        clamped[joint_index(Side::Left, JointKind::PER_LEG[k])] = left_clamped[k];
        clamped[joint_index(Side::Right, JointKind::PER_LEG[k])] = right_clamped[k];
    }
    Ok(IkSolution { joints, clamped })
}

/// Verifies a solution against the leg FK; used by tests and diagnostics.
pub fn position_error(model: &RobotModel, side: Side, angles: &[f64; 6], target: &AnklePose) -> f64 {
    let fk = leg_forward_kinematics(model, side, angles);
    (fk.ankle_position - target.position).norm()
}
