use crate::joints::{JointVector, Side};
use crate::model::RobotModel;
use crate::pose::AnklePose;
use nalgebra::{Rotation3, Vector3};

/// Pose of one leg's ankle node in the trunk frame, with the full foot
/// rotation kept around for constraint checks.
#[derive(Debug, Clone, Copy)]
pub struct LegFk {
    pub ankle_position: Vector3<f64>,
    pub foot_rotation: Rotation3<f64>,
}

impl LegFk {
    pub fn yaw(&self) -> f64 {
        self.foot_rotation[(1, 0)].atan2(self.foot_rotation[(0, 0)])
    }
}

/// Forward kinematics of one leg. `angles` in chain order
/// (hip yaw, hip roll, hip pitch, knee pitch, ankle pitch, ankle roll).
pub fn leg_forward_kinematics(model: &RobotModel, side: Side, angles: &[f64; 6]) -> LegFk {
    let hip = model.hip_offset(side);
    let r_hip = Rotation3::from_axis_angle(&Vector3::z_axis(), angles[0])
        * Rotation3::from_axis_angle(&Vector3::x_axis(), angles[1])
        * Rotation3::from_axis_angle(&Vector3::y_axis(), angles[2]);
    let knee = hip + r_hip * Vector3::new(0.0, 0.0, -model.thigh_length);
    let r_shank = r_hip * Rotation3::from_axis_angle(&Vector3::y_axis(), angles[3]);
    let ankle = knee + r_shank * Vector3::new(0.0, 0.0, -model.shank_length);
    let foot_rotation = r_shank
        * Rotation3::from_axis_angle(&Vector3::y_axis(), angles[4])
        * Rotation3::from_axis_angle(&Vector3::x_axis(), angles[5]);
    LegFk { ankle_position: ankle, foot_rotation }
}

/// Ankle node poses of both legs in the trunk frame `F_B`.
pub fn forward_kinematics(model: &RobotModel, q: &JointVector) -> (AnklePose, AnklePose) {
    let left = leg_forward_kinematics(model, Side::Left, &q.leg(Side::Left));
    let right = leg_forward_kinematics(model, Side::Right, &q.leg(Side::Right));
    (
        AnklePose::in_body(left.ankle_position, left.yaw()),
        AnklePose::in_body(right.ankle_position, right.yaw()),
    )
}

/// Squared-cross-product residual of the horizontal-feet constraint:
/// zero iff both foot sole normals are parallel to the trunk normal.
pub fn horizontal_feet_residual(model: &RobotModel, q: &JointVector) -> f64 {
    let up = Vector3::z();
    let mut residual = 0.0;
    for side in [Side::Left, Side::Right] {
        let fk = leg_forward_kinematics(model, side, &q.leg(side));
        let normal = fk.foot_rotation * up;
        residual += normal.cross(&up).norm_squared();
    }
    residual
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::joints::{JointKind, JOINT_COUNT};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_configuration_hangs_straight() {
        let model = RobotModel::default();
        let (l, r) = forward_kinematics(&model, &JointVector::zeros());
        for (pose, side) in [(l, Side::Left), (r, Side::Right)] {
            let hip = model.hip_offset(side);
            let below = hip + Vector3::new(0.0, 0.0, -0.75);
            assert_relative_eq!(pose.position, below, epsilon = 1e-12);
            assert_relative_eq!(pose.yaw, 0.0);
        }
    }

    #[test]
    fn knee_bend_matches_law_of_cosines() {
        // Law-of-cosines oracle: hip-ankle distance d fixes the interior
        // knee angle; the joint flexion is its supplement.
        let model = RobotModel::default();
        let (l1, l2) = (model.thigh_length, model.shank_length);
        let d = 0.7;
        let interior = ((l1 * l1 + l2 * l2 - d * d) / (2.0 * l1 * l2)).acos();
        let flexion = std::f64::consts::PI - interior;

        let mut q = JointVector::zeros();
        q.set(Side::Left, JointKind::KneePitch, flexion);
        let (ankle, _) = forward_kinematics(&model, &q);
        let dist = (ankle.position - model.hip_offset(Side::Left)).norm();
        assert_relative_eq!(dist, d, epsilon = 1e-12);
    }

    #[test]
    fn hip_yaw_propagates_to_ankle_yaw() {
        let model = RobotModel::default();
        for psi in [-1.2, -0.3, 0.0, 0.4, 1.5] {
            let mut q = JointVector::zeros();
            q.set(Side::Right, JointKind::HipYaw, psi);
            let (_, ankle) = forward_kinematics(&model, &q);
            assert_relative_eq!(ankle.yaw, psi, epsilon = 1e-12);
        }
    }

    #[test]
    fn residual_zero_at_nominal() {
        let model = RobotModel::default();
        assert_relative_eq!(horizontal_feet_residual(&model, &JointVector::zeros()), 0.0);
    }

    #[test]
    fn residual_unit_for_orthogonal_ankle() {
        let model = RobotModel::default();
        let mut q = JointVector::zeros();
        q.set(Side::Left, JointKind::AnklePitch, FRAC_PI_2);
        assert_relative_eq!(horizontal_feet_residual(&model, &q), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn residual_nonnegative_everywhere() {
        let model = RobotModel::default();
        let mut q = JointVector::zeros();
        for i in 0..JOINT_COUNT {
            q.0[i] = (i as f64 * 0.37).sin();
        }
        assert!(horizontal_feet_residual(&model, &q) >= 0.0);
    }
}
