use crate::joints::Side;
use crate::model::RobotModel;
use crate::pose::AnklePose;
use nalgebra::Vector3;

/// Projects an ankle target onto the reachable shell around its hip.
///
/// Targets inside the shell pass through unchanged; outside targets are
/// moved radially onto the nearest shell boundary. A target coincident
/// with the hip is pushed to the inner boundary straight down (-z of
/// `F_B`), which keeps the projection total.
pub fn clamp_to_workspace(model: &RobotModel, side: Side, target: &AnklePose) -> AnklePose {
    clamp_to_workspace_flagged(model, side, target).0
}

/// Same as [`clamp_to_workspace`], reporting whether the position moved.
pub fn clamp_to_workspace_flagged(
    model: &RobotModel,
    side: Side,
    target: &AnklePose,
) -> (AnklePose, bool) {
    let hip = model.hip_offset(side);
    let rel = target.position - hip;
    let dist = rel.norm();
    let inner = model.workspace_inner();
    let outer = model.workspace_outer();

    if dist < 1e-12 {
        let projected = hip + Vector3::new(0.0, 0.0, -inner);
        return (AnklePose { position: projected, ..*target }, true);
    }
    if dist < inner {
        let projected = hip + rel * (inner / dist);
        return (AnklePose { position: projected, ..*target }, true);
    }
    if dist > outer {
        let projected = hip + rel * (outer / dist);
        return (AnklePose { position: projected, ..*target }, true);
    }
    (*target, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn below_hip(model: &RobotModel, side: Side, depth: f64) -> AnklePose {
        AnklePose::in_body(model.hip_offset(side) + Vector3::new(0.0, 0.0, -depth), 0.0)
    }

    #[test]
    fn interior_point_unchanged() {
        let model = RobotModel::default();
        let target = below_hip(&model, Side::Left, 0.5);
        let (out, moved) = clamp_to_workspace_flagged(&model, Side::Left, &target);
        assert!(!moved);
        assert_eq!(out, target);
    }

    #[test]
    fn far_point_projected_to_outer_shell() {
        let model = RobotModel::default();
        let target = below_hip(&model, Side::Left, 1.0);
        let (out, moved) = clamp_to_workspace_flagged(&model, Side::Left, &target);
        assert!(moved);
        let rel = out.position - model.hip_offset(Side::Left);
        assert_relative_eq!(rel.norm(), 0.74, epsilon = 1e-12);
        assert_relative_eq!(rel.x, 0.0);
        assert_relative_eq!(rel.z, -0.74, epsilon = 1e-12);
    }

    #[test]
    fn hip_coincident_target_drops_to_inner_shell() {
        let model = RobotModel::default();
        let target = AnklePose::in_body(model.hip_offset(Side::Right), 0.3);
        let (out, moved) = clamp_to_workspace_flagged(&model, Side::Right, &target);
        assert!(moved);
        let rel = out.position - model.hip_offset(Side::Right);
        assert_relative_eq!(rel, Vector3::new(0.0, 0.0, -0.05), epsilon = 1e-12);
        assert_relative_eq!(out.yaw, 0.3);
    }

    #[test]
    fn idempotent() {
        let model = RobotModel::default();
        for depth in [0.0, 0.02, 0.3, 0.74, 0.9, 2.0] {
            let target = below_hip(&model, Side::Left, depth);
            let once = clamp_to_workspace(&model, Side::Left, &target);
            let twice = clamp_to_workspace(&model, Side::Left, &once);
            assert_eq!(once, twice);
        }
    }
}
