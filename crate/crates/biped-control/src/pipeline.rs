use crate::config::FilterState;
use biped_kinematics::{
    clamp_to_workspace_flagged, denormalize_joints, ik_solve, normalize_joints, ActionVector,
    IkError, JointVector, RobotModel, Side, JOINT_COUNT,
};
use biped_planner::ControlInput;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ik(#[from] IkError),
}

/// Feedforward signal: IK on the real-time ankle targets, normalized to
/// [-1, 1]. Targets are workspace-clamped first; `clamp_events` reports
/// how many of the two targets had to move.
pub fn feedforward(
    model: &RobotModel,
    input: &ControlInput,
) -> Result<(ActionVector, usize), PipelineError> {
    let (left, l_moved) = clamp_to_workspace_flagged(model, Side::Left, &input.realtime.left);
    let (right, r_moved) = clamp_to_workspace_flagged(model, Side::Right, &input.realtime.right);
    let solution = ik_solve(model, &left, &right)?;
    let clamp_events = usize::from(l_moved) + usize::from(r_moved);
    Ok((normalize_joints(model, &solution.joints), clamp_events))
}

/// Weighted sum of feedforward and feedback; deliberately unclamped, the
/// bound is enforced by the filter stage.
pub fn combine(a_ff: &ActionVector, a_fb: &ActionVector, feedback_ratio: f64) -> ActionVector {
    let mut out = ActionVector::zeros();
    for i in 0..JOINT_COUNT {
        out.0[i] = a_ff.0[i] + feedback_ratio * a_fb.0[i];
    }
    out
}

/// First-order low-pass filter followed by the [-1, 1] clamp. Returns the
/// command and the updated filter state.
pub fn filter_and_clamp(
    action: &ActionVector,
    state: &FilterState,
    alpha: f64,
) -> (ActionVector, FilterState) {
    let mut out = ActionVector::zeros();
    for i in 0..JOINT_COUNT {
        let mixed = alpha * action.0[i] + (1.0 - alpha) * state.previous.0[i];
        out.0[i] = mixed.clamp(-1.0, 1.0);
    }
    (out, FilterState::new(out))
}

/// Maps the bounded command onto the joint-limit range of each joint.
pub fn map_to_joint_targets(model: &RobotModel, command: &ActionVector) -> JointVector {
    denormalize_joints(model, command)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use biped_kinematics::{forward_kinematics, horizontal_feet_residual, AnklePose, Frame, TrunkPose};
    use biped_planner::{NodeState, NOMINAL_TRUNK_HEIGHT};
    use nalgebra::{UnitQuaternion, Vector3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn nominal_input(model: &RobotModel) -> ControlInput {
        let stance = NodeState::nominal(model, NOMINAL_TRUNK_HEIGHT);
        ControlInput { end_state: stance, realtime: stance, timers: [0.0, 0.0] }
    }

    #[test]
    fn nominal_feedforward_is_normalized_stance() {
        let model = RobotModel::default();
        let (a_ff, clamps) = feedforward(&model, &nominal_input(&model)).unwrap();
        assert_eq!(clamps, 0);
        let q = denormalize_joints(&model, &a_ff);
        let (l, r) = forward_kinematics(&model, &q);
        let stance = NodeState::nominal(&model, NOMINAL_TRUNK_HEIGHT);
        assert_relative_eq!(l.position, stance.left.position, epsilon = 1e-9);
        assert_relative_eq!(r.position, stance.right.position, epsilon = 1e-9);
    }

    #[test]
    fn feedforward_satisfies_horizontal_feet() {
        let model = RobotModel::default();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for _ in 0..100 {
            let mut input = nominal_input(&model);
            input.realtime.left.position +=
                Vector3::new(rng.random_range(-0.15..0.15), rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.15));
            input.realtime.right.position +=
                Vector3::new(rng.random_range(-0.15..0.15), rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.15));
            input.realtime.left.yaw = rng.random_range(-0.5..0.5);
            input.realtime.right.yaw = rng.random_range(-0.5..0.5);
            let (a_ff, _) = feedforward(&model, &input).unwrap();
            let q = denormalize_joints(&model, &a_ff);
            assert!(horizontal_feet_residual(&model, &q) <= 1e-9);
        }
    }

    #[test]
    fn combine_matches_weighted_sum() {
        let mut a_ff = ActionVector::zeros();
        let mut a_fb = ActionVector::zeros();
        a_ff.0[0] = 0.2;
        a_fb.0[0] = 1.0;
        assert_relative_eq!(combine(&a_ff, &a_fb, 0.0).0[0], 0.2);
        assert_relative_eq!(combine(&a_ff, &a_fb, 0.3).0[0], 0.5);
        a_ff.0[0] = 0.9;
        // Bound exceedance is allowed before the filter clamp.
        assert_relative_eq!(combine(&a_ff, &a_fb, 0.3).0[0], 1.2);
    }

    #[test]
    fn filter_fixed_point_and_clamp() {
        let mut a = ActionVector::zeros();
        a.0[3] = 0.4;
        let state = FilterState::new(a);
        let (u, _) = filter_and_clamp(&a, &state, 0.8);
        assert_eq!(u, a, "constant input is a fixed point");

        let mut unit = ActionVector::zeros();
        unit.0[0] = 1.0;
        let (u, next) = filter_and_clamp(&unit, &FilterState::new(ActionVector::zeros()), 0.8);
        assert_relative_eq!(u.0[0], 0.8);
        assert_eq!(next.previous, u);

        let mut big = ActionVector::zeros();
        big.0[0] = 1.5;
        let (u, _) = filter_and_clamp(&big, &FilterState::new(big), 0.5);
        assert_relative_eq!(u.0[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn filter_is_linear_below_clamp() {
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        for _ in 0..50 {
            let mut x = ActionVector::zeros();
            let mut y = ActionVector::zeros();
            let mut prev = ActionVector::zeros();
            for i in 0..JOINT_COUNT {
                x.0[i] = rng.random_range(-0.3..0.3);
                y.0[i] = rng.random_range(-0.3..0.3);
                prev.0[i] = rng.random_range(-0.3..0.3);
            }
            let (lam, mu) = (0.7, 0.3);
            let alpha = 0.8;
            let mut combo = ActionVector::zeros();
            let mut prev_combo = ActionVector::zeros();
            for i in 0..JOINT_COUNT {
                combo.0[i] = lam * x.0[i] + mu * y.0[i];
                prev_combo.0[i] = (lam + mu) * prev.0[i];
            }
            let (ux, _) = filter_and_clamp(&x, &FilterState::new(prev), alpha);
            let (uy, _) = filter_and_clamp(&y, &FilterState::new(prev), alpha);
            let (uc, _) = filter_and_clamp(&combo, &FilterState::new(prev_combo), alpha);
            for i in 0..JOINT_COUNT {
                assert_relative_eq!(uc.0[i], lam * ux.0[i] + mu * uy.0[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn per_step_output_change_is_bounded() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..200 {
            let alpha: f64 = rng.random_range(0.05..1.0);
            let mut a = ActionVector::zeros();
            let mut prev = ActionVector::zeros();
            for i in 0..JOINT_COUNT {
                a.0[i] = rng.random_range(-2.0..2.0);
                prev.0[i] = rng.random_range(-1.0..1.0);
            }
            let (u, _) = filter_and_clamp(&a, &FilterState::new(prev), alpha);
            for i in 0..JOINT_COUNT {
                let change = (u.0[i] - prev.0[i]).abs();
                let bound = alpha * (a.0[i] - prev.0[i]).abs();
                assert!(change <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn command_always_bounded() {
        let model = RobotModel::default();
        let mut rng = ChaCha12Rng::seed_from_u64(24);
        let mut state = FilterState::from_nominal_stance(&model);
        for _ in 0..10_000 {
            let mut a_ff = ActionVector::zeros();
            let mut a_fb = ActionVector::zeros();
            for i in 0..JOINT_COUNT {
                a_ff.0[i] = rng.random_range(-1.0..1.0);
                a_fb.0[i] = rng.random_range(-1.0..1.0);
            }
            let k_b = rng.random_range(0.0..3.0);
            let alpha = rng.random_range(0.01..1.0);
            let (u, next) = filter_and_clamp(&combine(&a_ff, &a_fb, k_b), &state, alpha);
            assert!(u.in_unit_box());
            state = next;
        }
    }

    #[test]
    fn pure_playback_reproduces_feedforward() {
        // With zero feedback and alpha 1 the joint targets equal the IK
        // feedforward exactly.
        let model = RobotModel::default();
        let mut rng = ChaCha12Rng::seed_from_u64(25);
        let mut state = FilterState::from_nominal_stance(&model);
        for _ in 0..100 {
            let mut input = nominal_input(&model);
            input.realtime.left.position.x += rng.random_range(-0.2..0.2);
            input.realtime.right.position.z += rng.random_range(-0.05..0.1);
            let (a_ff, _) = feedforward(&model, &input).unwrap();
            let a_t = combine(&a_ff, &ActionVector::zeros(), rng.random_range(0.0..2.0));
            let (u, next) = filter_and_clamp(&a_t, &state, 1.0);
            state = next;
            let targets = map_to_joint_targets(&model, &u);
            let expected = map_to_joint_targets(&model, &a_ff);
            for i in 0..JOINT_COUNT {
                assert_relative_eq!(targets.0[i], expected.0[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn map_round_trips_normalization() {
        let model = RobotModel::default();
        let mut rng = ChaCha12Rng::seed_from_u64(26);
        for _ in 0..100 {
            let mut q = JointVector::zeros();
            for i in 0..JOINT_COUNT {
                let (lo, hi) = model.joint_limits[i];
                q.0[i] = rng.random_range(lo..hi);
            }
            let back = map_to_joint_targets(&model, &normalize_joints(&model, &q));
            for i in 0..JOINT_COUNT {
                assert_relative_eq!(back.0[i], q.0[i], epsilon = 1e-12);
            }
        }
        let mid = map_to_joint_targets(&model, &ActionVector::zeros());
        for i in 0..JOINT_COUNT {
            let (lo, hi) = model.joint_limits[i];
            assert_relative_eq!(mid.0[i], 0.5 * (lo + hi));
        }
        let mut top = ActionVector::zeros();
        top.0.iter_mut().for_each(|v| *v = 1.0);
        let hi = map_to_joint_targets(&model, &top);
        for i in 0..JOINT_COUNT {
            assert_relative_eq!(hi.0[i], model.joint_limits[i].1);
        }
    }

    #[test]
    fn out_of_workspace_targets_are_clamped_and_counted() {
        let model = RobotModel::default();
        let mut input = nominal_input(&model);
        input.realtime.left = AnklePose::in_body(Vector3::new(0.0, 0.15, -1.2), 0.0);
        let (_, clamps) = feedforward(&model, &input).unwrap();
        assert_eq!(clamps, 1);
    }

    #[test]
    fn trunk_pose_does_not_enter_feedforward() {
        // The feedforward depends only on the ankle targets in the body
        // frame; the trunk entries ride along inside ControlInput.
        let model = RobotModel::default();
        let mut a = nominal_input(&model);
        let mut b = a;
        b.realtime.trunk = TrunkPose {
            position: Vector3::new(0.3, 0.2, 0.1),
            orientation: UnitQuaternion::from_euler_angles(0.1, 0.2, 0.3),
            frame: Frame::Body,
        };
        a.realtime.trunk.frame = Frame::Body;
        let (fa, _) = feedforward(&model, &a).unwrap();
        let (fb, _) = feedforward(&model, &b).unwrap();
        assert_eq!(fa, fb);
    }
}
