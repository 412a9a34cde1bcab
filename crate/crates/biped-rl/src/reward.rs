//! Task-independent tick reward: a constant liveness term, exponential
//! node-tracking terms with soft trunk weighting, a feedback-magnitude
//! penalty and a stillness penalty active only for stationary targets.

use biped_kinematics::{wrap_angle, ActionVector, JOINT_COUNT};
use biped_planner::ControlInput;
use biped_sim::NodesMeasurement;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    pub r_live: f64,
    /// Trunk position/orientation weights; soft tracking keeps these at
    /// 0.2 times the ankle weights.
    pub w_trunk_pos: f64,
    pub w_trunk_rot: f64,
    pub sigma_trunk_pos: f64,
    pub sigma_trunk_rot: f64,
    pub w_ankle_pos: f64,
    pub w_ankle_yaw: f64,
    pub sigma_ankle_pos: f64,
    pub sigma_ankle_yaw: f64,
    pub w_feedback: f64,
    pub sigma_feedback: f64,
    pub w_joint_vel: f64,
    pub w_joint_acc: f64,
    pub sigma_joint_vel: f64,
    pub sigma_joint_acc: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            r_live: 0.1,
            w_trunk_pos: 0.2,
            w_trunk_rot: 0.2,
            sigma_trunk_pos: 5.0,
            sigma_trunk_rot: 2.0,
            w_ankle_pos: 1.0,
            w_ankle_yaw: 1.0,
            sigma_ankle_pos: 5.0,
            sigma_ankle_yaw: 2.0,
            w_feedback: 0.1,
            sigma_feedback: 1.0 / 12.0,
            w_joint_vel: 0.05,
            w_joint_acc: 0.05,
            sigma_joint_vel: 1.0 / 12.0,
            sigma_joint_acc: 1.0 / 12.0,
        }
    }
}

impl RewardWeights {
    /// Maximum attainable tracking reward (all errors zero).
    pub fn error_ceiling(&self) -> f64 {
        self.w_trunk_pos + self.w_trunk_rot + 2.0 * (self.w_ankle_pos + self.w_ankle_yaw)
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.r_live,
            self.w_trunk_pos,
            self.w_trunk_rot,
            self.w_ankle_pos,
            self.w_ankle_yaw,
            self.w_feedback,
            self.w_joint_vel,
            self.w_joint_acc,
        ];
        if all.iter().any(|w| *w < 0.0) {
            return Err("reward weights must be nonnegative".into());
        }
        let sigmas = [
            self.sigma_trunk_pos,
            self.sigma_trunk_rot,
            self.sigma_ankle_pos,
            self.sigma_ankle_yaw,
            self.sigma_feedback,
            self.sigma_joint_vel,
            self.sigma_joint_acc,
        ];
        if sigmas.iter().any(|s| *s <= 0.0) {
            return Err("reward scales must be positive".into());
        }
        // Soft trunk tracking: trunk weights are a fifth of the ankle's.
        if (self.w_trunk_pos - 0.2 * self.w_ankle_pos).abs() > 1e-12
            || (self.w_trunk_rot - 0.2 * self.w_ankle_yaw).abs() > 1e-12
        {
            return Err("trunk weights must equal 0.2 times the ankle weights".into());
        }
        Ok(())
    }
}

/// Node tracking errors extracted from a control input against measured
/// nodes, all in the body frame.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrackingErrors {
    pub trunk_pos: f64,
    pub trunk_rot: f64,
    pub left_pos: f64,
    pub right_pos: f64,
    pub left_yaw: f64,
    pub right_yaw: f64,
}

pub fn tracking_errors(input: &ControlInput, nodes: &NodesMeasurement) -> TrackingErrors {
    let t = &input.realtime;
    TrackingErrors {
        trunk_pos: t.trunk.position.norm(),
        trunk_rot: t.trunk.orientation.scaled_axis().norm(),
        left_pos: (t.left.position - nodes.left_body.position).norm(),
        right_pos: (t.right.position - nodes.right_body.position).norm(),
        left_yaw: wrap_angle(t.left.yaw - nodes.left_body.yaw).abs(),
        right_yaw: wrap_angle(t.right.yaw - nodes.right_body.yaw).abs(),
    }
}

/// Exponential tracking reward over the three controllable nodes.
pub fn reward_error(weights: &RewardWeights, errors: &TrackingErrors) -> f64 {
    weights.w_trunk_pos * (-weights.sigma_trunk_pos * errors.trunk_pos).exp()
        + weights.w_trunk_rot * (-weights.sigma_trunk_rot * errors.trunk_rot).exp()
        + weights.w_ankle_pos
            * ((-weights.sigma_ankle_pos * errors.left_pos).exp()
                + (-weights.sigma_ankle_pos * errors.right_pos).exp())
        + weights.w_ankle_yaw
            * ((-weights.sigma_ankle_yaw * errors.left_yaw).exp()
                + (-weights.sigma_ankle_yaw * errors.right_yaw).exp())
}

/// Penalty for large feedback magnitudes; zero at zero feedback, floored
/// at `-w_feedback`.
pub fn reward_fb(weights: &RewardWeights, a_fb: &ActionVector) -> f64 {
    let sum: f64 = a_fb.0.iter().map(|a| weights.sigma_feedback * a.abs()).sum();
    weights.w_feedback * (-sum).clamp(-1.0, 0.0)
}

/// Stillness penalty, active only when the target velocities of all
/// three nodes are zero.
pub fn reward_static(
    weights: &RewardWeights,
    target_stationary: bool,
    joint_vel: &[f64; JOINT_COUNT],
    joint_acc: &[f64; JOINT_COUNT],
) -> f64 {
    if !target_stationary {
        return 0.0;
    }
    let vel: f64 = joint_vel.iter().map(|v| weights.sigma_joint_vel * v.abs()).sum();
    let acc: f64 = joint_acc.iter().map(|a| weights.sigma_joint_acc * a.abs()).sum();
    weights.w_joint_vel * (-vel).clamp(-1.0, 0.0) + weights.w_joint_acc * (-acc).clamp(-1.0, 0.0)
}

/// Per-tick reward components, kept separate for logging.
#[derive(Debug, Clone, Copy, Default)]
pub struct RewardBreakdown {
    pub live: f64,
    pub error: f64,
    pub feedback: f64,
    pub stillness: f64,
}

impl RewardBreakdown {
    pub fn total(&self) -> f64 {
        self.live + self.error + self.feedback + self.stillness
    }
}

#[allow(clippy::too_many_arguments)]
pub fn reward_total(
    weights: &RewardWeights,
    errors: &TrackingErrors,
    a_fb: &ActionVector,
    target_stationary: bool,
    joint_vel: &[f64; JOINT_COUNT],
    joint_acc: &[f64; JOINT_COUNT],
) -> RewardBreakdown {
    RewardBreakdown {
        live: weights.r_live,
        error: reward_error(weights, errors),
        feedback: reward_fb(weights, a_fb),
        stillness: reward_static(weights, target_stationary, joint_vel, joint_acc),
    }
}
