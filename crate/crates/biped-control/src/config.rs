use biped_kinematics::{
    ik_solve, normalize_joints, ActionVector, AnklePose, RobotModel, JOINT_COUNT,
};
use biped_planner::{NodeState, NOMINAL_TRUNK_HEIGHT};
use serde::{Deserialize, Serialize};

/// Per-joint PD gains and torque limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdGains {
    pub kp: f64,
    pub kd: f64,
    pub torque_limit: f64,
}

/// Parameters of the action pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlConfig {
    /// Feedback ratio weighting the learned correction.
    pub feedback_ratio: f64,
    /// First-order low-pass coefficient in (0, 1], 1 disables filtering.
    pub filter_alpha: f64,
    /// Control period, seconds (200 Hz by default).
    pub control_dt: f64,
    pub kp: f64,
    pub kd: f64,
    /// Torque limit for hip and knee joints, N·m.
    pub torque_limit_hip_knee: f64,
    /// Torque limit for ankle joints, N·m.
    pub torque_limit_ankle: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            feedback_ratio: 0.3,
            filter_alpha: 0.8,
            control_dt: 0.005,
            kp: 200.0,
            kd: 8.0,
            torque_limit_hip_knee: 150.0,
            torque_limit_ankle: 60.0,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.filter_alpha) || self.filter_alpha == 0.0 {
            return Err(format!("filter_alpha {} outside (0, 1]", self.filter_alpha));
        }
        if self.feedback_ratio < 0.0 {
            return Err("feedback_ratio must be nonnegative".into());
        }
        if self.control_dt <= 0.0 {
            return Err("control_dt must be positive".into());
        }
        if self.kp <= 0.0 || self.kd < 0.0 {
            return Err("PD gains must be positive".into());
        }
        Ok(())
    }

    /// Gains in `JointVector` order; ankles get the lower torque limit.
    pub fn joint_gains(&self) -> [PdGains; JOINT_COUNT] {
        let mut out = [PdGains { kp: self.kp, kd: self.kd, torque_limit: self.torque_limit_hip_knee };
            JOINT_COUNT];
        for (i, g) in out.iter_mut().enumerate() {
            let (_, kind) = biped_kinematics::joints::joint_role(i);
            if matches!(
                kind,
                biped_kinematics::JointKind::AnklePitch | biped_kinematics::JointKind::AnkleRoll
            ) {
                g.torque_limit = self.torque_limit_ankle;
            }
        }
        out
    }
}

/// Low-pass filter memory: the previous filtered action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub previous: ActionVector,
}

impl FilterState {
    pub fn new(previous: ActionVector) -> Self {
        Self { previous }
    }

    /// Seeds the filter from the normalized nominal stance so the first
    /// tick starts from a defined, transient-free command.
    pub fn from_nominal_stance(model: &RobotModel) -> Self {
        let stance = NodeState::nominal(model, NOMINAL_TRUNK_HEIGHT);
        let left = AnklePose { ..stance.left };
        let right = AnklePose { ..stance.right };
        let sol = ik_solve(model, &left, &right).expect("nominal stance is reachable");
        Self { previous: normalize_joints(model, &sol.joints) }
    }
}
