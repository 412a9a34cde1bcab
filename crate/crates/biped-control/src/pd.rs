use crate::config::PdGains;
use biped_kinematics::{JointVector, JOINT_COUNT};

/// Joint-space PD law with torque saturation:
/// `tau_i = clamp(kp_i (target_i - q_i) - kd_i qdot_i, -limit, limit)`.
pub fn pd_torques(
    target: &JointVector,
    q: &JointVector,
    q_dot: &[f64; JOINT_COUNT],
    gains: &[PdGains; JOINT_COUNT],
) -> [f64; JOINT_COUNT] {
    let mut tau = [0.0; JOINT_COUNT];
    for i in 0..JOINT_COUNT {
        let raw = gains[i].kp * (target.0[i] - q.0[i]) - gains[i].kd * q_dot[i];
        tau[i] = raw.clamp(-gains[i].torque_limit, gains[i].torque_limit);
    }
    tau
}
