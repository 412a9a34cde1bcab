//! The 101-real observation vector of the feedback policy.
//!
//! Layout (offsets in brackets):
//! - [0..14)   end-state error: trunk pos, L pos, R pos, trunk rotation
//!   vector, ankle yaws (target minus actual, body frame)
//! - [14..28)  real-time error, same encoding
//! - [28..42)  target rates: backward difference of the real-time target
//! - [42..44)  touchdown timers (left, right)
//! - [44..47)  gravity direction in the body frame
//! - [47..50)  trunk linear velocity (body frame)
//! - [50..53)  trunk angular velocity (body frame)
//! - [53..65)  joint positions
//! - [65..77)  joint velocities
//! - [77..89)  feedforward action
//! - [89..101) previous feedback action

use biped_kinematics::{wrap_angle, ActionVector, JOINT_COUNT};
use biped_planner::{ControlInput, NodeState};
use biped_sim::{NodesMeasurement, SimState};
use nalgebra::Vector3;

pub const OBS_DIM: usize = 101;

pub const IDX_END_ERROR: usize = 0;
pub const IDX_RT_ERROR: usize = 14;
pub const IDX_TARGET_RATE: usize = 28;
pub const IDX_TIMERS: usize = 42;
pub const IDX_GRAVITY: usize = 44;
pub const IDX_TRUNK_LINVEL: usize = 47;
pub const IDX_TRUNK_ANGVEL: usize = 50;
pub const IDX_JOINT_POS: usize = 53;
pub const IDX_JOINT_VEL: usize = 65;
pub const IDX_FEEDFORWARD: usize = 77;
pub const IDX_PREV_FEEDBACK: usize = 89;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn zeros() -> Self {
        Observation([0.0; OBS_DIM])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// 14-real encoding of a target state error against the measured nodes:
/// position differences, trunk orientation as a rotation vector, wrapped
/// yaw differences. The measured trunk is the body-frame identity, so
/// target entries pass through directly.
pub fn state_error(target: &NodeState, nodes: &NodesMeasurement) -> [f64; 14] {
    let tp = target.trunk.position;
    let lp = target.left.position - nodes.left_body.position;
    let rp = target.right.position - nodes.right_body.position;
    let rv = target.trunk.orientation.scaled_axis();
    [
        tp.x,
        tp.y,
        tp.z,
        lp.x,
        lp.y,
        lp.z,
        rp.x,
        rp.y,
        rp.z,
        rv.x,
        rv.y,
        rv.z,
        wrap_angle(target.left.yaw - nodes.left_body.yaw),
        wrap_angle(target.right.yaw - nodes.right_body.yaw),
    ]
}

/// Backward finite difference of two 14-real target encodings; yaw and
/// rotation-vector entries difference componentwise, yaws wrapped.
pub fn target_rate(current: &[f64; 14], previous: &[f64; 14], dt: f64) -> [f64; 14] {
    let mut out = [0.0; 14];
    for k in 0..14 {
        let diff = if k >= 12 {
            wrap_angle(current[k] - previous[k])
        } else {
            current[k] - previous[k]
        };
        out[k] = diff / dt;
    }
    out
}

/// Assembles the observation for one control tick.
#[allow(clippy::too_many_arguments)]
pub fn build_observation(
    input: &ControlInput,
    nodes: &NodesMeasurement,
    state: &SimState,
    a_ff: &ActionVector,
    a_fb_prev: &ActionVector,
    prev_rt_encoding: Option<&[f64; 14]>,
    control_dt: f64,
) -> (Observation, [f64; 14]) {
    let mut o = [0.0; OBS_DIM];
    let end_err = state_error(&input.end_state, nodes);
    let rt_err = state_error(&input.realtime, nodes);
    let rt_encoding = input.realtime.encode();
    let rate = match prev_rt_encoding {
        Some(prev) => target_rate(&rt_encoding, prev, control_dt),
        None => [0.0; 14],
    };

    o[IDX_END_ERROR..IDX_END_ERROR + 14].copy_from_slice(&end_err);
    o[IDX_RT_ERROR..IDX_RT_ERROR + 14].copy_from_slice(&rt_err);
    o[IDX_TARGET_RATE..IDX_TARGET_RATE + 14].copy_from_slice(&rate);
    o[IDX_TIMERS] = input.timers[0];
    o[IDX_TIMERS + 1] = input.timers[1];

    let gravity_dir = state.base_orientation.inverse() * Vector3::new(0.0, 0.0, -1.0);
    o[IDX_GRAVITY] = gravity_dir.x;
    o[IDX_GRAVITY + 1] = gravity_dir.y;
    o[IDX_GRAVITY + 2] = gravity_dir.z;
    for k in 0..3 {
        o[IDX_TRUNK_LINVEL + k] = state.base_linear_velocity[k];
        o[IDX_TRUNK_ANGVEL + k] = state.base_angular_velocity[k];
    }
    for j in 0..JOINT_COUNT {
        o[IDX_JOINT_POS + j] = state.q.0[j];
        o[IDX_JOINT_VEL + j] = state.q_dot[j];
        o[IDX_FEEDFORWARD + j] = a_ff.0[j];
        o[IDX_PREV_FEEDBACK + j] = a_fb_prev.0[j];
    }
    (Observation(o), rt_encoding)
}
