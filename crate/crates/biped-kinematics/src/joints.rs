use crate::model::RobotModel;
use serde::{Deserialize, Serialize};

/// Number of actuated joints (six per leg).
pub const JOINT_COUNT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(&self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    pub fn opposite(&self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Joint role within one leg, in chain order from hip to foot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JointKind {
    HipYaw,
    HipRoll,
    HipPitch,
    KneePitch,
    AnklePitch,
    AnkleRoll,
}

impl JointKind {
    pub const PER_LEG: [JointKind; 6] = [
        JointKind::HipYaw,
        JointKind::HipRoll,
        JointKind::HipPitch,
        JointKind::KneePitch,
        JointKind::AnklePitch,
        JointKind::AnkleRoll,
    ];

    pub fn offset(&self) -> usize {
        match self {
            JointKind::HipYaw => 0,
            JointKind::HipRoll => 1,
            JointKind::HipPitch => 2,
            JointKind::KneePitch => 3,
            JointKind::AnklePitch => 4,
            JointKind::AnkleRoll => 5,
        }
    }
}

/// Flat index into the 12-vector: left leg joints 0..6, right leg 6..12.
pub fn joint_index(side: Side, kind: JointKind) -> usize {
    let base = match side {
        Side::Left => 0,
        Side::Right => 6,
    };
    base + kind.offset()
}

/// (side, kind) of a flat joint index.
pub fn joint_role(index: usize) -> (Side, JointKind) {
    let side = if index < 6 { Side::Left } else { Side::Right };
    (side, JointKind::PER_LEG[index % 6])
}

pub type JointIndex = usize;

/// Joint angles in radians, left leg then right leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointVector(pub [f64; JOINT_COUNT]);

impl JointVector {
    pub fn zeros() -> Self {
        JointVector([0.0; JOINT_COUNT])
    }

    pub fn get(&self, side: Side, kind: JointKind) -> f64 {
        self.0[joint_index(side, kind)]
    }

    pub fn set(&mut self, side: Side, kind: JointKind, value: f64) {
        self.0[joint_index(side, kind)] = value;
    }

    /// The six angles of one leg in chain order.
    pub fn leg(&self, side: Side) -> [f64; 6] {
        let base = joint_index(side, JointKind::HipYaw);
        let mut out = [0.0; 6];
        out.copy_from_slice(&self.0[base..base + 6]);
        out
    }

    pub fn set_leg(&mut self, side: Side, angles: [f64; 6]) {
        let base = joint_index(side, JointKind::HipYaw);
        self.0[base..base + 6].copy_from_slice(&angles);
    }

    pub fn clamped_to_limits(&self, model: &RobotModel) -> JointVector {
        let mut out = *self;
        for i in 0..JOINT_COUNT {
            let (lo, hi) = model.joint_limits[i];
            out.0[i] = out.0[i].clamp(lo, hi);
        }
        out
    }
}

impl std::ops::Index<usize> for JointVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for JointVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Normalized, dimensionless 12-vector. Used for the feedforward signal,
/// the feedback signal and the filtered joint command, all bounded to
/// [-1, 1] by the clamping stages of the control pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionVector(pub [f64; JOINT_COUNT]);

impl ActionVector {
    pub fn zeros() -> Self {
        ActionVector([0.0; JOINT_COUNT])
    }

    pub fn clamped(&self, lo: f64, hi: f64) -> ActionVector {
        let mut out = *self;
        for v in out.0.iter_mut() {
            *v = v.clamp(lo, hi);
        }
        out
    }

    pub fn in_unit_box(&self) -> bool {
        self.0.iter().all(|v| (-1.0..=1.0).contains(v))
    }
}

impl std::ops::Index<usize> for ActionVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for ActionVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Per-joint affine map of joint angles onto [-1, 1]: the lower limit maps
/// to -1 and the upper limit to +1. Inputs are clamped to the limits first.
pub fn normalize_joints(model: &RobotModel, q: &JointVector) -> ActionVector {
    let mut out = ActionVector::zeros();
    for i in 0..JOINT_COUNT {
        let (lo, hi) = model.joint_limits[i];
        let v = q.0[i].clamp(lo, hi);
        out.0[i] = 2.0 * (v - lo) / (hi - lo) - 1.0;
    }
    out
}

/// Inverse of [`normalize_joints`]: maps [-1, 1] back onto the joint limits.
pub fn denormalize_joints(model: &RobotModel, a: &ActionVector) -> JointVector {
    let mut out = JointVector::zeros();
    for i in 0..JOINT_COUNT {
        let (lo, hi) = model.joint_limits[i];
        let v = a.0[i].clamp(-1.0, 1.0);
        out.0[i] = lo + (v + 1.0) * 0.5 * (hi - lo);
    }
    out
}
