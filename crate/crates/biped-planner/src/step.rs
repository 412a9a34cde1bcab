use crate::bezier::BezierCurve;
use biped_kinematics::{
    clamp_to_workspace, wrap_angle, AnklePose, Frame, RobotModel, Side, TrunkPose,
};
use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use biped_kinematics::NOMINAL_TRUNK_HEIGHT;

/// The six basic task-step classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepClass {
    /// Stand still in a randomized posture, feet planted.
    StandStill,
    /// Move the trunk without moving the feet.
    Squat,
    /// Straight-line walking, forward or backward.
    Walk,
    /// Straight-line sideways stepping.
    Sidle,
    /// Turning in place or along an arc.
    Turn,
    /// Walking up or down stairs.
    Stairs,
}

impl StepClass {
    pub const ALL: [StepClass; 6] = [
        StepClass::StandStill,
        StepClass::Squat,
        StepClass::Walk,
        StepClass::Sidle,
        StepClass::Turn,
        StepClass::Stairs,
    ];

    /// Classes whose feet never leave the ground have period 0.
    pub fn is_grounded(&self) -> bool {
        matches!(self, StepClass::StandStill | StepClass::Squat)
    }

    pub fn token(&self) -> &'static str {
        match self {
            StepClass::StandStill => "stand",
            StepClass::Squat => "squat",
            StepClass::Walk => "walk",
            StepClass::Sidle => "sidle",
            StepClass::Turn => "turn",
            StepClass::Stairs => "stairs",
        }
    }

    pub fn from_token(tok: &str) -> Option<StepClass> {
        Self::ALL.iter().copied().find(|c| c.token() == tok)
    }
}

/// Which ankle swings during the step. Grounded classes keep both feet
/// planted for the whole step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SwingLeg {
    Left,
    Right,
    BothGrounded,
}

impl SwingLeg {
    pub fn side(&self) -> Option<Side> {
        match self {
            SwingLeg::Left => Some(Side::Left),
            SwingLeg::Right => Some(Side::Right),
            SwingLeg::BothGrounded => None,
        }
    }

    pub fn token(&self) -> &'static str {
        match self {
            SwingLeg::Left => "left",
            SwingLeg::Right => "right",
            SwingLeg::BothGrounded => "none",
        }
    }

    pub fn from_token(tok: &str) -> Option<SwingLeg> {
        match tok {
            "left" => Some(SwingLeg::Left),
            "right" => Some(SwingLeg::Right),
            "none" => Some(SwingLeg::BothGrounded),
            _ => None,
        }
    }
}

/// Rigid transform used to move poses between the step-local, plan and
/// body frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameTransform {
    pub translation: Vector3<f64>,
    pub rotation: UnitQuaternion<f64>,
}

impl FrameTransform {
    pub fn identity() -> Self {
        Self { translation: Vector3::zeros(), rotation: UnitQuaternion::identity() }
    }

    /// Frame located at a trunk pose.
    pub fn from_trunk(pose: &TrunkPose) -> Self {
        Self { translation: pose.position, rotation: pose.orientation }
    }

    /// Applies `self` after `other` (frame composition).
    pub fn compose(&self, other: &FrameTransform) -> FrameTransform {
        FrameTransform {
            translation: self.translation + self.rotation * other.translation,
            rotation: self.rotation * other.rotation,
        }
    }

    pub fn point_to_parent(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.translation + self.rotation * p
    }

    pub fn point_to_local(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.inverse() * (p - self.translation)
    }

    /// Maps a foot yaw (rotation about local z) into the parent frame by
    /// transporting the full foot rotation and re-extracting yaw.
    pub fn yaw_to_parent(&self, yaw: f64) -> f64 {
        let foot = self.rotation * UnitQuaternion::from_euler_angles(0.0, 0.0, yaw);
        biped_kinematics::pose::yaw_of(&foot)
    }

    pub fn yaw_to_local(&self, yaw: f64) -> f64 {
        let foot = self.rotation.inverse() * UnitQuaternion::from_euler_angles(0.0, 0.0, yaw);
        biped_kinematics::pose::yaw_of(&foot)
    }
}

/// Target state of the three controllable nodes at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub trunk: TrunkPose,
    pub left: AnklePose,
    pub right: AnklePose,
}

impl NodeState {
    /// Nominal double-support stance: trunk upright at `trunk_height`
    /// above ground, ankles straight below the hips.
    pub fn nominal(model: &RobotModel, trunk_height: f64) -> NodeState {
        let (left, right) = model.nominal_ankle_targets(trunk_height);
        NodeState { trunk: TrunkPose::identity(Frame::Body), left, right }
    }

    pub fn ankle(&self, side: Side) -> &AnklePose {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn ankle_mut(&mut self, side: Side) -> &mut AnklePose {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }

    /// Ground level implied by the lower of the two foot soles.
    pub fn ground_level(&self, model: &RobotModel) -> f64 {
        (self.left.position.z).min(self.right.position.z) - model.sole_offset
    }

    /// Re-expresses the state from a local frame into its parent frame.
    pub fn to_parent(&self, frame: &FrameTransform, tag: Frame) -> NodeState {
        NodeState {
            trunk: TrunkPose {
                position: frame.point_to_parent(&self.trunk.position),
                orientation: frame.rotation * self.trunk.orientation,
                frame: tag,
            },
            left: AnklePose {
                position: frame.point_to_parent(&self.left.position),
                yaw: frame.yaw_to_parent(self.left.yaw),
                frame: tag,
            },
            right: AnklePose {
                position: frame.point_to_parent(&self.right.position),
                yaw: frame.yaw_to_parent(self.right.yaw),
                frame: tag,
            },
        }
    }

    /// Re-expresses the state into a child frame.
    pub fn to_local(&self, frame: &FrameTransform, tag: Frame) -> NodeState {
        NodeState {
            trunk: TrunkPose {
                position: frame.point_to_local(&self.trunk.position),
                orientation: frame.rotation.inverse() * self.trunk.orientation,
                frame: tag,
            },
            left: AnklePose {
                position: frame.point_to_local(&self.left.position),
                yaw: frame.yaw_to_local(self.left.yaw),
                frame: tag,
            },
            right: AnklePose {
                position: frame.point_to_local(&self.right.position),
                yaw: frame.yaw_to_local(self.right.yaw),
                frame: tag,
            },
        }
    }

    /// Re-expresses the state into its own trunk frame (trunk becomes the
    /// identity pose). Used when chaining steps.
    pub fn rebased(&self) -> NodeState {
        let frame = FrameTransform::from_trunk(&self.trunk);
        self.to_local(&frame, Frame::Body)
    }

    /// Fixed 14-real encoding: trunk position, left/right ankle positions,
    /// trunk orientation as a rotation vector, then the two ankle yaws.
    pub fn encode(&self) -> [f64; 14] {
        let rv = self.trunk.orientation.scaled_axis();
        [
            self.trunk.position.x,
            self.trunk.position.y,
            self.trunk.position.z,
            self.left.position.x,
            self.left.position.y,
            self.left.position.z,
            self.right.position.x,
            self.right.position.y,
            self.right.position.z,
            rv.x,
            rv.y,
            rv.z,
            self.left.yaw,
            self.right.yaw,
        ]
    }

    /// Largest position gap between two states over the three nodes.
    pub fn max_position_gap(&self, other: &NodeState) -> f64 {
        let t = (self.trunk.position - other.trunk.position).norm();
        let l = (self.left.position - other.left.position).norm();
        let r = (self.right.position - other.right.position).norm();
        t.max(l).max(r)
    }

    pub fn max_yaw_gap(&self, other: &NodeState) -> f64 {
        wrap_angle(self.left.yaw - other.left.yaw)
            .abs()
            .max(wrap_angle(self.right.yaw - other.right.yaw).abs())
    }
}

/// One task step: the minimal control unit. End state and swing curve are
/// expressed in the trunk frame at step start (`start.trunk` is always the
/// identity pose).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskStep {
    pub class: StepClass,
    pub period: f64,
    pub start: NodeState,
    pub end: NodeState,
    pub swing: SwingLeg,
    pub swing_curve: Option<BezierCurve>,
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error("grounded step classes must have period 0, got {0}")]
    GroundedPeriod(f64),
    #[error("swing step period {0} outside [0.4, 0.7] s")]
    PeriodOutOfRange(f64),
    #[error("swing curve endpoints do not match the ankle start/end positions")]
    CurveEndpointMismatch,
    #[error("stance ankle moves during the step")]
    StanceMoved,
    #[error("{side:?} end-state ankle target leaves the workspace")]
    TargetOutsideWorkspace { side: Side },
    #[error("grounded step must keep both ankles fixed")]
    GroundedAnkleMoved,
}

pub const PERIOD_RANGE: (f64, f64) = (0.4, 0.7);

impl TaskStep {
    /// Validates the step-class invariants and returns the step.
    pub fn new(
        model: &RobotModel,
        class: StepClass,
        period: f64,
        start: NodeState,
        end: NodeState,
        swing: SwingLeg,
        swing_curve: Option<BezierCurve>,
    ) -> Result<TaskStep, StepError> {
        if class.is_grounded() {
            if period != 0.0 {
                return Err(StepError::GroundedPeriod(period));
            }
            if start.left.position != end.left.position
                || start.right.position != end.right.position
            {
                return Err(StepError::GroundedAnkleMoved);
            }
        } else {
            if !(PERIOD_RANGE.0..=PERIOD_RANGE.1).contains(&period) {
                return Err(StepError::PeriodOutOfRange(period));
            }
            if let Some(side) = swing.side() {
                let stance = side.opposite();
                if (start.ankle(stance).position - end.ankle(stance).position).norm() > 1e-9 {
                    return Err(StepError::StanceMoved);
                }
                let curve = swing_curve.as_ref().ok_or(StepError::CurveEndpointMismatch)?;
                if (curve.start() - start.ankle(side).position).norm() > 1e-9
                    || (curve.end() - end.ankle(side).position).norm() > 1e-9
                {
                    return Err(StepError::CurveEndpointMismatch);
                }
            }
        }
        // End-state ankle targets must already be inside the clamped
        // workspace, checked in the end-of-step trunk frame.
        let end_local = end.rebased();
        for side in [Side::Left, Side::Right] {
            let target = end_local.ankle(side);
            let clamped = clamp_to_workspace(model, side, target);
            if (clamped.position - target.position).norm() > 1e-9 {
                return Err(StepError::TargetOutsideWorkspace { side });
            }
        }
        Ok(TaskStep { class, period, start, end, swing, swing_curve })
    }

    /// Linear velocity and yaw rate of the trunk implied by the end state
    /// and period; zero for instantaneous steps.
    pub fn trunk_rate(&self) -> (Vector3<f64>, f64) {
        if self.period <= 0.0 {
            return (Vector3::zeros(), 0.0);
        }
        let dp = (self.end.trunk.position - self.start.trunk.position) / self.period;
        let dyaw = wrap_angle(self.end.trunk.yaw() - self.start.trunk.yaw()) / self.period;
        (dp, dyaw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nominal_stance_geometry() {
        let model = RobotModel::default();
        let s = NodeState::nominal(&model, NOMINAL_TRUNK_HEIGHT);
        assert_relative_eq!(s.left.position.y, 0.15);
        assert_relative_eq!(s.right.position.y, -0.15);
        assert_relative_eq!(s.left.position.z, -0.74);
        assert_relative_eq!(s.ground_level(&model), -NOMINAL_TRUNK_HEIGHT);
    }

    #[test]
    fn rebased_state_has_identity_trunk() {
        let model = RobotModel::default();
        let mut s = NodeState::nominal(&model, 0.7);
        s.trunk.position = Vector3::new(0.3, 0.1, 0.7);
        s.trunk.orientation = UnitQuaternion::from_euler_angles(0.0, 0.0, 0.4);
        let local = s.rebased();
        assert_relative_eq!(local.trunk.position, Vector3::zeros(), epsilon = 1e-12);
        assert_relative_eq!(local.trunk.yaw(), 0.0, epsilon = 1e-12);
        // Round trip back to the original frame.
        let frame = FrameTransform::from_trunk(&s.trunk);
        let back = local.to_parent(&frame, Frame::Body);
        assert_relative_eq!(back.left.position, s.left.position, epsilon = 1e-12);
        assert_relative_eq!(back.right.yaw, s.right.yaw, epsilon = 1e-12);
    }

    #[test]
    fn grounded_step_rejects_moved_ankles() {
        let model = RobotModel::default();
        let start = NodeState::nominal(&model, 0.78);
        let mut end = start;
        end.left.position.x += 0.1;
        let err = TaskStep::new(&model, StepClass::Squat, 0.0, start, end, SwingLeg::BothGrounded, None);
        assert!(matches!(err, Err(StepError::GroundedAnkleMoved)));
    }

    #[test]
    fn swing_period_bounds_enforced() {
        let model = RobotModel::default();
        let start = NodeState::nominal(&model, 0.78);
        let err = TaskStep::new(&model, StepClass::Walk, 0.2, start, start, SwingLeg::Left, None);
        assert!(matches!(err, Err(StepError::PeriodOutOfRange(_))));
    }
}
