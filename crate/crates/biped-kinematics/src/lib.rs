//! Kinematic core of the 12-joint biped.
//!
//! The robot is a floating trunk with two six-joint legs (hip yaw, hip roll,
//! hip pitch, knee pitch, ankle pitch, ankle roll). All poses in this crate
//! are expressed either in the trunk base frame `F_B` (origin at the trunk
//! center, x forward, y left, z up) or in the world frame; every pose value
//! carries its frame tag.
//!
//! The inverse kinematics is closed-form under the horizontal-feet
//! constraint: the foot soles stay parallel to the trunk transverse plane,
//! so only ankle position and ankle yaw remain as targets per leg.

pub mod fk;
pub mod ik;
pub mod joints;
pub mod model;
pub mod pose;
pub mod workspace;

pub use fk::{forward_kinematics, horizontal_feet_residual, leg_forward_kinematics};
pub use ik::{ik_solve, solve_leg, IkError, IkSolution};
pub use joints::{
    denormalize_joints, normalize_joints, ActionVector, JointIndex, JointKind, JointVector, Side,
    JOINT_COUNT,
};
pub use model::{Axis, JointInfo, LinkInertias, ModelError, RobotConfig, RobotModel, NOMINAL_TRUNK_HEIGHT};
pub use pose::{wrap_angle, AnklePose, Frame, TrunkPose};
pub use workspace::{clamp_to_workspace, clamp_to_workspace_flagged};
