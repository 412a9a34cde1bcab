//! The instruction-learning control pipeline: an IK feedforward tracks the
//! real-time node targets, a learned feedback term is blended in with the
//! feedback ratio, and the result is clamped, low-pass filtered and mapped
//! onto joint PD targets.

pub mod config;
pub mod pd;
pub mod pipeline;

pub use config::{ControlConfig, FilterState, PdGains};
pub use pd::pd_torques;
pub use pipeline::{combine, feedforward, filter_and_clamp, map_to_joint_targets, PipelineError};
