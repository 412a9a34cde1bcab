//! Task-step planning: the minimal control unit of the tracking stack.
//!
//! A task step carries the target end state of the three controllable
//! nodes (trunk and both ankles), a period, and a degree-4 Bezier swing
//! curve for the moving ankle. Steps chain into programs that emit the
//! unified control input (end state, real-time state, touchdown timers)
//! at any playback time.

pub mod bezier;
pub mod format;
pub mod lesson;
pub mod program;
pub mod sample;
pub mod step;

pub use bezier::{swing_curve, BezierCurve};
pub use format::{emit_program, parse_program, ParseError};
pub use lesson::{InvalidLesson, LessonParams, Range};
pub use program::{
    nominal_plan_anchor,
    control_input_at, re_express, shortest_slerp, step_targets_at, ComposeError, ComposeOptions,
    ControlInput, PlanError, PlanTargets, TaskProgram,
};
pub use sample::{
    plan_walk_program_avoiding, sample_program, sample_task_step, KeepOutRegion, SampleError,
    SampledProgram, StairSpec, StepContext, MIN_FOOT_GAP, SWING_CLEARANCE,
};
pub use step::{
    FrameTransform, NodeState, StepClass, StepError, SwingLeg, TaskStep, NOMINAL_TRUNK_HEIGHT,
    PERIOD_RANGE,
};
