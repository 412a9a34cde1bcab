use crate::step::{FrameTransform, NodeState, TaskStep};
use biped_kinematics::{wrap_angle, Frame, Side, TrunkPose};
use nalgebra::{UnitQuaternion, Vector3};
use thiserror::Error;

/// The unified control input: task-step end state, real-time state and
/// touchdown timers, all expressed in the current body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    pub end_state: NodeState,
    pub realtime: NodeState,
    /// Seconds until expected touchdown, [left, right]; zero for feet in
    /// ground contact.
    pub timers: [f64; 2],
}

/// Plan-frame targets at one instant, before re-expression into the
/// current body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanTargets {
    pub realtime: NodeState,
    pub end_state: NodeState,
    pub timers: [f64; 2],
    /// True when the target velocities of all three nodes are zero.
    pub stationary: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("time {0} outside the playable range")]
    PhaseOutOfRange(f64),
}

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("empty step sequence")]
    Empty,
    #[error("discontinuous sequence at step {index}: position gap {gap:.2e} m")]
    Discontinuous { index: usize, gap: f64 },
}

/// Playback options for composing steps into a program.
#[derive(Debug, Clone, Copy)]
pub struct ComposeOptions {
    /// Dwell time given to period-0 posture steps during playback.
    pub posture_dwell: f64,
    /// Extra hold appended after the last step (target foothold frozen).
    pub terminal_hold: f64,
    /// World pose of the trunk at program start. With the default nominal
    /// anchor the plan frame coincides with the world frame (ground z 0).
    pub anchor: FrameTransform,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        Self { posture_dwell: 2.0, terminal_hold: 0.0, anchor: nominal_plan_anchor() }
    }
}

/// World pose of a trunk standing at the nominal stance over the origin.
pub fn nominal_plan_anchor() -> FrameTransform {
    FrameTransform {
        translation: Vector3::new(0.0, 0.0, crate::step::NOMINAL_TRUNK_HEIGHT),
        rotation: UnitQuaternion::identity(),
    }
}

#[derive(Debug, Clone)]
struct Segment {
    step: TaskStep,
    /// Plan-frame pose of the step's start trunk frame.
    anchor: FrameTransform,
    t0: f64,
    dwell: f64,
}

/// A composed task program: a continuous target trajectory for the three
/// controllable nodes in a fixed plan frame (the trunk frame at program
/// start). Immutable after composition.
#[derive(Debug, Clone)]
pub struct TaskProgram {
    segments: Vec<Segment>,
    duration: f64,
    terminal_hold: f64,
}

const BOUNDARY_TOL: f64 = 1e-9;

impl TaskProgram {
    /// Chains the steps, checking that each step starts exactly where the
    /// previous one ended (re-expressed in the new start frame).
    pub fn compose(steps: Vec<TaskStep>, opts: ComposeOptions) -> Result<TaskProgram, ComposeError> {
        if steps.is_empty() {
            return Err(ComposeError::Empty);
        }
        let mut segments = Vec::with_capacity(steps.len());
        let mut anchor = opts.anchor;
        let mut t0 = 0.0;
        for (index, step) in steps.into_iter().enumerate() {
            if index > 0 {
                let prev: &Segment = segments.last().unwrap();
                let expected = prev.step.end.rebased();
                let gap = expected
                    .max_position_gap(&step.start)
                    .max(expected.max_yaw_gap(&step.start));
                if gap > BOUNDARY_TOL {
                    return Err(ComposeError::Discontinuous { index, gap });
                }
            }
            let dwell = if step.period > 0.0 { step.period } else { opts.posture_dwell };
            segments.push(Segment { step, anchor, t0, dwell });
            let seg = segments.last().unwrap();
            anchor = anchor.compose(&FrameTransform::from_trunk(&seg.step.end.trunk));
            t0 += dwell;
        }
        Ok(TaskProgram { segments, duration: t0, terminal_hold: opts.terminal_hold })
    }

    /// Time span of the stepped part of the program.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Duration including the terminal hold.
    pub fn total_duration(&self) -> f64 {
        self.duration + self.terminal_hold
    }

    pub fn steps(&self) -> impl Iterator<Item = &TaskStep> {
        self.segments.iter().map(|s| &s.step)
    }

    /// Final target state in the plan frame; the program holds this state
    /// for any query time past its duration.
    pub fn final_state(&self) -> NodeState {
        let last = self.segments.last().unwrap();
        last.step.end.to_parent(&last.anchor, Frame::World)
    }

    /// Plan-frame swing-foot landing points, one per locomotion step.
    pub fn footholds(&self) -> Vec<(Side, Vector3<f64>)> {
        self.segments
            .iter()
            .filter_map(|seg| {
                seg.step.swing.side().map(|side| {
                    let p = seg.step.end.ankle(side).position;
                    (side, seg.anchor.point_to_parent(&p))
                })
            })
            .collect()
    }

    /// Plan-frame targets at time `t` (clamps to the terminal hold after
    /// the last step).
    pub fn targets_at(&self, t: f64) -> Result<PlanTargets, PlanError> {
        if !t.is_finite() || t < 0.0 {
            return Err(PlanError::PhaseOutOfRange(t));
        }
        let seg = match self.segments.iter().rev().find(|s| t >= s.t0) {
            Some(s) if t < s.t0 + s.dwell => s,
            Some(_) | None => {
                // Past the end: hold the final state, timers zero.
                let state = self.final_state();
                return Ok(PlanTargets {
                    realtime: state,
                    end_state: state,
                    timers: [0.0, 0.0],
                    stationary: true,
                });
            }
        };
        let local = step_targets_at(&seg.step, t - seg.t0)?;
        Ok(PlanTargets {
            realtime: local.realtime.to_parent(&seg.anchor, Frame::World),
            end_state: local.end_state.to_parent(&seg.anchor, Frame::World),
            timers: local.timers,
            stationary: local.stationary,
        })
    }

    /// The unified control input at time `t`, re-expressed into the frame
    /// of `base` (the actual trunk pose in the plan frame).
    pub fn control_input_at(&self, t: f64, base: &TrunkPose) -> Result<ControlInput, PlanError> {
        let targets = self.targets_at(t)?;
        Ok(re_express(&targets, base))
    }
}

/// Step-local targets at elapsed time `tau` within one task step.
///
/// Grounded (period-0) steps target their end state for any `tau`; swing
/// steps interpolate the trunk uniformly and move the swing ankle along
/// its Bezier curve.
pub fn step_targets_at(step: &TaskStep, tau: f64) -> Result<PlanTargets, PlanError> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(PlanError::PhaseOutOfRange(tau));
    }
    if step.period <= 0.0 {
        return Ok(PlanTargets {
            realtime: step.end,
            end_state: step.end,
            timers: [0.0, 0.0],
            stationary: true,
        });
    }
    let s = (tau / step.period).clamp(0.0, 1.0);
    let mut realtime = step.start;

    realtime.trunk = TrunkPose {
        position: step.start.trunk.position.lerp(&step.end.trunk.position, s),
        orientation: shortest_slerp(&step.start.trunk.orientation, &step.end.trunk.orientation, s),
        frame: step.start.trunk.frame,
    };
    let mut timers = [0.0, 0.0];
    if let Some(side) = step.swing.side() {
        let curve = step.swing_curve.as_ref().expect("validated at construction");
        let ankle = realtime.ankle_mut(side);
        ankle.position = curve.at(s);
        let start_yaw = step.start.ankle(side).yaw;
        let end_yaw = step.end.ankle(side).yaw;
        ankle.yaw = wrap_angle(start_yaw + wrap_angle(end_yaw - start_yaw) * s);
        let remaining = (step.period - tau).max(0.0);
        match side {
            Side::Left => timers[0] = remaining,
            Side::Right => timers[1] = remaining,
        }
    }
    Ok(PlanTargets { realtime, end_state: step.end, timers, stationary: false })
}

/// Spec-level convenience: control input of a single step at time `t`,
/// re-expressed into `base` (current trunk pose in the step-start frame).
pub fn control_input_at(
    step: &TaskStep,
    t: f64,
    base: &TrunkPose,
) -> Result<ControlInput, PlanError> {
    if step.period > 0.0 && t > step.period {
        return Err(PlanError::PhaseOutOfRange(t));
    }
    let targets = step_targets_at(step, t)?;
    Ok(re_express(&targets, base))
}

/// Re-expresses plan-frame targets into the body frame of `base`.
pub fn re_express(targets: &PlanTargets, base: &TrunkPose) -> ControlInput {
    let frame = FrameTransform::from_trunk(base);
    ControlInput {
        end_state: targets.end_state.to_local(&frame, Frame::Body),
        realtime: targets.realtime.to_local(&frame, Frame::Body),
        timers: targets.timers,
    }
}

/// Constant-rate quaternion interpolation along the shorter arc.
pub fn shortest_slerp(
    a: &UnitQuaternion<f64>,
    b: &UnitQuaternion<f64>,
    t: f64,
) -> UnitQuaternion<f64> {
    let mut bq = *b;
    if a.coords.dot(&b.coords) < 0.0 {
        bq = UnitQuaternion::new_unchecked(-b.into_inner());
    }
    a.try_slerp(&bq, t, 1e-12).unwrap_or(*a)
}
