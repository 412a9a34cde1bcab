use crate::bezier::swing_curve;
use crate::lesson::{InvalidLesson, LessonParams, Range};
use crate::step::{
    FrameTransform, NodeState, StepClass, StepError, SwingLeg, TaskStep, NOMINAL_TRUNK_HEIGHT,
    PERIOD_RANGE,
};
use biped_kinematics::{RobotModel, Side, TrunkPose};
use nalgebra::{Rotation3, UnitQuaternion, Vector3};
use rand::Rng;
use thiserror::Error;

/// Minimum lateral gap kept between the two ankles, m.
pub const MIN_FOOT_GAP: f64 = 0.12;
/// Vertical margin a stair swing must clear above the higher tread, m.
pub const SWING_CLEARANCE: f64 = 0.05;

const MAX_ATTEMPTS: usize = 32;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error(transparent)]
    InvalidLesson(#[from] InvalidLesson),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("no valid {class:?} step found after {attempts} attempts")]
    Exhausted { class: StepClass, attempts: usize },
    #[error("step class {0:?} needs a swing leg")]
    NeedsSwingLeg(StepClass),
}

/// Swing leg and movement direction for one sampled step.
#[derive(Debug, Clone, Copy)]
pub struct StepContext {
    pub swing: SwingLeg,
    /// +1 forward/left/counterclockwise/up, -1 the opposite.
    pub direction: f64,
}

impl StepContext {
    pub fn new(swing: SwingLeg, direction: f64) -> Self {
        Self { swing, direction: direction.signum() }
    }
}

/// Stair geometry shared between a stairs program and its terrain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StairSpec {
    /// x of the first riser in the plan frame.
    pub origin_x: f64,
    /// Signed tread-to-tread height change (negative walks down).
    pub rise: f64,
    /// Tread depth, m.
    pub run: f64,
    pub count: usize,
}

impl StairSpec {
    /// Tread surface level at plan-frame x.
    pub fn height_at(&self, x: f64) -> f64 {
        if x < self.origin_x {
            return 0.0;
        }
        let k = ((x - self.origin_x) / self.run).floor() as i64 + 1;
        let k = k.clamp(0, self.count as i64);
        k as f64 * self.rise
    }
}

fn sample_period(rng: &mut impl Rng) -> f64 {
    rng.random_range(PERIOD_RANGE.0..PERIOD_RANGE.1)
}

/// Draws one task step of `class` starting from `start`, a state whose
/// trunk is the identity pose of the step-start frame. End states are
/// drawn uniformly from the lesson ranges; stance feet stay pinned.
pub fn sample_task_step(
    model: &RobotModel,
    class: StepClass,
    lesson: &LessonParams,
    rng: &mut impl Rng,
    start: &NodeState,
    ctx: StepContext,
) -> Result<TaskStep, SampleError> {
    lesson.validate(model)?;
    let mut scale = 1.0;
    for attempt in 0..MAX_ATTEMPTS {
        if attempt > 0 && attempt % 8 == 0 {
            scale *= 0.5;
        }
        let candidate = match class {
            StepClass::StandStill | StepClass::Squat => {
                grounded_step(model, class, lesson, rng, start, scale)
            }
            StepClass::Walk | StepClass::Sidle => {
                planar_step(model, class, lesson, rng, start, ctx, scale)
            }
            StepClass::Turn => turn_step(model, lesson, rng, start, ctx, scale),
            StepClass::Stairs => {
                let side = ctx.swing.side().ok_or(SampleError::NeedsSwingLeg(class))?;
                let rise = lesson.stair_rise.sample(rng) * ctx.direction;
                let run = lesson.stair_run.sample(rng);
                let sole = start.ankle(side).position.z - model.sole_offset + rise;
                stairs_step(model, lesson, rng, start, ctx.swing, run, sole)
            }
        };
        match candidate {
            Ok(step) => return Ok(step),
            Err(SampleError::NeedsSwingLeg(c)) => return Err(SampleError::NeedsSwingLeg(c)),
            Err(_) => continue,
        }
    }
    Err(SampleError::Exhausted { class, attempts: MAX_ATTEMPTS })
}

fn grounded_step(
    model: &RobotModel,
    class: StepClass,
    lesson: &LessonParams,
    rng: &mut impl Rng,
    start: &NodeState,
    scale: f64,
) -> Result<TaskStep, SampleError> {
    let ground = start.ground_level(model);
    let height = lesson.trunk_height.sample(rng);
    let dx = lesson.posture_offset.sample_signed(rng) * scale;
    let dy = lesson.posture_offset.sample_signed(rng) * scale;
    let yaw = lesson.posture_yaw.sample_signed(rng) * scale;
    let pitch = lesson.posture_tilt.sample_signed(rng) * scale;
    let roll = lesson.posture_tilt.sample_signed(rng) * scale;

    let mut end = *start;
    end.trunk = TrunkPose {
        position: Vector3::new(dx, dy, ground + height),
        orientation: UnitQuaternion::from_euler_angles(roll, pitch, yaw),
        frame: start.trunk.frame,
    };
    Ok(TaskStep::new(model, class, 0.0, *start, end, SwingLeg::BothGrounded, None)?)
}

/// Straight-line walk or sidle step.
fn planar_step(
    model: &RobotModel,
    class: StepClass,
    lesson: &LessonParams,
    rng: &mut impl Rng,
    start: &NodeState,
    ctx: StepContext,
    scale: f64,
) -> Result<TaskStep, SampleError> {
    let side = ctx.swing.side().ok_or(SampleError::NeedsSwingLeg(class))?;
    let stance = side.opposite();
    let displacement = match class {
        StepClass::Walk => {
            Vector3::new(lesson.step_length.sample(rng) * ctx.direction * scale, 0.0, 0.0)
        }
        _ => {
            let mut w = lesson.lateral.sample(rng) * ctx.direction * scale;
            // Keep the ankles from crossing.
            let gap = start.left.position.y - start.right.position.y;
            match side {
                Side::Left => w = w.max(MIN_FOOT_GAP - gap),
                Side::Right => w = w.min(gap - MIN_FOOT_GAP),
            }
            Vector3::new(0.0, w, 0.0)
        }
    };
    let height = lesson.trunk_height.sample(rng);
    let period = sample_period(rng);
    let apex = lesson.apex_height.sample(rng);

    let swing_start = start.ankle(side).position;
    let swing_end = swing_start + displacement;
    let ground = start.ankle(stance).position.z - model.sole_offset;

    let mut end = *start;
    end.ankle_mut(side).position = swing_end;
    let mid = 0.5 * (end.left.position + end.right.position);
    let curve = swing_curve(swing_start, swing_end, apex);
    build_with_trunk_fallback(model, class, period, start, end, ctx.swing, Some(curve), |h| {
        Vector3::new(mid.x, mid.y, ground + h)
    }, height, UnitQuaternion::identity())
}

fn turn_step(
    model: &RobotModel,
    lesson: &LessonParams,
    rng: &mut impl Rng,
    start: &NodeState,
    ctx: StepContext,
    scale: f64,
) -> Result<TaskStep, SampleError> {
    let side = ctx.swing.side().ok_or(SampleError::NeedsSwingLeg(StepClass::Turn))?;
    let stance = side.opposite();
    let yaw = lesson.turn_yaw.sample(rng) * ctx.direction * scale;
    // Forward arc advance; together with the yaw this sets the turn radius.
    let advance = rng.random_range(0.0..=0.5 * lesson.step_length.hi) * scale;
    let height = lesson.trunk_height.sample(rng);
    let period = sample_period(rng);
    let apex = lesson.apex_height.sample(rng);

    let swing_start = start.ankle(side).position;
    let center = 0.5 * (start.left.position + start.right.position);
    let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), yaw);
    let arc = rot * Vector3::new(advance, 0.0, 0.0);
    let mut swing_end = center + rot * (swing_start - center) + arc;
    swing_end.z = swing_start.z;

    let ground = start.ankle(stance).position.z - model.sole_offset;
    let mut end = *start;
    end.ankle_mut(side).position = swing_end;
    end.ankle_mut(side).yaw = biped_kinematics::wrap_angle(start.ankle(side).yaw + yaw);
    let mid = 0.5 * (end.left.position + end.right.position);
    let curve = swing_curve(swing_start, swing_end, apex);
    build_with_trunk_fallback(model, StepClass::Turn, period, start, end, ctx.swing, Some(curve), |h| {
        Vector3::new(mid.x, mid.y, ground + h)
    }, height, UnitQuaternion::from_euler_angles(0.0, 0.0, yaw))
}

/// Stair step with an explicit target sole level for the swing foot.
fn stairs_step(
    model: &RobotModel,
    lesson: &LessonParams,
    rng: &mut impl Rng,
    start: &NodeState,
    swing: SwingLeg,
    advance: f64,
    target_sole_z: f64,
) -> Result<TaskStep, SampleError> {
    let side = swing.side().ok_or(SampleError::NeedsSwingLeg(StepClass::Stairs))?;
    let period = sample_period(rng);
    let height = lesson.trunk_height.sample(rng).min(0.72);

    let swing_start = start.ankle(side).position;
    let swing_end = Vector3::new(
        swing_start.x + advance,
        swing_start.y,
        target_sole_z + model.sole_offset,
    );
    let dz = swing_end.z - swing_start.z;
    // Apex high enough that the curve clears the higher tread by the margin.
    let min_apex = (5.0 * dz.abs() + 16.0 * SWING_CLEARANCE) / 14.0;
    let apex = lesson.apex_height.sample(rng).max(min_apex);

    let mut end = *start;
    end.ankle_mut(side).position = swing_end;
    let mid = 0.5 * (end.left.position + end.right.position);
    let mean_sole = 0.5 * (end.left.position.z + end.right.position.z) - model.sole_offset;
    let curve = swing_curve(swing_start, swing_end, apex);
    build_with_trunk_fallback(model, StepClass::Stairs, period, start, end, swing, Some(curve), |h| {
        Vector3::new(mid.x, mid.y, mean_sole + h)
    }, height, UnitQuaternion::identity())
}

/// Builds the step, lowering the trunk target in small decrements when an
/// end-state ankle falls outside the workspace shell.
#[allow(clippy::too_many_arguments)]
fn build_with_trunk_fallback(
    model: &RobotModel,
    class: StepClass,
    period: f64,
    start: &NodeState,
    mut end: NodeState,
    swing: SwingLeg,
    curve: Option<crate::bezier::BezierCurve>,
    trunk_pos: impl Fn(f64) -> Vector3<f64>,
    mut height: f64,
    orientation: UnitQuaternion<f64>,
) -> Result<TaskStep, SampleError> {
    for _ in 0..12 {
        end.trunk = TrunkPose { position: trunk_pos(height), orientation, frame: start.trunk.frame };
        match TaskStep::new(model, class, period, *start, end, swing, curve) {
            Ok(step) => return Ok(step),
            Err(StepError::TargetOutsideWorkspace { .. }) => height -= 0.02,
            Err(e) => return Err(e.into()),
        }
    }
    Err(SampleError::Exhausted { class, attempts: 12 })
}

/// Output of a program sampler: the chained steps plus, for stair
/// programs, the matching terrain geometry.
#[derive(Debug, Clone)]
pub struct SampledProgram {
    pub steps: Vec<TaskStep>,
    pub stairs: Option<StairSpec>,
}

/// Samples a chained multi-step program of one class starting from the
/// nominal stance. Locomotion programs alternate swing legs and keep one
/// direction and trunk height for the whole program.
pub fn sample_program(
    model: &RobotModel,
    class: StepClass,
    lesson: &LessonParams,
    rng: &mut impl Rng,
    num_steps: usize,
) -> Result<SampledProgram, SampleError> {
    lesson.validate(model)?;
    let start = NodeState::nominal(model, NOMINAL_TRUNK_HEIGHT);
    let mut steps = Vec::with_capacity(num_steps);

    if class.is_grounded() {
        let mut cursor = start;
        for _ in 0..num_steps.max(1) {
            let ctx = StepContext::new(SwingLeg::BothGrounded, 1.0);
            let step = sample_task_step(model, class, lesson, rng, &cursor, ctx)?;
            cursor = step.end.rebased();
            steps.push(step);
        }
        return Ok(SampledProgram { steps, stairs: None });
    }

    // Fix direction and trunk height across the program.
    let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let height = lesson.trunk_height.sample(rng);
    let mut program_lesson = *lesson;
    program_lesson.trunk_height = Range::new(height, height);

    let mut swing = if rng.random_bool(0.5) { SwingLeg::Left } else { SwingLeg::Right };
    let mut cursor = start;

    if matches!(class, StepClass::Stairs) {
        let rise = lesson.stair_rise.sample(rng) * dir;
        let run = lesson.stair_run.sample(rng);
        let height = height.min(0.72 - 0.5 * rise.abs());
        program_lesson.trunk_height = Range::new(height, height);
        let treads = num_steps.div_ceil(2);
        let stairs = StairSpec { origin_x: 0.5 * run, rise, run, count: treads };
        // Both feet visit each tread: L to tread k, R to tread k, ...
        let mut plan_x = [start.left.position.x, start.right.position.x];
        let mut anchor = crate::program::nominal_plan_anchor();
        for i in 0..num_steps {
            let tread = i / 2 + 1;
            let side = swing.side().unwrap();
            let foot = if side == Side::Left { 0 } else { 1 };
            let target_x = tread as f64 * run;
            let target_sole = tread as f64 * rise;
            let advance = target_x - plan_x[foot];
            let ankle = cursor.ankle(side).position;
            let plan_sole = anchor.point_to_parent(&ankle).z - model.sole_offset;
            let local_sole = (ankle.z - model.sole_offset) + (target_sole - plan_sole);
            let step =
                stairs_step(model, &program_lesson, rng, &cursor, swing, advance, local_sole)?;
            plan_x[foot] = target_x;
            anchor = anchor.compose(&FrameTransform::from_trunk(&step.end.trunk));
            cursor = step.end.rebased();
            steps.push(step);
            swing = if swing == SwingLeg::Left { SwingLeg::Right } else { SwingLeg::Left };
        }
        return Ok(SampledProgram { steps, stairs: Some(stairs) });
    }

    for _ in 0..num_steps {
        let ctx = StepContext::new(swing, dir);
        let step = sample_task_step(model, class, &program_lesson, rng, &cursor, ctx)?;
        cursor = step.end.rebased();
        steps.push(step);
        swing = if swing == SwingLeg::Left { SwingLeg::Right } else { SwingLeg::Left };
    }
    Ok(SampledProgram { steps, stairs: None })
}

/// Rectangular ground region footholds must avoid.
#[derive(Debug, Clone, Copy)]
pub struct KeepOutRegion {
    pub min: (f64, f64),
    pub max: (f64, f64),
}

impl KeepOutRegion {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min.0 && x <= self.max.0 && y >= self.min.1 && y <= self.max.1
    }
}

/// Forward-walk program whose footholds (swing-end ankle ground points)
/// avoid the keep-out region: approach steps stop short of it and a
/// single longer stride crosses it.
pub fn plan_walk_program_avoiding(
    model: &RobotModel,
    lesson: &LessonParams,
    rng: &mut impl Rng,
    region: &KeepOutRegion,
    num_steps: usize,
) -> Result<SampledProgram, SampleError> {
    lesson.validate(model)?;
    let margin = 0.5 * model.foot_length + 0.02;
    let lo_x = region.min.0 - margin;
    let hi_x = region.max.0 + margin;
    let height = lesson.trunk_height.sample(rng);
    let nominal_step = 0.5 * (lesson.step_length.lo + lesson.step_length.hi);

    let start = NodeState::nominal(model, NOMINAL_TRUNK_HEIGHT);
    let mut cursor = start;
    let mut swing = SwingLeg::Left;
    let mut plan_x = [start.left.position.x, start.right.position.x];
    let mut steps = Vec::with_capacity(num_steps);
    let mut program_lesson = *lesson;
    program_lesson.trunk_height = Range::new(height, height);

    for _ in 0..num_steps {
        let side = swing.side().unwrap();
        let idx = if side == Side::Left { 0 } else { 1 };
        // Straight walking keeps each foot on its hip track.
        let track_y = model.hip_offset(side).y;
        let crosses_band = track_y >= region.min.1 - 0.5 * model.foot_width
            && track_y <= region.max.1 + 0.5 * model.foot_width;
        let cur = plan_x[idx];
        let mut target = cur + nominal_step;
        if crosses_band && target > lo_x && target < hi_x {
            if hi_x - cur <= lesson.step_length.hi {
                target = hi_x; // stride across
            } else {
                target = lo_x.min(cur + lesson.step_length.hi); // approach
            }
        }
        let advance = (target - cur).clamp(lesson.step_length.lo, lesson.step_length.hi);
        if crosses_band && region.contains(cur + advance, track_y) {
            return Err(SampleError::Exhausted { class: StepClass::Walk, attempts: 1 });
        }
        let mut fixed = program_lesson;
        fixed.step_length = Range::new(advance, advance);
        let ctx = StepContext::new(swing, 1.0);
        let step = planar_step(model, StepClass::Walk, &fixed, rng, &cursor, ctx, 1.0)?;
        plan_x[idx] += advance;
        cursor = step.end.rebased();
        steps.push(step);
        swing = if swing == SwingLeg::Left { SwingLeg::Right } else { SwingLeg::Left };
    }
    Ok(SampledProgram { steps, stairs: None })
}
