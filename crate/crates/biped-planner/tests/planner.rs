use approx::assert_relative_eq;
use biped_kinematics::{clamp_to_workspace, Frame, RobotModel, Side, TrunkPose};
use biped_planner::{
    emit_program, parse_program, plan_walk_program_avoiding, sample_program, sample_task_step,
    step_targets_at, ComposeOptions, KeepOutRegion, LessonParams, NodeState, Range, StepClass,
    StepContext, SwingLeg, TaskProgram, NOMINAL_TRUNK_HEIGHT, PERIOD_RANGE,
};
use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn model() -> RobotModel {
    RobotModel::default()
}

fn nominal(model: &RobotModel) -> NodeState {
    NodeState::nominal(model, NOMINAL_TRUNK_HEIGHT)
}

#[test]
fn sampled_turn_periods_fill_the_range() {
    let model = model();
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let start = nominal(&model);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..10_000 {
        let swing = if i % 2 == 0 { SwingLeg::Left } else { SwingLeg::Right };
        let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let step =
            sample_task_step(&model, StepClass::Turn, &lesson, &mut rng, &start, StepContext::new(swing, dir))
                .unwrap();
        assert!(step.period >= PERIOD_RANGE.0 && step.period <= PERIOD_RANGE.1);
        min = min.min(step.period);
        max = max.max(step.period);
    }
    assert!(min - PERIOD_RANGE.0 < 0.005, "min period {min}");
    assert!(PERIOD_RANGE.1 - max < 0.005, "max period {max}");
}

#[test]
fn fixed_walk_lesson_displaces_swing_ankle_only() {
    let model = model();
    let lesson = LessonParams {
        step_length: Range::new(0.3, 0.3),
        trunk_height: Range::new(NOMINAL_TRUNK_HEIGHT, NOMINAL_TRUNK_HEIGHT),
        ..Default::default()
    };
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let start = nominal(&model);
    let step = sample_task_step(
        &model,
        StepClass::Walk,
        &lesson,
        &mut rng,
        &start,
        StepContext::new(SwingLeg::Left, 1.0),
    )
    .unwrap();
    let moved = step.end.left.position - start.left.position;
    assert_relative_eq!(moved, Vector3::new(0.3, 0.0, 0.0), epsilon = 1e-12);
    assert_relative_eq!(step.end.right.position, start.right.position, epsilon = 1e-12);
}

#[test]
fn standing_still_step_shape() {
    let model = model();
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(4);
    let start = nominal(&model);
    let step = sample_task_step(
        &model,
        StepClass::StandStill,
        &lesson,
        &mut rng,
        &start,
        StepContext::new(SwingLeg::BothGrounded, 1.0),
    )
    .unwrap();
    assert_eq!(step.period, 0.0);
    assert_eq!(step.end.left.position, start.left.position);
    assert_eq!(step.end.right.position, start.right.position);
    let targets = step_targets_at(&step, 0.7).unwrap();
    assert_eq!(targets.timers, [0.0, 0.0]);
    assert!(targets.stationary);
    // The real-time target equals the end state for any time.
    assert_eq!(targets.realtime, targets.end_state);
}

#[test]
fn control_input_terminal_coincidence() {
    let model = model();
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let start = nominal(&model);
    let step = sample_task_step(
        &model,
        StepClass::Walk,
        &lesson,
        &mut rng,
        &start,
        StepContext::new(SwingLeg::Right, 1.0),
    )
    .unwrap();
    let at_end = step_targets_at(&step, step.period).unwrap();
    assert!(at_end.realtime.max_position_gap(&at_end.end_state) < 1e-12);
    assert_eq!(at_end.timers, [0.0, 0.0]);

    let mid = step_targets_at(&step, step.period / 2.0).unwrap();
    assert_relative_eq!(mid.timers[1], step.period / 2.0, epsilon = 1e-12);
    assert_eq!(mid.timers[0], 0.0);
}

#[test]
fn trunk_track_is_uniform() {
    let model = model();
    let start = nominal(&model);
    let mut end = start;
    end.trunk.position = Vector3::new(0.3, 0.0, -0.04);
    end.trunk.position.z = start.trunk.position.z; // keep height
    end.trunk.orientation = UnitQuaternion::from_euler_angles(0.0, 0.0, 0.4);
    end.left.position += Vector3::new(0.3, 0.0, 0.0);
    // Build a turn-like step by hand so the trunk both moves and yaws.
    let curve = biped_planner::swing_curve(start.left.position, end.left.position, 0.1);
    let mid = 0.5 * (end.left.position + end.right.position);
    end.trunk.position.x = mid.x;
    end.trunk.position.y = mid.y;
    let step = biped_planner::TaskStep::new(
        &model,
        StepClass::Turn,
        0.5,
        start,
        end,
        SwingLeg::Left,
        Some(curve),
    )
    .unwrap();

    // Position midpoint and constant yaw rate.
    let half = step_targets_at(&step, 0.25).unwrap();
    let expected_mid = 0.5 * (start.trunk.position + end.trunk.position);
    assert_relative_eq!(half.realtime.trunk.position, expected_mid, epsilon = 1e-12);
    let quarter = step_targets_at(&step, 0.125).unwrap();
    assert_relative_eq!(quarter.realtime.trunk.yaw(), 0.1, epsilon = 1e-12);

    // d/ds of position is constant across sampled phases.
    let mut prev = step_targets_at(&step, 0.0).unwrap().realtime.trunk.position;
    let h = step.period / 100.0;
    let mut rates = Vec::new();
    for i in 1..=100 {
        let p = step_targets_at(&step, i as f64 * h).unwrap().realtime.trunk.position;
        rates.push((p - prev) / h);
        prev = p;
    }
    for r in &rates {
        assert_relative_eq!(*r, rates[0], epsilon = 1e-9);
    }
}

#[test]
fn sampled_end_states_pass_workspace_unchanged() {
    let model = model();
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    for class in StepClass::ALL {
        for i in 0..200 {
            let swing = match class {
                StepClass::StandStill | StepClass::Squat => SwingLeg::BothGrounded,
                _ if i % 2 == 0 => SwingLeg::Left,
                _ => SwingLeg::Right,
            };
            let dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let start = nominal(&model);
            let step =
                sample_task_step(&model, class, &lesson, &mut rng, &start, StepContext::new(swing, dir))
                    .unwrap();
            let end_local = step.end.rebased();
            for side in [Side::Left, Side::Right] {
                let t = end_local.ankle(side);
                let c = clamp_to_workspace(&model, side, t);
                assert!(
                    (c.position - t.position).norm() <= 1e-9,
                    "{class:?} end ankle left the workspace"
                );
            }
        }
    }
}

#[test]
fn program_boundaries_are_continuous() {
    let model = model();
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for class in [StepClass::Walk, StepClass::Sidle, StepClass::Turn, StepClass::Stairs] {
        let sampled = sample_program(&model, class, &lesson, &mut rng, 6).unwrap();
        let program = TaskProgram::compose(sampled.steps, ComposeOptions::default()).unwrap();
        let mut t = 0.0;
        let eps = 1e-7;
        for step in program.steps() {
            t += step.period.max(0.0);
            if t >= program.duration() {
                break;
            }
            let before = program.targets_at(t - eps).unwrap().realtime;
            let after = program.targets_at(t + eps).unwrap().realtime;
            let gap = before.max_position_gap(&after);
            // Within eps of the boundary the trajectories move O(eps), so a
            // 1e-9 discontinuity allowance dominates only if targets jump.
            assert!(gap < 1e-5, "{class:?} boundary gap {gap}");
            let exact_prev = program.targets_at(t - 1e-12).unwrap().realtime;
            let exact_next = program.targets_at(t).unwrap().realtime;
            assert!(exact_prev.max_position_gap(&exact_next) <= 1e-9);
        }
    }
}

#[test]
fn timers_nonincreasing_and_zero_at_touchdown() {
    let model = model();
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let sampled = sample_program(&model, StepClass::Walk, &lesson, &mut rng, 4).unwrap();
    let program = TaskProgram::compose(sampled.steps, ComposeOptions::default()).unwrap();
    let dt = 0.005;
    let mut prev = program.targets_at(0.0).unwrap().timers;
    let mut t = dt;
    let mut boundary_times: Vec<f64> = Vec::new();
    let mut acc = 0.0;
    for step in program.steps() {
        acc += step.period;
        boundary_times.push(acc);
    }
    while t < program.duration() {
        let timers = program.targets_at(t).unwrap().timers;
        let crossed = boundary_times.iter().any(|b| t - dt < *b && *b <= t);
        if !crossed {
            assert!(timers[0] <= prev[0] + 1e-12);
            assert!(timers[1] <= prev[1] + 1e-12);
        }
        assert!(timers[0] >= 0.0 && timers[1] >= 0.0);
        prev = timers;
        t += dt;
    }
    // At each touchdown instant the swinging timer reads exactly zero.
    for (step, b) in program.steps().zip(boundary_times) {
        if let Some(side) = step.swing.side() {
            let timers = program.targets_at(b - 1e-15).unwrap().timers;
            let idx = if side == Side::Left { 0 } else { 1 };
            assert!(timers[idx] <= 1e-12);
        }
    }
}

#[test]
fn discontinuous_sequence_rejected() {
    let model = model();
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let a = sample_program(&model, StepClass::Walk, &lesson, &mut rng, 2).unwrap().steps;
    let mut b = a.clone();
    // Corrupt the second step's start.
    b[1].start.left.position.x += 0.05;
    assert!(matches!(
        TaskProgram::compose(b, ComposeOptions::default()),
        Err(biped_planner::ComposeError::Discontinuous { index: 1, .. })
    ));
}

#[test]
fn terminal_hold_freezes_targets() {
    let model = model();
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(10);
    let sampled = sample_program(&model, StepClass::Walk, &lesson, &mut rng, 3).unwrap();
    let opts = ComposeOptions { terminal_hold: 3.0, ..Default::default() };
    let program = TaskProgram::compose(sampled.steps, opts).unwrap();
    let end = program.duration();
    let a = program.targets_at(end + 0.1).unwrap();
    let b = program.targets_at(end + 2.9).unwrap();
    assert_eq!(a.realtime, b.realtime);
    assert!(a.stationary);
    assert_eq!(a.timers, [0.0, 0.0]);
    assert!(a.realtime.max_position_gap(&program.final_state()) < 1e-12);
}

#[test]
fn keep_out_region_is_avoided() {
    let model = model();
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let region = KeepOutRegion { min: (0.55, -0.4), max: (0.67, 0.4) };
    let sampled = plan_walk_program_avoiding(&model, &lesson, &mut rng, &region, 10).unwrap();
    let program = TaskProgram::compose(sampled.steps, ComposeOptions::default()).unwrap();
    let footholds = program.footholds();
    assert!(!footholds.is_empty());
    let mut crossed = false;
    for (_, p) in &footholds {
        assert!(!region.contains(p.x, p.y), "foothold {p:?} inside keep-out region");
        crossed |= p.x > region.max.0;
    }
    assert!(crossed, "program never crossed the region");
}

#[test]
fn stairs_swing_clears_the_rise() {
    let model = model();
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(12);
    for _ in 0..20 {
        let sampled = sample_program(&model, StepClass::Stairs, &lesson, &mut rng, 4).unwrap();
        let spec = sampled.stairs.unwrap();
        for step in &sampled.steps {
            let curve = step.swing_curve.as_ref().unwrap();
            let start_z = curve.start().z;
            let rise = (curve.end().z - start_z).max(0.0);
            assert!(
                curve.max_height(200) >= start_z + rise + biped_planner::SWING_CLEARANCE - 1e-9,
                "swing curve does not clear the tread"
            );
        }
        // Terrain heights at the planned footholds match the step targets.
        let program = TaskProgram::compose(sampled.steps, ComposeOptions::default()).unwrap();
        for (_, p) in program.footholds() {
            let tread = spec.height_at(p.x);
            assert_relative_eq!(p.z - model.sole_offset, tread, epsilon = 1e-9);
        }
    }
}

#[test]
fn program_format_round_trips() {
    let model = model();
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(13);
    for class in [StepClass::Walk, StepClass::Turn, StepClass::Squat, StepClass::Stairs] {
        let sampled = sample_program(&model, class, &lesson, &mut rng, 4).unwrap();
        let text = emit_program(&sampled.steps);
        let parsed = parse_program(&model, &text).unwrap();
        assert_eq!(parsed.len(), sampled.steps.len());
        for (a, b) in parsed.iter().zip(&sampled.steps) {
            assert_eq!(a, b);
        }
    }
}

#[test]
fn parse_reports_line_numbers() {
    let model = model();
    let err = parse_program(&model, "walk,0.5,left,not-a-float\n").unwrap_err();
    assert!(err.to_string().contains("line 1"));
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(14);
    let sampled = sample_program(&model, StepClass::Walk, &lesson, &mut rng, 2).unwrap();
    let mut text = emit_program(&sampled.steps);
    text.push_str("bogus,0.5,left,0,0,0\n");
    let err = parse_program(&model, &text).unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
}

#[test]
fn re_expression_into_moved_base() {
    let model = model();
    let lesson = LessonParams::default();
    let mut rng = ChaCha12Rng::seed_from_u64(15);
    let sampled = sample_program(&model, StepClass::Walk, &lesson, &mut rng, 2).unwrap();
    let program = TaskProgram::compose(sampled.steps, ComposeOptions::default()).unwrap();
    let t = 0.3;
    let plan = program.targets_at(t).unwrap();
    // A base exactly at the plan target makes the realtime errors vanish.
    let base = TrunkPose {
        position: plan.realtime.trunk.position,
        orientation: plan.realtime.trunk.orientation,
        frame: Frame::World,
    };
    let input = program.control_input_at(t, &base).unwrap();
    assert_relative_eq!(input.realtime.trunk.position, Vector3::zeros(), epsilon = 1e-12);
    assert_relative_eq!(input.realtime.trunk.yaw(), 0.0, epsilon = 1e-12);
    // Ankle targets land where FK of the current stance would put them.
    let gap = (input.realtime.left.position
        - (base.orientation.inverse() * (plan.realtime.left.position - base.position)))
        .norm();
    assert!(gap < 1e-12);
}
