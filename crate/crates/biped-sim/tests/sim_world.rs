use approx::assert_relative_eq;
use biped_control::{pd_torques, ControlConfig};
use biped_kinematics::{
    ik_solve, JointKind, JointVector, RobotModel, Side, JOINT_COUNT, NOMINAL_TRUNK_HEIGHT,
};
use biped_planner::{LessonParams, StepClass};
use biped_sim::{
    measure_nodes, spawn_scenario, world::spawn_on_terrain, SimConfig, SimState, SimWorld,
    Termination, TerrainModel,
};
use nalgebra::{UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn world(cfg: SimConfig) -> SimWorld {
    SimWorld::new(RobotModel::default(), TerrainModel::Flat, cfg)
}

fn nominal_state(world: &SimWorld) -> SimState {
    let mut rng = ChaCha12Rng::seed_from_u64(0);
    spawn_on_terrain(&world.model, &world.terrain, 0.0, &mut rng)
}

fn hold_nominal(world: &SimWorld, seconds: f64) -> SimState {
    let control = ControlConfig::default();
    let gains = control.joint_gains();
    let mut state = nominal_state(world);
    let target = state.q;
    let steps = (seconds / world.cfg.control_dt()).round() as usize;
    for _ in 0..steps {
        let tau = pd_torques(&target, &state.q, &state.q_dot, &gains);
        state = world.step(&state, &tau).expect("stable stance");
    }
    state
}

#[test]
fn locked_single_joint_matches_pendulum_oracle() {
    // One free hip pitch with the rest of the robot frozen behaves as a
    // compound pendulum of the whole straight leg. The oracle integrates
    // the 1-DOF ODE with fine RK4 steps using inertia values derived
    // from the model's masses and lengths.
    let model = RobotModel::default();
    let mut cfg = SimConfig { fixed_base: true, joint_armature: 0.0, ..Default::default() };
    for (j, lock) in cfg.locked_joints.iter_mut().enumerate() {
        *lock = j != biped_kinematics::joints::joint_index(Side::Left, JointKind::HipPitch);
    }
    let world = SimWorld::new(model.clone(), TerrainModel::Flat, cfg);

    let theta0 = 0.3;
    let mut state = nominal_state(&world);
    state.base_position.z = 5.0; // keep the feet clear of the ground
    state.q = JointVector::zeros();
    state.q.set(Side::Left, JointKind::HipPitch, theta0);
    state.q_dot = [0.0; JOINT_COUNT];

    // Compound-pendulum constants from first principles.
    let r = model.leg_radius;
    let i_thigh = model.thigh_mass * (model.thigh_length.powi(2) / 12.0 + r * r / 4.0)
        + model.thigh_mass * (0.5 * model.thigh_length).powi(2);
    let d_shank = model.thigh_length + 0.5 * model.shank_length;
    let i_shank = model.shank_mass * (model.shank_length.powi(2) / 12.0 + r * r / 4.0)
        + model.shank_mass * d_shank * d_shank;
    let d_foot = model.leg_length() + 0.5 * model.sole_offset;
    let i_foot = model.foot_mass * (model.foot_length.powi(2) + model.sole_offset.powi(2)) / 12.0
        + model.foot_mass * d_foot * d_foot;
    let inertia = i_thigh + i_shank + i_foot;
    let m_g_d = 9.81
        * (model.thigh_mass * 0.5 * model.thigh_length
            + model.shank_mass * d_shank
            + model.foot_mass * d_foot);

    // RK4 reference at 10 us steps.
    let mut theta = theta0;
    let mut omega = 0.0;
    let h = 1e-5;
    let f = |th: f64, om: f64| (om, -(m_g_d / inertia) * th.sin());
    let total = 0.1;
    let mut t = 0.0;
    while t < total - 0.5 * h {
        let (k1t, k1o) = f(theta, omega);
        let (k2t, k2o) = f(theta + 0.5 * h * k1t, omega + 0.5 * h * k1o);
        let (k3t, k3o) = f(theta + 0.5 * h * k2t, omega + 0.5 * h * k2o);
        let (k4t, k4o) = f(theta + h * k3t, omega + h * k3o);
        theta += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        omega += h / 6.0 * (k1o + 2.0 * k2o + 2.0 * k3o + k4o);
        t += h;
    }

    let control_steps = (total / world.cfg.control_dt()).round() as usize;
    for _ in 0..control_steps {
        state = world.step(&state, &[0.0; JOINT_COUNT]).unwrap();
    }
    let simulated = state.q.get(Side::Left, JointKind::HipPitch);
    assert!(
        (simulated - theta).abs() < 1e-3,
        "pendulum mismatch: sim {simulated:.6} vs oracle {theta:.6}"
    );
    // The locked joints must not have moved.
    for j in 0..JOINT_COUNT {
        if world.cfg.locked_joints[j] {
            assert_eq!(state.q.0[j], 0.0);
        }
    }
}

#[test]
fn stance_is_quasi_static_under_pd() {
    // After the PD sag transient dies out the stance is stationary: the
    // trunk height moves less than a centimeter over a full second.
    let world = world(SimConfig::default());
    let mut state = hold_nominal(&world, 4.0);
    let control = ControlConfig::default();
    let gains = control.joint_gains();
    let target = nominal_state(&world).q;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..200 {
        let tau = pd_torques(&target, &state.q, &state.q_dot, &gains);
        state = world.step(&state, &tau).unwrap();
        lo = lo.min(state.base_position.z);
        hi = hi.max(state.base_position.z);
    }
    assert!(hi - lo < 0.01, "trunk height moved {:.4} m over 1 s", hi - lo);
    let up = state.base_orientation * Vector3::z();
    assert!(up.z > 0.99, "trunk tilted during quiet stance");
}

#[test]
fn resting_normal_force_matches_total_weight() {
    let world = world(SimConfig::default());
    let mut state = hold_nominal(&world, 2.0);
    // Average over two seconds to cancel the residual slow sway.
    let control = ControlConfig::default();
    let gains = control.joint_gains();
    let target = nominal_state(&world).q;
    let mut sum = 0.0;
    let mut count = 0;
    for _ in 0..400 {
        let tau = pd_torques(&target, &state.q, &state.q_dot, &gains);
        state = world.step(&state, &tau).unwrap();
        sum += state.contacts.total_normal_force();
        count += 1;
    }
    let mean = sum / count as f64;
    let weight = world.model.total_mass() * world.cfg.gravity;
    assert_relative_eq!(weight, 38.8 * 9.81, epsilon = 1e-9);
    assert!(
        (mean - weight).abs() <= 0.02 * weight,
        "normal force {mean:.1} N vs weight {weight:.1} N"
    );
}

#[test]
fn contact_penetration_stays_small() {
    let world = world(SimConfig::default());
    let state = hold_nominal(&world, 1.5);
    let corners = world.sole_corners_world(&state);
    for foot in corners {
        for p in foot {
            let depth = -p.z;
            assert!(depth < 0.005, "corner penetrated {depth:.4} m");
        }
    }
}

#[test]
fn deterministic_given_seed_and_torques() {
    let run = || {
        let world = world(SimConfig::default());
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let mut state = spawn_on_terrain(&world.model, &world.terrain, 0.02, &mut rng);
        let mut trace = Vec::new();
        let control = ControlConfig::default();
        let gains = control.joint_gains();
        let target = state.q;
        for _ in 0..200 {
            let tau = pd_torques(&target, &state.q, &state.q_dot, &gains);
            state = world.step(&state, &tau).unwrap();
            trace.push(state);
        }
        trace
    };
    let a = run();
    let b = run();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.base_position, y.base_position);
        assert_eq!(x.q, y.q);
        assert_eq!(x.q_dot, y.q_dot);
    }
}

#[test]
fn passive_chain_energy_drift_bounded() {
    // Fixed base in the air, no contact, no armature, zero torques: the
    // legs swing passively and mechanical energy must drift less than 1%
    // of the energy actually exchanged over one second.
    let cfg = SimConfig { fixed_base: true, joint_armature: 0.0, ..Default::default() };
    let world = world(cfg);
    let mut state = nominal_state(&world);
    state.base_position.z = 5.0;
    state.q = JointVector::zeros();
    state.q.set(Side::Left, JointKind::HipPitch, 0.5);
    state.q.set(Side::Left, JointKind::KneePitch, 0.4);
    state.q.set(Side::Right, JointKind::HipRoll, 0.3);
    state.q.set(Side::Right, JointKind::KneePitch, 0.2);

    let e0 = world.mechanical_energy(&state);
    let mut max_drift: f64 = 0.0;
    let mut max_ke: f64 = 0.0;
    for _ in 0..200 {
        state = world.step(&state, &[0.0; JOINT_COUNT]).unwrap();
        let (ke, pe) = world.energies(&state);
        max_drift = max_drift.max((ke + pe - e0).abs());
        max_ke = max_ke.max(ke);
    }
    assert!(max_ke > 0.5, "the chain should actually swing");
    assert!(
        max_drift <= 0.01 * max_ke,
        "energy drift {max_drift:.4} J exceeds 1% of exchanged {max_ke:.2} J"
    );
}

#[test]
fn termination_rules_and_precedence() {
    let world = world(SimConfig::default());
    let mut state = nominal_state(&world);

    assert_eq!(world.check_termination(&state, 1.0, 10.0), Termination::Continue);

    state.base_orientation = UnitQuaternion::from_euler_angles(0.0, 61f64.to_radians(), 0.0);
    assert!(matches!(world.check_termination(&state, 1.0, 10.0), Termination::Tilt { .. }));

    // Tilt takes precedence when both fire in the same step.
    assert!(matches!(world.check_termination(&state, 10.0, 10.0), Termination::Tilt { .. }));

    state.base_orientation = UnitQuaternion::from_euler_angles(0.0, 59.9f64.to_radians(), 0.0);
    assert_eq!(world.check_termination(&state, 10.0, 10.0), Termination::Timeout);
}

#[test]
fn nominal_measures_match_fk() {
    let world = world(SimConfig::default());
    // Zero configuration: ankles straight below the hips at full length.
    let mut state = nominal_state(&world);
    state.q = JointVector::zeros();
    let nodes = measure_nodes(&world.model, &state);
    let hip_y = world.model.hip_offset(Side::Left).y;
    let hip_z = world.model.hip_offset(Side::Left).z;
    assert_relative_eq!(
        nodes.left_body.position,
        Vector3::new(0.0, hip_y, hip_z - 0.75),
        epsilon = 1e-12
    );
    assert_relative_eq!(
        nodes.right_body.position,
        Vector3::new(0.0, -hip_y, hip_z - 0.75),
        epsilon = 1e-12
    );
}

#[test]
fn body_frame_measures_invariant_under_base_yaw() {
    let world = world(SimConfig::default());
    let mut state = nominal_state(&world);
    let before = measure_nodes(&world.model, &state);
    state.base_orientation = UnitQuaternion::from_euler_angles(0.0, 0.0, 1.1);
    state.base_position = Vector3::new(2.0, -1.0, state.base_position.z);
    let after = measure_nodes(&world.model, &state);
    assert_eq!(before.left_body, after.left_body);
    assert_eq!(before.right_body, after.right_body);
    // World measures follow the base.
    assert_relative_eq!(after.left_world.yaw, 1.1, epsilon = 1e-12);
}

#[test]
fn world_ankle_height_settles_to_sole_offset() {
    let world = world(SimConfig::default());
    let state = hold_nominal(&world, 1.5);
    let nodes = measure_nodes(&world.model, &state);
    // At rest on flat ground the ankle node sits one sole offset above
    // the ground, minus the contact penetration.
    for ankle in [nodes.left_world, nodes.right_world] {
        assert!(
            (ankle.position.z - world.model.sole_offset).abs() < 0.005,
            "ankle height {}",
            ankle.position.z
        );
    }
}

#[test]
fn spawn_scenarios() {
    let model = RobotModel::default();
    let lesson = LessonParams::default();

    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let (state, terrain) = spawn_scenario(&model, StepClass::Walk, &lesson, &mut rng);
    assert_eq!(terrain, TerrainModel::Flat);
    // Nominal stance joints reproduce the IK of the nominal targets.
    let (l, r) = model.nominal_ankle_targets(NOMINAL_TRUNK_HEIGHT);
    let expected = ik_solve(&model, &l, &r).unwrap().joints;
    for j in 0..JOINT_COUNT {
        assert_relative_eq!(state.q.0[j], expected.0[j], epsilon = 1e-12);
    }

    let (_, stairs) = spawn_scenario(&model, StepClass::Stairs, &lesson, &mut rng);
    match stairs {
        TerrainModel::Staircase { rise, run, .. } => {
            assert!(rise.abs() >= 0.05 && rise.abs() <= 0.17);
            assert!((0.25..=0.40).contains(&run));
        }
        _ => panic!("stairs scenario must build a staircase"),
    }

    // Standing still randomizes the posture; equal seeds reproduce it.
    let mut r1 = ChaCha12Rng::seed_from_u64(9);
    let mut r2 = ChaCha12Rng::seed_from_u64(9);
    let (a, _) = spawn_scenario(&model, StepClass::StandStill, &lesson, &mut r1);
    let (b, _) = spawn_scenario(&model, StepClass::StandStill, &lesson, &mut r2);
    assert_eq!(a, b);
    assert_ne!(a.q, expected, "standing spawn should perturb the posture");
}

#[test]
fn non_finite_torques_fault() {
    let world = world(SimConfig::default());
    let state = nominal_state(&world);
    let mut tau = [0.0; JOINT_COUNT];
    tau[3] = f64::NAN;
    assert!(world.step(&state, &tau).is_err());
}

#[test]
fn runaway_state_faults_before_exceeding_limit() {
    let cfg = SimConfig { fault_limit: 1e3, ..Default::default() };
    let world = world(cfg);
    let mut state = nominal_state(&world);
    state.base_linear_velocity = Vector3::new(999.0, 0.0, 900.0);
    let mut faulted = false;
    for _ in 0..2000 {
        match world.step(&state, &[0.0; JOINT_COUNT]) {
            Ok(next) => {
                assert!(next.max_magnitude() <= 1e3);
                state = next;
            }
            Err(_) => {
                faulted = true;
                break;
            }
        }
    }
    assert!(faulted, "runaway state should raise a numerical fault");
}
