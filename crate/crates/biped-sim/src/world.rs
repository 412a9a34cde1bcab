use crate::contact::{contact_forces, ContactSnapshot};
use crate::dynamics::{
    bias_forces, kinetic_energy, link_kinematics, mass_matrix, potential_energy, BipedTree,
    GenVector, TreeKinematics, TreeState, DOF,
};
use crate::terrain::TerrainModel;
use biped_kinematics::{
    forward_kinematics, ik_solve, AnklePose, Frame, JointVector, RobotModel, TrunkPose,
    JOINT_COUNT, NOMINAL_TRUNK_HEIGHT,
};
use biped_planner::{LessonParams, StepClass};
use nalgebra::{UnitQuaternion, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Simulation parameters. Five 1 ms substeps make one 5 ms control step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub physics_dt: f64,
    pub substeps: usize,
    /// Normal penalty spring stiffness, N/m.
    pub contact_stiffness: f64,
    /// Normal damping, N·s/m.
    pub contact_damping: f64,
    /// Coulomb friction coefficient.
    pub friction: f64,
    /// Tangential viscous coefficient capping the friction cone, N·s/m.
    pub friction_damping: f64,
    pub gravity: f64,
    /// Reflected rotor inertia added to each joint, kg·m².
    pub joint_armature: f64,
    /// Trunk tilt that terminates an episode, degrees.
    pub max_tilt_deg: f64,
    /// Any state magnitude beyond this raises a numerical fault.
    pub fault_limit: f64,
    /// Test hook: pin the floating base in place.
    pub fixed_base: bool,
    /// Test hook: freeze individual joints.
    pub locked_joints: [bool; JOINT_COUNT],
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            physics_dt: 0.001,
            substeps: 5,
            contact_stiffness: 5e4,
            contact_damping: 500.0,
            friction: 0.8,
            friction_damping: 800.0,
            gravity: 9.81,
            joint_armature: 0.05,
            max_tilt_deg: 60.0,
            fault_limit: 1e6,
            fixed_base: false,
            locked_joints: [false; JOINT_COUNT],
        }
    }
}

impl SimConfig {
    pub fn control_dt(&self) -> f64 {
        self.physics_dt * self.substeps as f64
    }
}

/// Full dynamic state of the robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub base_position: Vector3<f64>,
    pub base_orientation: UnitQuaternion<f64>,
    /// Body-frame angular velocity of the trunk.
    pub base_angular_velocity: Vector3<f64>,
    /// Body-frame linear velocity of the trunk.
    pub base_linear_velocity: Vector3<f64>,
    pub q: JointVector,
    pub q_dot: [f64; JOINT_COUNT],
    /// Joint accelerations from the last control step (backward
    /// difference of `q_dot` over the control period).
    pub q_ddot_last: [f64; JOINT_COUNT],
    pub time: f64,
    pub contacts: ContactSnapshot,
}

impl SimState {
    fn gen_velocity(&self) -> GenVector {
        let mut u = GenVector::zeros();
        for k in 0..3 {
            u[k] = self.base_angular_velocity[k];
            u[3 + k] = self.base_linear_velocity[k];
        }
        for j in 0..JOINT_COUNT {
            u[6 + j] = self.q_dot[j];
        }
        u
    }

    fn is_finite(&self) -> bool {
        self.base_position.iter().all(|v| v.is_finite())
            && self.base_orientation.coords.iter().all(|v| v.is_finite())
            && self.base_angular_velocity.iter().all(|v| v.is_finite())
            && self.base_linear_velocity.iter().all(|v| v.is_finite())
            && self.q.0.iter().all(|v| v.is_finite())
            && self.q_dot.iter().all(|v| v.is_finite())
    }

    /// Largest absolute state component; used by the fault guard.
    pub fn max_magnitude(&self) -> f64 {
        let mut m: f64 = 0.0;
        for v in self.base_position.iter() {
            m = m.max(v.abs());
        }
        for v in self.base_angular_velocity.iter().chain(self.base_linear_velocity.iter()) {
            m = m.max(v.abs());
        }
        for v in self.q.0.iter().chain(self.q_dot.iter()) {
            m = m.max(v.abs());
        }
        m
    }
}

#[derive(Debug, Error)]
pub enum NumericalFault {
    #[error("non-finite state at t = {time:.4} s")]
    NonFinite { time: f64 },
    #[error("state magnitude {magnitude:.3e} exceeded the fault limit at t = {time:.4} s")]
    Exploded { time: f64, magnitude: f64 },
    #[error("mass matrix factorization failed at t = {time:.4} s")]
    SingularMass { time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Continue,
    /// Trunk tilted past the limit (radians reported).
    Tilt { angle: f64 },
    Timeout,
}

/// One self-contained simulation instance: model, assembled tree, terrain
/// and parameters. States are passed explicitly, so an instance is
/// immutable and shareable.
#[derive(Debug, Clone)]
pub struct SimWorld {
    pub model: RobotModel,
    pub tree: BipedTree,
    pub terrain: TerrainModel,
    pub cfg: SimConfig,
}

impl SimWorld {
    pub fn new(model: RobotModel, terrain: TerrainModel, cfg: SimConfig) -> Self {
        let tree = BipedTree::new(&model);
        Self { model, tree, terrain, cfg }
    }

    /// Advances one control period (`substeps` semi-implicit Euler steps)
    /// under constant joint torques.
    pub fn step(
        &self,
        state: &SimState,
        torques: &[f64; JOINT_COUNT],
    ) -> Result<SimState, NumericalFault> {
        if !torques.iter().all(|t| t.is_finite()) {
            return Err(NumericalFault::NonFinite { time: state.time });
        }
        let mut next = *state;
        let q_dot_before = state.q_dot;
        let mut u = state.gen_velocity();
        let dt = self.cfg.physics_dt;
        let mut last_contacts = state.contacts;

        for _ in 0..self.cfg.substeps {
            let tree_state = TreeState {
                base_rotation: next.base_orientation,
                base_position: next.base_position,
                q: next.q,
            };
            let kin = link_kinematics(&self.tree, &tree_state, &u);
            let (f_ext, contacts) = contact_forces(&self.model, &self.tree, &kin, &self.terrain, &self.cfg);
            last_contacts = contacts;
            let bias = bias_forces(&self.tree, &kin, &u, self.cfg.gravity, &f_ext);
            let mut m = mass_matrix(&self.tree, &kin, self.cfg.joint_armature);

            let mut rhs = -bias;
            for j in 0..JOINT_COUNT {
                rhs[6 + j] += torques[j];
            }
            // Locked DOFs: identity row/column, zero acceleration.
            let mut locked = [false; DOF];
            if self.cfg.fixed_base {
                locked[..6].fill(true);
            }
            for j in 0..JOINT_COUNT {
                locked[6 + j] = self.cfg.locked_joints[j];
            }
            for (d, is_locked) in locked.iter().enumerate() {
                if *is_locked {
                    for k in 0..DOF {
                        m[(d, k)] = 0.0;
                        m[(k, d)] = 0.0;
                    }
                    m[(d, d)] = 1.0;
                    rhs[d] = 0.0;
                }
            }

            let chol = nalgebra::Cholesky::new(m)
                .ok_or(NumericalFault::SingularMass { time: next.time })?;
            let u_dot = chol.solve(&rhs);

            u += dt * u_dot;
            // Semi-implicit: positions advance with the updated velocity.
            let omega = Vector3::new(u[0], u[1], u[2]);
            let v_body = Vector3::new(u[3], u[4], u[5]);
            next.base_orientation = UnitQuaternion::new_normalize(
                (next.base_orientation * UnitQuaternion::from_scaled_axis(omega * dt)).into_inner(),
            );
            next.base_position += next.base_orientation * v_body * dt;
            for j in 0..JOINT_COUNT {
                next.q.0[j] += dt * u[6 + j];
            }
            next.time += dt;
        }

        for k in 0..3 {
            next.base_angular_velocity[k] = u[k];
            next.base_linear_velocity[k] = u[3 + k];
        }
        for j in 0..JOINT_COUNT {
            next.q_dot[j] = u[6 + j];
            next.q_ddot_last[j] = (u[6 + j] - q_dot_before[j]) / self.cfg.control_dt();
        }
        next.contacts = last_contacts;

        if !next.is_finite() {
            return Err(NumericalFault::NonFinite { time: next.time });
        }
        let magnitude = next.max_magnitude();
        if magnitude > self.cfg.fault_limit {
            return Err(NumericalFault::Exploded { time: next.time, magnitude });
        }
        Ok(next)
    }

    /// Episode termination rule; tilt wins when both conditions hold.
    pub fn check_termination(&self, state: &SimState, elapsed: f64, max_episode: f64) -> Termination {
        let up_world = state.base_orientation * Vector3::z();
        let tilt = up_world.z.clamp(-1.0, 1.0).acos();
        if tilt > self.cfg.max_tilt_deg.to_radians() {
            return Termination::Tilt { angle: tilt };
        }
        if elapsed >= max_episode {
            return Termination::Timeout;
        }
        Termination::Continue
    }

    /// Total mechanical energy (kinetic including armature + potential);
    /// diagnostic used by the drift checks.
    pub fn mechanical_energy(&self, state: &SimState) -> f64 {
        let (ke, pe) = self.energies(state);
        ke + pe
    }

    /// (kinetic, potential) energy pair.
    pub fn energies(&self, state: &SimState) -> (f64, f64) {
        let tree_state = TreeState {
            base_rotation: state.base_orientation,
            base_position: state.base_position,
            q: state.q,
        };
        let u = state.gen_velocity();
        let kin = link_kinematics(&self.tree, &tree_state, &u);
        (
            kinetic_energy(&self.tree, &kin, &u, self.cfg.joint_armature),
            potential_energy(&self.tree, &kin, self.cfg.gravity),
        )
    }

    fn kinematics(&self, state: &SimState) -> TreeKinematics {
        let tree_state = TreeState {
            base_rotation: state.base_orientation,
            base_position: state.base_position,
            q: state.q,
        };
        link_kinematics(&self.tree, &tree_state, &state.gen_velocity())
    }

    /// World-frame positions of the foot sole corners; diagnostics.
    pub fn sole_corners_world(&self, state: &SimState) -> [[Vector3<f64>; 4]; 2] {
        let kin = self.kinematics(state);
        let corners = self.model.foot_corners();
        let mut out = [[Vector3::zeros(); 4]; 2];
        for (foot, link) in self.tree.foot_links.iter().enumerate() {
            for (c, corner) in corners.iter().enumerate() {
                out[foot][c] = kin.to_world[*link].point_to_parent(corner);
            }
        }
        out
    }
}

/// Controllable-node poses in both the body frame and the world frame.
#[derive(Debug, Clone, Copy)]
pub struct NodesMeasurement {
    pub trunk_body: TrunkPose,
    pub left_body: AnklePose,
    pub right_body: AnklePose,
    pub trunk_world: TrunkPose,
    pub left_world: AnklePose,
    pub right_world: AnklePose,
}

/// Measures the three controllable nodes: the trunk node sits at the
/// trunk center (identity in `F_B`), ankle nodes come from the leg FK.
pub fn measure_nodes(model: &RobotModel, state: &SimState) -> NodesMeasurement {
    let (left_body, right_body) = forward_kinematics(model, &state.q);
    let trunk_world = TrunkPose::in_world(state.base_position, state.base_orientation);
    let to_world = |p: &AnklePose| {
        let pos = state.base_position + state.base_orientation * p.position;
        let yaw_rot = state.base_orientation
            * UnitQuaternion::from_euler_angles(0.0, 0.0, p.yaw);
        AnklePose::in_world(pos, biped_kinematics::pose::yaw_of(&yaw_rot))
    };
    NodesMeasurement {
        trunk_body: TrunkPose::identity(Frame::Body),
        left_body,
        right_body,
        trunk_world,
        left_world: to_world(&left_body),
        right_world: to_world(&right_body),
    }
}

/// Initial state at the nominal stance on `terrain` (ground level sampled
/// under the trunk origin), with optional uniform joint posture noise.
pub fn spawn_on_terrain(
    model: &RobotModel,
    terrain: &TerrainModel,
    posture_noise: f64,
    rng: &mut impl Rng,
) -> SimState {
    let (left, right) = model.nominal_ankle_targets(NOMINAL_TRUNK_HEIGHT);
    let solution = ik_solve(model, &left, &right).expect("nominal stance is reachable");
    let mut q = solution.joints;
    if posture_noise > 0.0 {
        for j in 0..JOINT_COUNT {
            q.0[j] += rng.random_range(-posture_noise..posture_noise);
        }
        q = q.clamped_to_limits(model);
    }
    let ground = terrain.height_at(0.0, 0.0);
    SimState {
        base_position: Vector3::new(0.0, 0.0, ground + NOMINAL_TRUNK_HEIGHT),
        base_orientation: UnitQuaternion::identity(),
        base_angular_velocity: Vector3::zeros(),
        base_linear_velocity: Vector3::zeros(),
        q,
        q_dot: [0.0; JOINT_COUNT],
        q_ddot_last: [0.0; JOINT_COUNT],
        time: 0.0,
        contacts: ContactSnapshot::default(),
    }
}

/// Scenario for a task-step class: matching terrain (stairs sized from
/// the lesson) plus the spawn state (randomized posture when standing).
pub fn spawn_scenario(
    model: &RobotModel,
    class: StepClass,
    lesson: &LessonParams,
    rng: &mut impl Rng,
) -> (SimState, TerrainModel) {
    let terrain = match class {
        StepClass::Stairs => {
            let rise = lesson.stair_rise.sample(rng)
                * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let run = lesson.stair_run.sample(rng);
            TerrainModel::Staircase { origin_x: 0.5 * run, rise, run, count: 6 }
        }
        _ => TerrainModel::Flat,
    };
    let noise = if matches!(class, StepClass::StandStill) { 0.03 } else { 0.0 };
    let state = spawn_on_terrain(model, &terrain, noise, rng);
    (state, terrain)
}
