//! One self-contained training/evaluation environment: a sampled task
//! program played through the IK feedforward + feedback pipeline on the
//! simulated robot.

use crate::obs::{build_observation, Observation};
use crate::reward::{reward_total, tracking_errors, RewardBreakdown, RewardWeights, TrackingErrors};
use biped_control::{
    combine, feedforward, filter_and_clamp, map_to_joint_targets, pd_torques, ControlConfig,
    FilterState, PdGains,
};
use biped_kinematics::{ActionVector, RobotModel, JOINT_COUNT};
use biped_planner::{
    sample_program, ComposeOptions, ControlInput, LessonParams, StepClass, TaskProgram,
};
use biped_sim::{
    measure_nodes, world::spawn_on_terrain, SimConfig, SimState, SimWorld, Termination,
    TerrainModel,
};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Episode-level configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeConfig {
    /// Maximum episode length, seconds (training default).
    pub max_episode: f64,
    /// Steps per sampled locomotion program, [min, max].
    pub steps_per_program: [usize; 2],
    /// Dwell for period-0 posture steps.
    pub posture_dwell: f64,
    /// Terminal hold appended to every program (stage-3 rule), seconds.
    pub terminal_hold: f64,
    /// Uniform joint noise at spawn for standing-still episodes, rad.
    pub spawn_posture_noise: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            max_episode: 10.0,
            steps_per_program: [3, 6],
            posture_dwell: 2.0,
            terminal_hold: 0.0,
            spawn_posture_noise: 0.03,
        }
    }
}

/// What happened during one environment step.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: RewardBreakdown,
    pub errors: TrackingErrors,
    pub done: bool,
    pub termination: Termination,
    /// The sim raised a numerical fault; the transition is truncated.
    pub faulted: bool,
}

/// A single rollout environment. Owns its RNG stream so parallel
/// environments stay independent and reproducible.
pub struct BipedEnv {
    pub model: RobotModel,
    pub control: ControlConfig,
    pub sim_cfg: SimConfig,
    pub weights: RewardWeights,
    pub episode: EpisodeConfig,
    gains: [PdGains; JOINT_COUNT],
    rng: ChaCha12Rng,

    world: SimWorld,
    program: TaskProgram,
    pub class: StepClass,
    state: SimState,
    filter: FilterState,
    prev_feedback: ActionVector,
    prev_rt_encoding: Option<[f64; 14]>,
    pending: Option<(Observation, ActionVector, ControlInput)>,
    elapsed: f64,
}

impl BipedEnv {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        model: RobotModel,
        control: ControlConfig,
        sim_cfg: SimConfig,
        weights: RewardWeights,
        episode: EpisodeConfig,
        seed: u64,
    ) -> Self {
        let gains = control.joint_gains();
        let world = SimWorld::new(model.clone(), TerrainModel::Flat, sim_cfg);
        let mut env = BipedEnv {
            model,
            control,
            sim_cfg,
            weights,
            episode,
            gains,
            rng: ChaCha12Rng::seed_from_u64(seed),
            world,
            program: empty_hold_program(),
            class: StepClass::StandStill,
            state: default_state(),
            filter: FilterState::new(ActionVector::zeros()),
            prev_feedback: ActionVector::zeros(),
            prev_rt_encoding: None,
            pending: None,
            elapsed: 0.0,
        };
        env.filter = FilterState::from_nominal_stance(&env.model);
        env
    }

    /// Starts a fresh episode: samples a program of `class` from the
    /// lesson, builds matching terrain and spawns the robot.
    pub fn reset_with(&mut self, class: StepClass, lesson: &LessonParams) -> Observation {
        let steps = self
            .rng
            .random_range(self.episode.steps_per_program[0]..=self.episode.steps_per_program[1]);
        let sampled = sample_program(&self.model, class, lesson, &mut self.rng, steps)
            .expect("lesson validated upstream");
        let terrain = match sampled.stairs {
            Some(s) => TerrainModel::Staircase {
                origin_x: s.origin_x,
                rise: s.rise,
                run: s.run,
                count: s.count,
            },
            None => TerrainModel::Flat,
        };
        let opts = ComposeOptions {
            posture_dwell: self.episode.posture_dwell,
            terminal_hold: self.episode.terminal_hold,
            ..Default::default()
        };
        let program = TaskProgram::compose(sampled.steps, opts).expect("sampler chains steps");
        let noise = if matches!(class, StepClass::StandStill) {
            self.episode.spawn_posture_noise
        } else {
            0.0
        };
        self.world = SimWorld::new(self.model.clone(), terrain, self.sim_cfg);
        self.state = spawn_on_terrain(&self.model, &self.world.terrain, noise, &mut self.rng);
        self.program = program;
        self.class = class;
        self.filter = FilterState::from_nominal_stance(&self.model);
        self.prev_feedback = ActionVector::zeros();
        self.prev_rt_encoding = None;
        self.pending = None;
        self.elapsed = 0.0;
        self.observe().0
    }

    /// Samples a class uniformly from `pool` and resets.
    pub fn reset_from_pool(&mut self, pool: &[StepClass], lesson: &LessonParams) -> Observation {
        let class = *pool.choose(&mut self.rng).expect("non-empty class pool");
        self.reset_with(class, lesson)
    }

    fn observe(&mut self) -> (Observation, ActionVector, ControlInput) {
        if let Some(p) = self.pending {
            return p;
        }
        let base = measure_nodes(&self.model, &self.state).trunk_world;
        let input = self
            .program
            .control_input_at(self.elapsed, &base)
            .expect("elapsed time is nonnegative");
        let nodes = measure_nodes(&self.model, &self.state);
        let (a_ff, _clamps) = feedforward(&self.model, &input).expect("targets clamped");
        let (obs, encoding) = build_observation(
            &input,
            &nodes,
            &self.state,
            &a_ff,
            &self.prev_feedback,
            self.prev_rt_encoding.as_ref(),
            self.control.control_dt,
        );
        self.prev_rt_encoding = Some(encoding);
        let bundle = (obs, a_ff, input);
        self.pending = Some(bundle);
        bundle
    }

    /// Current observation without advancing time.
    pub fn observation(&mut self) -> Observation {
        self.observe().0
    }

    /// Applies one feedback action and advances one control period.
    pub fn step(&mut self, a_fb: &ActionVector) -> StepOutcome {
        let (_, a_ff, _input) = self.observe();
        let blended = combine(&a_ff, a_fb, self.control.feedback_ratio);
        let (command, next_filter) =
            filter_and_clamp(&blended, &self.filter, self.control.filter_alpha);
        self.filter = next_filter;
        let targets = map_to_joint_targets(&self.model, &command);
        let torques = pd_torques(&targets, &self.state.q, &self.state.q_dot, &self.gains);

        let stepped = self.world.step(&self.state, &torques);
        self.pending = None;
        self.prev_feedback = *a_fb;
        self.elapsed += self.control.control_dt;

        let faulted = stepped.is_err();
        if let Ok(next) = stepped {
            self.state = next;
        }

        let termination = if faulted {
            Termination::Timeout
        } else {
            self.world.check_termination(&self.state, self.elapsed, self.episode.max_episode)
        };
        let done = faulted || !matches!(termination, Termination::Continue);

        // Reward against the post-step real-time target.
        let base = measure_nodes(&self.model, &self.state).trunk_world;
        let plan = self.program.targets_at(self.elapsed).expect("time advances forward");
        let input = self.program.control_input_at(self.elapsed, &base).expect("time is valid");
        let nodes = measure_nodes(&self.model, &self.state);
        let errors = tracking_errors(&input, &nodes);
        let reward = if faulted {
            RewardBreakdown::default()
        } else {
            reward_total(
                &self.weights,
                &errors,
                a_fb,
                plan.stationary,
                &self.state.q_dot,
                &self.state.q_ddot_last,
            )
        };

        let (obs, _, _) = self.observe();
        StepOutcome { observation: obs, reward, errors, done, termination, faulted }
    }

    pub fn sim_state(&self) -> &SimState {
        &self.state
    }

    pub fn program(&self) -> &TaskProgram {
        &self.program
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    /// Feedforward action for the current tick (diagnostics/pure playback).
    pub fn feedforward_action(&mut self) -> ActionVector {
        self.observe().1
    }

    /// Control input for the current tick (diagnostics/tracing).
    pub fn control_input(&mut self) -> ControlInput {
        self.observe().2
    }
}

use rand::SeedableRng;

fn default_state() -> SimState {
    SimState {
        base_position: nalgebra::Vector3::new(0.0, 0.0, biped_planner::NOMINAL_TRUNK_HEIGHT),
        base_orientation: nalgebra::UnitQuaternion::identity(),
        base_angular_velocity: nalgebra::Vector3::zeros(),
        base_linear_velocity: nalgebra::Vector3::zeros(),
        q: biped_kinematics::JointVector::zeros(),
        q_dot: [0.0; JOINT_COUNT],
        q_ddot_last: [0.0; JOINT_COUNT],
        time: 0.0,
        contacts: Default::default(),
    }
}

/// Placeholder program before the first reset: hold the nominal stance.
fn empty_hold_program() -> TaskProgram {
    let model = RobotModel::default();
    let start = biped_planner::NodeState::nominal(&model, biped_planner::NOMINAL_TRUNK_HEIGHT);
    let step = biped_planner::TaskStep::new(
        &model,
        StepClass::StandStill,
        0.0,
        start,
        start,
        biped_planner::SwingLeg::BothGrounded,
        None,
    )
    .expect("nominal hold is valid");
    TaskProgram::compose(vec![step], ComposeOptions::default()).expect("single step")
}
