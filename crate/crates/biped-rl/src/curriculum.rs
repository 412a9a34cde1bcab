//! The three-stage training curriculum: level-ground motions first,
//! stairs second, then static-balance holds after every program, with
//! per-stage hyperparameters and a linear learning-rate schedule.

use crate::env::{BipedEnv, EpisodeConfig};
use crate::gae::normalize;
use crate::policy::{PolicyNetwork, PolicyOptimizer};
use crate::ppo::{ppo_update, PpoConfig, UpdateMetrics};
use crate::reward::RewardWeights;
use crate::rollout::{collect_rollouts, derive_seed, EnvWorker, RolloutStats};
use biped_control::ControlConfig;
use biped_kinematics::RobotModel;
use biped_planner::{LessonParams, StepClass};
use biped_sim::SimConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// One curriculum stage: movement pool, lesson ladder and the stage's
/// PPO hyperparameter triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    pub index: usize,
    pub pool: Vec<StepClass>,
    /// Number of lesson rungs the difficulty ladder climbs in this stage.
    pub lesson_rungs: usize,
    /// Environment steps to spend in this stage.
    pub budget: u64,
    pub learning_rate: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// Terminal hold appended to each program, seconds (stage 3).
    pub terminal_hold: f64,
}

/// The stage pools and hyperparameter triples of the training table.
pub fn default_stages(budgets: [u64; 3]) -> Vec<StageConfig> {
    let level_ground = vec![
        StepClass::StandStill,
        StepClass::Squat,
        StepClass::Walk,
        StepClass::Sidle,
        StepClass::Turn,
    ];
    let mut with_stairs = level_ground.clone();
    with_stairs.push(StepClass::Stairs);
    vec![
        StageConfig {
            index: 1,
            pool: level_ground,
            lesson_rungs: 3,
            budget: budgets[0],
            learning_rate: 3e-4,
            beta: 0.02,
            epsilon: 0.02,
            terminal_hold: 0.0,
        },
        StageConfig {
            index: 2,
            pool: with_stairs.clone(),
            lesson_rungs: 3,
            budget: budgets[1],
            learning_rate: 2e-4,
            beta: 0.015,
            epsilon: 0.015,
            terminal_hold: 0.0,
        },
        StageConfig {
            index: 3,
            pool: with_stairs,
            lesson_rungs: 1,
            budget: budgets[2],
            learning_rate: 1e-4,
            beta: 0.07,
            epsilon: 0.07,
            terminal_hold: 3.0,
        },
    ]
}

/// Lesson difficulty for an update at `progress` in [0, 1] through a
/// stage with `rungs` ladder steps.
pub fn lesson_difficulty(progress: f64, rungs: usize) -> f64 {
    if rungs <= 1 {
        return 1.0;
    }
    let rung = ((progress * rungs as f64).floor() as usize).min(rungs - 1);
    rung as f64 / (rungs - 1) as f64
}

/// One line of the training log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainRecord {
    pub env_steps: u64,
    pub stage: usize,
    pub lesson: f64,
    pub learning_rate: f64,
    pub mean_return: f64,
    pub mean_episode_steps: f64,
    pub mean_error_return: f64,
    pub mean_trunk_error: f64,
    pub mean_tick_reward: f64,
    pub episodes: u64,
    pub faults: u64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub mean_kl: f64,
    pub kl_stopped: bool,
}

/// Everything needed to train: policy, optimizer, parallel environments
/// and the base configuration the stages specialize.
pub struct Trainer {
    pub policy: PolicyNetwork,
    pub optimizer: PolicyOptimizer,
    pub workers: Vec<EnvWorker>,
    pub ppo: PpoConfig,
    pub lesson: LessonParams,
    pub records: Vec<TrainRecord>,
    shuffle_rng: ChaCha12Rng,
    env_steps: u64,
}

/// Construction parameters for [`Trainer::new`].
pub struct TrainerSetup {
    pub model: RobotModel,
    pub control: ControlConfig,
    pub sim: SimConfig,
    pub weights: RewardWeights,
    pub episode: EpisodeConfig,
    pub ppo: PpoConfig,
    pub lesson: LessonParams,
    pub num_envs: usize,
    pub seed: u64,
    pub log_std_init: f64,
}

impl Trainer {
    pub fn new(setup: TrainerSetup, policy: PolicyNetwork) -> Self {
        let workers = (0..setup.num_envs)
            .map(|i| {
                let env = BipedEnv::new(
                    setup.model.clone(),
                    setup.control,
                    setup.sim,
                    setup.weights,
                    setup.episode,
                    derive_seed(setup.seed, 2 * i as u64),
                );
                EnvWorker::new(env, derive_seed(setup.seed, 2 * i as u64 + 1))
            })
            .collect();
        let optimizer = PolicyOptimizer::new(&policy);
        Trainer {
            policy,
            optimizer,
            workers,
            ppo: setup.ppo,
            lesson: setup.lesson,
            records: Vec::new(),
            shuffle_rng: ChaCha12Rng::seed_from_u64(derive_seed(setup.seed, u64::MAX)),
            env_steps: 0,
        }
    }

    pub fn fresh_policy(setup: &TrainerSetup) -> PolicyNetwork {
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(setup.seed, 0x5EED));
        PolicyNetwork::new(Default::default(), setup.log_std_init, &mut rng)
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    /// Transitions each worker contributes per update.
    pub fn horizon(&self) -> usize {
        self.ppo.buffer_size.div_ceil(self.workers.len())
    }

    /// One collect + update cycle; returns the rollout stats and update
    /// metrics for logging.
    pub fn train_step(
        &mut self,
        pool: &[StepClass],
        lesson: &LessonParams,
        ppo: &PpoConfig,
        learning_rate: f64,
    ) -> (RolloutStats, UpdateMetrics) {
        let horizon = self.horizon();
        let (mut buffer, stats) =
            collect_rollouts(&self.policy, &mut self.workers, horizon, ppo, pool, lesson);
        self.env_steps += buffer.len() as u64;
        normalize(&mut buffer.advantages);
        let metrics = ppo_update(
            &mut self.policy,
            &mut self.optimizer,
            &buffer,
            ppo,
            learning_rate,
            &mut self.shuffle_rng,
        );
        (stats, metrics)
    }

    /// Runs the full stage sequence. `on_stage_end` fires after each
    /// stage with the stage index and the current policy (checkpointing).
    pub fn run_curriculum(
        &mut self,
        stages: &[StageConfig],
        mut on_stage_end: impl FnMut(&StageConfig, &PolicyNetwork),
    ) {
        for stage in stages {
            self.run_stage(stage);
            on_stage_end(stage, &self.policy);
        }
    }

    /// Runs one stage: ascending lessons, stage hyperparameters, linear
    /// learning-rate decay over the stage budget.
    pub fn run_stage(&mut self, stage: &StageConfig) {
        let stage_start = self.env_steps;
        if stage.budget == 0 {
            return;
        }
        // Propagate the stage's hold rule to every environment.
        for w in self.workers.iter_mut() {
            w.env.episode.terminal_hold = stage.terminal_hold;
        }
        let ppo = PpoConfig {
            beta: stage.beta,
            epsilon: stage.epsilon,
            learning_rate: stage.learning_rate,
            ..self.ppo
        };
        while self.env_steps - stage_start < stage.budget {
            let progress = (self.env_steps - stage_start) as f64 / stage.budget as f64;
            let difficulty = lesson_difficulty(progress, stage.lesson_rungs);
            let lesson = self.lesson.at_difficulty(difficulty);
            let lr = stage.learning_rate * (1.0 - progress);
            let (stats, metrics) = self.train_step(&stage.pool, &lesson, &ppo, lr);
            self.records.push(TrainRecord {
                env_steps: self.env_steps,
                stage: stage.index,
                lesson: difficulty,
                learning_rate: lr,
                mean_return: stats.mean_return(),
                mean_episode_steps: stats.mean_episode_steps(),
                mean_error_return: stats.mean_error_return(),
                mean_trunk_error: stats.mean_trunk_error(),
                mean_tick_reward: stats.mean_tick_reward(),
                episodes: stats.episodes,
                faults: stats.faults,
                policy_loss: metrics.policy_loss,
                value_loss: metrics.value_loss,
                entropy: metrics.entropy,
                clip_fraction: metrics.clip_fraction,
                mean_kl: metrics.mean_kl,
                kl_stopped: metrics.kl_stopped,
            });
        }
    }
}
