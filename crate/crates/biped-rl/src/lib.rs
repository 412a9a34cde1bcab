//! Reinforcement-learning engine for the feedback policy: observation
//! and reward construction, a PPO trainer over parallel simulation
//! environments, and the three-stage curriculum.

pub mod checkpoint;
pub mod curriculum;
pub mod env;
pub mod gae;
pub mod nn;
pub mod obs;
pub mod policy;
pub mod ppo;
pub mod reward;
pub mod rollout;
pub mod toy;

pub use checkpoint::{config_hash, load_policy, save_policy, CheckpointError};
pub use curriculum::{
    default_stages, lesson_difficulty, StageConfig, TrainRecord, Trainer, TrainerSetup,
};
pub use env::{BipedEnv, EpisodeConfig, StepOutcome};
pub use gae::{gae_advantages, normalize};
pub use obs::{build_observation, Observation, OBS_DIM};
pub use policy::{NetworkShape, PolicyNetwork, PolicyOptimizer, SampledAction, ACTION_DIM};
pub use ppo::{loss_and_grads, ppo_update, PpoConfig, RolloutBuffer, UpdateMetrics};
pub use reward::{
    reward_error, reward_fb, reward_static, reward_total, tracking_errors, RewardBreakdown,
    RewardWeights, TrackingErrors,
};
pub use rollout::{collect_rollouts, derive_seed, EnvWorker, RolloutStats};
