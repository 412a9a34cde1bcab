//! Parallel on-policy collection: N independent environment workers step
//! the shared read-only policy and their segments merge in worker-index
//! order, so N-way collection reproduces the sequential result exactly.

use crate::env::{BipedEnv, StepOutcome};
use crate::gae::gae_advantages;
use crate::obs::Observation;
use crate::policy::PolicyNetwork;
use crate::ppo::{PpoConfig, RolloutBuffer};
use biped_planner::{LessonParams, StepClass};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// One environment plus its private RNG streams and episode accumulators.
pub struct EnvWorker {
    pub env: BipedEnv,
    sample_rng: ChaCha12Rng,
    current_obs: Observation,
    ep_return: f64,
    ep_error_return: f64,
    ep_steps: u64,
    ep_trunk_err_sum: f64,
}

/// Deterministic per-purpose seed derivation from a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    // splitmix64 step over the combined value.
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl EnvWorker {
    pub fn new(env: BipedEnv, sample_seed: u64) -> Self {
        use rand::SeedableRng;
        EnvWorker {
            env,
            sample_rng: ChaCha12Rng::seed_from_u64(sample_seed),
            current_obs: Observation::zeros(),
            ep_return: 0.0,
            ep_error_return: 0.0,
            ep_steps: 0,
            ep_trunk_err_sum: 0.0,
        }
    }

    pub fn reset(&mut self, pool: &[StepClass], lesson: &LessonParams) {
        self.current_obs = self.env.reset_from_pool(pool, lesson);
        self.ep_return = 0.0;
        self.ep_error_return = 0.0;
        self.ep_steps = 0;
        self.ep_trunk_err_sum = 0.0;
    }
}

/// Statistics of completed episodes inside a collection window.
#[derive(Debug, Clone, Copy, Default)]
pub struct RolloutStats {
    pub episodes: u64,
    pub total_return: f64,
    pub total_error_return: f64,
    pub total_steps: u64,
    pub total_trunk_err: f64,
    pub faults: u64,
    pub reward_sum: f64,
    pub reward_samples: u64,
}

impl RolloutStats {
    pub fn merge(&mut self, other: &RolloutStats) {
        self.episodes += other.episodes;
        self.total_return += other.total_return;
        self.total_error_return += other.total_error_return;
        self.total_steps += other.total_steps;
        self.total_trunk_err += other.total_trunk_err;
        self.faults += other.faults;
        self.reward_sum += other.reward_sum;
        self.reward_samples += other.reward_samples;
    }

    pub fn mean_return(&self) -> f64 {
        self.total_return / self.episodes.max(1) as f64
    }

    pub fn mean_error_return(&self) -> f64 {
        self.total_error_return / self.episodes.max(1) as f64
    }

    pub fn mean_episode_steps(&self) -> f64 {
        self.total_steps as f64 / self.episodes.max(1) as f64
    }

    pub fn mean_trunk_error(&self) -> f64 {
        self.total_trunk_err / self.total_steps.max(1) as f64
    }

    pub fn mean_tick_reward(&self) -> f64 {
        self.reward_sum / self.reward_samples.max(1) as f64
    }
}

struct Segment {
    observations: Vec<Vec<f64>>,
    pre_squash: Vec<Vec<f64>>,
    log_probs: Vec<f64>,
    rewards: Vec<f64>,
    values: Vec<f64>,
    dones: Vec<bool>,
    bootstrap: f64,
    stats: RolloutStats,
}

fn collect_segment(
    worker: &mut EnvWorker,
    policy: &PolicyNetwork,
    horizon: usize,
    pool: &[StepClass],
    lesson: &LessonParams,
) -> Segment {
    let mut seg = Segment {
        observations: Vec::with_capacity(horizon),
        pre_squash: Vec::with_capacity(horizon),
        log_probs: Vec::with_capacity(horizon),
        rewards: Vec::with_capacity(horizon),
        values: Vec::with_capacity(horizon),
        dones: Vec::with_capacity(horizon),
        bootstrap: 0.0,
        stats: RolloutStats::default(),
    };
    for _ in 0..horizon {
        let obs = worker.current_obs;
        let value = policy.value(&obs.0);
        let sampled = policy.sample(&obs.0, &mut worker.sample_rng);
        let outcome: StepOutcome = worker.env.step(&sampled.to_action_vector());

        seg.observations.push(obs.0.to_vec());
        seg.pre_squash.push(sampled.pre_squash);
        seg.log_probs.push(sampled.log_prob);
        seg.rewards.push(outcome.reward.total());
        seg.values.push(value);
        seg.dones.push(outcome.done);

        worker.ep_return += outcome.reward.total();
        worker.ep_error_return += outcome.reward.error;
        worker.ep_steps += 1;
        worker.ep_trunk_err_sum += outcome.errors.trunk_pos;
        seg.stats.reward_sum += outcome.reward.total();
        seg.stats.reward_samples += 1;
        if outcome.faulted {
            seg.stats.faults += 1;
        }

        if outcome.done {
            seg.stats.episodes += 1;
            seg.stats.total_return += worker.ep_return;
            seg.stats.total_error_return += worker.ep_error_return;
            seg.stats.total_steps += worker.ep_steps;
            seg.stats.total_trunk_err += worker.ep_trunk_err_sum;
            worker.reset(pool, lesson);
        } else {
            worker.current_obs = outcome.observation;
        }
    }
    seg.bootstrap = policy.value(&worker.current_obs.0);
    seg
}

/// Collects `horizon` transitions from every worker in parallel and
/// merges them worker-major with per-segment advantage estimation.
pub fn collect_rollouts(
    policy: &PolicyNetwork,
    workers: &mut [EnvWorker],
    horizon: usize,
    cfg: &PpoConfig,
    pool: &[StepClass],
    lesson: &LessonParams,
) -> (RolloutBuffer, RolloutStats) {
    let segments: Vec<Segment> = workers
        .par_iter_mut()
        .map(|w| collect_segment(w, policy, horizon, pool, lesson))
        .collect();

    let mut buffer = RolloutBuffer::default();
    let mut stats = RolloutStats::default();
    for seg in segments {
        let mut values = seg.values.clone();
        values.push(seg.bootstrap);
        let (advantages, returns) =
            gae_advantages(&seg.rewards, &values, &seg.dones, cfg.gamma, cfg.lambda);
        buffer.observations.extend(seg.observations);
        buffer.pre_squash.extend(seg.pre_squash);
        buffer.log_probs.extend(seg.log_probs);
        buffer.advantages.extend(advantages);
        buffer.returns.extend(returns);
        stats.merge(&seg.stats);
    }
    (buffer, stats)
}
