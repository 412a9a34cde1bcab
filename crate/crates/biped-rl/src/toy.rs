//! Minimal 1-DOF stabilization environment for trainer smoke tests: the
//! agent nudges a point toward the origin and is rewarded for staying
//! close.

use crate::gae::{gae_advantages, normalize};
use crate::policy::{NetworkShape, PolicyNetwork, PolicyOptimizer};
use crate::ppo::{ppo_update, PpoConfig, RolloutBuffer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

pub const TOY_OBS_DIM: usize = 1;
pub const TOY_EPISODE_STEPS: usize = 40;

#[derive(Debug, Clone)]
pub struct ToyEnv {
    x: f64,
    steps: usize,
}

impl ToyEnv {
    pub fn reset(rng: &mut impl Rng) -> (ToyEnv, [f64; TOY_OBS_DIM]) {
        let env = ToyEnv { x: rng.random_range(-2.0..2.0), steps: 0 };
        let obs = [env.x];
        (env, obs)
    }

    /// Action in [-1, 1]; returns (obs, reward, done).
    pub fn step(&mut self, action: f64) -> ([f64; TOY_OBS_DIM], f64, bool) {
        self.x = (self.x + 0.25 * action.clamp(-1.0, 1.0)).clamp(-3.0, 3.0);
        self.steps += 1;
        // Sharply peaked at the origin so an untrained random walk earns
        // little and a converged policy earns close to one per step.
        let reward = (-4.0 * self.x.abs()).exp();
        ([self.x], reward, self.steps >= TOY_EPISODE_STEPS)
    }
}

/// Trains a small policy on the toy task and returns the mean completed
/// episode return of each update window. Smoke oracle for the trainer.
pub fn train_toy(seed: u64, updates: usize) -> Vec<f64> {
    let mut init_rng = ChaCha12Rng::seed_from_u64(seed);
    let shape = NetworkShape {
        actor_hidden: vec![32, 32],
        critic_hidden: vec![32],
        obs_dim: TOY_OBS_DIM,
        action_dim: 1,
    };
    let mut policy = PolicyNetwork::new(shape, -0.3, &mut init_rng);
    let mut optimizer = PolicyOptimizer::new(&policy);
    let cfg = PpoConfig {
        batch_size: 256,
        buffer_size: 2048,
        learning_rate: 3e-4,
        beta: 1e-3,
        epsilon: 0.2,
        lambda: 0.95,
        num_epoch: 4,
        gamma: 0.99,
        value_coef: 0.5,
        kl_ceiling: 0.5,
    };
    let mut env_rng = ChaCha12Rng::seed_from_u64(seed ^ 0xABCD);
    let mut update_rng = ChaCha12Rng::seed_from_u64(seed ^ 0x1234);
    let (mut env, mut obs) = ToyEnv::reset(&mut env_rng);
    let mut history = Vec::with_capacity(updates);

    for _ in 0..updates {
        let mut buffer = RolloutBuffer::default();
        let mut rewards = Vec::with_capacity(cfg.buffer_size);
        let mut values = Vec::with_capacity(cfg.buffer_size + 1);
        let mut dones = Vec::with_capacity(cfg.buffer_size);
        let mut ep_return = 0.0;
        let mut finished_returns = Vec::new();
        for _ in 0..cfg.buffer_size {
            let sampled = policy.sample(&obs, &mut env_rng);
            values.push(policy.value(&obs));
            buffer.observations.push(obs.to_vec());
            buffer.pre_squash.push(sampled.pre_squash.clone());
            buffer.log_probs.push(sampled.log_prob);
            let (next, reward, done) = env.step(sampled.action[0]);
            rewards.push(reward);
            dones.push(done);
            ep_return += reward;
            if done {
                finished_returns.push(ep_return);
                ep_return = 0.0;
                let (e, o) = ToyEnv::reset(&mut env_rng);
                env = e;
                obs = o;
            } else {
                obs = next;
            }
        }
        values.push(policy.value(&obs));
        let (mut advantages, returns) =
            gae_advantages(&rewards, &values, &dones, cfg.gamma, cfg.lambda);
        normalize(&mut advantages);
        buffer.advantages = advantages;
        buffer.returns = returns;
        ppo_update(&mut policy, &mut optimizer, &buffer, &cfg, cfg.learning_rate, &mut update_rng);
        let mean = finished_returns.iter().sum::<f64>() / finished_returns.len().max(1) as f64;
        history.push(mean);
    }
    history
}
