//! Clipped-surrogate PPO update with minibatching, entropy bonus, value
//! regression and a KL divergence guard.

use crate::nn::{grads_to_flat, MlpGrads};
use crate::policy::{gaussian_log_pdf, PolicyNetwork, PolicyOptimizer};
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Training hyperparameters. The per-stage triples (learning rate,
/// entropy beta, clip epsilon) default to the stage-1 values; the
/// curriculum swaps them per stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    pub batch_size: usize,
    pub buffer_size: usize,
    pub learning_rate: f64,
    /// Entropy bonus coefficient.
    pub beta: f64,
    /// Clipped-surrogate epsilon.
    pub epsilon: f64,
    pub lambda: f64,
    pub num_epoch: usize,
    pub gamma: f64,
    pub value_coef: f64,
    /// Mean-KL ceiling; exceeding it aborts the remaining epochs of the
    /// current update.
    pub kl_ceiling: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            batch_size: 2048,
            buffer_size: 20480,
            learning_rate: 3e-4,
            beta: 0.02,
            epsilon: 0.02,
            lambda: 0.95,
            num_epoch: 3,
            gamma: 0.99,
            value_coef: 0.5,
            kl_ceiling: 0.15,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.batch_size == 0 || self.buffer_size == 0 {
            return Err("batch and buffer sizes must be positive".into());
        }
        if self.buffer_size % self.batch_size != 0 {
            return Err(format!(
                "buffer_size {} must be a multiple of batch_size {}",
                self.buffer_size, self.batch_size
            ));
        }
        if !(0.0..1.0).contains(&self.gamma) && self.gamma != 0.0 {
            return Err("gamma must lie in [0, 1)".into());
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err("lambda must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// Flattened on-policy buffer; advantages are normalized before updating.
#[derive(Debug, Clone, Default)]
pub struct RolloutBuffer {
    pub observations: Vec<Vec<f64>>,
    /// Pre-squash Gaussian samples.
    pub pre_squash: Vec<Vec<f64>>,
    pub log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl RolloutBuffer {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Diagnostics of one PPO update.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct UpdateMetrics {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub mean_kl: f64,
    pub epochs_run: usize,
    pub kl_stopped: bool,
}

/// Per-minibatch loss and analytic gradients for the three parameter
/// groups. Exposed so the gradient check can diff it directly.
pub struct LossGrads {
    pub total_loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub mean_kl: f64,
    pub actor: MlpGrads,
    pub log_std: Vec<f64>,
    pub critic: MlpGrads,
}

/// Evaluates the PPO loss on a minibatch and backpropagates analytic
/// gradients.
pub fn loss_and_grads(
    policy: &PolicyNetwork,
    cfg: &PpoConfig,
    obs: &Array2<f64>,
    pre_squash: &Array2<f64>,
    old_log_probs: &Array1<f64>,
    advantages: &Array1<f64>,
    returns: &Array1<f64>,
) -> LossGrads {
    let batch = obs.nrows();
    let bf = batch as f64;
    let action_dim = policy.shape.action_dim;
    let sigmas = policy.sigmas();

    // Actor forward.
    let (mean, actor_cache) = policy.actor.forward(obs);
    // New log-probs of the stored pre-squash actions.
    let mut log_probs = Array1::zeros(batch);
    for s in 0..batch {
        let mut lp = 0.0;
        for i in 0..action_dim {
            lp += gaussian_log_pdf(pre_squash[(s, i)], mean[(s, i)], sigmas[i]);
        }
        log_probs[s] = lp;
    }

    // Clipped surrogate.
    let mut policy_loss = 0.0;
    let mut clip_count = 0usize;
    let mut kl_sum = 0.0;
    let mut dl_dlogp = Array1::<f64>::zeros(batch);
    for s in 0..batch {
        let ratio: f64 = (log_probs[s] - old_log_probs[s]).exp();
        let adv = advantages[s];
        let unclipped = ratio * adv;
        let clipped = ratio.clamp(1.0 - cfg.epsilon, 1.0 + cfg.epsilon) * adv;
        if (ratio - 1.0).abs() > cfg.epsilon {
            clip_count += 1;
        }
        // loss = -min(unclipped, clipped); gradient flows only through the
        // branch the minimum picks, and only when that branch is unclipped.
        if unclipped <= clipped {
            policy_loss -= unclipped;
            dl_dlogp[s] = -ratio * adv;
        } else {
            policy_loss -= clipped;
            if (1.0 - cfg.epsilon..=1.0 + cfg.epsilon).contains(&ratio) {
                dl_dlogp[s] = -ratio * adv;
            }
        }
        kl_sum += (ratio - 1.0) - (log_probs[s] - old_log_probs[s]);
    }
    policy_loss /= bf;
    dl_dlogp /= bf;

    // Gradients through the Gaussian log-density.
    let mut grad_mean = Array2::<f64>::zeros((batch, action_dim));
    let mut grad_log_std = vec![0.0; action_dim];
    for s in 0..batch {
        for i in 0..action_dim {
            let z = (pre_squash[(s, i)] - mean[(s, i)]) / sigmas[i];
            // d logp / d mean = z / sigma; d logp / d log_sigma = z^2 - 1.
            grad_mean[(s, i)] = dl_dlogp[s] * z / sigmas[i];
            grad_log_std[i] += dl_dlogp[s] * (z * z - 1.0);
        }
    }
    // Entropy bonus: H depends on log_std only.
    let entropy = policy.entropy();
    for g in grad_log_std.iter_mut() {
        *g -= cfg.beta;
    }
    let actor_grads = policy.actor.backward(&actor_cache, &grad_mean);

    // Critic regression.
    let (value_out, critic_cache) = policy.critic.forward(obs);
    let mut value_loss = 0.0;
    let mut grad_value = Array2::<f64>::zeros((batch, 1));
    for s in 0..batch {
        let diff = value_out[(s, 0)] - returns[s];
        value_loss += 0.5 * diff * diff;
        grad_value[(s, 0)] = cfg.value_coef * diff / bf;
    }
    value_loss /= bf;
    let critic_grads = policy.critic.backward(&critic_cache, &grad_value);

    LossGrads {
        total_loss: policy_loss - cfg.beta * entropy + cfg.value_coef * value_loss,
        policy_loss,
        value_loss,
        entropy,
        clip_fraction: clip_count as f64 / bf,
        mean_kl: kl_sum / bf,
        actor: actor_grads,
        log_std: grad_log_std,
        critic: critic_grads,
    }
}

/// Runs `num_epoch` minibatched passes over the buffer, updating the
/// policy in place. Advantages must already be normalized.
pub fn ppo_update(
    policy: &mut PolicyNetwork,
    optimizer: &mut PolicyOptimizer,
    buffer: &RolloutBuffer,
    cfg: &PpoConfig,
    learning_rate: f64,
    rng: &mut impl Rng,
) -> UpdateMetrics {
    let n = buffer.len();
    assert!(n > 0, "empty rollout buffer");
    let mut metrics = UpdateMetrics::default();
    let mut batches = 0usize;

    let mut indices: Vec<usize> = (0..n).collect();
    'epochs: for _ in 0..cfg.num_epoch {
        indices.shuffle(rng);
        for chunk in indices.chunks(cfg.batch_size) {
            if chunk.len() < cfg.batch_size && n >= cfg.batch_size {
                continue; // drop the ragged tail
            }
            let b = chunk.len();
            let obs_dim = policy.shape.obs_dim;
            let mut obs = Array2::zeros((b, obs_dim));
            let mut pre = Array2::zeros((b, policy.shape.action_dim));
            let mut old_lp = Array1::zeros(b);
            let mut adv = Array1::zeros(b);
            let mut ret = Array1::zeros(b);
            for (row, &idx) in chunk.iter().enumerate() {
                for (col, v) in buffer.observations[idx].iter().enumerate() {
                    obs[(row, col)] = v * policy.obs_scale[col];
                }
                for (i, z) in buffer.pre_squash[idx].iter().enumerate() {
                    pre[(row, i)] = *z;
                }
                old_lp[row] = buffer.log_probs[idx];
                adv[row] = buffer.advantages[idx];
                ret[row] = buffer.returns[idx];
            }

            let out = loss_and_grads(policy, cfg, &obs, &pre, &old_lp, &adv, &ret);
            metrics.policy_loss += out.policy_loss;
            metrics.value_loss += out.value_loss;
            metrics.entropy += out.entropy;
            metrics.clip_fraction += out.clip_fraction;
            metrics.mean_kl += out.mean_kl;
            batches += 1;

            if out.mean_kl > cfg.kl_ceiling {
                metrics.kl_stopped = true;
                apply_grads(policy, optimizer, &out, learning_rate);
                break 'epochs;
            }
            apply_grads(policy, optimizer, &out, learning_rate);
        }
        metrics.epochs_run += 1;
    }

    let b = batches.max(1) as f64;
    metrics.policy_loss /= b;
    metrics.value_loss /= b;
    metrics.entropy /= b;
    metrics.clip_fraction /= b;
    metrics.mean_kl /= b;
    metrics
}

fn apply_grads(
    policy: &mut PolicyNetwork,
    optimizer: &mut PolicyOptimizer,
    out: &LossGrads,
    lr: f64,
) {
    let mut actor_flat = policy.actor.to_flat();
    optimizer.actor.step(&mut actor_flat, &grads_to_flat(&out.actor), lr);
    policy.actor.from_flat(&actor_flat);

    optimizer.log_std.step(&mut policy.log_std, &out.log_std, lr);

    let mut critic_flat = policy.critic.to_flat();
    optimizer.critic.step(&mut critic_flat, &grads_to_flat(&out.critic), lr);
    policy.critic.from_flat(&critic_flat);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::NetworkShape;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    const TEST_ACTIONS: usize = 3;

    fn tiny_policy(rng: &mut ChaCha12Rng) -> PolicyNetwork {
        let shape = NetworkShape {
            actor_hidden: vec![8, 8],
            critic_hidden: vec![8],
            obs_dim: 4,
            action_dim: TEST_ACTIONS,
        };
        PolicyNetwork::new(shape, -0.5, rng)
    }

    fn synthetic_buffer(policy: &PolicyNetwork, n: usize, rng: &mut ChaCha12Rng) -> RolloutBuffer {
        let mut buffer = RolloutBuffer::default();
        for _ in 0..n {
            let obs: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mean = policy.actor.infer_one(&obs);
            let sigmas = policy.sigmas();
            let mut pre = vec![0.0; TEST_ACTIONS];
            let mut lp = 0.0;
            for i in 0..TEST_ACTIONS {
                let z = mean[i] + sigmas[i] * rng.random_range(-1.0..1.0);
                pre[i] = z;
                lp += gaussian_log_pdf(z, mean[i], sigmas[i]);
            }
            buffer.observations.push(obs);
            buffer.pre_squash.push(pre);
            buffer.log_probs.push(lp);
            buffer.advantages.push(rng.random_range(-1.0..1.0));
            buffer.returns.push(rng.random_range(-1.0..1.0));
        }
        buffer
    }

    #[test]
    fn ratio_inside_clip_means_branches_agree() {
        // At the sampling parameters the ratio is exactly 1, inside any
        // clip band, so clipped and unclipped objectives coincide.
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let policy = tiny_policy(&mut rng);
        let buffer = synthetic_buffer(&policy, 16, &mut rng);
        let cfg = PpoConfig { epsilon: 0.2, ..Default::default() };
        let obs = Array2::from_shape_fn((16, 4), |(s, c)| buffer.observations[s][c]);
        let pre = Array2::from_shape_fn((16, TEST_ACTIONS), |(s, i)| buffer.pre_squash[s][i]);
        let old = Array1::from_iter(buffer.log_probs.iter().copied());
        let adv = Array1::from_iter(buffer.advantages.iter().copied());
        let ret = Array1::from_iter(buffer.returns.iter().copied());
        let out = loss_and_grads(&policy, &cfg, &obs, &pre, &old, &adv, &ret);
        assert_eq!(out.clip_fraction, 0.0);
        assert!(out.mean_kl.abs() < 1e-12);
        // Unclipped surrogate at ratio 1 is exactly -mean(adv).
        let expected = -adv.iter().sum::<f64>() / 16.0;
        assert!((out.policy_loss - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_advantages_zero_policy_gradient() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let policy = tiny_policy(&mut rng);
        let mut buffer = synthetic_buffer(&policy, 16, &mut rng);
        buffer.advantages.iter_mut().for_each(|a| *a = 0.0);
        let cfg = PpoConfig::default();
        let obs = Array2::from_shape_fn((16, 4), |(s, c)| buffer.observations[s][c]);
        let pre = Array2::from_shape_fn((16, TEST_ACTIONS), |(s, i)| buffer.pre_squash[s][i]);
        let old = Array1::from_iter(buffer.log_probs.iter().copied());
        let adv = Array1::from_iter(buffer.advantages.iter().copied());
        let ret = Array1::from_iter(buffer.returns.iter().copied());
        let out = loss_and_grads(&policy, &cfg, &obs, &pre, &old, &adv, &ret);
        for (w, b) in &out.actor.layers {
            assert!(w.iter().all(|g| g.abs() < 1e-15));
            assert!(b.iter().all(|g| g.abs() < 1e-15));
        }
        // log-std still moves from the entropy bonus alone.
        for g in &out.log_std {
            assert!((g + cfg.beta).abs() < 1e-15);
        }
    }

    #[test]
    fn update_runs_and_reports() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let mut policy = tiny_policy(&mut rng);
        let mut opt = PolicyOptimizer::new(&policy);
        let buffer = synthetic_buffer(&policy, 64, &mut rng);
        let cfg = PpoConfig { batch_size: 16, buffer_size: 64, num_epoch: 2, ..Default::default() };
        let metrics = ppo_update(&mut policy, &mut opt, &buffer, &cfg, 1e-3, &mut rng);
        assert_eq!(metrics.epochs_run, 2);
        assert!(metrics.entropy.is_finite());
    }
}
