//! The actor-critic feedback policy: a tanh-squashed diagonal Gaussian
//! with a state-independent learned log-std, plus a scalar value head.
//! Action and observation dimensions are dynamic so the same machinery
//! drives both the biped and small test environments.

use crate::nn::{Adam, Mlp};
use crate::obs::OBS_DIM;
use biped_kinematics::{ActionVector, JOINT_COUNT};
use rand::Rng;
use rand_distr::StandardNormal;

pub const ACTION_DIM: usize = JOINT_COUNT;
const LOG_STD_MIN: f64 = -5.0;
const LOG_STD_MAX: f64 = 1.5;

/// Network sizes; defaults are the trained configuration (actor 3x512,
/// critic 2x128 over the 101-real observation).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct NetworkShape {
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub obs_dim: usize,
    pub action_dim: usize,
}

impl Default for NetworkShape {
    fn default() -> Self {
        Self {
            actor_hidden: vec![512, 512, 512],
            critic_hidden: vec![128, 128],
            obs_dim: OBS_DIM,
            action_dim: ACTION_DIM,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PolicyNetwork {
    pub shape: NetworkShape,
    pub actor: Mlp,
    pub critic: Mlp,
    /// State-independent log standard deviations.
    pub log_std: Vec<f64>,
    /// Fixed per-entry input scaling applied before both networks.
    pub obs_scale: Vec<f64>,
}

/// One sampled action with everything PPO needs to evaluate it later.
#[derive(Debug, Clone)]
pub struct SampledAction {
    /// Squashed action in [-1, 1]^n.
    pub action: Vec<f64>,
    /// Pre-squash Gaussian sample.
    pub pre_squash: Vec<f64>,
    /// Log-density of the pre-squash sample under the current Gaussian.
    pub log_prob: f64,
}

impl SampledAction {
    /// The 12-joint feedback vector; panics for non-biped action sizes.
    pub fn to_action_vector(&self) -> ActionVector {
        let mut out = ActionVector::zeros();
        assert_eq!(self.action.len(), JOINT_COUNT);
        out.0.copy_from_slice(&self.action);
        out
    }
}

impl PolicyNetwork {
    pub fn new(shape: NetworkShape, log_std_init: f64, rng: &mut impl Rng) -> Self {
        let mut actor_sizes = vec![shape.obs_dim];
        actor_sizes.extend(&shape.actor_hidden);
        actor_sizes.push(shape.action_dim);
        let mut critic_sizes = vec![shape.obs_dim];
        critic_sizes.extend(&shape.critic_hidden);
        critic_sizes.push(1);
        PolicyNetwork {
            actor: Mlp::new(&actor_sizes, 0.01, rng),
            critic: Mlp::new(&critic_sizes, 1.0, rng),
            log_std: vec![log_std_init; shape.action_dim],
            obs_scale: default_obs_scale(shape.obs_dim),
            shape,
        }
    }

    pub fn scaled_obs(&self, obs: &[f64]) -> Vec<f64> {
        obs.iter().zip(&self.obs_scale).map(|(v, s)| v * s).collect()
    }

    fn actor_mean(&self, obs: &[f64]) -> Vec<f64> {
        self.actor.infer_one(&self.scaled_obs(obs))
    }

    pub fn value(&self, obs: &[f64]) -> f64 {
        self.critic.infer_one(&self.scaled_obs(obs))[0]
    }

    /// Stochastic action: squashed sample of the diagonal Gaussian.
    pub fn sample(&self, obs: &[f64], rng: &mut impl Rng) -> SampledAction {
        let mean = self.actor_mean(obs);
        let n = self.shape.action_dim;
        let mut pre = vec![0.0; n];
        let mut action = vec![0.0; n];
        let mut log_prob = 0.0;
        for i in 0..n {
            let sigma = self.log_std[i].clamp(LOG_STD_MIN, LOG_STD_MAX).exp();
            let noise: f64 = rng.sample(StandardNormal);
            let z = mean[i] + sigma * noise;
            pre[i] = z;
            action[i] = z.tanh();
            log_prob += gaussian_log_pdf(z, mean[i], sigma);
        }
        SampledAction { action, pre_squash: pre, log_prob }
    }

    /// Deterministic action: the squashed mean.
    pub fn deterministic(&self, obs: &[f64]) -> Vec<f64> {
        self.actor_mean(obs).into_iter().map(f64::tanh).collect()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.log_std.iter().map(|l| l.clamp(LOG_STD_MIN, LOG_STD_MAX).exp()).collect()
    }

    /// Entropy of the pre-squash Gaussian (used as the entropy bonus).
    pub fn entropy(&self) -> f64 {
        let half_log_2pi_e = 0.5 * ((2.0 * std::f64::consts::PI).ln() + 1.0);
        self.log_std
            .iter()
            .map(|l| l.clamp(LOG_STD_MIN, LOG_STD_MAX) + half_log_2pi_e)
            .sum()
    }

    pub fn param_count(&self) -> usize {
        self.actor.param_count() + self.log_std.len() + self.critic.param_count()
    }
}

pub fn gaussian_log_pdf(x: f64, mean: f64, sigma: f64) -> f64 {
    let d = (x - mean) / sigma;
    -0.5 * d * d - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// Fixed observation scaling: velocities and joint rates are compressed
/// so tanh layers stay in their active range. Layout must match
/// [`crate::obs`]; non-biped observation sizes get unit scaling.
fn default_obs_scale(obs_dim: usize) -> Vec<f64> {
    let mut s = vec![1.0; obs_dim];
    if obs_dim == OBS_DIM {
        // I_v^t target rates.
        for v in s.iter_mut().take(42).skip(28) {
            *v = 0.3;
        }
        // O_state: v_T, w_T.
        for v in s.iter_mut().take(53).skip(47) {
            *v = 0.3;
        }
        // J_V joint velocities.
        for v in s.iter_mut().take(89).skip(77) {
            *v = 0.1;
        }
    }
    s
}

/// Optimizers for the three parameter groups.
#[derive(Debug, Clone)]
pub struct PolicyOptimizer {
    pub actor: Adam,
    pub log_std: Adam,
    pub critic: Adam,
}

impl PolicyOptimizer {
    pub fn new(policy: &PolicyNetwork) -> Self {
        PolicyOptimizer {
            actor: Adam::new(policy.actor.param_count()),
            log_std: Adam::new(policy.log_std.len()),
            critic: Adam::new(policy.critic.param_count()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn sampled_and_deterministic_actions_bounded() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let shape = NetworkShape {
            actor_hidden: vec![16, 16, 16],
            critic_hidden: vec![8, 8],
            ..Default::default()
        };
        // Exaggerated parameters still cannot escape the squash.
        let mut policy = PolicyNetwork::new(shape, 2.0, &mut rng);
        for l in policy.actor.layers.iter_mut() {
            l.w *= 50.0;
        }
        let obs = [3.0; OBS_DIM];
        for _ in 0..200 {
            let s = policy.sample(&obs, &mut rng);
            assert!(s.action.iter().all(|a| (-1.0..=1.0).contains(a)));
            assert!(s.to_action_vector().in_unit_box());
        }
        assert!(policy.deterministic(&obs).iter().all(|a| (-1.0..=1.0).contains(a)));
    }

    #[test]
    fn log_prob_matches_gaussian_density() {
        let lp = gaussian_log_pdf(0.5, 0.0, 1.0);
        let expected = (-0.125f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((lp.exp() - expected).abs() < 1e-12);
    }

    #[test]
    fn network_shapes_match_spec_defaults() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let policy = PolicyNetwork::new(NetworkShape::default(), -0.5, &mut rng);
        assert_eq!(policy.actor.layers.len(), 4);
        assert_eq!(policy.actor.layers[0].w.dim(), (512, OBS_DIM));
        assert_eq!(policy.actor.layers[3].w.dim(), (ACTION_DIM, 512));
        assert_eq!(policy.critic.layers.len(), 3);
        assert_eq!(policy.critic.layers[0].w.dim(), (128, OBS_DIM));
        assert_eq!(policy.critic.layers[2].w.dim(), (1, 128));
    }
}
