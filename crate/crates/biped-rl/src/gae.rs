//! Generalized advantage estimation over one rollout segment.

/// `values` has one more entry than `rewards`: the bootstrap value of the
/// state after the last transition. `dones[t]` marks transitions that
/// terminated the episode (the bootstrap beyond them is masked).
pub fn gae_advantages(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let t_max = rewards.len();
    assert_eq!(values.len(), t_max + 1);
    assert_eq!(dones.len(), t_max);
    let mut advantages = vec![0.0; t_max];
    let mut carry = 0.0;
    for t in (0..t_max).rev() {
        let mask = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * mask * values[t + 1] - values[t];
        carry = delta + gamma * lambda * mask * carry;
        advantages[t] = carry;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    (advantages, returns)
}

/// In-place normalization to zero mean, unit variance.
pub fn normalize(advantages: &mut [f64]) {
    let n = advantages.len().max(1) as f64;
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt().max(1e-8);
    for a in advantages.iter_mut() {
        *a = (*a - mean) / std;
    }
}
