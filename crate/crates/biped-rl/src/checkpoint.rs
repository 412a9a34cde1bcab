//! Versioned binary policy checkpoints with an embedded config hash.
//! Loading fails closed when the hash does not match the caller's
//! effective configuration.

use crate::policy::{NetworkShape, PolicyNetwork};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

const MAGIC: &[u8; 4] = b"BPRL";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a policy checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("config hash mismatch: checkpoint was trained under a different configuration")]
    ChecksumMismatch,
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
}

fn write_u32(w: &mut impl Write, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_u64(w: &mut impl Write, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_f64s(w: &mut impl Write, data: &[f64]) -> std::io::Result<()> {
    write_u64(w, data.len() as u64)?;
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64, CheckpointError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s(r: &mut impl Read) -> Result<Vec<f64>, CheckpointError> {
    let n = read_u64(r)? as usize;
    if n > 1 << 30 {
        return Err(CheckpointError::Malformed("tensor too large".into()));
    }
    let mut out = Vec::with_capacity(n);
    let mut b = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut b)?;
        out.push(f64::from_le_bytes(b));
    }
    Ok(out)
}

/// Saves the policy parameters next to the 32-byte config hash.
pub fn save_policy(
    path: &Path,
    policy: &PolicyNetwork,
    config_hash: &[u8; 32],
) -> Result<(), CheckpointError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    write_u32(&mut w, VERSION)?;
    w.write_all(config_hash)?;

    let shape = &policy.shape;
    write_u64(&mut w, shape.obs_dim as u64)?;
    write_u64(&mut w, shape.action_dim as u64)?;
    write_u64(&mut w, shape.actor_hidden.len() as u64)?;
    for h in &shape.actor_hidden {
        write_u64(&mut w, *h as u64)?;
    }
    write_u64(&mut w, shape.critic_hidden.len() as u64)?;
    for h in &shape.critic_hidden {
        write_u64(&mut w, *h as u64)?;
    }
    write_f64s(&mut w, &policy.actor.to_flat())?;
    write_f64s(&mut w, &policy.log_std)?;
    write_f64s(&mut w, &policy.critic.to_flat())?;
    write_f64s(&mut w, &policy.obs_scale)?;
    Ok(())
}

/// Loads a policy, verifying the magic, version and config hash.
pub fn load_policy(path: &Path, config_hash: &[u8; 32]) -> Result<PolicyNetwork, CheckpointError> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let mut hash = [0u8; 32];
    r.read_exact(&mut hash)?;
    if &hash != config_hash {
        return Err(CheckpointError::ChecksumMismatch);
    }

    let obs_dim = read_u64(&mut r)? as usize;
    let action_dim = read_u64(&mut r)? as usize;
    let n_actor = read_u64(&mut r)? as usize;
    let mut actor_hidden = Vec::with_capacity(n_actor);
    for _ in 0..n_actor {
        actor_hidden.push(read_u64(&mut r)? as usize);
    }
    let n_critic = read_u64(&mut r)? as usize;
    let mut critic_hidden = Vec::with_capacity(n_critic);
    for _ in 0..n_critic {
        critic_hidden.push(read_u64(&mut r)? as usize);
    }
    let shape = NetworkShape { actor_hidden, critic_hidden, obs_dim, action_dim };

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0);
    let mut policy = PolicyNetwork::new(shape, 0.0, &mut rng);

    let actor = read_f64s(&mut r)?;
    if actor.len() != policy.actor.param_count() {
        return Err(CheckpointError::Malformed("actor parameter count".into()));
    }
    policy.actor.from_flat(&actor);
    let log_std = read_f64s(&mut r)?;
    if log_std.len() != policy.log_std.len() {
        return Err(CheckpointError::Malformed("log-std length".into()));
    }
    policy.log_std = log_std;
    let critic = read_f64s(&mut r)?;
    if critic.len() != policy.critic.param_count() {
        return Err(CheckpointError::Malformed("critic parameter count".into()));
    }
    policy.critic.from_flat(&critic);
    let obs_scale = read_f64s(&mut r)?;
    if obs_scale.len() != policy.obs_scale.len() {
        return Err(CheckpointError::Malformed("obs-scale length".into()));
    }
    policy.obs_scale = obs_scale;
    Ok(policy)
}

/// SHA-256 of a serialized configuration string.
pub fn config_hash(serialized: &str) -> [u8; 32] {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(serialized.as_bytes());
    hasher.finalize().into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn round_trip_and_hash_guard() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let shape = NetworkShape {
            actor_hidden: vec![8, 8, 8],
            critic_hidden: vec![4, 4],
            obs_dim: 6,
            action_dim: 3,
        };
        let policy = PolicyNetwork::new(shape, -0.3, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.ckpt");
        let hash = config_hash("config-a");
        save_policy(&path, &policy, &hash).unwrap();

        let loaded = load_policy(&path, &hash).unwrap();
        assert_eq!(loaded.actor.to_flat(), policy.actor.to_flat());
        assert_eq!(loaded.log_std, policy.log_std);
        assert_eq!(loaded.critic.to_flat(), policy.critic.to_flat());

        let wrong = config_hash("config-b");
        assert!(matches!(
            load_policy(&path, &wrong),
            Err(CheckpointError::ChecksumMismatch)
        ));
    }
}
