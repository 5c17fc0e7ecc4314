use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::buffer::{RolloutBuffer, TransitionRecord};
use crate::error::Result;
use crate::nn::{Cache, Network};
use crate::reward::VectorReward;
use crate::rng::{derive_seed, Stream};
use crate::sim::OffloadEnv;
use crate::SystemConfig;

/// Draw an index from the categorical distribution `exp(log_probs)`.
pub fn sample_categorical(log_probs: &[f64], rng: &mut dyn RngCore) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &l) in log_probs.iter().enumerate() {
        acc += crate::math::exp(l);
        if u < acc {
            return i;
        }
    }
    // Rounding left a sliver above the last cumulative sum.
    log_probs
        .iter()
        .rposition(|l| *l > f64::NEG_INFINITY)
        .unwrap_or(log_probs.len() - 1)
}

/// Play whole episodes with the sampled policy until at least `n_steps`
/// transitions have been appended to `buffer`.
///
/// Episode `k` of the call uses environment seed
/// `derive(seed, Environment, first_episode + k)`. Returns each episode's
/// summed vector reward.
pub fn collect_rollouts(
    net: &Network,
    cfg: &SystemConfig,
    n_steps: usize,
    seed: u64,
    first_episode: u64,
    rng: &mut dyn RngCore,
    buffer: &mut RolloutBuffer,
) -> Result<Vec<VectorReward>> {
    let mut cache = Cache::new(net.layout());
    let mut returns = Vec::new();
    let mut steps = 0;
    let mut episode = first_episode;
    while steps < n_steps {
        let mut env = OffloadEnv::new(cfg, derive_seed(seed, Stream::Environment, episode))?;
        let mut ret = VectorReward::default();
        loop {
            let obs = env.observation().normalized();
            net.forward(&obs, &mut cache)?;
            let action = sample_categorical(&cache.log_probs, rng);
            let out = env.step(action)?;
            ret += out.reward;
            buffer.push(TransitionRecord {
                obs,
                action,
                reward: out.reward,
                done: out.done,
                log_prob: cache.log_probs[action],
            })?;
            steps += 1;
            if out.done {
                break;
            }
        }
        returns.push(ret);
        episode += 1;
    }
    Ok(returns)
}
