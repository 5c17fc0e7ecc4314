use alloc::vec;
use alloc::vec::Vec;

use super::buffer::RolloutBuffer;
use crate::reward::Objective;

/// Generalized advantage estimates for one episode.
///
/// `values` holds `V(s_0..s_{T-1})` followed by the bootstrap value of the
/// state after the last step (0 for a terminal state); `rewards` are already
/// scaled. Returns `Â(t) = Σ_l (γλ)^l δ(t+l)`.
pub fn gae(rewards: &[f64], values: &[f64], gamma: f64, lambda: f64) -> Vec<f64> {
    assert_eq!(values.len(), rewards.len() + 1, "values need a bootstrap entry");
    let mut adv = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for t in (0..rewards.len()).rev() {
        let delta = rewards[t] + gamma * values[t + 1] - values[t];
        acc = delta + gamma * lambda * acc;
        adv[t] = acc;
    }
    adv
}

/// Advantages for every record of `buffer` and one objective.
///
/// `values[i]` is the critic's `(V_T, V_E)` at record `i`. Episode ends
/// bootstrap with 0; an unfinished trailing episode bootstraps with 0 too.
pub fn buffer_advantages(
    buffer: &RolloutBuffer,
    values: &[[f64; 2]],
    objective: Objective,
    scale: f64,
    gamma: f64,
    lambda: f64,
) -> Vec<f64> {
    let k = objective.index();
    let mut out = Vec::with_capacity(buffer.len());
    let mut rewards = Vec::new();
    let mut vals = Vec::new();
    for ep in buffer.episodes() {
        rewards.clear();
        vals.clear();
        for i in ep.clone() {
            rewards.push(scale * buffer.records()[i].reward.get(objective));
            vals.push(values[i][k]);
        }
        vals.push(0.0);
        out.extend(gae(&rewards, &vals, gamma, lambda));
    }
    out
}
