use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;

use rand::seq::SliceRandom;
use rand::RngCore;

use super::buffer::RolloutBuffer;
use super::gae::buffer_advantages;
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::math;
use crate::nn::{clip_global_norm, gradient, Adam, Cache, Network, SampleLoss};
use crate::reward::{Objective, Preference, RewardScales};

/// `min(r·A, clip(r, 1−ε, 1+ε)·A)` and whether the clipped branch is the
/// active one.
pub fn clipped_surrogate(ratio: f64, adv: f64, eps: f64) -> (f64, bool) {
    let unclipped = ratio * adv;
    let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * adv;
    if unclipped <= clipped {
        (unclipped, false)
    } else {
        (clipped, true)
    }
}

/// Clipped-surrogate actor loss plus critic regression and entropy bonus:
/// `−min(rA, clip(r)A) + c_v·½Σ_i(V_i − G_i)² − c_e·H`.
pub struct PpoLoss<'a> {
    pub actions: &'a [usize],
    pub old_log_probs: &'a [f64],
    pub advantages: &'a [f64],
    pub returns: &'a [[f64; 2]],
    pub clip: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    sums: Cell<[f64; 4]>,
}

impl<'a> PpoLoss<'a> {
    pub fn new(
        actions: &'a [usize],
        old_log_probs: &'a [f64],
        advantages: &'a [f64],
        returns: &'a [[f64; 2]],
        cfg: &TrainConfig,
    ) -> Self {
        PpoLoss {
            actions,
            old_log_probs,
            advantages,
            returns,
            clip: cfg.clip,
            value_coef: cfg.value_coef,
            entropy_coef: cfg.entropy_coef,
            sums: Cell::new([0.0; 4]),
        }
    }

    /// Summed (policy loss, value loss, entropy, clipped count) so far.
    pub fn sums(&self) -> [f64; 4] {
        self.sums.get()
    }
}

impl SampleLoss for PpoLoss<'_> {
    fn sample(&self, i: usize, cache: &Cache, dlogits: &mut [f64], dvalues: &mut [f64; 2]) -> f64 {
        let a = self.actions[i];
        let lp = &cache.log_probs;
        let ratio = math::exp(lp[a] - self.old_log_probs[i]);
        let (surr, clipped) = clipped_surrogate(ratio, self.advantages[i], self.clip);
        let dlogp = if clipped { 0.0 } else { -ratio * self.advantages[i] };
        let entropy: f64 = -lp.iter().map(|&l| math::exp(l) * l).sum::<f64>();
        for (k, d) in dlogits.iter_mut().enumerate() {
            let p = math::exp(lp[k]);
            let onehot = if k == a { 1.0 } else { 0.0 };
            *d = dlogp * (onehot - p) + self.entropy_coef * p * (lp[k] + entropy);
        }
        let mut vloss = 0.0;
        for j in 0..2 {
            let err = cache.values[j] - self.returns[i][j];
            vloss += 0.5 * err * err;
            dvalues[j] = self.value_coef * err;
        }
        let mut s = self.sums.get();
        s[0] += -surr;
        s[1] += vloss;
        s[2] += entropy;
        s[3] += f64::from(u8::from(clipped));
        self.sums.set(s);
        -surr + self.value_coef * vloss - self.entropy_coef * entropy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
    pub minibatches: usize,
}

/// Critic outputs `(V_T, V_E)` for every stored observation.
pub fn critic_values(net: &Network, buffer: &RolloutBuffer) -> Result<Vec<[f64; 2]>> {
    let mut cache = Cache::new(net.layout());
    buffer
        .records()
        .iter()
        .map(|r| {
            net.forward(&r.obs, &mut cache)?;
            Ok(cache.values)
        })
        .collect()
}

fn returns_from(values: &[[f64; 2]], adv_t: &[f64], adv_e: &[f64]) -> Vec<[f64; 2]> {
    values
        .iter()
        .zip(adv_t.iter().zip(adv_e))
        .map(|(v, (at, ae))| [at + v[0], ae + v[1]])
        .collect()
}

/// Zero-mean, unit-variance copy of `xs`.
pub fn normalize(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = math::sqrt(var) + 1e-8;
    xs.iter().map(|x| (x - mean) / sd).collect()
}

/// One multi-objective PPO update on the transitions in `buffer`.
///
/// Per-objective advantages are combined as `ω_T·Â_T + ω_E·Â_E`; each
/// critic head regresses its own λ-return. On a numeric failure the network
/// and optimizer are restored and the error is returned.
pub fn ppo_update(
    net: &mut Network,
    opt: &mut Adam,
    buffer: &RolloutBuffer,
    pref: Preference,
    scales: RewardScales,
    cfg: &TrainConfig,
    rng: &mut dyn RngCore,
) -> Result<UpdateStats> {
    let values = critic_values(net, buffer)?;
    let adv = |o: Objective| buffer_advantages(buffer, &values, o, scales.get(o), cfg.gamma, cfg.gae_lambda);
    let adv_t = adv(Objective::Delay);
    let adv_e = adv(Objective::Energy);
    let combined: Vec<f64> = adv_t
        .iter()
        .zip(&adv_e)
        .map(|(at, ae)| pref.delay * at + pref.energy * ae)
        .collect();
    let returns = returns_from(&values, &adv_t, &adv_e);
    guarded_update(net, opt, buffer, &combined, &returns, cfg, rng)
}

/// Single-objective PPO on one reward component: the actor follows that
/// objective's advantages only, the critic is trained as in [`ppo_update`].
pub fn ppo_update_scalar(
    net: &mut Network,
    opt: &mut Adam,
    buffer: &RolloutBuffer,
    objective: Objective,
    scales: RewardScales,
    cfg: &TrainConfig,
    rng: &mut dyn RngCore,
) -> Result<UpdateStats> {
    let values = critic_values(net, buffer)?;
    let adv = |o: Objective| buffer_advantages(buffer, &values, o, scales.get(o), cfg.gamma, cfg.gae_lambda);
    let adv_t = adv(Objective::Delay);
    let adv_e = adv(Objective::Energy);
    let actor = match objective {
        Objective::Delay => adv_t.clone(),
        Objective::Energy => adv_e.clone(),
    };
    let returns = returns_from(&values, &adv_t, &adv_e);
    guarded_update(net, opt, buffer, &actor, &returns, cfg, rng)
}

fn guarded_update(
    net: &mut Network,
    opt: &mut Adam,
    buffer: &RolloutBuffer,
    advantages: &[f64],
    returns: &[[f64; 2]],
    cfg: &TrainConfig,
    rng: &mut dyn RngCore,
) -> Result<UpdateStats> {
    let saved = (net.clone(), opt.clone());
    let out = update_with_advantages(net, opt, buffer, advantages, returns, cfg, rng);
    if out.is_err() {
        *net = saved.0;
        *opt = saved.1;
    }
    out
}

/// Epochs of shuffled minibatch steps on fixed advantages and returns.
pub fn update_with_advantages(
    net: &mut Network,
    opt: &mut Adam,
    buffer: &RolloutBuffer,
    advantages: &[f64],
    returns: &[[f64; 2]],
    cfg: &TrainConfig,
    rng: &mut dyn RngCore,
) -> Result<UpdateStats> {
    let n = buffer.len();
    if advantages.len() != n || returns.len() != n {
        return Err(Error::Contract("advantages and returns must cover the buffer"));
    }
    let mut stats = UpdateStats::default();
    if n == 0 {
        return Ok(stats);
    }
    let recs = buffer.records();
    let mut order: Vec<usize> = (0..n).collect();
    let mb = cfg.batch.min(n);
    let mut totals = [0.0; 4];
    let mut seen = 0usize;
    let mut obs: Vec<&[f64]> = Vec::with_capacity(mb);
    let (mut act, mut old, mut ret) = (vec![], vec![], vec![]);
    let mut adv = Vec::with_capacity(mb);
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(mb) {
            obs.clear();
            act.clear();
            old.clear();
            ret.clear();
            adv.clear();
            for &i in chunk {
                obs.push(&recs[i].obs);
                act.push(recs[i].action);
                old.push(recs[i].log_prob);
                ret.push(returns[i]);
                adv.push(advantages[i]);
            }
            let adv_used = if cfg.normalize_advantages { normalize(&adv) } else { adv.clone() };
            let loss = PpoLoss::new(&act, &old, &adv_used, &ret, cfg);
            let (_, mut grad) = gradient(net, &obs, &loss)?;
            clip_global_norm(&mut grad, cfg.grad_clip);
            opt.step(net.params_mut(), &grad);
            if let Some(i) = net.params().iter().position(|p| !p.is_finite()) {
                return Err(Error::NonFinite {
                    context: "parameters after update",
                    index: i,
                });
            }
            let s = loss.sums();
            for k in 0..4 {
                totals[k] += s[k];
            }
            seen += chunk.len();
            stats.minibatches += 1;
        }
    }
    let seen = seen as f64;
    stats.policy_loss = totals[0] / seen;
    stats.value_loss = totals[1] / seen;
    stats.entropy = totals[2] / seen;
    stats.clip_fraction = totals[3] / seen;
    Ok(stats)
}
