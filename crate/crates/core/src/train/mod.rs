//! Rollouts, per-objective GAE, clipped multi-objective PPO and preference
//! sweeps with warm starts.

mod buffer;
mod gae;
mod ppo;
mod rollout;
mod sweep;

use alloc::vec::Vec;

use rand::RngCore;

pub use buffer::{RolloutBuffer, TransitionRecord, DEFAULT_CAPACITY};
pub use gae::{buffer_advantages, gae};
pub use ppo::{
    clipped_surrogate, critic_values, normalize, ppo_update, ppo_update_scalar, update_with_advantages, PpoLoss,
    UpdateStats,
};
pub use rollout::{collect_rollouts, sample_categorical};
pub use sweep::{evenly_spaced, preference_grid, sweep_preferences, SweepEntry};

use crate::error::{Error, Result};
use crate::nn::{Adam, Architecture, Cache, Network};
use crate::obs::Observation;
use crate::policy::{DecisionContext, Scheduler};
use crate::reward::{scalarize, Preference, RewardScales};
use crate::rng::{stream_rng, Stream};
use crate::SystemConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub learning_rate: f64,
    /// Minibatch size.
    pub batch: usize,
    /// Total training episodes per preference.
    pub episodes: usize,
    /// Episodes collected before each update.
    pub episodes_per_update: usize,
    pub epochs: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub grad_clip: f64,
    pub normalize_advantages: bool,
    pub capacity: usize,
    pub arch: Architecture,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.9,
            gae_lambda: 0.95,
            clip: 0.2,
            learning_rate: 1e-6,
            batch: 4096,
            episodes: 1_920_000,
            episodes_per_update: 100,
            epochs: 4,
            value_coef: 0.5,
            entropy_coef: 0.01,
            grad_clip: 0.5,
            normalize_advantages: true,
            capacity: DEFAULT_CAPACITY,
            arch: Architecture::default(),
        }
    }
}

impl TrainConfig {
    pub fn smoke() -> Self {
        TrainConfig {
            learning_rate: 3e-4,
            batch: 250,
            episodes: 20_000,
            episodes_per_update: 40,
            arch: Architecture::small(),
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda must lie in [0, 1]");
        }
        if !(self.clip > 0.0) {
            return bad("clip must be > 0");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and > 0");
        }
        if self.batch == 0 || self.episodes_per_update == 0 {
            return bad("batch and episodes_per_update must be positive");
        }
        if self.episodes_per_update * cfg.steps_per_episode > self.capacity {
            return bad("episodes_per_update exceeds the rollout buffer capacity");
        }
        if !(self.grad_clip > 0.0) {
            return bad("grad_clip must be > 0");
        }
        Ok(())
    }
}

/// One learning-curve point, emitted after every update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub update: usize,
    pub episodes_seen: usize,
    pub mean_scalarized_return: f64,
    pub mean_delay_return: f64,
    pub mean_energy_return: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

/// A trained policy for one preference.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyProfile {
    pub preference: Preference,
    pub network: Network,
    pub curve: Vec<CurvePoint>,
    pub episodes: usize,
}

/// Train `init` under preference `pref` for `tcfg.episodes` episodes.
pub fn train_preference(
    cfg: &SystemConfig,
    tcfg: &TrainConfig,
    pref: Preference,
    scales: RewardScales,
    init: &Network,
    seed: u64,
) -> Result<PolicyProfile> {
    tcfg.validate(cfg)?;
    let mut net = init.clone();
    let mut opt = Adam::new(net.params().len(), tcfg.learning_rate);
    let mut buffer = RolloutBuffer::new(tcfg.capacity);
    let mut curve = Vec::new();
    let mut seen = 0;
    let mut update = 0;
    while seen < tcfg.episodes {
        let n = tcfg.episodes_per_update.min(tcfg.episodes - seen);
        buffer.clear();
        let mut prng = stream_rng(seed, Stream::Policy, update as u64);
        let returns = collect_rollouts(
            &net,
            cfg,
            n * cfg.steps_per_episode,
            seed,
            seen as u64,
            &mut prng,
            &mut buffer,
        )?;
        let mut srng = stream_rng(seed, Stream::Shuffle, update as u64);
        let stats = ppo_update(&mut net, &mut opt, &buffer, pref, scales, tcfg, &mut srng)?;
        seen += returns.len();
        let k = returns.len() as f64;
        curve.push(CurvePoint {
            update,
            episodes_seen: seen,
            mean_scalarized_return: returns.iter().map(|r| scalarize(*r, pref, scales)).sum::<f64>() / k,
            mean_delay_return: returns.iter().map(|r| r.delay).sum::<f64>() / k,
            mean_energy_return: returns.iter().map(|r| r.energy).sum::<f64>() / k,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
        });
        update += 1;
    }
    Ok(PolicyProfile {
        preference: pref,
        network: net,
        curve,
        episodes: seen,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    /// Most probable server, lowest index on ties.
    Greedy,
    /// Sample from the policy distribution.
    Sample,
}

/// A trained network acting as a [`Scheduler`].
#[derive(Debug, Clone)]
pub struct NetworkScheduler {
    net: Network,
    mode: ActionMode,
    cache: Cache,
}

impl NetworkScheduler {
    pub fn new(net: Network, mode: ActionMode) -> Self {
        let cache = Cache::new(net.layout());
        NetworkScheduler { net, mode, cache }
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    fn act(&mut self, obs: &Observation, rng: &mut dyn RngCore) -> Result<usize> {
        self.net.forward(&obs.normalized(), &mut self.cache)?;
        Ok(match self.mode {
            ActionMode::Sample => sample_categorical(&self.cache.log_probs, rng),
            ActionMode::Greedy => {
                let lp = &self.cache.log_probs;
                let mut best = 0;
                for (i, &l) in lp.iter().enumerate() {
                    if l > lp[best] {
                        best = i;
                    }
                }
                best
            }
        })
    }
}

impl Scheduler for NetworkScheduler {
    fn select(&mut self, ctx: &DecisionContext<'_>, rng: &mut dyn RngCore) -> usize {
        // An observation that does not fit the network is a wiring bug;
        // the out-of-range action makes the environment reject the step.
        self.act(ctx.obs, rng).unwrap_or(usize::MAX)
    }
}
