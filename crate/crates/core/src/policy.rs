//! Scheduler interface shared by the learned policy and the baselines, and
//! the episode runner used for evaluation.

use rand::RngCore;

use crate::error::Result;
use crate::obs::Observation;
use crate::reward::VectorReward;
use crate::sim::{EpisodeState, OffloadEnv};
use crate::SystemConfig;

/// Everything a scheduler may look at when choosing a server.
pub struct DecisionContext<'a> {
    pub env: &'a OffloadEnv,
    pub obs: &'a Observation,
}

impl<'a> DecisionContext<'a> {
    pub fn state(&self) -> &EpisodeState {
        self.env.state()
    }
}

pub trait Scheduler {
    /// Pick a server index in `0..=E`.
    fn select(&mut self, ctx: &DecisionContext<'_>, rng: &mut dyn RngCore) -> usize;

    /// Called after each step with the observation the decision was made
    /// on and the realized reward.
    fn feedback(&mut self, _obs: &Observation, _action: usize, _reward: VectorReward) {}
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub total_delay: f64,
    pub total_energy: f64,
    pub reward_sum: VectorReward,
    pub steps: usize,
    pub forced_arrivals: usize,
    pub transit_overlaps: usize,
}

/// Play one full episode with `scheduler`. Environment randomness depends
/// only on `env_seed`, so two schedulers given the same seed face the same
/// arrivals, sizes and fades.
pub fn run_episode<F>(
    cfg: &SystemConfig,
    env_seed: u64,
    scheduler: &mut dyn Scheduler,
    rng: &mut dyn RngCore,
    mut on_step: F,
) -> Result<EpisodeSummary>
where
    F: FnMut(usize, VectorReward),
{
    let mut env = OffloadEnv::new(cfg, env_seed)?;
    let mut reward_sum = VectorReward::default();
    let mut steps = 0;
    loop {
        let obs = env.observation();
        let action = {
            let ctx = DecisionContext { env: &env, obs: &obs };
            scheduler.select(&ctx, rng)
        };
        let out = env.step(action)?;
        scheduler.feedback(&obs, action, out.reward);
        on_step(action, out.reward);
        reward_sum += out.reward;
        steps += 1;
        if out.done {
            break;
        }
    }
    let (total_delay, total_energy) = env.state().episode_totals()?;
    Ok(EpisodeSummary {
        total_delay,
        total_energy,
        reward_sum,
        steps,
        forced_arrivals: env.state().forced_arrivals(),
        transit_overlaps: env.state().transit_overlaps(),
    })
}
