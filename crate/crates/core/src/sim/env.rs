use super::episode::{init_episode, EpisodeState};
use crate::error::{Error, Result};
use crate::obs::{encode_state, Observation};
use crate::reward::{delay_reward, energy_reward, VectorReward};
use crate::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: VectorReward,
    pub done: bool,
}

/// Decision-level view of an episode: one observation and one vector
/// reward per step.
#[derive(Debug, Clone)]
pub struct OffloadEnv {
    state: EpisodeState,
    head: usize,
}

impl OffloadEnv {
    pub fn new(cfg: &SystemConfig, seed: u64) -> Result<Self> {
        Self::from_state(init_episode(cfg, seed)?)
    }

    pub fn from_state(mut state: EpisodeState) -> Result<Self> {
        let head = state.begin_step()?;
        Ok(OffloadEnv { state, head })
    }

    pub fn state(&self) -> &EpisodeState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut EpisodeState {
        &mut self.state
    }

    pub fn into_state(self) -> EpisodeState {
        self.state
    }

    pub fn head_task(&self) -> usize {
        self.head
    }

    pub fn is_done(&self) -> bool {
        self.state.is_finished()
    }

    pub fn observation(&self) -> Observation {
        encode_state(&self.state, self.head)
    }

    /// Vector reward of sending the head task to `e`, evaluated on the
    /// current snapshot without changing state.
    pub fn reward_for(&self, e: usize) -> Result<VectorReward> {
        let cfg = self.state.config();
        let servers = cfg.num_servers();
        if e >= servers {
            return Err(Error::InvalidAction { action: e, servers });
        }
        let task = self.state.task(self.head);
        let rate = self.state.head_rates()[e];
        let srv = &self.state.servers[e];
        let offload_delay = if task.size == 0.0 { 0.0 } else { task.size / rate };
        let energy = energy_reward(cfg, task.size, rate, srv.freq);
        let delay = delay_reward(
            &srv.residuals(),
            task.size,
            offload_delay,
            srv.freq,
            cfg.cycles_per_bit,
        );
        Ok(VectorReward { delay, energy })
    }

    /// Offload the head task to `e`, advance to the next decision (or run
    /// the system empty after the last step).
    pub fn step(&mut self, e: usize) -> Result<StepOutcome> {
        if self.state.is_finished() {
            return Err(Error::Contract("step on a finished episode"));
        }
        let reward = self.reward_for(e)?;
        self.state.offload_task(self.head, e)?;
        let done = self.state.end_step()?;
        if !done {
            self.head = self.state.begin_step()?;
        }
        Ok(StepOutcome { reward, done })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_episode_per_horizon() {
        let cfg = SystemConfig::smoke();
        let mut env = OffloadEnv::new(&cfg, 9).unwrap();
        let mut steps = 0;
        loop {
            steps += 1;
            if env.step(steps % 3).unwrap().done {
                break;
            }
        }
        assert_eq!(steps, cfg.steps_per_episode);
        assert!(env.step(0).is_err());
    }

    #[test]
    fn energy_rewards_telescope_exactly() {
        let cfg = SystemConfig::smoke();
        let mut env = OffloadEnv::new(&cfg, 21).unwrap();
        let mut sum = 0.0;
        let mut k = 0;
        loop {
            let out = env.step(k % cfg.num_servers()).unwrap();
            sum += out.reward.energy;
            k += 7;
            if out.done {
                break;
            }
        }
        let (_, e) = env.state().episode_totals().unwrap();
        assert_eq!(sum, -e);
    }
}
