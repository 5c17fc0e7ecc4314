//! Two-objective immediate reward and preference scalarization.
//!
//! Energy is exact: the offloaded task's transmission plus execution energy.
//! Delay is the estimated increase in the sum of all task delays caused by
//! the decision: the task's own offload time, the service the existing pool
//! receives while the task is in transit, and the remaining processor-sharing
//! completion times of the enlarged pool. Summed over an episode the delay
//! rewards telescope to minus the total realized delay.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::policy::run_episode;
use crate::baselines::RandomScheduler;
use crate::rng::{derive_seed, Stream};
use crate::sim::exec_energy;
use crate::SystemConfig;

/// Per-step reward `(r_T, r_E)`: seconds and joules, both ≤ 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VectorReward {
    pub delay: f64,
    pub energy: f64,
}

impl VectorReward {
    pub fn new(delay: f64, energy: f64) -> Self {
        VectorReward { delay, energy }
    }

    pub fn get(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Delay => self.delay,
            Objective::Energy => self.energy,
        }
    }
}

impl core::ops::Add for VectorReward {
    type Output = VectorReward;
    fn add(self, o: VectorReward) -> VectorReward {
        VectorReward::new(self.delay + o.delay, self.energy + o.energy)
    }
}

impl core::ops::AddAssign for VectorReward {
    fn add_assign(&mut self, o: VectorReward) {
        self.delay += o.delay;
        self.energy += o.energy;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Delay,
    Energy,
}

impl Objective {
    pub const ALL: [Objective; 2] = [Objective::Delay, Objective::Energy];

    pub fn index(self) -> usize {
        match self {
            Objective::Delay => 0,
            Objective::Energy => 1,
        }
    }
}

/// Weights `(ω_T, ω_E)` on the probability simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preference {
    pub delay: f64,
    pub energy: f64,
}

impl Preference {
    /// Preference with delay weight `omega_t` and energy weight `1 − omega_t`.
    pub fn new(omega_t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&omega_t) {
            return Err(Error::config(alloc::format!(
                "preference weight must lie in [0, 1], got {omega_t}"
            )));
        }
        Ok(Preference {
            delay: omega_t,
            energy: 1.0 - omega_t,
        })
    }

    pub fn weight(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Delay => self.delay,
            Objective::Energy => self.energy,
        }
    }
}

/// Magnitude coefficients `(α_T, α_E)` bringing both objectives to the same
/// order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardScales {
    pub delay: f64,
    pub energy: f64,
}

impl Default for RewardScales {
    fn default() -> Self {
        RewardScales {
            delay: 0.1,
            energy: 10.0,
        }
    }
}

impl RewardScales {
    pub fn new(delay: f64, energy: f64) -> Result<Self> {
        if delay > 0.0 && energy > 0.0 && delay.is_finite() && energy.is_finite() {
            Ok(RewardScales { delay, energy })
        } else {
            Err(Error::config("reward scales must be finite and > 0"))
        }
    }

    pub fn get(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Delay => self.delay,
            Objective::Energy => self.energy,
        }
    }
}

/// `ω_T·α_T·r_T + ω_E·α_E·r_E`.
pub fn scalarize(v: VectorReward, pref: Preference, scales: RewardScales) -> f64 {
    pref.delay * scales.delay * v.delay + pref.energy * scales.energy * v.energy
}

/// Transmission energy `p_off · L / C`.
pub fn offload_energy(cfg: &SystemConfig, size: f64, rate: f64) -> f64 {
    if size == 0.0 {
        0.0
    } else {
        cfg.offload_power * (size / rate)
    }
}

/// `−(p_off·L/C + κ·η·f²·L)` for offloading a task of `size` bits at
/// `rate` to a server running at `freq`.
pub fn energy_reward(cfg: &SystemConfig, size: f64, rate: f64, freq: f64) -> f64 {
    -(offload_energy(cfg, size, rate) + exec_energy(cfg, freq, size))
}

fn sorted(residuals: &[f64]) -> Vec<f64> {
    let mut v = residuals.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Sum of remaining completion delays of a pool with no further arrivals:
/// `Σ_i (η/f)·(n−i+1)²·(L_i − L_{i−1})` over ascending residuals.
pub fn baseline_residual_delay_sum(residuals: &[f64], freq: f64, cycles_per_bit: f64) -> f64 {
    let s = sorted(residuals);
    sorted_delay_sum(&s, cycles_per_bit / freq)
}

fn sorted_delay_sum(sorted: &[f64], secs_per_bit: f64) -> f64 {
    let n = sorted.len();
    let mut prev = 0.0;
    let mut total = 0.0;
    for (i, &l) in sorted.iter().enumerate() {
        let w = (n - i) as f64;
        total += secs_per_bit * w * w * (l - prev);
        prev = l;
    }
    total
}

/// Per-stage durations of a sorted pool: stage `i` lasts from the
/// completion of residual `i−1` to that of residual `i`.
fn stage_durations(sorted: &[f64], secs_per_bit: f64) -> Vec<f64> {
    let n = sorted.len();
    let mut prev = 0.0;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let d = secs_per_bit * (n - i) as f64 * (l - prev);
            prev = l;
            d
        })
        .collect()
}

/// Residuals still running after `elapsed` seconds of processor sharing,
/// ascending. Every surviving task has received the same service.
pub fn pool_after(residuals: &[f64], elapsed: f64, freq: f64, cycles_per_bit: f64) -> Vec<f64> {
    let s = sorted(residuals);
    let k = cycles_per_bit / freq;
    let n = s.len();
    let mut t = 0.0;
    let mut level = 0.0;
    for (i, &l) in s.iter().enumerate() {
        let w = (n - i) as f64;
        let dur = k * w * (l - level);
        if t + dur > elapsed {
            let served = level + (elapsed - t) / (k * w);
            return s[i..].iter().map(|&r| r - served).filter(|&r| r > 0.0).collect();
        }
        t += dur;
        level = l;
    }
    Vec::new()
}

/// Delay reward for sending a task of `size` bits with offload time
/// `offload_delay` to a server whose executing pool holds `residuals`.
///
/// `−T_off + Σ(n−i+1)·D_i − Σ(n−i+1)·min(D_i, max(T_off − Σ_{j<i} D_j, 0))
///  − Σ(η/f)(n'−i+1)²·ΔL'_i`, where `D_i` are the stage durations of the
/// current pool and primes refer to the pool at the task's arrival with
/// the task included.
pub fn delay_reward(
    residuals: &[f64],
    size: f64,
    offload_delay: f64,
    freq: f64,
    cycles_per_bit: f64,
) -> f64 {
    let k = cycles_per_bit / freq;
    let s = sorted(residuals);
    let n = s.len();
    let durations = stage_durations(&s, k);
    let mut before = 0.0;
    let mut during_transit = 0.0;
    let mut elapsed = 0.0;
    for (i, &d) in durations.iter().enumerate() {
        let w = (n - i) as f64;
        before += w * d;
        during_transit += w * d.min((offload_delay - elapsed).max(0.0));
        elapsed += d;
    }
    let mut after = pool_after(&s, offload_delay, freq, cycles_per_bit);
    let pos = after.partition_point(|&r| r < size);
    after.insert(pos, size);
    let after_sum = sorted_delay_sum(&after, k);
    -offload_delay + before - during_transit - after_sum
}

/// Estimated delay of the new task alone: offload time plus its
/// processor-sharing completion time in the pool it joins.
pub fn estimated_task_delay(
    residuals: &[f64],
    size: f64,
    offload_delay: f64,
    freq: f64,
    cycles_per_bit: f64,
) -> f64 {
    let k = cycles_per_bit / freq;
    let mut after = pool_after(residuals, offload_delay, freq, cycles_per_bit);
    let pos = after.partition_point(|&r| r <= size);
    after.insert(pos, size);
    let n = after.len();
    let mut prev = 0.0;
    let mut t = offload_delay;
    for (i, &l) in after.iter().enumerate().take(pos + 1) {
        t += k * (n - i) as f64 * (l - prev);
        prev = l;
    }
    t
}

/// `α_i = 1 / mean|r_i|`, each rounded to one significant figure.
pub fn scales_from_means(mean_abs_delay: f64, mean_abs_energy: f64) -> Result<RewardScales> {
    if !(mean_abs_delay > 0.0 && mean_abs_delay.is_finite()) {
        return Err(Error::Calibration(alloc::format!(
            "mean |r_T| is {mean_abs_delay}"
        )));
    }
    if !(mean_abs_energy > 0.0 && mean_abs_energy.is_finite()) {
        return Err(Error::Calibration(alloc::format!(
            "mean |r_E| is {mean_abs_energy}"
        )));
    }
    Ok(RewardScales {
        delay: math::round_sig1(1.0 / mean_abs_delay),
        energy: math::round_sig1(1.0 / mean_abs_energy),
    })
}

/// Run the uniform random scheduler for `n_episodes` and derive scales
/// from the mean absolute per-step rewards.
pub fn calibrate_scales(cfg: &SystemConfig, n_episodes: usize, seed: u64) -> Result<RewardScales> {
    if n_episodes == 0 {
        return Err(Error::Calibration("need at least one episode".into()));
    }
    let mut sum_t = 0.0;
    let mut sum_e = 0.0;
    let mut steps = 0usize;
    let mut sched = RandomScheduler::uniform(cfg.num_edge_servers);
    for i in 0..n_episodes {
        let env_seed = derive_seed(seed, Stream::Calibration, i as u64);
        let mut rng = crate::rng::stream_rng(seed, Stream::Policy, i as u64);
        let summary = run_episode(cfg, env_seed, &mut sched, &mut rng, |_, r| {
            sum_t += r.delay.abs();
            sum_e += r.energy.abs();
        })?;
        steps += summary.steps;
    }
    scales_from_means(sum_t / steps as f64, sum_e / steps as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ETA: f64 = 1e3;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn energy_examples() {
        let cfg = SystemConfig::table1(8);
        // 20 Mbit with T_off = 0.5 s means a 40 Mbit/s link.
        let edge = energy_reward(&cfg, 20e6, 40e6, 2e9);
        assert!(close(edge, -0.045), "{edge}");
        let cloud = energy_reward(&cfg, 20e6, 40e6, 4e9);
        assert!(close(cloud, -0.165), "{cloud}");
        assert_eq!(energy_reward(&cfg, 0.0, 40e6, 2e9), 0.0);
    }

    #[test]
    fn baseline_examples() {
        assert!(close(baseline_residual_delay_sum(&[3e6, 1e6], 2e9, ETA), 3.0));
        assert!(close(baseline_residual_delay_sum(&[4e6], 2e9, ETA), 2.0));
        assert_eq!(baseline_residual_delay_sum(&[], 2e9, ETA), 0.0);
    }

    #[test]
    fn delay_examples() {
        assert!(close(delay_reward(&[], 4e6, 0.5, 2e9, ETA), -2.5));
        assert!(close(delay_reward(&[2e6], 4e6, 0.0, 2e9, ETA), -4.0));
        // Transit gives the resident task 0.5 s of solo service (1 Mbit),
        // so it finishes at 1.5 s instead of 1.0 s and the new task at 3.0 s.
        assert!(close(delay_reward(&[2e6], 4e6, 0.5, 2e9, ETA), -3.5));
    }

    #[test]
    fn transit_longer_than_pool() {
        // Pool drains before arrival: only the task's own delay counts.
        let r = delay_reward(&[1e6], 2e6, 5.0, 2e9, ETA);
        assert!(close(r, -(5.0 + 1.0)), "{r}");
    }

    #[test]
    fn pool_after_shares_service() {
        let p = pool_after(&[1e6, 3e6], 0.5, 2e9, ETA);
        assert_eq!(p.len(), 2);
        assert!(close(p[0], 0.5e6) && close(p[1], 2.5e6));
        let p = pool_after(&[1e6, 3e6], 1.5, 2e9, ETA);
        assert_eq!(p.len(), 1);
        assert!(close(p[0], 1e6));
        assert!(pool_after(&[1e6, 3e6], 2.5, 2e9, ETA).is_empty());
    }

    #[test]
    fn task_delay_estimate() {
        assert!(close(estimated_task_delay(&[], 4e6, 0.5, 2e9, ETA), 2.5));
        // Shares with a 2 Mbit resident: both at 1 Mbit/s for 2 s, then alone.
        assert!(close(estimated_task_delay(&[2e6], 4e6, 0.0, 2e9, ETA), 3.0));
        assert!(close(estimated_task_delay(&[8e6], 2e6, 0.0, 2e9, ETA), 2.0));
    }

    #[test]
    fn scalarize_examples() {
        let v = VectorReward::new(-2.0, -0.05);
        let a = RewardScales::new(0.1, 10.0).unwrap();
        assert_eq!(scalarize(v, Preference::new(1.0).unwrap(), a), 0.1 * -2.0);
        assert_eq!(scalarize(v, Preference::new(0.0).unwrap(), a), 10.0 * -0.05);
        assert!(close(scalarize(v, Preference::new(0.5).unwrap(), a), -0.35));
    }

    #[test]
    fn scales_from_examples() {
        let s = scales_from_means(10.0, 0.05).unwrap();
        assert_eq!((s.delay, s.energy), (0.1, 20.0));
        let s = scales_from_means(0.3, 0.3).unwrap();
        assert_eq!(s.delay, s.energy);
        assert!(matches!(scales_from_means(0.0, 1.0), Err(Error::Calibration(_))));
    }

    #[test]
    fn calibration_is_deterministic() {
        let cfg = SystemConfig::smoke();
        let a = calibrate_scales(&cfg, 3, 11).unwrap();
        let b = calibrate_scales(&cfg, 3, 11).unwrap();
        assert_eq!(a, b);
        assert!(calibrate_scales(&cfg, 0, 11).is_err());
    }

    #[test]
    fn preference_bounds() {
        assert!(Preference::new(1.2).is_err());
        let p = Preference::new(0.25).unwrap();
        assert_eq!(p.delay + p.energy, 1.0);
    }
}
