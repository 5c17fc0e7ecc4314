use alloc::vec::Vec;

use super::{train_preference, PolicyProfile, TrainConfig};
use crate::error::{Error, Result};
use crate::math;
use crate::nn::Network;
use crate::reward::{Preference, RewardScales};
use crate::rng::{derive_seed, Stream};
use crate::SystemConfig;

/// `ω_T = kδ` for `k = 1..=round(1/δ)`.
pub fn preference_grid(interval: f64) -> Result<Vec<Preference>> {
    if !(interval > 0.0 && interval <= 1.0) {
        return Err(Error::config("preference interval must lie in (0, 1]"));
    }
    let n = math::round(1.0 / interval) as usize;
    (1..=n).map(|k| Preference::new((k as f64 * interval).min(1.0))).collect()
}

/// `k` preferences evenly spaced over `[0, 1]`, endpoints included.
pub fn evenly_spaced(k: usize) -> Result<Vec<Preference>> {
    match k {
        0 => Ok(Vec::new()),
        1 => Ok(alloc::vec![Preference::new(0.5)?]),
        _ => (0..k).map(|i| Preference::new(i as f64 / (k - 1) as f64)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub preference: Preference,
    pub outcome: Result<PolicyProfile>,
}

/// Train every preference in order, warm-starting each from the most recent
/// successful one. The first uses `first_episodes`, later ones
/// `rest_episodes`. Failures are recorded and the sweep continues.
pub fn sweep_preferences(
    cfg: &SystemConfig,
    tcfg: &TrainConfig,
    grid: &[Preference],
    scales: RewardScales,
    init: &Network,
    rest_episodes: usize,
    seed: u64,
    mut on_done: impl FnMut(usize, &SweepEntry),
) -> Result<Vec<SweepEntry>> {
    if grid.windows(2).any(|w| w[0].delay > w[1].delay) {
        return Err(Error::config("preference grid must be sorted by delay weight"));
    }
    let mut out: Vec<SweepEntry> = Vec::with_capacity(grid.len());
    let mut last: Option<Network> = None;
    for (k, &pref) in grid.iter().enumerate() {
        let start = last.as_ref().unwrap_or(init);
        let mut t = tcfg.clone();
        if k > 0 {
            t.episodes = rest_episodes;
        }
        let outcome = train_preference(cfg, &t, pref, scales, start, derive_seed(seed, Stream::Policy, k as u64));
        if let Ok(p) = &outcome {
            last = Some(p.network.clone());
        }
        let entry = SweepEntry { preference: pref, outcome };
        on_done(k, &entry);
        out.push(entry);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let g = preference_grid(0.02).unwrap();
        assert_eq!(g.len(), 50);
        assert!((g[0].delay - 0.02).abs() < 1e-15);
        assert_eq!(g[49].delay, 1.0);
        assert_eq!(preference_grid(0.25).unwrap().len(), 4);
        assert!(preference_grid(0.0).is_err());
        let e = evenly_spaced(5).unwrap();
        let w: Vec<f64> = e.iter().map(|p| p.delay).collect();
        assert_eq!(w, alloc::vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
