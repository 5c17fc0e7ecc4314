//! Performance points, Pareto filtering and two-objective hypervolume.
//!
//! Both objectives are costs (total delay, total energy): lower is better.

use alloc::vec::Vec;

use crate::error::Result;
use crate::policy::{run_episode, EpisodeSummary, Scheduler};
use crate::rng::{derive_seed, stream_rng, Stream};
use crate::stats;
use crate::SystemConfig;

/// Mean episode totals of one policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformancePoint {
    /// Seconds.
    pub delay: f64,
    /// Joules.
    pub energy: f64,
    pub stderr_delay: f64,
    pub stderr_energy: f64,
    pub n_episodes: usize,
}

impl PerformancePoint {
    pub fn new(delay: f64, energy: f64) -> Self {
        PerformancePoint {
            delay,
            energy,
            stderr_delay: 0.0,
            stderr_energy: 0.0,
            n_episodes: 1,
        }
    }

    /// Divide both axes (and their errors) by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        PerformancePoint {
            delay: self.delay / c,
            energy: self.energy / c,
            stderr_delay: self.stderr_delay / c,
            stderr_energy: self.stderr_energy / c,
            n_episodes: self.n_episodes,
        }
    }
}

/// `a` is no worse than `b` in both objectives and strictly better in one.
pub fn dominates(a: &PerformancePoint, b: &PerformancePoint) -> bool {
    a.delay <= b.delay && a.energy <= b.energy && (a.delay < b.delay || a.energy < b.energy)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontMember {
    /// Position in the filtered input.
    pub index: usize,
    pub point: PerformancePoint,
}

/// Undominated members sorted by delay ascending (energy descending).
/// Duplicate points are all kept.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParetoFront {
    pub members: Vec<FrontMember>,
}

impl ParetoFront {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn points(&self) -> Vec<PerformancePoint> {
        self.members.iter().map(|m| m.point).collect()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.index).collect()
    }
}

fn by_delay_then_energy(points: &[PerformancePoint]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a]
            .delay
            .total_cmp(&points[b].delay)
            .then(points[a].energy.total_cmp(&points[b].energy))
            .then(a.cmp(&b))
    });
    idx
}

/// Keep exactly the undominated points. O(n log n) sweep.
pub fn pareto_filter(points: &[PerformancePoint]) -> ParetoFront {
    let mut members: Vec<FrontMember> = Vec::new();
    let mut best_energy = f64::INFINITY;
    for i in by_delay_then_energy(points) {
        let p = points[i];
        let duplicate = members
            .last()
            .is_some_and(|m| m.point.delay == p.delay && m.point.energy == p.energy);
        if p.energy < best_energy || duplicate {
            best_energy = best_energy.min(p.energy);
            members.push(FrontMember { index: i, point: p });
        }
    }
    ParetoFront { members }
}

/// Area dominated by `points` and bounded by `reference` (delay, energy).
///
/// Sweeps points in delay order and adds one horizontal slab per new
/// energy minimum. Points outside the reference box, and duplicates,
/// contribute nothing.
pub fn hypervolume(points: &[PerformancePoint], reference: (f64, f64)) -> f64 {
    let (rd, re) = reference;
    let mut area = 0.0;
    let mut ceiling = re;
    for i in by_delay_then_energy(points) {
        let p = points[i];
        if p.delay >= rd || p.energy >= ceiling {
            continue;
        }
        area += (rd - p.delay) * (ceiling - p.energy);
        ceiling = p.energy;
    }
    area
}

/// Component-wise maximum over every point of every set.
pub fn reference_corner(sets: &[&[PerformancePoint]]) -> (f64, f64) {
    let mut d = f64::NEG_INFINITY;
    let mut e = f64::NEG_INFINITY;
    for p in sets.iter().flat_map(|s| s.iter()) {
        d = d.max(p.delay);
        e = e.max(p.energy);
    }
    (d, e)
}

/// `(a − b) / b`; `None` when `b` is zero.
pub fn relative_gain(a: f64, b: f64) -> Option<f64> {
    if b == 0.0 {
        None
    } else {
        Some((a - b) / b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub reference: (f64, f64),
    pub hypervolumes: Vec<f64>,
    /// `gains[i][j]` is scheme `i`'s relative hypervolume gain over `j`.
    pub gains: Vec<Vec<Option<f64>>>,
}

/// Hypervolumes of several schemes against a shared max-corner reference.
pub fn compare_fronts(schemes: &[&[PerformancePoint]]) -> Comparison {
    let reference = reference_corner(schemes);
    let hypervolumes: Vec<f64> = schemes.iter().map(|s| hypervolume(s, reference)).collect();
    let gains = hypervolumes
        .iter()
        .map(|&a| hypervolumes.iter().map(|&b| relative_gain(a, b)).collect())
        .collect();
    Comparison {
        reference,
        hypervolumes,
        gains,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub point: PerformancePoint,
    pub episodes: Vec<EpisodeSummary>,
}

/// Run `n_episodes` seeded episodes; episode `i` uses environment seed
/// `derive(seed, Evaluation, i)` regardless of the scheduler, so different
/// schedulers evaluated with the same seed are paired.
pub fn evaluate(
    cfg: &SystemConfig,
    scheduler: &mut dyn Scheduler,
    n_episodes: usize,
    seed: u64,
) -> Result<Evaluation> {
    let mut episodes = Vec::with_capacity(n_episodes);
    for i in 0..n_episodes {
        let env_seed = derive_seed(seed, Stream::Evaluation, i as u64);
        let mut rng = stream_rng(seed, Stream::Policy, i as u64);
        episodes.push(run_episode(cfg, env_seed, scheduler, &mut rng, |_, _| {})?);
    }
    let delays: Vec<f64> = episodes.iter().map(|e| e.total_delay).collect();
    let energies: Vec<f64> = episodes.iter().map(|e| e.total_energy).collect();
    let point = PerformancePoint {
        delay: stats::mean(&delays),
        energy: stats::mean(&energies),
        stderr_delay: stats::std_error(&delays),
        stderr_energy: stats::std_error(&energies),
        n_episodes,
    };
    Ok(Evaluation { point, episodes })
}

pub fn evaluate_policy(
    cfg: &SystemConfig,
    scheduler: &mut dyn Scheduler,
    n_episodes: usize,
    seed: u64,
) -> Result<PerformancePoint> {
    Ok(evaluate(cfg, scheduler, n_episodes, seed)?.point)
}
