//! Comparison schedulers: LinUCB contextual bandit, a myopic weighted
//! heuristic, and a random cloud/edge split.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::error::Result;
use crate::obs::Observation;
use crate::pareto::{evaluate_policy, pareto_filter, ParetoFront, PerformancePoint};
use crate::policy::{DecisionContext, Scheduler};
use crate::reward::{
    energy_reward, estimated_task_delay, scalarize, Preference, RewardScales, VectorReward,
};
use crate::SystemConfig;

/// Disjoint LinUCB: one ridge regression per arm.
///
/// `A_e` starts at the identity and is kept as its inverse, updated with
/// Sherman–Morrison on every pull.
#[derive(Debug, Clone, PartialEq)]
pub struct LinUcb {
    dim: usize,
    exploration: f64,
    a_inv: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl LinUcb {
    pub fn new(arms: usize, dim: usize, exploration: f64) -> Self {
        let mut eye = vec![0.0; dim * dim];
        for i in 0..dim {
            eye[i * dim + i] = 1.0;
        }
        LinUcb {
            dim,
            exploration,
            a_inv: vec![eye; arms],
            b: vec![vec![0.0; dim]; arms],
        }
    }

    pub fn arms(&self) -> usize {
        self.b.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn a_inv_x(&self, arm: usize, x: &[f64]) -> Vec<f64> {
        let m = &self.a_inv[arm];
        (0..self.dim)
            .map(|i| {
                let row = &m[i * self.dim..(i + 1) * self.dim];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Ridge estimate `θ̂_e·x` with `θ̂_e = A_e⁻¹ b_e`.
    pub fn predict(&self, arm: usize, x: &[f64]) -> f64 {
        let ax = self.a_inv_x(arm, x);
        // A⁻¹ is symmetric, so θ̂·x = b·(A⁻¹x).
        self.b[arm].iter().zip(&ax).map(|(b, v)| b * v).sum()
    }

    pub fn ucb(&self, arm: usize, x: &[f64]) -> f64 {
        let ax = self.a_inv_x(arm, x);
        let mean: f64 = self.b[arm].iter().zip(&ax).map(|(b, v)| b * v).sum();
        let var: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        mean + self.exploration * crate::math::sqrt(var.max(0.0))
    }

    /// Arm with the highest upper confidence bound; ties go to the lowest
    /// index. `contexts[e]` is arm `e`'s feature vector.
    pub fn select<C: AsRef<[f64]>>(&self, contexts: &[C]) -> usize {
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for (e, x) in contexts.iter().enumerate() {
            let v = self.ucb(e, x.as_ref());
            if v > best_v {
                best_v = v;
                best = e;
            }
        }
        best
    }

    /// `A_e += x xᵀ`, `b_e += r x`.
    pub fn update(&mut self, arm: usize, x: &[f64], reward: f64) {
        let d = self.dim;
        let ax = self.a_inv_x(arm, x);
        let denom = 1.0 + x.iter().zip(&ax).map(|(a, b)| a * b).sum::<f64>();
        let m = &mut self.a_inv[arm];
        for i in 0..d {
            for j in 0..d {
                m[i * d + j] -= ax[i] * ax[j] / denom;
            }
        }
        for (b, xi) in self.b[arm].iter_mut().zip(x) {
            *b += reward * xi;
        }
    }
}

/// LinUCB over observation rows: arm `e`'s context is server `e`'s
/// normalized information vector; reward is the scalarized step reward.
#[derive(Debug, Clone)]
pub struct LinUcbScheduler {
    pub bandit: LinUcb,
    pub preference: Preference,
    pub scales: RewardScales,
    pub learn: bool,
}

impl LinUcbScheduler {
    pub fn new(cfg: &SystemConfig, exploration: f64, preference: Preference, scales: RewardScales) -> Self {
        let dim = crate::obs::SCALAR_FEATURES + cfg.histogram_bins;
        LinUcbScheduler {
            bandit: LinUcb::new(cfg.num_servers(), dim, exploration),
            preference,
            scales,
            learn: true,
        }
    }

    fn contexts(obs: &Observation) -> Vec<Vec<f64>> {
        (0..obs.rows()).map(|e| obs.normalized_row(e)).collect()
    }
}

impl Scheduler for LinUcbScheduler {
    fn select(&mut self, ctx: &DecisionContext<'_>, _rng: &mut dyn RngCore) -> usize {
        self.bandit.select(&Self::contexts(ctx.obs))
    }

    fn feedback(&mut self, obs: &Observation, action: usize, reward: VectorReward) {
        if self.learn {
            let x = obs.normalized_row(action);
            let r = scalarize(reward, self.preference, self.scales);
            self.bandit.update(action, &x, r);
        }
    }
}

/// Greedy one-step scheduler: maximizes the weighted sum of the task's
/// own estimated delay (offload plus processor-sharing completion in the
/// pool it joins) and its exact energy.
#[derive(Debug, Clone, Copy)]
pub struct HeuristicScheduler {
    pub preference: Preference,
    pub scales: RewardScales,
}

impl HeuristicScheduler {
    pub fn new(preference: Preference, scales: RewardScales) -> Self {
        HeuristicScheduler { preference, scales }
    }

    /// Per-server scores for the current decision.
    pub fn scores(&self, ctx: &DecisionContext<'_>) -> Vec<f64> {
        let st = ctx.state();
        let cfg = st.config();
        let size = st.task(ctx.env.head_task()).size;
        st.servers
            .iter()
            .enumerate()
            .map(|(e, srv)| {
                let rate = st.head_rates()[e];
                let t_off = if size == 0.0 { 0.0 } else { size / rate };
                let delay =
                    estimated_task_delay(&srv.residuals(), size, t_off, srv.freq, cfg.cycles_per_bit);
                let energy = energy_reward(cfg, size, rate, srv.freq);
                scalarize(VectorReward::new(-delay, energy), self.preference, self.scales)
            })
            .collect()
    }
}

impl Scheduler for HeuristicScheduler {
    fn select(&mut self, ctx: &DecisionContext<'_>, _rng: &mut dyn RngCore) -> usize {
        let scores = self.scores(ctx);
        let mut best = 0;
        for (e, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = e;
            }
        }
        best
    }
}

/// Cloud with probability `p_cloud`, otherwise a uniformly chosen edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomScheduler {
    pub p_cloud: f64,
    pub edges: usize,
}

impl RandomScheduler {
    pub fn new(p_cloud: f64, edges: usize) -> Self {
        debug_assert!((0.0..=1.0).contains(&p_cloud));
        RandomScheduler { p_cloud, edges }
    }

    /// Uniform over all `E + 1` servers.
    pub fn uniform(edges: usize) -> Self {
        RandomScheduler::new(1.0 / (edges + 1) as f64, edges)
    }
}

/// One draw of the random split.
pub fn random_select(p_cloud: f64, edges: usize, rng: &mut dyn RngCore) -> usize {
    if edges == 0 || rng.random::<f64>() < p_cloud {
        0
    } else {
        1 + rng.random_range(0..edges)
    }
}

impl Scheduler for RandomScheduler {
    fn select(&mut self, _ctx: &DecisionContext<'_>, rng: &mut dyn RngCore) -> usize {
        random_select(self.p_cloud, self.edges, rng)
    }
}

/// Evaluate the random split at every `p` in `grid`; returns the evaluated
/// points (in grid order) and their Pareto front.
pub fn random_front(
    cfg: &SystemConfig,
    grid: &[f64],
    n_episodes: usize,
    seed: u64,
) -> Result<(Vec<PerformancePoint>, ParetoFront)> {
    let mut points = Vec::with_capacity(grid.len());
    for &p in grid {
        let mut s = RandomScheduler::new(p, cfg.num_edge_servers);
        points.push(evaluate_policy(cfg, &mut s, n_episodes, seed)?);
    }
    let front = pareto_filter(&points);
    Ok((points, front))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use crate::sim::OffloadEnv;

    #[test]
    fn untouched_arms_tie_to_lowest_index() {
        let b = LinUcb::new(4, 3, 1.0);
        let x = [0.3, 1.0, -0.2];
        assert_eq!(b.select(&[x, x, x, x]), 0);
    }

    #[test]
    fn ridge_prefers_zero_reward_arm() {
        // One-dimensional ridge oracle: after n pulls with reward r and
        // x ≡ 1, θ̂ = n·r / (1 + n).
        let mut b = LinUcb::new(2, 1, 1.0);
        for _ in 0..200 {
            b.update(0, &[1.0], 0.0);
            b.update(1, &[1.0], -1.0);
        }
        assert!((b.predict(1, &[1.0]) - (-200.0 / 201.0)).abs() < 1e-12);
        assert_eq!(b.predict(0, &[1.0]), 0.0);
        assert_eq!(b.select(&[[1.0], [1.0]]), 0);
    }

    #[test]
    fn update_moves_prediction_toward_reward() {
        let mut b = LinUcb::new(1, 2, 0.5);
        let x = [1.0, 0.5];
        let before = b.predict(0, &x);
        b.update(0, &x, 3.0);
        let after = b.predict(0, &x);
        assert!(after > before && after < 3.0);
    }

    #[test]
    fn zero_exploration_is_ridge_argmax() {
        // Synthetic linear rewards; the oracle solves (I + XᵀX)θ = Xᵀy directly.
        let mut rng = stream_rng(1, Stream::Baseline, 0);
        let truth = [[0.5, -1.0], [-0.2, 0.8]];
        let mut b = LinUcb::new(2, 2, 0.0);
        let mut xs: [Vec<[f64; 2]>; 2] = [Vec::new(), Vec::new()];
        let mut ys: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for i in 0..60 {
            let arm = i % 2;
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let y = truth[arm][0] * x[0] + truth[arm][1] * x[1];
            b.update(arm, &x, y);
            xs[arm].push(x);
            ys[arm].push(y);
        }
        let solve = |arm: usize| {
            let mut a = [[1.0, 0.0], [0.0, 1.0]];
            let mut r = [0.0, 0.0];
            for (x, y) in xs[arm].iter().zip(&ys[arm]) {
                for i in 0..2 {
                    for j in 0..2 {
                        a[i][j] += x[i] * x[j];
                    }
                    r[i] += y * x[i];
                }
            }
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            [
                (a[1][1] * r[0] - a[0][1] * r[1]) / det,
                (a[0][0] * r[1] - a[1][0] * r[0]) / det,
            ]
        };
        for _ in 0..20 {
            let ctx = [[rng.random::<f64>(), rng.random::<f64>()], [rng.random::<f64>(), rng.random::<f64>()]];
            let pred: Vec<f64> = (0..2)
                .map(|arm| {
                    let th = solve(arm);
                    th[0] * ctx[arm][0] + th[1] * ctx[arm][1]
                })
                .collect();
            let expect = if pred[1] > pred[0] { 1 } else { 0 };
            assert_eq!(b.select(&ctx), expect);
            for arm in 0..2 {
                assert!((b.predict(arm, &ctx[arm]) - pred[arm]).abs() < 1e-9);
            }
        }
    }

    fn idle_ctx_env(cfg: &SystemConfig, seed: u64) -> OffloadEnv {
        OffloadEnv::new(cfg, seed).unwrap()
    }

    #[test]
    fn heuristic_energy_only_picks_edge() {
        let cfg = SystemConfig::table1(3);
        let env = idle_ctx_env(&cfg, 4);
        let obs = env.observation();
        let ctx = DecisionContext { env: &env, obs: &obs };
        let mut h = HeuristicScheduler::new(Preference::new(0.0).unwrap(), RewardScales::default());
        let mut rng = stream_rng(0, Stream::Policy, 0);
        assert_ne!(h.select(&ctx, &mut rng), 0);
    }

    #[test]
    fn heuristic_delay_only_picks_cloud_on_equal_rates() {
        let cfg = SystemConfig::table1(3);
        let mut env = idle_ctx_env(&cfg, 4);
        // Bandwidth so large that offload time is negligible: only the CPU matters.
        let _ = &mut env;
        let mut cfg2 = cfg.clone();
        cfg2.bandwidth = 1e15;
        let env = idle_ctx_env(&cfg2, 4);
        let obs = env.observation();
        let ctx = DecisionContext { env: &env, obs: &obs };
        let mut h = HeuristicScheduler::new(Preference::new(1.0).unwrap(), RewardScales::default());
        let mut rng = stream_rng(0, Stream::Policy, 0);
        assert_eq!(h.select(&ctx, &mut rng), 0);
        let s1 = h.scores(&ctx);
        assert_eq!(s1, h.scores(&ctx));
    }

    #[test]
    fn heuristic_avoids_overloaded_edge() {
        let mut cfg = SystemConfig::table1(2);
        cfg.bandwidth = 1e15;
        cfg.cloud_freq = 2e9;
        let mut st = crate::sim::init_episode(&cfg, 0).unwrap();
        st.test_insert_pool(0, &[50e6; 5]);
        st.test_insert_pool(1, &[50e6; 5]);
        let env = OffloadEnv::from_state(st).unwrap();
        let obs = env.observation();
        let ctx = DecisionContext { env: &env, obs: &obs };
        let mut h = HeuristicScheduler::new(Preference::new(1.0).unwrap(), RewardScales::default());
        let mut rng = stream_rng(0, Stream::Policy, 0);
        assert_eq!(h.select(&ctx, &mut rng), 2);
    }

    #[test]
    fn random_split_frequencies() {
        let mut rng = stream_rng(3, Stream::Baseline, 0);
        for _ in 0..1000 {
            assert_eq!(random_select(1.0, 4, &mut rng), 0);
        }
        let n = 10_000;
        let mut counts = [0usize; 5];
        for _ in 0..n {
            counts[random_select(0.0, 4, &mut rng)] += 1;
        }
        assert_eq!(counts[0], 0);
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for &c in &counts[1..] {
            assert!((c as f64 - n as f64 / 4.0).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn random_front_pipeline() {
        let cfg = SystemConfig::smoke();
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let (points, front) = random_front(&cfg, &grid, 3, 5).unwrap();
        assert_eq!(points.len(), 5);
        assert!(!front.is_empty() && front.len() <= 5);
    }
}
