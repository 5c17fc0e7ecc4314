use mec_morl_core::nn::{gradient, Adam, Cache, Network};
use mec_morl_core::reward::{Objective, Preference, RewardScales};
use mec_morl_core::rng::{derive_seed, stream_rng, Stream};
use mec_morl_core::train::{
    clipped_surrogate, collect_rollouts, ppo_update, ppo_update_scalar, sweep_preferences, train_preference,
    update_with_advantages, PpoLoss, RolloutBuffer, TrainConfig,
};
use mec_morl_core::{Error, SystemConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tiny_cfg() -> (SystemConfig, TrainConfig, Network) {
    let mut cfg = SystemConfig::smoke();
    cfg.steps_per_episode = 20;
    cfg.histogram_bins = 8;
    let mut t = TrainConfig::smoke();
    t.arch = mec_morl_core::nn::Architecture {
        encoder: 8,
        trunk: 16,
        blocks: 1,
    };
    t.episodes = 6;
    t.episodes_per_update = 3;
    t.batch = 16;
    let net = Network::init(cfg.num_edge_servers, cfg.histogram_bins, t.arch, 3).unwrap();
    (cfg, t, net)
}

fn rollout(net: &Network, cfg: &SystemConfig, steps: usize, seed: u64) -> RolloutBuffer {
    let mut buf = RolloutBuffer::new(100_000);
    let mut rng = stream_rng(seed, Stream::Policy, 0);
    collect_rollouts(net, cfg, steps, seed, 0, &mut rng, &mut buf).unwrap();
    buf
}

#[test]
fn one_horizon_of_steps_is_one_episode() {
    let (cfg, _, net) = tiny_cfg();
    let buf = rollout(&net, &cfg, cfg.steps_per_episode, 1);
    assert_eq!(buf.len(), cfg.steps_per_episode);
    assert_eq!(buf.episodes().len(), 1);
    assert!(buf.records().last().unwrap().done);
    assert!(buf.next_obs(buf.len() - 1).is_none());
    assert_eq!(buf.next_obs(0), Some(buf.records()[1].obs.as_slice()));
}

#[test]
fn rollouts_are_reproducible() {
    let (cfg, _, net) = tiny_cfg();
    assert_eq!(rollout(&net, &cfg, 60, 4), rollout(&net, &cfg, 60, 4));
    assert_ne!(rollout(&net, &cfg, 60, 4), rollout(&net, &cfg, 60, 5));
}

#[test]
fn behavior_log_probs_match_policy_and_ratio_is_one() {
    let (cfg, t, net) = tiny_cfg();
    let buf = rollout(&net, &cfg, 40, 2);
    let mut c = Cache::new(net.layout());
    for r in buf.records() {
        net.forward(&r.obs, &mut c).unwrap();
        let ratio = (c.log_probs[r.action] - r.log_prob).exp();
        assert_eq!(ratio, 1.0);
        for a in [-1.0, 0.3, 2.0] {
            let (s, clipped) = clipped_surrogate(ratio, a, t.clip);
            assert_eq!(s, a);
            assert!(!clipped);
        }
    }
}

#[test]
fn uniform_policy_picks_cloud_half_the_time_with_one_edge() {
    let mut cfg = SystemConfig::smoke();
    cfg.num_edge_servers = 1;
    cfg.poisson_rate = 1.0 / cfg.num_users as f64;
    let t = TrainConfig::smoke();
    let net = Network::init(1, cfg.histogram_bins, t.arch, 0).unwrap();
    let buf = rollout(&net, &cfg, 10_000, 9);
    let n = buf.len() as f64;
    let cloud = buf.records().iter().filter(|r| r.action == 0).count() as f64;
    let sigma = (n * 0.25).sqrt();
    assert!((cloud - n / 2.0).abs() < 3.0 * sigma, "{cloud} of {n}");
}

#[test]
fn zero_episodes_leave_parameters_unchanged() {
    let (cfg, mut t, net) = tiny_cfg();
    t.episodes = 0;
    let p = train_preference(&cfg, &t, Preference::new(0.5).unwrap(), RewardScales::default(), &net, 1).unwrap();
    assert_eq!(p.network, net);
    assert!(p.curve.is_empty());
}

#[test]
fn one_curve_point_per_update_and_bit_reproducible() {
    let (cfg, t, net) = tiny_cfg();
    let pref = Preference::new(0.3).unwrap();
    let a = train_preference(&cfg, &t, pref, RewardScales::default(), &net, 5).unwrap();
    let b = train_preference(&cfg, &t, pref, RewardScales::default(), &net, 5).unwrap();
    assert_eq!(a.curve.len(), 2);
    assert_eq!(a.curve[1].episodes_seen, 6);
    assert_eq!(a, b);
    assert_ne!(a.network, net);
}

#[test]
fn delay_only_preference_equals_single_objective_ppo() {
    let (cfg, t, net) = tiny_cfg();
    let buf = rollout(&net, &cfg, 60, 8);
    let scales = RewardScales::default();
    let mut a = net.clone();
    let mut b = net.clone();
    let mut oa = Adam::new(net.params().len(), t.learning_rate);
    let mut ob = oa.clone();
    let pref = Preference::new(1.0).unwrap();
    ppo_update(&mut a, &mut oa, &buf, pref, scales, &t, &mut stream_rng(1, Stream::Shuffle, 0)).unwrap();
    ppo_update_scalar(&mut b, &mut ob, &buf, Objective::Delay, scales, &t, &mut stream_rng(1, Stream::Shuffle, 0))
        .unwrap();
    assert!(a.params().iter().zip(b.params()).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_ne!(a, net);
}

#[test]
fn combined_surrogate_gradient_is_preference_mix_of_objective_gradients() {
    let (cfg, _, net) = tiny_cfg();
    let t = TrainConfig {
        value_coef: 0.0,
        entropy_coef: 0.0,
        normalize_advantages: false,
        ..TrainConfig::smoke()
    };
    let buf = rollout(&net, &cfg, 40, 3);
    // Move away from θ_old so some ratios leave the clip interval.
    let mut moved = net.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for p in moved.params_mut() {
        *p += rng.random_range(-0.5..0.5);
    }
    let n = buf.len();
    // Same sign per sample keeps the clipping decision shared.
    let (mut at, mut ae) = (vec![], vec![]);
    for _ in 0..n {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        at.push(s * rng.random_range(0.1..2.0));
        ae.push(s * rng.random_range(0.1..2.0));
    }
    let obs: Vec<&[f64]> = buf.records().iter().map(|r| r.obs.as_slice()).collect();
    let acts: Vec<usize> = buf.records().iter().map(|r| r.action).collect();
    let old: Vec<f64> = buf.records().iter().map(|r| r.log_prob).collect();
    let ret = vec![[0.0; 2]; n];
    let grad = |adv: &[f64]| gradient(&moved, &obs, &PpoLoss::new(&acts, &old, adv, &ret, &t)).unwrap().1;
    let (wt, we) = (0.3, 0.7);
    let comb: Vec<f64> = at.iter().zip(&ae).map(|(x, y)| wt * x + we * y).collect();
    let gc = grad(&comb);
    let gt = grad(&at);
    let ge = grad(&ae);
    let mut clipped = 0;
    let mut c = Cache::new(moved.layout());
    for i in 0..n {
        moved.forward(obs[i], &mut c).unwrap();
        let r = (c.log_probs[acts[i]] - old[i]).exp();
        clipped += usize::from(clipped_surrogate(r, comb[i], t.clip).1);
    }
    assert!(clipped > 0 && clipped < n, "want a mix of clipped samples, got {clipped}/{n}");
    for i in 0..gc.len() {
        assert!((gc[i] - (wt * gt[i] + we * ge[i])).abs() <= 1e-8, "param {i}");
    }
}

#[test]
fn positive_advantage_raises_probability_of_that_action() {
    let (cfg, _, net) = tiny_cfg();
    let t = TrainConfig {
        clip: f64::INFINITY,
        epochs: 1,
        normalize_advantages: false,
        value_coef: 0.0,
        entropy_coef: 0.0,
        batch: 1000,
        ..TrainConfig::smoke()
    };
    let full = rollout(&net, &cfg, 40, 6);
    let mut buf = RolloutBuffer::new(1000);
    for r in full.records().iter().filter(|r| r.action == 1) {
        buf.push(r.clone()).unwrap();
    }
    assert!(!buf.is_empty());
    let mut after = net.clone();
    let mut opt = Adam::new(net.params().len(), 1e-3);
    let adv = vec![1.0; buf.len()];
    let ret = vec![[0.0; 2]; buf.len()];
    update_with_advantages(&mut after, &mut opt, &buf, &adv, &ret, &t, &mut stream_rng(0, Stream::Shuffle, 0)).unwrap();
    for r in buf.records() {
        let p0 = net.forward_policy(&r.obs).unwrap().probs[1];
        let p1 = after.forward_policy(&r.obs).unwrap().probs[1];
        assert!(p1 > p0, "{p1} <= {p0}");
    }
}

#[test]
fn non_finite_loss_aborts_and_restores() {
    let (cfg, t, net) = tiny_cfg();
    let mut buf = rollout(&net, &cfg, 20, 1);
    let mut records: Vec<_> = buf.records().to_vec();
    records[3].reward.delay = f64::NAN;
    buf.clear();
    for r in records {
        buf.push(r).unwrap();
    }
    let mut after = net.clone();
    let mut opt = Adam::new(net.params().len(), t.learning_rate);
    let before_opt = opt.clone();
    let err = ppo_update(
        &mut after,
        &mut opt,
        &buf,
        Preference::new(0.5).unwrap(),
        RewardScales::default(),
        &t,
        &mut stream_rng(0, Stream::Shuffle, 0),
    )
    .unwrap_err();
    assert!(matches!(err, Error::NonFinite { .. }), "{err:?}");
    assert_eq!(after, net);
    assert_eq!(opt, before_opt);
}

#[test]
fn full_buffer_is_an_error() {
    let (cfg, _, net) = tiny_cfg();
    let mut buf = RolloutBuffer::new(10);
    let mut rng = stream_rng(0, Stream::Policy, 0);
    let err = collect_rollouts(&net, &cfg, 20, 0, 0, &mut rng, &mut buf).unwrap_err();
    assert_eq!(err, Error::BufferFull(10));
}

#[test]
fn single_preference_sweep_equals_train_preference() {
    let (cfg, t, net) = tiny_cfg();
    let pref = Preference::new(0.4).unwrap();
    let s = sweep_preferences(&cfg, &t, &[pref], RewardScales::default(), &net, 3, 21, |_, _| {}).unwrap();
    let direct = train_preference(&cfg, &t, pref, RewardScales::default(), &net, derive_seed(21, Stream::Policy, 0)).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].outcome.as_ref().unwrap(), &direct);
}

#[test]
fn sweep_warm_starts_from_previous_preference() {
    let (cfg, t, net) = tiny_cfg();
    let grid = [Preference::new(0.2).unwrap(), Preference::new(0.8).unwrap()];
    let s = sweep_preferences(&cfg, &t, &grid, RewardScales::default(), &net, 0, 2, |_, _| {}).unwrap();
    let first = &s[0].outcome.as_ref().unwrap().network;
    let second = &s[1].outcome.as_ref().unwrap().network;
    assert_eq!(first, second);
    assert_ne!(first, &net);
}

#[test]
fn sweep_records_failures_and_continues() {
    let (cfg, mut t, net) = tiny_cfg();
    t.capacity = 5;
    let grid = [Preference::new(0.2).unwrap(), Preference::new(0.8).unwrap()];
    let mut calls = 0;
    let s = sweep_preferences(&cfg, &t, &grid, RewardScales::default(), &net, 3, 2, |_, _| calls += 1).unwrap();
    assert_eq!(calls, 2);
    assert!(s.iter().all(|e| e.outcome.is_err()));
    let unsorted = [grid[1], grid[0]];
    assert!(sweep_preferences(&cfg, &t, &unsorted, RewardScales::default(), &net, 3, 2, |_, _| {}).is_err());
}
