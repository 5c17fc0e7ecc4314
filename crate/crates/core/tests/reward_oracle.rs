//! Delay reward against a direct event-driven processor-sharing simulation.

use mec_morl_core::reward::{baseline_residual_delay_sum, delay_reward, pool_after};
use proptest::prelude::*;

const MBIT: f64 = 1e6;

/// Processor sharing on one server: `jobs` are `(arrival, bits)`. Returns
/// each job's completion instant, in input order.
fn simulate_ps(jobs: &[(f64, f64)], freq: f64, eta: f64) -> Vec<f64> {
    let mut residual: Vec<f64> = jobs.iter().map(|j| j.1).collect();
    let mut arrived = vec![false; jobs.len()];
    let mut done: Vec<Option<f64>> = vec![None; jobs.len()];
    let mut t = 0.0;
    loop {
        for (i, j) in jobs.iter().enumerate() {
            if !arrived[i] && j.0 <= t {
                arrived[i] = true;
            }
        }
        let active: Vec<usize> = (0..jobs.len()).filter(|&i| arrived[i] && done[i].is_none()).collect();
        let next_arrival = jobs
            .iter()
            .enumerate()
            .filter(|(i, _)| !arrived[*i])
            .map(|(_, j)| j.0)
            .fold(f64::INFINITY, f64::min);
        if active.is_empty() {
            if next_arrival.is_infinite() {
                break;
            }
            t = next_arrival;
            continue;
        }
        let speed = freq / (active.len() as f64 * eta);
        let smallest = active.iter().map(|&i| residual[i]).fold(f64::INFINITY, f64::min);
        let to_finish = smallest / speed;
        let to_arrival = next_arrival - t;
        if to_finish <= to_arrival {
            t += to_finish;
            for &i in &active {
                if residual[i] == smallest {
                    residual[i] = 0.0;
                    done[i] = Some(t);
                } else {
                    residual[i] -= speed * to_finish;
                }
            }
        } else {
            t = next_arrival;
            for &i in &active {
                residual[i] -= speed * to_arrival;
            }
        }
    }
    done.into_iter().map(|d| d.unwrap()).collect()
}

fn total_delay(jobs: &[(f64, f64)], freq: f64, eta: f64) -> f64 {
    simulate_ps(jobs, freq, eta)
        .iter()
        .zip(jobs)
        .map(|(c, j)| c - j.0)
        .sum()
}

fn scenario() -> impl Strategy<Value = (Vec<f64>, f64, f64, f64)> {
    (
        proptest::collection::vec(0.01f64..100.0, 0..=20),
        0.01f64..100.0,
        0.0f64..1.0,
        prop_oneof![Just(2e9), Just(4e9), 1e9f64..5e9],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn delay_reward_is_minus_total_delay_increase((pool, size, t_off, freq) in scenario()) {
        let eta = 100.0;
        let pool: Vec<f64> = pool.iter().map(|r| r * MBIT).collect();
        let size = size * MBIT;
        let before: Vec<(f64, f64)> = pool.iter().map(|&r| (0.0, r)).collect();
        let mut after = before.clone();
        after.push((t_off, size));
        let oracle = -(total_delay(&after, freq, eta) + t_off - total_delay(&before, freq, eta));
        // The oracle counts the new job from its arrival; its delay also
        // includes the transmission time.
        let got = delay_reward(&pool, size, t_off, freq, eta);
        prop_assert!((got - oracle).abs() <= 1e-9 * oracle.abs().max(1e-12), "{got} vs {oracle}");
    }

    #[test]
    fn baseline_sum_matches_completions(pool in proptest::collection::vec(0.01f64..100.0, 0..=20)) {
        let eta = 100.0;
        let freq = 2e9;
        let pool: Vec<f64> = pool.iter().map(|r| r * MBIT).collect();
        let jobs: Vec<(f64, f64)> = pool.iter().map(|&r| (0.0, r)).collect();
        let sim: f64 = simulate_ps(&jobs, freq, eta).iter().sum();
        let got = baseline_residual_delay_sum(&pool, freq, eta);
        prop_assert!((got - sim).abs() <= 1e-12 * sim.max(1e-300), "{got} vs {sim}");
    }

    #[test]
    fn pool_after_conserves_service(pool in proptest::collection::vec(0.01f64..100.0, 1..=20), t in 0.0f64..2.0) {
        let eta = 100.0;
        let freq = 2e9;
        let pool: Vec<f64> = pool.iter().map(|r| r * MBIT).collect();
        let rest = pool_after(&pool, t, freq, eta);
        let served: f64 = pool.iter().sum::<f64>() - rest.iter().sum::<f64>();
        let busy_all = t * freq / eta;
        prop_assert!(served <= busy_all * (1.0 + 1e-12) + 1e-6);
        if !rest.is_empty() {
            prop_assert!((served - busy_all).abs() <= 1e-9 * busy_all.max(1.0));
        }
    }
}

#[test]
fn worked_examples() {
    let f = 2e9;
    let eta = 100.0;
    // Two tasks of 1 and 3 Mbit: completions at 0.1 s and 0.2 s.
    let v = baseline_residual_delay_sum(&[1e6, 3e6], f, eta);
    assert!((v - 0.3).abs() < 1e-12);
    let sim: f64 = simulate_ps(&[(0.0, 1e6), (0.0, 3e6)], f, eta).iter().sum();
    assert!((sim - 0.3).abs() < 1e-12);
}
