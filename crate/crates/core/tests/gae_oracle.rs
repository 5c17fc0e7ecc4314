use mec_morl_core::train::gae;
use proptest::prelude::*;

/// `Â(t) = Σ_{l=0}^{T−t−1} (γλ)^l · δ(t+l)` evaluated term by term.
fn brute_force(r: &[f64], v: &[f64], gamma: f64, lambda: f64) -> Vec<f64> {
    let n = r.len();
    (0..n)
        .map(|t| {
            (t..n)
                .map(|k| {
                    let delta = r[k] + gamma * v[k + 1] - v[k];
                    (gamma * lambda).powi((k - t) as i32) * delta
                })
                .sum()
        })
        .collect()
}

fn episode() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64, f64)> {
    (1usize..=100).prop_flat_map(|n| {
        (
            proptest::collection::vec(-5.0f64..5.0, n),
            proptest::collection::vec(-5.0f64..5.0, n),
            0.0f64..0.999,
            0.0f64..=1.0,
        )
            .prop_map(|(r, mut v, g, l)| {
                v.push(0.0);
                (r, v, g, l)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn recursion_matches_double_sum((r, v, g, l) in episode()) {
        let a = gae(&r, &v, g, l);
        let b = brute_force(&r, &v, g, l);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn lambda_one_gives_discounted_return_minus_value((r, v, g, _l) in episode()) {
        let a = gae(&r, &v, g, 1.0);
        for t in 0..r.len() {
            let ret: f64 = (t..r.len()).map(|k| g.powi((k - t) as i32) * r[k]).sum();
            prop_assert!((a[t] - (ret - v[t])).abs() <= 1e-9);
        }
    }
}
