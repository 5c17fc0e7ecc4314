//! Small statistics helpers for evaluation and acceptance checks.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    math::sqrt(ss / (xs.len() - 1) as f64)
}

pub fn std_error(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    sample_std(xs) / math::sqrt(xs.len() as f64)
}

/// Standard normal quantile (Acklam's rational approximation, |rel err| < 1.2e-9).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let plow = 0.02425;
    if p < plow {
        let q = math::sqrt(-2.0 * math::ln(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// Student-t quantile via the Cornish–Fisher expansion around the normal.
pub fn t_quantile(p: f64, dof: f64) -> f64 {
    let z = normal_quantile(p);
    let z3 = z * z * z;
    let z5 = z3 * z * z;
    let z7 = z5 * z * z;
    z + (z3 + z) / (4.0 * dof)
        + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * dof * dof)
        + (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / (384.0 * dof * dof * dof)
}

/// One-sided lower confidence bound on the mean of `xs` at `level`.
pub fn lower_confidence_bound(xs: &[f64], level: f64) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    mean(xs) - t_quantile(level, (n - 1) as f64) * std_error(xs)
}

/// Average ranks (1-based), ties sharing their mean rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / math::sqrt(sxx * syy)
}

/// Spearman rank correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

/// Exact one-sided permutation p-value for Spearman's ρ: the fraction of
/// orderings of `y` whose correlation with `x` is at least as extreme in
/// the direction of `sign` (+1 for positive, −1 for negative association).
/// Enumerates all n! permutations, so n is capped at 9.
pub fn spearman_exact_p(x: &[f64], y: &[f64], sign: f64) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 || n > 9 {
        return None;
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let observed = sign * pearson(&rx, &ry);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut hits = 0usize;
    let mut total = 0usize;
    // Heap's algorithm.
    let mut c = vec![0usize; n];
    let mut eval = |perm: &[usize]| {
        let py: Vec<f64> = perm.iter().map(|&i| ry[i]).collect();
        if sign * pearson(&rx, &py) >= observed - 1e-12 {
            hits += 1;
        }
        total += 1;
    };
    eval(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            eval(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Some(hits as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        assert!((normal_quantile(0.975) - 1.959963985).abs() < 1e-8);
        assert!((normal_quantile(0.95) - 1.644853627).abs() < 1e-8);
        // Tabulated t_{0.95}: 10 dof 1.812461, 199 dof 1.652547.
        assert!((t_quantile(0.95, 10.0) - 1.812461).abs() < 2e-3);
        assert!((t_quantile(0.95, 199.0) - 1.652547).abs() < 1e-5);
    }

    #[test]
    fn spearman_basics() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((spearman(&x, &[2.0, 4.0, 6.0, 8.0, 20.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert_eq!(ranks(&[3.0, 1.0, 3.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn exact_p_values_for_five() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        // Perfect order: 1 of 120 permutations.
        let p = spearman_exact_p(&x, &[1.0, 2.0, 3.0, 4.0, 5.0], 1.0).unwrap();
        assert!((p - 1.0 / 120.0).abs() < 1e-12);
        // One adjacent swap: ρ = 0.9, reached by 5 of 120.
        let p = spearman_exact_p(&x, &[2.0, 1.0, 3.0, 4.0, 5.0], 1.0).unwrap();
        assert!((p - 5.0 / 120.0).abs() < 1e-12);
        let p = spearman_exact_p(&x, &[5.0, 4.0, 3.0, 2.0, 1.0], -1.0).unwrap();
        assert!((p - 1.0 / 120.0).abs() < 1e-12);
    }

    #[test]
    fn std_error_of_constant_is_zero() {
        assert_eq!(std_error(&[2.0, 2.0, 2.0]), 0.0);
        assert_eq!(std_error(&[2.0]), 0.0);
    }
}
