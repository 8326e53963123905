//! Two-sided Mann-Whitney U test with midranks for ties.
//!
//! Small samples (min(n, m) <= 8) get an exact permutation p-value by
//! enumerating all C(n+m, n) rank assignments; larger samples use the
//! normal approximation with tie-corrected variance and continuity
//! correction. The exact branch doubles as the oracle for the
//! approximation in the test suite.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

/// Which p-value computation to use. `Auto` follows the sample-size rule;
/// the explicit variants exist so the two branches can be cross-checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PValueMethod {
    Auto,
    Exact,
    NormalApprox,
}

/// U statistic of the first sample and the two-sided p-value.
///
/// `U_a + U_b == n * m` and the p-value is symmetric in the arguments.
/// If every value in both samples is identical the test is degenerate and
/// p is reported as 1.0.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    mann_whitney_u_with(a, b, PValueMethod::Auto)
}

pub fn mann_whitney_u_with(a: &[f64], b: &[f64], method: PValueMethod) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Parameter("mann_whitney_u: both samples must be non-empty".into()));
    }
    if !a.iter().chain(b).all(|x| x.is_finite()) {
        return Err(Error::Parameter("mann_whitney_u: samples must be finite".into()));
    }
    let (n, m) = (a.len(), b.len());
    let ranks = midranks(a, b);
    let rank_sum_a: f64 = ranks[..n].iter().sum();
    let u_a = rank_sum_a - (n * (n + 1)) as f64 / 2.0;

    let p = match method {
        PValueMethod::Exact => exact_p(&ranks, n, u_a),
        PValueMethod::NormalApprox => approx_p(&ranks, n, m, u_a),
        PValueMethod::Auto => {
            if n.min(m) > 8 {
                approx_p(&ranks, n, m, u_a)
            } else {
                exact_p(&ranks, n, u_a)
            }
        }
    };
    Ok((u_a, p))
}

/// Midranks of the pooled sample, first `a` then `b`.
fn midranks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].partial_cmp(&pooled[j]).expect("finite values"));
    let mut ranks = vec![0.0; pooled.len()];
    let mut pos = 0;
    while pos < order.len() {
        let mut end = pos;
        while end + 1 < order.len() && pooled[order[end + 1]] == pooled[order[pos]] {
            end += 1;
        }
        // Positions pos..=end share the average of ranks pos+1..=end+1.
        let mid = (pos + 1 + end + 1) as f64 / 2.0;
        for &idx in &order[pos..=end] {
            ranks[idx] = mid;
        }
        pos = end + 1;
    }
    ranks
}

/// Exact two-sided permutation p-value: the fraction of all C(n+m, n)
/// assignments whose U deviates from n*m/2 at least as much as observed.
fn exact_p(ranks: &[f64], n: usize, u_obs: f64) -> f64 {
    let total = ranks.len();
    let m = total - n;
    let center = (n * m) as f64 / 2.0;
    let observed_dev = (u_obs - center).abs();
    let offset = (n * (n + 1)) as f64 / 2.0;

    let mut hits = 0u64;
    let mut count = 0u64;
    // Lexicographic enumeration of all size-n index subsets.
    let mut combo: Vec<usize> = (0..n).collect();
    loop {
        let rank_sum: f64 = combo.iter().map(|&i| ranks[i]).sum();
        let u = rank_sum - offset;
        // Tolerance absorbs midrank rounding (sums of halves are exact in
        // f64, so equality comparisons are safe; keep a hair of slack).
        if (u - center).abs() >= observed_dev - 1e-9 {
            hits += 1;
        }
        count += 1;

        // Advance to the next combination.
        let mut i = n;
        loop {
            if i == 0 {
                return hits as f64 / count as f64;
            }
            i -= 1;
            if combo[i] != i + total - n {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..n {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Normal approximation with tie-corrected variance and continuity
/// correction.
fn approx_p(ranks: &[f64], n: usize, m: usize, u_obs: f64) -> f64 {
    let total = (n + m) as f64;
    let mean = (n * m) as f64 / 2.0;

    // Tie correction: sum t^3 - t over tied groups of the pooled sample.
    let mut sorted = ranks.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }

    let variance = (n * m) as f64 / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if variance <= 0.0 {
        return 1.0; // all values identical
    }
    let deviation = (u_obs - mean).abs() - 0.5;
    if deviation <= 0.0 {
        return 1.0;
    }
    let z = deviation / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * (1.0 - normal.cdf(z))).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fully_separated_small_samples() {
        // All 20 assignments enumerated; one tail each side.
        let (u, p) = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(u, 0.0);
        assert!((p - 0.1).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn identical_samples_give_center_u_and_p_one() {
        let (u, p) = mann_whitney_u(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(u, 2.0); // n*m/2
        assert_eq!(p, 1.0);
    }

    #[test]
    fn constant_samples_give_p_one_in_both_branches() {
        let a = vec![5.0; 10];
        let b = vec![5.0; 10];
        let (_, p) = mann_whitney_u_with(&a, &b, PValueMethod::NormalApprox).unwrap();
        assert_eq!(p, 1.0);
        let (_, p) = mann_whitney_u_with(&a[..4], &b[..4], PValueMethod::Exact).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn u_values_sum_to_nm_and_p_is_symmetric() {
        let mut rng = crate::numcore::Rng::new(404);
        for _ in 0..50 {
            let n = 2 + rng.next_below(6) as usize;
            let m = 2 + rng.next_below(6) as usize;
            // Coarse grid so ties occur often.
            let a: Vec<f64> = (0..n).map(|_| rng.next_below(5) as f64).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.next_below(5) as f64).collect();
            let (ua, pa) = mann_whitney_u(&a, &b).unwrap();
            let (ub, pb) = mann_whitney_u(&b, &a).unwrap();
            assert!((ua + ub - (n * m) as f64).abs() < 1e-9);
            assert!((pa - pb).abs() < 1e-9);
        }
    }

    #[test]
    fn approximation_tracks_exact_at_n6() {
        let mut rng = crate::numcore::Rng::new(66);
        for trial in 0..100 {
            let a: Vec<f64> = (0..6).map(|_| rng.next_f64() * 2.0).collect();
            let b: Vec<f64> = (0..6).map(|_| rng.next_f64() * 2.0 + 0.3).collect();
            let (_, exact) = mann_whitney_u_with(&a, &b, PValueMethod::Exact).unwrap();
            let (_, approx) = mann_whitney_u_with(&a, &b, PValueMethod::NormalApprox).unwrap();
            assert!(
                (exact - approx).abs() <= 0.05,
                "trial {trial}: exact {exact} vs approx {approx}"
            );
        }
    }

    #[test]
    fn large_samples_route_to_approximation() {
        // n = m = 10 is past the exact cutoff; a strong separation must be
        // highly significant under the approximation.
        let a: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..10).map(|i| i as f64 + 100.0).collect();
        let (u, p) = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(u, 0.0);
        assert!(p < 0.001, "p = {p}");
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
        assert!(mann_whitney_u(&[1.0], &[]).is_err());
        assert!(mann_whitney_u(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn midranks_average_tied_groups() {
        let r = midranks(&[1.0, 2.0, 2.0], &[2.0, 5.0]);
        assert_eq!(r, vec![1.0, 3.0, 3.0, 3.0, 5.0]);
    }
}
