//! Shared statistical test machinery: two-sample Kolmogorov–Smirnov,
//! two-sample chi-square, DKW-style one-sided CDF bands, and ordinary
//! least squares on log-log points.
//!
//! These are verification utilities, not general-purpose statistics; the
//! conventions (one-sided bands, conservative critical values on discrete
//! data) match how the lemma checks use them.

use crate::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Two-sample KS statistic `sup |F_x - F_y|`. Inputs need not be sorted.
pub fn ks_two_sample_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    ys.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(diff);
    }
    d
}

/// Asymptotic two-sample KS critical value `c(α)·sqrt((n+m)/(n·m))`.
/// For discrete data this is conservative.
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// One-sided two-sample DKW-style allowance at level `alpha`: the sum of
/// the one-sample bands at level `alpha/2` each.
pub fn dkw_two_sample_allowance(n: usize, m: usize, alpha: f64) -> f64 {
    let band = |k: usize| ((2.0 / alpha).ln() / (2.0 * k as f64)).sqrt();
    band(n) + band(m)
}

/// Two-sample chi-square over categorical data. Categories whose combined
/// count falls below `min_cell` are pooled into one cell. Returns
/// `(statistic, degrees_of_freedom)`; `None` when fewer than two cells
/// survive pooling.
pub fn chi_square_two_sample(counts_a: &[u64], counts_b: &[u64]) -> Option<(f64, usize)> {
    assert_eq!(counts_a.len(), counts_b.len());
    const MIN_CELL: u64 = 10;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pool_a, mut pool_b) = (0u64, 0u64);
    for (&a, &b) in counts_a.iter().zip(counts_b) {
        if a + b >= MIN_CELL {
            cells.push((a as f64, b as f64));
        } else {
            pool_a += a;
            pool_b += b;
        }
    }
    if pool_a + pool_b > 0 {
        cells.push((pool_a as f64, pool_b as f64));
    }
    if cells.len() < 2 {
        return None;
    }
    let n: f64 = cells.iter().map(|c| c.0).sum();
    let m: f64 = cells.iter().map(|c| c.1).sum();
    if n == 0.0 || m == 0.0 {
        return None;
    }
    // Standard two-sample form: sum over cells of
    // (sqrt(m/n)·a - sqrt(n/m)·b)^2 / (a + b).
    let (k1, k2) = ((m / n).sqrt(), (n / m).sqrt());
    let stat = cells
        .iter()
        .map(|&(a, b)| {
            let num = k1 * a - k2 * b;
            num * num / (a + b)
        })
        .sum();
    Some((stat, cells.len() - 1))
}

/// Upper quantile of the chi-square distribution.
pub fn chi_square_quantile(df: usize, p: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("positive df")
        .inverse_cdf(p)
}

/// Ordinary least squares of `y` on `x` with a normal-theory 95% CI on the
/// slope. Returns `(slope, intercept, ci_low, ci_high)`.
pub fn ols_with_ci(points: &[(f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    let n = points.len();
    if n < 3 {
        return Err(Error::param(format!(
            "need at least 3 points for a slope CI, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::param(
            "degenerate x values: all abscissae identical",
        ));
    }
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let se = (ssr / (nf - 2.0) / sxx).sqrt();
    let half = 1.96 * se;
    Ok((slope, intercept, slope - half, slope + half))
}

/// Mean and normal-approximation 95% half-width.
pub fn mean_with_ci(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, 1.96 * (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_identical_samples_is_zero() {
        let xs = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(ks_two_sample_statistic(&xs, &xs), 0.0);
    }

    #[test]
    fn ks_disjoint_samples_is_one() {
        let xs = vec![0.0, 1.0, 2.0];
        let ys = vec![10.0, 11.0];
        assert!((ks_two_sample_statistic(&xs, &ys) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_critical_value_formula() {
        // c(0.01) = sqrt(-ln(0.005)/2) = 1.62762...
        let crit = ks_two_sample_critical(10_000, 10_000, 0.01);
        let expect = 1.6276236115189503 * (2.0f64 / 10_000.0).sqrt();
        assert!((crit - expect).abs() < 1e-12);
    }

    #[test]
    fn chi_square_pools_small_cells() {
        let a = [500, 480, 3, 2];
        let b = [490, 510, 1, 4];
        let (_stat, df) = chi_square_two_sample(&a, &b).unwrap();
        assert_eq!(df, 2); // two big cells + one pooled cell
    }

    #[test]
    fn chi_square_quantile_sane() {
        // Known value: chi2(0.99, df=1) = 6.6349...
        let q = chi_square_quantile(1, 0.99);
        assert!((q - 6.634896601021214).abs() < 1e-9, "q={q}");
    }

    #[test]
    fn ols_exact_line_has_zero_width() {
        let pts: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, 2.0 + 3.0 * i as f64)).collect();
        let (slope, intercept, lo, hi) = ols_with_ci(&pts).unwrap();
        assert!((slope - 3.0).abs() < 1e-12);
        assert!((intercept - 2.0).abs() < 1e-12);
        assert!((hi - lo).abs() < 1e-12);
    }

    #[test]
    fn ols_rejects_degenerate_input() {
        assert!(ols_with_ci(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(ols_with_ci(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
    }
}
