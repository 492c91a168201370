//! Wilcoxon signed-rank test on paired samples.
//!
//! Zero differences are dropped, tied absolute differences get mid-ranks.
//! The exact null distribution is the uniform distribution over all `2^n`
//! sign assignments of the observed ranks; it is built by dynamic
//! programming over doubled (hence integral) rank sums. The normal
//! approximation uses the tie-corrected variance and a 0.5 continuity
//! correction toward the mean.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest effective sample size for which [`WilcoxonMode::Auto`] uses the
/// exact distribution.
pub const EXACT_AUTO_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WilcoxonMode {
    #[default]
    Auto,
    Exact,
    Normal,
}

impl FromStr for WilcoxonMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(WilcoxonMode::Auto),
            "exact" => Ok(WilcoxonMode::Exact),
            "normal" => Ok(WilcoxonMode::Normal),
            other => Err(format!("unknown wilcoxon mode {other:?} (expected auto|exact|normal)")),
        }
    }
}

/// How the p-value of a [`WilcoxonResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PValueMethod {
    Exact,
    Normal,
}

impl fmt::Display for PValueMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PValueMethod::Exact => "exact",
            PValueMethod::Normal => "normal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonResult {
    pub w_plus: f64,
    pub w_minus: f64,
    /// Number of nonzero differences.
    pub n_effective: usize,
    /// Standardized statistic; `None` for the exact method.
    pub z: Option<f64>,
    pub p_two_sided: f64,
    pub method: PValueMethod,
    /// Every difference was zero. `p_two_sided` is then 1.
    pub degenerate: bool,
}

/// Test on `x - y` for each pair.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)], mode: WilcoxonMode) -> Result<WilcoxonResult> {
    let diffs: Vec<f64> = pairs.iter().map(|&(x, y)| x - y).collect();
    wilcoxon_from_differences(&diffs, mode)
}

pub fn wilcoxon_from_differences(diffs: &[f64], mode: WilcoxonMode) -> Result<WilcoxonResult> {
    if diffs.is_empty() {
        return Err(Error::invalid("wilcoxon test needs at least one pair"));
    }
    if let Some(d) = diffs.iter().find(|d| !d.is_finite()) {
        return Err(Error::invalid(format!("non-finite paired difference {d}")));
    }

    let nonzero: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    let n = nonzero.len();
    let use_exact = match mode {
        WilcoxonMode::Exact => true,
        WilcoxonMode::Normal => false,
        WilcoxonMode::Auto => n <= EXACT_AUTO_MAX_N,
    };
    let method = if use_exact {
        PValueMethod::Exact
    } else {
        PValueMethod::Normal
    };

    if n == 0 {
        return Ok(WilcoxonResult {
            w_plus: 0.0,
            w_minus: 0.0,
            n_effective: 0,
            z: if use_exact { None } else { Some(0.0) },
            p_two_sided: 1.0,
            method,
            degenerate: true,
        });
    }

    let ranked = rank_absolute(&nonzero);
    // Doubled rank sums are integers, so comparisons below are exact.
    let w_plus2: u64 = nonzero
        .iter()
        .zip(&ranked.doubled_ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, &r)| r)
        .sum();
    let total2 = (n * (n + 1)) as u64;
    let w_plus = w_plus2 as f64 / 2.0;
    let w_minus = (total2 - w_plus2) as f64 / 2.0;

    let (z, p) = if use_exact {
        (None, exact_p_value(&ranked.doubled_ranks, w_plus2))
    } else {
        let (z, p) = normal_p_value(n, w_plus, &ranked.tie_sizes);
        (Some(z), p)
    };

    Ok(WilcoxonResult {
        w_plus,
        w_minus,
        n_effective: n,
        z,
        p_two_sided: p.clamp(f64::MIN_POSITIVE, 1.0),
        method,
        degenerate: false,
    })
}

struct Ranked {
    /// Twice the mid-rank of each input, in input order.
    doubled_ranks: Vec<u64>,
    /// Sizes of tie groups with more than one member.
    tie_sizes: Vec<usize>,
}

fn rank_absolute(values: &[f64]) -> Ranked {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].abs().total_cmp(&values[j].abs()));

    let mut doubled_ranks = vec![0u64; values.len()];
    let mut tie_sizes = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]].abs() == values[order[start]].abs() {
            end += 1;
        }
        // ranks start+1 ..= end; doubled mid-rank = start + 1 + end
        let doubled = (start + 1 + end) as u64;
        for &i in &order[start..end] {
            doubled_ranks[i] = doubled;
        }
        if end - start > 1 {
            tie_sizes.push(end - start);
        }
        start = end;
    }
    Ranked {
        doubled_ranks,
        tie_sizes,
    }
}

/// Two-sided exact p-value: `2 * min(P(W+ <= w), P(W+ >= w))`, capped at 1.
///
/// Probabilities are accumulated as dyadic rationals (`count / 2^n`), which
/// f64 represents exactly for n up to 53.
fn exact_p_value(doubled_ranks: &[u64], w_plus2: u64) -> f64 {
    let total2: u64 = doubled_ranks.iter().sum();
    let mut dist = vec![0.0f64; total2 as usize + 1];
    dist[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach + r).rev() {
            let keep = dist[s];
            let add = if s >= r { dist[s - r] } else { 0.0 };
            dist[s] = 0.5 * keep + 0.5 * add;
        }
        reach += r;
    }
    let w = w_plus2 as usize;
    let lower: f64 = dist[..=w].iter().sum();
    let upper: f64 = dist[w..].iter().sum();
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_p_value(n: usize, w_plus: f64, tie_sizes: &[usize]) -> (f64, f64) {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / 48.0;
    let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    let sd = variance.sqrt();
    let diff = w_plus - mean;
    let corrected = (diff.abs() - 0.5).max(0.0);
    let z = diff.signum() * corrected / sd;
    let z = if diff == 0.0 { 0.0 } else { z };
    (z, two_sided_normal_p(z))
}

/// `2 * Phi(-|z|)`.
pub fn two_sided_normal_p(z: f64) -> f64 {
    erfc_nonnegative(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Standard normal CDF.
pub fn standard_normal_cdf(x: f64) -> f64 {
    let t = erfc_nonnegative(x.abs() / std::f64::consts::SQRT_2) / 2.0;
    if x >= 0.0 {
        1.0 - t
    } else {
        t
    }
}

/// Complementary error function for `x >= 0` (Abramowitz & Stegun 7.1.26,
/// absolute error below 1.5e-7). Evaluated as `poly(t) * exp(-x^2)` directly,
/// so small tail values keep their relative accuracy.
fn erfc_nonnegative(x: f64) -> f64 {
    const P: f64 = 0.327_591_1;
    const A: [f64; 5] = [
        0.254_829_592,
        -0.284_496_736,
        1.421_413_741,
        -1.453_152_027,
        1.061_405_429,
    ];
    let t = 1.0 / (1.0 + P * x);
    let poly = t * (A[0] + t * (A[1] + t * (A[2] + t * (A[3] + t * A[4]))));
    poly * (-x * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn three_differences_exact() {
        let r = wilcoxon_from_differences(&[2.0, -1.0, 3.0], WilcoxonMode::Auto).unwrap();
        assert_eq!(r.method, PValueMethod::Exact);
        assert_eq!(r.w_plus, 5.0);
        assert_eq!(r.w_minus, 1.0);
        assert_eq!(r.p_two_sided, 0.5);
        assert!(r.z.is_none());
    }

    #[test]
    fn all_zero_is_degenerate() {
        let r = wilcoxon_signed_rank(&[(1.0, 1.0), (2.5, 2.5)], WilcoxonMode::Auto).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.n_effective, 0);
        assert_eq!(r.p_two_sided, 1.0);
    }

    #[test]
    fn empty_and_non_finite_inputs_error() {
        assert!(wilcoxon_signed_rank(&[], WilcoxonMode::Auto).is_err());
        assert!(wilcoxon_from_differences(&[1.0, f64::NAN], WilcoxonMode::Auto).is_err());
    }

    #[test]
    fn mid_ranks_for_ties() {
        let ranked = rank_absolute(&[1.0, -1.0, 3.0, 2.0, 2.0, 2.0]);
        // |1| x2 -> ranks 1,2 -> 1.5; |2| x3 -> ranks 3,4,5 -> 4; |3| -> 6
        assert_eq!(ranked.doubled_ranks, vec![3, 3, 12, 8, 8, 8]);
        assert_eq!(ranked.tie_sizes, vec![2, 3]);
    }

    // Reference values from an independent implementation (scipy.stats.wilcoxon,
    // zero_method="wilcox", correction=True for the approximation).
    const N26: [f64; 26] = [
        1., 2., 3., 4., 5., 6., 7., 8., 9., 10., 11., 12., 13., 14., 15., 16., 17., 18., 19., 20., 21., -3.5, -22.5,
        -0.5, -7.25, 30.,
    ];

    #[test]
    fn normal_mode_matches_reference() {
        let r = wilcoxon_from_differences(&N26, WilcoxonMode::Auto).unwrap();
        assert_eq!(r.method, PValueMethod::Normal);
        assert_eq!(r.w_minus, 41.0);
        assert!(
            (r.p_two_sided - 0.000_665_700_801_382_123_3).abs() < 1e-6,
            "{}",
            r.p_two_sided
        );
    }

    #[test]
    fn exact_mode_matches_reference_past_auto_threshold() {
        let r = wilcoxon_from_differences(&N26, WilcoxonMode::Exact).unwrap();
        assert_eq!(r.p_two_sided, 0.000_282_287_597_656_25);
    }

    #[test]
    fn erfc_accuracy() {
        // erfc(1) = 0.157299207050285..., erfc(0.5) = 0.479500122186953...
        assert!((erfc_nonnegative(1.0) - 0.157_299_207_050_285).abs() < 1.5e-7);
        assert!((erfc_nonnegative(0.5) - 0.479_500_122_186_953).abs() < 1.5e-7);
        assert!((erfc_nonnegative(0.0) - 1.0).abs() < 1.5e-7);
        assert_relative_eq!(standard_normal_cdf(0.0), 0.5, epsilon = 1.5e-7);
        assert!((standard_normal_cdf(1.959_963_985) - 0.975).abs() < 1.5e-7);
    }

    #[test]
    fn single_difference() {
        let r = wilcoxon_from_differences(&[4.0], WilcoxonMode::Exact).unwrap();
        assert_eq!(r.p_two_sided, 1.0);
        let r = wilcoxon_from_differences(&[4.0], WilcoxonMode::Normal).unwrap();
        assert!(r.p_two_sided > 0.0 && r.p_two_sided <= 1.0);
    }

    #[test]
    fn huge_shift_keeps_p_positive() {
        let diffs: Vec<f64> = (1..=5000).map(f64::from).collect();
        let r = wilcoxon_from_differences(&diffs, WilcoxonMode::Normal).unwrap();
        assert!(r.p_two_sided > 0.0);
    }
}
