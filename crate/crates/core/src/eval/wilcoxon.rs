//! Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped before ranking. Equal magnitudes share their
//! average rank and shrink the variance by `sum(t^3 - t) / 48`. The p-value
//! is exact (full null distribution of the signed-rank sum, ties included)
//! up to [`EXACT_MAX_N`] non-zero differences and from the normal
//! approximation above that.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::EvalError;

pub const EXACT_MAX_N: usize = 25;
/// Fewer non-zero differences than this and the result is flagged unreliable.
pub const RELIABLE_MIN_N: usize = 10;

const REL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Smaller of the two signed-rank sums.
    pub w: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `(W+ - mean) / sd` for differences `a - b`; `None` without data.
    pub z: Option<f64>,
    /// Two-sided.
    pub p: Option<f64>,
    pub p_exact: bool,
    pub n_effective: usize,
    pub reliable: bool,
}

fn same(x: f64, y: f64) -> bool {
    (x - y).abs() <= REL_EPS * x.abs().max(y.abs())
}

/// Average ranks (1-based) of `values` sorted ascending, with tie groups.
fn average_ranks(sorted: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut ranks = vec![0.0; sorted.len()];
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && same(sorted[i], sorted[j]) {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        ranks[i..j].iter_mut().for_each(|r| *r = avg);
        groups.push(j - i);
        i = j;
    }
    (ranks, groups)
}

/// P(W+ <= k) and P(W+ >= k) under the null, for ranks given doubled so
/// they are integers.
fn exact_tails(doubled: &[usize], k: usize) -> (f64, f64) {
    let total: usize = doubled.iter().sum();
    let mut dist = vec![0.0f64; total + 1];
    dist[0] = 1.0;
    let mut reach = 0;
    for &r in doubled {
        for s in (0..=reach).rev() {
            let p = dist[s] * 0.5;
            dist[s] = p;
            dist[s + r] += p;
        }
        reach += r;
    }
    let lower = dist[..=k.min(total)].iter().sum();
    let upper = dist[k.min(total + 1)..].iter().sum();
    (lower, upper)
}

pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(EvalError::EmptySample);
    }
    let mut diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .filter(|(x, y)| !same(**x, **y))
        .map(|(x, y)| x - y)
        .collect();
    diffs.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let n = diffs.len();
    let mags: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, groups) = average_ranks(&mags);
    // folding from 0.0 because an empty float sum is -0.0
    let rank_sum = |positive: bool| {
        diffs
            .iter()
            .zip(&ranks)
            .filter(|(d, _)| (**d > 0.0) == positive)
            .fold(0.0, |s, (_, r)| s + r)
    };
    let w_plus = rank_sum(true);
    let w_minus = rank_sum(false);
    let w = w_plus.min(w_minus);

    if n == 0 {
        return Ok(WilcoxonResult {
            w,
            w_plus,
            w_minus,
            z: None,
            p: None,
            p_exact: false,
            n_effective: 0,
            reliable: false,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let ties: f64 = groups.iter().map(|&t| (t * t * t - t) as f64).sum();
    let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0).sqrt();
    let z = (w_plus - mean) / sd;

    let (p, p_exact) = if n <= EXACT_MAX_N {
        let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
        let (lower, upper) = exact_tails(&doubled, (w_plus * 2.0).round() as usize);
        ((2.0 * lower.min(upper)).min(1.0), true)
    } else {
        let normal = Normal::standard();
        ((2.0 * normal.cdf(-z.abs())).min(1.0), false)
    };

    Ok(WilcoxonResult {
        w,
        w_plus,
        w_minus,
        z: Some(z),
        p: Some(p),
        p_exact,
        n_effective: n,
        reliable: n >= RELIABLE_MIN_N,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ties() {
        let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.n_effective, 0);
        assert!(!r.reliable);
        assert_eq!(r.p, None);
    }

    #[test]
    fn constant_shift() {
        let a: Vec<f64> = (1..=10).map(f64::from).collect();
        let b: Vec<f64> = (2..=11).map(f64::from).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.w, 0.0);
        assert_eq!(r.w_minus, 55.0);
        assert!(r.reliable);
        // every rank tied at 5.5: sd = sqrt(10*11*33/48)
        let z = r.z.unwrap();
        assert!((z - (-27.5 / (10.0f64 * 11.0 * 33.0 / 48.0).sqrt())).abs() < 1e-12);
        assert!((r.p.unwrap() - 2.0 / 1024.0).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(wilcoxon_signed_rank(&[1.0], &[]), Err(EvalError::LengthMismatch(1, 0))));
    }

    #[test]
    fn large_samples_use_the_normal_tail() {
        let a: Vec<f64> = (0..40).map(|i| f64::from(i) * 1.5).collect();
        let b: Vec<f64> = (0..40).map(|i| f64::from(i) + if i % 3 == 0 { 4.0 } else { -1.0 }).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(!r.p_exact);
        let z = r.z.unwrap();
        let expect = 2.0 * Normal::standard().cdf(-z.abs());
        assert!((r.p.unwrap() - expect).abs() < 1e-12);
    }
}
