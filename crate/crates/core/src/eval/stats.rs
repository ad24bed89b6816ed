//! Paired t-test and two-sample Kolmogorov-Smirnov test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

/// Two-tailed paired t-test on `a - b`.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTestResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 3 {
        return Err(EvalError::TooFewPairs(a.len()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var.is_nan() || var <= 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    let t = mean / (var / n).sqrt();
    let df = n - 1.0;
    let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTestResult { t, df, p })
}

/// How the K-S p-value is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KsMethod {
    /// Exact when `n·m` is at most [`EXACT_KS_LIMIT`], asymptotic otherwise.
    #[default]
    Auto,
    Exact,
    Asymptotic,
}

pub const EXACT_KS_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d: f64,
    pub p: f64,
    pub exact: bool,
}

/// `max |i·m − j·n|` over the merged ECDF steps, i.e. `D·n·m` as an integer.
fn ks_statistic_scaled(a: &[f64], b: &[f64]) -> u64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as i64, b.len() as i64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0i64;
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.min(*y),
            (Some(x), None) => *x,
            (None, Some(y)) => *y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == next {
            i += 1;
        }
        while j < b.len() && b[j] == next {
            j += 1;
        }
        best = best.max((i as i64 * m - j as i64 * n).abs());
    }
    best as u64
}

/// Kolmogorov survival function `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-theta form converges fast for small λ
        let pi2 = std::f64::consts::PI.powi(2);
        let s: f64 = (1..=20)
            .map(|k| {
                let odd = (2 * k - 1) as f64;
                (-odd * odd * pi2 / (8.0 * lambda * lambda)).exp()
            })
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let k = k as f64;
                let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Probability that a uniformly random monotone lattice path from `(0,0)` to `(n,m)`
/// keeps `|i·m − j·n| < h` at every point, i.e. that `D·n·m < h`.
fn prob_inside(n: u64, m: u64, h: u64) -> f64 {
    let (n, m, h) = (n as usize, m as usize, h as i64);
    let inside = |i: usize, j: usize| ((i * m) as i64 - (j * n) as i64).abs() < h;
    // row[j] holds the probability of reaching (i, j) without leaving the band
    let mut row = vec![0.0f64; m + 1];
    row[0] = 1.0;
    for j in 1..=m {
        let step = (m - (j - 1)) as f64 / (n + m - (j - 1)) as f64;
        row[j] = if inside(0, j) { row[j - 1] * step } else { 0.0 };
    }
    for i in 1..=n {
        let mut next = vec![0.0f64; m + 1];
        for j in 0..=m {
            if !inside(i, j) {
                continue;
            }
            // from (i-1, j) take an a-step; from (i, j-1) take a b-step
            let from_up = row[j] * (n - (i - 1)) as f64 / (n - (i - 1) + m - j) as f64;
            let from_left = if j > 0 { next[j - 1] * (m - (j - 1)) as f64 / (n - i + m - (j - 1)) as f64 } else { 0.0 };
            next[j] = from_up + from_left;
        }
        row = next;
    }
    row[m]
}

/// Two-sided p-value for a statistic `d` between samples of sizes `n` and `m`.
pub fn ks_pvalue(d: f64, n: usize, m: usize, method: KsMethod) -> (f64, bool) {
    if d <= 0.0 {
        return (1.0, true);
    }
    let nm = n as u64 * m as u64;
    let exact = match method {
        KsMethod::Exact => true,
        KsMethod::Asymptotic => false,
        KsMethod::Auto => nm <= EXACT_KS_LIMIT,
    };
    if exact {
        let h = (d * nm as f64).round().max(1.0) as u64;
        return ((1.0 - prob_inside(n as u64, m as u64, h)).clamp(0.0, 1.0), true);
    }
    let en = (n * m) as f64 / (n + m) as f64;
    (kolmogorov_sf(en.sqrt() * d), false)
}

pub fn ks_test(a: &[f64], b: &[f64], method: KsMethod) -> Result<KsResult, EvalError> {
    if a.is_empty() || b.is_empty() {
        return Err(EvalError::EmptySample);
    }
    let scaled = ks_statistic_scaled(a, b);
    let d = scaled as f64 / (a.len() * b.len()) as f64;
    let (p, exact) = ks_pvalue(d, a.len(), b.len(), method);
    Ok(KsResult { d, p, exact })
}
