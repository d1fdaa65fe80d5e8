//! Goodness-of-fit statistics for simulated crossover times and gate passages.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Minimum sample size accepted by [`ks_exponential`].
pub const KS_MIN_SAMPLES: usize = 100;

/// Kolmogorov limit distribution tail `Q(x) = 2 Σ_{k≥1} (-1)^{k-1} e^{-2k²x²}`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        // the alternating series converges slowly here and the tail is 1 to double precision
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        sum += if k as i64 % 2 == 1 { term } else { -term };
        if term < 1e-300 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS distance between `xs` and the CDF `1 - e^{-t}`.
pub fn ks_statistic_exponential(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = 1.0 - (-x.max(0.0)).exp();
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// KS test of `samples / mean(samples)` against the unit exponential law.
///
/// The p-value uses the Kolmogorov limit law at Stephens' modified statistic
/// `(√n + 0.12 + 0.11/√n) D`. Rescaling by the sample mean makes the test
/// conservative.
pub fn ks_exponential(samples: &[f64]) -> Result<KsResult> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "KS test needs at least {KS_MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sample mean {mean} is not a positive number"
        )));
    }
    let scaled: Vec<f64> = samples.iter().map(|x| x / mean).collect();
    let d = ks_statistic_exponential(&scaled);
    let rn = (samples.len() as f64).sqrt();
    let p = kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d);
    Ok(KsResult {
        n: samples.len(),
        statistic: d,
        p_value: p,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of the counts against the uniform law.
pub fn chi_square_uniform(counts: &[u64]) -> ChiSquare {
    let k = counts.len();
    let total: u64 = counts.iter().sum();
    if k < 2 || total == 0 {
        return ChiSquare {
            statistic: 0.0,
            degrees_of_freedom: k.saturating_sub(1),
            p_value: 1.0,
        };
    }
    let e = total as f64 / k as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let df = k - 1;
    let p = ChiSquared::new(df as f64)
        .map(|d| d.sf(stat))
        .unwrap_or(f64::NAN);
    ChiSquare {
        statistic: stat,
        degrees_of_freedom: df,
        p_value: p,
    }
}

/// Sample mean, unbiased variance and standard error of the mean.
pub fn mean_var(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var, (var / n as f64).sqrt())
}

/// Summary of a crossover-time sample with pre-declared thresholds.
#[derive(Clone, Debug, Serialize)]
pub struct StatReport {
    pub n: usize,
    pub timeouts: usize,
    pub mean: f64,
    pub std_error: f64,
    pub variance: f64,
    pub ks: Option<KsResult>,
    pub ks_threshold: f64,
    pub chi_square: Option<ChiSquare>,
    pub chi_square_threshold: f64,
    pub pass: bool,
}

impl StatReport {
    /// Build a report; `pass` requires each present test to exceed its threshold.
    pub fn new(
        samples: &[f64],
        timeouts: usize,
        ks: Option<KsResult>,
        ks_threshold: f64,
        chi_square: Option<ChiSquare>,
        chi_square_threshold: f64,
    ) -> Self {
        let (mean, variance, std_error) = mean_var(samples);
        let pass = timeouts == 0
            && ks.is_none_or(|k| k.p_value > ks_threshold)
            && chi_square.is_none_or(|c| c.p_value > chi_square_threshold);
        StatReport {
            n: samples.len(),
            timeouts,
            mean,
            std_error,
            variance,
            ks,
            ks_threshold,
            chi_square,
            chi_square_threshold,
            pass,
        }
    }
}
