//! Power-law fitting.
//!
//! `fit_power_law` regresses `ln y` on `ln x` and reports the law as
//! `y = (x / C)^E`. The directional-change count and average overshoot
//! laws are fits of that form over a grid of thresholds, one independent
//! dissection per grid point. `tail_exponent` estimates the exponent of a
//! power-law density `f(x) ∝ x^-α` above `x_min`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::dissect::summarize;
use crate::error::{Error, Result};
use crate::types::{DissectionConfig, PricePoint, ReturnConvention, ScalingFit};

/// Default minimum number of directional changes for a grid point to enter a fit.
pub const DEFAULT_MIN_COUNT: usize = 10;

/// Minimum number of samples at or above `x_min` for a tail estimate.
pub const MIN_TAIL_SAMPLES: usize = 10;

const DEGENERATE_EXPONENT: f64 = 1e-12;

/// Strictly increasing thresholds in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    thresholds: Vec<f64>,
}

impl ThresholdGrid {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::param("grid", "no thresholds"));
        }
        if let Some(&bad) = thresholds.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
            return Err(Error::InvalidThreshold(bad));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("grid", "thresholds must be strictly increasing"));
        }
        Ok(Self { thresholds })
    }

    /// `count` thresholds evenly spaced in log between `min` and `max` inclusive.
    pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::param("grid", "count must be positive"));
        }
        if count == 1 {
            if min != max {
                return Err(Error::param("grid", "a single-point grid needs min == max"));
            }
            return Self::new(vec![min]);
        }
        if !(min > 0.0 && max > min) {
            return Err(Error::param("grid", format!("need 0 < min < max, got {min}:{max}")));
        }
        let (lo, hi) = (min.ln(), max.ln());
        let step = (hi - lo) / (count - 1) as f64;
        let mut thresholds: Vec<f64> = (0..count).map(|i| (lo + step * i as f64).exp()).collect();
        // pin the endpoints exactly
        thresholds[0] = min;
        thresholds[count - 1] = max;
        Self::new(thresholds)
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

impl Default for ThresholdGrid {
    /// 12 log-spaced thresholds from 0.05% to 5%.
    fn default() -> Self {
        Self::log_spaced(0.0005, 0.05, 12).expect("default grid is valid")
    }
}

/// Parses `min:max:count`.
impl FromStr for ThresholdGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::param("grid", format!("expected min:max:count, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        Self::log_spaced(min, max, count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LawSample {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Ols {
    slope: f64,
    intercept: f64,
    r_squared: f64,
    slope_stderr: f64,
}

/// Ordinary least squares of `ys` on `xs`, both already mean-free-able.
fn ols(xs: &[f64], ys: &[f64]) -> Ols {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let slope_stderr = if xs.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ols {
        slope,
        intercept,
        r_squared,
        slope_stderr,
    }
}

/// Fits `y = (x / C)^E` by least squares on `(ln x, ln y)`.
///
/// Samples are sorted before fitting so the result does not depend on
/// input order.
pub fn fit_power_law(samples: &[LawSample]) -> Result<ScalingFit> {
    if let Some(s) = samples
        .iter()
        .find(|s| !(s.x > 0.0 && s.y > 0.0 && s.x.is_finite() && s.y.is_finite()))
    {
        return Err(Error::param(
            "samples",
            format!("need positive finite pairs, got ({}, {})", s.x, s.y),
        ));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let distinct = 1 + sorted.windows(2).filter(|w| w[0].x != w[1].x).count();
    if sorted.is_empty() || distinct < 2 {
        return Err(Error::Underdetermined(if sorted.is_empty() { 0 } else { distinct }));
    }
    let lx: Vec<f64> = sorted.iter().map(|s| s.x.ln()).collect();
    let ly: Vec<f64> = sorted.iter().map(|s| s.y.ln()).collect();
    let fit = ols(&lx, &ly);
    if fit.slope.is_nan() || fit.slope.abs() < DEGENERATE_EXPONENT {
        return Err(Error::DegenerateExponent(fit.slope));
    }
    Ok(ScalingFit {
        c: (-fit.intercept / fit.slope).exp(),
        exponent: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        n_points: sorted.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Law {
    /// Number of directional changes against threshold.
    #[serde(rename = "dc-count")]
    DcCount,
    /// Mean overshoot magnitude against threshold.
    #[serde(rename = "overshoot")]
    Overshoot,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Law::DcCount => "dc-count",
            Law::Overshoot => "overshoot",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawOptions {
    pub convention: ReturnConvention,
    pub min_count: usize,
}

impl Default for LawOptions {
    fn default() -> Self {
        Self {
            convention: ReturnConvention::Fractional,
            min_count: DEFAULT_MIN_COUNT,
        }
    }
}

/// A fitted law together with the samples it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawFit {
    pub law: Law,
    #[serde(flatten)]
    pub fit: ScalingFit,
    pub samples: Vec<LawSample>,
}

/// Per-threshold samples for `law`, grid points with fewer than
/// `min_count` directional changes or a zero value dropped.
pub fn law_samples(series: &[PricePoint], grid: &ThresholdGrid, law: Law, opts: &LawOptions) -> Result<Vec<LawSample>> {
    let per_threshold: Vec<Result<Option<LawSample>>> = grid
        .thresholds()
        .par_iter()
        .map(|&h| {
            let s = summarize(series, DissectionConfig::new(h, opts.convention)?)?;
            if s.dc_count < opts.min_count {
                return Ok(None);
            }
            let y = match law {
                Law::DcCount => s.dc_count as f64,
                Law::Overshoot => s.avg_overshoot().unwrap_or(0.0),
            };
            Ok((y > 0.0).then_some(LawSample { x: h, y }))
        })
        .collect();
    let mut samples = Vec::with_capacity(grid.len());
    for r in per_threshold {
        samples.extend(r?);
    }
    Ok(samples)
}

fn fit_law(series: &[PricePoint], grid: &ThresholdGrid, law: Law, opts: &LawOptions) -> Result<LawFit> {
    let samples = law_samples(series, grid, law, opts)?;
    if samples.len() < 2 {
        return Err(Error::InsufficientEvents(format!(
            "{law} law: {} of {} grid points have at least {} directional changes and a positive value",
            samples.len(),
            grid.len(),
            opts.min_count
        )));
    }
    let fit = fit_power_law(&samples)?;
    Ok(LawFit { law, fit, samples })
}

/// Directional-change count law `N(h) = (h / C)^E`.
pub fn dc_count_law(series: &[PricePoint], grid: &ThresholdGrid, opts: &LawOptions) -> Result<LawFit> {
    fit_law(series, grid, Law::DcCount, opts)
}

/// Average overshoot law `<|Δx_os|>(h) = (h / C)^E`.
pub fn overshoot_law(series: &[PricePoint], grid: &ThresholdGrid, opts: &LawOptions) -> Result<LawFit> {
    fit_law(series, grid, Law::Overshoot, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailMethod {
    #[default]
    Hill,
    /// Least squares on the log-log empirical complementary CDF.
    CcdfRegression,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub alpha: f64,
    pub stderr: f64,
    pub n_tail: usize,
}

/// Estimates `α` of a density `f(x) ∝ x^-α` from the samples at or above `x_min`.
pub fn tail_exponent(samples: &[f64], x_min: f64, method: TailMethod) -> Result<TailEstimate> {
    if !(x_min > 0.0 && x_min.is_finite()) {
        return Err(Error::param("x_min", format!("must be positive, got {x_min}")));
    }
    let mut tail: Vec<f64> = samples.iter().copied().filter(|&x| x >= x_min).collect();
    let n = tail.len();
    if n < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientTail {
            found: n,
            required: MIN_TAIL_SAMPLES,
        });
    }
    match method {
        TailMethod::Hill => {
            let log_sum: f64 = tail.iter().map(|&x| (x / x_min).ln()).sum();
            if !(log_sum > 0.0 && log_sum.is_finite()) {
                return Err(Error::param("samples", "tail carries no spread above x_min"));
            }
            let alpha = 1.0 + n as f64 / log_sum;
            Ok(TailEstimate {
                alpha,
                stderr: (alpha - 1.0) / (n as f64).sqrt(),
                n_tail: n,
            })
        }
        TailMethod::CcdfRegression => {
            tail.sort_by(f64::total_cmp);
            let xs: Vec<f64> = tail.iter().map(|x| x.ln()).collect();
            // fraction of the tail at or above the i-th order statistic
            let ys: Vec<f64> = (0..n).map(|i| ((n - i) as f64 / n as f64).ln()).collect();
            if xs[0] == xs[n - 1] {
                return Err(Error::param("samples", "tail carries no spread above x_min"));
            }
            let fit = ols(&xs, &ys);
            Ok(TailEstimate {
                alpha: 1.0 - fit.slope,
                stderr: fit.slope_stderr,
                n_tail: n,
            })
        }
    }
}
