//! Bootstrap estimation of algorithmic variance from a single ensemble.
//!
//! The rows of the prediction array correspond one-to-one with classifiers, so
//! resampling rows with replacement and recomputing the error rate plays the
//! role of re-running the training algorithm. The sample standard deviation of
//! the `B` resampled error rates estimates `sigma_t`, the standard deviation
//! of the ensemble's error across re-runs on the same training data.
//!
//! Because `sigma_t` scales like `1/sqrt(t)`, an estimate at a small ensemble
//! size `t0` extrapolates to any larger `t` as `sqrt(t0/t) * sigma_t0`, which
//! is what makes stopping decisions cheap.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::ensemble::rate::error_rate_rows_columns;
use crate::ensemble::{check_shapes, ErrorMode, Label, OobMask, PredictionArray, TruthLabels};
use crate::error::{CoreError, Result};
use crate::rng;
use rand::Rng;

/// Default replicate count.
pub const DEFAULT_REPLICATES: usize = 50;
/// Default initial ensemble size for extrapolation.
pub const DEFAULT_T0: usize = 200;

/// Configuration for [`bootstrap_replicates`].
#[derive(Clone, Debug)]
pub struct BootstrapConfig {
    /// Number of bootstrap replicates `B` (at least 2).
    pub replicates: usize,
    /// Master seed; replicate `b` owns the substream derived from `(seed, b)`.
    pub seed: u64,
    pub mode: ErrorMode,
    /// When set, resampled error rates are class-wise for this class.
    pub target_class: Option<Label>,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64, mode: ErrorMode) -> Self {
        Self {
            replicates,
            seed,
            mode,
            target_class: None,
        }
    }
}

/// A sigma estimate together with the replicates it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaEstimate {
    /// The resampled error rates `z_1..z_B`, each in `[0,1]`.
    pub replicates: Vec<f64>,
    /// Sample standard deviation of the replicates.
    pub sigma_hat: f64,
    /// Ensemble size the estimate refers to.
    pub t: usize,
}

impl SigmaEstimate {
    pub fn from_replicates(replicates: Vec<f64>, t: usize) -> Result<Self> {
        if let Some(&bad) = replicates.iter().find(|z| !(0.0..=1.0).contains(*z)) {
            return Err(CoreError::Domain(format!(
                "replicate error rate must lie in [0,1], got {bad}"
            )));
        }
        let sigma = sigma_hat(&replicates)?;
        Ok(Self {
            replicates,
            sigma_hat: sigma,
            t,
        })
    }
}

/// The `t` resampled row indices for replicate `b`, drawn i.i.d. uniform with
/// replacement from `0..t` on the substream derived from `(seed, b)`.
///
/// Exposed so that an independent implementation can materialize the same
/// resampled arrays.
pub fn replicate_row_indices(seed: u64, replicate: usize, t: usize) -> Vec<usize> {
    let mut rng = rng::substream(seed, replicate as u64);
    (0..t).map(|_| rng.random_range(0..t)).collect()
}

/// Bootstrap replicates `z_1..z_B`: for each replicate, rows are resampled
/// with replacement (a row carries its out-of-bag mask row with it) and the
/// error rate of the resampled array is recorded.
///
/// Replicates are independent and order-deterministic: the result depends only
/// on the inputs and the seed, not on thread count or execution order.
pub fn bootstrap_replicates(
    array: &PredictionArray,
    truth: &TruthLabels,
    mask: Option<&OobMask>,
    config: &BootstrapConfig,
) -> Result<Vec<f64>> {
    if config.replicates < 2 {
        return Err(CoreError::Config(format!(
            "replicate count must be >= 2, got {}",
            config.replicates
        )));
    }
    let mask = match config.mode {
        ErrorMode::Holdout => None,
        ErrorMode::Oob => Some(mask.ok_or_else(|| {
            CoreError::Config("OOB mode requires an out-of-bag mask".into())
        })?),
    };
    check_shapes(array, truth, mask)?;

    let columns: Vec<usize> = match config.target_class {
        None => (0..array.m()).collect(),
        Some(class) => {
            let cols: Vec<usize> = (0..array.m()).filter(|&j| truth.0[j] == class).collect();
            if cols.is_empty() {
                return Err(CoreError::EmptyClass(class.0));
            }
            cols
        }
    };

    Ok((0..config.replicates)
        .into_par_iter()
        .map(|b| {
            let rows = replicate_row_indices(config.seed, b, array.t());
            error_rate_rows_columns(array, truth, mask, &rows, columns.iter().copied())
        })
        .collect())
}

/// Sample standard deviation of the replicates, with `B - 1` denominator.
pub fn sigma_hat(replicates: &[f64]) -> Result<f64> {
    if replicates.len() < 2 {
        return Err(CoreError::Config(
            "sigma_hat needs at least 2 replicates".into(),
        ));
    }
    let n = replicates.len() as f64;
    let mean = replicates.iter().sum::<f64>() / n;
    let ss = replicates.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>();
    Ok((ss / (n - 1.0)).sqrt())
}

/// Quantile by linear interpolation between order statistics at rank
/// `p * (B - 1) + 1` (one-based).
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

/// Quantiles of the centered replicates `z_b - mean(z)`. These approximate the
/// quantiles of the centered law of the ensemble error.
pub fn centered_quantiles(replicates: &[f64], probs: &[f64]) -> Result<Vec<f64>> {
    if replicates.len() < 2 {
        return Err(CoreError::Config(
            "centered_quantiles needs at least 2 replicates".into(),
        ));
    }
    if let Some(&bad) = probs.iter().find(|p| !(0.0 < **p && **p < 1.0)) {
        return Err(CoreError::Domain(format!(
            "quantile probability must lie in (0,1), got {bad}"
        )));
    }
    let mean = replicates.iter().sum::<f64>() / replicates.len() as f64;
    let mut centered: Vec<f64> = replicates.iter().map(|z| z - mean).collect();
    centered.sort_by(f64::total_cmp);
    Ok(probs.iter().map(|&p| quantile_sorted(&centered, p)).collect())
}

/// Normalizing constant for [`sigma_from_iqr`]: the interquartile range of the
/// standard normal.
pub fn normal_iqr() -> f64 {
    let n = Normal::new(0.0, 1.0).unwrap();
    n.inverse_cdf(0.75) - n.inverse_cdf(0.25)
}

/// Robust alternative to [`sigma_hat`]: interquartile range of the replicates
/// divided by the standard normal IQR.
pub fn sigma_from_iqr(replicates: &[f64]) -> Result<f64> {
    if replicates.len() < 4 {
        return Err(CoreError::Config(
            "sigma_from_iqr needs at least 4 replicates".into(),
        ));
    }
    let mut sorted = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    Ok(iqr / normal_iqr())
}

/// Extrapolated estimate of `sigma_t` from an estimate at size `t0`:
/// `sqrt(t0 / t) * sigma0`.
pub fn extrapolate_sigma(sigma0: f64, t0: usize, t: usize) -> Result<f64> {
    if t0 == 0 || t == 0 {
        return Err(CoreError::Config("ensemble sizes must be >= 1".into()));
    }
    if sigma0 < 0.0 {
        return Err(CoreError::Domain(format!("sigma must be >= 0, got {sigma0}")));
    }
    Ok((t0 as f64 / t as f64).sqrt() * sigma0)
}

/// Smallest ensemble size `t` with `3 * sqrt(t0/t) * sigma0 <= eps`, i.e.
/// `ceil((3 * sqrt(t0) * sigma0 / eps)^2)`.
///
/// The raw formula value is returned; the caller compares it with the current
/// ensemble size. A zero `sigma0` yields 0 (already converged at any size).
pub fn min_trees_for_tolerance(sigma0: f64, t0: usize, eps: f64) -> Result<u64> {
    if eps <= 0.0 {
        return Err(CoreError::Config(format!("tolerance must be > 0, got {eps}")));
    }
    if t0 == 0 {
        return Err(CoreError::Config("t0 must be >= 1".into()));
    }
    if sigma0 < 0.0 {
        return Err(CoreError::Domain(format!("sigma must be >= 0, got {sigma0}")));
    }
    if sigma0 == 0.0 {
        return Ok(0);
    }
    let raw = (3.0 * (t0 as f64).sqrt() * sigma0 / eps).powi(2);
    let mut t = raw.ceil() as u64;
    let ok = |t: u64| 3.0 * (t0 as f64 / t as f64).sqrt() * sigma0 <= eps;
    // float guard: enforce the defining inequality exactly at the boundary
    while t > 1 && ok(t - 1) {
        t -= 1;
    }
    while !ok(t) {
        t += 1;
    }
    Ok(t)
}

/// Relative stopping rule: true when `sigma_hat <= eta * err_hat`.
pub fn relative_stopping(sigma_hat: f64, err_hat: f64, eta: f64) -> Result<bool> {
    if !(0.0 < eta && eta < 1.0) {
        return Err(CoreError::Config(format!("eta must lie in (0,1), got {eta}")));
    }
    Ok(sigma_hat <= eta * err_hat)
}
