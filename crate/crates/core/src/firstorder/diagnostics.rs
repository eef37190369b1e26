//! Distributional diagnostics: Beta moment fits, QQ pairs, and normality
//! statistics for checking the Gaussian limit of the scaled error
//! fluctuations.

use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::error::{CoreError, Result};

/// Method-of-moments Beta fit: with sample mean `m` and variance `v`,
/// `alpha = m (m(1-m)/v - 1)` and `beta = (1-m) (m(1-m)/v - 1)`.
pub fn beta_moment_fit(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(CoreError::Config("beta fit needs at least 2 samples".into()));
    }
    if let Some(&bad) = samples.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
        return Err(CoreError::Domain(format!(
            "beta samples must lie in [0,1], got {bad}"
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(0.0 < mean && mean < 1.0) {
        return Err(CoreError::Domain(format!(
            "sample mean must lie in (0,1), got {mean}"
        )));
    }
    if var <= 0.0 {
        return Err(CoreError::Domain("sample variance must be positive".into()));
    }
    let cap = mean * (1.0 - mean);
    if var >= cap {
        return Err(CoreError::Domain(format!(
            "moments infeasible for a beta law: variance {var} >= mean(1-mean) = {cap}"
        )));
    }
    let scale = cap / var - 1.0;
    Ok((mean * scale, (1.0 - mean) * scale))
}

/// QQ pairs against a fitted Beta law: sorted samples matched with the
/// distribution quantiles at plotting positions `(i - 0.5) / n`.
pub fn qq_pairs(samples: &[f64], alpha: f64, beta: f64) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(CoreError::Config("qq_pairs needs at least 1 sample".into()));
    }
    let dist = Beta::new(alpha, beta)
        .map_err(|e| CoreError::Config(format!("invalid beta parameters: {e}")))?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, x)| (x, dist.inverse_cdf((i as f64 + 0.5) / n)))
        .collect())
}

/// Output of [`normality_diagnostics`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalityDiagnostics {
    /// Kolmogorov-Smirnov statistic against the normal with the sample's own
    /// mean and standard deviation.
    pub ks_stat: f64,
    /// Standardized third central moment.
    pub skewness: f64,
    /// Standardized fourth central moment minus 3.
    pub excess_kurtosis: f64,
}

/// Normality diagnostics for checking convergence to a Gaussian limit.
pub fn normality_diagnostics(values: &[f64]) -> Result<NormalityDiagnostics> {
    if values.len() < 8 {
        return Err(CoreError::Config(format!(
            "normality diagnostics need at least 8 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / n;
    if m2 <= 0.0 {
        return Err(CoreError::Domain(
            "normality diagnostics undefined for constant values".into(),
        ));
    }
    let m3 = values.iter().map(|&x| (x - mean).powi(3)).sum::<f64>() / n;
    let m4 = values.iter().map(|&x| (x - mean).powi(4)).sum::<f64>() / n;
    let skewness = m3 / m2.powf(1.5);
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;

    let sd = (values.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let normal = Normal::new(mean, sd).expect("positive sd");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ks_stat = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = normal.cdf(x);
        ks_stat = ks_stat
            .max(((i + 1) as f64 / n - f).abs())
            .max((f - i as f64 / n).abs());
    }
    Ok(NormalityDiagnostics {
        ks_stat,
        skewness,
        excess_kurtosis,
    })
}
