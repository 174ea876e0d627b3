//! Deterministic numerical primitives shared by the design, evaluation and
//! simulation layers.

mod correlation;
mod matrix;
mod normal;
mod ols;

pub use correlation::{partial_correlation, pearson, CorrelationResult};
pub use matrix::Matrix;
pub use normal::{normal_cdf, normal_pdf, normal_quantile};
pub(crate) use normal::{phi, phi_inv};
pub use ols::{ols_fit, ols_fit_with, OlsFit, OlsOptions, SeKind, COLLINEARITY_TOLERANCE};

use thiserror::Error;

/// Failures raised by the numerical primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("design is collinear at column {index} ({name})")]
    Collinear { index: usize, name: String },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("too few observations: need at least {need}, got {got}")]
    TooFewObservations { need: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, StatsError>;

/// Arithmetic mean. Empty input yields NaN.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance (n - 1 denominator).
pub fn sample_variance(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(StatsError::TooFewObservations {
            need: 2,
            got: values.len(),
        });
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Ok(ss / (values.len() - 1) as f64)
}

/// Linear-interpolation percentile (`p` in [0, 100]) of unsorted data, the
/// same convention as the default in most numerical packages.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(StatsError::TooFewObservations { need: 1, got: 0 });
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(StatsError::Domain(format!("percentile {p} outside [0, 100]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Centered sum of squares, flagged as zero when it is negligible relative to
/// the raw magnitude of the data.
pub(crate) fn centered_ss(values: &[f64]) -> (f64, bool) {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    let raw: f64 = values.iter().map(|v| v * v).sum();
    let negligible = ss == 0.0 || ss <= COLLINEARITY_TOLERANCE * COLLINEARITY_TOLERANCE * raw;
    (ss, negligible)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates_linearly() {
        let d = [0.25, 0.05, 0.15, 0.10, 0.20];
        assert!((percentile(&d, 20.0).unwrap() - 0.09).abs() < 1e-12);
        assert_eq!(percentile(&d, 0.0).unwrap(), 0.05);
        assert_eq!(percentile(&d, 100.0).unwrap(), 0.25);
        assert!(percentile(&[], 50.0).is_err());
    }

    #[test]
    fn variance_of_small_sample() {
        assert!((sample_variance(&[1.0, 2.0, 3.0, 4.0]).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!(sample_variance(&[1.0]).is_err());
    }
}
