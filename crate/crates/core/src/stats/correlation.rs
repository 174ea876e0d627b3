use super::{centered_ss, ols_fit, Matrix, Result, StatsError};
use serde::{Deserialize, Serialize};

/// A correlation together with its asymptotic variance-reduction reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    /// Always exactly `r * r`.
    pub vr_asymptotic: f64,
}

impl CorrelationResult {
    fn new(r: f64, n: usize) -> Self {
        let r = r.clamp(-1.0, 1.0);
        Self { r, n, vr_asymptotic: r * r }
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(StatsError::Dimension(format!("lengths {} and {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewObservations { need: 3, got: x.len() });
    }
    let (sxx, x_flat) = centered_ss(x);
    let (syy, y_flat) = centered_ss(y);
    if x_flat || y_flat {
        return Err(StatsError::Degenerate("zero variance".into()));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(CorrelationResult::new(sxy / (sxx.sqrt() * syy.sqrt()), x.len()))
}

/// Correlation of `x` and `y` after both are residualized on `controls`
/// (which should carry an intercept column).
pub fn partial_correlation(x: &[f64], y: &[f64], controls: &Matrix) -> Result<CorrelationResult> {
    let rx = ols_fit(controls, x)?.residuals;
    let ry = ols_fit(controls, y)?.residuals;
    // Residuals that are negligible relative to the original spread mean the
    // variable is spanned by the controls.
    let (sx, _) = centered_ss(x);
    let (sy, _) = centered_ss(y);
    let tol = super::COLLINEARITY_TOLERANCE * super::COLLINEARITY_TOLERANCE;
    let rss_x: f64 = rx.iter().map(|v| v * v).sum();
    let rss_y: f64 = ry.iter().map(|v| v * v).sum();
    if rss_x <= tol * sx || rss_y <= tol * sy {
        return Err(StatsError::Degenerate("zero residual variance after controls".into()));
    }
    pearson(&rx, &ry).map(|c| CorrelationResult::new(c.r, x.len()))
}
