//! Monte Carlo operating characteristics of covariate-adjusted trials.
//!
//! Scores and control outcomes are bivariate normal with correlation ρ, so
//! the variance reduction available from adjusting for the score is exactly
//! ρ². Participants are generated one at a time in enrollment order from a
//! per-replicate stream; a trial that is later extended (blinded sample-size
//! re-estimation) sees the same first participants as the fixed-size trial.

mod analysis;
mod generate;
mod monte_carlo;
mod ssr;


pub use analysis::{analyze_trial, Adjustment, TrialAnalysis};
pub use generate::generate_synthetic_cohort;
pub use monte_carlo::{analytic_power, run_monte_carlo, FinalNSummary, SimulationReport};
pub use ssr::{blinded_reestimate, simulate_with_ssr, BlindedEstimate, ReestimationTargets, SsrPlan};


use crate::design::{DesignError, TrialDesign};
use crate::evaluation::EvalError;
use crate::stats::StatsError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("analysis failed: {0}")]
    Analysis(String),
    #[error("re-estimation failed: {0}")]
    Reestimation(String),
    #[error("replicate {index} failed: {source}")]
    Replicate { index: usize, source: Box<SimError> },
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Baseline covariates that load on the outcome independently of the score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardCovariateSpec {
    /// Correlation of each covariate with the control outcome.
    pub correlations: Vec<f64>,
}

/// Truth against which a design is stress-tested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub design: TrialDesign,
    pub true_effect: f64,
    pub true_sd: f64,
    /// Correlation between score and control outcome.
    pub true_score_correlation: f64,
    #[serde(default)]
    pub true_dropout: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_covariates: Option<StandardCovariateSpec>,
}

impl ScenarioSpec {
    /// Scenario whose truth equals the design assumptions (ρ = √VR).
    pub fn at_design_truth(design: &TrialDesign) -> Self {
        Self {
            design: design.clone(),
            true_effect: design.effect_size,
            true_sd: design.endpoint_sd,
            true_score_correlation: design.assumed_vr.sqrt(),
            true_dropout: design.dropout_rate,
            standard_covariates: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.design.validate()?;
        let rho = self.true_score_correlation;
        if !(rho > -1.0 && rho < 1.0) {
            return Err(SimError::Invalid(format!("score correlation {rho} outside (-1, 1)")));
        }
        if !(self.true_sd > 0.0 && self.true_sd.is_finite()) || !self.true_effect.is_finite() {
            return Err(SimError::Invalid("true sd must be positive and effect finite".into()));
        }
        if !(0.0..1.0).contains(&self.true_dropout) {
            return Err(SimError::Invalid(format!("dropout {} outside [0, 1)", self.true_dropout)));
        }
        if self.residual_weight_sq() <= 0.0 {
            return Err(SimError::Invalid("score and covariate correlations explain all variance".into()));
        }
        Ok(())
    }

    /// Variance reduction available from the score alone.
    pub fn implied_vr(&self) -> f64 {
        self.true_score_correlation.powi(2)
    }

    pub(crate) fn covariate_loadings(&self) -> &[f64] {
        self.standard_covariates.as_ref().map_or(&[], |s| s.correlations.as_slice())
    }

    pub(crate) fn residual_weight_sq(&self) -> f64 {
        1.0 - self.implied_vr() - self.covariate_loadings().iter().map(|c| c * c).sum::<f64>()
    }
}
