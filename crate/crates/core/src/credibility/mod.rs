//! Documentation payload for a credibility assessment: evaluation and design
//! tables, floor-power risk, declared mitigations and the reduction decision.

mod recommend;
mod render;
mod report;
mod risk;

pub use recommend::{recommend_reduction, Recommendation, RiskTolerance};
pub use render::{parse_report_json, render, ReportFormat};
pub use report::{
    assemble_report, CredibilityReport, DesignEntry, DesignInput, EvaluationEntry, Provenance, ReportInputs,
    SCHEMA_VERSION,
};
pub use risk::{risk_quantification, RiskRow, RiskTable};

use crate::design::{ConservativeMethod, DesignError};
use crate::simulation::SsrPlan;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CredibilityError {
    #[error("report validation failed: {0}")]
    Validation(String),
    #[error("malformed report: {0}")]
    Parse(String),
    #[error(transparent)]
    Design(#[from] DesignError),
}

pub type Result<T> = std::result::Result<T, CredibilityError>;

/// A declared risk-mitigation measure with its kind-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mitigation {
    /// Evaluated variance reductions are discounted before sizing.
    ConservativeVr { method: ConservativeMethod },
    BlindedSsr { plan: SsrPlan },
    /// Standard baseline covariates stay in the analysis model.
    StandardCovariateProtection { covariates: Vec<String> },
    Other { label: String },
}

/// Numbers backing a mitigation's claimed benefit, e.g. simulated power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantitativeBenefit {
    pub text: String,
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationItem {
    #[serde(flatten)]
    pub mitigation: Mitigation,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantitative_benefit: Option<QuantitativeBenefit>,
}

impl MitigationItem {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CredibilityError::Validation(m));
        match &self.mitigation {
            Mitigation::ConservativeVr { method } => {
                // Probe the method on a valid point to surface parameter errors.
                crate::design::conservative_vr(0.5, method)?;
            }
            Mitigation::BlindedSsr { plan } => {
                if !(plan.interim_fraction > 0.0 && plan.interim_fraction < 1.0) {
                    return bad(format!("SSR interim fraction {} outside (0, 1)", plan.interim_fraction));
                }
            }
            Mitigation::StandardCovariateProtection { covariates } if covariates.is_empty() => {
                return bad("standard covariate protection lists no covariates".into());
            }
            Mitigation::Other { label } if label.trim().is_empty() => {
                return bad("mitigation of kind 'other' needs a label".into());
            }
            _ => {}
        }
        Ok(())
    }

    pub fn kind_label(&self) -> &'static str {
        match self.mitigation {
            Mitigation::ConservativeVr { .. } => "conservative VR",
            Mitigation::BlindedSsr { .. } => "blinded sample-size re-estimation",
            Mitigation::StandardCovariateProtection { .. } => "standard covariate protection",
            Mitigation::Other { .. } => "other",
        }
    }
}
