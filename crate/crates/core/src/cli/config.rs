use super::CliError;
use crate::credibility::{MitigationItem, RiskTolerance};
use crate::design::{AllocationRatio, PowerModel, ReductionStrategy, TrialDesign};
use crate::evaluation::RelevanceGrade;
use crate::simulation::{Adjustment, ScenarioSpec, SsrPlan, StandardCovariateSpec};
use serde::Deserialize;

/// Contents of a `--config` TOML file. Top-level keys describe the primary
/// endpoint; `[[endpoint]]` tables add further endpoints that inherit any
/// key they leave out.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_power")]
    pub target_power: f64,
    pub effect_size: Option<f64>,
    /// Unadjusted total that the effect size is calibrated to.
    pub calibrate_total: Option<u64>,
    #[serde(default = "one")]
    pub endpoint_sd: f64,
    #[serde(default)]
    pub allocation_ratio: AllocationRatio,
    #[serde(default)]
    pub dropout_rate: f64,
    #[serde(default)]
    pub assumed_vr: f64,
    #[serde(default)]
    pub endpoint_label: String,
    #[serde(default)]
    pub power_model: PowerModel,
    #[serde(default = "maintain")]
    pub strategy: ReductionStrategy,
    #[serde(default, rename = "endpoint")]
    pub endpoints: Vec<EndpointConfig>,

    pub true_effect: Option<f64>,
    pub true_sd: Option<f64>,
    pub true_score_correlation: Option<f64>,
    pub true_dropout: Option<f64>,
    pub standard_covariate_correlations: Option<Vec<f64>>,
    /// Planned enrolled total; defaults to the design requirement.
    pub planned_total: Option<u64>,
    pub replications: Option<usize>,
    #[serde(default)]
    pub adjustment: Adjustment,
    pub ssr: Option<SsrPlan>,

    #[serde(default)]
    pub question_of_interest: String,
    #[serde(default)]
    pub context_of_use: String,
    pub min_acceptable_floor_power: Option<f64>,
    pub min_meaningful_reduction: Option<u64>,
    #[serde(default)]
    pub vr_floors: Vec<f64>,
    #[serde(default)]
    pub relevance: Vec<RelevanceConfig>,
    #[serde(default)]
    pub mitigation: Vec<MitigationItem>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub endpoint_label: String,
    pub alpha: Option<f64>,
    pub target_power: Option<f64>,
    pub effect_size: Option<f64>,
    pub calibrate_total: Option<u64>,
    pub endpoint_sd: Option<f64>,
    pub dropout_rate: Option<f64>,
    pub assumed_vr: Option<f64>,
    pub strategy: Option<ReductionStrategy>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelevanceConfig {
    pub cohort: String,
    pub grade: RelevanceGrade,
    #[serde(default)]
    pub rationale: String,
}

fn default_alpha() -> f64 {
    0.05
}
fn default_power() -> f64 {
    0.9
}
fn one() -> f64 {
    1.0
}
fn maintain() -> ReductionStrategy {
    ReductionStrategy::MaintainRatio
}

impl Default for FileConfig {
    fn default() -> Self {
        toml::from_str("calibrate_total = 1000").expect("default config parses")
    }
}

fn effect(effect_size: Option<f64>, calibrate: Option<u64>, d: &TrialDesign, label: &str) -> Result<f64, CliError> {
    match (effect_size, calibrate) {
        (Some(e), None) => Ok(e),
        (None, Some(n)) => TrialDesign::calibrated_effect(n, d.alpha, d.target_power, d.endpoint_sd, d.allocation_ratio)
            .map_err(|e| CliError::Data(format!("endpoint '{label}': {e}"))),
        (Some(_), Some(_)) => Err(CliError::Data(format!("endpoint '{label}': give effect_size or calibrate_total, not both"))),
        (None, None) => Err(CliError::Data(format!("endpoint '{label}': effect_size or calibrate_total is required"))),
    }
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Data(format!("config: {e}")))
    }

    /// Primary design followed by any additional endpoints, with strategies.
    pub fn designs(&self) -> Result<Vec<(TrialDesign, ReductionStrategy)>, CliError> {
        let mut primary = TrialDesign {
            alpha: self.alpha,
            target_power: self.target_power,
            effect_size: 0.0,
            endpoint_sd: self.endpoint_sd,
            allocation_ratio: self.allocation_ratio,
            dropout_rate: self.dropout_rate,
            assumed_vr: self.assumed_vr,
            endpoint_label: self.endpoint_label.clone(),
            power_model: self.power_model,
        };
        primary.effect_size = effect(self.effect_size, self.calibrate_total, &primary, &self.endpoint_label)?;
        let mut out = vec![(primary.clone(), self.strategy)];
        for e in &self.endpoints {
            let mut d = TrialDesign {
                alpha: e.alpha.unwrap_or(primary.alpha),
                target_power: e.target_power.unwrap_or(primary.target_power),
                endpoint_sd: e.endpoint_sd.unwrap_or(primary.endpoint_sd),
                dropout_rate: e.dropout_rate.unwrap_or(primary.dropout_rate),
                assumed_vr: e.assumed_vr.unwrap_or(primary.assumed_vr),
                endpoint_label: e.endpoint_label.clone(),
                ..primary.clone()
            };
            d.effect_size = if e.effect_size.is_none() && e.calibrate_total.is_none() {
                primary.effect_size
            } else {
                effect(e.effect_size, e.calibrate_total, &d, &e.endpoint_label)?
            };
            out.push((d, e.strategy.unwrap_or(self.strategy)));
        }
        for (d, _) in &out {
            d.validate().map_err(|e| CliError::Data(format!("endpoint '{}': {e}", d.endpoint_label)))?;
        }
        Ok(out)
    }

    /// Simulation truth; unspecified truths equal the design assumptions.
    pub fn scenario(&self) -> Result<ScenarioSpec, CliError> {
        let design = self.designs()?.remove(0).0;
        let spec = ScenarioSpec {
            true_effect: self.true_effect.unwrap_or(design.effect_size),
            true_sd: self.true_sd.unwrap_or(design.endpoint_sd),
            true_score_correlation: self.true_score_correlation.unwrap_or(design.assumed_vr.sqrt()),
            true_dropout: self.true_dropout.unwrap_or(design.dropout_rate),
            standard_covariates: self
                .standard_covariate_correlations
                .clone()
                .map(|correlations| StandardCovariateSpec { correlations }),
            design,
        };
        spec.validate().map_err(|e| CliError::Data(format!("scenario: {e}")))?;
        Ok(spec)
    }

    pub fn tolerance(&self) -> Result<RiskTolerance, CliError> {
        match (self.min_acceptable_floor_power, self.min_meaningful_reduction) {
            (Some(p), Some(n)) if p > 0.0 && p < 1.0 => {
                Ok(RiskTolerance { min_acceptable_floor_power: p, min_meaningful_reduction: n })
            }
            (Some(p), Some(_)) => Err(CliError::Data(format!("min_acceptable_floor_power {p} outside (0, 1)"))),
            _ => Err(CliError::Data(
                "report needs min_acceptable_floor_power and min_meaningful_reduction".into(),
            )),
        }
    }
}
