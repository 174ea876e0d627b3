//! Evaluation of prognostic covariates on historical cohorts.

mod audit;
mod cohort;
mod cv;
mod metrics;
mod model;
mod table;

pub use audit::{leakage_audit, AuditReport, PredictionInput, TransformProvenance, Violation};
pub use cohort::{Arm, CohortData, Measure, Relevance, RelevanceGrade};
pub use cv::{nested_cv_evaluate, FoldAssignment, FoldOutcome, NestedCvConfig, NestedCvResult, PooledSummary};
pub use metrics::{
    bootstrap_vr, evaluate_cohort, randomization_inference_vr, BootstrapResult, BootstrapSummary,
    EvaluationMethod, EvaluationResult,
};
pub use model::{ablate_feature, fit_baseline_prognostic_model, BaselinePrognosticModel};
pub use table::{format_percent, parse_step6_csv, to_step6_csv};

use crate::stats::StatsError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("{cohort}: {measure} has {n} evaluable participants, need at least {need}")]
    Insufficient { cohort: String, measure: String, n: usize, need: usize },
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("cohort {cohort} has no {kind} column for {measure}")]
    MissingMeasure { cohort: String, kind: &'static str, measure: String },
    #[error("covariate {0:?} has no observed values among evaluable participants")]
    EmptyCovariate(String),
    #[error("duplicate participant id {0:?}")]
    DuplicateId(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("replicate {index} failed: {source}")]
    Replicate { index: usize, source: Box<EvalError> },
    #[error("{skipped} of {total} bootstrap replicates were degenerate (limit 10%)")]
    Unreliable { skipped: usize, total: usize },
    #[error("{n} training participants for {features} features")]
    Underdetermined { n: usize, features: usize },
    #[error("leakage detected: {0}")]
    Leakage(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

pub type Result<T> = std::result::Result<T, EvalError>;
