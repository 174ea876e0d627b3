//! Design and risk assessment for randomized trials that adjust their primary
//! analysis for a model-derived prognostic covariate.
//!
//! The crate is layered bottom-up:
//!
//! * [`stats`]: normal distribution, least squares, correlations.
//! * [`design`]: power and sample size under covariate adjustment,
//!   reduction strategies, effective-sample-size risk curves.
//! * [`evaluation`]: variance-reduction metrics on historical cohorts,
//!   bootstrap and re-randomization uncertainty, nested cross-validation of a
//!   ridge baseline model, feature ablation and leakage audits.
//! * [`simulation`]: Monte Carlo operating characteristics, including blinded
//!   sample-size re-estimation.
//! * [`credibility`]: risk tables, reduction recommendation and the
//!   documentation report (JSON / Markdown).
//! * [`cli`]: the `procova` command-line driver.

pub mod cli;
pub mod credibility;
pub mod design;
pub mod evaluation;
pub mod fixtures;
pub mod rng;
pub mod simulation;
pub mod stats;
