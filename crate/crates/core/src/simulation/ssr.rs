use super::analysis::Adjustment;
use super::generate::{ParticipantStream, TrialSample};
use super::monte_carlo::{check_replications, outcome_for, run_replicates, summarize, SimulationReport};
use super::{Result, ScenarioSpec, SimError};
use crate::design::{required_sample_size, ArmSizes, TrialDesign};
use crate::evaluation::{CohortData, Measure};
use crate::rng::{substream, Domain};
use crate::stats::{pearson, sample_variance};
use serde::{Deserialize, Serialize};

const MIN_INTERIM_COMPLETERS: usize = 20;
const MAX_REESTIMATED_VR: f64 = 0.99;

/// Which nuisance parameters the interim look replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReestimationTargets {
    pub variance: bool,
    pub vr: bool,
    pub dropout: bool,
    /// Subtract the between-arm spread implied by the design effect from the
    /// lumped variance.
    #[serde(default)]
    pub debias_variance: bool,
}

impl Default for ReestimationTargets {
    fn default() -> Self {
        Self { variance: true, vr: true, dropout: true, debias_variance: false }
    }
}

/// Blinded sample-size re-estimation at a single interim look.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsrPlan {
    /// Fraction of the planned enrollment observed at the interim.
    pub interim_fraction: f64,
    /// Ceiling on total enrollment.
    pub max_n_total: u64,
    #[serde(default)]
    pub targets: ReestimationTargets,
    #[serde(default = "yes")]
    pub increase_only: bool,
}

fn yes() -> bool {
    true
}

impl SsrPlan {
    pub fn validate(&self, planned: &ArmSizes) -> Result<()> {
        if !(self.interim_fraction > 0.0 && self.interim_fraction < 1.0) {
            return Err(SimError::Invalid(format!("interim fraction {} outside (0, 1)", self.interim_fraction)));
        }
        if self.max_n_total < planned.n_enrolled_total {
            return Err(SimError::Invalid(format!(
                "ceiling {} below planned enrollment {}",
                self.max_n_total, planned.n_enrolled_total
            )));
        }
        Ok(())
    }
}

/// Nuisance estimates from pooled, arm-blind interim data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlindedEstimate {
    pub n_interim_enrolled: usize,
    pub n_interim_completers: usize,
    pub sd_blinded: f64,
    pub vr_blinded: f64,
    pub dropout_observed: f64,
    pub updated_design: TrialDesign,
    pub n_required: ArmSizes,
}

pub(crate) fn blinded_from_columns(
    score: &[f64],
    outcome: &[f64],
    enrolled: usize,
    design: &TrialDesign,
    targets: &ReestimationTargets,
) -> Result<BlindedEstimate> {
    let n = outcome.len();
    if n < MIN_INTERIM_COMPLETERS {
        return Err(SimError::Reestimation(format!("{n} interim completers; need {MIN_INTERIM_COMPLETERS}")));
    }
    let lumped = sample_variance(outcome)?;
    let var = if targets.debias_variance {
        let rt = design.allocation_ratio.treatment_fraction();
        lumped - design.effect_size.powi(2) * rt * (1.0 - rt)
    } else {
        lumped
    };
    if !(var > 0.0) {
        return Err(SimError::Reestimation(format!("non-positive variance estimate {var}")));
    }
    let vr = pearson(score, outcome)?.r.powi(2).min(MAX_REESTIMATED_VR);
    let dropout = 1.0 - n as f64 / enrolled as f64;
    let mut updated = design.clone();
    if targets.variance {
        updated.endpoint_sd = var.sqrt();
    }
    if targets.vr {
        updated.assumed_vr = vr;
    }
    if targets.dropout {
        updated.dropout_rate = dropout.min(0.95);
    }
    let n_required = required_sample_size(&updated)?;
    Ok(BlindedEstimate {
        n_interim_enrolled: enrolled,
        n_interim_completers: n,
        sd_blinded: var.sqrt(),
        vr_blinded: vr,
        dropout_observed: dropout,
        updated_design: updated,
        n_required,
    })
}

fn pick_measure(pooled: &CohortData, design: &TrialDesign) -> Result<Measure> {
    let measures = pooled.measures();
    if let Some(m) = measures.iter().find(|m| m.endpoint == design.endpoint_label) {
        return Ok(m.clone());
    }
    match measures.as_slice() {
        [only] => Ok(only.clone()),
        _ => Err(SimError::Reestimation(format!(
            "cannot choose among {} measures for endpoint '{}'",
            measures.len(),
            design.endpoint_label
        ))),
    }
}

/// Re-estimates SD, variance reduction and dropout from interim data with
/// arm labels ignored, and recomputes the required sample size.
pub fn blinded_reestimate(pooled: &CohortData, design: &TrialDesign, targets: &ReestimationTargets) -> Result<BlindedEstimate> {
    design.validate()?;
    let m = pick_measure(pooled, design)?;
    let outcome = pooled.outcome_column(&m)?;
    let score = pooled.score_column(&m)?;
    let (s, y): (Vec<f64>, Vec<f64>) = score
        .iter()
        .zip(outcome)
        .filter_map(|(s, y)| Some(((*s)?, (*y)?)))
        .unzip();
    blinded_from_columns(&s, &y, pooled.len(), design, targets)
}

fn interim_estimate(sample: &TrialSample, design: &TrialDesign, targets: &ReestimationTargets) -> Result<BlindedEstimate> {
    let (s, y): (Vec<f64>, Vec<f64>) = sample
        .score
        .iter()
        .zip(&sample.outcome)
        .filter_map(|(s, y)| Some((*s, (*y)?)))
        .unzip();
    blinded_from_columns(&s, &y, sample.enrolled(), design, targets)
}

pub(crate) fn final_enrollment(planned: u64, interim: u64, required: u64, plan: &SsrPlan) -> u64 {
    let capped = required.min(plan.max_n_total);
    if plan.increase_only {
        capped.max(planned)
    } else {
        capped.max(interim)
    }
}

/// Monte Carlo of a trial with one blinded re-estimation look.
///
/// Replicate `i` uses the same participant stream as in
/// [`run_monte_carlo`](super::run_monte_carlo); with the ceiling at the
/// planned size and `increase_only` the two reports coincide.
pub fn simulate_with_ssr(
    spec: &ScenarioSpec,
    planned: &ArmSizes,
    plan: &SsrPlan,
    adjustment: Adjustment,
    reps: usize,
    seed: u64,
) -> Result<SimulationReport> {
    spec.validate()?;
    plan.validate(planned)?;
    check_replications(reps)?;
    let n0 = planned.n_enrolled_total;
    let interim = ((plan.interim_fraction * n0 as f64 - 1e-9).ceil() as u64).clamp(1, n0);
    let alpha = spec.design.alpha;
    let outcomes = run_replicates(reps, |rep| {
        let mut sample = TrialSample::default();
        let mut stream = ParticipantStream::new(spec, substream(seed, Domain::TrialReplicate, rep as u64));
        stream.fill(&mut sample, interim as usize);
        let est = interim_estimate(&sample, &spec.design, &plan.targets)?;
        let target = final_enrollment(n0, interim, est.n_required.n_enrolled_total, plan);
        stream.fill(&mut sample, (target - interim) as usize);
        outcome_for(&sample, adjustment, alpha)
    })?;
    summarize(&outcomes, alpha, adjustment, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::test_support::reference_design;
    use crate::simulation::{generate_synthetic_cohort, run_monte_carlo};

    #[test]
    fn ceiling_at_planned_matches_fixed_design() {
        let design = reference_design(0.2);
        let mut spec = ScenarioSpec::at_design_truth(&design);
        spec.true_sd = 1.3;
        let planned = ArmSizes::new(60, 60, 0.0).unwrap();
        let plan = SsrPlan { interim_fraction: 0.5, max_n_total: 120, targets: Default::default(), increase_only: true };
        let a = simulate_with_ssr(&spec, &planned, &plan, Adjustment::Score, 1000, 11).unwrap();
        let b = run_monte_carlo(&spec, &planned, Adjustment::Score, 1000, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn final_n_bounded() {
        let design = reference_design(0.2);
        let mut spec = ScenarioSpec::at_design_truth(&design);
        spec.true_sd = 1.2;
        let planned = required_sample_size(&design).unwrap();
        let plan = SsrPlan { interim_fraction: 0.5, max_n_total: 1100, targets: Default::default(), increase_only: true };
        let r = simulate_with_ssr(&spec, &planned, &plan, Adjustment::Score, 1000, 3).unwrap();
        assert!(r.final_n.min >= planned.n_enrolled_total);
        assert!(r.final_n.max <= 1100);
        assert!(r.final_n.median > planned.n_enrolled_total as f64);
    }

    #[test]
    fn blinded_estimates_near_truth() {
        let design = reference_design(0.3);
        let mut spec = ScenarioSpec::at_design_truth(&design);
        spec.true_sd = 1.5;
        spec.true_dropout = 0.1;
        let cohort = generate_synthetic_cohort(&spec, &ArmSizes::new(5000, 5000, 0.0).unwrap(), 8).unwrap();
        let targets = ReestimationTargets { debias_variance: true, ..Default::default() };
        let est = blinded_reestimate(&cohort, &design, &targets).unwrap();
        assert!((est.sd_blinded - 1.5).abs() < 0.03, "{}", est.sd_blinded);
        assert!((est.vr_blinded - 0.3).abs() < 0.03, "{}", est.vr_blinded);
        assert!(est.n_interim_completers >= 8800);
        assert!((est.dropout_observed - 0.1).abs() < 0.015);
        assert_eq!(est.n_required, required_sample_size(&est.updated_design).unwrap());
    }

    #[test]
    fn zero_benefit_recovers_unreduced_size() {
        let design = reference_design(0.10);
        let mut spec = ScenarioSpec::at_design_truth(&design);
        spec.true_score_correlation = 0.0;
        let cohort = generate_synthetic_cohort(&spec, &ArmSizes::new(20_000, 20_000, 0.0).unwrap(), 21).unwrap();
        let est = blinded_reestimate(&cohort, &design, &ReestimationTargets::default()).unwrap();
        let planned = required_sample_size(&design).unwrap().n_total as f64;
        let ratio = est.n_required.n_total as f64 / (planned / 0.9);
        assert!((ratio - 1.0).abs() < 0.03, "{ratio}");
    }

    #[test]
    fn debias_shifts_variance_by_effect_term() {
        let design = reference_design(0.2);
        let mut spec = ScenarioSpec::at_design_truth(&design);
        spec.true_effect = 0.0;
        let cohort = generate_synthetic_cohort(&spec, &ArmSizes::new(200, 200, 0.0).unwrap(), 4).unwrap();
        let off = blinded_reestimate(&cohort, &design, &ReestimationTargets::default()).unwrap();
        let on_t = ReestimationTargets { debias_variance: true, ..Default::default() };
        let on = blinded_reestimate(&cohort, &design, &on_t).unwrap();
        let delta = off.sd_blinded.powi(2) - on.sd_blinded.powi(2);
        assert!((delta - design.effect_size.powi(2) * 0.25).abs() < 1e-12);
        assert_eq!(off.vr_blinded, on.vr_blinded);
    }

    #[test]
    fn too_few_interim_completers() {
        let design = reference_design(0.2);
        let spec = ScenarioSpec::at_design_truth(&design);
        let cohort = generate_synthetic_cohort(&spec, &ArmSizes::new(9, 10, 0.0).unwrap(), 4).unwrap();
        let err = blinded_reestimate(&cohort, &design, &ReestimationTargets::default()).unwrap_err();
        assert!(matches!(err, SimError::Reestimation(_)));
    }

    #[test]
    fn rejects_bad_plans() {
        let spec = ScenarioSpec::at_design_truth(&reference_design(0.2));
        let planned = ArmSizes::new(60, 60, 0.0).unwrap();
        let low = SsrPlan { interim_fraction: 0.5, max_n_total: 100, targets: Default::default(), increase_only: true };
        assert!(simulate_with_ssr(&spec, &planned, &low, Adjustment::Score, 1000, 1).is_err());
        let zero = SsrPlan { interim_fraction: 0.0, max_n_total: 200, ..low.clone() };
        assert!(simulate_with_ssr(&spec, &planned, &zero, Adjustment::Score, 1000, 1).is_err());
        let full = SsrPlan { interim_fraction: 1.0, max_n_total: 200, ..low };
        assert!(simulate_with_ssr(&spec, &planned, &full, Adjustment::Score, 1000, 1).is_err());
        assert!(simulate_with_ssr(&spec, &planned, &zero, Adjustment::Score, 1000, 1).is_err());
    }

    #[test]
    fn final_enrollment_rules() {
        let plan = SsrPlan { interim_fraction: 0.5, max_n_total: 1200, targets: Default::default(), increase_only: true };
        assert_eq!(final_enrollment(1000, 500, 800, &plan), 1000);
        assert_eq!(final_enrollment(1000, 500, 1100, &plan), 1100);
        assert_eq!(final_enrollment(1000, 500, 5000, &plan), 1200);
        let free = SsrPlan { increase_only: false, ..plan };
        assert_eq!(final_enrollment(1000, 500, 800, &free), 800);
        assert_eq!(final_enrollment(1000, 500, 100, &free), 500);
    }
}
