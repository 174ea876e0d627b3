//! Training a ridge baseline prognostic model and estimating its variance
//! reduction out of sample with nested cross-validation, by participant and
//! leaving one study out at a time.
//!
//! cargo run --example nested_cv

use procova::design::{AllocationRatio, ArmSizes, PowerModel, TrialDesign};
use procova::evaluation::{nested_cv_evaluate, CohortData, FoldAssignment, NestedCvConfig};
use procova::simulation::{generate_synthetic_cohort, ScenarioSpec, StandardCovariateSpec};

fn study(id: &str, n: u64, seed: u64) -> Result<CohortData, Box<dyn std::error::Error>> {
    let design = TrialDesign {
        alpha: 0.05,
        target_power: 0.9,
        effect_size: 0.2,
        endpoint_sd: 1.0,
        allocation_ratio: AllocationRatio::EQUAL,
        dropout_rate: 0.0,
        assumed_vr: 0.0,
        endpoint_label: "cdr".into(),
        power_model: PowerModel::Normal,
    };
    // Three baseline covariates carry 30% of the outcome variance.
    let spec = ScenarioSpec {
        design,
        true_effect: 0.0,
        true_sd: 1.0,
        true_score_correlation: 0.0,
        true_dropout: 0.1,
        standard_covariates: Some(StandardCovariateSpec { correlations: vec![0.4, 0.3, 0.2] }),
    };
    let mut c = generate_synthetic_cohort(&spec, &ArmSizes::new(n / 2, n - n / 2, 0.0)?, seed)?;
    c.cohort_id = id.into();
    c.participant_ids.iter_mut().for_each(|p| *p = format!("{id}-{p}"));
    Ok(c)
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let studies = vec![study("A", 300, 1)?, study("B", 200, 2)?, study("C", 250, 3)?];
    let measure = studies[0].measures()[0].clone();
    for assignment in [FoldAssignment::ByParticipant, FoldAssignment::ByStudy] {
        let cfg = NestedCvConfig {
            outer_folds: 5,
            inner_folds: 4,
            lambda_grid: vec![0.0, 1.0, 10.0, 100.0],
            measure: measure.clone(),
            standard_covariates: vec![],
            assignment,
            seed: 42,
        };
        let result = nested_cv_evaluate(&studies, &cfg)?;
        println!("{assignment:?}");
        for f in &result.folds {
            let vr = f.result.as_ref().map_or("unevaluable".to_string(), |r| format!("{:.1}%", r.vr_full * 100.0));
            println!("  fold {} n_test {} lambda {} audit {} VR {vr}", f.fold, f.n_test, f.selected_lambda, f.audit);
        }
        if let Some(p) = result.pooled {
            println!("  pooled VR {:.1}% over {} participants", p.vr_full * 100.0, p.n_evaluable);
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
