use procova::design::{AllocationRatio, ArmSizes, PowerModel, TrialDesign};
use procova::evaluation::{
    ablate_feature, bootstrap_vr, evaluate_cohort, fit_baseline_prognostic_model, nested_cv_evaluate,
    randomization_inference_vr, CohortData, FoldAssignment, Measure, NestedCvConfig,
};
use procova::simulation::{generate_synthetic_cohort, ScenarioSpec, StandardCovariateSpec};

fn scenario(rho: f64, covariates: Option<Vec<f64>>) -> ScenarioSpec {
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
    ScenarioSpec {
        true_effect: 0.0,
        true_score_correlation: rho,
        standard_covariates: covariates.map(|correlations| StandardCovariateSpec { correlations }),
        ..ScenarioSpec::at_design_truth(&design)
    }
}

fn cohort(spec: &ScenarioSpec, n: u64, seed: u64, id: &str) -> CohortData {
    let mut c = generate_synthetic_cohort(spec, &ArmSizes::new(n - n / 2, n / 2, 0.0).unwrap(), seed).unwrap();
    c.cohort_id = id.into();
    c.participant_ids.iter_mut().for_each(|p| *p = format!("{id}-{p}"));
    c
}

fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

#[test]
fn synthetic_phase2_cohort_reproduces_published_reduction() {
    let c = cohort(&scenario(0.159f64.sqrt(), None), 453, 159, "Phase 2");
    let m = c.measures()[0].clone();
    let r = evaluate_cohort(&c, &m, &[]).unwrap();
    assert_eq!(r.n_evaluable, 453);
    assert!((r.vr_full - 0.159).abs() < 0.03, "{}", r.vr_full);
}

#[test]
fn randomization_inference_on_moderate_cohort() {
    let c = cohort(&scenario(0.4, None), 300, 40, "ri");
    let m = c.measures()[0].clone();
    let r = randomization_inference_vr(&c, &m, &[], 500, 41).unwrap();
    assert!((r.vr_full - 0.16).abs() < 0.03, "{}", r.vr_full);
}

#[test]
fn bootstrap_percentile_pinned() {
    let c = cohort(&scenario(0.159f64.sqrt(), None), 453, 159, "Phase 2");
    let m = c.measures()[0].clone();
    let b = bootstrap_vr(&c, &m, &[], 1000, 20.0, 2024).unwrap().summary;
    assert!(b.percentile_value < b.mean);
    for v in [b.mean, b.percentile_value] {
        assert!((0.10..=0.22).contains(&v), "{v}");
    }
    assert!((b.mean - PINNED_BOOTSTRAP_MEAN).abs() <= 0.02, "{}", b.mean);
    assert!((b.percentile_value - PINNED_BOOTSTRAP_P20).abs() <= 0.02, "{}", b.percentile_value);
}

// First run of seed 2024, kept as a regression anchor.
const PINNED_BOOTSTRAP_MEAN: f64 = 0.1747;
const PINNED_BOOTSTRAP_P20: f64 = 0.1467;

#[test]
fn ablating_the_dominant_feature_matches_direct_recomputation() {
    let spec = scenario(0.0, Some(vec![0.6, 0.2, 0.1]));
    let train = cohort(&spec, 400, 1, "train");
    let test = cohort(&spec, 300, 2, "test");
    let m = train.measures()[0].clone();
    let model = fit_baseline_prognostic_model(&train, &m, 1.0).unwrap();
    let dominant = (0..model.coefficients.len())
        .max_by(|&a, &b| model.coefficients[a].abs().total_cmp(&model.coefficients[b].abs()))
        .unwrap();
    assert_eq!(model.feature_names[dominant], "cov0");

    let before = evaluate_cohort(&model.score_cohort(&test).unwrap(), &m, &[]).unwrap().vr_full;
    let ablated = ablate_feature(&test, "cov0").unwrap();
    let after = evaluate_cohort(&model.score_cohort(&ablated).unwrap(), &m, &[]).unwrap().vr_full;

    let y: Vec<f64> = test.outcomes[&m].iter().map(|v| v.unwrap()).collect();
    let scores_without: Vec<f64> = (0..test.len())
        .map(|i| {
            model.intercept
                + model
                    .feature_names
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != dominant)
                    .map(|(j, f)| (test.baseline[f][i].unwrap() - model.means[j]) / model.sds[j] * model.coefficients[j])
                    .sum::<f64>()
        })
        .collect();
    let oracle_after = r_squared(&scores_without, &y);
    assert!((after - oracle_after).abs() < 1e-10, "{after} vs {oracle_after}");
    assert!(before - after > 0.2, "{before} -> {after}");
}

#[test]
fn fold_by_study_equals_manual_retrain_on_other_studies() {
    let spec = scenario(0.0, Some(vec![0.5, 0.3]));
    let studies = vec![cohort(&spec, 150, 11, "A"), cohort(&spec, 120, 12, "B"), cohort(&spec, 90, 13, "C")];
    let m = studies[0].measures()[0].clone();
    let cfg = NestedCvConfig {
        outer_folds: 3,
        inner_folds: 3,
        lambda_grid: vec![0.1, 1.0, 10.0],
        measure: m.clone(),
        standard_covariates: vec![],
        assignment: FoldAssignment::ByStudy,
        seed: 3,
    };
    let cv = nested_cv_evaluate(&studies, &cfg).unwrap();
    assert_eq!(cv.folds.len(), 3);
    for (f, held_out) in studies.iter().enumerate() {
        let fold = &cv.folds[f];
        assert!(fold.audit.passed());
        assert_eq!(fold.n_test, held_out.len());
        let others: Vec<&CohortData> = studies.iter().enumerate().filter(|&(k, _)| k != f).map(|(_, c)| c).collect();
        let train = CohortData::concat("train", &others).unwrap();
        let model = fit_baseline_prognostic_model(&train, &m, fold.selected_lambda).unwrap();
        let oracle = evaluate_cohort(&model.score_cohort(held_out).unwrap(), &m, &[]).unwrap();
        let got = fold.result.as_ref().unwrap();
        assert_eq!(got.cohort_id, held_out.cohort_id);
        assert!((got.vr_full - oracle.vr_full).abs() < 1e-12, "{} vs {}", got.vr_full, oracle.vr_full);
    }
}

#[test]
fn measure_of_synthetic_cohort_is_final_visit() {
    let c = cohort(&scenario(0.3, None), 20, 1, "x");
    assert_eq!(c.measures(), vec![Measure::new("cdr", "final")]);
}
