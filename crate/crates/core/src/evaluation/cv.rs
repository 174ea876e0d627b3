use super::audit::{leakage_audit, AuditReport, PredictionInput, TransformProvenance};
use super::model::fit_baseline_prognostic_model;
use super::{evaluate_cohort, CohortData, EvalError, EvaluationResult, Measure, Result};
use crate::rng::stable_hash;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldAssignment {
    /// Participants are spread over `outer_folds` folds.
    ByParticipant,
    /// Each input cohort is one outer fold.
    ByStudy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedCvConfig {
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub lambda_grid: Vec<f64>,
    pub measure: Measure,
    #[serde(default)]
    pub standard_covariates: Vec<String>,
    pub assignment: FoldAssignment,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub selected_lambda: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub audit: AuditReport,
    /// `None` when the held-out fold could not be evaluated.
    pub result: Option<EvaluationResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unevaluable_reason: Option<String>,
}

/// n-weighted average of the evaluable folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledSummary {
    pub n_evaluable: usize,
    pub folds_evaluated: usize,
    pub vr_standard: f64,
    pub vr_full: f64,
    pub vr_incremental: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedCvResult {
    pub folds: Vec<FoldOutcome>,
    pub pooled: Option<PooledSummary>,
}

/// Balanced fold labels that depend only on the ids and the seed: ids are
/// ordered by a seeded hash and dealt round-robin.
fn assign_folds(ids: &[String], k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by_key(|&i| (stable_hash(seed, &ids[i]), i));
    let mut fold = vec![0; ids.len()];
    for (rank, &i) in order.iter().enumerate() {
        fold[i] = rank % k;
    }
    fold
}

fn split(fold_of: &[usize], f: usize) -> (Vec<usize>, Vec<usize>) {
    (0..fold_of.len()).partition(|&i| fold_of[i] != f)
}

fn select_lambda(train: &CohortData, cfg: &NestedCvConfig, outer: usize) -> Result<f64> {
    if cfg.lambda_grid.len() == 1 {
        return Ok(cfg.lambda_grid[0]);
    }
    let inner_seed = cfg.seed ^ stable_hash(cfg.seed, &format!("inner-{outer}"));
    let fold_of = assign_folds(&train.participant_ids, cfg.inner_folds, inner_seed);
    let mut best: Option<(f64, f64)> = None;
    for &lambda in &cfg.lambda_grid {
        let mut sse = 0.0;
        for f in 0..cfg.inner_folds {
            let (fit_idx, val_idx) = split(&fold_of, f);
            let model = fit_baseline_prognostic_model(&train.subset(&fit_idx), &cfg.measure, lambda)?;
            let val = train.subset(&val_idx);
            let preds = model.predict(&val)?;
            let y = val.outcome_column(&cfg.measure)?;
            sse += preds.iter().zip(y).filter_map(|(p, y)| y.map(|y| (y - p).powi(2))).sum::<f64>();
        }
        if best.is_none_or(|(_, b)| sse < b) {
            best = Some((lambda, sse));
        }
    }
    Ok(best.expect("nonempty grid").0)
}

/// Nested cross-validation of the ridge baseline model. Inner folds choose
/// the penalty by validation squared error; the refit outer model scores the
/// held-out fold, which is then evaluated like any cohort.
pub fn nested_cv_evaluate(datasets: &[CohortData], cfg: &NestedCvConfig) -> Result<NestedCvResult> {
    if cfg.inner_folds < 2 {
        return Err(EvalError::Invalid("need at least 2 inner folds".into()));
    }
    if cfg.lambda_grid.is_empty() || cfg.lambda_grid.iter().any(|l| !(*l >= 0.0)) {
        return Err(EvalError::Invalid("lambda grid must be nonempty and nonnegative".into()));
    }
    let parts: Vec<&CohortData> = datasets.iter().collect();
    let pooled = CohortData::concat("pooled", &parts)?;
    let (fold_of, n_folds) = match cfg.assignment {
        FoldAssignment::ByStudy => {
            if datasets.len() < 2 {
                return Err(EvalError::Invalid("fold-by-study needs at least 2 cohorts".into()));
            }
            let labels = datasets.iter().enumerate().flat_map(|(k, c)| std::iter::repeat_n(k, c.len())).collect();
            (labels, datasets.len())
        }
        FoldAssignment::ByParticipant => {
            if cfg.outer_folds < 2 {
                return Err(EvalError::Invalid("need at least 2 outer folds".into()));
            }
            (assign_folds(&pooled.participant_ids, cfg.outer_folds, cfg.seed), cfg.outer_folds)
        }
    };

    let mut folds = Vec::with_capacity(n_folds);
    for f in 0..n_folds {
        let (train_idx, test_idx) = split(&fold_of, f);
        let train = pooled.subset(&train_idx);
        let mut test = pooled.subset(&test_idx);
        test.cohort_id = match cfg.assignment {
            FoldAssignment::ByStudy => datasets[f].cohort_id.clone(),
            FoldAssignment::ByParticipant => format!("fold-{f}"),
        };

        let fitted = select_lambda(&train, cfg, f)
            .and_then(|lambda| Ok((lambda, fit_baseline_prognostic_model(&train, &cfg.measure, lambda)?)));
        let (lambda, model) = match fitted {
            Ok(v) => v,
            Err(e @ EvalError::Underdetermined { .. }) => {
                folds.push(FoldOutcome {
                    fold: f,
                    selected_lambda: f64::NAN,
                    n_train: train.len(),
                    n_test: test.len(),
                    audit: AuditReport { violations: vec![] },
                    result: None,
                    unevaluable_reason: Some(format!("training split: {e}")),
                });
                continue;
            }
            Err(e) => return Err(e),
        };

        let test_ids: BTreeSet<String> = test.participant_ids.iter().cloned().collect();
        let audit = leakage_audit(
            &model.training_ids,
            &test_ids,
            &[
                TransformProvenance { name: "standardization".into(), fit_on_training_only: true },
                TransformProvenance { name: "mean imputation".into(), fit_on_training_only: true },
            ],
            &model
                .feature_names
                .iter()
                .map(|name| PredictionInput { feature: name.clone(), timepoint: 0.0 })
                .collect::<Vec<_>>(),
        );
        if !audit.passed() {
            return Err(EvalError::Leakage(format!("outer fold {f}: {audit}")));
        }

        let scored = model.score_cohort(&test)?;
        let (result, unevaluable_reason) = match evaluate_cohort(&scored, &cfg.measure, &cfg.standard_covariates) {
            Ok(r) => (Some(r), None),
            Err(e @ (EvalError::Insufficient { .. } | EvalError::Stats(_))) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        folds.push(FoldOutcome {
            fold: f,
            selected_lambda: lambda,
            n_train: train.len(),
            n_test: test.len(),
            audit,
            result,
            unevaluable_reason,
        });
    }

    let evaluated: Vec<&EvaluationResult> = folds.iter().filter_map(|f| f.result.as_ref()).collect();
    let pooled = if evaluated.is_empty() {
        None
    } else {
        let n: usize = evaluated.iter().map(|r| r.n_evaluable).sum();
        let avg = |g: fn(&EvaluationResult) -> f64| {
            evaluated.iter().map(|r| g(r) * r.n_evaluable as f64).sum::<f64>() / n as f64
        };
        Some(PooledSummary {
            n_evaluable: n,
            folds_evaluated: evaluated.len(),
            vr_standard: avg(|r| r.vr_standard),
            vr_full: avg(|r| r.vr_full),
            vr_incremental: avg(|r| r.vr_incremental),
        })
    };
    Ok(NestedCvResult { folds, pooled })
}

#[cfg(test)]
mod tests {
    use super::super::model::test_support::linear_cohort;
    use super::*;

    #[test]
    fn folds_are_balanced_and_order_independent() {
        let ids: Vec<String> = (0..103).map(|i| format!("id{i}")).collect();
        let f = assign_folds(&ids, 5, 42);
        for k in 0..5 {
            let c = f.iter().filter(|&&x| x == k).count();
            assert!(c == 20 || c == 21);
        }
        let mut rev = ids.clone();
        rev.reverse();
        let g = assign_folds(&rev, 5, 42);
        for (i, id) in ids.iter().enumerate() {
            let j = rev.iter().position(|r| r == id).unwrap();
            assert_eq!(f[i], g[j]);
        }
        assert_ne!(f, assign_folds(&ids, 5, 43));
    }

    fn cfg(measure: Measure, assignment: FoldAssignment, grid: Vec<f64>) -> NestedCvConfig {
        NestedCvConfig {
            outer_folds: 5,
            inner_folds: 3,
            lambda_grid: grid,
            measure,
            standard_covariates: vec![],
            assignment,
            seed: 7,
        }
    }

    #[test]
    fn learnable_signal_is_recovered() {
        let (c, m) = linear_cohort("A", 300, &[1.0, -0.5, 0.3], 0.0, 1);
        let r = nested_cv_evaluate(&[c], &cfg(m, FoldAssignment::ByParticipant, vec![0.0, 0.1, 10.0])).unwrap();
        let pooled = r.pooled.unwrap();
        assert!(pooled.vr_incremental > 0.95, "{}", pooled.vr_incremental);
        assert_eq!(r.folds.len(), 5);
        assert!(r.folds.iter().all(|f| f.audit.passed()));
    }

    #[test]
    fn pooled_within_fold_range() {
        let (c, m) = linear_cohort("A", 200, &[0.5, 0.2], 2.0, 2);
        let r = nested_cv_evaluate(&[c], &cfg(m, FoldAssignment::ByParticipant, vec![0.01, 1.0])).unwrap();
        let vals: Vec<f64> = r.folds.iter().filter_map(|f| f.result.as_ref()).map(|r| r.vr_full).collect();
        let p = r.pooled.unwrap().vr_full;
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
    }

    #[test]
    fn tiny_fold_marked_unevaluable() {
        let (a, m) = linear_cohort("A", 60, &[1.0], 0.5, 3);
        let (b, _) = linear_cohort("B", 60, &[1.0], 0.5, 4);
        let (c, _) = linear_cohort("C", 2, &[1.0], 0.5, 5);
        let r = nested_cv_evaluate(&[a, b, c], &cfg(m, FoldAssignment::ByStudy, vec![0.1])).unwrap();
        assert!(r.folds[0].result.is_some());
        assert!(r.folds[1].result.is_some());
        assert!(r.folds[2].result.is_none());
        assert!(r.folds[2].unevaluable_reason.as_ref().unwrap().contains("evaluable"));
        assert_eq!(r.pooled.unwrap().folds_evaluated, 2);
    }

    #[test]
    fn untrainable_fold_marked_unevaluable() {
        let (a, m) = linear_cohort("A", 60, &[1.0, 2.0], 0.5, 3);
        let (b, _) = linear_cohort("B", 2, &[1.0, 2.0], 0.5, 4);
        let r = nested_cv_evaluate(&[a, b], &cfg(m, FoldAssignment::ByStudy, vec![0.1])).unwrap();
        assert!(r.folds[0].result.is_none());
        assert!(r.folds[0].unevaluable_reason.as_ref().unwrap().starts_with("training split"));
    }

    #[test]
    fn invalid_configs() {
        let (a, m) = linear_cohort("A", 30, &[1.0], 0.5, 5);
        let mut c = cfg(m, FoldAssignment::ByParticipant, vec![0.1]);
        c.outer_folds = 1;
        assert!(nested_cv_evaluate(&[a.clone()], &c).is_err());
        c.outer_folds = 3;
        c.lambda_grid.clear();
        assert!(nested_cv_evaluate(&[a.clone()], &c).is_err());
        c.lambda_grid = vec![0.1];
        c.assignment = FoldAssignment::ByStudy;
        assert!(nested_cv_evaluate(&[a], &c).is_err());
    }
}
