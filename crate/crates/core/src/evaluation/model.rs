use super::{CohortData, EvalError, Measure, Result};
use crate::stats::{ols_fit, Matrix};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Ridge regression on standardized baseline features, a small stand-in for
/// a trained prognostic model.
///
/// Standardization statistics and imputation means come from the training
/// participants only. A missing feature is imputed with its training mean,
/// which is zero on the standardized scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselinePrognosticModel {
    pub measure: Measure,
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Slopes on the standardized scale, one per feature.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub ridge_lambda: f64,
    pub training_ids: BTreeSet<String>,
}

impl BaselinePrognosticModel {
    /// Slopes per unit of each raw feature.
    pub fn raw_slopes(&self) -> Vec<f64> {
        self.coefficients.iter().zip(&self.sds).map(|(b, s)| b / s).collect()
    }

    /// Prediction for one participant's features, in `feature_names` order.
    pub fn predict_row(&self, features: &[Option<f64>]) -> f64 {
        self.intercept
            + features
                .iter()
                .enumerate()
                .map(|(j, x)| x.map_or(0.0, |v| (v - self.means[j]) / self.sds[j]) * self.coefficients[j])
                .sum::<f64>()
    }

    pub fn predict(&self, cohort: &CohortData) -> Result<Vec<f64>> {
        let cols = self
            .feature_names
            .iter()
            .map(|f| cohort.baseline.get(f).ok_or_else(|| EvalError::UnknownFeature(f.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..cohort.len())
            .map(|i| {
                let row: Vec<Option<f64>> = cols.iter().map(|c| c[i]).collect();
                self.predict_row(&row)
            })
            .collect())
    }

    /// Copy of `cohort` whose score column for the model's measure holds the
    /// model's predictions.
    pub fn score_cohort(&self, cohort: &CohortData) -> Result<CohortData> {
        let preds = self.predict(cohort)?;
        let mut out = cohort.clone();
        out.scores.insert(self.measure.clone(), preds.into_iter().map(Some).collect());
        Ok(out)
    }
}

/// Fits the ridge baseline model on every baseline feature of `training`,
/// using participants with an observed outcome for `measure`. The intercept
/// is not penalized.
pub fn fit_baseline_prognostic_model(
    training: &CohortData,
    measure: &Measure,
    ridge_lambda: f64,
) -> Result<BaselinePrognosticModel> {
    if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
        return Err(EvalError::Invalid(format!("ridge lambda {ridge_lambda} must be nonnegative")));
    }
    let outcome = training.outcome_column(measure)?;
    let rows: Vec<usize> = (0..training.len()).filter(|&i| outcome[i].is_some()).collect();
    let feature_names: Vec<String> = training.baseline.keys().cloned().collect();
    let p = feature_names.len();
    if rows.len() <= p + 1 || p == 0 {
        return Err(EvalError::Underdetermined { n: rows.len(), features: p });
    }

    let mut means = Vec::with_capacity(p);
    let mut sds = Vec::with_capacity(p);
    for name in &feature_names {
        let col = &training.baseline[name];
        let obs: Vec<f64> = rows.iter().filter_map(|&i| col[i]).collect();
        if obs.is_empty() {
            return Err(EvalError::EmptyCovariate(name.clone()));
        }
        let m = obs.iter().sum::<f64>() / obs.len() as f64;
        let sd = if obs.len() > 1 {
            (obs.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (obs.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        means.push(m);
        sds.push(if sd > 0.0 { sd } else { 1.0 });
    }

    let y: Vec<f64> = rows.iter().map(|&i| outcome[i].unwrap()).collect();
    let ybar = y.iter().sum::<f64>() / y.len() as f64;

    // Ridge as least squares on the data augmented with √λ·I rows.
    let n = rows.len();
    let aug_rows = if ridge_lambda > 0.0 { n + p } else { n };
    let mut values = Vec::with_capacity(aug_rows * p);
    for &i in &rows {
        for (j, name) in feature_names.iter().enumerate() {
            values.push(training.baseline[name][i].map_or(0.0, |v| (v - means[j]) / sds[j]));
        }
    }
    let mut response: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    if ridge_lambda > 0.0 {
        let root = ridge_lambda.sqrt();
        for j in 0..p {
            values.extend((0..p).map(|k| if k == j { root } else { 0.0 }));
        }
        response.extend(std::iter::repeat_n(0.0, p));
    }
    let design = Matrix::new(aug_rows, p, values)?.with_names(feature_names.clone())?;
    let coefficients = ols_fit(&design, &response)?.coefficients;

    Ok(BaselinePrognosticModel {
        measure: measure.clone(),
        feature_names,
        means,
        sds,
        coefficients,
        intercept: ybar,
        ridge_lambda,
        training_ids: rows.iter().map(|&i| training.participant_ids[i].clone()).collect(),
    })
}

/// Copy of `cohort` with `feature` marked missing for everyone.
pub fn ablate_feature(cohort: &CohortData, feature: &str) -> Result<CohortData> {
    let mut out = cohort.clone();
    let col = out
        .baseline
        .get_mut(feature)
        .ok_or_else(|| EvalError::UnknownFeature(feature.to_string()))?;
    col.iter_mut().for_each(|v| *v = None);
    out.digest = None;
    Ok(out)
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Features x0..x{p-1}; outcome = Σ w_j x_j + noise_sd · ε.
    pub fn linear_cohort(id: &str, n: usize, weights: &[f64], noise_sd: f64, seed: u64) -> (CohortData, Measure) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Measure::new("cdr", "18");
        let p = weights.len();
        let mut feats = vec![Vec::with_capacity(n); p];
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let mut v = 0.0;
            for (j, w) in weights.iter().enumerate() {
                let x: f64 = 10.0 * j as f64 + (1.0 + j as f64) * rng.sample::<f64, _>(StandardNormal);
                v += w * x;
                feats[j].push(Some(x));
            }
            v += noise_sd * rng.sample::<f64, _>(StandardNormal);
            y.push(Some(v));
        }
        let ids = (0..n).map(|i| format!("{id}-{i:04}")).collect();
        let mut c = CohortData::new(id, ids).unwrap().with_outcome(m.clone(), y).unwrap();
        for (j, f) in feats.into_iter().enumerate() {
            c = c.with_baseline(format!("x{j}"), f).unwrap();
        }
        (c, m)
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::linear_cohort;
    use super::*;

    fn column(c: &CohortData, name: &str) -> Vec<f64> {
        c.baseline[name].iter().map(|v| v.unwrap()).collect()
    }

    #[test]
    fn zero_lambda_single_feature_is_ols() {
        let (c, m) = linear_cohort("A", 40, &[1.5], 1.0, 1);
        let model = fit_baseline_prognostic_model(&c, &m, 0.0).unwrap();
        let x = column(&c, "x0");
        let y: Vec<f64> = c.outcomes[&m].iter().map(|v| v.unwrap()).collect();
        let fit = ols_fit(&Matrix::with_intercept(40, &[("x", &x[..])]).unwrap(), &y).unwrap();
        assert!((model.raw_slopes()[0] - fit.coefficients[1]).abs() < 1e-10);
    }

    #[test]
    fn huge_lambda_shrinks_to_mean() {
        let (c, m) = linear_cohort("A", 40, &[1.5, -2.0, 0.5], 1.0, 2);
        let model = fit_baseline_prognostic_model(&c, &m, 1e12).unwrap();
        assert!(model.coefficients.iter().all(|b| b.abs() < 1e-6));
        let ybar = c.outcomes[&m].iter().map(|v| v.unwrap()).sum::<f64>() / 40.0;
        assert!((model.intercept - ybar).abs() < 1e-12);
    }

    // Oracle: Gaussian elimination on (ZᵀZ + λI) b = Zᵀ(y − ȳ).
    fn penalized_normal_equations(z: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
        let p = z[0].len();
        let ybar = y.iter().sum::<f64>() / y.len() as f64;
        let mut a = vec![vec![0.0; p + 1]; p];
        for (row, &yi) in z.iter().zip(y) {
            for i in 0..p {
                for j in 0..p {
                    a[i][j] += row[i] * row[j];
                }
                a[i][p] += row[i] * (yi - ybar);
            }
        }
        for (i, r) in a.iter_mut().enumerate() {
            r[i] += lambda;
        }
        for col in 0..p {
            let piv = (col..p).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
            a.swap(col, piv);
            for r in (col + 1)..p {
                let f = a[r][col] / a[col][col];
                for c in col..=p {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
        let mut b = vec![0.0; p];
        for i in (0..p).rev() {
            b[i] = (a[i][p] - ((i + 1)..p).map(|j| a[i][j] * b[j]).sum::<f64>()) / a[i][i];
        }
        b
    }

    #[test]
    fn ridge_matches_penalized_normal_equations() {
        let (c, m) = linear_cohort("A", 60, &[1.0, -0.5, 0.25, 2.0, 0.0], 2.0, 3);
        let model = fit_baseline_prognostic_model(&c, &m, 1.0).unwrap();
        let z: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                (0..5)
                    .map(|j| (c.baseline[&format!("x{j}")][i].unwrap() - model.means[j]) / model.sds[j])
                    .collect()
            })
            .collect();
        let y: Vec<f64> = c.outcomes[&m].iter().map(|v| v.unwrap()).collect();
        let want = penalized_normal_equations(&z, &y, 1.0);
        for j in 0..5 {
            assert!((model.coefficients[j] - want[j]).abs() < 1e-8, "{j}");
        }
    }

    #[test]
    fn statistics_come_from_training_only() {
        let (c, m) = linear_cohort("A", 50, &[1.0, 1.0], 1.0, 4);
        let train = c.subset(&(0..30).collect::<Vec<_>>());
        let model = fit_baseline_prognostic_model(&train, &m, 0.5).unwrap();
        let x0 = column(&train, "x0");
        assert!((model.means[0] - x0.iter().sum::<f64>() / 30.0).abs() < 1e-12);
        assert_eq!(model.training_ids.len(), 30);
        assert!(model.training_ids.contains("A-0000"));
        assert!(!model.training_ids.contains("A-0040"));
    }

    #[test]
    fn underdetermined_rejected() {
        let (c, m) = linear_cohort("A", 3, &[1.0, 1.0, 1.0], 1.0, 5);
        assert!(matches!(
            fit_baseline_prognostic_model(&c, &m, 1.0),
            Err(EvalError::Underdetermined { n: 3, features: 3 })
        ));
        assert!(fit_baseline_prognostic_model(&c, &m, -1.0).is_err());
    }

    #[test]
    fn ablation_equals_training_mean_imputation() {
        let (c, m) = linear_cohort("A", 50, &[1.0, -1.0, 0.5], 1.0, 6);
        let model = fit_baseline_prognostic_model(&c, &m, 0.1).unwrap();
        let ablated = ablate_feature(&c, "x1").unwrap();
        let a = model.predict(&ablated).unwrap();
        let mut at_mean = c.clone();
        at_mean.baseline.insert("x1".into(), vec![Some(model.means[1]); 50]);
        let b = model.predict(&at_mean).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
        assert!(matches!(ablate_feature(&c, "zz"), Err(EvalError::UnknownFeature(_))));
    }

    #[test]
    fn ablating_zero_weight_feature_keeps_scores() {
        let (c, m) = linear_cohort("A", 50, &[1.0, 2.0], 0.5, 7);
        let mut model = fit_baseline_prognostic_model(&c, &m, 0.1).unwrap();
        model.coefficients[1] = 0.0;
        let a = model.predict(&c).unwrap();
        let b = model.predict(&ablate_feature(&c, "x1").unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
