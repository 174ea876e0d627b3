use super::{CohortData, EvalError, Measure, Result};
use crate::rng::{substream, Domain};
use crate::stats::{ols_fit, partial_correlation, percentile, Matrix};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationMethod {
    Correlation,
    RandomizationInference,
    StudyAnalysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub mean: f64,
    pub percentile: f64,
    pub percentile_value: f64,
    pub replicates: usize,
    pub skipped: usize,
    pub seed: u64,
}

/// Variance-reduction metrics for one cohort and measure.
///
/// * `vr_standard`: standard covariates against no adjustment.
/// * `vr_full`: standard covariates plus the prognostic score against none.
/// * `vr_incremental`: adding the score on top of the standard covariates.
///
/// For correlation-based results `(1 − full) = (1 − standard)(1 − incremental)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub cohort_id: String,
    pub endpoint: String,
    pub timepoint: String,
    pub n_evaluable: usize,
    pub vr_standard: f64,
    pub vr_full: f64,
    pub vr_incremental: f64,
    pub method: EvaluationMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_summary: Option<BootstrapSummary>,
}

impl EvaluationResult {
    pub fn measure(&self) -> Measure {
        Measure::new(&self.endpoint, &self.timepoint)
    }
}

/// Complete cases on (score, outcome) with standard covariates mean-imputed
/// over the evaluable participants.
#[derive(Debug, Clone)]
pub(crate) struct Evaluable {
    pub score: Vec<f64>,
    pub outcome: Vec<f64>,
    pub covariates: Vec<(String, Vec<f64>)>,
}

impl Evaluable {
    pub fn prepare(cohort: &CohortData, measure: &Measure, covariates: &[String], min_n: usize) -> Result<Self> {
        let score_col = cohort.score_column(measure)?;
        let outcome_col = cohort.outcome_column(measure)?;
        let idx: Vec<usize> = (0..cohort.len())
            .filter(|&i| score_col[i].is_some() && outcome_col[i].is_some())
            .collect();
        let need = min_n.max(covariates.len() + 3);
        if idx.len() < need {
            return Err(EvalError::Insufficient {
                cohort: cohort.cohort_id.clone(),
                measure: measure.to_string(),
                n: idx.len(),
                need,
            });
        }
        let mut covs = Vec::with_capacity(covariates.len());
        for name in covariates {
            let col = cohort.baseline.get(name).ok_or_else(|| EvalError::UnknownFeature(name.clone()))?;
            let observed: Vec<f64> = idx.iter().filter_map(|&i| col[i]).collect();
            if observed.is_empty() {
                return Err(EvalError::EmptyCovariate(name.clone()));
            }
            let fill = observed.iter().sum::<f64>() / observed.len() as f64;
            covs.push((name.clone(), idx.iter().map(|&i| col[i].unwrap_or(fill)).collect()));
        }
        Ok(Self {
            score: idx.iter().map(|&i| score_col[i].unwrap()).collect(),
            outcome: idx.iter().map(|&i| outcome_col[i].unwrap()).collect(),
            covariates: covs,
        })
    }

    pub fn len(&self) -> usize {
        self.outcome.len()
    }

    pub fn resample(&self, idx: &[usize]) -> Self {
        let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self {
            score: pick(&self.score),
            outcome: pick(&self.outcome),
            covariates: self.covariates.iter().map(|(n, v)| (n.clone(), pick(v))).collect(),
        }
    }

    fn standard_design(&self, extra: &[(&str, &[f64])]) -> Result<Matrix> {
        let mut cols: Vec<(&str, &[f64])> = extra.to_vec();
        cols.extend(self.covariates.iter().map(|(n, v)| (n.as_str(), v.as_slice())));
        Ok(Matrix::with_intercept(self.len(), &cols)?)
    }

    /// (standard, full, incremental) from R² and the partial correlation.
    pub fn vr_metrics(&self) -> Result<(f64, f64, f64)> {
        let standard = self.standard_design(&[])?;
        let vr_standard = if self.covariates.is_empty() {
            0.0
        } else {
            ols_fit(&standard, &self.outcome)?.r_squared()
        };
        let full = standard.append_column("score", &self.score)?;
        let vr_full = ols_fit(&full, &self.outcome)?.r_squared();
        let vr_incremental = partial_correlation(&self.score, &self.outcome, &standard)?.vr_asymptotic;
        Ok((vr_standard, vr_full, vr_incremental))
    }

    /// Squared standard errors of the arm coefficient under no adjustment,
    /// standard covariates, and standard covariates plus the score.
    fn arm_se2(&self, arm: &[f64]) -> Result<(f64, f64, f64)> {
        let none = Matrix::with_intercept(self.len(), &[("arm", arm)])?;
        let se_none = ols_fit(&none, &self.outcome)?.standard_errors[1].powi(2);
        let standard = self.standard_design(&[("arm", arm)])?;
        let se_std = if self.covariates.is_empty() {
            se_none
        } else {
            ols_fit(&standard, &self.outcome)?.standard_errors[1].powi(2)
        };
        let full = standard.append_column("score", &self.score)?;
        let se_full = ols_fit(&full, &self.outcome)?.standard_errors[1].powi(2);
        Ok((se_none, se_std, se_full))
    }
}

/// Correlation-method variance-reduction metrics for one measure.
pub fn evaluate_cohort(cohort: &CohortData, measure: &Measure, standard_covariates: &[String]) -> Result<EvaluationResult> {
    let ev = Evaluable::prepare(cohort, measure, standard_covariates, 3)?;
    let (vr_standard, vr_full, vr_incremental) = ev.vr_metrics()?;
    Ok(EvaluationResult {
        cohort_id: cohort.cohort_id.clone(),
        endpoint: measure.endpoint.clone(),
        timepoint: measure.timepoint.clone(),
        n_evaluable: ev.len(),
        vr_standard,
        vr_full,
        vr_incremental,
        method: EvaluationMethod::Correlation,
        bootstrap_summary: None,
    })
}

/// Mimics trial analyses on a cohort without real arms: each of `k`
/// pseudo-randomizations assigns a 1:1 arm label, and the variance reduction
/// is the mean of `1 − SE²_adjusted / SE²_unadjusted` for the arm effect.
pub fn randomization_inference_vr(
    cohort: &CohortData,
    measure: &Measure,
    standard_covariates: &[String],
    k: usize,
    seed: u64,
) -> Result<EvaluationResult> {
    if k < 100 {
        return Err(EvalError::Invalid(format!("{k} re-randomizations, need at least 100")));
    }
    let ev = Evaluable::prepare(cohort, measure, standard_covariates, 10)?;
    let n = ev.len();
    let replicates: Vec<(f64, f64, f64)> = (0..k)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, Domain::Rerandomization, r as u64);
            let mut arm: Vec<f64> = (0..n).map(|i| if i < n / 2 { 1.0 } else { 0.0 }).collect();
            arm.shuffle(&mut rng);
            let (none, std, full) = ev
                .arm_se2(&arm)
                .map_err(|e| EvalError::Replicate { index: r, source: Box::new(e) })?;
            Ok((1.0 - std / none, 1.0 - full / none, 1.0 - full / std))
        })
        .collect::<Result<_>>()?;
    let kf = k as f64;
    let mean = |f: fn(&(f64, f64, f64)) -> f64| replicates.iter().map(f).sum::<f64>() / kf;
    Ok(EvaluationResult {
        cohort_id: cohort.cohort_id.clone(),
        endpoint: measure.endpoint.clone(),
        timepoint: measure.timepoint.clone(),
        n_evaluable: n,
        vr_standard: mean(|r| r.0),
        vr_full: mean(|r| r.1),
        vr_incremental: mean(|r| r.2),
        method: EvaluationMethod::RandomizationInference,
        bootstrap_summary: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult {
    pub summary: BootstrapSummary,
    /// `vr_full` of every non-degenerate replicate, in replicate order.
    pub distribution: Vec<f64>,
}

/// Nonparametric bootstrap of `vr_full` over participants.
pub fn bootstrap_vr(
    cohort: &CohortData,
    measure: &Measure,
    standard_covariates: &[String],
    replicates: usize,
    pct: f64,
    seed: u64,
) -> Result<BootstrapResult> {
    if replicates < 200 {
        return Err(EvalError::Invalid(format!("{replicates} bootstrap replicates, need at least 200")));
    }
    if !(pct > 0.0 && pct < 100.0) {
        return Err(EvalError::Invalid(format!("percentile {pct} outside (0, 100)")));
    }
    let ev = Evaluable::prepare(cohort, measure, standard_covariates, 3)?;
    let n = ev.len();
    let draws: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, Domain::Bootstrap, b as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            ev.resample(&idx).vr_metrics().ok().map(|m| m.1)
        })
        .collect();
    let distribution: Vec<f64> = draws.iter().flatten().copied().collect();
    let skipped = replicates - distribution.len();
    if skipped * 10 > replicates {
        return Err(EvalError::Unreliable { skipped, total: replicates });
    }
    let mean = distribution.iter().sum::<f64>() / distribution.len() as f64;
    Ok(BootstrapResult {
        summary: BootstrapSummary {
            mean,
            percentile: pct,
            percentile_value: percentile(&distribution, pct)?,
            replicates,
            skipped,
            seed,
        },
        distribution,
    })
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Cohort with score/outcome correlation `rho` in distribution, plus
    /// `n_cov` standard covariates that also load on the outcome.
    pub fn synthetic(n: usize, rho: f64, n_cov: usize, seed: u64) -> (CohortData, Measure) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Measure::new("cdr", "18");
        let mut score = Vec::with_capacity(n);
        let mut outcome = Vec::with_capacity(n);
        let mut covs = vec![Vec::with_capacity(n); n_cov];
        for _ in 0..n {
            let s: f64 = rng.sample(StandardNormal);
            let e: f64 = rng.sample(StandardNormal);
            let mut y = rho * s + (1.0 - rho * rho).sqrt() * e;
            for c in covs.iter_mut() {
                let x: f64 = rng.sample(StandardNormal);
                // covariates correlate with both score and outcome
                let v = 0.5 * x + 0.3 * s;
                y += 0.4 * x;
                c.push(Some(v));
            }
            score.push(Some(s));
            outcome.push(Some(3.0 + 2.0 * y));
        }
        let ids = (0..n).map(|i| format!("P{i:05}")).collect();
        let mut c = CohortData::new("synthetic", ids)
            .unwrap()
            .with_score(m.clone(), score)
            .unwrap()
            .with_outcome(m.clone(), outcome)
            .unwrap();
        for (j, v) in covs.into_iter().enumerate() {
            c = c.with_baseline(format!("cov{j}"), v).unwrap();
        }
        (c, m)
    }
}
