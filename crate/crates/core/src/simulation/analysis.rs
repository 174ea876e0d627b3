use super::generate::TrialSample;
use super::{Result, SimError};
use crate::evaluation::{Arm, CohortData, Measure};
use crate::stats::{normal_cdf, ols_fit, Matrix};
use serde::{Deserialize, Serialize};

/// Which baseline terms enter the analysis model besides the arm indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adjustment {
    Unadjusted,
    /// Prognostic score only.
    #[default]
    Score,
    /// Standard baseline covariates only.
    Standard,
    ScoreAndStandard,
}

impl Adjustment {
    fn uses_score(self) -> bool {
        matches!(self, Self::Score | Self::ScoreAndStandard)
    }

    fn uses_standard(self) -> bool {
        matches!(self, Self::Standard | Self::ScoreAndStandard)
    }
}

/// Treatment-effect estimate from one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialAnalysis {
    pub estimate: f64,
    pub standard_error: f64,
    /// Two-sided, normal reference.
    pub p_value: f64,
    pub n_analyzed: usize,
}

pub(crate) fn analyze_columns(treated: &[f64], y: &[f64], score: Option<&[f64]>, covs: &[(String, Vec<f64>)]) -> Result<TrialAnalysis> {
    let n = y.len();
    let n_t = treated.iter().filter(|&&t| t == 1.0).count();
    if n_t == 0 || n_t == n {
        return Err(SimError::Analysis(format!("need completers in both arms (treated {n_t} of {n})")));
    }
    let mut columns: Vec<(&str, &[f64])> = vec![("treatment", treated)];
    if let Some(s) = score {
        columns.push(("score", s));
    }
    for (name, c) in covs {
        columns.push((name.as_str(), c.as_slice()));
    }
    if n <= columns.len() + 1 {
        return Err(SimError::Analysis(format!("{n} completers for {} terms", columns.len() + 1)));
    }
    let x = Matrix::with_intercept(n, &columns)?;
    let fit = ols_fit(&x, y)?;
    let (estimate, standard_error) = (fit.coefficients[1], fit.standard_errors[1]);
    let z = estimate / standard_error;
    let p_value = 2.0 * normal_cdf(-z.abs())?;
    Ok(TrialAnalysis { estimate, standard_error, p_value, n_analyzed: n })
}

pub(crate) fn analyze_sample(sample: &TrialSample, adjustment: Adjustment) -> Result<TrialAnalysis> {
    let keep: Vec<usize> = (0..sample.enrolled()).filter(|&i| sample.outcome[i].is_some()).collect();
    let treated: Vec<f64> = keep.iter().map(|&i| if sample.treated[i] { 1.0 } else { 0.0 }).collect();
    let y: Vec<f64> = keep.iter().map(|&i| sample.outcome[i].unwrap_or_default()).collect();
    let score: Option<Vec<f64>> = adjustment.uses_score().then(|| keep.iter().map(|&i| sample.score[i]).collect());
    let covs: Vec<(String, Vec<f64>)> = if adjustment.uses_standard() {
        sample
            .covariates
            .iter()
            .enumerate()
            .map(|(j, c)| (format!("cov{j}"), keep.iter().map(|&i| c[i]).collect()))
            .collect()
    } else {
        Vec::new()
    };
    analyze_columns(&treated, &y, score.as_deref(), &covs)
}

/// Complete-case ANCOVA of a single trial.
///
/// Standard adjustment uses every baseline column in the cohort. Rows with a
/// missing arm, outcome or required covariate are excluded.
pub fn analyze_trial(cohort: &CohortData, measure: &Measure, adjustment: Adjustment) -> Result<TrialAnalysis> {
    let outcome = cohort.outcome_column(measure)?;
    let score = if adjustment.uses_score() { Some(cohort.score_column(measure)?) } else { None };
    let baseline: Vec<(&String, &Vec<Option<f64>>)> =
        if adjustment.uses_standard() { cohort.baseline.iter().collect() } else { Vec::new() };
    let keep: Vec<usize> = (0..cohort.len())
        .filter(|&i| {
            cohort.arms[i].is_some()
                && outcome[i].is_some()
                && score.is_none_or(|s| s[i].is_some())
                && baseline.iter().all(|(_, c)| c[i].is_some())
        })
        .collect();
    let treated: Vec<f64> = keep.iter().map(|&i| if cohort.arms[i] == Some(Arm::Treatment) { 1.0 } else { 0.0 }).collect();
    let y: Vec<f64> = keep.iter().map(|&i| outcome[i].unwrap_or_default()).collect();
    let s: Option<Vec<f64>> = score.map(|s| keep.iter().map(|&i| s[i].unwrap_or_default()).collect());
    let covs: Vec<(String, Vec<f64>)> = baseline
        .iter()
        .map(|(name, c)| ((*name).clone(), keep.iter().map(|&i| c[i].unwrap_or_default()).collect()))
        .collect();
    analyze_columns(&treated, &y, s.as_deref(), &covs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, sample_variance};

    #[test]
    fn unadjusted_matches_welch_free_two_sample() {
        let t = [1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let y = [3.0, 4.5, 2.0, 5.0, 1.0, 2.5, 0.5, 2.0, 1.5];
        let a = analyze_columns(&t, &y, None, &[]).unwrap();
        let (yt, yc) = (&y[..4], &y[4..]);
        assert!((a.estimate - (mean(yt) - mean(yc))).abs() < 1e-12);
        let pooled = (3.0 * sample_variance(yt).unwrap() + 4.0 * sample_variance(yc).unwrap()) / 7.0;
        let se = (pooled * (1.0 / 4.0 + 1.0 / 5.0)).sqrt();
        assert!((a.standard_error - se).abs() < 1e-12);
        let p = 2.0 * (1.0 - crate::stats::phi(a.estimate / se));
        assert!((a.p_value - p).abs() < 1e-12);
    }

    fn sample(rho: f64, n: usize, seed: u64) -> TrialSample {
        use super::super::generate::ParticipantStream;
        use super::super::ScenarioSpec;
        use crate::design::test_support::reference_design;
        use crate::rng::{substream, Domain};
        let mut spec = ScenarioSpec::at_design_truth(&reference_design(0.0));
        spec.true_score_correlation = rho;
        let mut s = TrialSample::default();
        ParticipantStream::new(&spec, substream(seed, Domain::TrialReplicate, 0)).fill(&mut s, n);
        s
    }

    #[test]
    fn se_ratio_matches_asymptotic_formula() {
        let s = sample(0.9, 40_000, 1);
        let adj = analyze_sample(&s, Adjustment::Score).unwrap();
        let raw = analyze_sample(&s, Adjustment::Unadjusted).unwrap();
        let ratio = adj.standard_error / raw.standard_error;
        assert!((ratio - (1.0f64 - 0.81).sqrt()).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn affine_rescaled_score_is_invariant() {
        let mut s = sample(0.6, 500, 2);
        let a = analyze_sample(&s, Adjustment::Score).unwrap();
        s.score.iter_mut().for_each(|v| *v = 3.5 * *v - 12.0);
        let b = analyze_sample(&s, Adjustment::Score).unwrap();
        assert!((a.estimate - b.estimate).abs() < 1e-9);
        assert!((a.standard_error - b.standard_error).abs() < 1e-9);
    }

    #[test]
    fn single_arm_rejected() {
        let err = analyze_columns(&[1.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0], None, &[]).unwrap_err();
        assert!(matches!(err, SimError::Analysis(_)));
    }

    #[test]
    fn cohort_and_sample_paths_agree() {
        use super::super::generate::{sample_to_cohort, ParticipantStream};
        use super::super::{ScenarioSpec, StandardCovariateSpec};
        use crate::design::test_support::reference_design;
        use crate::rng::{substream, Domain};
        let mut spec = ScenarioSpec::at_design_truth(&reference_design(0.2));
        spec.true_dropout = 0.15;
        spec.standard_covariates = Some(StandardCovariateSpec { correlations: vec![0.3, 0.2] });
        let mut sample = TrialSample::default();
        ParticipantStream::new(&spec, substream(9, Domain::TrialReplicate, 0)).fill(&mut sample, 300);
        let cohort = sample_to_cohort(&spec, &sample, "x").unwrap();
        let m = cohort.measures()[0].clone();
        for adj in [Adjustment::Unadjusted, Adjustment::Score, Adjustment::Standard, Adjustment::ScoreAndStandard] {
            let a = analyze_sample(&sample, adj).unwrap();
            let b = analyze_trial(&cohort, &m, adj).unwrap();
            assert_eq!(a, b, "{adj:?}");
        }
    }
}
