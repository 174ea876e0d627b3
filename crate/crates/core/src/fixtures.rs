//! Published evaluation results for the Alzheimer's disease example and
//! synthetic cohorts that reproduce them exactly.

use crate::evaluation::{Arm, CohortData, EvalError, EvaluationMethod, EvaluationResult, Measure};
use crate::rng::{substream, Domain};
use rand::Rng;
use rand_distr::StandardNormal;

/// (cohort, endpoint, n, [VR % at 12, 18, 24 months]).
type Row = (&'static str, &'static str, usize, [Option<f64>; 3]);

const TIMEPOINTS: [&str; 3] = ["12", "18", "24"];

const TABLE_2: [Row; 8] = [
    ("Phase 2", "CDR-SB", 453, [Some(16.1), Some(15.9), Some(13.0)]),
    ("Study A control", "CDR-SB", 116, [Some(13.8), Some(14.0), Some(13.0)]),
    ("Study B control", "CDR-SB", 136, [Some(8.5), Some(9.5), None]),
    ("Study C control", "CDR-SB", 46, [Some(21.1), None, None]),
    ("Phase 2", "ADAS-Cog 14", 453, [Some(8.5), Some(4.5), Some(9.3)]),
    ("Study A control", "ADAS-Cog 11", 93, [Some(4.3), Some(1.8), Some(5.2)]),
    ("Study B control", "ADAS-Cog 11", 132, [Some(10.3), Some(12.4), None]),
    ("Study C control", "ADAS-Cog 11", 46, [Some(30.9), None, None]),
];

/// Score-attributable variance reduction per cohort, endpoint and month
/// (18 cells). No standard covariates were used, so `vr_full` equals
/// `vr_incremental`.
pub fn published_results() -> Vec<EvaluationResult> {
    let mut out = Vec::new();
    for (cohort, endpoint, n, cells) in TABLE_2 {
        for (tp, v) in TIMEPOINTS.iter().zip(cells) {
            if let Some(pct) = v {
                let vr = pct / 100.0;
                out.push(EvaluationResult {
                    cohort_id: cohort.into(),
                    endpoint: endpoint.into(),
                    timepoint: (*tp).into(),
                    n_evaluable: n,
                    vr_standard: 0.0,
                    vr_full: vr,
                    vr_incremental: vr,
                    method: EvaluationMethod::StudyAnalysis,
                    bootstrap_summary: None,
                });
            }
        }
    }
    out
}

/// Rescales `x` to zero mean and unit sum of squares.
fn standardize(x: &mut [f64]) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= m);
    let ss = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= ss);
}

/// A cohort of `n` participants in which every listed measure's score and
/// outcome have sample squared correlation exactly `vr`. The first
/// `observed` participants of each measure have values; the rest are missing.
pub fn exact_correlation_cohort(
    cohort_id: &str,
    n: usize,
    arm: Option<Arm>,
    measures: &[(Measure, f64, usize)],
    seed: u64,
) -> Result<CohortData, EvalError> {
    let ids = (1..=n).map(|i| format!("P{i:04}")).collect();
    let mut cohort = CohortData::new(cohort_id, ids)?.with_arms(vec![arm; n])?;
    for (k, (measure, vr, observed)) in measures.iter().enumerate() {
        if !(0.0..1.0).contains(vr) || *observed < 3 || *observed > n {
            return Err(EvalError::Invalid(format!("cannot build {measure} with vr {vr} on {observed} of {n}")));
        }
        let mut rng = substream(seed, Domain::SyntheticCohort, k as u64);
        let m = *observed;
        let mut s: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let mut e: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        standardize(&mut s);
        standardize(&mut e);
        let proj: f64 = s.iter().zip(&e).map(|(a, b)| a * b).sum();
        e.iter_mut().zip(&s).for_each(|(v, a)| *v -= proj * a);
        standardize(&mut e);
        let r = vr.sqrt();
        let w = (1.0 - vr).sqrt();
        // Clinical-looking scales: score and outcome around 2 to 4 points.
        let score: Vec<Option<f64>> = (0..n).map(|i| (i < m).then(|| 3.0 + 8.0 * s[i])).collect();
        let outcome: Vec<Option<f64>> =
            (0..n).map(|i| (i < m).then(|| 2.5 + 12.0 * (r * s[i] + w * e[i]))).collect();
        cohort = cohort.with_score(measure.clone(), score)?.with_outcome(measure.clone(), outcome)?;
    }
    Ok(cohort)
}

/// Synthetic stand-ins for the four evaluation cohorts, reproducing every
/// published cell when evaluated by correlation.
pub fn published_cohorts(seed: u64) -> Result<Vec<CohortData>, EvalError> {
    let mut cohorts: Vec<(&str, Vec<(Measure, f64, usize)>, usize)> = Vec::new();
    for (cohort, endpoint, n, cells) in TABLE_2 {
        let idx = match cohorts.iter().position(|c| c.0 == cohort) {
            Some(i) => i,
            None => {
                cohorts.push((cohort, Vec::new(), 0));
                cohorts.len() - 1
            }
        };
        let entry = &mut cohorts[idx];
        entry.2 = entry.2.max(n);
        for (tp, v) in TIMEPOINTS.iter().zip(cells) {
            if let Some(pct) = v {
                entry.1.push((Measure::new(endpoint, *tp), pct / 100.0, n));
            }
        }
    }
    cohorts
        .into_iter()
        .enumerate()
        .map(|(i, (id, measures, n))| {
            let arm = if id == "Phase 2" { None } else { Some(Arm::Control) };
            exact_correlation_cohort(id, n, arm, &measures, seed.wrapping_add(i as u64))
        })
        .collect()
}

/// File stem used for a cohort's fixture CSV.
pub fn fixture_file_name(cohort_id: &str) -> String {
    format!("{}.csv", cohort_id.to_lowercase().replace(' ', "_"))
}
