use super::analysis::{analyze_sample, Adjustment};
use super::generate::{ParticipantStream, TrialSample};
use super::{Result, ScenarioSpec, SimError};
use crate::design::ArmSizes;
use crate::rng::{substream, Domain};
use crate::stats::{normal_cdf, normal_quantile, percentile};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub(crate) const MIN_REPLICATIONS: usize = 1000;

/// Distribution of final enrolled totals across replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalNSummary {
    pub min: u64,
    pub median: f64,
    pub mean: f64,
    pub max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub replications: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    /// √(p̂(1 − p̂) / reps).
    pub binomial_se: f64,
    pub alpha: f64,
    pub adjustment: Adjustment,
    pub mean_estimate: f64,
    pub mean_se_adjusted: f64,
    pub mean_se_unadjusted: f64,
    /// Mean of 1 − (SE_adjusted / SE_unadjusted)².
    pub realized_vr_mean: f64,
    pub final_n: FinalNSummary,
    pub master_seed: u64,
}

impl SimulationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ReplicateOutcome {
    pub reject: bool,
    pub estimate: f64,
    pub se_adjusted: f64,
    pub se_unadjusted: f64,
    pub final_n: u64,
}

pub(crate) fn outcome_for(sample: &TrialSample, adjustment: Adjustment, alpha: f64) -> Result<ReplicateOutcome> {
    let adjusted = analyze_sample(sample, adjustment)?;
    let se_unadjusted = if adjustment == Adjustment::Unadjusted {
        adjusted.standard_error
    } else {
        analyze_sample(sample, Adjustment::Unadjusted)?.standard_error
    };
    Ok(ReplicateOutcome {
        reject: adjusted.p_value < alpha,
        estimate: adjusted.estimate,
        se_adjusted: adjusted.standard_error,
        se_unadjusted,
        final_n: sample.enrolled() as u64,
    })
}

pub(crate) fn check_replications(reps: usize) -> Result<()> {
    if reps < MIN_REPLICATIONS {
        return Err(SimError::Invalid(format!("{reps} replications; at least {MIN_REPLICATIONS} required")));
    }
    Ok(())
}

/// Runs replicates in parallel; results are gathered in replicate order so
/// the summary does not depend on the worker count.
pub(crate) fn run_replicates<F>(reps: usize, f: F) -> Result<Vec<ReplicateOutcome>>
where
    F: Fn(usize) -> Result<ReplicateOutcome> + Sync,
{
    let results: Vec<Result<ReplicateOutcome>> = (0..reps).into_par_iter().map(&f).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| r.map_err(|e| SimError::Replicate { index, source: Box::new(e) }))
        .collect()
}

pub(crate) fn summarize(outcomes: &[ReplicateOutcome], alpha: f64, adjustment: Adjustment, seed: u64) -> Result<SimulationReport> {
    let reps = outcomes.len();
    let k = reps as f64;
    let rejections = outcomes.iter().filter(|o| o.reject).count();
    let rate = rejections as f64 / k;
    let avg = |f: fn(&ReplicateOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / k;
    let ns: Vec<f64> = outcomes.iter().map(|o| o.final_n as f64).collect();
    Ok(SimulationReport {
        replications: reps,
        rejections,
        rejection_rate: rate,
        binomial_se: (rate * (1.0 - rate) / k).sqrt(),
        alpha,
        adjustment,
        mean_estimate: avg(|o| o.estimate),
        mean_se_adjusted: avg(|o| o.se_adjusted),
        mean_se_unadjusted: avg(|o| o.se_unadjusted),
        realized_vr_mean: avg(|o| 1.0 - (o.se_adjusted / o.se_unadjusted).powi(2)),
        final_n: FinalNSummary {
            min: outcomes.iter().map(|o| o.final_n).min().unwrap_or(0),
            median: percentile(&ns, 50.0)?,
            mean: avg(|o| o.final_n as f64),
            max: outcomes.iter().map(|o| o.final_n).max().unwrap_or(0),
        },
        master_seed: seed,
    })
}

/// Empirical rejection rate of a fixed-size trial over `reps` replicates.
///
/// Replicate `i` draws from its own stream derived from `seed` and `i`, so
/// the report is reproducible for any worker count.
pub fn run_monte_carlo(spec: &ScenarioSpec, sizes: &ArmSizes, adjustment: Adjustment, reps: usize, seed: u64) -> Result<SimulationReport> {
    spec.validate()?;
    check_replications(reps)?;
    let n = sizes.n_enrolled_total as usize;
    let alpha = spec.design.alpha;
    let outcomes = run_replicates(reps, |rep| {
        let mut sample = TrialSample::default();
        ParticipantStream::new(spec, substream(seed, Domain::TrialReplicate, rep as u64)).fill(&mut sample, n);
        outcome_for(&sample, adjustment, alpha)
    })?;
    summarize(&outcomes, alpha, adjustment, seed)
}

/// Large-sample power of the simulated analysis under the scenario truth,
/// counting both rejection regions, at the expected completer counts.
pub fn analytic_power(spec: &ScenarioSpec, sizes: &ArmSizes, adjustment: Adjustment) -> Result<f64> {
    spec.validate()?;
    let explained_by_covs: f64 = spec.covariate_loadings().iter().map(|c| c * c).sum();
    let vr = match adjustment {
        Adjustment::Unadjusted => 0.0,
        Adjustment::Score => spec.implied_vr(),
        Adjustment::Standard => explained_by_covs,
        Adjustment::ScoreAndStandard => spec.implied_vr() + explained_by_covs,
    };
    let g = spec.design.allocation_ratio.granule();
    let enrolled = sizes.n_enrolled_total;
    let enrolled_t = enrolled * u64::from(spec.design.allocation_ratio.treatment()) / g;
    let keep = 1.0 - spec.true_dropout;
    let (nt, nc) = (enrolled_t as f64 * keep, (enrolled - enrolled_t) as f64 * keep);
    let se = spec.true_sd * ((1.0 - vr) * (1.0 / nt + 1.0 / nc)).sqrt();
    let z = normal_quantile(1.0 - spec.design.alpha / 2.0)?;
    let d = spec.true_effect / se;
    Ok(normal_cdf(d - z)? + normal_cdf(-d - z)?)
}
