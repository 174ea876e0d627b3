use super::{Result, ScenarioSpec};
use crate::design::{AllocationRatio, ArmSizes};
use crate::evaluation::{Arm, CohortData, Measure};
use crate::rng::{substream, Domain};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Columnar trial data used on the simulation hot path.
#[derive(Debug, Clone, Default)]
pub(crate) struct TrialSample {
    pub treated: Vec<bool>,
    pub score: Vec<f64>,
    /// `None` for dropouts.
    pub outcome: Vec<Option<f64>>,
    pub covariates: Vec<Vec<f64>>,
}

impl TrialSample {
    pub fn enrolled(&self) -> usize {
        self.treated.len()
    }
}

/// Enrollment-ordered participant generator for one simulated trial.
pub(crate) struct ParticipantStream<'a> {
    spec: &'a ScenarioSpec,
    rng: ChaCha8Rng,
    next: u64,
    allocation: AllocationRatio,
    residual_weight: f64,
}

impl<'a> ParticipantStream<'a> {
    pub fn new(spec: &'a ScenarioSpec, rng: ChaCha8Rng) -> Self {
        Self {
            spec,
            rng,
            next: 0,
            allocation: spec.design.allocation_ratio,
            residual_weight: spec.residual_weight_sq().sqrt(),
        }
    }

    // Deterministic blocked allocation: among the first k participants,
    // floor(k · a / (a + b)) are treated.
    fn is_treated(&self, i: u64) -> bool {
        let a = u64::from(self.allocation.treatment());
        let g = self.allocation.granule();
        (i + 1) * a / g > i * a / g
    }

    /// Appends `count` participants to `sample`. Each participant consumes
    /// the same number of draws whatever happens to it.
    pub fn fill(&mut self, sample: &mut TrialSample, count: usize) {
        let loadings = self.spec.covariate_loadings();
        if sample.covariates.len() != loadings.len() {
            sample.covariates = vec![Vec::new(); loadings.len()];
        }
        let sigma = self.spec.true_sd;
        let rho = self.spec.true_score_correlation;
        for _ in 0..count {
            let treated = self.is_treated(self.next);
            self.next += 1;
            let s: f64 = self.rng.sample(StandardNormal);
            let mut latent = rho * s;
            for (j, c) in loadings.iter().enumerate() {
                let x: f64 = self.rng.sample(StandardNormal);
                latent += c * x;
                sample.covariates[j].push(x);
            }
            let e: f64 = self.rng.sample(StandardNormal);
            let dropped = self.rng.random::<f64>() < self.spec.true_dropout;
            latent += self.residual_weight * e;
            let y = sigma * latent + if treated { self.spec.true_effect } else { 0.0 };
            sample.treated.push(treated);
            sample.score.push(sigma * s);
            sample.outcome.push(if dropped { None } else { Some(y) });
        }
    }
}

pub(crate) fn measure_for(spec: &ScenarioSpec) -> Measure {
    let label = if spec.design.endpoint_label.is_empty() { "endpoint" } else { &spec.design.endpoint_label };
    Measure::new(label, "final")
}

pub(crate) fn sample_to_cohort(spec: &ScenarioSpec, sample: &TrialSample, id: &str) -> Result<CohortData> {
    let m = measure_for(spec);
    let n = sample.enrolled();
    let ids = (0..n).map(|i| format!("S{i:06}")).collect();
    let mut c = CohortData::new(id, ids)?
        .with_arms(sample.treated.iter().map(|&t| Some(if t { Arm::Treatment } else { Arm::Control })).collect())?
        .with_score(m.clone(), sample.score.iter().map(|&s| Some(s)).collect())?
        .with_outcome(m.clone(), sample.outcome.clone())?;
    for (j, col) in sample.covariates.iter().enumerate() {
        c = c.with_baseline(format!("cov{j}"), col.iter().map(|&x| Some(x)).collect())?;
    }
    c.completed.insert(m.timepoint, sample.outcome.iter().map(Option::is_some).collect());
    Ok(c)
}

/// One synthetic trial population of `sizes.n_enrolled_total` participants.
pub fn generate_synthetic_cohort(spec: &ScenarioSpec, sizes: &ArmSizes, seed: u64) -> Result<CohortData> {
    spec.validate()?;
    let mut sample = TrialSample::default();
    ParticipantStream::new(spec, substream(seed, Domain::SyntheticCohort, 0))
        .fill(&mut sample, sizes.n_enrolled_total as usize);
    sample_to_cohort(spec, &sample, "synthetic")
}
