use super::{required_sample_size, sizes_for_blocks, ArmSizes, DesignError, Result, TrialDesign};
use serde::{Deserialize, Serialize};

/// How the precision gained from covariate adjustment is converted into a
/// smaller trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionStrategy {
    /// Shrink every arm, keeping the randomization ratio.
    MaintainRatio,
    /// Keep the treatment arm, shrink only the control arm.
    ControlArmOnly,
    /// Take a share of the full-reduction saving in total n; the rest is kept
    /// as extra power.
    PartialRealization { realized_fraction: f64 },
}

/// Reduces the unadjusted (VR = 0) requirement of `design` by `strategy`.
pub fn apply_reduction(design: &TrialDesign, strategy: ReductionStrategy) -> Result<ArmSizes> {
    let baseline = required_sample_size(&design.with_vr(0.0))?;
    apply_reduction_from(design, &baseline, strategy)
}

/// Reduces an explicit baseline allocation by `strategy`, using
/// `design.assumed_vr` as the expected benefit.
pub fn apply_reduction_from(
    design: &TrialDesign,
    baseline: &ArmSizes,
    strategy: ReductionStrategy,
) -> Result<ArmSizes> {
    design.validate()?;
    let vr = design.assumed_vr;
    if let ReductionStrategy::PartialRealization { realized_fraction } = strategy {
        if !(0.0..=1.0).contains(&realized_fraction) {
            return Err(DesignError::Invalid(format!(
                "realized fraction {realized_fraction} outside [0, 1]"
            )));
        }
    }
    if vr == 0.0 {
        return Ok(*baseline);
    }
    match strategy {
        ReductionStrategy::MaintainRatio => required_sample_size(design),
        ReductionStrategy::ControlArmOnly => control_arm_only(design, baseline),
        ReductionStrategy::PartialRealization { realized_fraction } => {
            let full = required_sample_size(design)?;
            let saving = baseline.n_total.saturating_sub(full.n_total) as f64;
            let target = baseline.n_total as f64 - realized_fraction * saving;
            let g = design.allocation_ratio.granule() as f64;
            // tolerance absorbs representation error in e.g. 1000 − 150/3
            let blocks = (target / g - 1e-9).ceil() as u64;
            sizes_for_blocks(design, blocks)
        }
    }
}

// Smallest n_c with (1 − VR)(1/n_t + 1/n_c) ≤ 1/n_t + 1/n_c_old.
fn control_arm_only(design: &TrialDesign, baseline: &ArmSizes) -> Result<ArmSizes> {
    let vr = design.assumed_vr;
    let nt = baseline.n_treatment as f64;
    let budget = 1.0 / nt + 1.0 / baseline.n_control as f64;
    let room = budget / (1.0 - vr) - 1.0 / nt;
    if room <= 0.0 {
        return Err(DesignError::Infeasible(format!(
            "variance reduction {vr} cannot be met by shrinking the control arm alone \
             with {} treated participants",
            baseline.n_treatment
        )));
    }
    let fits = |nc: u64| (1.0 - vr) * (1.0 / nt + 1.0 / nc as f64) <= budget * (1.0 + 1e-12);
    let mut nc = ((1.0 / room).ceil() as u64).max(2);
    while !fits(nc) {
        nc += 1;
    }
    while nc > 2 && fits(nc - 1) {
        nc -= 1;
    }
    ArmSizes::new(baseline.n_treatment, nc, design.dropout_rate)
}
