use super::{required_sample_size, ArmSizes, DesignError, Result, TrialDesign};
use crate::stats::{percentile, phi, phi_inv};
use serde::{Deserialize, Serialize};

/// Endpoint parameters as actually observed in (or estimated for) a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedParameters {
    pub endpoint_sd: f64,
    pub vr: f64,
    pub dropout_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSampleSizeReport {
    /// Enrolled total of the trial as run.
    pub n_actual: u64,
    /// Enrolled total the sizing would have produced with the observed values.
    pub n_eff_required: u64,
    /// Information of the actual trial relative to what the design assumed.
    pub information_fraction: f64,
    /// Design power carried through the information fraction.
    pub achieved_power: f64,
    /// Power of the actual arm sizes under the observed values, with
    /// completers rescaled by the observed dropout.
    pub power_at_actual_sizes: f64,
}

/// Compares what was assumed at design time with what was observed.
pub fn effective_sample_size(
    design: &TrialDesign,
    observed: ObservedParameters,
    sizes: &ArmSizes,
) -> Result<EffectiveSampleSizeReport> {
    design.validate()?;
    let obs_design = TrialDesign {
        endpoint_sd: observed.endpoint_sd,
        assumed_vr: observed.vr,
        dropout_rate: observed.dropout_rate,
        ..design.clone()
    };
    obs_design.validate()?;
    let n_eff = required_sample_size(&obs_design)?;

    let info = |sd: f64, vr: f64, d: f64| sd * sd * (1.0 - vr) / (1.0 - d);
    let information_fraction = info(design.endpoint_sd, design.assumed_vr, design.dropout_rate)
        / info(observed.endpoint_sd, observed.vr, observed.dropout_rate);

    let keep = (1.0 - observed.dropout_rate) / (1.0 - design.dropout_rate);
    let power_at_actual_sizes =
        obs_design.power_for(sizes.n_treatment as f64 * keep, sizes.n_control as f64 * keep);

    Ok(EffectiveSampleSizeReport {
        n_actual: sizes.n_enrolled_total,
        n_eff_required: n_eff.n_enrolled_total,
        information_fraction,
        achieved_power: power_vs_effective_fraction(information_fraction, design.target_power, design.alpha)?,
        power_at_actual_sizes,
    })
}

/// Power of a trial designed for `design_power` whose information turned out
/// to be `fraction` of plan.
pub fn power_vs_effective_fraction(fraction: f64, design_power: f64, alpha: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction.is_finite()) {
        return Err(DesignError::Invalid(format!("information fraction {fraction} must be positive")));
    }
    if !(design_power > 0.0 && design_power < 1.0 && alpha > 0.0 && alpha < 1.0) {
        return Err(DesignError::Invalid(format!("power {design_power} / alpha {alpha} outside (0, 1)")));
    }
    let z_a = phi_inv(1.0 - alpha / 2.0);
    Ok(phi(fraction.sqrt() * (z_a + phi_inv(design_power)) - z_a))
}

/// Ways to discount an evaluated variance reduction before sizing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ConservativeMethod {
    FixedFactor { factor: f64 },
    Percentile { percentile: f64, distribution: Vec<f64> },
}

pub fn conservative_vr(vr_point: f64, method: &ConservativeMethod) -> Result<f64> {
    if !(0.0..1.0).contains(&vr_point) {
        return Err(DesignError::Invalid(format!("variance reduction {vr_point} outside [0, 1)")));
    }
    match method {
        ConservativeMethod::FixedFactor { factor } => {
            if !(*factor > 0.0 && *factor <= 1.0) {
                return Err(DesignError::Invalid(format!("factor {factor} outside (0, 1]")));
            }
            Ok(factor * vr_point)
        }
        ConservativeMethod::Percentile { percentile: p, distribution } => {
            if distribution.is_empty() {
                return Err(DesignError::Invalid("empty bootstrap distribution".into()));
            }
            Ok(percentile(distribution, *p)?.clamp(0.0, vr_point))
        }
    }
}
