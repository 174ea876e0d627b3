//! Power and sample size for two-arm trials with a continuous endpoint whose
//! analysis adjusts for a prognostic covariate.
//!
//! The working model is the two-sided z-test on the treatment-effect
//! estimate with
//!
//! ```text
//! SE² = σ² (1 − VR) (1/n_t + 1/n_c)
//! power = Φ(|δ| / SE − z_{1−α/2})
//! ```
//!
//! where `n_t`, `n_c` count completers. Enrollment is inflated for dropout
//! afterwards.

mod curves;
mod effective;
mod reduction;

pub use curves::{effective_fraction_curve, power_curve, CurvePoint, FractionCurve, NRange, PowerCurve};
pub(crate) use curves::split_total;
pub use effective::{
    conservative_vr, effective_sample_size, power_vs_effective_fraction, ConservativeMethod,
    EffectiveSampleSizeReport, ObservedParameters,
};
pub use reduction::{apply_reduction, apply_reduction_from, ReductionStrategy};

use crate::stats::{phi, phi_inv, StatsError};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("invalid design: {0}")]
    Invalid(String),
    #[error("infeasible reduction: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

pub type Result<T> = std::result::Result<T, DesignError>;

/// Treatment:control randomization ratio, stored in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AllocationRatio {
    treatment: u32,
    control: u32,
}

impl AllocationRatio {
    pub const EQUAL: Self = Self { treatment: 1, control: 1 };

    pub fn new(treatment: u32, control: u32) -> Result<Self> {
        if treatment == 0 || control == 0 {
            return Err(DesignError::Invalid(format!(
                "allocation ratio {treatment}:{control} must be positive"
            )));
        }
        let g = gcd(treatment, control);
        Ok(Self { treatment: treatment / g, control: control / g })
    }

    pub fn treatment(&self) -> u32 {
        self.treatment
    }

    pub fn control(&self) -> u32 {
        self.control
    }

    /// Participants in one randomization block.
    pub fn granule(&self) -> u64 {
        u64::from(self.treatment) + u64::from(self.control)
    }

    pub fn treatment_fraction(&self) -> f64 {
        f64::from(self.treatment) / self.granule() as f64
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Default for AllocationRatio {
    fn default() -> Self {
        Self::EQUAL
    }
}

impl fmt::Display for AllocationRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.treatment, self.control)
    }
}

impl FromStr for AllocationRatio {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || DesignError::Invalid(format!("allocation ratio {s:?} is not of the form a:b"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        Self::new(a, b)
    }
}

impl TryFrom<String> for AllocationRatio {
    type Error = DesignError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AllocationRatio> for String {
    fn from(r: AllocationRatio) -> String {
        r.to_string()
    }
}

/// Analytic power model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerModel {
    /// Two-sided normal-approximation z-test; the opposite tail is ignored.
    #[default]
    Normal,
    /// Shifted central t with n − 2 (− 1 when adjusting) degrees of freedom.
    ShiftedT,
}

/// Planning assumptions for one endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialDesign {
    /// Two-sided significance level.
    pub alpha: f64,
    pub target_power: f64,
    /// Assumed treatment effect δ, endpoint units.
    pub effect_size: f64,
    /// Endpoint standard deviation σ, endpoint units.
    pub endpoint_sd: f64,
    #[serde(default)]
    pub allocation_ratio: AllocationRatio,
    #[serde(default)]
    pub dropout_rate: f64,
    /// Planned variance reduction from the prognostic covariate.
    #[serde(default)]
    pub assumed_vr: f64,
    #[serde(default)]
    pub endpoint_label: String,
    #[serde(default)]
    pub power_model: PowerModel,
}

impl TrialDesign {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DesignError::Invalid(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if !(self.target_power > 0.0 && self.target_power < 1.0) {
            return bad(format!("target power {} outside (0, 1)", self.target_power));
        }
        if self.target_power <= self.alpha {
            return bad("target power must exceed alpha".into());
        }
        if !self.effect_size.is_finite() || self.effect_size == 0.0 {
            return bad(format!("effect size {} must be finite and nonzero", self.effect_size));
        }
        if !(self.endpoint_sd > 0.0 && self.endpoint_sd.is_finite()) {
            return bad(format!("endpoint sd {} must be positive", self.endpoint_sd));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad(format!("dropout rate {} outside [0, 1)", self.dropout_rate));
        }
        if !(0.0..1.0).contains(&self.assumed_vr) {
            return bad(format!("assumed variance reduction {} outside [0, 1)", self.assumed_vr));
        }
        Ok(())
    }

    /// Same design with a different planned variance reduction.
    pub fn with_vr(&self, vr: f64) -> Self {
        Self { assumed_vr: vr, ..self.clone() }
    }

    /// Effect size at which the unadjusted design needs exactly
    /// `unadjusted_total` completers for `target_power`.
    ///
    /// The unrounded requirement is placed half a randomization block below
    /// the target so the integer search lands on it without rounding noise.
    pub fn calibrated_effect(
        unadjusted_total: u64,
        alpha: f64,
        target_power: f64,
        endpoint_sd: f64,
        allocation: AllocationRatio,
    ) -> Result<f64> {
        let g = allocation.granule();
        if !unadjusted_total.is_multiple_of(g) || unadjusted_total / g < 2 {
            return Err(DesignError::Invalid(format!(
                "total {unadjusted_total} is not a multiple of the {allocation} block"
            )));
        }
        let blocks = (unadjusted_total / g) as f64 - 0.5;
        let (a, b) = (f64::from(allocation.treatment), f64::from(allocation.control));
        let z = phi_inv(1.0 - alpha / 2.0) + phi_inv(target_power);
        Ok(endpoint_sd * z * ((a + b) / (a * b * blocks)).sqrt())
    }

    fn z_alpha(&self) -> f64 {
        phi_inv(1.0 - self.alpha / 2.0)
    }

    // Power at (possibly fractional) completer counts.
    fn power_for(&self, n_treatment: f64, n_control: f64) -> f64 {
        let var = self.endpoint_sd.powi(2) * (1.0 - self.assumed_vr) * (1.0 / n_treatment + 1.0 / n_control);
        let ncp = self.effect_size.abs() / var.sqrt();
        match self.power_model {
            PowerModel::Normal => phi(ncp - self.z_alpha()),
            PowerModel::ShiftedT => {
                let adj = if self.assumed_vr > 0.0 { 1.0 } else { 0.0 };
                let df = (n_treatment + n_control - 2.0 - adj).max(1.0);
                let t = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
                t.cdf(ncp - t.inverse_cdf(1.0 - self.alpha / 2.0))
            }
        }
    }
}

/// Arm sizes in completers plus the dropout-inflated enrollment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmSizes {
    pub n_treatment: u64,
    pub n_control: u64,
    pub n_total: u64,
    pub n_enrolled_total: u64,
}

impl ArmSizes {
    pub fn new(n_treatment: u64, n_control: u64, dropout_rate: f64) -> Result<Self> {
        if n_treatment < 2 || n_control < 2 {
            return Err(DesignError::Invalid(format!(
                "arm sizes {n_treatment}/{n_control} must both be at least 2"
            )));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(DesignError::Invalid(format!("dropout rate {dropout_rate} outside [0, 1)")));
        }
        let n_total = n_treatment + n_control;
        Ok(Self {
            n_treatment,
            n_control,
            n_total,
            n_enrolled_total: inflate_for_dropout(n_total, dropout_rate),
        })
    }
}

/// Smallest enrollment m with m (1 − d) ≥ n.
pub fn inflate_for_dropout(n: u64, dropout_rate: f64) -> u64 {
    let keep = 1.0 - dropout_rate;
    let mut m = (n as f64 / keep).ceil() as u64;
    while m > n && (m - 1) as f64 * keep >= n as f64 {
        m -= 1;
    }
    while (m as f64) * keep < n as f64 {
        m += 1;
    }
    m
}

/// Analytic power of `design` at the completer counts in `sizes`.
pub fn power_at(design: &TrialDesign, sizes: &ArmSizes) -> f64 {
    design.power_for(sizes.n_treatment as f64, sizes.n_control as f64)
}

fn sizes_for_blocks(design: &TrialDesign, blocks: u64) -> Result<ArmSizes> {
    let r = design.allocation_ratio;
    ArmSizes::new(
        blocks * u64::from(r.treatment),
        blocks * u64::from(r.control),
        design.dropout_rate,
    )
}

/// Smallest allocation-respecting arm sizes whose power reaches the target.
pub fn required_sample_size(design: &TrialDesign) -> Result<ArmSizes> {
    design.validate()?;
    let r = design.allocation_ratio;
    let (a, b) = (f64::from(r.treatment), f64::from(r.control));
    let min_blocks = (2.0 / a.min(b)).ceil() as u64;
    let power_at_blocks = |k: u64| design.power_for(a * k as f64, b * k as f64);

    let z = design.z_alpha() + phi_inv(design.target_power);
    let closed = design.endpoint_sd.powi(2) * (1.0 - design.assumed_vr) * (a + b) * z * z
        / (a * b * design.effect_size.powi(2));
    if !closed.is_finite() || closed > 1e12 {
        return Err(DesignError::Invalid(format!("required blocks {closed} not representable")));
    }
    let mut k = (closed.ceil() as u64).max(min_blocks);
    while power_at_blocks(k) < design.target_power {
        k += 1;
    }
    while k > min_blocks && power_at_blocks(k - 1) >= design.target_power {
        k -= 1;
    }
    sizes_for_blocks(design, k)
}

/// Co-primary endpoints: the most demanding endpoint drives the size.
pub fn required_sample_size_coprimary(designs: &[TrialDesign]) -> Result<ArmSizes> {
    let mut best: Option<ArmSizes> = None;
    for d in designs {
        let s = required_sample_size(d)?;
        if best.is_none_or(|b| s.n_enrolled_total > b.n_enrolled_total || s.n_total > b.n_total) {
            best = Some(s);
        }
    }
    best.ok_or_else(|| DesignError::Invalid("no endpoints given".into()))
}
