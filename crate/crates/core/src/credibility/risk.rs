use super::{CredibilityError, Result};
use crate::design::{effective_sample_size, power_at, required_sample_size, ArmSizes, ObservedParameters, TrialDesign};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub vr_floor: f64,
    pub achieved_power: f64,
    /// Information relative to what the design assumed.
    pub information_fraction: f64,
}

/// Power at the reduced sizes if the score delivers less than assumed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskTable {
    pub rows: Vec<RiskRow>,
    /// Unadjusted requirement.
    pub sizes_before: ArmSizes,
    pub sizes_after: ArmSizes,
    pub meaningfulness_note: String,
}

impl RiskTable {
    /// Power if the score carries no prognostic value, when tabulated.
    pub fn zero_floor_power(&self) -> Option<f64> {
        self.rows.iter().find(|r| r.vr_floor == 0.0).map(|r| r.achieved_power)
    }
}

/// Tabulates achieved power at `reduced` for each VR floor, ascending.
pub fn risk_quantification(design: &TrialDesign, reduced: &ArmSizes, vr_floors: &[f64]) -> Result<RiskTable> {
    design.validate()?;
    let mut floors = vr_floors.to_vec();
    if let Some(v) = floors.iter().find(|v| !(0.0..1.0).contains(*v)) {
        return Err(CredibilityError::Validation(format!("VR floor {v} outside [0, 1)")));
    }
    floors.sort_by(f64::total_cmp);
    floors.dedup();
    let mut rows = Vec::with_capacity(floors.len());
    for v in floors {
        let observed = ObservedParameters { endpoint_sd: design.endpoint_sd, vr: v, dropout_rate: design.dropout_rate };
        rows.push(RiskRow {
            vr_floor: v,
            achieved_power: power_at(&design.with_vr(v), reduced),
            information_fraction: effective_sample_size(design, observed, reduced)?.information_fraction,
        });
    }
    let before = required_sample_size(&design.with_vr(0.0))?;
    let saved = before.n_total as i64 - reduced.n_total as i64;
    let meaningfulness_note = format!(
        "Reduction from {} to {} participants ({} fewer, {:.1}% of the unadjusted requirement).",
        before.n_total,
        reduced.n_total,
        saved,
        100.0 * saved as f64 / before.n_total as f64
    );
    Ok(RiskTable { rows, sizes_before: before, sizes_after: *reduced, meaningfulness_note })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::test_support::reference_design;
    use proptest::prelude::*;

    #[test]
    fn ad_floor_powers() {
        let d = reference_design(0.10);
        let reduced = required_sample_size(&d).unwrap();
        assert_eq!(reduced.n_total, 900);
        let t = risk_quantification(&d, &reduced, &[0.10, 0.0]).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!((t.rows[0].achieved_power - 0.868).abs() < 0.001);
        assert!((t.rows[1].achieved_power - 0.900).abs() < 0.001);
        assert!((t.rows[0].information_fraction - 0.9).abs() < 1e-12);
        assert!(t.meaningfulness_note.contains("100 fewer"));
        assert_eq!(t.zero_floor_power(), Some(t.rows[0].achieved_power));
    }

    #[test]
    fn zero_reduction_keeps_target() {
        let d = reference_design(0.0);
        let sizes = required_sample_size(&d).unwrap();
        let t = risk_quantification(&d, &sizes, &[0.0]).unwrap();
        assert!((t.rows[0].achieved_power - 0.9).abs() < 0.001);
    }

    #[test]
    fn strictly_increasing() {
        let d = reference_design(0.10);
        let t = risk_quantification(&d, &required_sample_size(&d).unwrap(), &[0.0, 0.05, 0.10]).unwrap();
        assert!(t.rows.windows(2).all(|w| w[1].achieved_power > w[0].achieved_power));
    }

    #[test]
    fn bad_floor() {
        let d = reference_design(0.10);
        assert!(risk_quantification(&d, &required_sample_size(&d).unwrap(), &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn monotone_and_target_at_assumed(vr in 0.0f64..0.6, floors in proptest::collection::vec(0.0f64..0.95, 1..8)) {
            let d = reference_design(vr);
            let reduced = required_sample_size(&d).unwrap();
            let mut all = floors.clone();
            all.push(vr);
            let t = risk_quantification(&d, &reduced, &all).unwrap();
            prop_assert!(t.rows.windows(2).all(|w| w[0].vr_floor < w[1].vr_floor && w[0].achieved_power <= w[1].achieved_power));
            let at = t.rows.iter().find(|r| r.vr_floor == vr).unwrap();
            prop_assert!(at.achieved_power >= 0.9 && at.achieved_power < 0.9 + 0.01);
        }
    }
}
