use super::{power_at, ArmSizes, DesignError, Result, TrialDesign};
use super::effective::power_vs_effective_fraction;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Inclusive range of total completer counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NRange {
    pub start: u64,
    pub end: u64,
    pub step: u64,
}

impl NRange {
    pub fn values(&self) -> Result<Vec<u64>> {
        if self.step == 0 || self.start > self.end || self.start < 4 {
            return Err(DesignError::Invalid(format!(
                "range {}:{}:{} is empty or too small",
                self.start, self.end, self.step
            )));
        }
        Ok((self.start..=self.end).step_by(self.step as usize).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n_total: u64,
    /// One entry per variance reduction, in the order of `vr_values`.
    pub powers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub vr_values: Vec<f64>,
    pub points: Vec<CurvePoint>,
}

impl PowerCurve {
    pub fn power(&self, n_total: u64, vr_index: usize) -> Option<f64> {
        self.points.iter().find(|p| p.n_total == n_total).map(|p| p.powers[vr_index])
    }

    /// `n,power_vr_<v>...` with powers to six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n");
        for v in &self.vr_values {
            write!(out, ",power_vr_{v}").unwrap();
        }
        out.push('\n');
        for p in &self.points {
            write!(out, "{}", p.n_total).unwrap();
            for v in &p.powers {
                write!(out, ",{v:.6}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Splits a total by the allocation ratio, rounding the treatment share.
pub(crate) fn split_total(design: &TrialDesign, n_total: u64) -> (u64, u64) {
    let nt = (n_total as f64 * design.allocation_ratio.treatment_fraction()).round() as u64;
    (nt, n_total - nt)
}

/// Power against total sample size, one series per variance reduction.
pub fn power_curve(design: &TrialDesign, vr_values: &[f64], range: NRange) -> Result<PowerCurve> {
    design.validate()?;
    for &v in vr_values {
        design.with_vr(v).validate()?;
    }
    let ns = range.values()?;
    let points = ns
        .par_iter()
        .map(|&n| {
            let (nt, nc) = split_total(design, n);
            let sizes = ArmSizes::new(nt, nc, design.dropout_rate)?;
            let powers = vr_values.iter().map(|&v| power_at(&design.with_vr(v), &sizes)).collect();
            Ok(CurvePoint { n_total: n, powers })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerCurve { vr_values: vr_values.to_vec(), points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionCurve {
    pub design_powers: Vec<f64>,
    /// (fraction, power per design power)
    pub points: Vec<(f64, Vec<f64>)>,
}

impl FractionCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("information_fraction");
        for p in &self.design_powers {
            write!(out, ",power_design_{p}").unwrap();
        }
        out.push('\n');
        for (f, powers) in &self.points {
            write!(out, "{f:.6}").unwrap();
            for v in powers {
                write!(out, ",{v:.6}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Power against information fraction for several design powers.
pub fn effective_fraction_curve(fractions: &[f64], design_powers: &[f64], alpha: f64) -> Result<FractionCurve> {
    let points = fractions
        .iter()
        .map(|&f| {
            let powers = design_powers
                .iter()
                .map(|&p| power_vs_effective_fraction(f, p, alpha))
                .collect::<Result<Vec<_>>>()?;
            Ok((f, powers))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FractionCurve { design_powers: design_powers.to_vec(), points })
}
