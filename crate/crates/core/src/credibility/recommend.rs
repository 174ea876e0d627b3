use super::{Mitigation, MitigationItem, Result};
use crate::design::{apply_reduction, conservative_vr, power_at, required_sample_size, ArmSizes, ReductionStrategy, TrialDesign};
use crate::evaluation::EvaluationResult;
use serde::{Deserialize, Serialize};

/// Decision thresholds. Both are judgement calls and have no defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskTolerance {
    /// Lowest acceptable power if the score turns out to carry no signal.
    pub min_acceptable_floor_power: f64,
    /// Smallest reduction in total n worth the risk.
    pub min_meaningful_reduction: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub reduce: bool,
    /// Variance reduction the chosen sizes are based on (0 when not reducing).
    pub chosen_vr: f64,
    pub chosen_sizes: ArmSizes,
    /// Power at the chosen sizes with no benefit from the score.
    pub floor_power: f64,
    pub justification: String,
    /// Cohorts whose evaluations support the decision.
    pub cited_cohorts: Vec<String>,
}

struct Candidate {
    vr: f64,
    sizes: ArmSizes,
    floor_power: f64,
    reduction: i64,
}

/// Picks the largest supported variance reduction whose zero-VR floor power
/// and reduction both meet `tolerance`.
///
/// Candidates are the design's assumed VR (if no larger than the best
/// evaluated value) and every evaluated score-attributable VR for the design
/// endpoint, discounted by any declared conservative-VR mitigation. Sizes
/// for each candidate follow `strategy`.
pub fn recommend_reduction(
    evaluations: &[EvaluationResult],
    design: &TrialDesign,
    strategy: ReductionStrategy,
    mitigations: &[MitigationItem],
    tolerance: RiskTolerance,
) -> Result<Recommendation> {
    design.validate()?;
    let relevant: Vec<&EvaluationResult> =
        evaluations.iter().filter(|e| e.endpoint == design.endpoint_label).collect();
    let conservative = mitigations.iter().find_map(|m| match &m.mitigation {
        Mitigation::ConservativeVr { method } => Some(method),
        _ => None,
    });
    let max_evaluated = relevant.iter().map(|e| e.vr_incremental).fold(f64::NEG_INFINITY, f64::max);

    let mut vrs = Vec::new();
    for e in &relevant {
        let v = e.vr_incremental.clamp(0.0, 0.99);
        vrs.push(match conservative {
            Some(m) => conservative_vr(v, m)?,
            None => v,
        });
    }
    if design.assumed_vr <= max_evaluated {
        vrs.push(design.assumed_vr);
    }
    vrs.retain(|v| *v > 0.0);
    vrs.sort_by(f64::total_cmp);
    vrs.dedup();

    let unreduced = required_sample_size(&design.with_vr(0.0))?;
    let null_design = design.with_vr(0.0);
    let mut candidates = Vec::new();
    for vr in vrs {
        let sizes = apply_reduction(&design.with_vr(vr), strategy)?;
        candidates.push(Candidate {
            vr,
            sizes,
            floor_power: power_at(&null_design, &sizes),
            reduction: unreduced.n_total as i64 - sizes.n_total as i64,
        });
    }

    let inputs = format!(
        "Decision inputs: endpoint {}, {} matching evaluation(s), assumed VR {:.1}%, \
         minimum floor power {:.3}, minimum meaningful reduction {} participants{}.",
        design.endpoint_label,
        relevant.len(),
        design.assumed_vr * 100.0,
        tolerance.min_acceptable_floor_power,
        tolerance.min_meaningful_reduction,
        if conservative.is_some() { ", evaluated VRs discounted by the declared conservative method" } else { "" },
    );
    let safe: Vec<&Candidate> =
        candidates.iter().filter(|c| c.floor_power >= tolerance.min_acceptable_floor_power).collect();
    let chosen = safe
        .iter()
        .filter(|c| c.reduction >= tolerance.min_meaningful_reduction as i64)
        .max_by(|a, b| a.vr.total_cmp(&b.vr));

    let Some(c) = chosen else {
        let rationale = if candidates.is_empty() {
            "No evaluated variance reduction is available for this endpoint.".to_string()
        } else if let Some(best) = safe.iter().max_by(|a, b| a.vr.total_cmp(&b.vr)) {
            format!(
                "The largest reduction within the floor-power tolerance is {} participants (VR {:.1}%), \
                 below the minimum meaningful reduction of {}.",
                best.reduction,
                best.vr * 100.0,
                tolerance.min_meaningful_reduction
            )
        } else {
            format!(
                "Every candidate reduction drops the zero-VR floor power below {:.3}.",
                tolerance.min_acceptable_floor_power
            )
        };
        return Ok(Recommendation {
            reduce: false,
            chosen_vr: 0.0,
            chosen_sizes: unreduced,
            floor_power: power_at(&null_design, &unreduced),
            justification: format!("Do not reduce the sample size. {rationale} {inputs}"),
            cited_cohorts: Vec::new(),
        });
    };

    let mut cited: Vec<String> = relevant
        .iter()
        .filter(|e| e.vr_incremental >= c.vr)
        .map(|e| e.cohort_id.clone())
        .collect();
    cited.sort();
    cited.dedup();
    Ok(Recommendation {
        reduce: true,
        chosen_vr: c.vr,
        chosen_sizes: c.sizes,
        floor_power: c.floor_power,
        justification: format!(
            "Reduce from {} to {} participants, equivalent to a {:.1}% variance reduction. \
             If the score carries no prognostic value, power is {:.1}%. Supported by: {}. {inputs}",
            unreduced.n_total,
            c.sizes.n_total,
            c.vr * 100.0,
            c.floor_power * 100.0,
            if cited.is_empty() { "none".to_string() } else { cited.join(", ") },
        ),
        cited_cohorts: cited,
    })
}
