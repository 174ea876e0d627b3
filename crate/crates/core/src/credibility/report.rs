use super::{risk_quantification, CredibilityError, MitigationItem, Recommendation, Result, RiskTable};
use crate::design::{apply_reduction, power_at, required_sample_size, ArmSizes, ReductionStrategy, TrialDesign};
use crate::evaluation::{EvaluationResult, Relevance};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignInput {
    pub design: TrialDesign,
    pub strategy: ReductionStrategy,
}

/// Design features of one endpoint. Both powers assume the design VR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignEntry {
    pub design: TrialDesign,
    pub strategy: ReductionStrategy,
    pub sizes_before: ArmSizes,
    pub sizes_after: ArmSizes,
    pub power_before: f64,
    pub power_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationEntry {
    pub result: EvaluationResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relevance: Option<Relevance>,
}

impl From<EvaluationResult> for EvaluationEntry {
    fn from(result: EvaluationResult) -> Self {
        Self { result, relevance: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    #[serde(default)]
    pub seeds: BTreeMap<String, u64>,
    /// Input name to SHA-256 hex digest.
    #[serde(default)]
    pub input_digests: BTreeMap<String, String>,
}

impl Provenance {
    pub fn current() -> Self {
        Self { tool_version: env!("CARGO_PKG_VERSION").to_string(), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredibilityReport {
    pub schema_version: u32,
    pub question_of_interest: String,
    pub context_of_use: String,
    pub design_table: Vec<DesignEntry>,
    pub evaluation_table: Vec<EvaluationEntry>,
    pub risk_table: RiskTable,
    pub mitigations: Vec<MitigationItem>,
    pub recommendation: Recommendation,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct ReportInputs {
    pub question_of_interest: String,
    pub context_of_use: String,
    /// The first design is the primary endpoint.
    pub designs: Vec<DesignInput>,
    pub evaluations: Vec<EvaluationEntry>,
    pub mitigations: Vec<MitigationItem>,
    pub recommendation: Recommendation,
    /// Defaults to no benefit and the assumed VR of the primary design.
    pub vr_floors: Vec<f64>,
    pub provenance: Provenance,
}

impl CredibilityReport {
    /// Checks cross-references and size consistency.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CredibilityError::Validation(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema version {}", self.schema_version));
        }
        if self.design_table.is_empty() {
            return bad("no design entries".into());
        }
        if self.evaluation_table.is_empty() {
            return bad("no evaluation results".into());
        }
        let known: BTreeSet<&str> = self.evaluation_table.iter().map(|e| e.result.cohort_id.as_str()).collect();
        for c in &self.recommendation.cited_cohorts {
            if !known.contains(c.as_str()) {
                return bad(format!("recommendation cites '{c}', which is not in the evaluation table"));
            }
        }
        let rec = &self.recommendation;
        let consistent = self.design_table.iter().any(|d| {
            if rec.reduce {
                d.sizes_after == rec.chosen_sizes
            } else {
                d.sizes_before == rec.chosen_sizes
            }
        });
        if !consistent {
            return bad(format!(
                "recommended sizes {}/{} match no {} sizes in the design table",
                rec.chosen_sizes.n_treatment,
                rec.chosen_sizes.n_control,
                if rec.reduce { "reduced" } else { "unreduced" }
            ));
        }
        if self.risk_table.sizes_after != rec.chosen_sizes {
            return bad("risk table sizes differ from the recommended sizes".into());
        }
        for m in &self.mitigations {
            m.validate()?;
        }
        Ok(())
    }
}

/// Builds the report, computing design powers and the risk table.
///
/// If the recommendation is to reduce, its sizes must coincide with the
/// reduced sizes of some design entry; otherwise with the unreduced ones.
pub fn assemble_report(inputs: ReportInputs) -> Result<CredibilityReport> {
    let mut design_table = Vec::with_capacity(inputs.designs.len());
    for d in &inputs.designs {
        let before = required_sample_size(&d.design.with_vr(0.0))?;
        let after = apply_reduction(&d.design, d.strategy)?;
        design_table.push(DesignEntry {
            design: d.design.clone(),
            strategy: d.strategy,
            sizes_before: before,
            sizes_after: after,
            power_before: power_at(&d.design, &before),
            power_after: power_at(&d.design, &after),
        });
    }
    let primary = design_table
        .first()
        .ok_or_else(|| CredibilityError::Validation("no design entries".into()))?
        .design
        .clone();
    let floors = if inputs.vr_floors.is_empty() { vec![0.0, primary.assumed_vr] } else { inputs.vr_floors };
    let risk_table = risk_quantification(&primary, &inputs.recommendation.chosen_sizes, &floors)?;
    let report = CredibilityReport {
        schema_version: SCHEMA_VERSION,
        question_of_interest: inputs.question_of_interest,
        context_of_use: inputs.context_of_use,
        design_table,
        evaluation_table: inputs.evaluations,
        risk_table,
        mitigations: inputs.mitigations,
        recommendation: inputs.recommendation,
        provenance: inputs.provenance,
    };
    report.validate()?;
    Ok(report)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::super::recommend::tests::ad_inputs;
    use super::super::{recommend_reduction, RiskTolerance};
    use super::*;

    pub fn ad_report_inputs() -> ReportInputs {
        let (evals, design) = ad_inputs();
        let rec = recommend_reduction(
            &evals,
            &design,
            ReductionStrategy::MaintainRatio,
            &[],
            RiskTolerance { min_acceptable_floor_power: 0.86, min_meaningful_reduction: 50 },
        )
        .unwrap();
        ReportInputs {
            question_of_interest: "Can the phase 3 trial be smaller?".into(),
            context_of_use: "Prognostic score as a covariate for the primary endpoint.".into(),
            designs: vec![DesignInput { design, strategy: ReductionStrategy::MaintainRatio }],
            evaluations: evals.into_iter().map(Into::into).collect(),
            mitigations: vec![],
            recommendation: rec,
            vr_floors: vec![],
            provenance: Provenance::current(),
        }
    }

    #[test]
    fn assembles_ad_case() {
        let r = assemble_report(ad_report_inputs()).unwrap();
        assert_eq!(r.schema_version, 1);
        assert_eq!(r.design_table[0].sizes_before.n_total, 1000);
        assert_eq!(r.design_table[0].sizes_after.n_total, 900);
        assert!((r.design_table[0].power_before - 0.928).abs() < 0.001);
        assert!((r.risk_table.zero_floor_power().unwrap() - 0.868).abs() < 0.001);
        // self-contained: risk table reproducible from embedded values
        let again = risk_quantification(
            &r.design_table[0].design,
            &r.risk_table.sizes_after,
            &r.risk_table.rows.iter().map(|x| x.vr_floor).collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(again, r.risk_table);
    }

    #[test]
    fn empty_evaluations_rejected() {
        let mut i = ad_report_inputs();
        i.evaluations.clear();
        i.recommendation.cited_cohorts.clear();
        assert!(matches!(assemble_report(i), Err(CredibilityError::Validation(_))));
    }

    #[test]
    fn dangling_citation_named() {
        let mut i = ad_report_inputs();
        i.recommendation.cited_cohorts.push("Study D".into());
        let err = assemble_report(i).unwrap_err().to_string();
        assert!(err.contains("Study D"), "{err}");
    }

    #[test]
    fn inconsistent_sizes_rejected() {
        let mut i = ad_report_inputs();
        i.recommendation.chosen_sizes = ArmSizes::new(460, 460, 0.0).unwrap();
        assert!(matches!(assemble_report(i), Err(CredibilityError::Validation(_))));
    }
}
