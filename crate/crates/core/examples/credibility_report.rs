//! Assembling the documentation for a credibility assessment from published
//! evaluation results: design table, risk of power loss, mitigations and a
//! reduction recommendation, rendered as Markdown.
//!
//! cargo run --example credibility_report

use procova::credibility::{
    assemble_report, recommend_reduction, render, DesignInput, EvaluationEntry, Mitigation, MitigationItem,
    Provenance, ReportFormat, ReportInputs, RiskTolerance,
};
use procova::design::{AllocationRatio, PowerModel, ReductionStrategy, TrialDesign};
use procova::fixtures::published_results;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let design = TrialDesign {
        alpha: 0.05,
        target_power: 0.90,
        effect_size: TrialDesign::calibrated_effect(1000, 0.05, 0.90, 1.0, AllocationRatio::EQUAL)?,
        endpoint_sd: 1.0,
        allocation_ratio: AllocationRatio::EQUAL,
        dropout_rate: 0.0,
        assumed_vr: 0.10,
        endpoint_label: "CDR-SB".into(),
        power_model: PowerModel::Normal,
    };
    let evaluations = published_results();
    let mitigations = vec![MitigationItem {
        mitigation: Mitigation::StandardCovariateProtection { covariates: vec!["baseline CDR-SB".into()] },
        description: "Standard covariates stay in the analysis model.".into(),
        quantitative_benefit: None,
    }];
    let tolerance = RiskTolerance { min_acceptable_floor_power: 0.86, min_meaningful_reduction: 50 };
    let strategy = ReductionStrategy::MaintainRatio;
    let recommendation = recommend_reduction(&evaluations, &design, strategy, &mitigations, tolerance)?;

    let report = assemble_report(ReportInputs {
        question_of_interest: "Can the phase 3 sample size be reduced?".into(),
        context_of_use: "Prognostic score as a covariate in the primary analysis.".into(),
        designs: vec![DesignInput { design, strategy }],
        evaluations: evaluations.into_iter().map(EvaluationEntry::from).collect(),
        mitigations,
        recommendation,
        vr_floors: vec![0.0, 0.05, 0.10],
        provenance: Provenance::current(),
    })?;
    print!("{}", render(&report, ReportFormat::Markdown));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
