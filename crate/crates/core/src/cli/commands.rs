use super::args::{Command, CurvesArgs, DesignArgs, EvalMethodArg, EvaluateArgs, FormatArg, ReportArgs, SimulateArgs};
use super::config::FileConfig;
use super::ingest::{ingest_cohort_csv, sha256_hex};
use super::{CliError, RunConfig};
use crate::credibility::{
    assemble_report, recommend_reduction, render, DesignEntry, DesignInput, EvaluationEntry, Provenance,
    ReportFormat, ReportInputs,
};
use crate::design::{
    apply_reduction, effective_fraction_curve, power_at, power_curve, required_sample_size,
    required_sample_size_coprimary, ArmSizes,
};
use crate::evaluation::{
    bootstrap_vr, evaluate_cohort, parse_step6_csv, randomization_inference_vr, to_step6_csv, EvaluationMethod,
    EvaluationResult, Relevance,
};
use crate::simulation::{analytic_power, run_monte_carlo, simulate_with_ssr};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

const DEFAULT_REPLICATIONS: usize = 10_000;

/// Files to write, input digests and a human summary.
#[derive(Debug, Default)]
pub(crate) struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub inputs: BTreeMap<String, String>,
    pub summary: String,
}

impl Outcome {
    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).map_err(|_| CliError::Data(format!("{} is not UTF-8", path.display())))
    }

    fn config(&mut self, path: &Path) -> Result<FileConfig, CliError> {
        let text = self.read(path)?;
        FileConfig::parse(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }

    fn file(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text.into_bytes()));
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub(crate) fn dispatch(config: &RunConfig) -> Result<Outcome, CliError> {
    match &config.command {
        Command::Design(a) => design(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Simulate(a) => simulate(a),
        Command::Curves(a) => curves(a),
        Command::Report(a) => report(a),
    }
}

#[derive(Serialize)]
struct EndpointSizing {
    #[serde(flatten)]
    entry: DesignEntry,
    /// Power at the reduced sizes if the score carries no signal.
    floor_power_after: f64,
}

#[derive(Serialize)]
struct Coprimary {
    sizes: ArmSizes,
    powers: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct DesignOutput {
    endpoints: Vec<EndpointSizing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coprimary: Option<Coprimary>,
}

fn design(a: &DesignArgs) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let designs = out.config(&a.config)?.designs()?;
    let mut endpoints = Vec::new();
    for (d, strategy) in &designs {
        let before = required_sample_size(&d.with_vr(0.0))?;
        let after = apply_reduction(d, *strategy)?;
        let entry = DesignEntry {
            design: d.clone(),
            strategy: *strategy,
            sizes_before: before,
            sizes_after: after,
            power_before: power_at(d, &before),
            power_after: power_at(d, &after),
        };
        let _ = writeln!(
            out.summary,
            "{}: unadjusted {} → {} at VR {:.1}% (power {:.6}; {:.6} if the score has no value)",
            if d.endpoint_label.is_empty() { "endpoint" } else { &d.endpoint_label },
            before.n_total,
            after.n_total,
            d.assumed_vr * 100.0,
            entry.power_after,
            power_at(&d.with_vr(0.0), &after),
        );
        endpoints.push(EndpointSizing { floor_power_after: power_at(&d.with_vr(0.0), &after), entry });
    }
    let coprimary = if designs.len() > 1 {
        let ds: Vec<_> = designs.iter().map(|(d, _)| d.clone()).collect();
        let sizes = required_sample_size_coprimary(&ds)?;
        let powers = ds.iter().map(|d| (d.endpoint_label.clone(), power_at(d, &sizes))).collect();
        let _ = writeln!(out.summary, "co-primary: {} total", sizes.n_total);
        Some(Coprimary { sizes, powers })
    } else {
        None
    };
    out.file("design.json", json(&DesignOutput { endpoints, coprimary }));
    Ok(out)
}

fn evaluate(a: &EvaluateArgs) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let mut results: Vec<EvaluationResult> = Vec::new();
    for spec in &a.cohorts {
        let cohort = ingest_cohort_csv(&spec.path, &spec.cohort_id())?;
        out.inputs.insert(spec.path.display().to_string(), cohort.digest.clone().unwrap_or_default());
        for m in cohort.measures() {
            let mut r = match a.method {
                EvalMethodArg::Correlation => evaluate_cohort(&cohort, &m, &a.covariates)?,
                EvalMethodArg::Randomization => {
                    let seed = a.seed.ok_or_else(|| CliError::Usage("--seed is required".into()))?;
                    randomization_inference_vr(&cohort, &m, &a.covariates, a.rerandomizations, seed)?
                }
            };
            if let Some(b) = a.bootstrap {
                let seed = a.seed.ok_or_else(|| CliError::Usage("--seed is required".into()))?;
                r.bootstrap_summary = Some(bootstrap_vr(&cohort, &m, &a.covariates, b, a.percentile, seed)?.summary);
            }
            results.push(r);
        }
    }
    let csv = to_step6_csv(&results);
    out.summary = csv.clone();
    out.file("evaluation.csv", csv);
    out.file("evaluation.json", json(&results));
    Ok(out)
}

fn simulate(a: &SimulateArgs) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let cfg = out.config(&a.config)?;
    let spec = cfg.scenario()?;
    let sizes = match cfg.planned_total {
        Some(n) => {
            let (nt, nc) = crate::design::split_total(&spec.design, n);
            ArmSizes::new(nt, nc, spec.design.dropout_rate)?
        }
        None => required_sample_size(&spec.design)?,
    };
    let reps = a.reps.or(cfg.replications).unwrap_or(DEFAULT_REPLICATIONS);
    let report = match &cfg.ssr {
        Some(plan) => simulate_with_ssr(&spec, &sizes, plan, cfg.adjustment, reps, a.seed)?,
        None => run_monte_carlo(&spec, &sizes, cfg.adjustment, reps, a.seed)?,
    };
    let _ = writeln!(
        out.summary,
        "planned {} enrolled; rejection rate {:.6} (SE {:.6}) over {} replications; analytic power without re-estimation {:.6}; median final n {}",
        sizes.n_enrolled_total,
        report.rejection_rate,
        report.binomial_se,
        report.replications,
        analytic_power(&spec, &sizes, cfg.adjustment)?,
        report.final_n.median,
    );
    let mut text = report.to_json();
    text.push('\n');
    out.file("simulation.json", text);
    Ok(out)
}

fn curves(a: &CurvesArgs) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let cfg = match &a.config {
        Some(p) => out.config(p)?,
        None => FileConfig::default(),
    };
    let design = cfg.designs()?.remove(0).0;
    let pc = power_curve(&design, &a.vr, a.n)?;
    let fc = effective_fraction_curve(&a.fractions.values(), &a.design_powers, design.alpha)?;
    let _ = writeln!(out.summary, "{} sample sizes × {} VR values; {} information fractions", pc.points.len(), a.vr.len(), fc.points.len());
    out.file("power_curve.csv", pc.to_csv());
    out.file("fraction_curve.csv", fc.to_csv());
    Ok(out)
}

fn report(a: &ReportArgs) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let cfg = out.config(&a.config)?;
    let tolerance = cfg.tolerance()?;
    let mut designs = cfg.designs()?;

    let mut results = Vec::new();
    for p in &a.evaluations {
        let text = out.read(p)?;
        let rows = parse_step6_csv(&text, EvaluationMethod::StudyAnalysis)
            .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
        results.extend(rows);
    }
    for spec in &a.cohorts {
        let cohort = ingest_cohort_csv(&spec.path, &spec.cohort_id())?;
        out.inputs.insert(spec.path.display().to_string(), cohort.digest.clone().unwrap_or_default());
        for m in cohort.measures() {
            results.push(evaluate_cohort(&cohort, &m, &[])?);
        }
    }
    let mut relevance: BTreeMap<&str, Relevance> = BTreeMap::new();
    for r in &cfg.relevance {
        if !results.iter().any(|e| e.cohort_id == r.cohort) {
            return Err(CliError::Data(format!("relevance given for unknown cohort '{}'", r.cohort)));
        }
        relevance.insert(&r.cohort, Relevance { grade: r.grade, rationale: r.rationale.clone() });
    }

    let (primary, strategy) = designs[0].clone();
    let rec = recommend_reduction(&results, &primary, strategy, &cfg.mitigation, tolerance)?;
    if rec.reduce && rec.chosen_vr != primary.assumed_vr {
        designs[0].0.assumed_vr = rec.chosen_vr;
    }
    let evaluations = results
        .into_iter()
        .map(|r| EvaluationEntry { relevance: relevance.get(r.cohort_id.as_str()).cloned(), result: r })
        .collect();
    let mut provenance = Provenance::current();
    provenance.input_digests = out.inputs.clone();
    let report = assemble_report(ReportInputs {
        question_of_interest: cfg.question_of_interest.clone(),
        context_of_use: cfg.context_of_use.clone(),
        designs: designs.into_iter().map(|(design, strategy)| DesignInput { design, strategy }).collect(),
        evaluations,
        mitigations: cfg.mitigation.clone(),
        recommendation: rec,
        vr_floors: cfg.vr_floors.clone(),
        provenance,
    })?;
    let _ = writeln!(out.summary, "{}", report.recommendation.justification);
    for f in &a.format {
        match f {
            FormatArg::Json => out.file("report.json", render(&report, ReportFormat::Json)),
            FormatArg::Markdown => out.file("report.md", render(&report, ReportFormat::Markdown)),
        }
    }
    Ok(out)
}
