use super::{CredibilityError, CredibilityReport, Mitigation, Result};
use crate::evaluation::{format_percent, EvaluationMethod};
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

pub fn render(report: &CredibilityReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Markdown => markdown(report),
    }
}

/// Inverse of [`render`] with [`ReportFormat::Json`]; the result is validated.
pub fn parse_report_json(text: &str) -> Result<CredibilityReport> {
    let r: CredibilityReport = serde_json::from_str(text).map_err(|e| CredibilityError::Parse(e.to_string()))?;
    r.validate()?;
    Ok(r)
}

fn pct(v: f64) -> String {
    format!("{}%", format_percent(v))
}

fn method_label(m: EvaluationMethod) -> &'static str {
    match m {
        EvaluationMethod::Correlation => "correlation",
        EvaluationMethod::RandomizationInference => "randomization inference",
        EvaluationMethod::StudyAnalysis => "study analysis",
    }
}

fn timepoint_key(t: &str) -> (u8, f64, String) {
    match t.parse::<f64>() {
        Ok(x) => (0, x, String::new()),
        Err(_) => (1, 0.0, t.to_string()),
    }
}

fn evaluation_pivot(report: &CredibilityReport, out: &mut String) {
    let mut timepoints: Vec<&str> = Vec::new();
    let mut rows: Vec<(&str, &str)> = Vec::new();
    for e in &report.evaluation_table {
        let r = &e.result;
        if !timepoints.contains(&r.timepoint.as_str()) {
            timepoints.push(&r.timepoint);
        }
        if !rows.contains(&(r.cohort_id.as_str(), r.endpoint.as_str())) {
            rows.push((&r.cohort_id, &r.endpoint));
        }
    }
    timepoints.sort_by(|a, b| {
        let (ka, kb) = (timepoint_key(a), timepoint_key(b));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.cmp(&kb.2))
    });

    let _ = write!(out, "| Cohort | Endpoint | N | Relevance |");
    for t in &timepoints {
        let _ = write!(out, " {t} |");
    }
    let _ = write!(out, "\n|---|---|---|---|");
    out.push_str(&"---|".repeat(timepoints.len()));
    out.push('\n');
    for (cohort, endpoint) in rows {
        let cells: Vec<_> = report
            .evaluation_table
            .iter()
            .filter(|e| e.result.cohort_id == cohort && e.result.endpoint == endpoint)
            .collect();
        let mut ns: Vec<usize> = cells.iter().map(|e| e.result.n_evaluable).collect();
        ns.dedup();
        let n = ns.iter().map(ToString::to_string).collect::<Vec<_>>().join("/");
        let relevance = cells
            .iter()
            .find_map(|e| e.relevance.as_ref())
            .map_or("-".to_string(), |r| format!("{:?}", r.grade).to_lowercase());
        let _ = write!(out, "| {cohort} | {endpoint} | {n} | {relevance} |");
        for t in &timepoints {
            let v = cells.iter().find(|e| e.result.timepoint == *t).map_or("-".to_string(), |e| pct(e.result.vr_incremental));
            let _ = write!(out, " {v} |");
        }
        out.push('\n');
    }
}

fn markdown(r: &CredibilityReport) -> String {
    let mut out = String::new();
    let o = &mut out;
    let _ = writeln!(o, "# Credibility assessment report\n");
    let _ = writeln!(o, "Schema version {}.\n", r.schema_version);
    let _ = writeln!(o, "## Question of interest\n\n{}\n", r.question_of_interest);
    let _ = writeln!(o, "## Context of use\n\n{}\n", r.context_of_use);

    let _ = writeln!(o, "## Design features\n");
    let _ = writeln!(
        o,
        "| Endpoint | Alpha | Target power | Effect | SD | Allocation | Dropout | Assumed VR | Strategy | N before | N after | Power before | Power after |"
    );
    let _ = writeln!(o, "|---|---|---|---|---|---|---|---|---|---|---|---|---|");
    for d in &r.design_table {
        let g = &d.design;
        let _ = writeln!(
            o,
            "| {} | {} | {} | {:.6} | {} | {}:{} | {} | {} | {} | {} | {} | {:.6} | {:.6} |",
            if g.endpoint_label.is_empty() { "-" } else { &g.endpoint_label },
            g.alpha,
            g.target_power,
            g.effect_size,
            g.endpoint_sd,
            g.allocation_ratio.treatment(),
            g.allocation_ratio.control(),
            pct(g.dropout_rate),
            pct(g.assumed_vr),
            serde_json::to_value(d.strategy).ok().and_then(|v| v["kind"].as_str().map(String::from)).unwrap_or_default(),
            d.sizes_before.n_total,
            d.sizes_after.n_total,
            d.power_before,
            d.power_after,
        );
    }

    let _ = writeln!(o, "\n## Prognostic model evaluation\n");
    let _ = writeln!(o, "Variance reduction attributable to the prognostic score, by timepoint.\n");
    evaluation_pivot(r, o);
    let _ = writeln!(o, "\n| Cohort | Endpoint | Timepoint | N | VR standard | VR full | VR incremental | Method |");
    let _ = writeln!(o, "|---|---|---|---|---|---|---|---|");
    for e in &r.evaluation_table {
        let x = &e.result;
        let _ = writeln!(
            o,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            x.cohort_id,
            x.endpoint,
            x.timepoint,
            x.n_evaluable,
            pct(x.vr_standard),
            pct(x.vr_full),
            pct(x.vr_incremental),
            method_label(x.method)
        );
    }

    let _ = writeln!(o, "\n## Risk quantification\n");
    let _ = writeln!(
        o,
        "Sizes {} → {} ({}/{} per arm).\n",
        r.risk_table.sizes_before.n_total,
        r.risk_table.sizes_after.n_total,
        r.risk_table.sizes_after.n_treatment,
        r.risk_table.sizes_after.n_control
    );
    let _ = writeln!(o, "| VR floor | Information fraction | Power |");
    let _ = writeln!(o, "|---|---|---|");
    for row in &r.risk_table.rows {
        let _ = writeln!(o, "| {} | {:.6} | {:.6} |", pct(row.vr_floor), row.information_fraction, row.achieved_power);
    }
    let _ = writeln!(o, "\n{}\n", r.risk_table.meaningfulness_note);

    let _ = writeln!(o, "## Risk mitigation\n");
    if r.mitigations.is_empty() {
        let _ = writeln!(o, "None declared.\n");
    }
    for m in &r.mitigations {
        let detail = match &m.mitigation {
            Mitigation::Other { label } => format!(" ({label})"),
            Mitigation::StandardCovariateProtection { covariates } => format!(" ({})", covariates.join(", ")),
            _ => String::new(),
        };
        let _ = writeln!(o, "- **{}**{}: {}", m.kind_label(), detail, m.description);
        if let Some(b) = &m.quantitative_benefit {
            let values: Vec<String> = b.values.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            let _ = writeln!(o, "  - {} {}", b.text, values.join(", "));
        }
    }
    if !r.mitigations.is_empty() {
        o.push('\n');
    }

    let rec = &r.recommendation;
    let _ = writeln!(o, "## Recommendation\n");
    let _ = writeln!(
        o,
        "Reduce: **{}**. Chosen sizes {} total ({}/{}), floor power {:.6}.\n",
        if rec.reduce { "yes" } else { "no" },
        rec.chosen_sizes.n_total,
        rec.chosen_sizes.n_treatment,
        rec.chosen_sizes.n_control,
        rec.floor_power
    );
    let _ = writeln!(o, "{}\n", rec.justification);

    let _ = writeln!(o, "## Provenance\n");
    let _ = writeln!(o, "- Tool version: {}", r.provenance.tool_version);
    for (k, v) in &r.provenance.seeds {
        let _ = writeln!(o, "- Seed {k}: {v}");
    }
    for (k, v) in &r.provenance.input_digests {
        let _ = writeln!(o, "- SHA-256 {k}: {v}");
    }
    out
}
