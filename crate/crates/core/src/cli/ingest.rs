use super::CliError;
use crate::evaluation::{Arm, CohortData, Measure};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

enum Column {
    Id,
    Arm,
    Completed(String),
    Baseline(String),
    Score(Measure),
    Outcome(Measure),
}

fn measure_of(rest: &str, name: &str) -> Result<Measure, CliError> {
    match rest.rsplit_once('_') {
        Some((e, t)) if !e.is_empty() && !t.is_empty() => Ok(Measure::new(e, t)),
        _ => Err(CliError::Data(format!("column '{name}': expected <endpoint>_<timepoint>"))),
    }
}

fn classify(name: &str) -> Result<Column, CliError> {
    let nonempty = |s: &str| {
        if s.is_empty() { Err(CliError::Data(format!("column '{name}' has an empty suffix"))) } else { Ok(s.to_string()) }
    };
    Ok(match name {
        "participant_id" => Column::Id,
        "arm" => Column::Arm,
        _ => {
            if let Some(t) = name.strip_prefix("completed_") {
                Column::Completed(nonempty(t)?)
            } else if let Some(b) = name.strip_prefix("baseline_") {
                Column::Baseline(nonempty(b)?)
            } else if let Some(r) = name.strip_prefix("score_") {
                Column::Score(measure_of(r, name)?)
            } else if let Some(r) = name.strip_prefix("outcome_") {
                Column::Outcome(measure_of(r, name)?)
            } else {
                return Err(CliError::Data(format!("unknown column '{name}'")));
            }
        }
    })
}

/// Parses a cohort table from CSV text.
///
/// Columns: `participant_id` (required), `arm` (`treatment`/`control`),
/// `completed_<timepoint>` (`1`/`0`), `baseline_<name>`,
/// `score_<endpoint>_<timepoint>` and `outcome_<endpoint>_<timepoint>`.
/// Empty cells are missing values.
pub fn parse_cohort_csv(text: &str, cohort_id: &str) -> Result<CohortData, CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::Data(format!("header: {e}")))?.clone();
    let columns: Vec<Column> = headers.iter().map(classify).collect::<Result<_, _>>()?;
    let mut names = BTreeSet::new();
    for h in headers.iter() {
        if !names.insert(h) {
            return Err(CliError::Data(format!("column '{h}' appears twice")));
        }
    }
    if !columns.iter().any(|c| matches!(c, Column::Id)) {
        return Err(CliError::Data("missing required column 'participant_id'".into()));
    }

    let mut ids = Vec::new();
    let mut first_line: HashMap<String, u64> = HashMap::new();
    let mut arms = Vec::new();
    let mut numeric: Vec<Vec<Option<f64>>> = vec![Vec::new(); columns.len()];
    let mut flags: Vec<Vec<bool>> = vec![Vec::new(); columns.len()];
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Data(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        for (j, (col, cell)) in columns.iter().zip(rec.iter()).enumerate() {
            let at = || format!("line {line}, column '{}'", &headers[j]);
            match col {
                Column::Id => {
                    if cell.is_empty() {
                        return Err(CliError::Data(format!("{}: empty participant_id", at())));
                    }
                    if let Some(prev) = first_line.insert(cell.to_string(), line) {
                        return Err(CliError::Data(format!(
                            "duplicate participant_id '{cell}' at line {line} (first seen at line {prev})"
                        )));
                    }
                    ids.push(cell.to_string());
                }
                Column::Arm => arms.push(match cell.to_ascii_lowercase().as_str() {
                    "" => None,
                    "treatment" => Some(Arm::Treatment),
                    "control" => Some(Arm::Control),
                    other => return Err(CliError::Data(format!("{}: unknown arm '{other}'", at()))),
                }),
                Column::Completed(_) => flags[j].push(match cell {
                    "1" | "true" | "TRUE" => true,
                    "0" | "false" | "FALSE" | "" => false,
                    other => return Err(CliError::Data(format!("{}: expected 0 or 1, got '{other}'", at()))),
                }),
                _ => numeric[j].push(if cell.is_empty() {
                    None
                } else {
                    match cell.parse::<f64>() {
                        Ok(v) if v.is_finite() => Some(v),
                        _ => return Err(CliError::Data(format!("{}: cannot parse '{cell}' as a number", at()))),
                    }
                }),
            }
        }
    }

    let data = |e: crate::evaluation::EvalError| CliError::Data(e.to_string());
    let n = ids.len();
    let mut cohort = CohortData::new(cohort_id, ids).map_err(data)?;
    if !arms.is_empty() {
        cohort = cohort.with_arms(arms).map_err(data)?;
    }
    let mut completed = BTreeMap::new();
    for (j, col) in columns.into_iter().enumerate() {
        let values = std::mem::take(&mut numeric[j]);
        cohort = match col {
            Column::Baseline(b) => cohort.with_baseline(b, values).map_err(data)?,
            Column::Score(m) => cohort.with_score(m, values).map_err(data)?,
            Column::Outcome(m) => cohort.with_outcome(m, values).map_err(data)?,
            Column::Completed(t) => {
                completed.insert(t, std::mem::take(&mut flags[j]));
                cohort
            }
            Column::Id | Column::Arm => cohort,
        };
    }
    debug_assert!(completed.values().all(|v| v.len() == n));
    cohort.completed = completed;
    cohort.validate().map_err(data)?;
    cohort.digest = Some(sha256_hex(text.as_bytes()));
    Ok(cohort)
}

/// Reads and validates a cohort CSV, recording its SHA-256 digest.
pub fn ingest_cohort_csv(path: &Path, cohort_id: &str) -> Result<CohortData, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes).map_err(|_| CliError::Data(format!("{} is not UTF-8", path.display())))?;
    parse_cohort_csv(&text, cohort_id).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Writes a cohort in the layout read by [`parse_cohort_csv`].
pub fn cohort_to_csv(c: &CohortData) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["participant_id".to_string()];
    let has_arms = c.arms.iter().any(Option::is_some);
    if has_arms {
        header.push("arm".into());
    }
    header.extend(c.completed.keys().map(|t| format!("completed_{t}")));
    header.extend(c.baseline.keys().map(|b| format!("baseline_{b}")));
    for m in c.measures() {
        if c.scores.contains_key(&m) {
            header.push(format!("score_{}_{}", m.endpoint, m.timepoint));
        }
        if c.outcomes.contains_key(&m) {
            header.push(format!("outcome_{}_{}", m.endpoint, m.timepoint));
        }
    }
    w.write_record(&header).expect("in-memory write");
    for i in 0..c.len() {
        let mut row = vec![c.participant_ids[i].clone()];
        if has_arms {
            row.push(match c.arms[i] {
                Some(Arm::Treatment) => "treatment".into(),
                Some(Arm::Control) => "control".into(),
                None => String::new(),
            });
        }
        row.extend(c.completed.values().map(|v| if v[i] { "1" } else { "0" }.to_string()));
        row.extend(c.baseline.values().map(|v| cell(v[i])));
        for m in c.measures() {
            if let Some(v) = c.scores.get(&m) {
                row.push(cell(v[i]));
            }
            if let Some(v) = c.outcomes.get(&m) {
                row.push(cell(v[i]));
            }
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}
