use super::{EvalError, EvaluationMethod, EvaluationResult, Result};

/// Percent with one decimal, e.g. 0.159 → "15.9".
pub fn format_percent(fraction: f64) -> String {
    format!("{:.1}", fraction * 100.0)
}

const HEADER: &str = "cohort_id,endpoint,timepoint,n,vr_standard,vr_full,vr_incremental";

/// Evaluation table in percent with one decimal.
pub fn to_step6_csv(results: &[EvaluationResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER.split(',')).unwrap();
    for r in results {
        w.write_record([
            r.cohort_id.clone(),
            r.endpoint.clone(),
            r.timepoint.clone(),
            r.n_evaluable.to_string(),
            format_percent(r.vr_standard),
            format_percent(r.vr_full),
            format_percent(r.vr_incremental),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Reads an evaluation table written by [`to_step6_csv`] (or prepared by
/// hand from published numbers). Values are percentages.
pub fn parse_step6_csv(text: &str, method: EvaluationMethod) -> Result<Vec<EvaluationResult>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| EvalError::Invalid(e.to_string()))?.clone();
    let want: Vec<&str> = HEADER.split(',').collect();
    if headers.iter().collect::<Vec<_>>() != want {
        return Err(EvalError::Invalid(format!("evaluation table header must be {HEADER}")));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| EvalError::Invalid(e.to_string()))?;
        let row = line + 2;
        let num = |col: usize| -> Result<f64> {
            rec[col]
                .parse::<f64>()
                .map(|v| v / 100.0)
                .map_err(|_| EvalError::Invalid(format!("row {row}, column {}: {:?} is not a number", want[col], &rec[col])))
        };
        out.push(EvaluationResult {
            cohort_id: rec[0].to_string(),
            endpoint: rec[1].to_string(),
            timepoint: rec[2].to_string(),
            n_evaluable: rec[3]
                .parse()
                .map_err(|_| EvalError::Invalid(format!("row {row}, column n: {:?}", &rec[3])))?,
            vr_standard: num(4)?,
            vr_full: num(5)?,
            vr_incremental: num(6)?,
            method,
            bootstrap_summary: None,
        });
    }
    Ok(out)
}
