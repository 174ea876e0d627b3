//! Evaluating a prognostic score on a historical cohort: correlation method,
//! randomization inference and a bootstrap percentile for conservative
//! planning.
//!
//! cargo run --example evaluate_cohort

use procova::cli::ingest_cohort_csv;
use procova::evaluation::{bootstrap_vr, evaluate_cohort, randomization_inference_vr, to_step6_csv, Measure};
use std::path::Path;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/phase_2.csv");
    let cohort = ingest_cohort_csv(&path, "Phase 2")?;
    println!("{} participants, digest {}", cohort.len(), cohort.digest.as_deref().unwrap_or("-"));

    let results = cohort
        .measures()
        .iter()
        .map(|m| evaluate_cohort(&cohort, m, &[]))
        .collect::<Result<Vec<_>, _>>()?;
    print!("{}", to_step6_csv(&results));

    let m = Measure::new("CDR-SB", "18");
    let ri = randomization_inference_vr(&cohort, &m, &[], 200, 11)?;
    println!("randomization inference {m}: {:.1}%", ri.vr_full * 100.0);

    let boot = bootstrap_vr(&cohort, &m, &[], 500, 10.0, 11)?;
    println!(
        "bootstrap {m}: mean {:.1}%, 10th percentile {:.1}% ({} skipped)",
        boot.summary.mean * 100.0,
        boot.summary.percentile_value * 100.0,
        boot.summary.skipped
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
