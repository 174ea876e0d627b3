//! Regenerates the evaluation fixtures under `fixtures/`: one synthetic
//! cohort CSV per evaluation cohort, built so that the correlation method
//! reproduces each published variance reduction exactly, plus the published
//! table itself in percent.
//!
//! cargo run --example make_published_fixtures [-- OUT_DIR]

use procova::cli::cohort_to_csv;
use procova::evaluation::to_step6_csv;
use procova::fixtures::{fixture_file_name, published_cohorts, published_results};
use std::path::{Path, PathBuf};

pub const FIXTURE_SEED: u64 = 2024;

pub fn write_fixtures(dir: &Path) -> Result<Vec<PathBuf>, Box<dyn std::error::Error>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for cohort in published_cohorts(FIXTURE_SEED)? {
        let path = dir.join(fixture_file_name(&cohort.cohort_id));
        std::fs::write(&path, cohort_to_csv(&cohort))?;
        written.push(path);
    }
    let path = dir.join("published_evaluations.csv");
    std::fs::write(&path, to_step6_csv(&published_results()))?;
    written.push(path);
    Ok(written)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    for p in write_fixtures(&dir)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
