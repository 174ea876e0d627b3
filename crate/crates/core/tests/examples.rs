#![allow(dead_code)]

use std::path::Path;

#[path = "../examples/power_and_sample_size.rs"]
mod power_and_sample_size;
#[path = "../examples/power_curves.rs"]
mod power_curves;
#[path = "../examples/effective_sample_size.rs"]
mod effective_sample_size;
#[path = "../examples/evaluate_cohort.rs"]
mod evaluate_cohort;
#[path = "../examples/nested_cv.rs"]
mod nested_cv;
#[path = "../examples/monte_carlo.rs"]
mod monte_carlo;
#[path = "../examples/blinded_ssr.rs"]
mod blinded_ssr;
#[path = "../examples/credibility_report.rs"]
mod credibility_report;
#[path = "../examples/make_published_fixtures.rs"]
mod make_published_fixtures;

#[test]
fn power_and_sample_size_runs() {
    power_and_sample_size::run_example().unwrap();
}

#[test]
fn power_curves_runs() {
    power_curves::run_example().unwrap();
}

#[test]
fn effective_sample_size_runs() {
    effective_sample_size::run_example().unwrap();
}

#[test]
fn evaluate_cohort_runs() {
    evaluate_cohort::run_example().unwrap();
}

#[test]
fn nested_cv_runs() {
    nested_cv::run_example().unwrap();
}

#[test]
fn monte_carlo_runs() {
    monte_carlo::run_example().unwrap();
}

#[test]
fn blinded_ssr_runs() {
    blinded_ssr::run_example().unwrap();
}

#[test]
fn credibility_report_runs() {
    credibility_report::run_example().unwrap();
}

#[test]
fn committed_fixtures_are_regenerated_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let written = make_published_fixtures::write_fixtures(dir.path()).unwrap();
    assert_eq!(written.len(), 5);
    let committed = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for path in written {
        let name = path.file_name().unwrap();
        let fresh = std::fs::read(&path).unwrap();
        let old = std::fs::read(committed.join(name)).unwrap();
        assert!(fresh == old, "{} differs from the committed fixture", name.to_string_lossy());
    }
}
