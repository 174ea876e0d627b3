//! Blinded sample-size re-estimation as a mitigation: a trial reduced from
//! 1000 to 900 on an assumed 10% variance reduction, simulated with a score
//! that turns out to be useless.
//!
//! cargo run --release --example blinded_ssr [-- REPS]

use procova::design::{required_sample_size, AllocationRatio, PowerModel, TrialDesign};
use procova::simulation::{run_monte_carlo, simulate_with_ssr, Adjustment, ReestimationTargets, ScenarioSpec, SsrPlan};

pub fn run_with(reps: usize) -> Result<(), Box<dyn std::error::Error>> {
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
    let planned = required_sample_size(&design)?;
    let truth = ScenarioSpec { true_score_correlation: 0.0, ..ScenarioSpec::at_design_truth(&design) };
    let plan = SsrPlan {
        interim_fraction: 0.5,
        max_n_total: 1100,
        targets: ReestimationTargets::default(),
        increase_only: true,
    };

    let fixed = run_monte_carlo(&truth, &planned, Adjustment::Score, reps, 7)?;
    let ssr = simulate_with_ssr(&truth, &planned, &plan, Adjustment::Score, reps, 7)?;
    println!("planned {} participants", planned.n_total);
    println!("without re-estimation: power {:.3} ± {:.3}", fixed.rejection_rate, fixed.binomial_se);
    println!(
        "with re-estimation:    power {:.3} ± {:.3}, final n median {} (range {}-{})",
        ssr.rejection_rate, ssr.binomial_se, ssr.final_n.median, ssr.final_n.min, ssr.final_n.max
    );
    println!("{}", ssr.to_json());
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    run_with(1000)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reps = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20_000);
    run_with(reps)
}
