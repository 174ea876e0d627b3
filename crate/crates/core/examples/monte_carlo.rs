//! Operating characteristics by simulation: type I error under the null and
//! power at the design truth, with and without adjustment.
//!
//! cargo run --release --example monte_carlo [-- REPS]

use procova::design::{required_sample_size, AllocationRatio, PowerModel, TrialDesign};
use procova::simulation::{analytic_power, run_monte_carlo, Adjustment, ScenarioSpec};

pub fn run_with(reps: usize) -> Result<(), Box<dyn std::error::Error>> {
    let design = TrialDesign {
        alpha: 0.05,
        target_power: 0.90,
        effect_size: TrialDesign::calibrated_effect(400, 0.05, 0.90, 1.0, AllocationRatio::EQUAL)?,
        endpoint_sd: 1.0,
        allocation_ratio: AllocationRatio::EQUAL,
        dropout_rate: 0.1,
        assumed_vr: 0.25,
        endpoint_label: "endpoint".into(),
        power_model: PowerModel::Normal,
    };
    let sizes = required_sample_size(&design)?;
    let truth = ScenarioSpec::at_design_truth(&design);
    let null = ScenarioSpec { true_effect: 0.0, ..truth.clone() };
    println!("{} completers, {} enrolled", sizes.n_total, sizes.n_enrolled_total);

    for adjustment in [Adjustment::Unadjusted, Adjustment::Score] {
        let t1 = run_monte_carlo(&null, &sizes, adjustment, reps, 1)?;
        let pw = run_monte_carlo(&truth, &sizes, adjustment, reps, 2)?;
        println!(
            "{adjustment:?}: type I {:.4} ± {:.4}, power {:.4} ± {:.4} (analytic {:.4}), mean SE {:.4}",
            t1.rejection_rate,
            t1.binomial_se,
            pw.rejection_rate,
            pw.binomial_se,
            analytic_power(&truth, &sizes, adjustment)?,
            pw.mean_se_adjusted,
        );
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    run_with(1000)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reps = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5000);
    run_with(reps)
}
