//! Curve data for power against sample size at several variance reductions,
//! and power against the information fraction actually achieved.
//!
//! cargo run --example power_curves

use procova::design::{effective_fraction_curve, power_curve, AllocationRatio, NRange, PowerModel, TrialDesign};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let design = TrialDesign {
        alpha: 0.05,
        target_power: 0.90,
        effect_size: TrialDesign::calibrated_effect(1000, 0.05, 0.90, 1.0, AllocationRatio::EQUAL)?,
        endpoint_sd: 1.0,
        allocation_ratio: AllocationRatio::EQUAL,
        dropout_rate: 0.0,
        assumed_vr: 0.0,
        endpoint_label: String::new(),
        power_model: PowerModel::Normal,
    };
    let curve = power_curve(&design, &[0.0, 0.15], NRange { start: 500, end: 1500, step: 100 })?;
    print!("{}", curve.to_csv());
    println!("power at 1000 with VR 15%: {:.3}", curve.power(1000, 1).unwrap_or(f64::NAN));

    let fractions: Vec<f64> = (0..=10).map(|i| 0.5 + 0.05 * i as f64).collect();
    let fc = effective_fraction_curve(&fractions, &[0.80, 0.90], 0.05)?;
    print!("{}", fc.to_csv());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
