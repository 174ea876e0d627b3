//! What happens to power when the endpoint SD, variance reduction or dropout
//! observed in the trial differ from the planning assumptions, and how to
//! plan with a conservative variance reduction.
//!
//! cargo run --example effective_sample_size

use procova::design::{
    conservative_vr, effective_sample_size, power_vs_effective_fraction, required_sample_size, AllocationRatio,
    ConservativeMethod, ObservedParameters, PowerModel, TrialDesign,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
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
    let sizes = required_sample_size(&design)?;

    let scenarios = [
        ("as planned", ObservedParameters { endpoint_sd: 1.0, vr: 0.10, dropout_rate: 0.0 }),
        ("score useless", ObservedParameters { endpoint_sd: 1.0, vr: 0.0, dropout_rate: 0.0 }),
        ("score better", ObservedParameters { endpoint_sd: 1.0, vr: 0.16, dropout_rate: 0.0 }),
        ("noisier endpoint", ObservedParameters { endpoint_sd: 1.1, vr: 0.10, dropout_rate: 0.0 }),
    ];
    for (label, observed) in scenarios {
        let r = effective_sample_size(&design, observed, &sizes)?;
        println!(
            "{label:>16}: information {:.3}, power {:.3}, would have needed {}",
            r.information_fraction, r.achieved_power, r.n_eff_required
        );
    }

    for p in [0.80, 0.90] {
        println!("designed for {p:.2}, 90% of planned information: {:.3}", power_vs_effective_fraction(0.9, p, 0.05)?);
    }

    let factor = conservative_vr(0.159, &ConservativeMethod::FixedFactor { factor: 0.6 })?;
    let bootstrap = vec![0.09, 0.11, 0.12, 0.14, 0.15, 0.16, 0.17, 0.18, 0.19, 0.21];
    let pct = conservative_vr(0.159, &ConservativeMethod::Percentile { percentile: 10.0, distribution: bootstrap })?;
    println!("evaluated VR 15.9% → fixed factor {:.1}%, 10th percentile {:.1}%", factor * 100.0, pct * 100.0);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
