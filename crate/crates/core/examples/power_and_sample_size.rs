//! Sizing a trial with and without prognostic covariate adjustment, and the
//! three ways of turning the precision gain into a smaller trial.
//!
//! cargo run --example power_and_sample_size

use procova::design::{
    apply_reduction, power_at, required_sample_size, required_sample_size_coprimary, AllocationRatio, PowerModel,
    ReductionStrategy, TrialDesign,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // Effect size chosen so that 1000 participants give 90% power unadjusted.
    let effect = TrialDesign::calibrated_effect(1000, 0.05, 0.90, 1.0, AllocationRatio::EQUAL)?;
    let design = TrialDesign {
        alpha: 0.05,
        target_power: 0.90,
        effect_size: effect,
        endpoint_sd: 1.0,
        allocation_ratio: AllocationRatio::EQUAL,
        dropout_rate: 0.0,
        assumed_vr: 0.10,
        endpoint_label: "CDR-SB".into(),
        power_model: PowerModel::Normal,
    };

    println!("standardized effect {effect:.4}");
    for vr in [0.0, 0.10, 0.15] {
        let s = required_sample_size(&design.with_vr(vr))?;
        println!("VR {:>4.0}%: {} total ({}/{})", vr * 100.0, s.n_total, s.n_treatment, s.n_control);
    }

    let full = required_sample_size(&design.with_vr(0.0))?;
    println!(
        "power at {} with VR 15%: {:.3}",
        full.n_total,
        power_at(&design.with_vr(0.15), &full)
    );

    for strategy in [
        ReductionStrategy::MaintainRatio,
        ReductionStrategy::ControlArmOnly,
        ReductionStrategy::PartialRealization { realized_fraction: 0.5 },
    ] {
        let s = apply_reduction(&design, strategy)?;
        println!(
            "{strategy:?}: {}/{} (control arm {:.1}% smaller), power {:.3}, power if score useless {:.3}",
            s.n_treatment,
            s.n_control,
            100.0 * (1.0 - s.n_control as f64 / full.n_control as f64),
            power_at(&design, &s),
            power_at(&design.with_vr(0.0), &s),
        );
    }

    // Co-primary endpoints: the larger requirement wins.
    let mut adas = design.with_vr(0.05);
    adas.endpoint_label = "ADAS-Cog 14".into();
    let both = required_sample_size_coprimary(&[design.clone(), adas.clone()])?;
    println!("co-primary CDR-SB + ADAS-Cog 14: {} total", both.n_total);

    // Dropout inflates enrollment, not completers.
    let mut with_dropout = design.clone();
    with_dropout.dropout_rate = 0.15;
    let s = required_sample_size(&with_dropout)?;
    println!("15% dropout: {} completers, {} enrolled", s.n_total, s.n_enrolled_total);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
