//! Checks the three extension hypotheses for a smooth and a vertical curve.
use horizontal_whitney::extension::check_conditions;
use horizontal_whitney::{suite, ExtensionOptions, ModulusOfContinuity, SampleSet};

fn main() -> horizontal_whitney::Result<()> {
    let omega = ModulusOfContinuity::linear();
    let k = SampleSet::uniform(0.0, 1.0, 12)?;
    for name in ["cubic_lift", "vertical_line"] {
        let t = suite::by_name(name).unwrap().jets(&k, 2)?;
        let report = check_conditions(&t, &omega, &ExtensionOptions::default())?;
        println!("{name}: kappa {:.3}, A/V ratio {:.3}", report.kappa, report.area_velocity.max_ratio);
        for f in &report.failures {
            println!("  failed: {f}");
        }
    }
    Ok(())
}
