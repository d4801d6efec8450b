//! Extension matching jets of every order up to 4.
use horizontal_whitney::{extend_cinfty, suite, ExtensionConstants, ExtensionOptions, SampleSet};

fn main() -> horizontal_whitney::Result<()> {
    let k = SampleSet::uniform(0.0, 1.0, 9)?;
    let t = suite::by_name("circle_lift").unwrap().jets(&k, 4)?;
    let curve = extend_cinfty(&t, (0.0, 1.0), &ExtensionOptions::default())?;
    println!("order {}, jet match {:.2e}", curve.order(), curve.jet_match_error()?);

    // shorter gaps may be repaired at higher order
    let schedule = ExtensionConstants::measured(vec![1.0; 5])?;
    println!("schedule: {:?}", schedule.schedule);
    for len in [1e-3, 1e-9, 1e-25, 1e-40, 1e-60] {
        println!("gap length {len:e}: repaired at order {:?}", schedule.order_for(len));
    }
    Ok(())
}
