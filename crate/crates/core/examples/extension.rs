//! Horizontal C^{2,1} extension of circle jets, written as CSV.
use horizontal_whitney::{extend_horizontal, suite, ExtensionOptions, ModulusOfContinuity, SampleSet};

fn main() -> horizontal_whitney::Result<()> {
    let k = SampleSet::new(vec![0.0, 0.15, 0.2, 0.6, 0.9, 1.0])?;
    let t = suite::by_name("circle_lift").unwrap().jets(&k, 2)?;
    let curve = extend_horizontal(&t, &ModulusOfContinuity::linear(), (0.0, 1.0), &ExtensionOptions::default())?;

    let audit = curve.audit(32)?;
    println!("jet match {:.2e}, residual {:.2e}", audit.jet_match, audit.residual.max());
    for pair in curve.repairs() {
        println!("gap {:?}: {:?}, lambda {:.3e}", (pair.gap.a, pair.gap.b), pair.case, pair.lambda);
    }
    let path = std::env::temp_dir().join("circle_extension.csv");
    std::fs::write(&path, curve.to_csv(501)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
