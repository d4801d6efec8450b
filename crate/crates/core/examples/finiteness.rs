//! Extension constant bounded from (m+2)-point subsets of K.
use horizontal_whitney::{finiteness_check, suite, ModulusOfContinuity, SampleSet};

fn main() -> horizontal_whitney::Result<()> {
    let omega = ModulusOfContinuity::linear();
    for n in [6, 10, 14] {
        let values = suite::by_name("cubic_lift").unwrap().values(&SampleSet::uniform(0.0, 1.0, n)?)?;
        let report = finiteness_check(&values, 1, &omega, 100_000)?;
        println!(
            "|K| = {n:2}: estimate {:.4} from {} subsets (exhaustive: {})",
            report.m_estimate, report.subsets_scanned, report.exhaustive
        );
    }
    Ok(())
}
