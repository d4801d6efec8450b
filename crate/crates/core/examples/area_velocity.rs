//! Area-to-velocity ratios across scales, from jets and from bare values.
use horizontal_whitney::{
    av_ratio_scan, discrete_av_scan, suite, CurveValues, ModulusOfContinuity, SampleSet,
};

fn main() -> horizontal_whitney::Result<()> {
    let omega = ModulusOfContinuity::linear();
    let curve = suite::by_name("circle_lift").unwrap();
    let k = SampleSet::uniform(0.0, 1.0, 16)?;

    let scan = av_ratio_scan(&curve.jets(&k, 2)?, &omega)?;
    println!("jets: max ratio {:.4} over {} pairs", scan.max_ratio, scan.pairs_scanned);
    print!("{}", scan.scale_csv());

    let values: CurveValues = curve.values(&k)?;
    let discrete = discrete_av_scan(&values, 2, &omega, 50_000)?;
    println!("values: max ratio {:.4} over {} subsets", discrete.max_ratio, discrete.subsets_scanned);
    Ok(())
}
