//! Moduli of continuity and the sampled Hölder seminorm of sqrt.
use horizontal_whitney::{holder_seminorm, ModulusOfContinuity};

fn main() -> horizontal_whitney::Result<()> {
    let samples: Vec<(f64, f64)> = (0..=200).map(|i| i as f64 / 200.0).map(|x| (x, x.sqrt())).collect();
    for omega in [ModulusOfContinuity::linear(), ModulusOfContinuity::power(0.5)?] {
        let s = holder_seminorm(&samples, &omega, 0)?;
        println!("{:?}: omega(0.01) = {:.4}, seminorm = {s:.4}", omega.kind(), omega.eval(0.01)?);
    }
    let table = ModulusOfContinuity::tabulated(vec![(0.0, 0.0), (0.1, 0.5), (1.0, 1.0)])?;
    println!("tabulated omega(0.05) = {:.4}", table.eval(0.05)?);
    Ok(())
}
