//! Lusin approximation of a curve with a corner at t = 1/2.
use horizontal_whitney::{lusin_approximate, suite, LusinOptions, ModulusOfContinuity};

fn main() -> horizontal_whitney::Result<()> {
    let samples = suite::by_name("corner").unwrap().sampled(65537)?;
    let r = lusin_approximate(&samples, 2, &ModulusOfContinuity::linear(), 0.05, &LusinOptions::default())?;
    println!(
        "kept {} cells of width {:.2e}, measure deficit {:.4} (target {})",
        r.k.len(),
        r.cell_width,
        r.agreement_measure_deficit,
        r.epsilon_target
    );
    let centers: Vec<String> =
        r.discarded_cells.iter().map(|&i| format!("{:.3}", r.cell_center(i, 0.0))).collect();
    println!("discarded cells at {}", centers.join(", "));
    Ok(())
}
