//! Horizontality repair on one gap: inject a prescribed area with flat bumps.
use horizontal_whitney::{
    horizontality_repair, ExtensionConstants, Gap, ModulusOfContinuity, Polynomial, ScalarPiece,
};

fn main() -> horizontal_whitney::Result<()> {
    let gap = Gap::new(0, 0.2, 0.3)?;
    let f = ScalarPiece::blend(0.2, 0.3, Polynomial::new(vec![0.0, 1.0]), Polynomial::new(vec![0.01, 1.0]))?;
    let g = ScalarPiece::blend(0.2, 0.3, Polynomial::new(vec![1.0, 0.0, 0.5]), Polynomial::new(vec![1.0, 0.0, 0.5]))?;
    let constants = ExtensionConstants::unit(2)?;
    let omega = ModulusOfContinuity::linear();
    for deficit in [1e-4, -1e-4] {
        let pair = horizontality_repair(&gap, &f, &g, deficit, 2, &omega, &constants)?;
        let injected = pair.injected_area(&f, &g, 1e-14)?;
        println!("deficit {deficit:e}: {:?}, lambda {:.4e}, injected {injected:.6e}", pair.case, pair.lambda);
    }
    Ok(())
}
