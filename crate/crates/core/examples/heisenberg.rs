//! Group law, left translation and horizontality of a sampled lift.
use horizontal_whitney::{frame_at, group_inv, group_mul, HPoint, SampledCurve};

fn main() -> horizontal_whitney::Result<()> {
    let p = HPoint::new(1.0, 2.0, 0.5);
    let q = HPoint::new(-0.5, 1.0, 3.0);
    println!("p*q = {:?}", group_mul(p, q));
    println!("p*p^-1 = {:?}", group_mul(p, group_inv(p)));
    println!("frame at p: {:?}", frame_at(p));

    // (cos t, sin t, -2t) is horizontal; so is every left translate
    let circle = SampledCurve::from_fn(0.0, 1.0, 2049, |t| HPoint::new(t.cos(), t.sin(), -2.0 * t))?;
    let moved = circle.translated(p)?;
    println!("chord defect: {:.2e} -> {:.2e}", circle.chord_horizontality_defect(), moved.chord_horizontality_defect());
    Ok(())
}
