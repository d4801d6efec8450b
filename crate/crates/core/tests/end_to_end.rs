use horizontal_whitney::extension::Side;
use horizontal_whitney::suite::{self, Fixture, NamedCurve};
use horizontal_whitney::{
    extend_horizontal, finiteness_check, lusin_approximate, ExtensionOptions, LusinOptions,
    ModulusOfContinuity, SampleSet,
};

#[test]
fn extension_interpolates_jets_and_stays_horizontal() {
    let omega = ModulusOfContinuity::linear();
    let k = SampleSet::new(vec![0.0, 0.1, 0.35, 0.4, 0.8, 1.0]).unwrap();
    for curve in suite::smooth_suite() {
        let t = curve.jets(&k, 2).unwrap();
        let c = extend_horizontal(&t, &omega, (-0.5, 1.5), &ExtensionOptions::default()).unwrap();
        assert!(c.jet_match_error().unwrap() < 1e-9, "{}", curve.name);
        assert!(c.residual_audit(16).unwrap().max() < 1e-9, "{}", curve.name);
        // one-sided derivatives agree at the knots up to order m
        for &x in c.knots() {
            let l = c.derivatives_from(x, 2, Side::Left).unwrap();
            let r = c.derivatives_from(x, 2, Side::Right).unwrap();
            for (a, b) in l.iter().zip(&r) {
                for (u, v) in a.iter().zip(b) {
                    assert!((u - v).abs() < 1e-8 * (1.0 + u.abs()), "{} at {x}", curve.name);
                }
            }
        }
    }
}

#[test]
fn finiteness_constant_is_stable_under_refinement() {
    let omega = ModulusOfContinuity::linear();
    let curve = NamedCurve::new("cubic", Fixture::CubicLift);
    let mut constants = Vec::new();
    for n in [8, 16] {
        let v = curve.values(&SampleSet::uniform(0.0, 1.0, n).unwrap()).unwrap();
        let r = finiteness_check(&v, 1, &omega, 20_000).unwrap();
        constants.push(r.m_estimate);
    }
    assert!(constants.iter().all(|c| c.is_finite() && *c > 0.0));
    assert!(constants[1] <= 4.0 * constants[0] && constants[0] <= 4.0 * constants[1]);
}

#[test]
fn lusin_recovers_circle_and_isolates_corner() {
    let omega = ModulusOfContinuity::linear();
    let opts = LusinOptions::default();

    let circle = suite::by_name("circle_lift").unwrap().sampled(65537).unwrap();
    let r = lusin_approximate(&circle, 2, &omega, 0.1, &opts).unwrap();
    assert!(r.agreement_measure_deficit < 0.1);
    assert!(r.trimmed_cells.is_empty());
    let c = r.curve.as_ref().unwrap();
    for &x in r.k.iter().step_by(17) {
        let p = c.eval(x).unwrap();
        assert!((p.x - x.cos()).abs() < 1e-5 && (p.y - x.sin()).abs() < 1e-5);
    }

    let corner = suite::by_name("corner").unwrap().sampled(65537).unwrap();
    let r = lusin_approximate(&corner, 2, &omega, 0.1, &opts).unwrap();
    assert!(r.agreement_measure_deficit < 0.1);
    assert!(r.curve.is_some());
    let near = |i: &usize| (r.cell_center(*i, 0.0) - 0.5).abs() <= 3.0 * r.cell_width;
    assert!(r.trimmed_cells.iter().all(near));
}
