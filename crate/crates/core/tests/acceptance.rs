//! Acceptance gate: one test per criterion, each printing a PASS/FAIL line
//! with its measurements and runtime.
//!
//! Criteria run one at a time (see `GATE`) so the runtimes are not inflated
//! by sibling tests on small machines.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use horizontal_whitney::extension::check_conditions;
use horizontal_whitney::heisenberg::HPoint;
use horizontal_whitney::polynomial::divided_difference_row;
use horizontal_whitney::suite::{self, Fixture, NamedCurve};
use horizontal_whitney::{
    admissible_cells, av_ratio_scan, equivalence_audit, extend_cinfty, extend_horizontal,
    horizontality_repair, integral_abs, left_invariance_audit, lusin_approximate, lusin_cinfty,
    newton_interpolant, remainder, AuditMode, Condition, Error, ExtensionConstants,
    ExtensionOptions, Gap, LusinOptions, LusinResult, ModulusOfContinuity,
    NodeSet, Polynomial, RepairCase, SampleSet, ScalarJet, ScalarPiece,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static GATE: Mutex<()> = Mutex::new(());

fn report(n: usize, pass: bool, detail: &str, elapsed: Duration, limit_s: f64) -> bool {
    let in_time = elapsed.as_secs_f64() < limit_s;
    let ok = pass && in_time;
    // straight to the handle so the line shows without --nocapture
    let _ = writeln!(
        std::io::stdout().lock(),
        "criterion {n}: {} | {detail} | {:.2} s (limit {limit_s} s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

/// Sorted random nodes in [-1, 1] with spacing at least `gap`.
fn random_nodes(rng: &mut ChaCha8Rng, n: usize, gap: f64) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        x.sort_by(f64::total_cmp);
        if x.windows(2).all(|w| w[1] - w[0] >= gap) {
            return x;
        }
    }
}

fn random_poly(rng: &mut ChaCha8Rng, degree: usize, scale: f64) -> Polynomial {
    Polynomial::new((0..=degree).map(|_| scale * rng.gen_range(-1.0..1.0)).collect())
}

fn lift(name: &str, f: Polynomial, g: Polynomial) -> NamedCurve {
    NamedCurve::new(name, Fixture::PolynomialLift { f, g })
}

#[test]
fn criterion_1_interpolation_and_divided_differences() {
    let _gate = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut coeff_err = 0.0f64;
    let mut perm_err = 0.0f64;
    for _ in 0..1000 {
        let degree = rng.gen_range(0..=6);
        let n = rng.gen_range(degree + 1..=8);
        let p = random_poly(&mut rng, degree, 1.0);
        let x = random_nodes(&mut rng, n, 0.05);
        let v: Vec<f64> = x.iter().map(|&t| p.eval(t)).collect();
        let q = newton_interpolant(&NodeSet::new(x.clone()).unwrap(), &v).unwrap();
        let (pc, qc) = (p.monomial_coeffs(), q.monomial_coeffs());
        for k in 0..pc.len().max(qc.len()) {
            let d = pc.get(k).copied().unwrap_or(0.0) - qc.get(k).copied().unwrap_or(0.0);
            coeff_err = coeff_err.max(d.abs());
        }

        let top = *divided_difference_row(&x, &v).unwrap().last().unwrap();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
        let vs: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
        let shuffled = *divided_difference_row(&xs, &vs).unwrap().last().unwrap();
        // size of the Lagrange-form terms of f[X]; the top difference itself
        // vanishes when |X| exceeds degree + 1
        let scale: f64 = (0..n)
            .map(|i| {
                let w: f64 = (0..n).filter(|&j| j != i).map(|j| x[i] - x[j]).product();
                (v[i] / w).abs()
            })
            .sum();
        if scale > 0.0 {
            perm_err = perm_err.max((top - shuffled).abs() / scale);
        }
    }
    let pass = coeff_err < 1e-9 && perm_err < 1e-10;
    let detail = format!("1000 cases, coefficient error {coeff_err:.2e}, permutation error {perm_err:.2e}");
    assert!(report(1, pass, &detail, start.elapsed(), 5.0));
}

#[test]
fn criterion_2_left_invariance() {
    let _gate = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let omega = ModulusOfContinuity::linear();
    let mut worst = 0.0f64;
    for case in 0..200 {
        let m = 1 + case % 2;
        let curve = lift("random", random_poly(&mut rng, 3, 1.0), random_poly(&mut rng, 3, 1.0));
        let k = SampleSet::new(random_nodes(&mut rng, 6, 0.05)).unwrap();
        let t = curve.jets(&k, m).unwrap();
        let p = HPoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let mode = if case % 4 < 2 { AuditMode::Continuous } else { AuditMode::Discrete { budget: 1000 } };
        let dev = left_invariance_audit(&t, &omega, p, mode).unwrap();
        worst = worst.max(dev / (1.0 + p.norm().powi(2)));
    }
    let pass = worst <= 1e-9;
    let detail = format!("200 cases, max deviation / (1 + |p|^2) = {worst:.2e}");
    assert!(report(2, pass, &detail, start.elapsed(), 10.0));
}

#[test]
fn criterion_3_horizontal_round_trip() {
    let _gate = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut curves = vec![suite::by_name("circle_lift").unwrap()];
    curves.extend(suite::polynomial_lifts());
    let options = ExtensionOptions::default();
    let (mut jm, mut res, mut runs, mut errors) = (0.0f64, 0.0f64, 0, Vec::new());
    for c in &curves {
        for n in [9, 17, 33] {
            for m in 1..=3 {
                let k = SampleSet::uniform(0.0, 1.0, n).unwrap();
                let t = c.jets(&k, m).unwrap();
                match extend_horizontal(&t, &ModulusOfContinuity::linear(), (0.0, 1.0), &options) {
                    Ok(curve) => {
                        jm = jm.max(curve.jet_match_error().unwrap());
                        res = res.max(curve.residual_audit(options.audit_points_per_gap).unwrap().max());
                        runs += 1;
                    }
                    Err(e) => errors.push(format!("{} n={n} m={m}: {e}", c.name)),
                }
            }
        }
    }
    for e in &errors {
        println!("  {e}");
    }
    let pass = errors.is_empty() && jm <= 1e-8 && res <= 1e-8;
    let detail = format!("{runs} extensions, jet match {jm:.2e}, residual {res:.2e}, {} errors", errors.len());
    assert!(report(3, pass, &detail, start.elapsed(), 30.0));
}

#[test]
fn criterion_4_defect_rejection() {
    let _gate = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let omega = ModulusOfContinuity::linear();
    let k = SampleSet::uniform(0.0, 1.0, 12).unwrap();
    let t = suite::by_name("vertical_line").unwrap().jets(&k, 1).unwrap();
    let ratio = av_ratio_scan(&t, &omega).unwrap().max_ratio;
    let report3 = check_conditions(&t, &omega, &ExtensionOptions::default()).unwrap();
    let flagged = report3.failures.iter().any(|f| f.condition == Condition::AreaVelocity);
    let err = extend_horizontal(&t, &omega, (0.0, 1.0), &ExtensionOptions::default()).unwrap_err();
    let named = matches!(err, Error::Validation { .. })
        && err.failed_conditions().contains(&Condition::AreaVelocity);
    let pass = ratio >= 1e3 && flagged && named;
    let detail = format!("max A/V ratio {ratio:.3e}, condition (3) flagged {flagged}, ValidationError names (3) {named}");
    assert!(report(4, pass, &detail, start.elapsed(), 2.0));
}

#[test]
fn criterion_5_discrete_continuous_equivalence() {
    let _gate = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let omega = ModulusOfContinuity::linear();
    let mut worst = 0.0f64;
    for c in suite::smooth_suite() {
        for n in [16, 32] {
            for m in 1..=2 {
                let t = c.jets(&SampleSet::uniform(0.0, 1.0, n).unwrap(), m).unwrap();
                let r = equivalence_audit(&t, &omega, 100_000).unwrap();
                worst = worst.max(r.ratio_of_constants);
            }
        }
    }
    let mut defect_ok = true;
    let mut defect_ratio = 0.0f64;
    for name in ["vertical_line", "tilted_line"] {
        let c = suite::by_name(name).unwrap();
        for m in 1..=2 {
            let run = |n: usize| {
                let t = c.jets(&SampleSet::uniform(0.0, 1.0, n).unwrap(), m).unwrap();
                equivalence_audit(&t, &omega, 100_000).unwrap()
            };
            let (coarse, fine) = (run(16), run(32));
            let grows = fine.continuous.max_ratio > coarse.continuous.max_ratio
                && fine.discrete.max_ratio > coarse.discrete.max_ratio;
            defect_ratio = defect_ratio.max(coarse.ratio_of_constants).max(fine.ratio_of_constants);
            defect_ok &= grows && coarse.ratio_of_constants <= 50.0 && fine.ratio_of_constants <= 50.0;
        }
    }
    let pass = worst <= 50.0 && defect_ok;
    let detail = format!(
        "smooth suite ratio of constants <= {worst:.3}, defect data grow together {defect_ok} (ratio <= {defect_ratio:.3})"
    );
    assert!(report(5, pass, &detail, start.elapsed(), 30.0));
}

/// `w^2 + w ∫(|P'| + |Q'|)` with `w = ω(L) L^m`, from the left Taylor data.
fn velocity(p: &Polynomial, q: &Polynomial, a: f64, b: f64, m: usize) -> f64 {
    let len = b - a;
    let w = len * len.powi(m as i32);
    let tv = integral_abs(&p.derivative(), a, b, 1e-15).unwrap()
        + integral_abs(&q.derivative(), a, b, 1e-15).unwrap();
    w * w + w * tv
}

#[test]
fn criterion_6_perturbation_solver() {
    let _gate = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let omega = ModulusOfContinuity::linear();
    let constants = ExtensionConstants::measured(vec![1.0; 4]).unwrap();
    let (mut residual, mut flat, mut guard_ratio) = (0.0f64, 0.0f64, 0.0f64);
    let (mut guarded, mut counts, mut errors) = (0, [0usize; 3], Vec::new());
    for case in 0..500 {
        let m = 1 + case % 3;
        let regime = (case / 3) % 3;
        let len = if case % 10 == 9 {
            // guarded gaps: L ≤ c_m
            constants.schedule[m] * rng.gen_range(0.05..1.0)
        } else {
            10f64.powf(rng.gen_range(-7.0..-3.5))
        };
        // guarded lengths reach 1e-34, so those gaps sit next to the origin
        let a = if len <= constants.schedule[m] { len * rng.gen_range(0.0..1.0) } else { rng.gen_range(-1.0..1.0) };
        let b = a + len;
        let threshold = constants.threshold(m, &omega, len) / len;
        // slopes: O(1) for the dominant coordinate, far below the threshold
        // for the small-loop regime
        let big = |rng: &mut ChaCha8Rng| rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let small = |rng: &mut ChaCha8Rng| 1e-3 * threshold * rng.gen_range(-1.0..1.0);
        let (sf, sg) = match regime {
            0 => (big(&mut rng), small(&mut rng)),
            1 => (small(&mut rng), big(&mut rng)),
            _ => (small(&mut rng), small(&mut rng)),
        };
        let poly = |slope: f64, rng: &mut ChaCha8Rng| {
            let mut c = vec![rng.gen_range(-1.0..1.0), slope];
            for _ in 2..=m + 1 {
                c.push(slope.abs() * rng.gen_range(-1.0..1.0));
            }
            Polynomial::centered(c, a)
        };
        let (pf, pg) = (poly(sf, &mut rng), poly(sg, &mut rng));
        let taylor = |p: &Polynomial, x: f64| Polynomial::centered(p.taylor_coefficients(x, m), x);
        let f = ScalarPiece::blend(a, b, taylor(&pf, a), taylor(&pf, b)).unwrap();
        let g = ScalarPiece::blend(a, b, taylor(&pg, a), taylor(&pg, b)).unwrap();
        let v = velocity(f.left_polynomial(), g.left_polynomial(), a, b, m);
        let theta = rng.gen_range(0.05..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let deficit = theta * v;
        let gap = Gap::new(case, a, b).unwrap();
        let pair = match horizontality_repair(&gap, &f, &g, deficit, m, &omega, &constants) {
            Ok(p) => p,
            Err(e) => {
                errors.push(format!("case {case} (L = {len:.2e}, m = {m}): {e}"));
                continue;
            }
        };
        match pair.case {
            RepairCase::FBig => counts[0] += 1,
            RepairCase::GBig => counts[1] += 1,
            RepairCase::SmallLoop => counts[2] += 1,
            RepairCase::Trivial => {}
        }
        // independent check of the injected area: composite Simpson rule
        let panels = 4000;
        let h = len / panels as f64;
        let integrand = |t: f64| {
            let (phi, dphi) = pair.phi_first(t);
            let (psi, _) = pair.psi_first(t);
            psi * f.derivative(t) - phi * g.derivative(t) + psi * dphi
        };
        let mut s = integrand(a) + integrand(b);
        for i in 1..panels {
            s += integrand(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let injected = 4.0 * s * h / 3.0;
        residual = residual.max((injected - deficit).abs() / (1.0 + deficit.abs()));
        for t in [a, b] {
            for ser in [pair.phi_series(t, m), pair.psi_series(t, m)] {
                flat = flat.max(ser.derivatives().iter().fold(0.0, |acc: f64, d| acc.max(d.abs())));
            }
        }
        if len <= constants.schedule[m] {
            guarded += 1;
            guard_ratio = guard_ratio.max(pair.sup_norm / len.sqrt());
        }
    }
    for e in errors.iter().take(10) {
        println!("  {e}");
    }
    let spans = counts.iter().all(|&c| c > 0);
    let pass = errors.is_empty() && spans && residual <= 1e-9 && flat <= 1e-10 && guard_ratio <= 1.0;
    let detail = format!(
        "500 cases (FBig {}, GBig {}, SmallLoop {}), {} errors, residual {residual:.2e}, \
         endpoint flatness {flat:.2e}, {guarded} guarded gaps with max sup/sqrt(L) {guard_ratio:.3}",
        counts[0],
        counts[1],
        counts[2],
        errors.len()
    );
    assert!(report(6, pass, &detail, start.elapsed(), 60.0));
}

#[test]
fn criterion_7_cinfty_schedule() {
    let _gate = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let c = suite::by_name("circle_lift").unwrap();
    let t = c.jets(&SampleSet::uniform(0.0, 1.0, 9).unwrap(), 4).unwrap();
    let curve = extend_cinfty(&t, (0.0, 1.0), &ExtensionOptions::default()).unwrap();
    let jm = curve.jet_match_error().unwrap();
    let res = curve.residual_audit(10).unwrap().max();
    let s = &curve.constants.schedule;
    let decreasing = s.windows(2).all(|w| w[1] < w[0]);
    let pass = curve.order() == 4 && jm <= 1e-8 && res <= 1e-8 && decreasing && s[0] <= 1.0;
    let schedule: Vec<String> = s.iter().map(|c| format!("{c:.3e}")).collect();
    let detail = format!(
        "orders 0..{}, jet match {jm:.2e}, residual {res:.2e}, c_m = [{}]",
        curve.order(),
        schedule.join(", ")
    );
    assert!(report(7, pass, &detail, start.elapsed(), 60.0));
}

/// A_N ⊆ A_{N+1} over the whole schedule, for every order used.
fn monotone(result: &LusinResult, domain: (f64, f64), n_max: usize) -> bool {
    result.cells.iter().all(|cells| {
        let mut prev: Vec<usize> = Vec::new();
        (1..=n_max).all(|n| {
            let a = admissible_cells(cells, domain, n);
            let ok = prev.iter().all(|i| a.binary_search(i).is_ok());
            prev = a;
            ok
        })
    })
}

#[test]
fn criterion_8_lusin_end_to_end() {
    let _gate = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let opts = LusinOptions::default();
    let omega = ModulusOfContinuity::linear();
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut check = |label: String, r: Result<LusinResult, Error>, near: Option<f64>, eps: f64| {
        runs += 1;
        let r = match r {
            Ok(r) => r,
            Err(e) => return failures.push(format!("{label}: {e}")),
        };
        if !(r.agreement_measure_deficit < eps) {
            failures.push(format!("{label}: deficit {} >= {eps}", r.agreement_measure_deficit));
        }
        if r.curve.is_none() {
            failures.push(format!("{label}: no curve"));
        }
        if !monotone(&r, (0.0, 1.0), opts.n_max) {
            failures.push(format!("{label}: A_N not monotone"));
        }
        // cells dropped for irregularity, as opposed to the boundary margin
        let irregular: Vec<usize> = r
            .uniform
            .iter()
            .flat_map(|u| u.irregular_cells.iter().copied())
            .chain(r.trimmed_cells.iter().copied())
            .collect();
        match near {
            Some(x) => {
                let far = irregular.iter().find(|&&i| {
                    let center = (i as f64 + 0.5) * r.cell_width;
                    (center - x).abs() > 3.0 * r.cell_width
                });
                if let Some(i) = far {
                    failures.push(format!("{label}: cell {i} dropped away from the defect"));
                }
                if irregular.is_empty() {
                    failures.push(format!("{label}: defect not detected"));
                }
            }
            None if !irregular.is_empty() => {
                failures.push(format!("{label}: smooth curve lost cells {irregular:?}"))
            }
            None => {}
        }
    };
    let mut datasets: Vec<(NamedCurve, Option<f64>)> =
        suite::smooth_suite().into_iter().map(|c| (c, None)).collect();
    datasets.push((suite::by_name("corner").unwrap(), Some(0.5)));
    for (c, near) in &datasets {
        let samples = c.sampled(65537).unwrap();
        for eps in [0.2, 0.1, 0.05] {
            for m in [1, 2] {
                let r = lusin_approximate(&samples, m, &omega, eps, &opts);
                check(format!("{} m={m} eps={eps}", c.name), r, *near, eps);
            }
            let r = lusin_cinfty(&samples, 3, eps, &opts);
            check(format!("{} m_max=3 eps={eps}", c.name), r, *near, eps);
        }
    }
    for f in &failures {
        println!("  {f}");
    }
    let detail = format!("{runs} runs over {} datasets, {} failures", datasets.len(), failures.len());
    assert!(report(8, failures.is_empty(), &detail, start.elapsed(), 120.0));
}

#[test]
fn criterion_9_taylor_estimate() {
    let _gate = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut functions: Vec<(String, Box<dyn Fn(usize, f64) -> f64>)> = vec![
        (
            "sin".into(),
            Box::new(|k: usize, x: f64| (x + k as f64 * std::f64::consts::FRAC_PI_2).sin()),
        ),
        ("exp".into(), Box::new(|_: usize, x: f64| x.exp())),
    ];
    for j in 0..3 {
        let p = random_poly(&mut rng, 8, 1.0);
        functions.push((format!("poly8_{j}"), Box::new(move |k: usize, x: f64| p.derivative_at(x, k))));
    }
    let mut worst_spread = 1.0f64;
    let mut finite = true;
    let mut lines = Vec::new();
    for (name, d) in &functions {
        for m in 1..=3 {
            let constants: Vec<f64> = [11, 21, 41]
                .iter()
                .map(|&n| {
                    let k = SampleSet::uniform(0.0, 1.0, n).unwrap();
                    let f = ScalarJet::from_fn(&k, m, &d).unwrap();
                    let pts = k.points();
                    let mut c = 0.0f64;
                    for &x in pts {
                        for &y in pts {
                            if x != y {
                                let r = remainder(&f, x, y, 0).unwrap();
                                c = c.max(r.abs() / ((y - x).abs() * (y - x).abs().powi(m as i32)));
                            }
                        }
                    }
                    c
                })
                .collect();
            finite &= constants.iter().all(|c| c.is_finite() && *c > 0.0);
            let hi = constants.iter().cloned().fold(0.0, f64::max);
            let lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
            worst_spread = worst_spread.max(hi / lo);
            lines.push(format!("{name} m={m}: {constants:.4?}"));
        }
    }
    for l in &lines {
        println!("  {l}");
    }
    let pass = finite && worst_spread <= 2.0;
    let detail = format!(
        "{} functions x m = 1..3 on 11/21/41 points, max spread across refinements {worst_spread:.3}",
        functions.len()
    );
    assert!(report(9, pass, &detail, start.elapsed(), 10.0));
}
