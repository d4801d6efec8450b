//! Bump-function repair of the area deficit on one gap.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::pieces::{BumpSpec, Gap, ScalarPiece};
use crate::area_velocity::velocity_from_polys;
use crate::error::{Error, Result};
use crate::modulus::ModulusOfContinuity;
use crate::polynomial::integral_abs_unchecked;
use crate::quadrature::{integrate, integrate_with_breaks};
use crate::series::{bump, bump_derivative_sups, Series, BUMP_TABLE_ORDER};

/// Which regime produced the perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RepairCase {
    /// Zero deficit, nothing added.
    Trivial,
    /// `φ ≡ 0`, `ψ = λη` where f' keeps one sign.
    FBig,
    /// `ψ ≡ 0`, `φ = λη` where g' keeps one sign.
    GBig,
    /// Two overlapping bumps sweeping a small loop.
    SmallLoop,
}

/// Bump amplitude factor: η ≥ 48 m² ω(L) L^m on the middle third of J.
pub(crate) fn amplitude_factor(m: usize) -> f64 {
    let m = m.max(1) as f64;
    48.0 * m * m / (-9.0f64 / 8.0).exp()
}

/// Shortest admissible support relative to the gap, 1/(18 m²).
pub(crate) fn min_support_fraction(m: usize) -> f64 {
    let m = m.max(1) as f64;
    1.0 / (18.0 * m * m)
}

/// `∫ β(u - 2/3) β'(u) du`, the loop area of the canonical bump pair.
pub(crate) fn loop_coefficient() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        integrate(
            |u| bump(u - 2.0 / 3.0, 0).value() * bump(u, 1).0[1],
            -1.0 / 3.0,
            1.0,
            1e-16,
            1e-14,
        )
        .map(|r| r.0)
        .unwrap_or(f64::NAN)
    })
}

/// Per-order constants of the repair and the resulting gap-length schedule.
///
/// All vectors are indexed by order `0..=m_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionConstants {
    pub kappa: Vec<f64>,
    /// sup |D^i η| ≤ C_m ω(L) L^{m-i}, i ≤ m, for every admissible bump.
    pub c_bump: Vec<f64>,
    /// Bound on the small-loop perturbations in the same units.
    pub c_loop: Vec<f64>,
    pub c_hat: Vec<f64>,
    /// Gap lengths below which the √L guard is enforced.
    pub schedule: Vec<f64>,
    pub measured: bool,
}

impl ExtensionConstants {
    /// Constants from the canonical bump geometry and the given κ_m.
    pub fn measured(kappa: Vec<f64>) -> Result<Self> {
        Self::build(kappa, None, true)
    }

    /// κ_m = C_m = 1 at every order. Useful to exercise the case selection
    /// on unit-scale data; the √L guard is then not backed by the bump bounds.
    pub fn unit(m_max: usize) -> Result<Self> {
        Self::build(vec![1.0; m_max + 1], Some(1.0), false)
    }

    fn build(kappa: Vec<f64>, c_fixed: Option<f64>, measured: bool) -> Result<Self> {
        if kappa.is_empty() {
            return Err(Error::InvalidArgument("need κ for at least order 0".into()));
        }
        if kappa.len() > BUMP_TABLE_ORDER + 1 {
            return Err(Error::InvalidArgument(format!(
                "orders above {BUMP_TABLE_ORDER} are not supported"
            )));
        }
        if kappa.iter().any(|k| !(k.is_finite() && *k >= 1.0)) {
            return Err(Error::InvalidArgument(format!("κ must be finite and ≥ 1, got {kappa:?}")));
        }
        let sups = bump_derivative_sups();
        let ct = loop_coefficient().abs();
        let mut c_bump = Vec::with_capacity(kappa.len());
        let mut c_loop = Vec::with_capacity(kappa.len());
        let mut c_hat: Vec<f64> = Vec::with_capacity(kappa.len());
        let mut schedule = Vec::with_capacity(kappa.len());
        for (m, &k) in kappa.iter().enumerate() {
            let am = amplitude_factor(m);
            let rho = 0.5 * min_support_fraction(m);
            let cm = c_fixed.unwrap_or_else(|| {
                (0..=m).map(|i| am * sups[i] * rho.powi(-(i as i32))).fold(0.0, f64::max)
            });
            let lambda = (k * (1.0 + 2.0 * k * cm) / (4.0 * am * am * ct)).sqrt();
            let cl = (lambda * cm / 6.0).max(1.0);
            let prev = if m == 0 { 1.0 } else { c_hat[m - 1] };
            let h = (k * cm).max(6.0 * cl).max(prev + 1.0);
            c_bump.push(cm);
            c_loop.push(cl);
            c_hat.push(h);
            schedule.push(1.0 / (h * h));
        }
        Ok(Self { kappa, c_bump, c_loop, c_hat, schedule, measured })
    }

    pub fn max_order(&self) -> usize {
        self.kappa.len() - 1
    }

    /// `κ_m C_m ω(L) L^m`.
    pub fn threshold(&self, m: usize, omega: &ModulusOfContinuity, len: f64) -> f64 {
        self.kappa[m] * self.c_bump[m] * omega.value(len) * len.powi(m as i32)
    }

    /// Largest order `1..=max_order` whose schedule admits `len`.
    pub fn order_for(&self, len: f64) -> Option<usize> {
        (1..=self.max_order()).rev().find(|&m| len <= self.schedule[m])
    }
}

/// The perturbation `(φ, ψ)` added to `(f, g)` on one gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPair {
    pub gap: Gap,
    pub case: RepairCase,
    pub order: usize,
    pub area_deficit: f64,
    pub lambda: f64,
    pub phi: Vec<BumpSpec>,
    pub psi: Vec<BumpSpec>,
    /// `|4∫(ψf' - φg' + ψφ') - 𝒜|`.
    pub residual: f64,
    /// Largest |D^i φ|, |D^i ψ| at the gap ends, i ≤ order.
    pub endpoint_flatness: f64,
    /// Bound on sup |D^i φ|, sup |D^i ψ| over the gap, i ≤ order.
    pub sup_norm: f64,
    /// Whether the gap is short enough for the √L guard to apply.
    pub guarded: bool,
}

fn sum_series(bumps: &[BumpSpec], t: f64, n: usize) -> Series {
    bumps.iter().fold(Series::zero(n), |acc, b| acc.add(&b.series(t, n)))
}

fn sum_first(bumps: &[BumpSpec], t: f64) -> (f64, f64) {
    bumps.iter().fold((0.0, 0.0), |acc, b| {
        let (v, d) = b.first(t);
        (acc.0 + v, acc.1 + d)
    })
}

impl PerturbationPair {
    pub fn trivial(gap: Gap, order: usize) -> Self {
        Self {
            gap,
            case: RepairCase::Trivial,
            order,
            area_deficit: 0.0,
            lambda: 0.0,
            phi: Vec::new(),
            psi: Vec::new(),
            residual: 0.0,
            endpoint_flatness: 0.0,
            sup_norm: 0.0,
            guarded: false,
        }
    }

    pub fn phi_series(&self, t: f64, n: usize) -> Series {
        sum_series(&self.phi, t, n)
    }

    pub fn psi_series(&self, t: f64, n: usize) -> Series {
        sum_series(&self.psi, t, n)
    }

    /// `(φ, φ')` at t.
    pub fn phi_first(&self, t: f64) -> (f64, f64) {
        sum_first(&self.phi, t)
    }

    pub fn psi_first(&self, t: f64) -> (f64, f64) {
        sum_first(&self.psi, t)
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.phi_series(t, 0).value()
    }

    pub fn psi(&self, t: f64) -> f64 {
        self.psi_series(t, 0).value()
    }

    /// Support endpoints of every bump, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .phi
            .iter()
            .chain(&self.psi)
            .flat_map(|b| [b.support.0, b.support.1])
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// `4∫(ψf' - φg' + ψφ')` by adaptive quadrature over the bump supports.
    pub fn injected_area(&self, f: &ScalarPiece, g: &ScalarPiece, tol: f64) -> Result<f64> {
        let breaks = self.breakpoints();
        if breaks.len() < 2 {
            return Ok(0.0);
        }
        let v = integrate_with_breaks(
            |t| {
                let p = self.phi_series(t, 1);
                let q = self.psi_series(t, 1);
                if p.0[0] == 0.0 && q.0[0] == 0.0 && p.0[1] == 0.0 && q.0[1] == 0.0 {
                    return 0.0;
                }
                q.0[0] * f.derivative(t) - p.0[0] * g.derivative(t) + q.0[0] * p.0[1]
            },
            &breaks,
            tol,
            1e-13,
        )?;
        Ok(4.0 * v)
    }
}

/// Sign-constant stretches of `w` on the gap, as closed intervals between
/// consecutive sign changes.
fn sign_runs<W: Fn(f64) -> f64>(w: &W, a: f64, b: f64, samples: usize) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = (0..=samples).map(|j| a + (b - a) * j as f64 / samples as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| w(x)).collect();
    let refine = |mut lo: f64, mut hi: f64, slo: f64| {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if w(mid).signum() == slo && w(mid) != 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * (b - a) {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let mut runs = Vec::new();
    let mut start: Option<(f64, f64)> = None; // (left end, sign)
    for j in 0..xs.len() {
        let s = if vs[j] > 0.0 { 1.0 } else if vs[j] < 0.0 { -1.0 } else { 0.0 };
        match start {
            None if s != 0.0 => {
                let left = if j == 0 { a } else { refine(xs[j], xs[j - 1], s) };
                start = Some((left, s));
            }
            Some((left, sg)) if s != sg => {
                let right = refine(xs[j - 1], xs[j], sg);
                runs.push((left, right));
                start = None;
                if s != 0.0 {
                    start = Some((right, s));
                }
            }
            _ => {}
        }
    }
    if let Some((left, _)) = start {
        runs.push((left, b));
    }
    runs
}

/// Best bump support for `∫η w` where w keeps one sign: among the shrunk
/// sign-constant runs and their half windows, the one with the smallest
/// derivative cost per unit of injected integral. Returns the unit-amplitude
/// bump and `∫β_J w`.
fn place_bump<W: Fn(f64) -> f64>(w: &W, gap: &Gap, m: usize) -> Result<Option<(BumpSpec, f64)>> {
    let len = gap.len();
    let min_len = min_support_fraction(m) * len;
    let sups = bump_derivative_sups();
    let mut best: Option<(f64, BumpSpec, f64)> = None;
    for (lo, hi) in sign_runs(w, gap.a, gap.b, 400) {
        let shrink = 0.1 * (hi - lo);
        let (c, d) = (lo + shrink, hi - shrink);
        if d - c < min_len {
            continue;
        }
        let half = 0.5 * (d - c);
        let mut windows = vec![(c, d)];
        if half >= min_len {
            windows.extend([(c, c + half), (c + 0.5 * half, d - 0.5 * half), (d - half, d)]);
        }
        for (c, d) in windows {
            let unit = BumpSpec::new(c, d, 1.0)?;
            let integral = unit.integrate_against(w)?;
            if integral == 0.0 || !integral.is_finite() {
                continue;
            }
            let r = unit.radius() / len;
            let cost = (0..=m.max(1))
                .map(|i| sups[i] * r.powi(-(i as i32)))
                .fold(0.0, f64::max)
                / (integral / len).abs();
            if best.as_ref().is_none_or(|(bc, _, _)| cost < *bc) {
                best = Some((cost, unit, integral));
            }
        }
    }
    Ok(best.map(|(_, b, i)| (b, i)))
}

/// Solves `4∫(ψf' - φg' + ψφ') = 𝒜` on one gap with flat bumps.
///
/// The regime is chosen by comparing `∫|T_a f'|` and `∫|T_a g'|` with
/// `κ_m C_m ω(L) L^m`. The result is verified by an independent quadrature
/// and, when the gap is shorter than the schedule value `c_m`, against the
/// √L bound on every derivative up to order m.
pub fn horizontality_repair(
    gap: &Gap,
    f: &ScalarPiece,
    g: &ScalarPiece,
    deficit: f64,
    m: usize,
    omega: &ModulusOfContinuity,
    constants: &ExtensionConstants,
) -> Result<PerturbationPair> {
    if !deficit.is_finite() {
        return Err(Error::InvalidArgument(format!("area deficit must be finite, got {deficit}")));
    }
    if m > constants.max_order() {
        return Err(Error::InvalidArgument(format!(
            "order {m} exceeds the constants' range {}",
            constants.max_order()
        )));
    }
    if deficit == 0.0 {
        return Ok(PerturbationPair::trivial(*gap, m));
    }
    let (a, b, len) = (gap.a, gap.b, gap.len());
    omega.check_span(len)?;
    let amp = amplitude_factor(m) * omega.value(len) * len.powi(m as i32);
    let tp = f.left_polynomial();
    let tq = g.left_polynomial();
    let i_f = integral_abs_unchecked(&tp.derivative(), a, b);
    let i_g = integral_abs_unchecked(&tq.derivative(), a, b);
    let threshold = constants.threshold(m, omega, len);

    let df = |t: f64| f.derivative(t);
    let dg = |t: f64| g.derivative(t);
    let mut choice: Option<(RepairCase, BumpSpec, f64)> = None;
    let mut order = [(RepairCase::FBig, i_f), (RepairCase::GBig, i_g)];
    if i_g > i_f {
        order.swap(0, 1);
    }
    for (case, integral) in order {
        if integral < threshold || choice.is_some() {
            continue;
        }
        let placed = match case {
            RepairCase::FBig => place_bump(&df, gap, m)?,
            _ => place_bump(&dg, gap, m)?,
        };
        if let Some((unit, w)) = placed {
            choice = Some((case, unit, w));
        }
    }

    let tol = 1e-14 * (1.0 + deficit.abs());
    let mut pair = PerturbationPair::trivial(*gap, m);
    pair.area_deficit = deficit;
    // slope of the injected area in λ, used by the Newton correction
    let slope: Box<dyn Fn(f64) -> f64>;
    match choice {
        Some((RepairCase::FBig, unit, w)) => {
            let eta = unit.scaled(amp);
            let lambda = deficit / (4.0 * amp * w);
            pair.case = RepairCase::FBig;
            pair.lambda = lambda;
            pair.psi = vec![eta.scaled(lambda)];
            slope = Box::new(move |_| 4.0 * amp * w);
        }
        Some((_, unit, w)) => {
            let eta = unit.scaled(amp);
            let lambda = -deficit / (4.0 * amp * w);
            pair.case = RepairCase::GBig;
            pair.lambda = lambda;
            pair.phi = vec![eta.scaled(lambda)];
            slope = Box::new(move |_| -4.0 * amp * w);
        }
        None => {
            let eta1 = BumpSpec::new(a + 0.1 * len, a + 0.7 * len, amp)?;
            let eta2 = BumpSpec::new(a + 0.3 * len, a + 0.9 * len, amp)?;
            let c = amp * amp * loop_coefficient();
            let s = c.signum() * deficit.signum();
            let b_cross = s * eta2.integrate_against(df)? - eta1.integrate_against(dg)?;
            let q = s * c;
            let disc = (b_cross * b_cross + q * deficit).sqrt();
            let sb = if b_cross >= 0.0 { 1.0 } else { -1.0 };
            let lambda = deficit / (2.0 * (b_cross + sb * disc));
            pair.case = RepairCase::SmallLoop;
            pair.lambda = lambda;
            pair.phi = vec![eta1.scaled(lambda)];
            pair.psi = vec![eta2.scaled(s * lambda)];
            slope = Box::new(move |l| 4.0 * (b_cross + 2.0 * q * l));
        }
    }

    let mut injected = pair.injected_area(f, g, tol)?;
    let accept = 1e-12 * (1.0 + deficit.abs());
    if (injected - deficit).abs() > accept {
        let d = slope(pair.lambda);
        if d != 0.0 && d.is_finite() {
            let new_lambda = pair.lambda - (injected - deficit) / d;
            let ratio = new_lambda / pair.lambda;
            pair.phi.iter_mut().for_each(|bp| *bp = bp.scaled(ratio));
            pair.psi.iter_mut().for_each(|bp| *bp = bp.scaled(ratio));
            pair.lambda = new_lambda;
            injected = pair.injected_area(f, g, tol)?;
        }
    }
    pair.residual = (injected - deficit).abs();
    if !(pair.residual <= 1e-9 * (1.0 + deficit.abs())) {
        return Err(Error::Numerical(format!(
            "repair on [{a}, {b}] left residual {:.3e} for deficit {deficit:.3e}",
            pair.residual
        )));
    }

    let mut flat = 0.0f64;
    for t in [a, b] {
        for s in [pair.phi_series(t, m), pair.psi_series(t, m)] {
            flat = flat.max(s.derivatives().iter().fold(0.0, |acc, v| acc.max(v.abs())));
        }
    }
    pair.endpoint_flatness = flat;
    pair.sup_norm = (0..=m)
        .map(|i| {
            let phi: f64 = pair.phi.iter().map(|bp| bp.derivative_bound(i)).sum();
            let psi: f64 = pair.psi.iter().map(|bp| bp.derivative_bound(i)).sum();
            phi.max(psi)
        })
        .fold(0.0, f64::max);
    pair.guarded = len <= constants.schedule[m];
    if pair.guarded && pair.sup_norm > len.sqrt() {
        let v = velocity_from_polys(tp, tq, a, b, len, m, omega);
        return Err(Error::Admissibility {
            a,
            b,
            sup_norm: pair.sup_norm,
            bound: len.sqrt(),
            implied_constant: if v > 0.0 { deficit.abs() / v } else { f64::INFINITY },
        });
    }
    Ok(pair)
}
