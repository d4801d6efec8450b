//! The assembled horizontal curve, its audits and exports.

use serde::{Deserialize, Serialize};

use super::pieces::{Gap, ScalarPiece};
use super::repair::{ExtensionConstants, PerturbationPair};
use crate::error::{Error, Result};
use crate::heisenberg::{CurveDerivatives, HPoint};
use crate::jets::HorizontalJetTriple;
use crate::modulus::{holder_seminorm, ModulusOfContinuity};
use crate::polynomial::Polynomial;
use crate::quadrature::integrate;
use crate::series::Series;

/// Number of uniform nodes in the per-gap table of h.
const H_TABLE_NODES: usize = 33;

/// `h` series from its value and the series of f, g of the same order.
fn lift_series(h0: f64, fs: &Series, gs: &Series) -> Series {
    let n = fs.order();
    let mut out = vec![0.0; n + 1];
    out[0] = h0;
    if n == 0 {
        return Series(out);
    }
    let fd = fs.differentiate();
    let gd = gs.differentiate();
    let ft = Series(fs.0[..n].to_vec());
    let gt = Series(gs.0[..n].to_vec());
    let br = fd.mul(&gt).sub(&ft.mul(&gd));
    for k in 1..=n {
        out[k] = 2.0 * br.0[k - 1] / k as f64;
    }
    Series(out)
}

/// Taylor polynomials of f, g at an end point of K and the exact lift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterPiece {
    pub anchor: f64,
    pub f: Polynomial,
    pub g: Polynomial,
    pub h: Polynomial,
}

impl OuterPiece {
    pub fn new(anchor: f64, f: Polynomial, g: Polynomial, h0: f64) -> Self {
        let br = f.derivative().mul(&g).sub(&f.mul(&g.derivative())).recentered(anchor);
        let h = br.antiderivative().scale(2.0).add(&Polynomial::centered(vec![h0], anchor));
        Self { anchor, f, g, h }
    }

    fn bracket(&self, t: f64) -> f64 {
        let (f, df) = self.f.value_and_slope(t);
        let (g, dg) = self.g.value_and_slope(t);
        df * g - f * dg
    }

    fn series(&self, t: f64, n: usize) -> [Series; 3] {
        [
            Series(self.f.taylor_coefficients(t, n)),
            Series(self.g.taylor_coefficients(t, n)),
            Series(self.h.taylor_coefficients(t, n)),
        ]
    }
}

/// One bounded gap: blended f, g plus the repair, and h as an integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPiece {
    pub gap: Gap,
    pub f: ScalarPiece,
    pub g: ScalarPiece,
    pub repair: PerturbationPair,
    /// Nodes and cumulative values of h on the gap.
    pub h_table: Vec<(f64, f64)>,
    /// Size of the bracket terms on the gap, for quadrature tolerances.
    pub bracket_scale: f64,
}

impl GapPiece {
    pub fn new(
        gap: Gap,
        f: ScalarPiece,
        g: ScalarPiece,
        repair: PerturbationPair,
        h_start: f64,
    ) -> Result<Self> {
        let mut nodes: Vec<f64> = (0..H_TABLE_NODES)
            .map(|j| gap.a + gap.len() * j as f64 / (H_TABLE_NODES - 1) as f64)
            .collect();
        nodes.extend(repair.breakpoints());
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let mut piece =
            Self { gap, f, g, repair, h_table: vec![(gap.a, h_start)], bracket_scale: 0.0 };
        let scale = piece.measure_bracket_scale();
        piece.bracket_scale = scale;
        let mut acc = h_start;
        for w in nodes.windows(2) {
            acc += piece.bracket_integral(w[0], w[1], scale)?;
            piece.h_table.push((w[1], acc));
        }
        Ok(piece)
    }

    fn fg_series(&self, t: f64, n: usize) -> (Series, Series) {
        (
            self.f.series(t, n).add(&self.repair.phi_series(t, n)),
            self.g.series(t, n).add(&self.repair.psi_series(t, n)),
        )
    }

    /// `((f, f'), (g, g'))` of the repaired pair.
    fn fg_first(&self, t: f64) -> ((f64, f64), (f64, f64)) {
        let (f, df) = self.f.first(t);
        let (g, dg) = self.g.first(t);
        let (p, dp) = self.repair.phi_first(t);
        let (q, dq) = self.repair.psi_first(t);
        ((f + p, df + dp), (g + q, dg + dq))
    }

    /// `f'g - fg'` of the repaired pair.
    pub fn bracket(&self, t: f64) -> f64 {
        let ((f, df), (g, dg)) = self.fg_first(t);
        df * g - f * dg
    }

    fn measure_bracket_scale(&self) -> f64 {
        (0..=16)
            .map(|j| {
                let t = self.gap.a + self.gap.len() * j as f64 / 16.0;
                let (fs, gs) = self.fg_series(t, 1);
                (fs.0[1] * gs.0[0]).abs() + (fs.0[0] * gs.0[1]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `2∫_s^t (f'g - fg')`.
    fn bracket_integral(&self, s: f64, t: f64, scale: f64) -> Result<f64> {
        let tol = 1e-14 * (1.0 + scale) * self.gap.len();
        Ok(2.0 * integrate(|u| self.bracket(u), s, t, tol, 1e-14)?.0)
    }

    pub fn h(&self, t: f64) -> Result<f64> {
        let j = self.h_table.partition_point(|(x, _)| *x <= t).saturating_sub(1);
        let (x0, v0) = self.h_table[j];
        if x0 == t {
            return Ok(v0);
        }
        Ok(v0 + self.bracket_integral(x0, t, self.bracket_scale)?)
    }

    fn series(&self, t: f64, n: usize) -> Result<[Series; 3]> {
        let (fs, gs) = self.fg_series(t, n);
        let hs = lift_series(self.h(t)?, &fs, &gs);
        Ok([fs, gs, hs])
    }
}

enum Piece {
    Left,
    Right,
    Gap(usize),
}

/// Which neighbouring piece to use at a point of K.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Horizontal-residual audit of an assembled curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualAudit {
    /// max |h' - 2(f'g - fg')| from the piece derivatives.
    pub pointwise: f64,
    /// max |h(t_{j+1}) - h(t_j) - 2∫(f'g - fg')| on consecutive grid points.
    pub increment: f64,
    /// max |h(k^-) - H^0(k)| at interior points of K.
    pub knot_jump: f64,
    pub grid_points: usize,
}

impl ResidualAudit {
    pub fn max(&self) -> f64 {
        self.pointwise.max(self.increment).max(self.knot_jump)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub order: usize,
    /// max over K, both sides, orders 0..=m of |D^k Γ - jet|.
    pub jet_match: f64,
    pub residual: ResidualAudit,
    /// Sampled C^{m,ω} seminorms of x, y, z on the audit grid.
    pub seminorms: [f64; 3],
}

/// Explicit horizontal curve through a jet triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSmoothCurve {
    pub domain: (f64, f64),
    pub jets: HorizontalJetTriple,
    pub omega: ModulusOfContinuity,
    pub constants: ExtensionConstants,
    pub left: OuterPiece,
    pub gaps: Vec<GapPiece>,
    pub right: OuterPiece,
}

impl PiecewiseSmoothCurve {
    pub(crate) fn from_parts(
        domain: (f64, f64),
        jets: HorizontalJetTriple,
        omega: ModulusOfContinuity,
        constants: ExtensionConstants,
        gaps: Vec<GapPiece>,
    ) -> Self {
        let pts = jets.sample_set().points();
        let n = pts.len();
        let left = OuterPiece::new(pts[0], jets.f().taylor(0), jets.g().taylor(0), jets.h().value(0, 0));
        let right = OuterPiece::new(
            pts[n - 1],
            jets.f().taylor(n - 1),
            jets.g().taylor(n - 1),
            jets.h().value(0, n - 1),
        );
        Self { domain, jets, omega, constants, left, gaps, right }
    }

    pub fn order(&self) -> usize {
        self.jets.order()
    }

    pub fn knots(&self) -> &[f64] {
        self.jets.sample_set().points()
    }

    /// The repairs performed on every gap.
    pub fn repairs(&self) -> impl Iterator<Item = &PerturbationPair> {
        self.gaps.iter().map(|g| &g.repair)
    }

    /// Series of (f, g, h) at t, of order n, from the piece on the given side.
    pub fn series_from(&self, t: f64, n: usize, side: Side) -> Result<[Series; 3]> {
        match self.locate(t, side)? {
            Piece::Left => Ok(self.left.series(t, n)),
            Piece::Right => Ok(self.right.series(t, n)),
            Piece::Gap(i) => self.gaps[i].series(t, n),
        }
    }

    /// `f'g - fg'`; skips the quadrature behind h.
    fn bracket_from(&self, t: f64, side: Side) -> Result<f64> {
        Ok(match self.locate(t, side)? {
            Piece::Left => self.left.bracket(t),
            Piece::Right => self.right.bracket(t),
            Piece::Gap(i) => self.gaps[i].bracket(t),
        })
    }

    fn locate(&self, t: f64, side: Side) -> Result<Piece> {
        let (lo, hi) = self.domain;
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain(format!("t = {t} outside [{lo}, {hi}]")));
        }
        let k = self.knots();
        let last = k.len() - 1;
        let below = |x: f64| match side {
            Side::Right => t < x,
            Side::Left => t <= x,
        };
        if below(k[0]) {
            return Ok(Piece::Left);
        }
        if !below(k[last]) {
            return Ok(Piece::Right);
        }
        Ok(Piece::Gap(match side {
            Side::Right => k.partition_point(|&x| x <= t) - 1,
            Side::Left => k.partition_point(|&x| x < t) - 1,
        }))
    }

    /// `[D^0, ..., D^n]` of each coordinate at t.
    pub fn derivatives(&self, t: f64, n: usize) -> Result<[Vec<f64>; 3]> {
        self.derivatives_from(t, n, Side::Right)
    }

    pub fn derivatives_from(&self, t: f64, n: usize, side: Side) -> Result<[Vec<f64>; 3]> {
        let [f, g, h] = self.series_from(t, n, side)?;
        Ok([f.derivatives(), g.derivatives(), h.derivatives()])
    }

    pub fn eval(&self, t: f64) -> Result<HPoint> {
        let [f, g, h] = self.series_from(t, 0, Side::Right)?;
        Ok(HPoint::new(f.value(), g.value(), h.value()))
    }

    /// K, `per_gap` interior points on every gap of K, and as many on each
    /// nonempty outer segment of the domain.
    pub fn audit_grid(&self, per_gap: usize) -> Vec<f64> {
        let k = self.knots();
        let mut grid = Vec::with_capacity(k.len() * (per_gap + 1) + 2 * per_gap + 2);
        let fill = |a: f64, b: f64, grid: &mut Vec<f64>| {
            for j in 1..=per_gap {
                grid.push(a + (b - a) * j as f64 / (per_gap + 1) as f64);
            }
        };
        if self.domain.0 < k[0] {
            grid.push(self.domain.0);
            fill(self.domain.0, k[0], &mut grid);
        }
        for w in k.windows(2) {
            grid.push(w[0]);
            fill(w[0], w[1], &mut grid);
        }
        grid.push(k[k.len() - 1]);
        if self.domain.1 > k[k.len() - 1] {
            fill(k[k.len() - 1], self.domain.1, &mut grid);
            grid.push(self.domain.1);
        }
        grid
    }

    /// max over K, orders 0..=m, coordinates and both one-sided pieces of
    /// |D^k Γ - jet|.
    pub fn jet_match_error(&self) -> Result<f64> {
        let m = self.order();
        let mut worst = 0.0f64;
        for (i, &x) in self.knots().iter().enumerate() {
            for side in [Side::Left, Side::Right] {
                let d = self.derivatives_from(x, m, side)?;
                for (c, jet) in self.jets.coordinates().iter().enumerate() {
                    for k in 0..=m {
                        worst = worst.max((d[c][k] - jet.value(k, i)).abs());
                    }
                }
            }
        }
        Ok(worst)
    }

    pub fn residual_audit(&self, per_gap: usize) -> Result<ResidualAudit> {
        let grid = self.audit_grid(per_gap);
        let mut pointwise = 0.0f64;
        for &t in &grid {
            for side in [Side::Left, Side::Right] {
                let [f, g, h] = self.series_from(t, 1, side)?;
                let r = h.0[1] - 2.0 * (f.0[1] * g.0[0] - f.0[0] * g.0[1]);
                pointwise = pointwise.max(r.abs());
            }
        }
        let mut increment = 0.0f64;
        for w in grid.windows(2) {
            let (s, t) = (w[0], w[1]);
            let hs = self.series_from(s, 0, Side::Right)?[2].value();
            let ht = self.series_from(t, 0, Side::Left)?[2].value();
            let br = |u: f64| self.bracket_from(u, Side::Right).unwrap_or(f64::NAN);
            let (v, _) = integrate(br, s, t, 1e-14 * (1.0 + hs.abs()) * (t - s), 1e-13)?;
            increment = increment.max((ht - hs - 2.0 * v).abs());
        }
        let mut knot_jump = 0.0f64;
        let k = self.knots();
        for i in 1..k.len() {
            let h_left = self.series_from(k[i], 0, Side::Left)?[2].value();
            knot_jump = knot_jump.max((h_left - self.jets.h().value(0, i)).abs());
        }
        Ok(ResidualAudit { pointwise, increment, knot_jump, grid_points: grid.len() })
    }

    /// Sampled C^{m,ω} seminorm of each coordinate on the audit grid.
    pub fn seminorms(&self, per_gap: usize) -> Result<[f64; 3]> {
        let m = self.order();
        let grid = self.audit_grid(per_gap);
        let mut samples: [Vec<(f64, f64)>; 3] = Default::default();
        for &t in &grid {
            let d = self.derivatives_from(t, m, Side::Right)?;
            for c in 0..3 {
                samples[c].push((t, d[c][m]));
            }
        }
        let mut out = [0.0; 3];
        for c in 0..3 {
            out[c] = holder_seminorm(&samples[c], &self.omega, m)?;
        }
        Ok(out)
    }

    pub fn audit(&self, per_gap: usize) -> Result<AuditReport> {
        Ok(AuditReport {
            order: self.order(),
            jet_match: self.jet_match_error()?,
            residual: self.residual_audit(per_gap)?,
            seminorms: self.seminorms(per_gap)?,
        })
    }

    /// CSV `t,x,y,z,residual` on `samples` uniform points of the domain.
    pub fn to_csv(&self, samples: usize) -> Result<String> {
        let n = samples.max(2);
        let (lo, hi) = self.domain;
        let mut out = String::from("t,x,y,z,residual\n");
        for j in 0..n {
            let t = if j == n - 1 { hi } else { lo + (hi - lo) * j as f64 / (n - 1) as f64 };
            let [f, g, h] = self.series_from(t, 1, Side::Right)?;
            let r = h.0[1] - 2.0 * (f.0[1] * g.0[0] - f.0[0] * g.0[1]);
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                t,
                f.value(),
                g.value(),
                h.value(),
                r
            ));
        }
        Ok(out)
    }
}

impl CurveDerivatives for PiecewiseSmoothCurve {
    fn parameter_domain(&self) -> (f64, f64) {
        self.domain
    }

    fn value_and_derivative(&self, t: f64) -> Result<([f64; 3], [f64; 3])> {
        let [f, g, h] = self.series_from(t, 1, Side::Right)?;
        Ok(([f.0[0], g.0[0], h.0[0]], [f.0[1], g.0[1], h.0[1]]))
    }
}
