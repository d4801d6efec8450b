//! Closed-form building blocks: smooth step, bumps, blended scalar pieces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::ScalarJet;
use crate::polynomial::Polynomial;
use crate::quadrature::integrate;
use crate::series::{bump, bump_derivative_sups, bump_first, smooth_step, smooth_step_first, Series};

/// A bounded component (a, b) of I \ K, or an outer segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub index: usize,
    pub a: f64,
    pub b: f64,
}

impl Gap {
    pub fn new(index: usize, a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("gap needs a < b, got [{a}, {b}]")));
        }
        Ok(Self { index, a, b })
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        self.b <= self.a
    }
}

/// χ(s) = σ(s) / (σ(s) + σ(1 - s)) with σ(s) = exp(-1/s).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SmoothStep;

impl SmoothStep {
    pub fn eval(&self, s: f64) -> f64 {
        smooth_step(s, 0).value()
    }

    /// `[χ(s), χ'(s), ..., χ^{(n)}(s)]`.
    pub fn derivatives(&self, s: f64, n: usize) -> Vec<f64> {
        smooth_step(s, n).derivatives()
    }
}

/// `amplitude · β((t - center) / radius)` supported on `support`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub support: (f64, f64),
    pub amplitude: f64,
}

impl BumpSpec {
    pub fn new(c: f64, d: f64, amplitude: f64) -> Result<Self> {
        if !(c < d) || !amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bump needs c < d and finite amplitude, got [{c}, {d}], {amplitude}"
            )));
        }
        Ok(Self { support: (c, d), amplitude })
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.support.0 + self.support.1)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.support.1 - self.support.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { support: self.support, amplitude: self.amplitude * s }
    }

    pub fn series(&self, t: f64, n: usize) -> Series {
        let r = self.radius();
        let u = (t - self.center()) / r;
        if u <= -1.0 || u >= 1.0 {
            return Series::zero(n);
        }
        bump(u, n).chain_affine(1.0 / r).scale(self.amplitude)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.series(t, 0).value()
    }

    /// Value and first derivative.
    pub fn first(&self, t: f64) -> (f64, f64) {
        let r = self.radius();
        let u = (t - self.center()) / r;
        if u <= -1.0 || u >= 1.0 {
            return (0.0, 0.0);
        }
        let (v, d) = bump_first(u);
        (self.amplitude * v, self.amplitude * d / r)
    }

    /// Upper bound for sup |D^i| of the bump.
    pub fn derivative_bound(&self, i: usize) -> f64 {
        self.amplitude.abs() * bump_derivative_sups()[i] * self.radius().powi(-(i as i32))
    }

    /// `∫ bump · w` over the support.
    pub fn integrate_against<W: Fn(f64) -> f64>(&self, w: W) -> Result<f64> {
        let (c, d) = self.support;
        let w_size = (0..=8).map(|j| w(c + (d - c) * j as f64 / 8.0).abs()).fold(0.0, f64::max);
        let scale = self.amplitude.abs() * (d - c) * w_size;
        integrate(|t| self.value(t) * w(t), c, d, 1e-13 * scale.max(1e-300), 1e-12).map(|r| r.0)
    }
}

/// One scalar piece of the extension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarPiece {
    /// `(1 - χ(s)) T_a + χ(s) T_b` with `s = (t - a)/(b - a)`.
    Blend {
        a: f64,
        b: f64,
        left: Polynomial,
        right: Polynomial,
    },
    /// A single Taylor polynomial (outer segments).
    Taylor { poly: Polynomial },
}

impl ScalarPiece {
    pub fn blend(a: f64, b: f64, left: Polynomial, right: Polynomial) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("blend needs a < b, got [{a}, {b}]")));
        }
        Ok(ScalarPiece::Blend { a, b, left, right })
    }

    /// Taylor polynomial at the left end (the only one for outer pieces).
    pub fn left_polynomial(&self) -> &Polynomial {
        match self {
            ScalarPiece::Blend { left, .. } => left,
            ScalarPiece::Taylor { poly } => poly,
        }
    }

    pub fn series(&self, t: f64, n: usize) -> Series {
        match self {
            ScalarPiece::Taylor { poly } => Series(poly.taylor_coefficients(t, n)),
            ScalarPiece::Blend { a, b, left, right } => {
                let len = b - a;
                let chi = smooth_step((t - a) / len, n).chain_affine(1.0 / len);
                let l = Series(left.taylor_coefficients(t, n));
                if chi.0.iter().all(|c| *c == 0.0) {
                    return l;
                }
                let r = Series(right.taylor_coefficients(t, n));
                if chi.0[0] == 1.0 && chi.0[1..].iter().all(|c| *c == 0.0) {
                    return r;
                }
                l.add(&chi.mul(&r.sub(&l)))
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.series(t, 0).value()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.first(t).1
    }

    /// Value and first derivative, without series arithmetic.
    pub fn first(&self, t: f64) -> (f64, f64) {
        match self {
            ScalarPiece::Taylor { poly } => poly.value_and_slope(t),
            ScalarPiece::Blend { a, b, left, right } => {
                let len = b - a;
                let (chi, dchi) = smooth_step_first((t - a) / len);
                let l = left.value_and_slope(t);
                if chi == 0.0 && dchi == 0.0 {
                    return l;
                }
                let r = right.value_and_slope(t);
                if chi == 1.0 && dchi == 0.0 {
                    return r;
                }
                let dchi = dchi / len;
                let (ls, lc) = left.eval_compensated(t);
                let (rs, rc) = right.eval_compensated(t);
                let gap = (rs - ls) + (rc - lc);
                (l.0 + chi * gap, l.1 + dchi * gap + chi * (r.1 - l.1))
            }
        }
    }
}

/// Scalar C^m extension of a jet: blends on bounded gaps of K, Taylor
/// polynomials on the outer segments of the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarExtension {
    pub domain: (f64, f64),
    pub knots: Vec<f64>,
    pub left: Polynomial,
    pub gaps: Vec<ScalarPiece>,
    pub right: Polynomial,
}

impl ScalarExtension {
    /// Piece index: `None` for the outer segments.
    fn locate(&self, t: f64) -> Option<usize> {
        let n = self.knots.len();
        if t < self.knots[0] || t >= self.knots[n - 1] {
            return None;
        }
        Some(self.knots.partition_point(|&k| k <= t) - 1)
    }

    pub fn series(&self, t: f64, n: usize) -> Result<Series> {
        let (lo, hi) = self.domain;
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain(format!("t = {t} outside [{lo}, {hi}]")));
        }
        Ok(match self.locate(t) {
            Some(i) => self.gaps[i].series(t, n),
            None if t < self.knots[0] => Series(self.left.taylor_coefficients(t, n)),
            None => Series(self.right.taylor_coefficients(t, n)),
        })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.series(t, 0)?.value())
    }

    /// `[D^0 f(t), ..., D^n f(t)]`.
    pub fn derivatives(&self, t: f64, n: usize) -> Result<Vec<f64>> {
        Ok(self.series(t, n)?.derivatives())
    }
}

/// Whitney-type extension of a scalar jet to the interval `domain ⊇ K`.
pub fn whitney_extend_scalar(f: &ScalarJet, domain: (f64, f64)) -> Result<ScalarExtension> {
    let (lo, hi) = f.sample_set().hull();
    if !(domain.0 <= lo && domain.1 >= hi) || !(domain.0 < domain.1) {
        return Err(Error::InvalidArgument(format!(
            "sample hull [{lo}, {hi}] is not inside the domain [{}, {}]",
            domain.0, domain.1
        )));
    }
    let pts = f.sample_set().points();
    let n = pts.len();
    let taylors: Vec<Polynomial> = (0..n).map(|i| f.taylor(i)).collect();
    let gaps = (0..n - 1)
        .map(|i| ScalarPiece::blend(pts[i], pts[i + 1], taylors[i].clone(), taylors[i + 1].clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalarExtension {
        domain,
        knots: pts.to_vec(),
        left: taylors[0].clone(),
        gaps,
        right: taylors[n - 1].clone(),
    })
}

/// `f'g - fg'` of two pieces at t.
pub(crate) fn bracket(f: &ScalarPiece, g: &ScalarPiece, t: f64) -> f64 {
    let fs = f.series(t, 1);
    let gs = g.series(t, 1);
    fs.0[1] * gs.0[0] - fs.0[0] * gs.0[1]
}

/// Tolerance scale for integrals of `f'g - fg'` over a gap.
pub(crate) fn bracket_scale(f: &ScalarPiece, g: &ScalarPiece, a: f64, b: f64) -> f64 {
    let mut s = 0.0f64;
    for j in 0..=8 {
        let t = a + (b - a) * j as f64 / 8.0;
        let fs = f.series(t, 1);
        let gs = g.series(t, 1);
        s = s.max((fs.0[1] * gs.0[0]).abs() + (fs.0[0] * gs.0[1]).abs());
    }
    s
}

/// The vertical coordinate re-defined gap by gap as an integral of the
/// horizontal bracket, together with the deficits left at the right ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerticalRedefinition {
    pub gaps: Vec<Gap>,
    /// H^0(a_i) for each gap.
    pub h_start: Vec<f64>,
    /// `𝒜_i = H^0(b_i) - h(b_i^-)`.
    pub deficits: Vec<f64>,
    #[serde(skip)]
    f: Vec<ScalarPiece>,
    #[serde(skip)]
    g: Vec<ScalarPiece>,
}

impl VerticalRedefinition {
    /// `h(t) = H^0(a_i) + 2∫_{a_i}^t (f'g - fg')` on the gap containing t.
    pub fn h(&self, t: f64) -> Result<f64> {
        let i = self
            .gaps
            .iter()
            .position(|gp| t >= gp.a && t <= gp.b)
            .ok_or_else(|| Error::Domain(format!("t = {t} is not inside a gap")))?;
        let gp = self.gaps[i];
        let scale = bracket_scale(&self.f[i], &self.g[i], gp.a, gp.b);
        let (v, _) = integrate(
            |s| bracket(&self.f[i], &self.g[i], s),
            gp.a,
            t,
            1e-14 * (1.0 + scale) * gp.len(),
            1e-13,
        )?;
        Ok(self.h_start[i] + 2.0 * v)
    }
}

/// Integrates the bracket of the scalar extensions across every bounded gap
/// of K and reports the per-gap deficit.
pub fn vertical_redefine(
    f: &ScalarExtension,
    g: &ScalarExtension,
    h0: &[f64],
) -> Result<VerticalRedefinition> {
    if f.knots != g.knots || h0.len() != f.knots.len() {
        return Err(Error::InvalidArgument(
            "f, g and H^0 must live on the same sample set".into(),
        ));
    }
    let gaps: Vec<Gap> = f
        .knots
        .windows(2)
        .enumerate()
        .map(|(i, w)| Gap::new(i, w[0], w[1]))
        .collect::<Result<_>>()?;
    let deficits = gaps
        .iter()
        .map(|gp| {
            let (fp, gq) = (&f.gaps[gp.index], &g.gaps[gp.index]);
            gap_deficit(fp, gq, gp, h0[gp.index], h0[gp.index + 1])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerticalRedefinition {
        h_start: h0[..h0.len() - 1].to_vec(),
        gaps,
        deficits,
        f: f.gaps.clone(),
        g: g.gaps.clone(),
    })
}

pub(crate) fn gap_deficit(
    f: &ScalarPiece,
    g: &ScalarPiece,
    gap: &Gap,
    h_a: f64,
    h_b: f64,
) -> Result<f64> {
    let scale = bracket_scale(f, g, gap.a, gap.b);
    let (v, _) = integrate(
        |t| bracket(f, g, t),
        gap.a,
        gap.b,
        1e-14 * (1.0 + scale) * gap.len(),
        1e-13,
    )?;
    Ok(h_b - (h_a + 2.0 * v))
}
