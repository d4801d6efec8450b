//! The first Heisenberg group: group law, left-invariant frame, horizontality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::ScalarJet;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for HPoint {
    fn from(p: [f64; 3]) -> Self {
        HPoint::new(p[0], p[1], p[2])
    }
}

impl From<HPoint> for [f64; 3] {
    fn from(p: HPoint) -> Self {
        [p.x, p.y, p.z]
    }
}

impl HPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn origin() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// (x, y, z) * (x', y', z') = (x + x', y + y', z + z' + 2(y x' - x y')).
pub fn group_mul(p: HPoint, q: HPoint) -> HPoint {
    HPoint::new(p.x + q.x, p.y + q.y, p.z + q.z + 2.0 * (p.y * q.x - p.x * q.y))
}

pub fn group_inv(p: HPoint) -> HPoint {
    HPoint::new(-p.x, -p.y, -p.z)
}

/// Left-invariant frame `(X, Y, Z)` at `p`.
pub fn frame_at(p: HPoint) -> [[f64; 3]; 3] {
    [
        [1.0, 0.0, 2.0 * p.y],
        [0.0, 1.0, -2.0 * p.x],
        [0.0, 0.0, 1.0],
    ]
}

/// Lie bracket `[U, V](p) = DV(p) U(p) - DU(p) V(p)` by central differences.
pub fn lie_bracket<U, V>(u: U, v: V, p: HPoint, step: f64) -> [f64; 3]
where
    U: Fn(HPoint) -> [f64; 3],
    V: Fn(HPoint) -> [f64; 3],
{
    let dir = |field: &dyn Fn(HPoint) -> [f64; 3], w: [f64; 3]| -> [f64; 3] {
        let plus = field(HPoint::new(p.x + step * w[0], p.y + step * w[1], p.z + step * w[2]));
        let minus = field(HPoint::new(p.x - step * w[0], p.y - step * w[1], p.z - step * w[2]));
        [
            (plus[0] - minus[0]) / (2.0 * step),
            (plus[1] - minus[1]) / (2.0 * step),
            (plus[2] - minus[2]) / (2.0 * step),
        ]
    };
    let dv_u = dir(&v, u(p));
    let du_v = dir(&u, v(p));
    [dv_u[0] - du_v[0], dv_u[1] - du_v[1], dv_u[2] - du_v[2]]
}

/// Anything that can report `(value, first derivative)` of (f, g, h) at t.
pub trait CurveDerivatives {
    fn parameter_domain(&self) -> (f64, f64);
    fn value_and_derivative(&self, t: f64) -> Result<([f64; 3], [f64; 3])>;
}

/// Samples of a curve γ = (f, g, h) on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampledCurveRepr", into = "SampledCurveRepr")]
pub struct SampledCurve {
    grid: Vec<f64>,
    points: Vec<HPoint>,
    derivs: Vec<[f64; 3]>,
}

#[derive(Serialize, Deserialize)]
struct SampledCurveRepr {
    grid: Vec<f64>,
    points: Vec<[f64; 3]>,
}

impl TryFrom<SampledCurveRepr> for SampledCurve {
    type Error = Error;
    fn try_from(r: SampledCurveRepr) -> Result<Self> {
        SampledCurve::new(r.grid, r.points.into_iter().map(HPoint::from).collect())
    }
}

impl From<SampledCurve> for SampledCurveRepr {
    fn from(c: SampledCurve) -> Self {
        SampledCurveRepr {
            grid: c.grid,
            points: c.points.into_iter().map(<[f64; 3]>::from).collect(),
        }
    }
}

/// Weights of the derivative at `nodes[at]` of the Lagrange interpolant.
fn lagrange_derivative_weights(nodes: &[f64], at: usize) -> Vec<f64> {
    let x = nodes[at];
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for j in 0..n {
        let denom: f64 = (0..n).filter(|&i| i != j).map(|i| nodes[j] - nodes[i]).product();
        let numer = if j == at {
            (0..n)
                .filter(|&i| i != j)
                .map(|i| 1.0 / (x - nodes[i]))
                .sum::<f64>()
                * (0..n).filter(|&i| i != j).map(|i| x - nodes[i]).product::<f64>()
        } else {
            (0..n)
                .filter(|&i| i != j && i != at)
                .map(|i| x - nodes[i])
                .product::<f64>()
        };
        w[j] = numer / denom;
    }
    w
}

/// Finite-difference derivatives of `values` on `grid`: five-point centered
/// stencils inside, three-point one-sided at the ends.
pub fn finite_difference(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|i| {
            let (lo, hi) = if n < 3 {
                (0, n)
            } else if i >= 2 && i + 2 < n {
                (i - 2, i + 3)
            } else if i == 0 {
                (0, 3)
            } else if i == n - 1 {
                (n - 3, n)
            } else {
                (i - 1, i + 2)
            };
            let w = lagrange_derivative_weights(&grid[lo..hi], i - lo);
            w.iter().zip(&values[lo..hi]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

impl SampledCurve {
    pub fn new(grid: Vec<f64>, points: Vec<HPoint>) -> Result<Self> {
        if grid.len() != points.len() {
            return Err(Error::InvalidArgument(format!(
                "grid has {} entries but {} points were given",
                grid.len(),
                points.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidArgument("a sampled curve needs at least 2 samples".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("grid must be finite and strictly increasing".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("curve samples must be finite".into()));
        }
        let coord = |k: usize| -> Vec<f64> {
            points.iter().map(|p| <[f64; 3]>::from(*p)[k]).collect()
        };
        let d: Vec<Vec<f64>> = (0..3).map(|k| finite_difference(&grid, &coord(k))).collect();
        let derivs = (0..grid.len()).map(|i| [d[0][i], d[1][i], d[2][i]]).collect();
        Ok(Self { grid, points, derivs })
    }

    /// Samples `t ↦ γ(t)` on `n` uniform points of `[a, b]`.
    pub fn from_fn<F: Fn(f64) -> HPoint>(a: f64, b: f64, n: usize, f: F) -> Result<Self> {
        if n < 2 || !(a < b) {
            return Err(Error::InvalidArgument("need n >= 2 and a < b".into()));
        }
        let grid: Vec<f64> = (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect();
        let points = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, points)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Finite-difference first derivatives at the samples.
    pub fn derivatives(&self) -> &[[f64; 3]] {
        &self.derivs
    }

    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        self.points.iter().map(|p| <[f64; 3]>::from(*p)[k]).collect()
    }

    pub fn translated(&self, p: HPoint) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.points.iter().map(|q| group_mul(p, *q)).collect(),
        )
    }

    /// Largest `|Δh - 2(f_0 g_1 - f_1 g_0)| / Δt` over consecutive samples.
    ///
    /// This chord form of `h' = 2(f'g - fg')` is exact for horizontal
    /// polygonal lifts and insensitive to corners of f and g.
    pub fn chord_horizontality_defect(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.points.windows(2))
            .map(|(t, p)| {
                let area = 2.0 * (p[0].x * p[1].y - p[1].x * p[0].y);
                let dh = p[1].z - p[0].z;
                (dh + area).abs() / (t[1] - t[0])
            })
            .fold(0.0, f64::max)
    }
}

impl CurveDerivatives for SampledCurve {
    fn parameter_domain(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    fn value_and_derivative(&self, t: f64) -> Result<([f64; 3], [f64; 3])> {
        let (lo, hi) = self.parameter_domain();
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain(format!("t = {t} outside [{lo}, {hi}]")));
        }
        let i = self.grid.partition_point(|&g| g <= t).saturating_sub(1);
        if self.grid[i] == t || i + 1 >= self.grid.len() {
            return Ok((self.points[i].into(), self.derivs[i]));
        }
        let s = (t - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
        let p0: [f64; 3] = self.points[i].into();
        let p1: [f64; 3] = self.points[i + 1].into();
        let d0 = self.derivs[i];
        let d1 = self.derivs[i + 1];
        let lerp = |a: [f64; 3], b: [f64; 3]| {
            [
                a[0] + s * (b[0] - a[0]),
                a[1] + s * (b[1] - a[1]),
                a[2] + s * (b[2] - a[2]),
            ]
        };
        Ok((lerp(p0, p1), lerp(d0, d1)))
    }
}

/// `r(t) = h'(t) - 2(f'(t) g(t) - f(t) g'(t))` on `grid`; returns the max |r|
/// and the signed residuals.
pub fn horizontality_residual<C: CurveDerivatives + ?Sized>(
    curve: &C,
    grid: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let mut per_point = Vec::with_capacity(grid.len());
    let mut max = 0.0f64;
    for &t in grid {
        let (v, d) = curve.value_and_derivative(t)?;
        let r = d[2] - 2.0 * (d[0] * v[1] - v[0] * d[1]);
        max = max.max(r.abs());
        per_point.push(r);
    }
    Ok((max, per_point))
}

/// D^k h at a point from the derivative lists `f = [D^0 f, ..]`, `g = [D^0 g, ..]`
/// of a horizontal curve, k ≥ 1.
pub fn leibniz_derivative(f: &[f64], g: &[f64], k: usize) -> f64 {
    debug_assert!(k >= 1);
    let mut binom = 1.0;
    let mut s = 0.0;
    for i in 0..k {
        s += binom * (f[k - i] * g[i] - g[k - i] * f[i]);
        binom = binom * (k - 1 - i) as f64 / (i + 1) as f64;
    }
    2.0 * s
}

/// The vertical jet forced by horizontality: row k ≥ 1 holds
/// `2 Σ_{i<k} C(k-1, i)(F^{k-i} G^i - G^{k-i} F^i)`. Row 0 is left at zero for
/// the caller to fill with H^0.
pub fn leibniz_vertical_jet(f: &ScalarJet, g: &ScalarJet) -> Result<ScalarJet> {
    if f.order() != g.order() || f.sample_set() != g.sample_set() {
        return Err(Error::InvalidArgument(
            "Leibniz jet needs F and G on the same sample set with the same order".into(),
        ));
    }
    let m = f.order();
    let n = f.sample_set().len();
    let mut data = vec![vec![0.0; n]; m + 1];
    for i in 0..n {
        let fc = f.column(i);
        let gc = g.column(i);
        for (k, row) in data.iter_mut().enumerate().skip(1) {
            row[i] = leibniz_derivative(&fc, &gc, k);
        }
    }
    ScalarJet::new(f.sample_set().clone(), m, data)
}
