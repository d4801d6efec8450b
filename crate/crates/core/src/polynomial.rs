//! Univariate polynomials, divided differences and Newton interpolation.
//!
//! Polynomials are stored in powers of `(x - center)`. Taylor polynomials
//! carry their anchor as center and Newton interpolants their first node,
//! which keeps closed-form integrals accurate away from the origin. The
//! monomial expansion is available through [`Polynomial::monomial_coeffs`].

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative node spacing below which quotients of differences are meaningless.
pub const MIN_RELATIVE_SPACING: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
    center: f64,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.center == 0.0 {
            write!(f, "Polynomial({:?})", self.coeffs)
        } else {
            write!(f, "Polynomial({:?} in (x - {}))", self.coeffs, self.center)
        }
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.monomial_coeffs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let coeffs = Vec::<f64>::deserialize(d)?;
        Ok(Polynomial::new(coeffs))
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Polynomial {
    /// Monomial-basis polynomial, ascending degree.
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self::centered(coeffs, 0.0)
    }

    /// Polynomial Σ c_k (x - center)^k.
    pub fn centered(coeffs: Vec<f64>, center: f64) -> Self {
        let mut p = Self { coeffs, center };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self::new(vec![0.0])
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// Coefficients in powers of `(x - center)`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// Coefficients in the plain monomial basis.
    pub fn monomial_coeffs(&self) -> Vec<f64> {
        self.recentered(0.0).coeffs
    }

    /// Evaluates with compensated Horner summation.
    pub fn eval(&self, x: f64) -> f64 {
        let (s, c) = self.eval_compensated(x);
        s + c
    }

    /// Compensated Horner value as an unrounded pair `(s, c)`, value `s + c`.
    /// Differences of nearby polynomials taken on the pairs stay smooth in x.
    pub fn eval_compensated(&self, x: f64) -> (f64, f64) {
        let u = x - self.center;
        let n = self.coeffs.len();
        let mut s = self.coeffs[n - 1];
        let mut c = 0.0;
        for i in (0..n - 1).rev() {
            let (p, pe) = two_prod(s, u);
            let (t, se) = two_sum(p, self.coeffs[i]);
            s = t;
            c = c * u + (pe + se);
        }
        (s, c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::centered(vec![0.0], self.center);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect();
        Self::centered(coeffs, self.center)
    }

    /// Antiderivative vanishing at the center.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / (k + 1) as f64),
        );
        Self::centered(coeffs, self.center)
    }

    /// ∫_a^b P exactly.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let q = self.antiderivative();
        q.eval(b) - q.eval(a)
    }

    /// Same polynomial expressed in powers of `(x - center)`.
    pub fn recentered(&self, center: f64) -> Self {
        if center == self.center {
            return self.clone();
        }
        let d = center - self.center;
        // repeated synthetic division (Taylor shift)
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                c[j] += d * c[j + 1];
            }
        }
        Self::centered(c, center)
    }

    /// Normalized derivatives D^k P(x) / k! for k = 0..=order.
    pub fn taylor_coefficients(&self, x: f64, order: usize) -> Vec<f64> {
        let d = x - self.center;
        let mut c = self.coeffs.clone();
        let n = c.len();
        // first order + 1 passes of the Taylor shift in `recentered`
        if d != 0.0 {
            for i in 0..n.min(order + 1) {
                for j in (i..n - 1).rev() {
                    c[j] += d * c[j + 1];
                }
            }
        }
        c.resize(order + 1, 0.0);
        c
    }

    /// `(P(x), P'(x))` by a double Horner pass.
    pub fn value_and_slope(&self, x: f64) -> (f64, f64) {
        let u = x - self.center;
        let mut p = 0.0;
        let mut dp = 0.0;
        for c in self.coeffs.iter().rev() {
            dp = dp * u + p;
            p = p * u + c;
        }
        (p, dp)
    }

    /// D^k P(x).
    pub fn derivative_at(&self, x: f64, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.taylor_coefficients(x, k)[k] * fact
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::centered(self.coeffs.iter().map(|c| c * s).collect(), self.center)
    }

    pub fn add(&self, other: &Self) -> Self {
        let o = other.recentered(self.center);
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(0.0) + o.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        Self::centered(coeffs, self.center)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let o = other.recentered(self.center);
        let mut coeffs = vec![0.0; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::centered(coeffs, self.center)
    }

    /// Multiplies by `(x - root)`.
    fn mul_linear(&self, root: f64) -> Self {
        let d = root - self.center;
        let mut coeffs = vec![0.0; self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i + 1] += c;
            coeffs[i] -= d * c;
        }
        Self::centered(coeffs, self.center)
    }

    /// Drops every power of `(x - center)` above `degree`.
    pub fn truncated(&self, degree: usize) -> Self {
        let coeffs = self.coeffs.iter().take(degree + 1).copied().collect();
        Self::centered(coeffs, self.center)
    }

    /// Real roots in the open interval (a, b), sorted.
    ///
    /// Roots of P' bracket the monotone pieces of P; each sign change on a
    /// monotone piece is bisected down to width `1e-13 (b - a)`.
    pub fn real_roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        let width = 1e-13 * (b - a);
        self.roots_rec(a, b, width)
    }

    fn roots_rec(&self, a: f64, b: f64, width: f64) -> Vec<f64> {
        if self.is_zero() || self.degree() == 0 || !(a < b) {
            return Vec::new();
        }
        if self.degree() == 1 {
            let r = self.center - self.coeffs[0] / self.coeffs[1];
            return if r > a && r < b { vec![r] } else { Vec::new() };
        }
        let crit = self.derivative().roots_rec(a, b, width);
        let mut breaks = Vec::with_capacity(crit.len() + 2);
        breaks.push(a);
        breaks.extend(crit.iter().copied());
        breaks.push(b);
        let mut roots = Vec::new();
        for (i, w) in breaks.windows(2).enumerate() {
            let (l, r) = (w[0], w[1]);
            let (pl, pr) = (self.eval(l), self.eval(r));
            if i > 0 && pl == 0.0 {
                roots.push(l);
                continue;
            }
            if pl.signum() * pr.signum() < 0.0 {
                roots.push(bisect(self, l, r, pl, width));
            }
        }
        roots.dedup();
        roots
    }

    /// Largest |P| on [a, b] with the point where it is attained.
    pub fn max_abs_on(&self, a: f64, b: f64) -> (f64, f64) {
        let mut best = (self.eval(a).abs(), a);
        let mut consider = |x: f64| {
            let v = self.eval(x).abs();
            if v > best.0 {
                best = (v, x);
            }
        };
        consider(b);
        for c in self.derivative().real_roots_in(a, b) {
            consider(c);
        }
        best
    }
}

fn bisect(p: &Polynomial, mut l: f64, mut r: f64, mut pl: f64, width: f64) -> f64 {
    while r - l > width {
        let mid = 0.5 * (l + r);
        let pm = p.eval(mid);
        if pm == 0.0 {
            return mid;
        }
        if pm.signum() == pl.signum() {
            l = mid;
            pl = pm;
        } else {
            r = mid;
        }
        if mid == l && mid == r {
            break;
        }
    }
    0.5 * (l + r)
}

/// ∫_a^b |P|, integrating the antiderivative exactly between consecutive roots.
///
/// `tol` is the caller's accuracy budget; the computation is exact up to the
/// bisection width of the root isolation, well inside any positive `tol`.
pub fn integral_abs(p: &Polynomial, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "integral_abs needs a < b, got [{a}, {b}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    Ok(integral_abs_unchecked(p, a, b))
}

pub(crate) fn integral_abs_unchecked(p: &Polynomial, a: f64, b: f64) -> f64 {
    if p.is_zero() || !(a < b) {
        return 0.0;
    }
    let q = p.antiderivative();
    let mut pts = vec![a];
    pts.extend(p.real_roots_in(a, b));
    pts.push(b);
    pts.windows(2).map(|w| (q.eval(w[1]) - q.eval(w[0])).abs()).sum()
}

/// Markov's bound on [a, b]: `(2 n^2 / (b - a) * max|P|, max|P|)`.
pub fn markov_derivative_bound(p: &Polynomial, a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "markov bound needs a < b, got [{a}, {b}]"
        )));
    }
    let (max_abs, _) = p.max_abs_on(a, b);
    let n = p.degree() as f64;
    Ok((2.0 * n * n / (b - a) * max_abs, max_abs))
}

/// Strictly increasing interpolation nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct NodeSet {
    points: Vec<f64>,
}

impl TryFrom<Vec<f64>> for NodeSet {
    type Error = Error;
    fn try_from(points: Vec<f64>) -> Result<Self> {
        NodeSet::new(points)
    }
}

impl From<NodeSet> for Vec<f64> {
    fn from(n: NodeSet) -> Self {
        n.points
    }
}

impl NodeSet {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("node set is empty".into()));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("nodes must be finite".into()));
        }
        for w in points.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument(format!(
                    "nodes must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let diam = points[points.len() - 1] - points[0];
        let min_gap = points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if points.len() >= 2 && min_gap < MIN_RELATIVE_SPACING * diam {
            return Err(Error::InvalidArgument(format!(
                "node spacing {min_gap:e} is below {MIN_RELATIVE_SPACING:e} times the diameter {diam}"
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diam(&self) -> f64 {
        self.points[self.points.len() - 1] - self.points[0]
    }

    pub fn contains(&self, x: f64) -> bool {
        self.points.binary_search_by(|p| p.total_cmp(&x)).is_ok()
    }
}

/// Top row of the divided-difference table, `[f[x0], f[x0,x1], ..., f[x0..xk]]`,
/// for distinct nodes in any order.
pub fn divided_difference_row(nodes: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    if nodes.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "{} nodes but {} values",
            nodes.len(),
            values.len()
        )));
    }
    let n = nodes.len();
    let mut col = values.to_vec();
    let mut row = Vec::with_capacity(n);
    if n == 0 {
        return Ok(row);
    }
    row.push(col[0]);
    for level in 1..n {
        for i in 0..n - level {
            let denom = nodes[i + level] - nodes[i];
            if denom == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "repeated node {}",
                    nodes[i]
                )));
            }
            col[i] = (col[i + 1] - col[i]) / denom;
        }
        row.push(col[0]);
    }
    Ok(row)
}

pub fn divided_differences(nodes: &NodeSet, values: &[f64]) -> Result<Vec<f64>> {
    divided_difference_row(nodes.points(), values)
}

/// The unique interpolant of degree ≤ |X| - 1, centered at the first node.
pub fn newton_interpolant(nodes: &NodeSet, values: &[f64]) -> Result<Polynomial> {
    let dd = divided_differences(nodes, values)?;
    let x = nodes.points();
    let center = x[0];
    let k = dd.len() - 1;
    let mut p = Polynomial::centered(vec![dd[k]], center);
    for j in (0..k).rev() {
        p = p.mul_linear(x[j]).add(&Polynomial::centered(vec![dd[j]], center));
    }
    Ok(p)
}

/// Σ F^k(a)/k! (x - a)^k for `jet = [F^0(a), ..., F^m(a)]`.
pub fn taylor_from_jet(jet: &[f64], a: f64) -> Polynomial {
    if jet.is_empty() {
        return Polynomial::centered(vec![0.0], a);
    }
    let mut fact = 1.0;
    let coeffs = jet
        .iter()
        .enumerate()
        .map(|(k, v)| {
            if k > 1 {
                fact *= k as f64;
            }
            v / fact
        })
        .collect();
    Polynomial::centered(coeffs, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn brute_dd(x: &[f64], y: &[f64]) -> f64 {
        if x.len() == 1 {
            return y[0];
        }
        let n = x.len();
        (brute_dd(&x[1..], &y[1..]) - brute_dd(&x[..n - 1], &y[..n - 1])) / (x[n - 1] - x[0])
    }

    #[test]
    fn cubic_divided_differences() {
        let x = NodeSet::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let y: Vec<f64> = x.points().iter().map(|t| t * t * t).collect();
        let dd = divided_differences(&x, &y).unwrap();
        let oracle: Vec<f64> = (1..=4).map(|k| brute_dd(&x.points()[..k], &y[..k])).collect();
        assert_eq!(oracle, vec![0.0, 1.0, 3.0, 1.0]);
        assert_eq!(dd, oracle);
    }

    #[test]
    fn constant_and_identity() {
        let x = NodeSet::new(vec![-1.0, 0.3, 2.0]).unwrap();
        assert_eq!(divided_differences(&x, &[4.0, 4.0, 4.0]).unwrap(), vec![4.0, 0.0, 0.0]);
        let x2 = NodeSet::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(divided_differences(&x2, &[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        assert!(divided_differences(&x2, &[0.0]).is_err());
    }

    #[test]
    fn newton_examples() {
        let x = NodeSet::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let p = newton_interpolant(&x, &[0.0, 1.0, 8.0, 27.0]).unwrap();
        let c = p.monomial_coeffs();
        for (got, want) in c.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-14);
        }
        let one = newton_interpolant(&NodeSet::new(vec![0.0, 1.0]).unwrap(), &[1.0, 1.0]).unwrap();
        assert_eq!(one.degree(), 0);
        assert_eq!(one.eval(7.0), 1.0);
        let sq = newton_interpolant(&NodeSet::new(vec![0.0, 1.0, 2.0]).unwrap(), &[0.0, 1.0, 4.0])
            .unwrap()
            .monomial_coeffs();
        assert_eq!(sq, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn taylor_examples() {
        assert_eq!(taylor_from_jet(&[1.0, 2.0, 4.0], 0.0).monomial_coeffs(), vec![1.0, 2.0, 2.0]);
        let c = taylor_from_jet(&[5.0], 3.0);
        assert_eq!(c.eval(-2.0), 5.0);
        // (x-1) + (x-1)^3 expanded symbolically: x^3 - 3x^2 + 4x - 2
        let p = taylor_from_jet(&[0.0, 1.0, 0.0, 6.0], 1.0).monomial_coeffs();
        assert_eq!(p, vec![-2.0, 4.0, -3.0, 1.0]);
    }

    #[test]
    fn integral_abs_examples() {
        let x = Polynomial::new(vec![0.0, 1.0]);
        assert_abs_diff_eq!(integral_abs(&x, -1.0, 1.0, 1e-12).unwrap(), 1.0, epsilon = 1e-14);
        let one = Polynomial::constant(1.0);
        assert_abs_diff_eq!(integral_abs(&one, 0.0, 2.0, 1e-12).unwrap(), 2.0, epsilon = 1e-14);
        let q = Polynomial::new(vec![-1.0, 0.0, 1.0]);
        assert_abs_diff_eq!(integral_abs(&q, 0.0, 2.0, 1e-12).unwrap(), 2.0, epsilon = 1e-12);
        assert_eq!(integral_abs(&Polynomial::zero(), 0.0, 1.0, 1e-12).unwrap(), 0.0);
        assert!(integral_abs(&q, 1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn integral_abs_double_root() {
        // (x - 1)^2 on [0, 2]: 2/3, no sign change
        let p = Polynomial::new(vec![1.0, -2.0, 1.0]);
        assert_abs_diff_eq!(integral_abs(&p, 0.0, 2.0, 1e-12).unwrap(), 2.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn markov_examples() {
        let x = Polynomial::new(vec![0.0, 1.0]);
        let (bound, max) = markov_derivative_bound(&x, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(bound, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(max, 1.0, epsilon = 1e-15);
        let t2 = Polynomial::new(vec![-1.0, 0.0, 2.0]);
        let (bound, max) = markov_derivative_bound(&t2, -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(max, 1.0, epsilon = 1e-15);
        // 2 n^2 / (b - a) = 4 on [-1, 1], attained by T_2
        assert_abs_diff_eq!(bound, 4.0, epsilon = 1e-14);
        let (dmax, _) = t2.derivative().max_abs_on(-1.0, 1.0);
        assert_abs_diff_eq!(dmax, 4.0, epsilon = 1e-15);
        assert!(dmax <= bound + 1e-14);
        let (b0, _) = markov_derivative_bound(&Polynomial::constant(3.0), 0.0, 1.0).unwrap();
        assert_eq!(b0, 0.0);
    }

    #[test]
    fn recentering_preserves_values() {
        let p = Polynomial::new(vec![1.0, -2.0, 0.5, 3.0]);
        let q = p.recentered(2.5);
        for x in [-1.0, 0.0, 0.7, 2.5, 4.0] {
            assert_abs_diff_eq!(p.eval(x), q.eval(x), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(p.derivative_at(1.0, 2), 1.0 + 18.0, epsilon = 1e-12);
    }

    #[test]
    fn node_set_rules() {
        assert!(NodeSet::new(vec![0.0, 0.0]).is_err());
        assert!(NodeSet::new(vec![1.0, 0.0]).is_err());
        assert!(NodeSet::new(vec![0.0, 1e-14, 1.0]).is_err());
        let n = NodeSet::new(vec![0.0, 0.5, 2.0]).unwrap();
        assert_eq!(n.diam(), 2.0);
        assert!(n.contains(0.5));
    }

    #[test]
    fn roots_of_product() {
        // (x - 0.2)(x - 0.5)(x - 0.9)
        let p = Polynomial::new(vec![1.0])
            .mul_linear(0.2)
            .mul_linear(0.5)
            .mul_linear(0.9);
        let r = p.real_roots_in(0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([0.2, 0.5, 0.9]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn serde_as_coefficient_array() {
        let p = taylor_from_jet(&[1.0, 1.0], 1.0);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[0.0,1.0]");
        let q: Polynomial = serde_json::from_str("[1,0,2]").unwrap();
        assert_eq!(q.eval(2.0), 9.0);
    }
}
