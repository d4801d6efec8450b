//! Truncated Taylor series arithmetic.
//!
//! A [`Series`] at a point holds `c_k = D^k u / k!` for `k = 0..=n`. Sums,
//! products, quotients and `exp` propagate all derivatives of the smooth
//! step and bump profiles at once.

use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq)]
pub struct Series(pub Vec<f64>);

impl Series {
    pub fn zero(n: usize) -> Self {
        Series(vec![0.0; n + 1])
    }

    pub fn constant(c: f64, n: usize) -> Self {
        let mut s = Self::zero(n);
        s.0[0] = c;
        s
    }

    /// The identity function expanded at `x0`.
    pub fn variable(x0: f64, n: usize) -> Self {
        let mut s = Self::constant(x0, n);
        if n >= 1 {
            s.0[1] = 1.0;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// D^k u at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.0.get(k).copied().unwrap_or(0.0) * fact
    }

    /// All derivatives `D^0 u ..= D^n u`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.0
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 1 {
                    fact *= k as f64;
                }
                c * fact
            })
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Series(self.0.iter().map(|a| a * s).collect())
    }

    pub fn add_const(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.0[0] += c;
        s
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.0.len().min(o.0.len());
        let mut out = vec![0.0; n];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (0..=k).map(|j| self.0[j] * o.0[k - j]).sum();
        }
        Series(out)
    }

    pub fn div(&self, o: &Self) -> Self {
        let n = self.0.len().min(o.0.len());
        let mut q = vec![0.0; n];
        for k in 0..n {
            let s: f64 = (1..=k).map(|j| o.0[j] * q[k - j]).sum();
            q[k] = (self.0[k] - s) / o.0[0];
        }
        Series(q)
    }

    pub fn recip(&self) -> Self {
        Self::constant(1.0, self.order()).div(self)
    }

    pub fn exp(&self) -> Self {
        let n = self.0.len();
        let mut e = vec![0.0; n];
        e[0] = self.0[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.0[j] * e[k - j]).sum();
            e[k] = s / k as f64;
        }
        Series(e)
    }

    /// Derivative as a series of one lower order.
    pub fn differentiate(&self) -> Self {
        if self.0.len() == 1 {
            return Series(vec![0.0]);
        }
        Series(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// Re-expresses `u(s)` with `s = (t - t0) * rate` as a series in t.
    pub fn chain_affine(&self, rate: f64) -> Self {
        let mut r = 1.0;
        Series(
            self.0
                .iter()
                .map(|c| {
                    let v = c * r;
                    r *= rate;
                    v
                })
                .collect(),
        )
    }
}

/// exp(-1/x) below this exponent is treated as exactly zero.
const UNDERFLOW_EXPONENT: f64 = 700.0;

/// σ(s) = exp(-1/s) for s > 0, zero otherwise.
pub fn sigma(s: f64, n: usize) -> Series {
    if s <= 0.0 || 1.0 / s > UNDERFLOW_EXPONENT {
        return Series::zero(n);
    }
    Series::variable(s, n).recip().scale(-1.0).exp()
}

fn sigma_first(s: f64) -> (f64, f64) {
    if s <= 0.0 || 1.0 / s > UNDERFLOW_EXPONENT {
        return (0.0, 0.0);
    }
    let v = (-1.0 / s).exp();
    (v, v / (s * s))
}

/// `(χ(s), χ'(s))`, the first two entries of [`smooth_step`] without series
/// arithmetic.
pub fn smooth_step_first(s: f64) -> (f64, f64) {
    let (l, dl) = sigma_first(s);
    if l == 0.0 {
        return (0.0, 0.0);
    }
    let (r, dr) = sigma_first(1.0 - s);
    if r == 0.0 {
        return (1.0, 0.0);
    }
    let d = l + r;
    (l / d, (dl * r + l * dr) / (d * d))
}

/// `(β(u), β'(u))`, the first two entries of [`bump`].
pub fn bump_first(u: f64) -> (f64, f64) {
    let q = 1.0 - u * u;
    if q <= 0.0 || 1.0 / q > UNDERFLOW_EXPONENT {
        return (0.0, 0.0);
    }
    let v = (-1.0 / q).exp();
    (v, -2.0 * u * v / (q * q))
}

/// Smooth step χ(s) = σ(s) / (σ(s) + σ(1 - s)), flat to all orders at 0 and 1.
pub fn smooth_step(s: f64, n: usize) -> Series {
    let left = sigma(s, n);
    if left.0[0] == 0.0 {
        return Series::zero(n);
    }
    let right = sigma(1.0 - s, n).chain_affine(-1.0);
    if right.0[0] == 0.0 {
        return Series::constant(1.0, n);
    }
    left.div(&left.add(&right))
}

/// Canonical bump β(u) = exp(-1/(1 - u²)) on (-1, 1), zero outside.
pub fn bump(u: f64, n: usize) -> Series {
    let q = 1.0 - u * u;
    if q <= 0.0 || 1.0 / q > UNDERFLOW_EXPONENT {
        return Series::zero(n);
    }
    let v = Series::variable(u, n);
    let one_minus = Series::constant(1.0, n).sub(&v.mul(&v));
    one_minus.recip().scale(-1.0).exp()
}

/// Largest derivative order with a tabulated bump bound.
pub const BUMP_TABLE_ORDER: usize = 12;

/// sup over (-1, 1) of |D^i β| for i = 0..=BUMP_TABLE_ORDER.
///
/// Dense sampling with a 2% safety margin; the profile is analytic and the
/// grid resolves every lobe of the derivatives tabulated here.
pub fn bump_derivative_sups() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let samples = 40_000;
        let mut sups = vec![0.0f64; BUMP_TABLE_ORDER + 1];
        for j in 1..samples {
            let u = -1.0 + 2.0 * j as f64 / samples as f64;
            let d = bump(u, BUMP_TABLE_ORDER).derivatives();
            for (s, v) in sups.iter_mut().zip(d) {
                *s = s.max(v.abs());
            }
        }
        sups.iter().map(|s| s * 1.02).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exp_series_matches_closed_form() {
        // exp(2t) at t = 0.3
        let s = Series::variable(0.3, 5).scale(2.0).exp();
        let d = s.derivatives();
        for (k, v) in d.iter().enumerate() {
            let want = 2f64.powi(k as i32) * 0.6f64.exp();
            assert_abs_diff_eq!(*v, want, epsilon = 1e-12 * want);
        }
    }

    #[test]
    fn quotient_series() {
        // 1/(1 + t) at t = 0.5: D^k = (-1)^k k! / 1.5^{k+1}
        let s = Series::variable(0.5, 4).add_const(1.0).recip();
        for k in 0..=4 {
            let want = (-1f64).powi(k as i32) / 1.5f64.powi(k as i32 + 1);
            assert_abs_diff_eq!(s.0[k], want, epsilon = 1e-14);
        }
    }

    #[test]
    fn smooth_step_endpoints() {
        let z = smooth_step(0.0, 6);
        assert!(z.0.iter().all(|c| *c == 0.0));
        let o = smooth_step(1.0, 6);
        assert_eq!(o.0[0], 1.0);
        assert!(o.0[1..].iter().all(|c| *c == 0.0));
        assert_abs_diff_eq!(smooth_step(0.5, 0).value(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn smooth_step_monotone_and_symmetric() {
        let mut prev = 0.0;
        for j in 1..200 {
            let s = j as f64 / 200.0;
            let v = smooth_step(s, 1);
            assert!(v.value() >= prev);
            assert!(v.0[1] >= 0.0);
            assert_abs_diff_eq!(v.value() + smooth_step(1.0 - s, 0).value(), 1.0, epsilon = 1e-14);
            prev = v.value();
        }
    }

    #[test]
    fn smooth_step_derivative_by_differences() {
        let h = 1e-5;
        for s in [0.1, 0.37, 0.8] {
            let d = smooth_step(s, 2).derivatives();
            let fd = (smooth_step(s + h, 0).value() - smooth_step(s - h, 0).value()) / (2.0 * h);
            assert_abs_diff_eq!(d[1], fd, epsilon = 1e-8);
            let fd2 = (smooth_step(s + h, 1).0[1] - smooth_step(s - h, 1).0[1]) / (2.0 * h);
            assert_abs_diff_eq!(d[2], fd2, epsilon = 1e-6);
        }
    }

    #[test]
    fn bump_profile() {
        assert_abs_diff_eq!(bump(0.0, 0).value(), (-1f64).exp(), epsilon = 1e-15);
        assert!(bump(1.0, 3).0.iter().all(|c| *c == 0.0));
        assert!(bump(-1.2, 3).0.iter().all(|c| *c == 0.0));
        let sups = bump_derivative_sups();
        assert!(sups[0] >= (-1f64).exp());
        assert!(sups[0] < 0.38);
    }
}
