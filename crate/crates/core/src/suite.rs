//! Bundled analytic test curves and defect curves.

use serde::{Deserialize, Serialize};

use crate::area_velocity::CurveValues;
use crate::error::{Error, Result};
use crate::heisenberg::{HPoint, SampledCurve};
use crate::jets::{HorizontalJetTriple, SampleSet};
use crate::polynomial::Polynomial;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fixture {
    /// `(cos t, sin t, -2t)`.
    CircleLift,
    /// `(t, t², -2t³/3)`.
    CubicLift,
    /// `(p, q, 2∫(p'q - pq'))` with `h(center) = 0`.
    PolynomialLift { f: Polynomial, g: Polynomial },
    /// `(0, 0, t)`: vertical, not horizontal.
    VerticalLine,
    /// `(t, 0, t)`: not horizontal.
    TiltedLine,
    /// `(|t - 1/2|, t², h)` with h integrated from the samples; horizontal
    /// with a corner in f at 1/2.
    Corner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCurve {
    pub name: String,
    pub domain: (f64, f64),
    pub horizontal: bool,
    pub fixture: Fixture,
}

fn lift_of(f: &Polynomial, g: &Polynomial) -> Polynomial {
    f.derivative().mul(g).sub(&f.mul(&g.derivative())).antiderivative().scale(2.0)
}

impl NamedCurve {
    pub fn new(name: &str, fixture: Fixture) -> Self {
        let horizontal = !matches!(fixture, Fixture::VerticalLine | Fixture::TiltedLine);
        Self { name: name.to_string(), domain: (0.0, 1.0), horizontal, fixture }
    }

    /// Whether exact derivatives of every order are available.
    pub fn is_analytic(&self) -> bool {
        !matches!(self.fixture, Fixture::Corner)
    }

    /// D^order of coordinate `c` at t.
    pub fn derivative(&self, c: usize, order: usize, t: f64) -> Result<f64> {
        use std::f64::consts::FRAC_PI_2;
        let shift = order as f64 * FRAC_PI_2;
        let v = match (&self.fixture, c, order) {
            (Fixture::CircleLift, 0, _) => (t + shift).cos(),
            (Fixture::CircleLift, 1, _) => (t + shift).sin(),
            (Fixture::CircleLift, _, 0) => -2.0 * t,
            (Fixture::CircleLift, _, 1) => -2.0,
            (Fixture::CircleLift, _, _) => 0.0,
            (Fixture::CubicLift, 0, _) => Polynomial::new(vec![0.0, 1.0]).derivative_at(t, order),
            (Fixture::CubicLift, 1, _) => Polynomial::new(vec![0.0, 0.0, 1.0]).derivative_at(t, order),
            (Fixture::CubicLift, _, _) => {
                Polynomial::new(vec![0.0, 0.0, 0.0, -2.0 / 3.0]).derivative_at(t, order)
            }
            (Fixture::PolynomialLift { f, .. }, 0, _) => f.derivative_at(t, order),
            (Fixture::PolynomialLift { g, .. }, 1, _) => g.derivative_at(t, order),
            (Fixture::PolynomialLift { f, g }, _, _) => lift_of(f, g).derivative_at(t, order),
            (Fixture::VerticalLine, 2, 0) | (Fixture::TiltedLine, 0 | 2, 0) => t,
            (Fixture::VerticalLine, 2, 1) | (Fixture::TiltedLine, 0 | 2, 1) => 1.0,
            (Fixture::VerticalLine | Fixture::TiltedLine, _, _) => 0.0,
            (Fixture::Corner, _, _) => {
                return Err(Error::InvalidArgument(format!(
                    "{} has no closed-form derivatives",
                    self.name
                )))
            }
        };
        Ok(v)
    }

    /// Exact jets of order m on K.
    pub fn jets(&self, k: &SampleSet, m: usize) -> Result<HorizontalJetTriple> {
        if !self.is_analytic() {
            return Err(Error::InvalidArgument(format!("{} has no closed-form jets", self.name)));
        }
        HorizontalJetTriple::from_derivatives(k, m, |c, o, x| {
            self.derivative(c, o, x).unwrap_or(f64::NAN)
        })
    }

    /// Dense samples on `n` uniform points of the domain.
    pub fn sampled(&self, n: usize) -> Result<SampledCurve> {
        let (a, b) = self.domain;
        if let Fixture::Corner = self.fixture {
            let grid: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
            let f: Vec<f64> = grid.iter().map(|t| (t - 0.5).abs()).collect();
            let g: Vec<f64> = grid.iter().map(|t| t * t).collect();
            // chord rule for h' = 2(f'g - fg'), exact on the polygonal lift
            let mut h = vec![0.0; n];
            for i in 1..n {
                h[i] = h[i - 1] + 2.0 * (f[i] * g[i - 1] - f[i - 1] * g[i]);
            }
            let pts = (0..n).map(|i| HPoint::new(f[i], g[i], h[i])).collect();
            return SampledCurve::new(grid, pts);
        }
        SampledCurve::from_fn(a, b, n, |t| {
            HPoint::new(
                self.derivative(0, 0, t).unwrap_or(f64::NAN),
                self.derivative(1, 0, t).unwrap_or(f64::NAN),
                self.derivative(2, 0, t).unwrap_or(f64::NAN),
            )
        })
    }

    /// Values on K.
    pub fn values(&self, k: &SampleSet) -> Result<CurveValues> {
        if self.is_analytic() {
            return Ok(CurveValues::from_fn(k, |t| {
                HPoint::new(
                    self.derivative(0, 0, t).unwrap_or(f64::NAN),
                    self.derivative(1, 0, t).unwrap_or(f64::NAN),
                    self.derivative(2, 0, t).unwrap_or(f64::NAN),
                )
            }));
        }
        Err(Error::InvalidArgument(format!("{} is only available as samples", self.name)))
    }
}

/// Horizontal polynomial lifts with f, g of degree up to 3 (h up to 6).
pub fn polynomial_lifts() -> Vec<NamedCurve> {
    let lift = |name: &str, f: Vec<f64>, g: Vec<f64>| {
        NamedCurve::new(name, Fixture::PolynomialLift { f: Polynomial::new(f), g: Polynomial::new(g) })
    };
    vec![
        lift("poly_lift_2", vec![0.5, 1.0], vec![0.0, 0.0, 1.0]),
        lift("poly_lift_4", vec![0.0, 1.0, -0.5], vec![1.0, 0.0, 0.75]),
        lift("poly_lift_5", vec![0.2, -1.0, 0.0, 0.5], vec![0.0, 1.0, 1.0]),
        lift("poly_lift_6", vec![1.0, 0.5, -1.0, 0.7], vec![-0.3, 1.0, 0.4, -0.6]),
    ]
}

/// Smooth horizontal curves with closed-form jets.
pub fn smooth_suite() -> Vec<NamedCurve> {
    let mut v = vec![
        NamedCurve::new("circle_lift", Fixture::CircleLift),
        NamedCurve::new("cubic_lift", Fixture::CubicLift),
    ];
    v.extend(polynomial_lifts());
    v
}

/// Curves that violate horizontality or smoothness.
pub fn defect_suite() -> Vec<NamedCurve> {
    vec![
        NamedCurve::new("vertical_line", Fixture::VerticalLine),
        NamedCurve::new("tilted_line", Fixture::TiltedLine),
        NamedCurve::new("corner", Fixture::Corner),
    ]
}

pub fn all() -> Vec<NamedCurve> {
    let mut v = smooth_suite();
    v.extend(defect_suite());
    v
}

pub fn by_name(name: &str) -> Option<NamedCurve> {
    all().into_iter().find(|c| c.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_suite_is_horizontal() {
        for c in smooth_suite() {
            let k = SampleSet::uniform(0.0, 1.0, 7).unwrap();
            let t = c.jets(&k, 4).unwrap();
            assert!(t.leibniz_defect().max_relative < 1e-12, "{}", c.name);
        }
    }

    #[test]
    fn defects_are_not_horizontal() {
        let k = SampleSet::uniform(0.0, 1.0, 7).unwrap();
        for name in ["vertical_line", "tilted_line"] {
            let t = by_name(name).unwrap().jets(&k, 1).unwrap();
            assert!(t.leibniz_defect().max_relative > 0.1);
        }
    }

    #[test]
    fn corner_samples_are_chord_horizontal() {
        let c = by_name("corner").unwrap().sampled(1025).unwrap();
        assert!(c.chord_horizontality_defect() < 1e-12);
        assert!(by_name("corner").unwrap().jets(&SampleSet::uniform(0.0, 1.0, 3).unwrap(), 1).is_err());
    }
}
