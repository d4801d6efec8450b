//! Moduli of continuity.
//!
//! A modulus is a continuous, nondecreasing, concave function with ω(0) = 0.
//! Concavity makes `t ↦ ω(t)/t` nonincreasing and ω subadditive; both facts
//! are relied on by the velocity functionals and the Lusin estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_DOMAIN_CAP: f64 = 1.0e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModulusKind {
    Power { alpha: f64 },
    Linear,
    #[serde(rename = "table")]
    Tabulated { knots: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModulusRepr {
    #[serde(flatten)]
    kind: ModulusKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain_cap: Option<f64>,
}

/// A validated modulus of continuity on `[0, domain_cap]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModulusRepr", into = "ModulusRepr")]
pub struct ModulusOfContinuity {
    kind: ModulusKind,
    domain_cap: f64,
}

impl TryFrom<ModulusRepr> for ModulusOfContinuity {
    type Error = Error;

    fn try_from(repr: ModulusRepr) -> Result<Self> {
        Self::new(repr.kind, repr.domain_cap.unwrap_or(DEFAULT_DOMAIN_CAP))
    }
}

impl From<ModulusOfContinuity> for ModulusRepr {
    fn from(m: ModulusOfContinuity) -> Self {
        ModulusRepr {
            kind: m.kind,
            domain_cap: Some(m.domain_cap),
        }
    }
}

impl ModulusOfContinuity {
    pub fn new(kind: ModulusKind, domain_cap: f64) -> Result<Self> {
        if !(domain_cap.is_finite() && domain_cap > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "domain cap must be positive and finite, got {domain_cap}"
            )));
        }
        let kind = match kind {
            ModulusKind::Power { alpha } => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "power modulus exponent must lie in (0, 1], got {alpha}"
                    )));
                }
                ModulusKind::Power { alpha }
            }
            ModulusKind::Linear => ModulusKind::Linear,
            ModulusKind::Tabulated { knots } => ModulusKind::Tabulated {
                knots: validate_knots(knots)?,
            },
        };
        Ok(Self { kind, domain_cap })
    }

    /// ω(t) = t.
    pub fn linear() -> Self {
        Self {
            kind: ModulusKind::Linear,
            domain_cap: DEFAULT_DOMAIN_CAP,
        }
    }

    /// ω(t) = t^α with α in (0, 1].
    pub fn power(alpha: f64) -> Result<Self> {
        Self::new(ModulusKind::Power { alpha }, DEFAULT_DOMAIN_CAP)
    }

    /// Piecewise-linear modulus through the given knots. A leading (0, 0) knot
    /// is inserted when missing.
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(ModulusKind::Tabulated { knots }, DEFAULT_DOMAIN_CAP)
    }

    pub fn with_domain_cap(mut self, domain_cap: f64) -> Result<Self> {
        if !(domain_cap.is_finite() && domain_cap > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "domain cap must be positive and finite, got {domain_cap}"
            )));
        }
        self.domain_cap = domain_cap;
        Ok(self)
    }

    pub fn kind(&self) -> &ModulusKind {
        &self.kind
    }

    pub fn domain_cap(&self) -> f64 {
        self.domain_cap
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, ModulusKind::Linear)
    }

    /// ω(t), rejecting arguments outside `[0, domain_cap]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.domain_cap) {
            return Err(Error::Domain(format!(
                "modulus evaluated at {t}, outside [0, {}]",
                self.domain_cap
            )));
        }
        Ok(self.value(t))
    }

    /// ω(t) without the domain check; callers validate ranges up front.
    pub(crate) fn value(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match &self.kind {
            ModulusKind::Linear => t,
            ModulusKind::Power { alpha } => t.powf(*alpha),
            ModulusKind::Tabulated { knots } => eval_table(knots, t),
        }
    }

    pub(crate) fn check_span(&self, span: f64) -> Result<()> {
        if span > self.domain_cap {
            return Err(Error::Domain(format!(
                "data span {span} exceeds modulus domain cap {}",
                self.domain_cap
            )));
        }
        Ok(())
    }
}

fn validate_knots(mut knots: Vec<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
    if knots.is_empty() {
        return Err(Error::InvalidArgument("tabulated modulus needs knots".into()));
    }
    if knots.iter().any(|(t, w)| !t.is_finite() || !w.is_finite()) {
        return Err(Error::InvalidArgument("tabulated modulus knots must be finite".into()));
    }
    if knots[0].0 < 0.0 {
        return Err(Error::InvalidArgument("tabulated modulus knots must be nonnegative".into()));
    }
    if knots[0].0 == 0.0 {
        if knots[0].1 != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tabulated modulus must vanish at 0, got ω(0) = {}",
                knots[0].1
            )));
        }
    } else {
        knots.insert(0, (0.0, 0.0));
    }
    if knots.len() < 2 {
        return Err(Error::InvalidArgument(
            "tabulated modulus needs a knot beyond 0".into(),
        ));
    }
    for w in knots.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::InvalidArgument(format!(
                "tabulated modulus knots must be strictly increasing in t, got {} after {}",
                w[1].0, w[0].0
            )));
        }
        if w[1].1 < w[0].1 {
            return Err(Error::InvalidArgument(format!(
                "tabulated modulus must be nondecreasing: ω({}) = {} < ω({}) = {}",
                w[1].0, w[1].1, w[0].0, w[0].1
            )));
        }
    }
    for w in knots.windows(3) {
        let s0 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let s1 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
        if s1 > s0 * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::InvalidArgument(format!(
                "tabulated modulus is not concave at knots ({}, {}), ({}, {}), ({}, {}): \
                 secant slope rises from {s0} to {s1}",
                w[0].0, w[0].1, w[1].0, w[1].1, w[2].0, w[2].1
            )));
        }
    }
    Ok(knots)
}

fn eval_table(knots: &[(f64, f64)], t: f64) -> f64 {
    let last = knots.len() - 1;
    if t >= knots[last].0 {
        let (t0, w0) = knots[last - 1];
        let (t1, w1) = knots[last];
        let slope = ((w1 - w0) / (t1 - t0)).max(0.0);
        return w1 + slope * (t - t1);
    }
    let idx = knots.partition_point(|(kt, _)| *kt <= t);
    let (t0, w0) = knots[idx - 1];
    let (t1, w1) = knots[idx];
    w0 + (w1 - w0) * (t - t0) / (t1 - t0)
}

/// Largest |v(x) − v(y)| / ω(|x − y|) over all sample pairs.
///
/// When `values` are samples of D^m f this is the finite-sample lower bound
/// for the C^{m,ω} seminorm of f. `_order` is carried for reporting only.
pub fn holder_seminorm(
    values: &[(f64, f64)],
    omega: &ModulusOfContinuity,
    _order: usize,
) -> Result<f64> {
    let mut pts: Vec<(f64, f64)> = values.to_vec();
    if pts.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
        return Err(Error::InvalidArgument("seminorm samples must be finite".into()));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut distinct: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (x, v) in pts {
        match distinct.last() {
            Some(&(px, pv)) if px == x => {
                if pv != v {
                    return Err(Error::InconsistentData(format!(
                        "point {x} carries two different values {pv} and {v}"
                    )));
                }
            }
            _ => distinct.push((x, v)),
        }
    }
    if distinct.len() < 2 {
        return Err(Error::InvalidArgument(
            "seminorm needs at least two distinct points".into(),
        ));
    }
    let span = distinct[distinct.len() - 1].0 - distinct[0].0;
    omega.check_span(span)?;
    let mut best = 0.0f64;
    for i in 0..distinct.len() {
        for j in (i + 1)..distinct.len() {
            let (x, vx) = distinct[i];
            let (y, vy) = distinct[j];
            let ratio = (vx - vy).abs() / omega.value(y - x);
            best = best.max(ratio);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_and_power_values() {
        let lin = ModulusOfContinuity::linear();
        assert_eq!(lin.eval(0.0).unwrap(), 0.0);
        assert_eq!(lin.eval(0.3).unwrap(), 0.3);
        let sq = ModulusOfContinuity::power(0.5).unwrap();
        assert!((sq.eval(0.25).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let lin = ModulusOfContinuity::linear().with_domain_cap(2.0).unwrap();
        assert!(matches!(lin.eval(2.5), Err(Error::Domain(_))));
        assert!(matches!(lin.eval(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn bad_exponent_rejected() {
        assert!(ModulusOfContinuity::power(0.0).is_err());
        assert!(ModulusOfContinuity::power(1.5).is_err());
    }

    #[test]
    fn table_interpolates_and_extends() {
        let w = ModulusOfContinuity::tabulated(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)]).unwrap();
        assert!((w.eval(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((w.eval(1.5).unwrap() - 2.5).abs() < 1e-15);
        // final secant slope 1 continues past the last knot
        assert!((w.eval(4.0).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn table_gets_origin_knot() {
        let w = ModulusOfContinuity::tabulated(vec![(1.0, 1.0), (2.0, 1.5)]).unwrap();
        assert_eq!(w.eval(0.0).unwrap(), 0.0);
        assert!((w.eval(0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nonconcave_table_names_triple() {
        let err = ModulusOfContinuity::tabulated(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 3.0)])
            .unwrap_err()
            .to_string();
        assert!(err.contains("not concave"), "{err}");
        assert!(err.contains("(2, 3)"), "{err}");
    }

    #[test]
    fn decreasing_table_rejected() {
        assert!(ModulusOfContinuity::tabulated(vec![(1.0, 1.0), (2.0, 0.5)]).is_err());
    }

    #[test]
    fn json_forms() {
        let p: ModulusOfContinuity = serde_json::from_str(r#"{"kind":"power","alpha":0.5}"#).unwrap();
        assert_eq!(p.kind(), &ModulusKind::Power { alpha: 0.5 });
        let l: ModulusOfContinuity = serde_json::from_str(r#"{"kind":"linear"}"#).unwrap();
        assert!(l.is_linear());
        let t: ModulusOfContinuity =
            serde_json::from_str(r#"{"kind":"table","knots":[[0,0],[1,1],[2,1.5]]}"#).unwrap();
        assert!((t.eval(1.5).unwrap() - 1.25).abs() < 1e-15);
        let bad = serde_json::from_str::<ModulusOfContinuity>(
            r#"{"kind":"table","knots":[[0,0],[1,1],[2,3]]}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn seminorm_examples() {
        let lin = ModulusOfContinuity::linear();
        // D^1 of x^2/2 is x
        let v = [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)];
        assert!((holder_seminorm(&v, &lin, 1).unwrap() - 1.0).abs() < 1e-15);
        let c = [(0.0, 3.0), (0.2, 3.0), (0.9, 3.0)];
        assert_eq!(holder_seminorm(&c, &lin, 1).unwrap(), 0.0);
    }

    #[test]
    fn seminorm_of_three_halves_power_by_pair_enumeration() {
        // D^1 |x|^{3/2} = 1.5 sign(x) |x|^{1/2}
        let d = |x: f64| 1.5 * x.signum() * x.abs().sqrt();
        let pts = [-1.0, 0.0, 1.0];
        let w = ModulusOfContinuity::power(0.5).unwrap();
        let mut oracle = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let r = (d(pts[i]) - d(pts[j])).abs() / (pts[i] - pts[j]).abs().sqrt();
                    oracle = oracle.max(r);
                }
            }
        }
        // the (-1, 1) pair dominates: 3 / sqrt(2)
        assert!((oracle - 3.0 / 2f64.sqrt()).abs() < 1e-14);
        let samples: Vec<(f64, f64)> = pts.iter().map(|&x| (x, d(x))).collect();
        let got = holder_seminorm(&samples, &w, 1).unwrap();
        assert!((got - oracle).abs() < 1e-14);
    }

    #[test]
    fn seminorm_duplicate_points() {
        let lin = ModulusOfContinuity::linear();
        let bad = [(0.0, 1.0), (0.0, 2.0), (1.0, 0.0)];
        assert!(matches!(
            holder_seminorm(&bad, &lin, 1),
            Err(Error::InconsistentData(_))
        ));
        let ok = [(0.0, 1.0), (0.0, 1.0), (1.0, 0.0)];
        assert_eq!(holder_seminorm(&ok, &lin, 1).unwrap(), 1.0);
        assert!(holder_seminorm(&[(0.0, 1.0)], &lin, 1).is_err());
    }
}
