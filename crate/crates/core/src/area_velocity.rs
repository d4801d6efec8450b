//! Area discrepancy, ω-velocity and their discrete (derivative-free) versions.

use std::collections::HashSet;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{group_mul, HPoint, SampledCurve};
use crate::jets::{HorizontalJetTriple, SampleSet, DEFAULT_PAIR_CAP};
use crate::modulus::ModulusOfContinuity;
use crate::polynomial::{integral_abs_unchecked, newton_interpolant, NodeSet, Polynomial};

/// Point values of (f, g, h) on K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ValuesRepr", into = "ValuesRepr")]
pub struct CurveValues {
    k: SampleSet,
    f: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ValuesRepr {
    #[serde(rename = "K")]
    k: SampleSet,
    f: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
}

impl TryFrom<ValuesRepr> for CurveValues {
    type Error = Error;
    fn try_from(r: ValuesRepr) -> Result<Self> {
        CurveValues::new(r.k, r.f, r.g, r.h)
    }
}

impl From<CurveValues> for ValuesRepr {
    fn from(v: CurveValues) -> Self {
        ValuesRepr { k: v.k, f: v.f, g: v.g, h: v.h }
    }
}

impl CurveValues {
    pub fn new(k: SampleSet, f: Vec<f64>, g: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        let n = k.len();
        if f.len() != n || g.len() != n || h.len() != n {
            return Err(Error::InvalidArgument(format!(
                "values need {n} entries per coordinate"
            )));
        }
        if f.iter().chain(&g).chain(&h).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("curve values must be finite".into()));
        }
        Ok(Self { k, f, g, h })
    }

    pub fn from_fn<F: Fn(f64) -> HPoint>(k: &SampleSet, curve: F) -> Self {
        let pts: Vec<HPoint> = k.points().iter().map(|&t| curve(t)).collect();
        Self {
            k: k.clone(),
            f: pts.iter().map(|p| p.x).collect(),
            g: pts.iter().map(|p| p.y).collect(),
            h: pts.iter().map(|p| p.z).collect(),
        }
    }

    pub fn from_triple(t: &HorizontalJetTriple) -> Self {
        Self {
            k: t.sample_set().clone(),
            f: t.f().row(0).to_vec(),
            g: t.g().row(0).to_vec(),
            h: t.h().row(0).to_vec(),
        }
    }

    pub fn from_sampled(c: &SampledCurve) -> Result<Self> {
        Self::new(
            SampleSet::new(c.grid().to_vec())?,
            c.coordinate(0),
            c.coordinate(1),
            c.coordinate(2),
        )
    }

    pub fn sample_set(&self) -> &SampleSet {
        &self.k
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn point(&self, i: usize) -> HPoint {
        HPoint::new(self.f[i], self.g[i], self.h[i])
    }

    pub fn translated(&self, p: HPoint) -> Self {
        let pts: Vec<HPoint> = (0..self.len()).map(|i| group_mul(p, self.point(i))).collect();
        Self {
            k: self.k.clone(),
            f: pts.iter().map(|q| q.x).collect(),
            g: pts.iter().map(|q| q.y).collect(),
            h: pts.iter().map(|q| q.z).collect(),
        }
    }
}

/// `h_b - h_a - 2∫_a^b (P'Q - Q'P) + 2 f_a (g_b - Q(b)) - 2 g_a (f_b - P(b))`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn area_from_polys(
    p: &Polynomial,
    q: &Polynomial,
    a: f64,
    b: f64,
    fa: f64,
    ga: f64,
    fb: f64,
    gb: f64,
    ha: f64,
    hb: f64,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let bracket = p.derivative().mul(q).sub(&q.derivative().mul(p));
    let swept = bracket.integral(a, b);
    (hb - ha) - 2.0 * swept + 2.0 * fa * (gb - q.eval(b)) - 2.0 * ga * (fb - p.eval(b))
}

/// `ω(L)² L^{2m} + ω(L) L^m ∫_a^b (|P'| + |Q'|)`.
pub(crate) fn velocity_from_polys(
    p: &Polynomial,
    q: &Polynomial,
    a: f64,
    b: f64,
    span: f64,
    m: usize,
    omega: &ModulusOfContinuity,
) -> f64 {
    let w = omega.value(span) * span.powi(m as i32);
    let speed = integral_abs_unchecked(&p.derivative(), a, b)
        + integral_abs_unchecked(&q.derivative(), a, b);
    w * w + w * speed
}

pub(crate) fn area_idx(t: &HorizontalJetTriple, ia: usize, ib: usize) -> f64 {
    let pts = t.sample_set().points();
    let (f, g, h) = (t.f(), t.g(), t.h());
    area_from_polys(
        &f.taylor(ia),
        &g.taylor(ia),
        pts[ia],
        pts[ib],
        f.value(0, ia),
        g.value(0, ia),
        f.value(0, ib),
        g.value(0, ib),
        h.value(0, ia),
        h.value(0, ib),
    )
}

pub(crate) fn velocity_idx(
    t: &HorizontalJetTriple,
    omega: &ModulusOfContinuity,
    ia: usize,
    ib: usize,
) -> f64 {
    let pts = t.sample_set().points();
    velocity_from_polys(
        &t.f().taylor(ia),
        &t.g().taylor(ia),
        pts[ia],
        pts[ib],
        pts[ib] - pts[ia],
        t.order(),
        omega,
    )
}

/// Area discrepancy A^m(γ; a, b) of the jet data.
pub fn area_discrepancy(t: &HorizontalJetTriple, a: f64, b: f64) -> Result<f64> {
    let ia = t.sample_set().index_of(a)?;
    let ib = t.sample_set().index_of(b)?;
    Ok(area_idx(t, ia, ib))
}

/// ω-velocity V^m_ω(γ; a, b), a < b.
pub fn omega_velocity(
    t: &HorizontalJetTriple,
    omega: &ModulusOfContinuity,
    a: f64,
    b: f64,
) -> Result<f64> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("velocity needs a < b, got {a}, {b}")));
    }
    let ia = t.sample_set().index_of(a)?;
    let ib = t.sample_set().index_of(b)?;
    omega.check_span(b - a)?;
    Ok(velocity_idx(t, omega, ia, ib))
}

fn check_subset(x: &NodeSet, values: &[HPoint], m: usize, a: f64, b: f64) -> Result<(usize, usize)> {
    if x.len() != m + 1 {
        return Err(Error::InvalidArgument(format!(
            "discrete functionals of order {m} need {} nodes, got {}",
            m + 1,
            x.len()
        )));
    }
    if values.len() != x.len() {
        return Err(Error::InvalidArgument("one value per node required".into()));
    }
    let pos = |t: f64| {
        x.points()
            .iter()
            .position(|&p| p == t)
            .ok_or_else(|| Error::InvalidArgument(format!("{t} is not a node of X")))
    };
    Ok((pos(a)?, pos(b)?))
}

fn interpolants(x: &NodeSet, values: &[HPoint]) -> Result<(Polynomial, Polynomial)> {
    let fv: Vec<f64> = values.iter().map(|p| p.x).collect();
    let gv: Vec<f64> = values.iter().map(|p| p.y).collect();
    Ok((newton_interpolant(x, &fv)?, newton_interpolant(x, &gv)?))
}

/// Discrete area discrepancy A[X, γ; a, b] with Newton interpolants on X.
pub fn discrete_area(x: &NodeSet, values: &[HPoint], m: usize, a: f64, b: f64) -> Result<f64> {
    let (ia, ib) = check_subset(x, values, m, a, b)?;
    let (p, q) = interpolants(x, values)?;
    let (va, vb) = (values[ia], values[ib]);
    Ok(area_from_polys(&p, &q, a, b, va.x, va.y, vb.x, vb.y, va.z, vb.z))
}

/// Discrete ω-velocity V_ω[X, γ; a, b], using diam X as the scale.
pub fn discrete_velocity(
    x: &NodeSet,
    values: &[HPoint],
    omega: &ModulusOfContinuity,
    m: usize,
    a: f64,
    b: f64,
) -> Result<f64> {
    check_subset(x, values, m, a, b)?;
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("velocity needs a < b, got {a}, {b}")));
    }
    omega.check_span(x.diam())?;
    let (p, q) = interpolants(x, values)?;
    Ok(velocity_from_polys(&p, &q, a, b, x.diam(), m, omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AVWitness {
    /// The subset X for discrete scans.
    pub subset: Option<Vec<f64>>,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AVScanReport {
    pub mode: ScanMode,
    pub order: usize,
    pub max_ratio: f64,
    pub witness: Option<AVWitness>,
    /// Per dyadic scale: (largest gap in the bin, largest ratio in the bin).
    pub ratios_by_scale: Vec<(f64, f64)>,
    pub pairs_scanned: usize,
    pub subsets_scanned: usize,
    pub exhaustive: bool,
}

impl AVScanReport {
    /// CSV of the (gap, ratio) series.
    pub fn scale_csv(&self) -> String {
        let mut s = String::from("gap,ratio\n");
        for (g, r) in &self.ratios_by_scale {
            s.push_str(&format!("{g:.16e},{r:.16e}\n"));
        }
        s
    }
}

fn bin_by_scale(samples: &[(f64, f64)], diam: f64) -> Vec<(f64, f64)> {
    let mut bins: Vec<Option<(f64, f64)>> = Vec::new();
    for &(gap, r) in samples {
        let j = ((diam / gap).log2().floor().max(0.0)) as usize;
        if bins.len() <= j {
            bins.resize(j + 1, None);
        }
        let e = bins[j].get_or_insert((gap, r));
        e.0 = e.0.max(gap);
        e.1 = e.1.max(r);
    }
    bins.into_iter().flatten().collect()
}

fn ratio(a: f64, v: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a.abs() / v
    }
}

/// max over a < b in K of |A^m(γ; a, b)| / V^m_ω(γ; a, b).
pub fn av_ratio_scan(t: &HorizontalJetTriple, omega: &ModulusOfContinuity) -> Result<AVScanReport> {
    let n = t.sample_set().len();
    if n > DEFAULT_PAIR_CAP {
        return Err(Error::InvalidArgument(format!(
            "sample set has {n} points, above the pair-scan cap {DEFAULT_PAIR_CAP}"
        )));
    }
    let (lo, hi) = t.sample_set().hull();
    omega.check_span(hi - lo)?;
    let pts = t.sample_set().points();
    let pairs: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
    let ratios: Vec<f64> = pairs
        .par_iter()
        .map(|&(a, b)| ratio(area_idx(t, a, b), velocity_idx(t, omega, a, b)))
        .collect();
    let mut best: Option<usize> = None;
    for (i, r) in ratios.iter().enumerate() {
        if best.map_or(*r > 0.0, |b| *r > ratios[b]) {
            best = Some(i);
        }
    }
    let samples: Vec<(f64, f64)> = pairs
        .iter()
        .zip(&ratios)
        .map(|(&(a, b), &r)| (pts[b] - pts[a], r))
        .collect();
    Ok(AVScanReport {
        mode: ScanMode::Continuous,
        order: t.order(),
        max_ratio: best.map_or(0.0, |i| ratios[i]),
        witness: best.map(|i| AVWitness { subset: None, a: pts[pairs[i].0], b: pts[pairs[i].1] }),
        ratios_by_scale: bin_by_scale(&samples, hi - lo),
        pairs_scanned: pairs.len(),
        subsets_scanned: 0,
        exhaustive: true,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Index subsets of size `size` to scan: all of them when the count fits the
/// budget, otherwise each pair plus its `size - 2` nearest neighbours.
pub(crate) fn subset_family(pts: &[f64], size: usize, budget: usize) -> (Vec<Vec<usize>>, bool) {
    let n = pts.len();
    if binomial(n, size) <= budget as f64 {
        return ((0..n).combinations(size).collect(), true);
    }
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut family = Vec::new();
    for (i, j) in (0..n).tuple_combinations() {
        let mut extra: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
        let dist = |k: usize| (pts[k] - pts[i]).abs().min((pts[k] - pts[j]).abs());
        extra.sort_by(|&x, &y| dist(x).total_cmp(&dist(y)).then(x.cmp(&y)));
        let mut x: Vec<usize> = extra.into_iter().take(size - 2).chain([i, j]).collect();
        x.sort_unstable();
        if seen.insert(x.clone()) {
            family.push(x);
        }
    }
    family.sort();
    (family, false)
}

/// One scanned subset: largest ratio over its pairs and where.
#[derive(Clone)]
pub(crate) struct SubsetScan {
    pub ratio: f64,
    pub a: usize,
    pub b: usize,
    pub pairs: usize,
    pub samples: Vec<(f64, f64)>,
}

/// Scans every pair a < b of the index subset `x` of `vals`.
pub(crate) fn scan_subset(
    vals: &CurveValues,
    x: &[usize],
    m: usize,
    omega: &ModulusOfContinuity,
) -> Result<SubsetScan> {
    let pts = vals.sample_set().points();
    let nodes = NodeSet::new(x.iter().map(|&i| pts[i]).collect())?;
    let fv: Vec<f64> = x.iter().map(|&i| vals.f[i]).collect();
    let gv: Vec<f64> = x.iter().map(|&i| vals.g[i]).collect();
    let p = newton_interpolant(&nodes, &fv)?;
    let q = newton_interpolant(&nodes, &gv)?;
    let diam = nodes.diam();
    let mut out = SubsetScan { ratio: 0.0, a: x[0], b: x[0], pairs: 0, samples: Vec::new() };
    for (&ia, &ib) in x.iter().tuple_combinations() {
        let area = area_from_polys(
            &p, &q, pts[ia], pts[ib], vals.f[ia], vals.g[ia], vals.f[ib], vals.g[ib],
            vals.h[ia], vals.h[ib],
        );
        let v = velocity_from_polys(&p, &q, pts[ia], pts[ib], diam, m, omega);
        let r = ratio(area, v);
        out.pairs += 1;
        out.samples.push((diam, r));
        if r > out.ratio {
            out.ratio = r;
            out.a = ia;
            out.b = ib;
        }
    }
    Ok(out)
}

/// max over scanned X ⊆ K with |X| = m+1 and a < b in X of |A[X]| / V[X].
pub fn discrete_av_scan(
    vals: &CurveValues,
    m: usize,
    omega: &ModulusOfContinuity,
    subset_budget: usize,
) -> Result<AVScanReport> {
    if subset_budget == 0 {
        return Err(Error::InvalidArgument("subset budget must be positive".into()));
    }
    if m < 1 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    let n = vals.len();
    if n < m + 1 {
        return Err(Error::InvalidArgument(format!(
            "discrete scan of order {m} needs at least {} points, got {n}",
            m + 1
        )));
    }
    let (lo, hi) = vals.sample_set().hull();
    omega.check_span(hi - lo)?;
    let pts = vals.sample_set().points();
    let (family, exhaustive) = subset_family(pts, m + 1, subset_budget);
    let scans: Vec<SubsetScan> = family
        .par_iter()
        .map(|x| scan_subset(vals, x, m, omega))
        .collect::<Result<_>>()?;
    let mut best: Option<usize> = None;
    for (i, s) in scans.iter().enumerate() {
        if best.map_or(s.ratio > 0.0, |b| s.ratio > scans[b].ratio) {
            best = Some(i);
        }
    }
    let samples: Vec<(f64, f64)> = scans.iter().flat_map(|s| s.samples.iter().copied()).collect();
    Ok(AVScanReport {
        mode: ScanMode::Discrete,
        order: m,
        max_ratio: best.map_or(0.0, |i| scans[i].ratio),
        witness: best.map(|i| AVWitness {
            subset: Some(family[i].iter().map(|&k| pts[k]).collect()),
            a: pts[scans[i].a],
            b: pts[scans[i].b],
        }),
        ratios_by_scale: bin_by_scale(&samples, hi - lo),
        pairs_scanned: scans.iter().map(|s| s.pairs).sum(),
        subsets_scanned: family.len(),
        exhaustive,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMode {
    Continuous,
    Discrete { budget: usize },
}

/// Largest |A(p*γ) - A(γ)| and |V(p*γ) - V(γ)| over all pairs (continuous)
/// or all scanned subsets and pairs (discrete).
pub fn left_invariance_audit(
    t: &HorizontalJetTriple,
    omega: &ModulusOfContinuity,
    p: HPoint,
    mode: AuditMode,
) -> Result<f64> {
    let moved = t.translated(p);
    let n = t.sample_set().len();
    let pts = t.sample_set().points();
    match mode {
        AuditMode::Continuous => {
            let dev = (0..n)
                .tuple_combinations()
                .map(|(a, b)| {
                    let da = (area_idx(t, a, b) - area_idx(&moved, a, b)).abs();
                    let dv = (velocity_idx(t, omega, a, b) - velocity_idx(&moved, omega, a, b)).abs();
                    da.max(dv)
                })
                .fold(0.0, f64::max);
            Ok(dev)
        }
        AuditMode::Discrete { budget } => {
            let m = t.order();
            if budget == 0 {
                return Err(Error::InvalidArgument("subset budget must be positive".into()));
            }
            let vals = CurveValues::from_triple(t);
            let moved_vals = vals.translated(p);
            let (family, _) = subset_family(pts, m + 1, budget);
            let mut dev = 0.0f64;
            for x in family {
                let nodes = NodeSet::new(x.iter().map(|&i| pts[i]).collect())?;
                let v0: Vec<HPoint> = x.iter().map(|&i| vals.point(i)).collect();
                let v1: Vec<HPoint> = x.iter().map(|&i| moved_vals.point(i)).collect();
                for (&ia, &ib) in x.iter().tuple_combinations() {
                    let (a, b) = (pts[ia], pts[ib]);
                    let da = discrete_area(&nodes, &v0, m, a, b)? - discrete_area(&nodes, &v1, m, a, b)?;
                    let dv = discrete_velocity(&nodes, &v0, omega, m, a, b)?
                        - discrete_velocity(&nodes, &v1, omega, m, a, b)?;
                    dev = dev.max(da.abs()).max(dv.abs());
                }
            }
            Ok(dev)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::ScalarJet;
    use approx::assert_abs_diff_eq;

    fn cubic_lift(k: &SampleSet, m: usize) -> HorizontalJetTriple {
        HorizontalJetTriple::from_derivatives(k, m, |c, o, t| match (c, o) {
            (0, 0) => t,
            (0, 1) => 1.0,
            (1, 0) => t * t,
            (1, 1) => 2.0 * t,
            (1, 2) => 2.0,
            (2, 0) => -2.0 / 3.0 * t.powi(3),
            (2, 1) => -2.0 * t * t,
            (2, 2) => -4.0 * t,
            (2, 3) => -4.0,
            _ => 0.0,
        })
        .unwrap()
    }

    fn vertical(k: &SampleSet, m: usize) -> HorizontalJetTriple {
        HorizontalJetTriple::from_derivatives(k, m, |c, o, t| if c == 2 && o == 0 { t } else { 0.0 })
            .unwrap()
    }

    /// Symbolic oracle for the cubic lift: every remainder vanishes, so A = 0
    /// reduces to h(b) - h(a) = 2∫(f'g - fg') = -(2/3)(b³ - a³).
    #[test]
    fn cubic_lift_area_vanishes() {
        let k = SampleSet::uniform(0.0, 1.0, 5).unwrap();
        let t = cubic_lift(&k, 2);
        for &a in k.points() {
            for &b in k.points() {
                let oracle = (-2.0 / 3.0) * (b.powi(3) - a.powi(3)) - 2.0 * (-(b.powi(3) - a.powi(3)) / 3.0);
                assert_abs_diff_eq!(oracle, 0.0, epsilon = 1e-15);
                assert_abs_diff_eq!(area_discrepancy(&t, a, b).unwrap(), 0.0, epsilon = 1e-14);
            }
        }
        assert_eq!(area_discrepancy(&t, 0.25, 0.25).unwrap(), 0.0);
    }

    #[test]
    fn vertical_area_is_increment() {
        let k = SampleSet::new(vec![0.0, 1.0]).unwrap();
        let t = vertical(&k, 1);
        assert_eq!(area_discrepancy(&t, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn velocity_examples() {
        let k = SampleSet::new(vec![0.0, 1.0]).unwrap();
        let lin = ModulusOfContinuity::linear();
        let line = HorizontalJetTriple::from_derivatives(&k, 1, |c, o, t| match (c, o) {
            (0, 0) => t,
            (0, 1) => 1.0,
            _ => 0.0,
        })
        .unwrap();
        assert_abs_diff_eq!(omega_velocity(&line, &lin, 0.0, 1.0).unwrap(), 2.0, epsilon = 1e-15);
        let k2 = SampleSet::new(vec![0.0, 0.5]).unwrap();
        let zero = vertical(&k2, 2);
        assert_abs_diff_eq!(omega_velocity(&zero, &lin, 0.0, 0.5).unwrap(), 0.5f64.powi(6), epsilon = 1e-18);
        let sq = HorizontalJetTriple::from_derivatives(&k, 2, |c, o, t| match (c, o) {
            (0, 0) => t * t,
            (0, 1) => 2.0 * t,
            (0, 2) => 2.0,
            _ => 0.0,
        })
        .unwrap();
        assert_abs_diff_eq!(omega_velocity(&sq, &lin, 0.0, 1.0).unwrap(), 2.0, epsilon = 1e-14);
        assert!(omega_velocity(&sq, &lin, 1.0, 0.0).is_err());
    }

    #[test]
    fn discrete_examples() {
        let lin = ModulusOfContinuity::linear();
        let x = NodeSet::new(vec![0.0, 0.4, 1.0]).unwrap();
        let cubic: Vec<HPoint> = x
            .points()
            .iter()
            .map(|&t| HPoint::new(t, t * t, -2.0 / 3.0 * t.powi(3)))
            .collect();
        for (a, b) in [(0.0, 1.0), (0.0, 0.4), (0.4, 1.0)] {
            assert!(discrete_area(&x, &cubic, 2, a, b).unwrap().abs() < 1e-10);
        }
        assert_eq!(discrete_area(&x, &cubic, 2, 0.4, 0.4).unwrap(), 0.0);
        let x3 = NodeSet::new(vec![0.0, 0.5, 1.0]).unwrap();
        let vert: Vec<HPoint> = x3.points().iter().map(|&t| HPoint::new(0.0, 0.0, t)).collect();
        assert_eq!(discrete_area(&x3, &vert, 2, 0.0, 1.0).unwrap(), 1.0);
        assert!(discrete_area(&x3, &vert, 1, 0.0, 1.0).is_err());

        let x2 = NodeSet::new(vec![0.0, 1.0]).unwrap();
        let line = [HPoint::new(0.0, 0.0, 0.0), HPoint::new(1.0, 0.0, 0.0)];
        assert_abs_diff_eq!(discrete_velocity(&x2, &line, &lin, 1, 0.0, 1.0).unwrap(), 2.0, epsilon = 1e-15);
        let zero = [HPoint::origin(); 3];
        assert_abs_diff_eq!(discrete_velocity(&x3, &zero, &lin, 2, 0.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        let sq: Vec<HPoint> = x3.points().iter().map(|&t| HPoint::new(t * t, 0.0, 0.0)).collect();
        assert_abs_diff_eq!(discrete_velocity(&x3, &sq, &lin, 2, 0.0, 1.0).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn scans() {
        let lin = ModulusOfContinuity::linear();
        let k = SampleSet::uniform(0.0, 1.0, 8).unwrap();
        let t = cubic_lift(&k, 2);
        assert!(av_ratio_scan(&t, &lin).unwrap().max_ratio < 1e-10);
        let d = discrete_av_scan(&CurveValues::from_triple(&t), 2, &lin, 1000).unwrap();
        assert!(d.max_ratio < 1e-8);

        let k12 = SampleSet::uniform(0.0, 1.0, 12).unwrap();
        let v = vertical(&k12, 1);
        let r = av_ratio_scan(&v, &lin).unwrap();
        let delta: f64 = 1.0 / 11.0;
        assert_abs_diff_eq!(r.max_ratio, delta.powi(-3), epsilon = 1e-6 * delta.powi(-3));
        let w = r.witness.unwrap();
        assert_abs_diff_eq!(w.b - w.a, delta, epsilon = 1e-12);
        let dv = discrete_av_scan(&CurveValues::from_triple(&v), 1, &lin, 1000).unwrap();
        assert_abs_diff_eq!(dv.max_ratio, r.max_ratio, epsilon = 1e-6 * r.max_ratio);

        let k2 = SampleSet::new(vec![0.0, 1.0]).unwrap();
        let one = vertical(&k2, 1);
        let r = av_ratio_scan(&one, &lin).unwrap();
        let want = area_discrepancy(&one, 0.0, 1.0).unwrap() / omega_velocity(&one, &lin, 0.0, 1.0).unwrap();
        assert_eq!(r.max_ratio, want);

        let k3 = SampleSet::uniform(0.0, 1.0, 3).unwrap();
        let d = discrete_av_scan(&CurveValues::from_triple(&cubic_lift(&k3, 2)), 2, &lin, 5).unwrap();
        assert_eq!(d.subsets_scanned, 1);
        assert!(d.exhaustive);
        assert!(discrete_av_scan(&CurveValues::from_triple(&t), 2, &lin, 0).is_err());
    }

    #[test]
    fn neighbour_family_when_budget_is_small() {
        let lin = ModulusOfContinuity::linear();
        let k = SampleSet::uniform(0.0, 1.0, 10).unwrap();
        let t = vertical(&k, 2);
        let vals = CurveValues::from_triple(&t);
        let small = discrete_av_scan(&vals, 2, &lin, 10).unwrap();
        let full = discrete_av_scan(&vals, 2, &lin, 1000).unwrap();
        assert!(!small.exhaustive && full.exhaustive);
        assert!(small.subsets_scanned < full.subsets_scanned);
        assert!(small.max_ratio <= full.max_ratio);
    }

    #[test]
    fn left_invariance() {
        let lin = ModulusOfContinuity::linear();
        let k = SampleSet::uniform(0.0, 1.0, 6).unwrap();
        let t = cubic_lift(&k, 2);
        assert_eq!(left_invariance_audit(&t, &lin, HPoint::origin(), AuditMode::Continuous).unwrap(), 0.0);
        let p = HPoint::new(1.0, 2.0, 3.0);
        assert!(left_invariance_audit(&t, &lin, p, AuditMode::Continuous).unwrap() < 1e-9);
        assert!(left_invariance_audit(&t, &lin, p, AuditMode::Discrete { budget: 100 }).unwrap() < 1e-9);
        let v = vertical(&k, 1);
        let p = HPoint::new(5.0, 5.0, 0.0);
        assert!(left_invariance_audit(&v, &lin, p, AuditMode::Continuous).unwrap() < 1e-9);
        assert!(left_invariance_audit(&v, &lin, p, AuditMode::Discrete { budget: 100 }).unwrap() < 1e-9);
    }

    #[test]
    fn area_at_same_point_is_zero_for_random_jets() {
        let k = SampleSet::uniform(-1.0, 2.0, 4).unwrap();
        let j = |s: f64| ScalarJet::from_fn(&k, 2, |o, x| (s * x + o as f64).sin()).unwrap();
        let t = HorizontalJetTriple::new(j(1.0), j(2.0), j(3.0)).unwrap();
        for &a in k.points() {
            assert_eq!(area_discrepancy(&t, a, a).unwrap(), 0.0);
        }
    }
}
