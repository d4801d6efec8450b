//! Jets on finite sample sets and Whitney-field validation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{leibniz_derivative, HPoint};
use crate::modulus::ModulusOfContinuity;
use crate::polynomial::{taylor_from_jet, Polynomial};

/// Default cap on |K| for quadratic pair scans.
pub const DEFAULT_PAIR_CAP: usize = 4096;

/// A finite, strictly increasing stand-in for the compact set K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SampleSet {
    points: Vec<f64>,
}

impl TryFrom<Vec<f64>> for SampleSet {
    type Error = Error;
    fn try_from(points: Vec<f64>) -> Result<Self> {
        SampleSet::new(points)
    }
}

impl From<SampleSet> for Vec<f64> {
    fn from(s: SampleSet) -> Self {
        s.points
    }
}

impl SampleSet {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a sample set needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("sample points must be finite".into()));
        }
        if let Some(w) = points.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(format!(
                "sample points must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self { points })
    }

    /// `n` equally spaced points of `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("need at least 2 points".into()));
        }
        Self::new(
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        b
                    } else {
                        a + (b - a) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        )
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

    pub fn hull(&self) -> (f64, f64) {
        (self.points[0], self.points[self.points.len() - 1])
    }

    pub fn index_of(&self, x: f64) -> Result<usize> {
        self.points
            .binary_search_by(|p| p.total_cmp(&x))
            .map_err(|_| Error::InvalidArgument(format!("point {x} is not in the sample set")))
    }
}

/// A jet `(F^k)_{k=0..m}` sampled on K; `data[k][i] = F^k(K[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScalarJetRepr", into = "ScalarJetRepr")]
pub struct ScalarJet {
    k: SampleSet,
    m: usize,
    data: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ScalarJetRepr {
    #[serde(rename = "K")]
    k: SampleSet,
    m: usize,
    #[serde(rename = "F")]
    data: Vec<Vec<f64>>,
}

impl TryFrom<ScalarJetRepr> for ScalarJet {
    type Error = Error;
    fn try_from(r: ScalarJetRepr) -> Result<Self> {
        ScalarJet::new(r.k, r.m, r.data)
    }
}

impl From<ScalarJet> for ScalarJetRepr {
    fn from(j: ScalarJet) -> Self {
        ScalarJetRepr { k: j.k, m: j.m, data: j.data }
    }
}

impl ScalarJet {
    pub fn new(k: SampleSet, m: usize, data: Vec<Vec<f64>>) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidArgument("jet order must be at least 1".into()));
        }
        if data.len() != m + 1 {
            return Err(Error::InvalidArgument(format!(
                "order {m} jet needs {} rows, got {}",
                m + 1,
                data.len()
            )));
        }
        for (r, row) in data.iter().enumerate() {
            if row.len() != k.len() {
                return Err(Error::InvalidArgument(format!(
                    "jet row {r} has {} entries for {} sample points",
                    row.len(),
                    k.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("jet row {r} has non-finite entries")));
            }
        }
        Ok(Self { k, m, data })
    }

    /// Jet of `f` from its derivative oracle `d(k, x) = D^k f(x)`.
    pub fn from_fn<D: Fn(usize, f64) -> f64>(k: &SampleSet, m: usize, d: D) -> Result<Self> {
        let data = (0..=m)
            .map(|order| k.points().iter().map(|&x| d(order, x)).collect())
            .collect();
        Self::new(k.clone(), m, data)
    }

    /// Exact derivative jet of a polynomial.
    pub fn from_polynomial(k: &SampleSet, m: usize, p: &Polynomial) -> Result<Self> {
        Self::from_fn(k, m, |order, x| p.derivative_at(x, order))
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn sample_set(&self) -> &SampleSet {
        &self.k
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.data
    }

    pub fn value(&self, k: usize, i: usize) -> f64 {
        self.data[k][i]
    }

    /// `[F^0(K[i]), ..., F^m(K[i])]`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.data.iter().map(|row| row[i]).collect()
    }

    pub fn taylor(&self, i: usize) -> Polynomial {
        taylor_from_jet(&self.column(i), self.k.points()[i])
    }

    /// The same data forgetting orders above `m`.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m > self.m {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate an order {} jet to order {m}",
                self.m
            )));
        }
        Self::new(self.k.clone(), m, self.data[..=m].to_vec())
    }

    /// Replaces row 0.
    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.k.len() {
            return Err(Error::InvalidArgument("value row length mismatch".into()));
        }
        self.data[0] = values;
        Self::new(self.k, self.m, self.data)
    }

    /// Adds `c` times `other` row by row.
    pub(crate) fn add_scaled(&self, other: &Self, c: f64) -> Self {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + c * y).collect())
            .collect();
        Self { k: self.k.clone(), m: self.m, data }
    }

    pub(crate) fn restricted(&self, keep: &[usize]) -> Result<Self> {
        let k = SampleSet::new(keep.iter().map(|&i| self.k.points()[i]).collect())?;
        let data = self
            .data
            .iter()
            .map(|row| keep.iter().map(|&i| row[i]).collect())
            .collect();
        Self::new(k, self.m, data)
    }
}

/// Jets (F, G, H) of a prospective horizontal curve sharing K and m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TripleRepr", into = "TripleRepr")]
pub struct HorizontalJetTriple {
    f: ScalarJet,
    g: ScalarJet,
    h: ScalarJet,
}

#[derive(Serialize, Deserialize)]
struct TripleRepr {
    #[serde(rename = "K")]
    k: SampleSet,
    m: usize,
    #[serde(rename = "F")]
    f: Vec<Vec<f64>>,
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    #[serde(rename = "H")]
    h: Vec<Vec<f64>>,
}

impl TryFrom<TripleRepr> for HorizontalJetTriple {
    type Error = Error;
    fn try_from(r: TripleRepr) -> Result<Self> {
        HorizontalJetTriple::new(
            ScalarJet::new(r.k.clone(), r.m, r.f)?,
            ScalarJet::new(r.k.clone(), r.m, r.g)?,
            ScalarJet::new(r.k, r.m, r.h)?,
        )
    }
}

impl From<HorizontalJetTriple> for TripleRepr {
    fn from(t: HorizontalJetTriple) -> Self {
        TripleRepr {
            k: t.f.k,
            m: t.f.m,
            f: t.f.data,
            g: t.g.data,
            h: t.h.data,
        }
    }
}

/// Result of the Leibniz consistency check (condition (2)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeibnizDefect {
    /// max |H^k - Leibniz_k| / (1 + |Leibniz_k|).
    pub max_relative: f64,
    pub witness_point: f64,
    pub witness_order: usize,
}

impl HorizontalJetTriple {
    pub fn new(f: ScalarJet, g: ScalarJet, h: ScalarJet) -> Result<Self> {
        if f.m != g.m || f.m != h.m {
            return Err(Error::InvalidArgument(format!(
                "jet orders differ: F {}, G {}, H {}",
                f.m, g.m, h.m
            )));
        }
        if f.k != g.k || f.k != h.k {
            return Err(Error::InvalidArgument("F, G, H must share the sample set".into()));
        }
        Ok(Self { f, g, h })
    }

    /// Builds H from H^0 and the Leibniz expansion of F, G.
    pub fn horizontal_from(f: ScalarJet, g: ScalarJet, h0: Vec<f64>) -> Result<Self> {
        let h = crate::heisenberg::leibniz_vertical_jet(&f, &g)?.with_values(h0)?;
        Self::new(f, g, h)
    }

    /// Exact jets of a curve given derivative oracles for each coordinate.
    pub fn from_derivatives<D: Fn(usize, usize, f64) -> f64>(
        k: &SampleSet,
        m: usize,
        d: D,
    ) -> Result<Self> {
        Self::new(
            ScalarJet::from_fn(k, m, |o, x| d(0, o, x))?,
            ScalarJet::from_fn(k, m, |o, x| d(1, o, x))?,
            ScalarJet::from_fn(k, m, |o, x| d(2, o, x))?,
        )
    }

    pub fn f(&self) -> &ScalarJet {
        &self.f
    }

    pub fn g(&self) -> &ScalarJet {
        &self.g
    }

    pub fn h(&self) -> &ScalarJet {
        &self.h
    }

    pub fn order(&self) -> usize {
        self.f.m
    }

    pub fn sample_set(&self) -> &SampleSet {
        &self.f.k
    }

    pub fn coordinates(&self) -> [&ScalarJet; 3] {
        [&self.f, &self.g, &self.h]
    }

    pub fn truncated(&self, m: usize) -> Result<Self> {
        Self::new(self.f.truncated(m)?, self.g.truncated(m)?, self.h.truncated(m)?)
    }

    pub fn restricted(&self, keep: &[usize]) -> Result<Self> {
        Self::new(
            self.f.restricted(keep)?,
            self.g.restricted(keep)?,
            self.h.restricted(keep)?,
        )
    }

    /// The curve values `(F^0, G^0, H^0)` at K[i].
    pub fn point(&self, i: usize) -> HPoint {
        HPoint::new(self.f.data[0][i], self.g.data[0][i], self.h.data[0][i])
    }

    /// Jets of the left translate `p * γ`.
    pub fn translated(&self, p: HPoint) -> Self {
        let mut f = self.f.clone();
        let mut g = self.g.clone();
        for v in &mut f.data[0] {
            *v += p.x;
        }
        for v in &mut g.data[0] {
            *v += p.y;
        }
        let mut h = self.h.add_scaled(&self.f, 2.0 * p.y).add_scaled(&self.g, -2.0 * p.x);
        for v in &mut h.data[0] {
            *v += p.z;
        }
        Self { f, g, h }
    }

    /// Largest relative deviation of H^k (k ≥ 1) from the Leibniz expansion.
    pub fn leibniz_defect(&self) -> LeibnizDefect {
        let mut best = LeibnizDefect {
            max_relative: 0.0,
            witness_point: self.sample_set().points()[0],
            witness_order: 1,
        };
        for i in 0..self.sample_set().len() {
            let fc = self.f.column(i);
            let gc = self.g.column(i);
            for k in 1..=self.order() {
                let want = leibniz_derivative(&fc, &gc, k);
                let rel = (self.h.data[k][i] - want).abs() / (1.0 + want.abs());
                if rel > best.max_relative {
                    best = LeibnizDefect {
                        max_relative: rel,
                        witness_point: self.sample_set().points()[i],
                        witness_order: k,
                    };
                }
            }
        }
        best
    }
}

pub(crate) fn remainder_idx(f: &ScalarJet, ia: usize, ix: usize, k: usize) -> f64 {
    let pts = f.k.points();
    let d = pts[ix] - pts[ia];
    let mut sum = 0.0;
    let mut term = 1.0;
    for l in 0..=(f.m - k) {
        if l > 0 {
            term *= d / l as f64;
        }
        sum += f.data[k + l][ia] * term;
    }
    f.data[k][ix] - sum
}

/// `(R_a^m F)^k(x) = F^k(x) - Σ_{ℓ ≤ m-k} F^{k+ℓ}(a)(x - a)^ℓ / ℓ!`.
pub fn remainder(f: &ScalarJet, a: f64, x: f64, k: usize) -> Result<f64> {
    if k > f.m {
        return Err(Error::InvalidArgument(format!(
            "remainder order {k} exceeds jet order {}",
            f.m
        )));
    }
    let ia = f.k.index_of(a)?;
    let ix = f.k.index_of(x)?;
    Ok(remainder_idx(f, ia, ix, k))
}

/// Verdict on the finite-data trend of the normalized remainders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayTrend {
    /// Identically zero or shrinking toward small scales.
    Decaying,
    /// Flat or growing toward small scales.
    NonDecaying,
    /// Fewer than two populated scales with nonzero remainders.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayBin {
    /// Largest gap |b - a| falling in the dyadic bin.
    pub scale: f64,
    /// max_k |R^k| / |b - a|^{m-k} over pairs in the bin.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub bins: Vec<DecayBin>,
    pub trend: DecayTrend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitneyFieldReport {
    pub order: usize,
    pub best_constant: f64,
    /// `(a, b, k)` attaining the best constant.
    pub worst_witness: Option<(f64, f64, usize)>,
    pub decay_profile: DecayProfile,
    pub pairs_scanned: usize,
}

#[derive(Clone, Copy)]
struct PairStat {
    ratio: f64,
    normalized: f64,
    ia: usize,
    ib: usize,
    k: usize,
}

fn pair_stat(f: &ScalarJet, omega: &ModulusOfContinuity, ia: usize, ib: usize) -> PairStat {
    let pts = f.k.points();
    let gap = (pts[ib] - pts[ia]).abs();
    let w = omega.value(gap);
    let mut best = PairStat { ratio: 0.0, normalized: 0.0, ia, ib, k: 0 };
    for k in 0..=f.m {
        let scale = gap.powi((f.m - k) as i32);
        let r = remainder_idx(f, ia, ib, k).abs();
        let ratio = r / (w * scale);
        let normalized = r / scale;
        if ratio > best.ratio {
            best.ratio = ratio;
            best.k = k;
        }
        best.normalized = best.normalized.max(normalized);
    }
    best
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::InvalidArgument(format!(
            "sample set has {n} points, above the pair-scan cap {cap}"
        )));
    }
    Ok(())
}

fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect()
}

fn build_profile(stats: &[(f64, f64)], diam: f64) -> DecayProfile {
    // stats: (gap, normalized remainder)
    let mut bins: Vec<Option<DecayBin>> = Vec::new();
    for &(gap, v) in stats {
        let j = ((diam / gap).log2().floor().max(0.0)) as usize;
        if bins.len() <= j {
            bins.resize(j + 1, None);
        }
        let slot = bins[j].get_or_insert(DecayBin { scale: gap, value: v });
        slot.scale = slot.scale.max(gap);
        slot.value = slot.value.max(v);
    }
    let bins: Vec<DecayBin> = bins.into_iter().flatten().collect();
    let trend = decay_trend(&bins);
    DecayProfile { bins, trend }
}

fn decay_trend(bins: &[DecayBin]) -> DecayTrend {
    if bins.iter().all(|b| b.value == 0.0) && !bins.is_empty() {
        return DecayTrend::Decaying;
    }
    let pts: Vec<(f64, f64)> = bins
        .iter()
        .filter(|b| b.value > 0.0)
        .map(|b| (b.scale.ln(), b.value.ln()))
        .collect();
    if pts.len() < 2 {
        return DecayTrend::Inconclusive;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if slope > 0.25 {
        DecayTrend::Decaying
    } else {
        DecayTrend::NonDecaying
    }
}

/// Smallest C with |R_a^m F^k(b)| ≤ C ω(|b-a|) |b-a|^{m-k} over all pairs and k.
pub fn validate_cmw(f: &ScalarJet, omega: &ModulusOfContinuity) -> Result<WhitneyFieldReport> {
    validate_cmw_with_cap(f, omega, DEFAULT_PAIR_CAP)
}

pub fn validate_cmw_with_cap(
    f: &ScalarJet,
    omega: &ModulusOfContinuity,
    cap: usize,
) -> Result<WhitneyFieldReport> {
    let n = f.k.len();
    check_cap(n, cap)?;
    let (lo, hi) = f.k.hull();
    omega.check_span(hi - lo)?;
    let pairs = ordered_pairs(n);
    let stats: Vec<PairStat> = pairs
        .par_iter()
        .map(|&(a, b)| pair_stat(f, omega, a, b))
        .collect();
    let mut best: Option<PairStat> = None;
    for s in &stats {
        // exact comparisons; ties keep the earliest pair in scan order
        if best.map_or(s.ratio > 0.0, |b| s.ratio > b.ratio) {
            best = Some(*s);
        }
    }
    let pts = f.k.points();
    let profile_stats: Vec<(f64, f64)> = stats
        .iter()
        .map(|s| ((pts[s.ib] - pts[s.ia]).abs(), s.normalized))
        .collect();
    Ok(WhitneyFieldReport {
        order: f.m,
        best_constant: best.map_or(0.0, |b| b.ratio),
        worst_witness: best.map(|b| (pts[b.ia], pts[b.ib], b.k)),
        decay_profile: build_profile(&profile_stats, hi - lo),
        pairs_scanned: pairs.len(),
    })
}

/// Dyadic-scale profile of `max_k |R^k| / |b-a|^{m-k}`.
pub fn cm_decay_diagnostic(f: &ScalarJet) -> Result<DecayProfile> {
    let n = f.k.len();
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "decay diagnostic needs at least 4 points, got {n}"
        )));
    }
    check_cap(n, DEFAULT_PAIR_CAP)?;
    let linear = ModulusOfContinuity::linear();
    let pts = f.k.points();
    let stats: Vec<(f64, f64)> = ordered_pairs(n)
        .par_iter()
        .map(|&(a, b)| ((pts[b] - pts[a]).abs(), pair_stat(f, &linear, a, b).normalized))
        .collect();
    let (lo, hi) = f.k.hull();
    Ok(build_profile(&stats, hi - lo))
}
