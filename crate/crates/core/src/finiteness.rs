//! (m+2)-point finiteness check and the discrete/continuous A/V audit.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::area_velocity::{
    av_ratio_scan, discrete_av_scan, scan_subset, subset_family, AVScanReport, CurveValues,
};
use crate::error::{Error, Result};
use crate::jets::HorizontalJetTriple;
use crate::modulus::ModulusOfContinuity;
use crate::polynomial::{divided_difference_row, NodeSet};

/// Name of the off-X candidate used for Γ_X.
pub const SURROGATE: &str =
    "Newton interpolants of f, g on X; seminorm (m+1)! |f[X]| diam / w(diam); \
     discrete A/V on every (m+1)-subset of X";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    SeminormF,
    SeminormG,
    AvRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub subset: Vec<f64>,
    pub quantity: Quantity,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitenessReport {
    pub order: usize,
    pub m_estimate: f64,
    /// The maximizing subset for each quantity.
    pub witnesses: Vec<Witness>,
    pub subsets_scanned: usize,
    pub exhaustive: bool,
    /// (diam X, largest quantity on X) per scanned subset.
    pub by_diameter: Vec<(f64, f64)>,
    pub surrogate: String,
}

impl FinitenessReport {
    pub fn diameter_csv(&self) -> String {
        let mut s = String::from("diameter,quantity\n");
        for (d, q) in &self.by_diameter {
            s.push_str(&format!("{d:.16e},{q:.16e}\n"));
        }
        s
    }

    pub fn witness(&self, q: Quantity) -> Option<&Witness> {
        self.witnesses.iter().find(|w| w.quantity == q)
    }
}

struct SubsetValues {
    seminorm: [f64; 2],
    av: f64,
    diam: f64,
}

fn scan_x(vals: &CurveValues, x: &[usize], m: usize, omega: &ModulusOfContinuity) -> Result<SubsetValues> {
    let pts = vals.sample_set().points();
    let nodes: Vec<f64> = x.iter().map(|&i| pts[i]).collect();
    let diam = NodeSet::new(nodes.clone())?.diam();
    let weight = (1..=m + 1).map(|k| k as f64).product::<f64>() * diam / omega.value(diam);
    let mut seminorm = [0.0; 2];
    for (c, coord) in [vals.f(), vals.g()].into_iter().enumerate() {
        let v: Vec<f64> = x.iter().map(|&i| coord[i]).collect();
        let top = *divided_difference_row(&nodes, &v)?.last().expect("nonempty row");
        seminorm[c] = weight * top.abs();
    }
    let mut av = 0.0f64;
    for y in x.iter().copied().combinations(m + 1) {
        av = av.max(scan_subset(vals, &y, m, omega)?.ratio);
    }
    Ok(SubsetValues { seminorm, av, diam })
}

/// Bounds the extension constant from every scanned (m+2)-point subset of K.
pub fn finiteness_check(
    vals: &CurveValues,
    m: usize,
    omega: &ModulusOfContinuity,
    subset_budget: usize,
) -> Result<FinitenessReport> {
    if m < 1 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    if subset_budget == 0 {
        return Err(Error::InvalidArgument("subset budget must be positive".into()));
    }
    let n = vals.len();
    if n < m + 2 {
        return Err(Error::InvalidArgument(format!(
            "finiteness check of order {m} needs at least {} points, got {n}",
            m + 2
        )));
    }
    let (lo, hi) = vals.sample_set().hull();
    omega.check_span(hi - lo)?;
    let pts = vals.sample_set().points();
    let (family, exhaustive) = subset_family(pts, m + 2, subset_budget);
    let scans: Vec<SubsetValues> = family
        .par_iter()
        .map(|x| scan_x(vals, x, m, omega))
        .collect::<Result<_>>()?;

    // family is sorted, so the first maximizer is the lexicographically smallest X
    let mut witnesses = Vec::new();
    let mut m_estimate = 0.0f64;
    for q in [Quantity::SeminormF, Quantity::SeminormG, Quantity::AvRatio] {
        let get = |s: &SubsetValues| match q {
            Quantity::SeminormF => s.seminorm[0],
            Quantity::SeminormG => s.seminorm[1],
            Quantity::AvRatio => s.av,
        };
        let mut best = 0;
        for (i, s) in scans.iter().enumerate() {
            if get(s) > get(&scans[best]) {
                best = i;
            }
        }
        let value = get(&scans[best]);
        m_estimate = m_estimate.max(value);
        witnesses.push(Witness {
            subset: family[best].iter().map(|&i| pts[i]).collect(),
            quantity: q,
            value,
        });
    }
    witnesses.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.quantity.cmp(&b.quantity)));
    let by_diameter = scans
        .iter()
        .map(|s| (s.diam, s.seminorm[0].max(s.seminorm[1]).max(s.av)))
        .collect();
    Ok(FinitenessReport {
        order: m,
        m_estimate,
        witnesses,
        subsets_scanned: family.len(),
        exhaustive,
        by_diameter,
        surrogate: SURROGATE.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub continuous: AVScanReport,
    pub discrete: AVScanReport,
    pub ratio_of_constants: f64,
}

/// Constants below this are treated as zero when comparing.
pub const CONSTANT_FLOOR: f64 = 1e-8;

/// Runs the Taylor-based and the interpolation-based A/V scans on the same
/// data and compares their constants.
pub fn equivalence_audit(
    t: &HorizontalJetTriple,
    omega: &ModulusOfContinuity,
    subset_budget: usize,
) -> Result<EquivalenceReport> {
    let continuous = av_ratio_scan(t, omega)?;
    let discrete = discrete_av_scan(&CurveValues::from_triple(t), t.order(), omega, subset_budget)?;
    let c = continuous.max_ratio.max(CONSTANT_FLOOR);
    let d = discrete.max_ratio.max(CONSTANT_FLOOR);
    Ok(EquivalenceReport { continuous, discrete, ratio_of_constants: (c / d).max(d / c) })
}
