//! Lusin approximation of densely sampled horizontal curves.
//!
//! Local polynomial fits of f' and g' on a grid of cells give L^{1,ω}
//! estimates; their antiderivatives and the bracket give jets of f, g and h.
//! Cells with uniform parameters form the compact set K on which the
//! extension engine is run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Condition, ConditionFailure, Error, Result};
use crate::extension::{extend_cinfty, extend_horizontal, ExtensionOptions, PiecewiseSmoothCurve};
use crate::heisenberg::SampledCurve;
use crate::jets::{remainder_idx, HorizontalJetTriple, SampleSet, ScalarJet};
use crate::modulus::ModulusOfContinuity;
use crate::polynomial::Polynomial;

/// How the local polynomials are obtained.
pub const FIT_METHOD: &str = "weighted least squares on B(x, rho_min), trapezoid weights";

/// Fewest samples accepted inside the smallest ball.
const MIN_SAMPLES_PER_BALL: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1wEstimate {
    pub x: f64,
    pub m: usize,
    /// Coefficients of P in powers of (y - x).
    pub coefficients: Vec<f64>,
    pub c_local: f64,
    pub rho_used: f64,
    /// `(ρ, ⨍_{B(x,ρ)} |u - P| / (ω(ρ) ρ^m))` per radius.
    pub ratios: Vec<(f64, f64)>,
}

impl L1wEstimate {
    pub fn polynomial(&self) -> Polynomial {
        Polynomial::centered(self.coefficients.clone(), self.x)
    }

    /// Largest ratio over radii below `cap`, always including the fit radius.
    pub fn constant_below(&self, cap: f64) -> f64 {
        self.ratios
            .iter()
            .filter(|(r, _)| *r < cap || *r == self.rho_used)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    }

    /// D^k P(x) for k = 0..=m.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        (0..=self.m)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                fact * self.coefficients.get(k).copied().unwrap_or(0.0)
            })
            .collect()
    }
}

/// Index range of samples in [lo, hi].
fn window(grid: &[f64], lo: f64, hi: f64) -> (usize, usize) {
    let slack = 1e-12 * (hi - lo).abs().max(1e-300);
    let i = grid.partition_point(|&y| y < lo - slack);
    let j = grid.partition_point(|&y| y <= hi + slack);
    (i, j)
}

/// `⨍ |u - P|` over the samples in `[x - ρ, x + ρ]` by the trapezoid rule.
fn mean_abs_residual(grid: &[f64], values: &[f64], p: &Polynomial, x: f64, rho: f64) -> f64 {
    let (i, j) = window(grid, x - rho, x + rho);
    if j - i < 2 {
        return f64::NAN;
    }
    let r: Vec<f64> = (i..j).map(|k| (values[k] - p.eval(grid[k])).abs()).collect();
    let mut s = 0.0;
    for k in 1..r.len() {
        s += 0.5 * (r[k] + r[k - 1]) * (grid[i + k] - grid[i + k - 1]);
    }
    s / (grid[j - 1] - grid[i])
}

fn ratios_for(
    grid: &[f64],
    values: &[f64],
    p: &Polynomial,
    x: f64,
    m: usize,
    omega: &ModulusOfContinuity,
    rho_grid: &[f64],
) -> Vec<(f64, f64)> {
    rho_grid
        .iter()
        .map(|&rho| {
            let avg = mean_abs_residual(grid, values, p, x, rho);
            (rho, avg / (omega.value(rho) * rho.powi(m as i32)))
        })
        .collect()
}

/// Solves the small dense system `a x = b` by Gaussian elimination with
/// partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty");
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::Numerical("singular least-squares system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// Weighted least-squares polynomial of degree m on `[x - ρ, x + ρ]`.
fn fit(grid: &[f64], values: &[f64], x: f64, m: usize, rho: f64) -> Result<Vec<f64>> {
    let (i, j) = window(grid, x - rho, x + rho);
    let n = m + 1;
    let mut ata = vec![vec![0.0; n]; n];
    let mut atb = vec![0.0; n];
    for k in i..j {
        let left = if k > i { grid[k] - grid[k - 1] } else { 0.0 };
        let right = if k + 1 < j { grid[k + 1] - grid[k] } else { 0.0 };
        let w = 0.5 * (left + right);
        let s = (grid[k] - x) / rho;
        let mut pw = vec![1.0; n];
        for d in 1..n {
            pw[d] = pw[d - 1] * s;
        }
        for r in 0..n {
            atb[r] += w * pw[r] * values[k];
            for c in 0..n {
                ata[r][c] += w * pw[r] * pw[c];
            }
        }
    }
    let c = solve(ata, atb)?;
    Ok(c.iter().enumerate().map(|(d, v)| v / rho.powi(d as i32)).collect())
}

/// L^{1,ω} estimate of order m at x from samples of u.
///
/// P is fitted on the smallest ball; the constant is the largest normalized
/// L¹ residual over `rho_grid`.
pub fn l1w_estimate(
    grid: &[f64],
    values: &[f64],
    x: f64,
    m: usize,
    omega: &ModulusOfContinuity,
    rho_grid: &[f64],
) -> Result<L1wEstimate> {
    if grid.len() != values.len() || grid.len() < 2 {
        return Err(Error::InvalidArgument("need matching grid and values, at least 2".into()));
    }
    if rho_grid.is_empty() || rho_grid.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    let rho_max = rho_grid.iter().copied().fold(0.0, f64::max);
    let rho_min = rho_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let (a, b) = (grid[0], grid[grid.len() - 1]);
    let slack = 1e-12 * (b - a);
    if x - rho_max < a - slack || x + rho_max > b + slack {
        return Err(Error::Domain(format!(
            "B({x}, {rho_max}) is not inside the sampled interval [{a}, {b}]"
        )));
    }
    let (i, j) = window(grid, x - rho_min, x + rho_min);
    if j - i < MIN_SAMPLES_PER_BALL + 1 || j - i < m + 2 {
        return Err(Error::Resolution(format!(
            "only {} samples in B({x}, {rho_min}); need at least {}",
            j - i,
            (MIN_SAMPLES_PER_BALL + 1).max(m + 2)
        )));
    }
    let coefficients = fit(grid, values, x, m, rho_min)?;
    let p = Polynomial::centered(coefficients.clone(), x);
    let ratios = ratios_for(grid, values, &p, x, m, omega, rho_grid);
    let c_local = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(L1wEstimate { x, m, coefficients, c_local, rho_used: rho_min, ratios })
}

/// Order-m estimate of f from an order-(m-1) estimate of f' and f(x).
pub fn integrate_l1w(derivative: &L1wEstimate, fx: f64) -> L1wEstimate {
    let mut coefficients = vec![fx];
    coefficients.extend(derivative.coefficients.iter().enumerate().map(|(k, c)| c / (k + 1) as f64));
    L1wEstimate {
        x: derivative.x,
        m: derivative.m + 1,
        coefficients,
        c_local: 2.0 * derivative.c_local,
        rho_used: derivative.rho_used,
        ratios: derivative.ratios.iter().map(|&(r, v)| (r, 2.0 * v)).collect(),
    }
}

/// Order-(m-1) estimate of h' = 2(f'g - fg') from order-m estimates of f, g:
/// `R = 2(P'Q - Q'P)` truncated to degree m - 1.
///
/// The constant is propagated as `2 (C_f + C_g) (1 + max |D^{0,1} P, Q|(x))`.
pub fn vertical_l1w(f: &L1wEstimate, g: &L1wEstimate) -> Result<L1wEstimate> {
    if f.x != g.x || f.m != g.m {
        return Err(Error::InvalidArgument("estimates must share x and m".into()));
    }
    if f.m == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    let p = f.polynomial();
    let q = g.polynomial();
    let r = p.derivative().mul(&q).sub(&q.derivative().mul(&p)).scale(2.0).recentered(f.x);
    let mut coefficients: Vec<f64> = r.coeffs().iter().copied().take(f.m).collect();
    coefficients.resize(f.m, 0.0);
    let size = [p.eval(f.x), q.eval(f.x), p.derivative_at(f.x, 1), q.derivative_at(f.x, 1)]
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = 2.0 * (1.0 + size);
    let ratios = f
        .ratios
        .iter()
        .zip(&g.ratios)
        .map(|(&(r, a), &(_, b))| (r, scale * (a + b)))
        .collect();
    Ok(L1wEstimate {
        x: f.x,
        m: f.m - 1,
        coefficients,
        c_local: scale * (f.c_local + g.c_local),
        rho_used: f.rho_used,
        ratios,
    })
}

/// Estimates attached to one grid cell. An empty list marks a cell whose
/// smallest ball leaves the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellEstimate {
    pub x: f64,
    pub components: Vec<L1wEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformParameterReport {
    pub n: usize,
    /// Indices of the cells in A_N.
    pub a_n: Vec<usize>,
    pub c: f64,
    pub rho0: f64,
    pub discarded_measure: f64,
    /// Cells outside A_N because B(x, 1/N) leaves the domain.
    pub margin_cells: Vec<usize>,
    /// Cells outside A_N because a constant exceeds N.
    pub irregular_cells: Vec<usize>,
}

fn in_margin(x: f64, domain: (f64, f64), n: usize) -> bool {
    let r = 1.0 / n as f64;
    x - r > domain.0 && x + r < domain.1
}

/// A_N: cells with B(x, 1/N) inside the domain whose constants over radii
/// below 1/N (and the fit radius) are at most N.
pub fn admissible_cells(cells: &[CellEstimate], domain: (f64, f64), n: usize) -> Vec<usize> {
    let cap = 1.0 / n as f64;
    cells
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            !c.components.is_empty()
                && in_margin(c.x, domain, n)
                && c.components.iter().all(|e| e.constant_below(cap) <= n as f64)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Smallest N in the schedule whose A_N discards less than `target`.
pub fn uniform_parameter_set(
    cells: &[CellEstimate],
    domain: (f64, f64),
    cell_width: f64,
    schedule: &[usize],
    target: f64,
) -> Result<UniformParameterReport> {
    let mut best = f64::INFINITY;
    for &n in schedule {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be positive".into()));
        }
        let a_n = admissible_cells(cells, domain, n);
        let discarded = (cells.len() - a_n.len()) as f64 * cell_width;
        best = best.min(discarded);
        if discarded < target {
            let mut margin_cells = Vec::new();
            let mut irregular_cells = Vec::new();
            let mut next = a_n.iter().peekable();
            for (i, c) in cells.iter().enumerate() {
                if next.peek() == Some(&&i) {
                    next.next();
                } else if c.components.is_empty() || !in_margin(c.x, domain, n) {
                    margin_cells.push(i);
                } else {
                    irregular_cells.push(i);
                }
            }
            return Ok(UniformParameterReport {
                n,
                a_n,
                c: n as f64,
                rho0: 1.0 / n as f64,
                discarded_measure: discarded,
                margin_cells,
                irregular_cells,
            });
        }
    }
    Err(Error::Coverage { achieved: best, target })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LusinOptions {
    pub cells: usize,
    /// Largest radius, in cell widths.
    pub rho0_cells: f64,
    pub rho_levels: usize,
    pub n_max: usize,
    /// Accepted chord horizontality defect of the samples.
    pub horizontality_tol: f64,
    /// Cells whose local Whitney ratio exceeds this multiple of the 90th
    /// percentile are trimmed, worst first.
    pub trim_factor: f64,
    pub audit_tol: Option<f64>,
}

impl Default for LusinOptions {
    fn default() -> Self {
        Self {
            cells: 256,
            rho0_cells: 2.0,
            rho_levels: 6,
            n_max: 4096,
            horizontality_tol: 1e-6,
            trim_factor: 10.0,
            audit_tol: Some(1e-8),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LusinResult {
    pub order: usize,
    /// Centers of the kept cells.
    pub k: Vec<f64>,
    pub curve: Option<PiecewiseSmoothCurve>,
    pub agreement_measure_deficit: f64,
    pub epsilon_target: f64,
    pub cell_width: f64,
    /// One report per order used.
    pub uniform: Vec<UniformParameterReport>,
    /// Cell estimates per order used.
    pub cells: Vec<Vec<CellEstimate>>,
    /// Cells removed by coefficient trimming.
    pub trimmed_cells: Vec<usize>,
    /// Every cell not in K.
    pub discarded_cells: Vec<usize>,
    pub fit_method: String,
}

impl LusinResult {
    pub fn cell_center(&self, i: usize, domain_start: f64) -> f64 {
        domain_start + (i as f64 + 0.5) * self.cell_width
    }
}

/// Per-order estimates, A_N and trimming.
struct Stage {
    cells: Vec<CellEstimate>,
    centers: Vec<f64>,
    jets: Vec<Option<[Vec<f64>; 3]>>,
    report: UniformParameterReport,
    kept: Vec<usize>,
    trimmed: Vec<usize>,
}

fn check_horizontal(curve: &SampledCurve, tol: f64) -> Result<()> {
    let d = curve.chord_horizontality_defect();
    if !(d <= tol) {
        return Err(Error::Validation {
            failures: vec![ConditionFailure {
                condition: Condition::Leibniz,
                measured: d,
                limit: tol,
                detail: "input samples are not horizontal (chord defect of h' = 2(f'g - fg'))".into(),
            }],
        });
    }
    Ok(())
}

fn cell_jets(
    curve: &SampledCurve,
    idx: usize,
    m: usize,
    omega: &ModulusOfContinuity,
    rhos: &[f64],
    df: &[f64],
    dg: &[f64],
    dh: &[f64],
) -> Result<(Vec<L1wEstimate>, [Vec<f64>; 3])> {
    let grid = curve.grid();
    let x = grid[idx];
    let p = curve.points()[idx];
    let ef = l1w_estimate(grid, df, x, m - 1, omega, rhos)?;
    let eg = l1w_estimate(grid, dg, x, m - 1, omega, rhos)?;
    let f = integrate_l1w(&ef, p.x);
    let g = integrate_l1w(&eg, p.y);
    let mut eh = vertical_l1w(&f, &g)?;
    eh.ratios = ratios_for(grid, dh, &eh.polynomial(), x, m - 1, omega, rhos);
    eh.c_local = eh.ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let hjet: Vec<f64> = std::iter::once(p.z)
        .chain(eh.derivatives())
        .collect();
    Ok((vec![ef, eg, eh], [f.derivatives(), g.derivatives(), hjet]))
}

fn build_triple(centers: &[f64], jets: &[&[Vec<f64>; 3]], m: usize) -> Result<HorizontalJetTriple> {
    let k = SampleSet::new(centers.to_vec())?;
    let coord = |c: usize| -> Result<ScalarJet> {
        let data = (0..=m).map(|o| jets.iter().map(|j| j[c][o]).collect()).collect();
        ScalarJet::new(k.clone(), m, data)
    };
    HorizontalJetTriple::new(coord(0)?, coord(1)?, coord(2)?)
}

fn run_stage(
    curve: &SampledCurve,
    m: usize,
    omega: &ModulusOfContinuity,
    budget: f64,
    opts: &LusinOptions,
) -> Result<Stage> {
    if m < 1 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    if opts.cells < 2 || opts.rho_levels == 0 {
        return Err(Error::InvalidArgument("need at least 2 cells and one radius".into()));
    }
    let grid = curve.grid();
    let domain = (grid[0], grid[grid.len() - 1]);
    let width = (domain.1 - domain.0) / opts.cells as f64;
    let rho0 = opts.rho0_cells * width;
    let rho_grid: Vec<f64> = (0..opts.rho_levels).map(|j| rho0 / 2f64.powi(j as i32)).collect();
    let derivs = curve.derivatives();
    let df: Vec<f64> = derivs.iter().map(|d| d[0]).collect();
    let dg: Vec<f64> = derivs.iter().map(|d| d[1]).collect();
    let dh: Vec<f64> = derivs.iter().map(|d| d[2]).collect();

    let centers_idx: Vec<usize> = (0..opts.cells)
        .map(|j| {
            let target = domain.0 + (j as f64 + 0.5) * width;
            let i = grid.partition_point(|&t| t < target).min(grid.len() - 1);
            if i > 0 && (grid[i - 1] - target).abs() <= (grid[i] - target).abs() {
                i - 1
            } else {
                i
            }
        })
        .collect();
    let results: Vec<Result<(CellEstimate, Option<[Vec<f64>; 3]>)>> = centers_idx
        .par_iter()
        .map(|&idx| {
            let x = grid[idx];
            let room = (x - domain.0).min(domain.1 - x);
            let rhos: Vec<f64> = rho_grid.iter().copied().filter(|&r| r <= room).collect();
            if rhos.is_empty() {
                return Ok((CellEstimate { x, components: Vec::new() }, None));
            }
            let (components, jets) = cell_jets(curve, idx, m, omega, &rhos, &df, &dg, &dh)?;
            Ok((CellEstimate { x, components }, Some(jets)))
        })
        .collect();
    let mut cells = Vec::with_capacity(opts.cells);
    let mut jets = Vec::with_capacity(opts.cells);
    for r in results {
        let (c, j) = r?;
        cells.push(c);
        jets.push(j);
    }
    let schedule: Vec<usize> = (1..=opts.n_max).collect();
    let report = uniform_parameter_set(&cells, domain, width, &schedule, budget / 2.0)?;

    // trim cells whose jets disagree with their kept neighbours
    let kept0 = report.a_n.clone();
    let mut osc = vec![0.0f64; kept0.len()];
    if kept0.len() >= 2 {
        let centers: Vec<f64> = kept0.iter().map(|&i| cells[i].x).collect();
        let js: Vec<&[Vec<f64>; 3]> = kept0.iter().map(|&i| jets[i].as_ref().expect("kept")).collect();
        let triple = build_triple(&centers, &js, m)?;
        for p in 0..kept0.len() {
            for q in [p.wrapping_sub(1), p + 1] {
                if q >= kept0.len() {
                    continue;
                }
                let d = (centers[q] - centers[p]).abs();
                for coord in triple.coordinates() {
                    for k in 0..=m {
                        for (a, b) in [(p, q), (q, p)] {
                            let r = remainder_idx(coord, a, b, k).abs()
                                / (omega.value(d) * d.powi((m - k) as i32));
                            osc[p] = osc[p].max(r);
                        }
                    }
                }
            }
        }
    }
    let mut sorted = osc.clone();
    sorted.sort_by(f64::total_cmp);
    // a defect confined to under a tenth of the cells does not move the
    // 90th percentile
    let reference = if sorted.is_empty() { 0.0 } else { sorted[(sorted.len() - 1) * 9 / 10] };
    let limit = opts.trim_factor * reference.max(1e-12);
    let mut order: Vec<usize> = (0..kept0.len()).filter(|&p| osc[p] > limit).collect();
    order.sort_by(|&a, &b| osc[b].total_cmp(&osc[a]).then(a.cmp(&b)));
    let mut trimmed = Vec::new();
    for p in order {
        if (trimmed.len() + 1) as f64 * width < budget / 2.0 {
            trimmed.push(kept0[p]);
        }
    }
    trimmed.sort_unstable();
    let kept: Vec<usize> = kept0.into_iter().filter(|i| trimmed.binary_search(i).is_err()).collect();
    Ok(Stage {
        centers: cells.iter().map(|c| c.x).collect(),
        cells,
        jets,
        report,
        kept,
        trimmed,
    })
}

fn finish(
    curve: &SampledCurve,
    stages: &[Stage],
    kept: Vec<usize>,
    m: usize,
    epsilon: f64,
    extend: impl Fn(&HorizontalJetTriple, (f64, f64)) -> Result<PiecewiseSmoothCurve>,
    opts: &LusinOptions,
) -> Result<LusinResult> {
    let grid = curve.grid();
    let domain = (grid[0], grid[grid.len() - 1]);
    let width = (domain.1 - domain.0) / opts.cells as f64;
    let last = stages.last().expect("at least one stage");
    let k: Vec<f64> = kept.iter().map(|&i| last.centers[i]).collect();
    let curve_out = if kept.len() >= 2 {
        let js: Vec<&[Vec<f64>; 3]> = kept.iter().map(|&i| last.jets[i].as_ref().expect("kept")).collect();
        let triple = build_triple(&k, &js, m)?;
        Some(extend(&triple, domain)?)
    } else {
        None
    };
    let discarded_cells: Vec<usize> = (0..opts.cells).filter(|i| kept.binary_search(i).is_err()).collect();
    let mut trimmed: Vec<usize> = stages.iter().flat_map(|s| s.trimmed.iter().copied()).collect();
    trimmed.sort_unstable();
    trimmed.dedup();
    Ok(LusinResult {
        order: m,
        k,
        curve: curve_out,
        agreement_measure_deficit: discarded_cells.len() as f64 * width,
        epsilon_target: epsilon,
        cell_width: width,
        uniform: stages.iter().map(|s| s.report.clone()).collect(),
        cells: stages.iter().map(|s| s.cells.clone()).collect(),
        trimmed_cells: trimmed,
        discarded_cells,
        fit_method: FIT_METHOD.to_string(),
    })
}

fn extension_options(opts: &LusinOptions) -> ExtensionOptions {
    ExtensionOptions { audit_tol: opts.audit_tol, ..ExtensionOptions::permissive() }
}

/// Horizontal C^{m,ω} curve agreeing with the samples off a set of
/// measure < ε (up to the cell resolution).
pub fn lusin_approximate(
    curve: &SampledCurve,
    m: usize,
    omega: &ModulusOfContinuity,
    epsilon: f64,
    opts: &LusinOptions,
) -> Result<LusinResult> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {epsilon}")));
    }
    check_horizontal(curve, opts.horizontality_tol)?;
    let stage = run_stage(curve, m, omega, epsilon, opts)?;
    let kept = stage.kept.clone();
    let eopts = extension_options(opts);
    finish(curve, &[stage], kept, m, epsilon, |t, d| extend_horizontal(t, omega, d, &eopts), opts)
}

/// Horizontal curve matching the estimated jets to every order up to
/// `m_max`, off a set of measure < ε. Order m gets the budget ε/2^m
/// (ε/2^{m_max-1} for the last order).
pub fn lusin_cinfty(
    curve: &SampledCurve,
    m_max: usize,
    epsilon: f64,
    opts: &LusinOptions,
) -> Result<LusinResult> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {epsilon}")));
    }
    if m_max < 1 {
        return Err(Error::InvalidArgument("m_max must be at least 1".into()));
    }
    check_horizontal(curve, opts.horizontality_tol)?;
    let omega = ModulusOfContinuity::linear();
    let stages = (1..=m_max)
        .map(|m| {
            let budget = if m < m_max { epsilon / 2f64.powi(m as i32) } else { epsilon / 2f64.powi(m as i32 - 1) };
            run_stage(curve, m, &omega, budget, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut kept = stages[0].kept.clone();
    for s in &stages[1..] {
        kept.retain(|i| s.kept.binary_search(i).is_ok());
    }
    let eopts = extension_options(opts);
    finish(curve, &stages, kept, m_max, epsilon, |t, d| extend_cinfty(t, d, &eopts), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn samples(u: impl Fn(f64) -> f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let grid: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let vals = grid.iter().map(|&y| u(y)).collect();
        (grid, vals)
    }

    fn rhos() -> Vec<f64> {
        (0..6).map(|j| 0.5 / 2f64.powi(j)).collect()
    }

    #[test]
    fn cubic_at_origin() {
        let (grid, vals) = samples(|y| y.powi(3), 20001);
        let rho = rhos();
        let e = l1w_estimate(&grid, &vals, 0.0, 2, &ModulusOfContinuity::linear(), &rho).unwrap();
        let r0 = rho[5];
        // the L² projection of y³ on the smallest ball keeps 3ρ²y/5
        assert_abs_diff_eq!(e.coefficients[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.coefficients[1], 0.6 * r0 * r0, epsilon = 1e-2 * r0 * r0);
        assert_abs_diff_eq!(e.coefficients[2], 0.0, epsilon = 1e-12);
        // ⨍|y³| = ρ³/4 dominates on the larger balls
        assert!(e.c_local <= 0.25 + 1e-4 && e.c_local > 0.24, "{}", e.c_local);
    }

    #[test]
    fn quadratic_fits_itself() {
        let (g, v) = samples(|y| y * y, 4001);
        let e = l1w_estimate(&g, &v, 0.0, 2, &ModulusOfContinuity::linear(), &rhos()).unwrap();
        assert_abs_diff_eq!(e.coefficients[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.coefficients[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.coefficients[2], 1.0, epsilon = 1e-9);
        assert!(e.c_local < 1e-6);
    }

    #[test]
    fn absolute_value_has_a_quarter() {
        let (g, v) = samples(f64::abs, 4001);
        let e = l1w_estimate(&g, &v, 0.0, 1, &ModulusOfContinuity::linear(), &rhos()).unwrap();
        assert!(e.coefficients[1].abs() <= 1.0);
        assert!(e.c_local >= 0.25);
    }

    #[test]
    fn cubic_projects_to_a_small_line() {
        let (g, v) = samples(|y| y * y * y, 4001);
        let r = rhos();
        let e = l1w_estimate(&g, &v, 0.0, 2, &ModulusOfContinuity::linear(), &r).unwrap();
        let rmin = r[5];
        assert_abs_diff_eq!(e.coefficients[0], 0.0, epsilon = 1e-12);
        // continuous projection of y³ onto lines is 3ρ²y/5; the trapezoid fit
        // on ~30 samples lands within a few percent
        assert_abs_diff_eq!(e.coefficients[1], 0.6 * rmin * rmin, epsilon = 0.03 * rmin * rmin);
        assert_abs_diff_eq!(e.coefficients[2], 0.0, epsilon = 1e-12);
        // ⨍|y³| = ρ³/4 at the largest radius, where the fitted line is negligible
        let top = e.ratios[0].1;
        assert!((top - 0.25).abs() < 0.01, "{top}");
    }

    #[test]
    fn integration_examples() {
        let base = L1wEstimate { x: 0.0, m: 1, coefficients: vec![0.0, 1.0], c_local: 0.5, rho_used: 0.1, ratios: vec![(0.1, 0.5)] };
        let q = integrate_l1w(&base, 0.0);
        assert_eq!(q.coefficients, vec![0.0, 0.0, 0.5]);
        assert_eq!(q.m, 2);
        let zero = L1wEstimate { coefficients: vec![0.0], m: 0, ..base.clone() };
        assert_eq!(integrate_l1w(&zero, 3.0).coefficients, vec![3.0, 0.0]);
        let p = L1wEstimate { coefficients: vec![1.0, 0.0, 3.0], m: 2, ..base };
        assert_eq!(integrate_l1w(&p, 2.0).coefficients, vec![2.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn vertical_examples() {
        let est = |c: Vec<f64>, m| L1wEstimate { x: 0.0, m, coefficients: c, c_local: 0.0, rho_used: 0.1, ratios: vec![] };
        let r = vertical_l1w(&est(vec![0.0, 1.0], 2), &est(vec![0.0, 0.0, 1.0], 2)).unwrap();
        assert_eq!(r.coefficients, vec![0.0, 0.0]);
        let r = vertical_l1w(&est(vec![0.0, 1.0], 2), &est(vec![], 2)).unwrap();
        assert_eq!(r.coefficients, vec![0.0, 0.0]);
        let r = vertical_l1w(&est(vec![1.0], 1), &est(vec![0.0, 1.0], 1)).unwrap();
        assert_eq!(r.coefficients, vec![-2.0]);
    }

    #[test]
    fn empty_schedule_is_a_coverage_error() {
        let err = uniform_parameter_set(&[], (0.0, 1.0), 0.1, &[], 0.1).unwrap_err();
        assert!(matches!(err, Error::Coverage { .. }));
    }

    #[test]
    fn too_few_samples_is_a_resolution_error() {
        let (g, v) = samples(|y| y, 101);
        let err = l1w_estimate(&g, &v, 0.0, 1, &ModulusOfContinuity::linear(), &[0.1]).unwrap_err();
        assert!(matches!(err, Error::Resolution(_)));
    }
}
