//! Explicit C^{m,ω} horizontal extension of admissible jet data.
//!
//! The pipeline blends Taylor polynomials of F and G across each gap of K,
//! re-defines the vertical coordinate as the integral of the horizontal
//! bracket, and removes the remaining area deficit with flat bumps.

mod curve;
mod pieces;
mod repair;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use curve::{AuditReport, GapPiece, OuterPiece, PiecewiseSmoothCurve, ResidualAudit, Side};
pub use pieces::{
    vertical_redefine, whitney_extend_scalar, BumpSpec, Gap, ScalarExtension, ScalarPiece,
    SmoothStep, VerticalRedefinition,
};
pub use repair::{horizontality_repair, ExtensionConstants, PerturbationPair, RepairCase};

use crate::area_velocity::{av_ratio_scan, AVScanReport};
use crate::error::{Condition, ConditionFailure, Error, Result};
use crate::jets::{validate_cmw, HorizontalJetTriple, LeibnizDefect, WhitneyFieldReport};
use crate::modulus::ModulusOfContinuity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionOptions {
    /// Largest accepted Whitney constant of F, G, H; `None` skips the check.
    pub max_whitney_constant: Option<f64>,
    /// Largest accepted |A|/V over pairs of K; `None` skips the check.
    pub max_av_ratio: Option<f64>,
    /// Largest accepted relative Leibniz defect of H.
    pub leibniz_tol: f64,
    pub audit_points_per_gap: usize,
    /// Fail when jet match or residual exceed this; `None` only reports.
    pub audit_tol: Option<f64>,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        Self {
            max_whitney_constant: Some(1e4),
            max_av_ratio: Some(1e3),
            leibniz_tol: 1e-8,
            audit_points_per_gap: 10,
            audit_tol: Some(1e-8),
        }
    }
}

impl ExtensionOptions {
    /// Options that report but never reject.
    pub fn permissive() -> Self {
        Self {
            max_whitney_constant: None,
            max_av_ratio: None,
            leibniz_tol: f64::INFINITY,
            audit_points_per_gap: 10,
            audit_tol: None,
        }
    }
}

/// The three hypotheses measured on one jet triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub order: usize,
    pub whitney: [WhitneyFieldReport; 3],
    pub leibniz: LeibnizDefect,
    pub area_velocity: AVScanReport,
    pub failures: Vec<ConditionFailure>,
    /// max(1, Whitney constants, A/V ratio).
    pub kappa: f64,
    /// Finite K has no accumulation points, so every point is isolated.
    pub isolated_points: usize,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Measures conditions (1), (2) and (3) for a horizontal extension.
pub fn check_conditions(
    t: &HorizontalJetTriple,
    omega: &ModulusOfContinuity,
    options: &ExtensionOptions,
) -> Result<ConditionReport> {
    let whitney = [
        validate_cmw(t.f(), omega)?,
        validate_cmw(t.g(), omega)?,
        validate_cmw(t.h(), omega)?,
    ];
    let leibniz = t.leibniz_defect();
    let av = av_ratio_scan(t, omega)?;
    let mut failures = Vec::new();
    let worst_whitney = whitney
        .iter()
        .zip(["F", "G", "H"])
        .max_by(|a, b| a.0.best_constant.total_cmp(&b.0.best_constant))
        .expect("three reports");
    if let Some(limit) = options.max_whitney_constant {
        let c = worst_whitney.0.best_constant;
        if !(c <= limit) {
            failures.push(ConditionFailure {
                condition: Condition::WhitneyField,
                measured: c,
                limit,
                detail: format!("{} remainder at {:?}", worst_whitney.1, worst_whitney.0.worst_witness),
            });
        }
    }
    if !(leibniz.max_relative <= options.leibniz_tol) {
        failures.push(ConditionFailure {
            condition: Condition::Leibniz,
            measured: leibniz.max_relative,
            limit: options.leibniz_tol,
            detail: format!("H^{} at {}", leibniz.witness_order, leibniz.witness_point),
        });
    }
    if let Some(limit) = options.max_av_ratio {
        if !(av.max_ratio <= limit) {
            let w = av.witness.as_ref().map(|w| format!("pair ({}, {})", w.a, w.b));
            failures.push(ConditionFailure {
                condition: Condition::AreaVelocity,
                measured: av.max_ratio,
                limit,
                detail: w.unwrap_or_default(),
            });
        }
    }
    let kappa = whitney
        .iter()
        .map(|w| w.best_constant)
        .fold(av.max_ratio.max(1.0), f64::max);
    Ok(ConditionReport {
        order: t.order(),
        whitney,
        leibniz,
        area_velocity: av,
        failures,
        kappa,
        isolated_points: t.sample_set().len(),
    })
}

fn check_domain(t: &HorizontalJetTriple, domain: (f64, f64)) -> Result<()> {
    let (lo, hi) = t.sample_set().hull();
    if !(domain.0 <= lo && domain.1 >= hi && domain.0 < domain.1) {
        return Err(Error::InvalidArgument(format!(
            "K = [{lo}, {hi}] is not inside I = [{}, {}]",
            domain.0, domain.1
        )));
    }
    Ok(())
}

/// Blend, re-define h, repair every gap at the order chosen by `order_of`,
/// and assemble.
fn assemble<O: Fn(f64) -> usize + Sync>(
    t: &HorizontalJetTriple,
    omega: &ModulusOfContinuity,
    domain: (f64, f64),
    constants: ExtensionConstants,
    order_of: O,
    options: &ExtensionOptions,
) -> Result<PiecewiseSmoothCurve> {
    let fe = whitney_extend_scalar(t.f(), domain)?;
    let ge = whitney_extend_scalar(t.g(), domain)?;
    let vertical = vertical_redefine(&fe, &ge, t.h().row(0))?;
    let gaps = vertical
        .gaps
        .par_iter()
        .map(|gap| {
            let (f, g) = (&fe.gaps[gap.index], &ge.gaps[gap.index]);
            let m = order_of(gap.len());
            let deficit = vertical.deficits[gap.index];
            let repair = horizontality_repair(gap, f, g, deficit, m, omega, &constants)?;
            GapPiece::new(*gap, f.clone(), g.clone(), repair, vertical.h_start[gap.index])
        })
        .collect::<Result<Vec<_>>>()?;
    let curve = PiecewiseSmoothCurve::from_parts(domain, t.clone(), omega.clone(), constants, gaps);
    if let Some(tol) = options.audit_tol {
        let jm = curve.jet_match_error()?;
        let res = curve.residual_audit(options.audit_points_per_gap)?;
        if !(jm <= tol && res.max() <= tol) {
            return Err(Error::Numerical(format!(
                "extension audit failed: jet match {jm:.3e}, residual {:.3e} (tolerance {tol:.1e})",
                res.max()
            )));
        }
    }
    Ok(curve)
}

/// C^{m,ω} horizontal curve on `domain` through the jets, or the failed
/// hypotheses.
pub fn extend_horizontal(
    t: &HorizontalJetTriple,
    omega: &ModulusOfContinuity,
    domain: (f64, f64),
    options: &ExtensionOptions,
) -> Result<PiecewiseSmoothCurve> {
    check_domain(t, domain)?;
    let report = check_conditions(t, omega, options)?;
    if !report.passed() {
        return Err(Error::Validation { failures: report.failures });
    }
    let m = t.order();
    let mut kappa = vec![report.kappa; m + 1];
    kappa[0] = 1.0;
    let constants = ExtensionConstants::measured(kappa)?;
    assemble(t, omega, domain, constants, |_| m, options)
}

/// Horizontal curve matching jets of every order up to `m_max`, with the
/// per-gap repair order taken from the c_m schedule.
pub fn extend_cinfty(
    t: &HorizontalJetTriple,
    domain: (f64, f64),
    options: &ExtensionOptions,
) -> Result<PiecewiseSmoothCurve> {
    check_domain(t, domain)?;
    let omega = ModulusOfContinuity::linear();
    let m_max = t.order();
    let mut kappa = vec![1.0];
    let mut failures = Vec::new();
    for m in 1..=m_max {
        let report = check_conditions(&t.truncated(m)?, &omega, options)?;
        for mut f in report.failures {
            f.detail = format!("order {m}: {}", f.detail);
            failures.push(f);
        }
        kappa.push(report.kappa);
    }
    if !failures.is_empty() {
        return Err(Error::Validation { failures });
    }
    let constants = ExtensionConstants::measured(kappa)?;
    let schedule = constants.clone();
    assemble(t, &omega, domain, constants, move |len| schedule.order_for(len).unwrap_or(1), options)
}
