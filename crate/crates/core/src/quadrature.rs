//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

/// Bisections without error reduction before the integrand is treated as
/// noise-limited, and the relative error then accepted.
const ROUNDOFF_STEPS: usize = 10;
const ROUNDOFF_ACCEPT: f64 = 1e-6;

/// Max-heap order on the error estimate.
struct ByError(Piece);

impl PartialEq for ByError {
    fn eq(&self, other: &Self) -> bool {
        self.0.error.total_cmp(&other.0.error).is_eq()
    }
}

impl Eq for ByError {}

impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ByError {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.error.total_cmp(&other.0.error)
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [0.0; 15];
    fv[7] = f(c);
    for j in 0..7 {
        let dx = h * XGK[j];
        fv[j] = f(c - dx);
        fv[14 - j] = f(c + dx);
    }
    let weight = |i: usize| WGK[if i < 7 { i } else { 14 - i }];
    let mut k = 0.0;
    let mut g = WG[3] * fv[7];
    for (i, v) in fv.iter().enumerate() {
        k += weight(i) * v;
    }
    for j in (1..7).step_by(2) {
        g += WG[j / 2] * (fv[j] + fv[14 - j]);
    }
    // QUADPACK scaling of the Kronrod-Gauss difference
    let mean = 0.5 * k;
    let asc: f64 = fv.iter().enumerate().map(|(i, v)| weight(i) * (v - mean).abs()).sum::<f64>() * h.abs();
    let mut error = ((k - g) * h).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    Piece { a, b, value: k * h, error }
}

/// ∫_a^b f with |error| ≤ max(abs_tol, rel_tol |∫f|) as estimated by the
/// Kronrod–Gauss difference. Returns the value and the error estimate.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    if b < a {
        let (v, e) = integrate(f, b, a, abs_tol, rel_tol)?;
        return Ok((-v, e));
    }
    let first = kronrod(&f, a, b);
    let (mut total, mut err, mut magnitude) = (first.value, first.error, first.value.abs());
    let mut heap = BinaryHeap::from([ByError(first)]);
    let mut stuck = 0;
    loop {
        if !total.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        let tol = abs_tol.max(rel_tol * total.abs());
        if err <= tol {
            return Ok((total, err));
        }
        if stuck >= ROUNDOFF_STEPS {
            // bisection no longer reduces the error: the integrand is noisy at
            // this level
            if err <= ROUNDOFF_ACCEPT * magnitude.max(abs_tol) {
                return Ok((total, err));
            }
            return Err(Error::Numerical(format!(
                "quadrature on [{a}, {b}] limited by roundoff: error {err:e}, tolerance {tol:e}"
            )));
        }
        let worst = heap.peek().expect("nonempty").0;
        let mid = 0.5 * (worst.a + worst.b);
        if heap.len() >= MAX_INTERVALS || mid <= worst.a || mid >= worst.b {
            // resolution exhausted; accept when the remaining error is at
            // rounding level of the integrand scale
            let scale = magnitude.max(abs_tol);
            if err <= 1e-13 * scale * (heap.len() as f64).sqrt() {
                return Ok((total, err));
            }
            return Err(Error::Numerical(format!(
                "quadrature on [{a}, {b}] stalled with error {err:e} above tolerance {tol:e}"
            )));
        }
        heap.pop();
        let (l, r) = (kronrod(&f, worst.a, mid), kronrod(&f, mid, worst.b));
        let agree = (l.value + r.value - worst.value).abs() <= 1e-5 * (l.value + r.value).abs();
        if agree && l.error + r.error >= 0.99 * worst.error {
            stuck += 1;
        }
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        magnitude += l.value.abs() + r.value.abs() - worst.value.abs();
        heap.push(ByError(l));
        heap.push(ByError(r));
    }
}

/// Integrates over consecutive breakpoints, splitting the tolerance evenly.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    let n = breaks.len().saturating_sub(1).max(1) as f64;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += integrate(&f, w[0], w[1], abs_tol / n, rel_tol)?.0;
    }
    Ok(total)
}
