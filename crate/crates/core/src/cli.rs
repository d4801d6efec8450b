//! Command-line surface of the bundled binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::area_velocity::{av_ratio_scan, discrete_av_scan, CurveValues};
use crate::error::{Error, Result};
use crate::extension::{
    check_conditions, extend_cinfty, extend_horizontal, ExtensionOptions, PiecewiseSmoothCurve,
};
use crate::finiteness::finiteness_check;
use crate::heisenberg::SampledCurve;
use crate::io;
use crate::jets::{HorizontalJetTriple, SampleSet};
use crate::lusin::{lusin_approximate, lusin_cinfty, LusinOptions};
use crate::modulus::ModulusOfContinuity;
use crate::suite;

#[derive(Debug, Parser)]
#[command(name = "horizontal-whitney", version, about = "Horizontal Whitney extension toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Input file (JSON).
    pub input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Modulus: `linear`, `power:<alpha>` or `table:<path>`.
    #[arg(long, default_value = "linear")]
    pub omega: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Whitney-field, Leibniz and area/velocity report for a jet triple.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Truncate the jets to this order.
        #[arg(long)]
        m: Option<usize>,
    },
    /// Extend a jet triple to a horizontal curve (CSV plus piece JSON).
    Extend {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m: Option<usize>,
        /// Run the C^∞ schedule with jets truncated to this order.
        #[arg(long = "m-max")]
        m_max: Option<usize>,
        /// Audit tolerance for jet match and residual.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// CSV resolution.
        #[arg(long, default_value_t = 1001)]
        samples: usize,
    },
    /// Finiteness-principle report from curve values (or jets) on K.
    Finiteness {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
    },
    /// Lusin approximation of a densely sampled curve.
    Lusin {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Run the C^∞ variant up to this order (ω is then linear).
        #[arg(long = "m-max")]
        m_max: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Accepted chord horizontality defect of the input.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Write the bundled fixtures as JSON into a directory.
    CurveSuite {
        #[arg(long)]
        out: PathBuf,
        /// Jet order of the written jet files.
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Points of K for jet and value files.
        #[arg(long, default_value_t = 12)]
        points: usize,
        /// Dense samples per curve.
        #[arg(long, default_value_t = 65537)]
        samples: usize,
    },
    /// CSV series for plotting: a curve description gives (t,x,y,z,residual),
    /// jets or values give (gap, ratio).
    PlotData {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
    },
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Validation { .. } | Error::Admissibility { .. } => 2,
        Error::Io(_) | Error::Schema(_) => 3,
        _ => 1,
    }
}

pub fn parse_omega(spec: &str) -> Result<ModulusOfContinuity> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "linear" => Ok(ModulusOfContinuity::linear()),
        "power" => {
            let alpha: f64 = arg
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad power exponent {arg:?}")))?;
            ModulusOfContinuity::power(alpha)
        }
        "table" => {
            let text = std::fs::read_to_string(arg)?;
            if let Ok(m) = io::from_json::<ModulusOfContinuity>(&text) {
                return Ok(m);
            }
            ModulusOfContinuity::tabulated(io::from_json::<Vec<(f64, f64)>>(&text)?)
        }
        _ => Err(Error::InvalidArgument(format!(
            "unknown modulus {spec:?}; use linear, power:<alpha> or table:<path>"
        ))),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => io::write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    emit(out, &io::to_json(value)?)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn read_jets(path: &Path, m: Option<usize>) -> Result<HorizontalJetTriple> {
    let t: HorizontalJetTriple = io::read_json(path)?;
    match m {
        Some(m) if m < t.order() => t.truncated(m),
        Some(m) if m > t.order() => Err(Error::InvalidArgument(format!(
            "jets have order {} < requested {m}",
            t.order()
        ))),
        _ => Ok(t),
    }
}

fn read_values(path: &Path) -> Result<CurveValues> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(v) = io::from_json::<CurveValues>(&text) {
        return Ok(v);
    }
    Ok(CurveValues::from_triple(&io::from_json::<HorizontalJetTriple>(&text)?))
}

fn run_command(cmd: Command) -> Result<()> {
    match cmd {
        Command::Validate { common, m } => {
            let omega = parse_omega(&common.omega)?;
            let t = read_jets(&common.input, m)?;
            let report = check_conditions(&t, &omega, &ExtensionOptions::default())?;
            emit_json(common.out.as_deref(), &report)?;
            if !report.passed() {
                return Err(Error::Validation { failures: report.failures });
            }
            Ok(())
        }
        Command::Extend { common, m, m_max, tol, samples } => {
            let omega = parse_omega(&common.omega)?;
            let options = ExtensionOptions { audit_tol: Some(tol), ..Default::default() };
            let curve = match m_max {
                Some(mm) => {
                    let t = read_jets(&common.input, Some(mm))?;
                    let hull = t.sample_set().hull();
                    extend_cinfty(&t, hull, &options)?
                }
                None => {
                    let t = read_jets(&common.input, m)?;
                    let hull = t.sample_set().hull();
                    extend_horizontal(&t, &omega, hull, &options)?
                }
            };
            emit(common.out.as_deref(), &curve.to_csv(samples)?)?;
            if let Some(out) = &common.out {
                io::write_json(&sibling(out, ".pieces.json"), &curve)?;
            }
            Ok(())
        }
        Command::Finiteness { common, m, budget } => {
            let omega = parse_omega(&common.omega)?;
            let v = read_values(&common.input)?;
            emit_json(common.out.as_deref(), &finiteness_check(&v, m, &omega, budget)?)
        }
        Command::Lusin { common, m, m_max, epsilon, tol } => {
            let curve: SampledCurve = io::read_json(&common.input)?;
            let opts = LusinOptions { horizontality_tol: tol, ..Default::default() };
            let result = match m_max {
                Some(mm) => lusin_cinfty(&curve, mm, epsilon, &opts)?,
                None => lusin_approximate(&curve, m, &parse_omega(&common.omega)?, epsilon, &opts)?,
            };
            emit_json(common.out.as_deref(), &result)?;
            if let (Some(out), Some(c)) = (&common.out, &result.curve) {
                io::write_text(&sibling(out, ".curve.csv"), &c.to_csv(1001)?)?;
            }
            Ok(())
        }
        Command::CurveSuite { out, m, points, samples } => {
            let k = SampleSet::uniform(0.0, 1.0, points)?;
            for c in suite::all() {
                io::write_json(&out.join(format!("{}.samples.json", c.name)), &c.sampled(samples)?)?;
                if c.is_analytic() {
                    io::write_json(&out.join(format!("{}.jets.json", c.name)), &c.jets(&k, m)?)?;
                    io::write_json(&out.join(format!("{}.values.json", c.name)), &c.values(&k)?)?;
                }
            }
            io::write_json(&out.join("suite.json"), &suite::all())
        }
        Command::PlotData { common, samples, budget } => {
            let text = std::fs::read_to_string(&common.input)?;
            if text.trim().is_empty() {
                return Err(Error::Schema(format!("{} is empty", common.input.display())));
            }
            let omega = parse_omega(&common.omega)?;
            if let Ok(c) = io::from_json::<PiecewiseSmoothCurve>(&text) {
                return emit(common.out.as_deref(), &c.to_csv(samples)?);
            }
            if let Ok(t) = io::from_json::<HorizontalJetTriple>(&text) {
                return emit(common.out.as_deref(), &av_ratio_scan(&t, &omega)?.scale_csv());
            }
            let v: CurveValues = io::from_json(&text)?;
            let m = (v.len() - 1).min(2);
            emit(common.out.as_deref(), &discrete_av_scan(&v, m, &omega, budget)?.scale_csv())
        }
    }
}

/// Runs one command and returns the process exit status; diagnostics go to
/// stderr.
pub fn run(cli: Cli) -> i32 {
    match run_command(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
