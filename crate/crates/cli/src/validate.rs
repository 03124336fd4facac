//! Error-scaling scans: asymptotic formulas against exact or sampled
//! finite-N values over a ladder of system sizes.

use std::fmt::Write as _;

use clap::{Args, ValueEnum};
use fgmi_core::asymptotics::{mutual_info_finite_a, mutual_info_fraction, PURITY_MARGIN};
use fgmi_core::finite::max_degenerate_breakdown;
use fgmi_core::sampler::estimate;
use fgmi_core::{Partition, Spectrum};
use serde::{Deserialize, Serialize};

use crate::commands::{default_workers, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::error::{CliError, CliResult};
use crate::report::number;

pub const TARGET_SLOPE: f64 = -1.0;
pub const SLOPE_TOLERANCE: f64 = 0.15;

const SUBSYSTEM: usize = 2;
const FRACTION_NUM: usize = 2;
const FRACTION_DEN: usize = 5;
const DEGENERATE_Y: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// N_A = 2, y = 0.5: exact (Jacobi) vs the fixed-subsystem formula.
    Fig4a,
    /// N_A = 2, evenly spaced spectrum: Monte-Carlo vs the fixed-subsystem formula.
    Fig4b,
    /// f = 2/5, y = 0.5: exact (Jacobi) vs the saddle-point formula.
    Fig5a,
    /// f = 2/5, evenly spaced spectrum: Monte-Carlo vs the saddle-point formula.
    Fig5b,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Fig4a => "fig4a",
            Case::Fig4b => "fig4b",
            Case::Fig5a => "fig5a",
            Case::Fig5b => "fig5b",
        }
    }

    pub fn sampled(self) -> bool {
        matches!(self, Case::Fig4b | Case::Fig5b)
    }

    /// Default system sizes. Sampled fixed-subsystem runs start at N = 8
    /// (the expansion needs N >= 4 N_A); fixed-fraction runs use multiples of 5.
    pub fn default_ladder(self) -> Vec<usize> {
        match self {
            Case::Fig4a | Case::Fig5a => vec![10, 20, 40, 80],
            Case::Fig4b => vec![8, 12, 16, 24],
            Case::Fig5b => vec![5, 10, 15, 20],
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub case: Case,
    /// Output directory, or - for stdout.
    #[arg(long, default_value = ".")]
    pub out: String,
    /// Monte-Carlo samples per system size (sampled cases only).
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, env = "FGMI_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated system sizes replacing the default ladder.
    #[arg(long, value_delimiter = ',')]
    pub ladder: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub n: usize,
    pub asymptotic: f64,
    pub reference: f64,
    /// Monte-Carlo standard error of the reference; zero for exact values.
    pub reference_stderr: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub case: Case,
    pub ladder: Vec<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Least-squares slope of `log |error|` against `log N`.
    pub slope: Option<f64>,
    /// Propagated Monte-Carlo uncertainty of the slope.
    pub slope_stderr: Option<f64>,
    pub target_slope: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub points: Vec<ValidationPoint>,
    pub summary: ValidationSummary,
}

/// Evenly spaced spectrum with the top value pulled below the purity guard
/// of the asymptotic formulas.
pub fn guarded_linspace(n: usize) -> CliResult<Spectrum> {
    let mut values = Spectrum::linspace(n)
        .map_err(|e| CliError::Usage(e.to_string()))?
        .values()
        .to_vec();
    for v in values.iter_mut() {
        *v = v.min(1.0 - PURITY_MARGIN);
    }
    Spectrum::new(values).map_err(|e| CliError::Usage(e.to_string()))
}

fn fraction_subsystem(n: usize) -> CliResult<usize> {
    if !n.is_multiple_of(FRACTION_DEN) {
        return Err(CliError::Usage(format!(
            "N = {n} is not a multiple of {FRACTION_DEN}; the fraction 2/5 needs integer N_A"
        )));
    }
    Ok(n / FRACTION_DEN * FRACTION_NUM)
}

fn point(
    case: Case,
    n: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> CliResult<ValidationPoint> {
    let f = FRACTION_NUM as f64 / FRACTION_DEN as f64;
    let (asymptotic, reference, reference_stderr) = match case {
        Case::Fig4a => {
            let s = Spectrum::degenerate(n, DEGENERATE_Y)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let asym = mutual_info_finite_a(n, SUBSYSTEM, &s)
                .map_err(CliError::engine("fixed-subsystem expansion"))?;
            let exact = max_degenerate_breakdown(n, SUBSYSTEM, DEGENERATE_Y)
                .map_err(CliError::engine("Jacobi kernel at maximal degeneracy"))?;
            (asym, exact.mutual_information(), 0.0)
        }
        Case::Fig5a => {
            let n_a = fraction_subsystem(n)?;
            let s = Spectrum::degenerate(n, DEGENERATE_Y)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let asym = mutual_info_fraction(&s, f, n)
                .map_err(CliError::engine("saddle-point expansion at fixed fraction"))?;
            let exact = max_degenerate_breakdown(n, n_a, DEGENERATE_Y)
                .map_err(CliError::engine("Jacobi kernel at maximal degeneracy"))?;
            (asym, exact.mutual_information(), 0.0)
        }
        Case::Fig4b | Case::Fig5b => {
            let s = guarded_linspace(n)?;
            let (n_a, asym) = if case == Case::Fig4b {
                let a = mutual_info_finite_a(n, SUBSYSTEM, &s)
                    .map_err(CliError::engine("fixed-subsystem expansion"))?;
                (SUBSYSTEM, a)
            } else {
                let a = mutual_info_fraction(&s, f, n)
                    .map_err(CliError::engine("saddle-point expansion at fixed fraction"))?;
                (fraction_subsystem(n)?, a)
            };
            let p = Partition::new(n, n_a).map_err(|e| CliError::Usage(e.to_string()))?;
            let mc = estimate(&s, p, samples, seed, workers)
                .map_err(CliError::engine("Monte-Carlo sampler"))?;
            (
                asym,
                mc.mutual_information.mean,
                mc.mutual_information.stderr,
            )
        }
    };
    Ok(ValidationPoint {
        n,
        asymptotic,
        reference,
        reference_stderr,
        abs_error: (asymptotic - reference).abs(),
    })
}

/// Least-squares slope of `log e` on `log n` and its standard error from
/// the per-point uncertainties `sigma` of `e`.
pub fn loglog_slope(points: &[ValidationPoint]) -> Result<(f64, f64), String> {
    if points.len() < 2 {
        return Err("need at least two system sizes".into());
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p.abs_error > 0.0 && p.abs_error.is_finite()))
    {
        return Err(format!(
            "error at N = {} is {}, no logarithm",
            p.n, p.abs_error
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.abs_error.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err("system sizes must differ".into());
    }
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / sxx;
    let var: f64 = xs
        .iter()
        .zip(points)
        .map(|(x, p)| ((x - mx) / sxx).powi(2) * (p.reference_stderr / p.abs_error).powi(2))
        .sum();
    Ok((slope, var.sqrt()))
}

pub fn cmd_validate(args: &ValidateArgs) -> CliResult<Validation> {
    let case = args.case;
    let ladder = args.ladder.clone().unwrap_or_else(|| case.default_ladder());
    if ladder.is_empty() {
        return Err(CliError::Usage("--ladder is empty".into()));
    }
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let workers = args.workers.unwrap_or_else(default_workers);
    if case.sampled() && args.samples < 100 {
        return Err(CliError::Usage(format!(
            "--samples must be at least 100, got {}",
            args.samples
        )));
    }
    let points = ladder
        .iter()
        .map(|&n| point(case, n, args.samples, seed, workers))
        .collect::<CliResult<Vec<_>>>()?;

    let (slope, slope_stderr, pass, message) = match loglog_slope(&points) {
        Ok((s, se)) => {
            let pass = (s - TARGET_SLOPE).abs() <= SLOPE_TOLERANCE;
            let msg = format!(
                "slope {s:.4} {} target {TARGET_SLOPE} +/- {SLOPE_TOLERANCE}",
                if pass { "within" } else { "outside" }
            );
            (Some(s), case.sampled().then_some(se), pass, msg)
        }
        Err(e) => (None, None, false, format!("slope fit failed: {e}")),
    };
    let summary = ValidationSummary {
        case,
        ladder,
        samples: case.sampled().then_some(args.samples),
        seed: case.sampled().then_some(seed),
        slope,
        slope_stderr,
        target_slope: TARGET_SLOPE,
        tolerance: SLOPE_TOLERANCE,
        pass,
        message,
    };
    Ok(Validation { points, summary })
}

impl Validation {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,asymptotic,reference,reference_stderr,abs_error\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.n,
                number(p.asymptotic),
                number(p.reference),
                number(p.reference_stderr),
                number(p.abs_error)
            );
        }
        out
    }

    pub fn summary_json(&self) -> CliResult<String> {
        let mut text = serde_json::to_string_pretty(&self.summary)?;
        text.push('\n');
        Ok(text)
    }
}
