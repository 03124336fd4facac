//! The `exact`, `sample`, `asymptotic` and `density` subcommands.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use fgmi_core::asymptotics::{
    entropy_a_finite, entropy_b_complement_with, entropy_fraction_with,
    entropy_max_degenerate_limit, macroscopic_density, mutual_info_finite_a_with,
    mutual_info_fraction_with, mutual_info_max_degenerate_limit, AsymptoticResult, SaddleContext,
    FRACTION_MARGIN,
};
use fgmi_core::finite::{
    exact_breakdown_auto, jacobi_density, relative_spread, two_mode_entropy, DensityValue,
    JacobiKernel, KernelEvaluator, Route, NEAR_DEGENERATE_SPREAD,
};
use fgmi_core::numerics::QuadratureSpec;
use fgmi_core::sampler::estimate;
use fgmi_core::{
    entropy_kernel, total_entropy, EntropyBreakdown, Error as CoreError, Partition, Spectrum,
};

use crate::error::{CliError, CliResult};
use crate::report::{
    number, AsymptoticTerms, Inputs, Metadata, Method, Results, RunReport, StandardErrors,
    Tolerances,
};
use crate::spectrum_spec::SpectrumSpec;

/// Largest system accepted by the generic kernel path; the monomial
/// Vandermonde systems behind it are too ill-conditioned beyond this.
pub const MAX_KERNEL_MODES: usize = 64;

/// Seed used when neither `--seed` nor `FGMI_SEED` is given.
pub const DEFAULT_SEED: u64 = 1;

pub const DEFAULT_SAMPLES: usize = 100_000;

const PATH_KERNEL: &str = "kernel quadrature of the level density";
const PATH_JACOBI: &str = "Jacobi kernel at maximal degeneracy";
const PATH_SAMPLER: &str = "Monte-Carlo sampler";
const PATH_FINITE_A: &str = "fixed-subsystem expansion";
const PATH_FRACTION: &str = "saddle-point expansion at fixed fraction";
const PATH_LIMIT: &str = "maximal-degeneracy limit";
const PATH_MACROSCOPIC: &str = "macroscopic level density";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Destination of a report: `json`, `csv` or `-` select stdout, anything
/// else is a file whose extension (`.csv` or not) picks the format.
#[derive(Debug, Clone, PartialEq)]
pub enum ReportTarget {
    Stdout(Format),
    File(PathBuf, Format),
}

impl FromStr for ReportTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "" => return Err("empty output target".into()),
            "json" | "-" => ReportTarget::Stdout(Format::Json),
            "csv" => ReportTarget::Stdout(Format::Csv),
            path => {
                let format = if path.to_ascii_lowercase().ends_with(".csv") {
                    Format::Csv
                } else {
                    Format::Json
                };
                ReportTarget::File(PathBuf::from(path), format)
            }
        })
    }
}

impl ReportTarget {
    pub fn format(&self) -> Format {
        match self {
            ReportTarget::Stdout(f) | ReportTarget::File(_, f) => *f,
        }
    }

    pub fn path(&self) -> Option<&PathBuf> {
        match self {
            ReportTarget::Stdout(_) => None,
            ReportTarget::File(p, _) => Some(p),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExactArgs {
    /// Number of fermionic modes N.
    #[arg(long)]
    pub n: usize,
    /// Size N_A of subsystem A.
    #[arg(long)]
    pub subsystem: usize,
    /// degenerate:<y>, linspace, list:<v1,v2,...> or file:<path>.
    #[arg(long)]
    pub spectrum: SpectrumSpec,
    /// Absolute and relative quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// json, csv, - (stdout) or a file path.
    #[arg(long, default_value = "json")]
    pub out: ReportTarget,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub subsystem: usize,
    #[arg(long)]
    pub spectrum: SpectrumSpec,
    /// Number of Haar samples (at least 100).
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, env = "FGMI_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; does not affect the result.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "json")]
    pub out: ReportTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Regime {
    FiniteA,
    Fraction,
    MaxDegenerate,
}

impl Regime {
    fn name(self) -> &'static str {
        match self {
            Regime::FiniteA => "finite-a",
            Regime::Fraction => "fraction",
            Regime::MaxDegenerate => "max-degenerate",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AsymptoticArgs {
    #[arg(long, value_enum)]
    pub regime: Regime,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, conflicts_with = "fraction")]
    pub subsystem: Option<usize>,
    /// Subsystem fraction N_A / N.
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long, conflicts_with = "y")]
    pub spectrum: Option<SpectrumSpec>,
    /// Common singular value; shorthand for degenerate:<y>.
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value = "json")]
    pub out: ReportTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityRegime {
    Kernel,
    Jacobi,
    Macroscopic,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub subsystem: usize,
    #[arg(long)]
    pub spectrum: SpectrumSpec,
    /// Number of grid points on [0, 1] (at least 16).
    #[arg(long)]
    pub grid: usize,
    /// Evaluation route; by default Jacobi for degenerate spectra and the
    /// kernel otherwise.
    #[arg(long, value_enum)]
    pub regime: Option<DensityRegime>,
    /// File path, or - for stdout.
    #[arg(long, default_value = "-")]
    pub out: String,
}

fn tolerances(tol: Option<f64>) -> CliResult<(QuadratureSpec, Tolerances)> {
    let base = QuadratureSpec::default();
    let spec = match tol {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            return Err(CliError::Usage(format!("--tol must be positive, got {t}")))
        }
        Some(t) => base.with_tolerance(t, t),
        None => base,
    };
    let record = Tolerances {
        abs: spec.abs_tol,
        rel: spec.rel_tol,
        overridden: tol.is_some(),
    };
    Ok((spec, record))
}

fn partition(n: usize, n_a: usize) -> CliResult<Partition> {
    Partition::new(n, n_a).map_err(|e| CliError::Usage(e.to_string()))
}

fn results(b: &EntropyBreakdown) -> Results {
    Results {
        s_a: b.s_a(),
        s_b: b.s_b(),
        s_total: b.s_total(),
        mutual_information: b.mutual_information(),
    }
}

fn inputs(n: Option<usize>, subsystem: Option<usize>, spec: String, spectrum: &Spectrum) -> Inputs {
    Inputs {
        n,
        subsystem,
        fraction: None,
        regime: None,
        spectrum_spec: spec,
        spectrum: spectrum.values().to_vec(),
    }
}

pub fn cmd_exact(args: &ExactArgs) -> CliResult<RunReport> {
    let spectrum = args.spectrum.resolve(Some(args.n))?;
    let p = partition(args.n, args.subsystem)?;
    let (spec, tol) = tolerances(args.tol)?;
    let spread = relative_spread(&spectrum);

    let (breakdown, route, reroutes) = if args.n == 2 && spread > NEAR_DEGENERATE_SPREAD {
        let v = spectrum.values();
        let s_a = two_mode_entropy(v[0], v[1]);
        let b = EntropyBreakdown::new(s_a, s_a, total_entropy(&spectrum));
        (b, "two_mode_closed_form", vec![])
    } else {
        if args.n > MAX_KERNEL_MODES && spread > NEAR_DEGENERATE_SPREAD {
            return Err(CliError::Engine {
                path: PATH_KERNEL,
                source: CoreError::Guard(format!(
                    "N = {} exceeds the limit of {MAX_KERNEL_MODES} modes for non-degenerate spectra; \
                     use `sample` or `asymptotic` instead",
                    args.n
                )),
            });
        }
        let path = if spread <= NEAR_DEGENERATE_SPREAD {
            PATH_JACOBI
        } else {
            PATH_KERNEL
        };
        let r = exact_breakdown_auto(&spectrum, p, &spec).map_err(CliError::engine(path))?;
        match r.route {
            Route::Kernel => (r.breakdown, "kernel_quadrature", vec![]),
            Route::MaximalDegeneracy { y0, spread } => (
                r.breakdown,
                "jacobi_kernel",
                vec![format!(
                    "maximal_degeneracy: y0 = {}, relative spread = {}",
                    number(y0),
                    number(spread)
                )],
            ),
            Route::ClusterSplitting { epsilon } => (
                r.breakdown,
                "cluster_splitting",
                vec![format!(
                    "cluster_splitting: clusters split by {} and half that, Richardson extrapolated",
                    number(epsilon)
                )],
            ),
        }
    };

    Ok(RunReport {
        method: Method::Exact,
        inputs: inputs(
            Some(args.n),
            Some(args.subsystem),
            args.spectrum.to_string(),
            &spectrum,
        ),
        results: results(&breakdown),
        stderr: None,
        asymptotic: None,
        metadata: Metadata {
            seed: None,
            samples: None,
            tolerances: tol,
            route: route.into(),
            reroutes,
        },
    })
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

pub fn cmd_sample(args: &SampleArgs) -> CliResult<RunReport> {
    let spectrum = args.spectrum.resolve(Some(args.n))?;
    let p = partition(args.n, args.subsystem)?;
    if args.samples < 100 {
        return Err(CliError::Usage(format!(
            "--samples must be at least 100, got {}",
            args.samples
        )));
    }
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let workers = args.workers.unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(CliError::Usage("--workers must be positive".into()));
    }
    let est = estimate(&spectrum, p, args.samples, seed, workers)
        .map_err(CliError::engine(PATH_SAMPLER))?;
    let (_, tol) = tolerances(None)?;
    Ok(RunReport {
        method: Method::Mc,
        inputs: inputs(
            Some(args.n),
            Some(args.subsystem),
            args.spectrum.to_string(),
            &spectrum,
        ),
        results: Results {
            s_a: est.s_a.mean,
            s_b: est.s_b.mean,
            s_total: est.s_total,
            mutual_information: est.mutual_information.mean,
        },
        stderr: Some(StandardErrors {
            s_a: est.s_a.stderr,
            s_b: est.s_b.stderr,
            mutual_information: est.mutual_information.stderr,
        }),
        asymptotic: None,
        metadata: Metadata {
            seed: Some(seed),
            samples: Some(args.samples),
            tolerances: tol,
            route: "haar_sampler".into(),
            reroutes: vec![],
        },
    })
}

fn terms(r: &AsymptoticResult, n: Option<usize>) -> AsymptoticTerms {
    AsymptoticTerms {
        volume_term: r.volume_term,
        constant_term: r.constant_term,
        order_note: r.order_note.as_str().into(),
        combined: n.map(|n| r.value_at(n)),
    }
}

/// Spectrum for the asymptotic regimes: `--spectrum`, or `--y` as a
/// degenerate spectrum.
fn asymptotic_spectrum(args: &AsymptoticArgs, n: usize) -> CliResult<(SpectrumSpec, Spectrum)> {
    let spec = match (&args.spectrum, args.y) {
        (Some(s), _) => s.clone(),
        (None, Some(y)) => SpectrumSpec::Degenerate(y),
        (None, None) => {
            return Err(CliError::Usage(
                "one of --spectrum or --y is required".into(),
            ))
        }
    };
    let spectrum = spec.resolve(Some(n))?;
    Ok((spec, spectrum))
}

fn require<T>(value: Option<T>, flag: &str, regime: Regime) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("--regime {} needs {flag}", regime.name())))
}

fn check_fraction(f: f64) -> CliResult<f64> {
    if f.is_finite() && f > 0.0 && f < 1.0 {
        Ok(f)
    } else {
        Err(CliError::Usage(format!(
            "--fraction must lie in (0, 1), got {f}"
        )))
    }
}

pub fn cmd_asymptotic(args: &AsymptoticArgs) -> CliResult<RunReport> {
    let (spec, tol) = tolerances(args.tol)?;
    let mut reroutes = Vec::new();
    let regime = args.regime;

    let (inputs, results, asym, route) = match regime {
        Regime::FiniteA => {
            let n = require(args.n, "--n", regime)?;
            let n_a = require(args.subsystem, "--subsystem", regime)?;
            let (sspec, spectrum) = asymptotic_spectrum(args, n)?;
            let (res, asym) = finite_a(n, n_a, &spectrum, &spec)?;
            (
                inputs(Some(n), Some(n_a), sspec.to_string(), &spectrum),
                res,
                asym,
                "finite_subsystem",
            )
        }
        Regime::Fraction => {
            let n = require(args.n, "--n", regime)?;
            let f = check_fraction(require(args.fraction, "--fraction", regime)?)?;
            let (sspec, spectrum) = asymptotic_spectrum(args, n)?;
            let small = f.min(1.0 - f);
            let mut inp = inputs(Some(n), None, sspec.to_string(), &spectrum);
            inp.fraction = Some(f);
            if small < FRACTION_MARGIN {
                let n_small = (small * n as f64).round() as usize;
                if n_small == 0 {
                    return Err(CliError::Usage(format!(
                        "fraction {f} leaves no mode in the smaller subsystem at N = {n}"
                    )));
                }
                reroutes.push(format!(
                    "fraction within {FRACTION_MARGIN:e} of the boundary: fixed-subsystem expansion with N_A = {n_small}"
                ));
                let (mut res, asym) = finite_a(n, n_small, &spectrum, &spec)?;
                if f > 0.5 {
                    std::mem::swap(&mut res.s_a, &mut res.s_b);
                }
                (inp, res, asym, "finite_subsystem")
            } else {
                let (res, asym) = fraction(n, f, &spectrum, &spec)?;
                (inp, res, asym, "saddle_point")
            }
        }
        Regime::MaxDegenerate => {
            let f = match (args.fraction, args.subsystem, args.n) {
                (Some(f), _, _) => check_fraction(f)?,
                (None, Some(m), Some(n)) if m > 0 && m < n => m as f64 / n as f64,
                _ => {
                    return Err(CliError::Usage(
                        "--regime max-degenerate needs --fraction (or --subsystem with --n)".into(),
                    ))
                }
            };
            let y = match (args.y, &args.spectrum) {
                (Some(y), _) => y,
                (None, Some(SpectrumSpec::Degenerate(y))) => *y,
                _ => {
                    return Err(CliError::Usage(
                        "--regime max-degenerate needs --y or --spectrum degenerate:<y>".into(),
                    ))
                }
            };
            let spectrum = Spectrum::degenerate(args.n.unwrap_or(1), y)
                .map_err(|e| CliError::Usage(format!("invalid singular value: {e}")))?;
            let per_mode = |v: f64| args.n.map_or(v, |n| v * n as f64);
            let s_a = entropy_max_degenerate_limit(f, y).map_err(CliError::engine(PATH_LIMIT))?;
            let s_b =
                entropy_max_degenerate_limit(1.0 - f, y).map_err(CliError::engine(PATH_LIMIT))?;
            let mi =
                mutual_info_max_degenerate_limit(f, y).map_err(CliError::engine(PATH_LIMIT))?;
            let s = entropy_kernel(y).map_err(CliError::engine(PATH_LIMIT))?;
            let res = Results {
                s_a: per_mode(s_a),
                s_b: per_mode(s_b),
                s_total: per_mode(s),
                mutual_information: per_mode(mi),
            };
            let asym = AsymptoticTerms {
                volume_term: s_a,
                constant_term: 0.0,
                order_note: "max_degenerate".into(),
                combined: args.n.map(|n| n as f64 * s_a),
            };
            let mut inp = inputs(
                args.n,
                args.subsystem,
                SpectrumSpec::Degenerate(y).to_string(),
                &spectrum,
            );
            inp.fraction = Some(f);
            (inp, res, asym, "leading_order_per_mode")
        }
    };

    let mut inputs = inputs;
    inputs.regime = Some(regime.name().into());
    Ok(RunReport {
        method: Method::Asymptotic,
        inputs,
        results,
        stderr: None,
        asymptotic: Some(asym),
        metadata: Metadata {
            seed: None,
            samples: None,
            tolerances: tol,
            route: route.into(),
            reroutes,
        },
    })
}

fn finite_a(
    n: usize,
    n_a: usize,
    spectrum: &Spectrum,
    spec: &QuadratureSpec,
) -> CliResult<(Results, AsymptoticTerms)> {
    let engine = CliError::engine(PATH_FINITE_A);
    let r = entropy_a_finite(n, n_a, spectrum).map_err(engine)?;
    let s_b = entropy_b_complement_with(n, n_a, spectrum, spec)
        .map_err(CliError::engine(PATH_FINITE_A))?;
    let mi = mutual_info_finite_a_with(n, n_a, spectrum, spec)
        .map_err(CliError::engine(PATH_FINITE_A))?;
    let res = Results {
        s_a: r.value_at(n),
        s_b,
        s_total: total_entropy(spectrum),
        mutual_information: mi,
    };
    Ok((res, terms(&r, Some(n))))
}

fn fraction(
    n: usize,
    f: f64,
    spectrum: &Spectrum,
    spec: &QuadratureSpec,
) -> CliResult<(Results, AsymptoticTerms)> {
    let run = |g: f64| -> CliResult<AsymptoticResult> {
        let ctx = SaddleContext::new(spectrum, g).map_err(CliError::engine(PATH_FRACTION))?;
        entropy_fraction_with(&ctx, spec).map_err(CliError::engine(PATH_FRACTION))
    };
    let a = run(f)?;
    let b = run(1.0 - f)?;
    let mi =
        mutual_info_fraction_with(spectrum, f, n, spec).map_err(CliError::engine(PATH_FRACTION))?;
    let res = Results {
        s_a: a.value_at(n),
        s_b: b.value_at(n),
        s_total: total_entropy(spectrum),
        mutual_information: mi,
    };
    Ok((res, terms(&a, Some(n))))
}

/// `x,rho` rows of the level density of the `--subsystem` block.
pub fn cmd_density(args: &DensityArgs) -> CliResult<String> {
    if args.grid < 16 {
        return Err(CliError::Usage(format!(
            "--grid must be at least 16, got {}",
            args.grid
        )));
    }
    let spectrum = args.spectrum.resolve(Some(args.n))?;
    let p = partition(args.n, args.subsystem)?;
    let degenerate = relative_spread(&spectrum) <= NEAR_DEGENERATE_SPREAD;
    let regime = args.regime.unwrap_or(if degenerate {
        DensityRegime::Jacobi
    } else {
        DensityRegime::Kernel
    });
    if regime != DensityRegime::Kernel && !degenerate {
        return Err(CliError::Usage(format!(
            "--regime {} needs a degenerate spectrum (relative spread <= {NEAR_DEGENERATE_SPREAD:e})",
            if regime == DensityRegime::Jacobi { "jacobi" } else { "macroscopic" }
        )));
    }
    let y0 = spectrum.values().iter().sum::<f64>() / spectrum.n() as f64;
    let n_small = p.n_a().min(p.n_b());

    let rho: Box<dyn Fn(f64) -> CliResult<f64>> = match regime {
        DensityRegime::Kernel => {
            let ev =
                KernelEvaluator::new(&spectrum, p.n_a()).map_err(CliError::engine(PATH_KERNEL))?;
            Box::new(move |x| ev.level_density(x).map_err(CliError::engine(PATH_KERNEL)))
        }
        DensityRegime::Jacobi => {
            let kernel = JacobiKernel::new(n_small, p.n_a().max(p.n_b()), y0.min(1.0))
                .map_err(CliError::engine(PATH_JACOBI))?;
            if p.n_a() > p.n_b() {
                eprintln!(
                    "note: the block also carries a point mass of weight {} at x = {}, not included in rho",
                    p.n_a() - p.n_b(),
                    number(y0)
                );
            }
            Box::new(move |x| match jacobi_density(&kernel, x) {
                DensityValue::Continuous(v) => Ok(v),
                DensityValue::PointMassAtZero { mass } => Err(CliError::Engine {
                    path: PATH_JACOBI,
                    source: CoreError::Guard(format!(
                        "all singular values vanish; the density is a point mass of weight {} at 0",
                        number(mass)
                    )),
                }),
            })
        }
        DensityRegime::Macroscopic => {
            let g = n_small as f64 / p.n() as f64;
            Box::new(move |x| {
                macroscopic_density(g, y0.min(1.0), x)
                    .map(|v| v * n_small as f64)
                    .map_err(CliError::engine(PATH_MACROSCOPIC))
            })
        }
    };

    let mut out = String::from("x,rho\n");
    for i in 0..args.grid {
        let x = i as f64 / (args.grid - 1) as f64;
        let _ = writeln!(out, "{},{}", number(x), number(rho(x)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_targets() {
        assert_eq!("json".parse(), Ok(ReportTarget::Stdout(Format::Json)));
        assert_eq!("-".parse(), Ok(ReportTarget::Stdout(Format::Json)));
        assert_eq!("csv".parse(), Ok(ReportTarget::Stdout(Format::Csv)));
        assert_eq!(
            "run.CSV".parse(),
            Ok(ReportTarget::File(PathBuf::from("run.CSV"), Format::Csv))
        );
        assert_eq!(
            "out/run.json".parse(),
            Ok(ReportTarget::File(
                PathBuf::from("out/run.json"),
                Format::Json
            ))
        );
    }

    #[test]
    fn tolerance_override_is_recorded() {
        let (spec, t) = tolerances(Some(1e-8)).unwrap();
        assert_eq!((spec.abs_tol, spec.rel_tol), (1e-8, 1e-8));
        assert!(t.overridden);
        assert!(!tolerances(None).unwrap().1.overridden);
        assert!(tolerances(Some(0.0)).is_err());
    }
}
