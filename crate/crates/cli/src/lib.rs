//! Command-line front end: exact, sampled and asymptotic averages of the
//! entanglement entropy and mutual information of random subsystems of a
//! fermionic Gaussian state.

pub mod commands;
pub mod error;
pub mod report;
pub mod spectrum_spec;
pub mod validate;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use commands::{
    cmd_asymptotic, cmd_density, cmd_exact, cmd_sample, AsymptoticArgs, DensityArgs, ExactArgs,
    Format, ReportTarget, SampleArgs,
};
pub use error::{CliError, CliResult, EXIT_INVARIANT, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
pub use report::RunReport;
pub use spectrum_spec::SpectrumSpec;
pub use validate::{cmd_validate, ValidateArgs, Validation};

#[derive(Debug, Parser)]
#[command(
    name = "fgmi",
    version,
    about = "Average entanglement entropy and mutual information of random subsystems of fermionic Gaussian states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact finite-N averages.
    Exact(ExactArgs),
    /// Monte-Carlo averages over Haar-random subsystems.
    Sample(SampleArgs),
    /// Large-N formulas.
    Asymptotic(AsymptoticArgs),
    /// Level density of the subsystem's singular values on a grid.
    Density(DensityArgs),
    /// Error-scaling scan of an asymptotic formula.
    Validate(ValidateArgs),
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn write_stdout(stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|source| CliError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn emit_report(report: &RunReport, target: &ReportTarget, stdout: &mut dyn Write) -> CliResult<()> {
    let text = match target.format() {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv(),
    };
    match target.path() {
        Some(path) => write_file(path, &text),
        None => write_stdout(stdout, &text),
    }
}

/// Runs one subcommand, writing its primary output to `stdout` or to the
/// files named by `--out`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Exact(args) => emit_report(&cmd_exact(args)?, &args.out, stdout),
        Command::Sample(args) => emit_report(&cmd_sample(args)?, &args.out, stdout),
        Command::Asymptotic(args) => emit_report(&cmd_asymptotic(args)?, &args.out, stdout),
        Command::Density(args) => {
            let csv = cmd_density(args)?;
            if args.out == "-" {
                write_stdout(stdout, &csv)
            } else {
                write_file(Path::new(&args.out), &csv)
            }
        }
        Command::Validate(args) => {
            let v = cmd_validate(args)?;
            let csv = v.to_csv();
            let summary = v.summary_json()?;
            if args.out == "-" {
                write_stdout(stdout, &csv)?;
                write_stdout(stdout, &summary)
            } else {
                let dir = Path::new(&args.out);
                std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
                    path: dir.to_path_buf(),
                    source,
                })?;
                let name = args.case.name();
                write_file(&dir.join(format!("{name}.csv")), &csv)?;
                write_file(&dir.join(format!("{name}_summary.json")), &summary)?;
                eprintln!("{name}: {}", v.summary.message);
                Ok(())
            }
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let start = std::time::Instant::now();
    let outcome = run(&cli, stdout);
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
