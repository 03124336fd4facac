//! The `--spectrum` grammar: `degenerate:<y>`, `linspace`, `list:<v1,v2,...>`
//! and `file:<path>`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use fgmi_core::Spectrum;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSpec {
    Degenerate(f64),
    Linspace,
    List(Vec<f64>),
    File(PathBuf),
}

fn parse_value(text: &str) -> Result<f64, String> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("'{}' is not a number", text.trim()))?;
    if !v.is_finite() {
        return Err(format!("'{}' is not finite", text.trim()));
    }
    Ok(v)
}

impl FromStr for SpectrumSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "linspace" {
            return Ok(SpectrumSpec::Linspace);
        }
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("unknown spectrum '{s}'; expected degenerate:<y>, linspace, list:<values> or file:<path>"))?;
        match kind {
            "degenerate" => Ok(SpectrumSpec::Degenerate(parse_value(rest)?)),
            "list" => {
                let values = rest
                    .split(',')
                    .map(parse_value)
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SpectrumSpec::List(values))
            }
            "file" if !rest.is_empty() => Ok(SpectrumSpec::File(PathBuf::from(rest))),
            "file" => Err("file: needs a path".into()),
            _ => Err(format!("unknown spectrum kind '{kind}'")),
        }
    }
}

impl fmt::Display for SpectrumSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumSpec::Degenerate(y) => write!(f, "degenerate:{y}"),
            SpectrumSpec::Linspace => f.write_str("linspace"),
            SpectrumSpec::List(values) => {
                let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "list:{}", parts.join(","))
            }
            SpectrumSpec::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

/// One decimal per line; blank lines and `#` comments are skipped.
pub fn parse_spectrum_file(text: &str) -> Result<Vec<f64>, String> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        values.push(parse_value(content).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(values)
}

impl SpectrumSpec {
    /// Resolves the grammar to concrete values for a system of `n` modes.
    /// `list` and `file` fix the size themselves; `n`, when given, must agree.
    pub fn resolve(&self, n: Option<usize>) -> CliResult<Spectrum> {
        let usage =
            |e: fgmi_core::Error| CliError::Usage(format!("invalid spectrum '{self}': {e}"));
        let need_n = || n.ok_or_else(|| CliError::Usage(format!("spectrum '{self}' needs --n")));
        let spectrum = match self {
            SpectrumSpec::Degenerate(y) => Spectrum::degenerate(need_n()?, *y).map_err(usage)?,
            SpectrumSpec::Linspace => Spectrum::linspace(need_n()?).map_err(usage)?,
            SpectrumSpec::List(values) => Spectrum::new(values.clone()).map_err(usage)?,
            SpectrumSpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
                    path: path.clone(),
                    source,
                })?;
                let values = parse_spectrum_file(&text)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                Spectrum::new(values).map_err(usage)?
            }
        };
        if let Some(n) = n {
            if spectrum.n() != n {
                return Err(CliError::Usage(format!(
                    "spectrum '{self}' has {} values but --n is {n}",
                    spectrum.n()
                )));
            }
        }
        Ok(spectrum)
    }
}
