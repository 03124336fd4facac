//! Machine-readable results. Field order in the structs is the key order of
//! the emitted JSON; every key is always present (absent values are `null`).

use serde::{Deserialize, Serialize};

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Mc,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub n: Option<usize>,
    pub subsystem: Option<usize>,
    pub fraction: Option<f64>,
    pub regime: Option<String>,
    pub spectrum_spec: String,
    /// Resolved singular values, ascending.
    pub spectrum: Vec<f64>,
}

/// Averages in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub s_a: f64,
    pub s_b: f64,
    pub s_total: f64,
    pub mutual_information: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub s_a: f64,
    pub s_b: f64,
    pub mutual_information: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTerms {
    pub volume_term: f64,
    pub constant_term: f64,
    pub order_note: String,
    /// `volume_term * N + constant_term` when `N` is known.
    pub combined: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
    pub overridden: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tolerances: Tolerances,
    pub route: String,
    pub reroutes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub inputs: Inputs,
    pub results: Results,
    pub stderr: Option<StandardErrors>,
    pub asymptotic: Option<AsymptoticTerms>,
    pub metadata: Metadata,
}

/// Decimal text that parses back to the same `f64`.
pub fn number(v: f64) -> String {
    format!("{v:?}")
}

impl RunReport {
    pub fn to_json(&self) -> CliResult<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// `quantity,value,stderr` rows; `stderr` is empty for deterministic values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,value,stderr\n");
        let se = self.stderr;
        let mut row = |name: &str, value: f64, err: Option<f64>| {
            let err = err.map(number).unwrap_or_default();
            out.push_str(&format!("{name},{},{err}\n", number(value)));
        };
        row("s_a", self.results.s_a, se.map(|e| e.s_a));
        row("s_b", self.results.s_b, se.map(|e| e.s_b));
        row("s_total", self.results.s_total, se.map(|_| 0.0));
        row(
            "mutual_information",
            self.results.mutual_information,
            se.map(|e| e.mutual_information),
        );
        if let Some(a) = &self.asymptotic {
            row("volume_term", a.volume_term, None);
            row("constant_term", a.constant_term, None);
            if let Some(c) = a.combined {
                row("combined", c, None);
            }
        }
        out
    }
}
