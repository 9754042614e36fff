//! Run reports: one named check per row, serialized as CSV with 17
//! significant digits so reports are bit-stable across runs of the same
//! (config, seed, build).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckRow {
    /// A check that passes when `value <= bound`.
    pub fn le(name: impl Into<String>, value: f64, bound: f64) -> Self {
        CheckRow {
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
        }
    }

    /// A check that passes when `value >= bound`.
    pub fn ge(name: impl Into<String>, value: f64, bound: f64) -> Self {
        CheckRow {
            name: name.into(),
            value,
            bound,
            pass: value >= bound,
        }
    }

    /// A check whose pass flag was decided by the caller; `bound` is
    /// reported for context only.
    pub fn flag(name: impl Into<String>, value: f64, bound: f64, pass: bool) -> Self {
        CheckRow {
            name: name.into(),
            value,
            bound,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub experiment: &'static str,
    pub config_hash: String,
    pub checks: Vec<CheckRow>,
    /// Wall time of the run; excluded from report identity.
    pub wall_ms: u128,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// CSV form. Everything above the wall-time comment is normative:
    /// it must be byte-identical for identical (config, seed, build).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# experiment,{}\n", self.experiment));
        out.push_str(&format!("# config_hash,{}\n", self.config_hash));
        out.push_str("name,value,bound,pass\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{}\n",
                c.name, c.value, c.bound, c.pass
            ));
        }
        out.push_str(&format!("# wall_ms,{}\n", self.wall_ms));
        out
    }

    /// The normative prefix of the CSV: all lines except the wall-time
    /// comment. Two reports of the same run must agree on this exactly.
    pub fn normative_csv(&self) -> String {
        let csv = self.to_csv();
        match csv.rfind("# wall_ms,") {
            Some(idx) => csv[..idx].to_string(),
            None => csv,
        }
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut experiment: Option<&'static str> = None;
        let mut config_hash = None;
        let mut wall_ms = 0;
        let mut checks = Vec::new();
        let mut saw_header = false;
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# ") {
                let (key, value) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::Config(format!("bad report comment: {line}")))?;
                match key {
                    "experiment" => {
                        experiment = Some(experiment_name(value)?);
                    }
                    "config_hash" => config_hash = Some(value.to_string()),
                    "wall_ms" => {
                        wall_ms = value
                            .parse()
                            .map_err(|_| Error::Config(format!("bad wall_ms: {value}")))?;
                    }
                    _ => return Err(Error::Config(format!("unknown report comment: {key}"))),
                }
                continue;
            }
            if line == "name,value,bound,pass" {
                saw_header = true;
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Config(format!("bad report row: {line}")));
            }
            let value: f64 = fields[1]
                .parse()
                .map_err(|_| Error::Config(format!("bad value: {}", fields[1])))?;
            let bound: f64 = fields[2]
                .parse()
                .map_err(|_| Error::Config(format!("bad bound: {}", fields[2])))?;
            let pass = match fields[3] {
                "true" => true,
                "false" => false,
                other => return Err(Error::Config(format!("bad pass flag: {other}"))),
            };
            checks.push(CheckRow {
                name: fields[0].to_string(),
                value,
                bound,
                pass,
            });
        }
        if !saw_header {
            return Err(Error::Config("report lacks a header row".into()));
        }
        Ok(RunReport {
            experiment: experiment.ok_or_else(|| Error::Config("report lacks experiment".into()))?,
            config_hash: config_hash.ok_or_else(|| Error::Config("report lacks config_hash".into()))?,
            checks,
            wall_ms,
        })
    }
}

fn experiment_name(name: &str) -> Result<&'static str> {
    for known in [
        "sphere_flow",
        "profile_flow",
        "sobolev",
        "myers",
        "trace",
        "holonomy",
        "fibre_probe",
    ] {
        if name == known {
            return Ok(known);
        }
    }
    Err(Error::Config(format!("unknown experiment in report: {name}")))
}

/// A generic CSV table for auxiliary artifacts (trajectories, convergence
/// studies). Same 17-significant-digit discipline as reports.
pub fn table_csv(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
