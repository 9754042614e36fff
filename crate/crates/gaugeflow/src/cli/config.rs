//! Experiment configuration: one TOML file per experiment, seeds mandatory,
//! every run identified by a content hash of its configuration.

use std::path::PathBuf;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SphereFlow,
    ProfileFlow,
    Sobolev,
    Myers,
    Trace,
    Holonomy,
    FibreProbe,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SphereFlow => "sphere_flow",
            ExperimentKind::ProfileFlow => "profile_flow",
            ExperimentKind::Sobolev => "sobolev",
            ExperimentKind::Myers => "myers",
            ExperimentKind::Trace => "trace",
            ExperimentKind::Holonomy => "holonomy",
            ExperimentKind::FibreProbe => "fibre_probe",
        }
    }
}

/// Numeric parameters; which ones are required depends on the experiment
/// and is validated by its runner with field-level messages.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub r0: Option<f64>,
    pub kappa: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub n_psi: Option<usize>,
    pub delta: Option<f64>,
    pub a2: Option<f64>,
    pub a4: Option<f64>,
    pub m: Option<usize>,
    pub trunc: Option<usize>,
    pub alpha: Option<f64>,
    pub alpha_hat: Option<f64>,
    pub b: Option<f64>,
    pub lambda: Option<f64>,
    pub n_terms: Option<usize>,
    pub count: Option<usize>,
    pub level: Option<usize>,
    pub points: Option<usize>,
    pub r: Option<f64>,
    pub flat_radius: Option<f64>,
    pub myers_radii: Option<Vec<f64>>,
    pub cross_check_r: Option<f64>,
    pub divergence_n_psi: Option<usize>,
    pub divergence_n_theta: Option<usize>,
    pub quotient_order: Option<usize>,
    pub refine_n_psi: Option<Vec<usize>>,
    pub r_stop: Option<f64>,
    pub sample_every: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Fixes all randomness of the run.
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub params: Params,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))
    }
}

/// First 12 hex digits of the SHA-256 of the exact configuration bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(12);
    for byte in &digest[..6] {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// A sweep grid: per-parameter value lists applied over a base config.
/// `mode = "product"` (default) takes the cartesian product in sorted key
/// order; `mode = "zip"` pairs the lists index-wise (equal lengths).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub mode: GridMode,
    pub values: toml::value::Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    #[default]
    Product,
    Zip,
}

impl SweepGrid {
    pub fn from_toml(text: &str) -> Result<Self> {
        let grid: SweepGrid =
            toml::from_str(text).map_err(|e| Error::Config(format!("grid parse: {e}")))?;
        if grid.values.is_empty() {
            return Err(Error::Config("grid holds no parameters".into()));
        }
        for (k, v) in &grid.values {
            let ok = matches!(v, toml::Value::Array(a) if !a.is_empty());
            if !ok {
                return Err(Error::Config(format!(
                    "grid parameter {k} must be a nonempty array"
                )));
            }
        }
        Ok(grid)
    }

    /// Expands to assignment rows in deterministic order.
    pub fn rows(&self) -> Result<Vec<Vec<(String, toml::Value)>>> {
        let mut keys: Vec<&String> = self.values.keys().collect();
        keys.sort();
        let lists: Vec<(&String, &Vec<toml::Value>)> = keys
            .iter()
            .map(|k| (*k, self.values[*k].as_array().expect("validated array")))
            .collect();
        match self.mode {
            GridMode::Zip => {
                let len = lists[0].1.len();
                if lists.iter().any(|(_, l)| l.len() != len) {
                    return Err(Error::Config(
                        "zip grid needs equal-length value lists".into(),
                    ));
                }
                Ok((0..len)
                    .map(|i| {
                        lists
                            .iter()
                            .map(|(k, l)| ((*k).clone(), l[i].clone()))
                            .collect()
                    })
                    .collect())
            }
            GridMode::Product => {
                let mut rows: Vec<Vec<(String, toml::Value)>> = vec![Vec::new()];
                for (k, list) in &lists {
                    let mut next = Vec::with_capacity(rows.len() * list.len());
                    for row in &rows {
                        for v in *list {
                            let mut r = row.clone();
                            r.push(((*k).clone(), v.clone()));
                            next.push(r);
                        }
                    }
                    rows = next;
                }
                Ok(rows)
            }
        }
    }
}

/// Applies one grid row onto a copy of the base config's parameter table.
pub fn apply_row(base: &ExperimentConfig, row: &[(String, toml::Value)]) -> Result<ExperimentConfig> {
    // Round-trip through TOML so grid assignments hit the same field
    // validation as hand-written configs.
    let mut params = toml::Value::try_from(ParamsAsToml(&base.params))
        .map_err(|e| Error::Config(format!("params serialize: {e}")))?;
    let table = params.as_table_mut().expect("params serialize to a table");
    for (k, v) in row {
        if k == "seed" {
            continue;
        }
        table.insert(k.clone(), v.clone());
    }
    let params: Params = params
        .try_into()
        .map_err(|e| Error::Config(format!("grid assignment: {e}")))?;
    let seed = row
        .iter()
        .find(|(k, _)| k == "seed")
        .and_then(|(_, v)| v.as_integer())
        .map(|s| s as u64)
        .unwrap_or(base.seed);
    Ok(ExperimentConfig {
        experiment: base.experiment,
        seed,
        output_dir: base.output_dir.clone(),
        params,
    })
}

/// Serialization view of Params that skips unset fields so grid overrides
/// merge onto a minimal table.
struct ParamsAsToml<'a>(&'a Params);

impl serde::Serialize for ParamsAsToml<'_> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let p = self.0;
        let mut map = serializer.serialize_map(None)?;
        macro_rules! put {
            ($field:ident) => {
                if let Some(v) = &p.$field {
                    map.serialize_entry(stringify!($field), v)?;
                }
            };
        }
        put!(r0);
        put!(kappa);
        put!(dt);
        put!(t_end);
        put!(n_psi);
        put!(delta);
        put!(a2);
        put!(a4);
        put!(m);
        put!(trunc);
        put!(alpha);
        put!(alpha_hat);
        put!(b);
        put!(lambda);
        put!(n_terms);
        put!(count);
        put!(level);
        put!(points);
        put!(r);
        put!(flat_radius);
        put!(myers_radii);
        put!(cross_check_r);
        put!(divergence_n_psi);
        put!(divergence_n_theta);
        put!(quotient_order);
        put!(refine_n_psi);
        put!(r_stop);
        put!(sample_every);
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_toml(
            "experiment = \"sphere_flow\"\nseed = 42\n[params]\nr0 = 1.0\ndt = 1e-4\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::SphereFlow);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.params.r0, Some(1.0));
        assert_eq!(cfg.params.kappa, None);
    }

    #[test]
    fn rejects_missing_seed_and_unknown_fields() {
        assert!(ExperimentConfig::from_toml("experiment = \"trace\"\n").is_err());
        assert!(ExperimentConfig::from_toml(
            "experiment = \"trace\"\nseed = 1\nbogus = 3\n"
        )
        .is_err());
        assert!(ExperimentConfig::from_toml(
            "experiment = \"trace\"\nseed = 1\n[params]\nnot_a_param = 3\n"
        )
        .is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"warp\"\nseed = 1\n").is_err());
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let a = config_hash(b"experiment = \"trace\"");
        let b = config_hash(b"experiment = \"trace\"");
        let c = config_hash(b"experiment = \"trace\" ");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 12);
    }

    #[test]
    fn grid_product_and_zip() {
        let grid = SweepGrid::from_toml("[values]\nr0 = [0.5, 0.6]\ndt = [1e-4]\n").unwrap();
        let rows = grid.rows().unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0][0].0, "dt");

        let zip = SweepGrid::from_toml(
            "mode = \"zip\"\n[values]\nlambda = [1.0, 1.0, 2.0]\nb = [2.0, 3.0, 2.5]\n",
        )
        .unwrap();
        let rows = zip.rows().unwrap();
        assert_eq!(rows.len(), 3);

        assert!(SweepGrid::from_toml("[values]\n").is_err());
        assert!(SweepGrid::from_toml("[values]\nr0 = []\n").is_err());
        let bad = SweepGrid::from_toml(
            "mode = \"zip\"\n[values]\nlambda = [1.0]\nb = [2.0, 3.0]\n",
        )
        .unwrap();
        assert!(bad.rows().is_err());
    }

    #[test]
    fn grid_rows_apply_onto_base() {
        let base = ExperimentConfig::from_toml(
            "experiment = \"trace\"\nseed = 9\n[params]\nn_terms = 100\n",
        )
        .unwrap();
        let grid = SweepGrid::from_toml(
            "mode = \"zip\"\n[values]\nlambda = [1.0, 2.0]\nb = [2.0, 2.5]\n",
        )
        .unwrap();
        let rows = grid.rows().unwrap();
        let c0 = apply_row(&base, &rows[0]).unwrap();
        assert_eq!(c0.params.lambda, Some(1.0));
        assert_eq!(c0.params.b, Some(2.0));
        assert_eq!(c0.params.n_terms, Some(100));
        assert_eq!(c0.seed, 9);

        let bad = vec![("n_terms".to_string(), toml::Value::Float(0.5))];
        assert!(apply_row(&base, &bad).is_err());
    }
}
