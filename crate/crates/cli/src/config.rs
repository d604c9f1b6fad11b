//! Run configuration: loading, schema validation and output directory
//! resolution.

use std::path::{Path, PathBuf};

use chordflow::census::SweepPlan;
use chordflow::chord::{make_chord, Chord};
use chordflow::flow::FlowParams;
use chordflow::manifold::{ChartPoint, ManifoldModel, ManifoldSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "CHORDFLOW_OUT";
pub const DEFAULT_OUT: &str = "out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialChord {
    pub p: ChartPoint,
    pub q: ChartPoint,
}

/// Sweep settings; the flow parameters come from the enclosing config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub resolution: Vec<usize>,
    pub min_length_fraction: f64,
    pub dedupe_tol: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        let plan = SweepPlan::default();
        Self {
            resolution: plan.resolution,
            min_length_fraction: plan.min_length_fraction,
            dedupe_tol: plan.dedupe_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: ManifoldSpec,
    #[serde(default)]
    pub initial: Option<InitialChord>,
    #[serde(default)]
    pub flow: FlowParams,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn plan(&self) -> SweepPlan {
        SweepPlan {
            resolution: self.sweep.resolution.clone(),
            min_length_fraction: self.sweep.min_length_fraction,
            dedupe_tol: self.sweep.dedupe_tol,
            flow: self.flow.clone(),
        }
    }

    /// Builds the manifold and checks every section, reporting the JSON
    /// path of the offending field where one can be named.
    pub fn validate(&self) -> Result<ManifoldModel, CliError> {
        let m = ManifoldModel::from_spec(&self.manifold).map_err(|e| schema("manifold", e))?;
        self.flow
            .validate()
            .map_err(|e| schema(&field_path("flow", &e.to_string()), e))?;
        self.plan().validate(m.k).map_err(|e| schema("sweep", e))?;
        if let Some(init) = &self.initial {
            for (name, pt) in [("initial.p", &init.p), ("initial.q", &init.q)] {
                if pt.chart >= m.charts.len() || pt.coords.len() != m.k {
                    return Err(CliError::Schema {
                        path: name.into(),
                        message: format!(
                            "expected a chart index below {} and {} coordinates",
                            m.charts.len(),
                            m.k
                        ),
                    });
                }
            }
        }
        Ok(m)
    }

    pub fn initial_chord(&self, m: &ManifoldModel) -> Result<Chord, CliError> {
        let init = self.initial.as_ref().ok_or_else(|| CliError::Schema {
            path: "initial".into(),
            message: "a flow run needs an initial chord".into(),
        })?;
        make_chord(m, init.p.clone(), init.q.clone()).map_err(|e| schema("initial", e))
    }
}

fn schema(path: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Schema {
        path: path.into(),
        message: e.to_string(),
    }
}

/// `flow.<key>` when the message names a flow parameter, else `flow`.
fn field_path(section: &str, message: &str) -> String {
    let keys = serde_json::to_value(FlowParams::default()).expect("params serialize");
    let first = message
        .trim_start_matches("invalid parameters: ")
        .split_whitespace()
        .next()
        .unwrap_or("");
    match keys.as_object() {
        Some(obj) if obj.contains_key(first) => format!("{section}.{first}"),
        _ => section.to_string(),
    }
}

/// Parses a config from JSON text; type and unknown-key errors carry the
/// JSON path where they occurred.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config(&text)
}

/// Flag, then config file, then the environment, then `out`.
pub fn resolve_out_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    flag.or(config)
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"manifold": {"kind": "builtin", "name": "circle", "params": {}}}"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.flow, FlowParams::default());
        assert_eq!(c.sweep, SweepSettings::default());
        assert!(c.initial.is_none());
        c.validate().unwrap();
    }

    #[test]
    fn unknown_key_reports_path() {
        let text = r#"{"manifold": {"kind": "builtin", "name": "circle", "params": {}},
                       "flow": {"t_maxx": 3}}"#;
        match parse_config(text) {
            Err(CliError::Schema { path, message }) => {
                assert_eq!(path, "flow.t_maxx");
                assert!(message.contains("t_maxx"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_type_reports_path() {
        let text = r#"{"manifold": {"kind": "builtin", "name": "circle", "params": {}},
                       "flow": {"t_max": "long"}}"#;
        match parse_config(text) {
            Err(CliError::Schema { path, .. }) => assert_eq!(path, "flow.t_max"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_t_max_is_a_schema_error() {
        let text = r#"{"manifold": {"kind": "builtin", "name": "circle", "params": {}},
                       "flow": {"t_max": -1}}"#;
        match parse_config(text).unwrap().validate() {
            Err(CliError::Schema { path, message }) => {
                assert_eq!(path, "flow.t_max");
                assert!(message.contains("t_max must be positive"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn initial_chord_shape_is_checked() {
        let text = r#"{"manifold": {"kind": "builtin", "name": "circle", "params": {}},
                       "initial": {"p": {"chart": 0, "coords": [0.0, 1.0]},
                                   "q": {"chart": 0, "coords": [1.0]}}}"#;
        match parse_config(text).unwrap().validate() {
            Err(CliError::Schema { path, .. }) => assert_eq!(path, "initial.p"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_dir_precedence() {
        let flag = Path::new("from-flag");
        let file = Path::new("from-file");
        assert_eq!(resolve_out_dir(Some(flag), Some(file)), flag);
        assert_eq!(resolve_out_dir(None, Some(file)), file);
    }
}
