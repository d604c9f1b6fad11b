//! Files written by the subcommands.

use std::path::Path;

use chordflow::census::{OgcCensus, OgcLimit, SweepPlan};
use chordflow::flow::{FlowOutcome, FlowParams, FlowState};
use chordflow::manifold::{ChartPoint, ManifoldModel, ManifoldSpec};
use chordflow::verify::SuiteReport;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::InitialChord;
use crate::CliError;

/// 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_header(m: &ManifoldModel) -> Vec<String> {
    let mut h = vec!["t".to_string(), "ell".into(), "eta_t_norm_sq".into()];
    h.extend((1..=m.n).map(|i| format!("p_{i}")));
    h.extend((1..=m.n).map(|i| format!("q_{i}")));
    if m.is_planar_domain_boundary {
        h.push("theta_p".into());
        h.push("theta_q".into());
    }
    h
}

pub fn trajectory_row(m: &ManifoldModel, s: &FlowState) -> Vec<String> {
    let mut row = vec![fmt_num(s.t), fmt_num(s.ell), fmt_num(s.eta_t_norm_sq)];
    row.extend(s.chord.jet_p.x.iter().map(|v| fmt_num(*v)));
    row.extend(s.chord.jet_q.x.iter().map(|v| fmt_num(*v)));
    if m.is_planar_domain_boundary {
        let (a, b) = s.theta.as_ref().map_or((f64::NAN, f64::NAN), |th| (th.f0, th.f1));
        row.push(fmt_num(a));
        row.push(fmt_num(b));
    }
    row
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

pub fn write_trajectory_csv(path: &Path, m: &ManifoldModel, samples: &[FlowState]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(trajectory_header(m)).map_err(|e| csv_err(path, e))?;
    for s in samples {
        w.write_record(trajectory_row(m, s)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn write_limits_csv(path: &Path, n: usize, limits: &[OgcLimit]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["index".to_string()];
    header.extend((1..=n).map(|i| format!("p_{i}")));
    header.extend((1..=n).map(|i| format!("q_{i}")));
    header.push("length".into());
    header.push("residual".into());
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (i, l) in limits.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(l.p.iter().chain(&l.q).map(|v| fmt_num(*v)));
        row.push(fmt_num(l.length));
        row.push(fmt_num(l.residual));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Contents of `outcome.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeReport {
    pub outcome: String,
    pub t_final: f64,
    pub length: f64,
    pub residual: f64,
    pub limit_point: Option<Vec<f64>>,
    pub failure: Option<String>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub p_chart: ChartPoint,
    pub q_chart: ChartPoint,
    pub samples: usize,
    pub manifold: ManifoldSpec,
    pub initial: InitialChord,
    pub flow: FlowParams,
}

impl OutcomeReport {
    pub fn new(
        outcome: &FlowOutcome,
        samples: usize,
        manifold: &ManifoldSpec,
        initial: &InitialChord,
        flow: &FlowParams,
    ) -> Self {
        let s = outcome.state();
        let (limit_point, failure) = match outcome {
            FlowOutcome::ShrunkToPoint { limit_point, .. } => (Some(limit_point.as_slice().to_vec()), None),
            FlowOutcome::StepFailure { t, reason, .. } => (None, Some(format!("t = {t}: {reason}"))),
            _ => (None, None),
        };
        let t_final = match outcome {
            FlowOutcome::ShrunkToPoint { t_final, .. } | FlowOutcome::ConvergedToOgc { t_final, .. } => *t_final,
            _ => s.t,
        };
        Self {
            outcome: outcome.kind().to_string(),
            t_final,
            length: s.ell,
            residual: s.residual(),
            limit_point,
            failure,
            p: s.chord.jet_p.x.as_slice().to_vec(),
            q: s.chord.jet_q.x.as_slice().to_vec(),
            p_chart: s.chord.p.clone(),
            q_chart: s.chord.q.clone(),
            samples,
            manifold: manifold.clone(),
            initial: initial.clone(),
            flow: flow.clone(),
        }
    }
}

/// Contents of `census.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusReport {
    pub manifold: ManifoldSpec,
    pub plan: SweepPlan,
    pub census: OgcCensus,
}

/// Contents of `verify_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Reads a report back through the same schema it was written with.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}
