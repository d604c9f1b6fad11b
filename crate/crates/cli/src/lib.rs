//! Subcommands of the `chordflow` binary: configuration, runs and report
//! files.

pub mod config;
pub mod output;
pub mod svg;

use std::path::{Path, PathBuf};

use chordflow::census::{census_with_limits, sample_chords};
use chordflow::flow::{run, FlowOutcome};
use chordflow::verify::{run_suite, Status, SUITE_NAMES};

use config::RunConfig;
use output::{CensusReport, OutcomeReport, VerifyReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] chordflow::Error),
    #[error("unknown demo '{0}' (valid: {names})", names = DEMOS.iter().map(|d| d.0).collect::<Vec<_>>().join(", "))]
    UnknownDemo(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Error = 1,
    Budget = 2,
}

/// Embedded demo configs and whether they run a flow or a sweep.
pub const DEMOS: &[(&str, DemoKind, &str)] = &[
    ("flat", DemoKind::Flow, include_str!("../demos/flat.json")),
    ("strip", DemoKind::Flow, include_str!("../demos/strip.json")),
    (
        "ellipse-30deg",
        DemoKind::Flow,
        include_str!("../demos/ellipse-30deg.json"),
    ),
    (
        "two-circles",
        DemoKind::Sweep,
        include_str!("../demos/two-circles.json"),
    ),
    ("ellipsoid", DemoKind::Sweep, include_str!("../demos/ellipsoid.json")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoKind {
    Flow,
    Sweep,
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

/// Writes `trajectory.csv`, `outcome.json` and `flow.svg`.
pub fn cmd_flow(config: &RunConfig, out_flag: Option<&Path>) -> Result<Exit, CliError> {
    let m = config.validate()?;
    let initial = config.initial_chord(&m)?;
    let out = config::resolve_out_dir(out_flag, config.output_dir.as_deref());
    create_dir(&out)?;
    let traj = run(&m, initial, &config.flow)?;
    output::write_trajectory_csv(&out.join("trajectory.csv"), &m, &traj.samples)?;
    let init = config.initial.as_ref().expect("checked by initial_chord");
    let report = OutcomeReport::new(&traj.outcome, traj.samples.len(), &config.manifold, init, &config.flow);
    output::write_json(&out.join("outcome.json"), &report)?;
    output::write_text(
        &out.join("flow.svg"),
        &svg::render_flow(&m, &traj.samples, report.t_final),
    )?;
    println!(
        "{} at t = {:.6} (length {:.6e}, residual {:.3e}); wrote {}",
        report.outcome,
        report.t_final,
        report.length,
        report.residual,
        out.display()
    );
    Ok(match traj.outcome {
        FlowOutcome::ShrunkToPoint { .. } | FlowOutcome::ConvergedToOgc { .. } => Exit::Ok,
        FlowOutcome::BudgetExhausted { .. } => Exit::Budget,
        FlowOutcome::StepFailure { t, reason, .. } => {
            eprintln!("error: integrator failure at t = {t}: {reason}");
            Exit::Error
        }
    })
}

/// Writes `census.json`, `census.svg` and, when asked, `limits.csv`.
pub fn cmd_sweep(
    config: &RunConfig,
    out_flag: Option<&Path>,
    jobs: Option<usize>,
    limits: bool,
) -> Result<Exit, CliError> {
    let m = config.validate()?;
    let plan = config.plan();
    let out = config::resolve_out_dir(out_flag, config.output_dir.as_deref());
    create_dir(&out)?;
    let sweep = || -> Result<_, CliError> {
        let chords = sample_chords(&m, &plan)?;
        Ok(census_with_limits(&m, &chords, &plan)?)
    };
    let (census, all_limits) = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Pool(e.to_string()))?
            .install(sweep)?,
        None => sweep()?,
    };
    if limits {
        output::write_limits_csv(&out.join("limits.csv"), m.n, &all_limits)?;
    }
    output::write_text(&out.join("census.svg"), &svg::render_census(&m, &census.clusters))?;
    println!(
        "{} chords: {} distinct orthogonal chords, {} shrank, {} budget exhausted, {} failures; wrote {}",
        census.total,
        census.clusters.len(),
        census.shrink_count,
        census.budget_count,
        census.failure_count,
        out.display()
    );
    for f in &census.failures {
        eprintln!("warning: step failure {f}");
    }
    let report = CensusReport {
        manifold: config.manifold.clone(),
        plan,
        census,
    };
    output::write_json(&out.join("census.json"), &report)?;
    Ok(Exit::Ok)
}

/// Runs one golden suite or `all`, writing `verify_report.json`.
pub fn cmd_verify(suite: &str, out: &Path) -> Result<Exit, CliError> {
    let names: Vec<&str> = if suite == "all" {
        SUITE_NAMES.to_vec()
    } else {
        vec![suite]
    };
    let suites = names.iter().map(|n| run_suite(n)).collect::<Result<Vec<_>, _>>()?;
    for s in &suites {
        for c in &s.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skipped => "skip",
            };
            let residual = c.max_residual.map_or(String::new(), |r| format!(" max {r:.3e}"));
            let order = c.order.map_or(String::new(), |o| format!(" order {o:.3}"));
            println!("{:10} {:32} {status}{residual}{order}", s.suite, c.name);
        }
    }
    let report = VerifyReport {
        passed: suites.iter().all(|s| s.passed()),
        suites,
    };
    create_dir(out)?;
    output::write_json(&out.join("verify_report.json"), &report)?;
    Ok(if report.passed { Exit::Ok } else { Exit::Error })
}

pub fn demo_config(name: &str) -> Result<(DemoKind, RunConfig), CliError> {
    let (_, kind, text) = DEMOS
        .iter()
        .find(|d| d.0 == name)
        .ok_or_else(|| CliError::UnknownDemo(name.to_string()))?;
    Ok((*kind, config::parse_config(text)?))
}

pub fn cmd_demo(name: &str, out_flag: Option<&Path>) -> Result<Exit, CliError> {
    match demo_config(name)? {
        (DemoKind::Flow, c) => cmd_flow(&c, out_flag),
        (DemoKind::Sweep, c) => cmd_sweep(&c, out_flag, None, false),
    }
}
