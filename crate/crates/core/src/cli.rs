//! Command-line front end. Exit status: 0 pass, 1 diagnostic or numerical
//! failure, 2 invalid input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::config::Experiment;
use crate::diagnostics::{davie_scaling, defect_scaling, sewing_rate, smooth_limit_check, RateFit};
use crate::error::{invalid, Error, Result};
use crate::flow::solve_flow;
use crate::rough_path::SampledPath;
use crate::selfcheck;
use crate::tensor::NORM_CHOICE;

#[derive(Debug, Parser)]
#[command(
    name = "roughflow",
    version,
    about = "Solution flows of rough differential equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Truncated signature of a piecewise-linear path given as CSV.
    Signature {
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        level: usize,
        /// Write the JSON tensor here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve the flow on the configured grid.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Approximate-flow defect against window length.
    Defect {
        #[arg(long)]
        config: PathBuf,
    },
    /// Distance from the flow against partition mesh.
    Sewing {
        #[arg(long)]
        config: PathBuf,
    },
    /// Flow against the Euler step of the increment, per window length.
    Davie {
        #[arg(long)]
        config: PathBuf,
    },
    /// Flow of a piecewise-linear control against the classical ODE.
    SmoothLimit {
        #[arg(long)]
        config: PathBuf,
    },
    /// Seeded invariant suite.
    Selfcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report here as well as to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

/// Exit status for a finished run.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(Error::Explosion { .. } | Error::NotConverged { .. }) => 1,
        Err(_) => 2,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(out: &mut dyn Write, path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => out
            .write_all(contents.as_bytes())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

pub fn run(command: Command, out: &mut dyn Write) -> Result<Outcome> {
    match command {
        Command::Signature {
            path,
            level,
            output,
        } => signature(&path, level, output.as_deref(), out),
        Command::Solve { config } => solve(&Experiment::load(&config)?, out),
        Command::Defect { config } => {
            let e = Experiment::load(&config)?;
            let a = e.driver.exponent().defect_exponent();
            let fit = defect_scaling(&e.system, &e.driver, e.s, &e.scales(), &e.grid, &e.step)?;
            report_fit(&e, "defect", &fit, a, true, json!({}), out)
        }
        Command::Davie { config } => {
            let e = Experiment::load(&config)?;
            let a = e.driver.exponent().defect_exponent();
            let fit = davie_scaling(
                &e.system,
                &e.driver,
                e.s,
                &e.scales(),
                &e.grid,
                e.config.diagnostics.reference_tol,
                &e.step,
            )?;
            report_fit(&e, "davie", &fit, a, true, json!({}), out)
        }
        Command::Sewing { config } => {
            let e = Experiment::load(&config)?;
            let a = e.driver.exponent().defect_exponent();
            let rep = sewing_rate(
                &e.system,
                &e.driver,
                e.s,
                e.t,
                &e.grid,
                &e.config.diagnostics.depths,
                &e.step,
            )?;
            let extra = json!({
                "reference_depth": rep.reference_depth,
                "reference_gap": rep.reference_gap,
                "reference_ok": rep.reference_ok,
            });
            let ok = rep.reference_ok && rep.fit.is_monotone();
            report_fit(&e, "sewing", &rep.fit, a - 1.0, ok, extra, out)
        }
        Command::SmoothLimit { config } => smooth_limit(&Experiment::load(&config)?, out),
        Command::Selfcheck { seed, output } => {
            let report = selfcheck::run(seed)?;
            let text = report.render();
            if let Some(p) = output {
                write_file(&p, &text)?;
            }
            emit(out, None, &text)?;
            Ok(if report.passed() {
                Outcome::Pass
            } else {
                Outcome::Fail
            })
        }
    }
}

fn signature(
    path: &Path,
    level: usize,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Outcome> {
    if level == 0 {
        return Err(invalid("--level must be at least 1"));
    }
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let samples = SampledPath::from_csv(file)?;
    let sig = samples.signature(samples.start(), samples.end(), level)?;
    let mut v = sig.as_tensor().to_json();
    v["meta"] = json!({
        "norm_choice": NORM_CHOICE,
        "level": level,
        "path": path.display().to_string(),
        "start": samples.start(),
        "end": samples.end(),
    });
    emit(out, output, &pretty(&v))?;
    Ok(Outcome::Pass)
}

fn solve(e: &Experiment, out: &mut dyn Write) -> Result<Outcome> {
    let sol = solve_flow(
        &e.system,
        &e.driver,
        e.s,
        e.t,
        &e.grid,
        e.config.tol,
        &e.step,
    )?;
    let mut header = e.header_lines();
    header.push(format!("mesh={:e}", sol.mesh));
    header.push(format!("cauchy_gap={:e}", sol.cauchy_gap));
    emit(out, e.csv.as_deref(), &sol.to_csv(&header))?;
    let mut side = sol.sidecar(e.p());
    side["meta"] = e.metadata();
    let json_path = e
        .json
        .clone()
        .or_else(|| e.csv.as_ref().map(|c| c.with_extension("json")));
    emit(out, json_path.as_deref(), &pretty(&side))?;
    Ok(Outcome::Pass)
}

#[allow(clippy::too_many_arguments)]
fn report_fit(
    e: &Experiment,
    name: &str,
    fit: &RateFit,
    exponent: f64,
    extra_ok: bool,
    extra: Value,
    out: &mut dyn Write,
) -> Result<Outcome> {
    let bound = exponent - e.config.diagnostics.slope_tolerance;
    let mut header = e.header_lines();
    header.push(format!("diagnostic={name}"));
    emit(out, e.csv.as_deref(), &fit.to_csv(&header))?;
    let mut summary = fit.summary(exponent, bound);
    let pass = fit.passes(bound) && extra_ok;
    summary["pass"] = Value::Bool(pass);
    summary["diagnostic"] = Value::from(name);
    summary["details"] = extra;
    summary["meta"] = e.metadata();
    emit(out, e.json.as_deref(), &pretty(&summary))?;
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

fn smooth_limit(e: &Experiment, out: &mut dyn Write) -> Result<Outcome> {
    let control = e
        .control
        .as_ref()
        .ok_or_else(|| invalid("driver: smooth-limit needs a pwl_lift driver"))?;
    let err = smooth_limit_check(&e.system, control, e.p(), &e.grid, e.config.tol, &e.step)?;
    let threshold = e.config.diagnostics.smooth_threshold;
    let summary = json!({
        "diagnostic": "smooth_limit",
        "error": err,
        "threshold": threshold,
        "pass": err <= threshold,
        "meta": e.metadata(),
    });
    emit(out, e.json.as_deref(), &pretty(&summary))?;
    Ok(if err <= threshold {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}
