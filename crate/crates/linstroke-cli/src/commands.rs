//! Subcommand execution: load and validate the config, run the library
//! operation, write the requested artifacts and build the one-line
//! machine-readable summary.
//!
//! Exit codes: 0 success, 1 config or invocation error, 2 numerical
//! failure, 3 non-convergence of the search.

use crate::config::{config_key_for, RunConfig};
use crate::csv;
use crate::plot::{render_plot, PlotKind, Series};
use linstroke::dynamics::simulate_stroke;
use linstroke::error::EngineError;
use linstroke::optimizer::{
    calibrate_xm, optimize_bore_scale, sweep, CalibrationResult, OptimizationStatus, Strategy,
};
use std::fmt::Write as _;
use std::path::Path;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

/// A finished command: the summary line for stdout and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CmdOutcome {
    pub summary: String,
    pub exit_code: i32,
}

/// A failed command: the message goes to stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct CmdError {
    pub message: String,
    pub exit_code: i32,
}

impl CmdError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit_code: EXIT_CONFIG,
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit_code: EXIT_NUMERICAL,
        }
    }
}

fn from_engine(e: EngineError) -> CmdError {
    match &e {
        EngineError::InvalidParam { name, reason, value } => CmdError::config(format!(
            "invalid `{}` = {}: {}",
            config_key_for(name),
            value,
            reason
        )),
        _ => CmdError::numerical(e.to_string()),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::config(format!("cannot read config {}: {e}", path.display())))?;
    RunConfig::parse(&text)
        .map_err(|e| CmdError::config(format!("config {}: {e}", path.display())))
}

fn write_artifact(path: &Path, content: &str) -> Result<(), CmdError> {
    std::fs::write(path, content)
        .map_err(|e| CmdError::config(format!("cannot write {}: {e}", path.display())))
}

pub fn run_simulate(
    config_path: &Path,
    lambda: Option<f64>,
    out: Option<&Path>,
    plot: Option<&Path>,
) -> Result<CmdOutcome, CmdError> {
    let cfg = load_config(config_path)?;
    let lambda = lambda.or(cfg.lambda).ok_or_else(|| {
        CmdError::config("`lambda` is required for simulate: set it in the config or pass --lambda")
    })?;
    let params = cfg.engine_params(lambda);
    params.validate().map_err(from_engine)?;
    let result = simulate_stroke(&params, &cfg.integrator_config()).map_err(from_engine)?;

    if let Some(path) = out {
        write_artifact(path, &csv::trajectory_csv(&result.trajectory))?;
    }
    if let Some(path) = plot {
        let samples = &result.trajectory.samples;
        let series = [
            Series {
                label: "x [m]".into(),
                points: samples.iter().map(|s| (s.t, s.x)).collect(),
            },
            Series {
                label: "v [m/s]".into(),
                points: samples.iter().map(|s| (s.t, s.v)).collect(),
            },
        ];
        let svg = render_plot(&series, PlotKind::Trajectory)
            .map_err(|e| CmdError::config(e.to_string()))?;
        write_artifact(path, &svg)?;
    }

    Ok(CmdOutcome {
        summary: format!(
            "command=simulate lambda={} termination={} x_max={} t_peak={} samples={}",
            lambda,
            result.termination.as_str(),
            result.x_max,
            result.t_peak,
            result.trajectory.samples.len()
        ),
        exit_code: EXIT_OK,
    })
}

pub fn run_optimize(
    config_path: &Path,
    strategy: Strategy,
    out: Option<&Path>,
    plot: Option<&Path>,
) -> Result<CmdOutcome, CmdError> {
    let cfg = load_config(config_path)?;
    let params = cfg.engine_params(cfg.lambda.unwrap_or(1.0));
    let result = optimize_bore_scale(
        &params,
        &cfg.search_config(),
        &cfg.integrator_config(),
        strategy,
    )
    .map_err(from_engine)?;

    if let Some(path) = out {
        write_artifact(path, &csv::trace_csv(&result.trace))?;
    }
    if let Some(path) = plot {
        let series = [
            Series {
                label: "x_max [m]".into(),
                points: result
                    .trace
                    .iter()
                    .map(|r| (r.j as f64, r.x_max))
                    .collect(),
            },
            Series {
                label: "lambda".into(),
                points: result
                    .trace
                    .iter()
                    .map(|r| (r.j as f64, r.lambda))
                    .collect(),
            },
        ];
        let svg =
            render_plot(&series, PlotKind::Trace).map_err(|e| CmdError::config(e.to_string()))?;
        write_artifact(path, &svg)?;
    }

    let exit_code = if result.status == OptimizationStatus::Converged {
        EXIT_OK
    } else {
        EXIT_NON_CONVERGENCE
    };
    Ok(CmdOutcome {
        summary: format!(
            "command=optimize strategy={} status={} lambda_star={} x_max_star={} j_star={} iterations={}",
            strategy.as_str(),
            result.status.as_str(),
            result.lambda_star,
            result.x_max_star,
            (result.x_max_star - params.x_s).abs(),
            result.iterations()
        ),
        exit_code,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn run_sweep(
    config_path: &Path,
    from: Option<f64>,
    to: Option<f64>,
    points: Option<usize>,
    strategy: Strategy,
    out: Option<&Path>,
    plot: Option<&Path>,
) -> Result<CmdOutcome, CmdError> {
    let cfg = load_config(config_path)?;
    let from = from.unwrap_or(cfg.lambda_min);
    let to = to.unwrap_or(cfg.lambda_max);
    let points = points.unwrap_or(101);
    let params = cfg.engine_params(cfg.lambda.unwrap_or(1.0));
    let result = sweep(&params, from, to, points, strategy, &cfg.integrator_config())
        .map_err(from_engine)?;

    if let Some(path) = out {
        write_artifact(path, &csv::sweep_csv(&result.rows))?;
    }
    if let Some(path) = plot {
        let series = [Series {
            label: "x_max [m]".into(),
            points: result.rows.iter().map(|r| (r.lambda, r.x_max)).collect(),
        }];
        let svg =
            render_plot(&series, PlotKind::Sweep).map_err(|e| CmdError::config(e.to_string()))?;
        write_artifact(path, &svg)?;
    }

    let best = result.argmin();
    Ok(CmdOutcome {
        summary: format!(
            "command=sweep strategy={} from={} to={} points={} argmin_lambda={} argmin_x_max={} argmin_j={}",
            strategy.as_str(),
            from,
            to,
            points,
            best.lambda,
            best.x_max,
            best.j_value
        ),
        exit_code: EXIT_OK,
    })
}

pub fn run_calibrate(
    config_path: &Path,
    target_lambda: Option<f64>,
    from: Option<f64>,
    to: Option<f64>,
    out: Option<&Path>,
) -> Result<CmdOutcome, CmdError> {
    let cfg = load_config(config_path)?;
    let target = target_lambda.unwrap_or(1.461);
    let xm_lo = from.unwrap_or(1.1 * cfg.x_s_m);
    let xm_hi = to.unwrap_or((10.0 * cfg.x_s_m).max(1.0));
    let params = cfg.engine_params(cfg.lambda.unwrap_or(1.0));
    let result = calibrate_xm(
        &params,
        &cfg.search_config(),
        &cfg.integrator_config(),
        target,
        xm_lo,
        xm_hi,
    )
    .map_err(from_engine)?;

    if let Some(path) = out {
        write_artifact(path, &calibration_report(&cfg, target, xm_lo, xm_hi, &result))?;
    }

    Ok(CmdOutcome {
        summary: format!(
            "command=calibrate status={} target={} x_m={} lambda_star={} residual={}",
            result.status.as_str(),
            target,
            result.x_m,
            result.lambda_star,
            result.residual
        ),
        exit_code: EXIT_OK,
    })
}

/// Deterministic markdown report of one calibration run.
pub fn calibration_report(
    cfg: &RunConfig,
    target: f64,
    xm_lo: f64,
    xm_hi: f64,
    result: &CalibrationResult,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Bore-scale calibration report");
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "Finds the stroke limit `x_m` at which the identified kickback bore \
         scale `lambda*` equals the target. `lambda*(x_m)` is identified with \
         the energy strategy at tightened tolerances; the slider mass is \
         pinned to 1 kg because the stroke peak does not depend on it."
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "## Inputs");
    let _ = writeln!(s);
    let _ = writeln!(s, "| key | value |");
    let _ = writeln!(s, "|-----|-------|");
    let _ = writeln!(s, "| p1_left_pa | {} |", cfg.p1_left_pa);
    let _ = writeln!(s, "| p1_right_pa | {} |", cfg.p1_right_pa);
    let _ = writeln!(s, "| q_in_joule | {} |", cfg.q_in_joule);
    let _ = writeln!(s, "| x_s_m | {} |", cfg.x_s_m);
    let _ = writeln!(s, "| bore_left_m | {} |", cfg.bore_left_m);
    let _ = writeln!(s, "| friction_n | {} |", cfg.friction_n);
    let _ = writeln!(s, "| polytropic_n | {} |", cfg.polytropic_n);
    let _ = writeln!(s, "| target lambda | {target} |");
    let _ = writeln!(s, "| x_m range [m] | {xm_lo} .. {xm_hi} |");
    let _ = writeln!(s);
    let _ = writeln!(s, "## Identified bore scale over the x_m scan");
    let _ = writeln!(s);
    let _ = writeln!(s, "| x_m [m] | lambda* |");
    let _ = writeln!(s, "|---------|---------|");
    for (x_m, lambda) in &result.scan {
        let _ = writeln!(s, "| {x_m} | {lambda} |");
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "## Outcome");
    let _ = writeln!(s);
    let _ = writeln!(s, "- status: {}", result.status.as_str());
    let _ = writeln!(s, "- x_m: {} m", result.x_m);
    let _ = writeln!(s, "- lambda*: {}", result.lambda_star);
    let _ = writeln!(s, "- residual (lambda* - target): {}", result.residual);
    let _ = writeln!(s);
    match result.status {
        linstroke::optimizer::CalibrationStatus::Attained => {
            let _ = writeln!(
                s,
                "The scan bracketed the target and the bisection closed to \
                 within 1e-3 of it at the x_m above."
            );
        }
        linstroke::optimizer::CalibrationStatus::NotAttainable => {
            let area = std::f64::consts::PI * cfg.bore_left_m * cfg.bore_left_m / 4.0;
            let asym_sq = (cfg.p1_left_pa * area - cfg.friction_n) / (cfg.p1_right_pa * area);
            let _ = writeln!(
                s,
                "No scan interval brackets the target; the closest identified \
                 bore scale and its residual are listed above."
            );
            if asym_sq > 0.0 {
                let _ = writeln!(
                    s,
                    "As x_m grows, lambda* approaches \
                     sqrt((p1_left_pa·A − friction_n)/(p1_right_pa·A)) = {}, \
                     which bounds what any stroke limit in this model can reach.",
                    asym_sq.sqrt()
                );
            }
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "## Kickback bore at the target scale");
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "b_r = {target} × {} m = {} m.",
        cfg.bore_left_m,
        target * cfg.bore_left_m
    );
    s
}
