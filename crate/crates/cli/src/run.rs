//! Task execution and output writing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anosov_core::cert::{certified_delta_threshold, certify};
use anosov_core::kernels::match_epsilon;
use anosov_core::operator::Assembler;
use anosov_core::stats::{lambda_curve, rate_function_from, srb_density, variance_from_operator, TwistedSpectrum};
use anosov_core::ulam::{box_averages, build_ulam, ulam_srb, ulam_variance_from};
use anosov_core::{io, Error, C64};
use serde_json::{json, Value};

use crate::config::{RunConfig, Scheme, Settings, Task};

const CONFIG_ERROR: u8 = 1;
const NUMERICAL_ERROR: u8 = 2;

/// Errors that stem from what the user asked for rather than from the
/// numerics.
fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidGrid(_)
            | Error::InvalidParameter(_)
            | Error::MemoryGuard { .. }
            | Error::UnderResolved { .. }
            | Error::DimensionMismatch { .. }
            | Error::Io(_)
    )
}

struct Outcome {
    results: Value,
    artifacts: Vec<PathBuf>,
}

struct Ctx<'a> {
    settings: &'a Settings,
    hash: String,
}

impl Ctx<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.settings.out_dir.join(name)
    }

    fn csv(&self, name: &str, header: &str, rows: impl Iterator<Item = String>) -> Result<PathBuf, Error> {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "# config_hash={}", self.hash)?;
        writeln!(w, "{header}")?;
        for row in rows {
            writeln!(w, "{row}")?;
        }
        w.flush()?;
        Ok(path)
    }

    fn grid(&self, name: &str, side: usize, values: &[f64]) -> Result<PathBuf, Error> {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path)?);
        io::write_grid_real(&mut w, side, side, values)?;
        w.flush()?;
        Ok(path)
    }

    /// Kernel for the Fourier schemes plus the matching record, if any.
    fn kernel(&self) -> Result<(anosov_core::KernelSpec, Value), Error> {
        let s = self.settings;
        if s.scheme == Scheme::Bump && s.epsilon.is_none() {
            let m = match_epsilon::<f64>(&grid_of(s)?)?;
            Ok((s.kernel(Some(m.epsilon)), serde_json::to_value(m).unwrap_or(Value::Null)))
        } else {
            Ok((s.kernel(None), Value::Null))
        }
    }
}

fn grid_of(s: &Settings) -> Result<anosov_core::GridSpec, Error> {
    s.grid().map_err(|e| Error::InvalidParameter(e.0))
}

fn cfg_err(e: crate::config::ConfigError) -> Error {
    Error::InvalidParameter(e.0)
}

fn run_certify(ctx: &Ctx) -> Result<Outcome, Error> {
    let s = ctx.settings;
    let report = certify(s.delta, s.alpha);
    let threshold = certified_delta_threshold(s.alpha).ok();
    Ok(Outcome {
        results: json!({
            "report": report,
            "certified_delta_threshold": threshold,
        }),
        artifacts: vec![],
    })
}

fn run_srb(ctx: &Ctx) -> Result<Outcome, Error> {
    let s = ctx.settings;
    let grid = grid_of(s)?;
    let map = s.map_model().map_err(cfg_err)?;
    let g = s.observable().map_err(cfg_err)?;
    let (kernel, matched) = ctx.kernel()?;
    let m0 = Assembler::new(&map, &kernel, &g, &grid)?
        .labelled(map.label())
        .assemble(C64::new(0.0, 0.0))?;
    let d = srb_density(&m0, &grid)?;
    let path = ctx.grid("srb_density.grid", grid.fine, &d.values)?;
    Ok(Outcome {
        results: json!({
            "kernel": kernel.label(),
            "epsilon_match": matched,
            "lambda": [d.eigen.lambda.re, d.eigen.lambda.im],
            "eigen_residual": d.eigen.residual,
            "eigen_method": d.eigen.method,
            "mass": d.mass(),
            "max_abs_imag": d.max_abs_imag,
        }),
        artifacts: vec![path],
    })
}

fn run_variance(ctx: &Ctx) -> Result<Outcome, Error> {
    let s = ctx.settings;
    let grid = grid_of(s)?;
    let map = s.map_model().map_err(cfg_err)?;
    let g = s.observable().map_err(cfg_err)?;
    let (kernel, matched) = ctx.kernel()?;
    let m0 = Assembler::new(&map, &kernel, &g, &grid)?
        .labelled(map.label())
        .assemble(C64::new(0.0, 0.0))?;
    let v = variance_from_operator(&m0, &g, &grid)?;
    Ok(Outcome {
        results: json!({
            "sigma2": v.sigma2,
            "mean_shift": v.mean_shift,
            "solve_residual": v.solve_residual,
            "condition_estimate": v.condition_estimate,
            "lambda": v.lambda,
            "eigen_residual": v.eigen_residual,
            "max_density_imag": v.max_density_imag,
            "kernel": v.kernel,
            "epsilon_match": matched,
        }),
        artifacts: vec![],
    })
}

fn run_rate(ctx: &Ctx) -> Result<Outcome, Error> {
    let s = ctx.settings;
    let grid = grid_of(s)?;
    let map = s.map_model().map_err(cfg_err)?;
    let g = s.observable().map_err(cfg_err)?;
    let (kernel, matched) = ctx.kernel()?;
    let spec = TwistedSpectrum::new(&map, &kernel, &g, &grid)?;
    let table = rate_function_from(&spec, &s.s_grid, s.z_bracket)?;
    let path = ctx.csv(
        "rate_table.csv",
        "s,z_star,r,iterations,boundary_flag",
        table
            .rows
            .iter()
            .map(|r| format!("{},{},{},{},{}", r.s, r.z_star, r.r, r.iterations, r.at_bracket_boundary as u8)),
    )?;
    Ok(Outcome {
        results: json!({
            "kernel": kernel.label(),
            "epsilon_match": matched,
            "table": table,
        }),
        artifacts: vec![path],
    })
}

fn run_lambda_curve(ctx: &Ctx) -> Result<Outcome, Error> {
    let s = ctx.settings;
    let grid = grid_of(s)?;
    let map = s.map_model().map_err(cfg_err)?;
    let g = s.observable().map_err(cfg_err)?;
    let (kernel, matched) = ctx.kernel()?;
    let curve = lambda_curve(&map, &kernel, &g, &grid, &s.z_grid)?;
    let path = ctx.csv(
        "lambda_curve.csv",
        "z,lambda_re,lambda_im,log_abs_lambda",
        curve.iter().map(|p| {
            let l = C64::new(p.lambda[0], p.lambda[1]);
            format!("{},{},{},{}", p.z, l.re, l.im, l.norm().ln())
        }),
    )?;
    Ok(Outcome {
        results: json!({
            "kernel": kernel.label(),
            "epsilon_match": matched,
            "curve": curve,
        }),
        artifacts: vec![path],
    })
}

fn run_ulam(ctx: &Ctx) -> Result<Outcome, Error> {
    let s = ctx.settings;
    let map = s.map_model().map_err(cfg_err)?;
    let g = s.observable().map_err(cfg_err)?;
    let p = build_ulam(&map, s.boxes, s.samples)?;
    let density = ulam_srb(&p)?;
    let v = ulam_variance_from(&p, &box_averages(&g, s.boxes, s.samples)?)?;
    let path = ctx.grid("ulam_density.grid", s.boxes, &density)?;
    Ok(Outcome {
        results: json!({
            "sigma2": v.sigma2,
            "mean_shift": v.mean_shift,
            "series_iterations": v.iterations,
            "series_residual": v.residual,
            "nonzeros": p.nnz(),
            "density_min": density.iter().copied().fold(f64::INFINITY, f64::min),
            "density_max": density.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }),
        artifacts: vec![path],
    })
}

fn write_summary(dir: &Path, task: Task, summary: &Value) -> std::io::Result<PathBuf> {
    let path = dir.join(format!("{}.json", task.name()));
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut w, summary)?;
    writeln!(w)?;
    w.flush()?;
    Ok(path)
}

/// Runs one task and returns the process exit status.
pub fn execute(task: Task, cfg: &RunConfig) -> u8 {
    let settings = match Settings::resolve(task, cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return CONFIG_ERROR;
        }
    };
    if settings.threads > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(settings.threads).build_global();
    }
    if let Err(e) = std::fs::create_dir_all(&settings.out_dir) {
        eprintln!("config error: cannot create {}: {e}", settings.out_dir.display());
        return CONFIG_ERROR;
    }
    let ctx = Ctx {
        settings: &settings,
        hash: settings.hash(),
    };
    let start = Instant::now();
    let outcome = match task {
        Task::Certify => run_certify(&ctx),
        Task::Srb => run_srb(&ctx),
        Task::Variance => run_variance(&ctx),
        Task::Rate => run_rate(&ctx),
        Task::LambdaCurve => run_lambda_curve(&ctx),
        Task::Ulam => run_ulam(&ctx),
    };
    let wall = start.elapsed().as_secs_f64();
    let (status, code, results, artifacts, error) = match outcome {
        Ok(o) => ("ok", 0, o.results, o.artifacts, Value::Null),
        Err(e) => {
            let code = if is_config_error(&e) { CONFIG_ERROR } else { NUMERICAL_ERROR };
            let kind = if code == CONFIG_ERROR { "config" } else { "numerical" };
            (kind, code, Value::Null, vec![], Value::String(e.to_string()))
        }
    };
    let summary = json!({
        "task": task.name(),
        "status": status,
        "error": error,
        "version": env!("CARGO_PKG_VERSION"),
        "config": settings,
        "config_hash": ctx.hash,
        "wall_time_s": wall,
        "results": results,
        "artifacts": artifacts,
    });
    match write_summary(&settings.out_dir, task, &summary) {
        Ok(_) => println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default()),
        Err(e) => {
            eprintln!("cannot write summary: {e}");
            return CONFIG_ERROR;
        }
    }
    if let Value::String(msg) = &summary["error"] {
        eprintln!("{status} error: {msg}");
    }
    code
}
