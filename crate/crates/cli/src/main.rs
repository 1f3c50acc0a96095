//! `anosov`: runs the certificate, SRB, variance, rate-function,
//! eigenvalue-curve and Ulam pipelines from a config file and/or flags.
//!
//! Exit status: 0 on success, 1 for configuration errors, 2 for numerical
//! failures (a diagnostic JSON is still written).

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FormName, MapName, RunConfig, Scheme, Task};

#[derive(Parser, Debug)]
#[command(name = "anosov", version, about = "Transfer-operator statistics for Anosov maps of the 2-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form hyperbolicity certificate for the perturbed cat map.
    Certify(Common),
    /// SRB density estimate on the fine grid.
    Srb(Common),
    /// CLT variance from a single linear solve.
    Variance(Common),
    /// Large-deviation rate function over an s grid.
    Rate(Common),
    /// Leading eigenvalue of the twisted operator over a z grid.
    LambdaCurve(Common),
    /// Ulam box-method SRB density and variance.
    Ulam(Common),
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    map: Option<MapName>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_enum)]
    form: Option<FormName>,
    /// Built-in observable name (`cos-sin`).
    #[arg(long)]
    observable: Option<String>,
    #[arg(long, value_enum)]
    scheme: Option<Scheme>,
    /// Coarse order (operator size n² × n²).
    #[arg(long)]
    n: Option<usize>,
    /// Fine collocation order.
    #[arg(long = "N")]
    fine: Option<usize>,
    /// Bump radius; matched to the Fejér kernel when omitted.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Require an explicit epsilon for the bump scheme.
    #[arg(long)]
    no_auto_match: bool,
    /// Cone aperture for `certify`.
    #[arg(long)]
    alpha: Option<f64>,
    /// Ulam boxes per side.
    #[arg(long)]
    boxes: Option<usize>,
    /// Ulam samples per box (a perfect square).
    #[arg(long)]
    samples: Option<usize>,
    /// s grid for `rate`, `start:step:stop` or a list.
    #[arg(long = "s", allow_hyphen_values = true)]
    s_grid: Option<String>,
    /// z grid for `lambda-curve`.
    #[arg(long = "z", allow_hyphen_values = true)]
    z_grid: Option<String>,
    /// Optimiser bracket for `rate`, as `lo:hi`.
    #[arg(long, value_parser = parse_bracket, allow_hyphen_values = true)]
    z_bracket: Option<[f64; 2]>,
    /// Output directory (default: $ANOSOV_OUT_DIR, else the working directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_bracket(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?}"));
    Ok([num(a)?, num(b)?])
}

impl Common {
    fn overrides(&self) -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.map.name = self.map;
        cfg.map.delta = self.delta;
        cfg.map.form = self.form;
        cfg.observable.name = self.observable.clone();
        cfg.scheme = self.scheme;
        cfg.n = self.n;
        cfg.fine = self.fine;
        cfg.epsilon = self.epsilon;
        cfg.auto_match = self.no_auto_match.then_some(false);
        cfg.alpha = self.alpha;
        cfg.boxes = self.boxes;
        cfg.samples = self.samples;
        cfg.s_grid = self.s_grid.clone();
        cfg.z_grid = self.z_grid.clone();
        cfg.z_bracket = self.z_bracket;
        cfg.out_dir = self.out_dir.clone();
        cfg.threads = self.threads;
        cfg
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, common) = match cli.command {
        Command::Certify(c) => (Task::Certify, c),
        Command::Srb(c) => (Task::Srb, c),
        Command::Variance(c) => (Task::Variance, c),
        Command::Rate(c) => (Task::Rate, c),
        Command::LambdaCurve(c) => (Task::LambdaCurve, c),
        Command::Ulam(c) => (Task::Ulam, c),
    };
    let file = match &common.config {
        Some(path) => match RunConfig::from_file(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("config error: {e}");
                return ExitCode::from(1);
            }
        },
        None => RunConfig::default(),
    };
    let merged = common.overrides().over(&file);
    ExitCode::from(run::execute(task, &merged))
}
