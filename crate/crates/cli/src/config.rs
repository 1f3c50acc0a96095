//! Run configuration: a TOML file, overridden field by field by flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anosov_core::torus::CatForm;
use anosov_core::{GridSpec, KernelSpec, MapModel, Observable, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ANOSOV_OUT_DIR";

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MapName {
    PerturbedCat,
    Cat,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FormName {
    Numerics,
    Certificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Fejer,
    Bump,
    Ulam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Certify,
    Srb,
    Variance,
    Rate,
    LambdaCurve,
    Ulam,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Certify => "certify",
            Task::Srb => "srb",
            Task::Variance => "variance",
            Task::Rate => "rate",
            Task::LambdaCurve => "lambda-curve",
            Task::Ulam => "ulam",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct MapConfig {
    pub name: Option<MapName>,
    pub delta: Option<f64>,
    pub form: Option<FormName>,
    /// Integer matrix for `name = "linear"`.
    pub matrix: Option<[[i64; 2]; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ObservableConfig {
    /// Built-in observable; only `cos-sin` exists.
    pub name: Option<String>,
    /// Trigonometric modes as `[j1, j2, re, im]`.
    pub modes: Option<Vec<[f64; 4]>>,
}

/// Every field optional so that a file and flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    #[serde(default)]
    pub map: MapConfig,
    #[serde(default)]
    pub observable: ObservableConfig,
    pub scheme: Option<Scheme>,
    pub n: Option<usize>,
    #[serde(rename = "N")]
    pub fine: Option<usize>,
    pub epsilon: Option<f64>,
    pub auto_match: Option<bool>,
    pub alpha: Option<f64>,
    pub boxes: Option<usize>,
    pub samples: Option<usize>,
    pub s_grid: Option<String>,
    pub z_grid: Option<String>,
    pub z_bracket: Option<[f64; 2]>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

macro_rules! layer {
    ($top:expr, $base:expr, $($field:ident).+) => {
        $top.$($field).+ = $top.$($field).+.take().or($base.$($field).+.clone());
    };
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(mut self, base: &RunConfig) -> Self {
        layer!(self, base, map.name);
        layer!(self, base, map.delta);
        layer!(self, base, map.form);
        layer!(self, base, map.matrix);
        layer!(self, base, observable.name);
        layer!(self, base, observable.modes);
        layer!(self, base, scheme);
        layer!(self, base, n);
        layer!(self, base, fine);
        layer!(self, base, epsilon);
        layer!(self, base, auto_match);
        layer!(self, base, alpha);
        layer!(self, base, boxes);
        layer!(self, base, samples);
        layer!(self, base, s_grid);
        layer!(self, base, z_grid);
        layer!(self, base, z_bracket);
        layer!(self, base, out_dir);
        layer!(self, base, threads);
        self
    }
}

/// A configuration with defaults applied and validated for one task.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Settings {
    pub task: Task,
    pub map: MapName,
    pub delta: f64,
    pub form: FormName,
    pub matrix: [[i64; 2]; 2],
    pub observable: Vec<[f64; 4]>,
    pub scheme: Scheme,
    pub n: usize,
    #[serde(rename = "N")]
    pub fine: usize,
    pub epsilon: Option<f64>,
    pub auto_match: bool,
    pub alpha: f64,
    pub boxes: usize,
    pub samples: usize,
    pub s_grid: Vec<f64>,
    pub z_grid: Vec<f64>,
    pub z_bracket: [f64; 2],
    pub out_dir: PathBuf,
    pub threads: usize,
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, ConfigError> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("bad number {s:?} in grid {spec:?}")));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [a, h, b] => {
            let (a, h, b) = (num(a)?, num(h)?, num(b)?);
            if !(h > 0.0) || b < a {
                return Err(bad(format!("grid {spec:?} needs a positive step and start <= stop")));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| a + i as f64 * h).collect())
        }
        [_] => spec.split(',').map(num).collect(),
        _ => Err(bad(format!("grid {spec:?} is neither start:step:stop nor a list"))),
    }
}

fn cos_sin_modes() -> Vec<[f64; 4]> {
    vec![[-2.0, 0.0, 0.5, 0.0], [0.0, -1.0, 0.0, 0.5], [0.0, 1.0, 0.0, -0.5], [2.0, 0.0, 0.5, 0.0]]
}

impl Settings {
    pub fn resolve(task: Task, cfg: &RunConfig) -> Result<Self, ConfigError> {
        let map = cfg.map.name.unwrap_or(MapName::PerturbedCat);
        let delta = cfg.map.delta.unwrap_or(0.01);
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(bad(format!("delta must be a finite nonnegative number, got {delta}")));
        }
        let matrix = match (map, cfg.map.matrix) {
            (MapName::Linear, None) => return Err(bad("map.name = linear needs map.matrix")),
            (_, Some(m)) => m,
            (_, None) => anosov_core::torus::CAT_MATRIX,
        };
        let observable = match (&cfg.observable.name, &cfg.observable.modes) {
            (Some(_), Some(_)) => return Err(bad("give either observable.name or observable.modes, not both")),
            (Some(name), None) if name == "cos-sin" => cos_sin_modes(),
            (Some(name), None) => return Err(bad(format!("unknown observable {name:?}"))),
            (None, Some(modes)) => modes.clone(),
            (None, None) => cos_sin_modes(),
        };
        let scheme = match task {
            Task::Ulam => Scheme::Ulam,
            _ => cfg.scheme.unwrap_or(Scheme::Fejer),
        };
        if scheme == Scheme::Ulam && task != Task::Ulam && task != Task::Certify {
            return Err(bad(format!("scheme ulam is only available through the ulam subcommand, not {}", task.name())));
        }
        let n = cfg.n.unwrap_or(32);
        let fine = cfg.fine.unwrap_or(512);
        let fourier = matches!(scheme, Scheme::Fejer | Scheme::Bump) && task != Task::Certify;
        if fourier {
            GridSpec::new(n, fine).map_err(|e| bad(e.to_string()))?;
            if fine < 2 * n {
                return Err(bad(format!("N = {fine} must be at least 2n = {}", 2 * n)));
            }
        }
        let auto_match = cfg.auto_match.unwrap_or(true);
        match (scheme, cfg.epsilon) {
            (Scheme::Bump, None) if !auto_match => {
                return Err(bad("scheme bump with auto-match disabled needs epsilon"));
            }
            (Scheme::Fejer | Scheme::Ulam, Some(_)) if task != Task::Certify => {
                return Err(bad("epsilon only applies to scheme bump"));
            }
            _ => {}
        }
        let boxes = cfg.boxes.unwrap_or(64);
        let samples = cfg.samples.unwrap_or(1600);
        let z_bracket = cfg.z_bracket.unwrap_or(anosov_core::stats::DEFAULT_Z_BRACKET);
        if !(z_bracket[0] < 0.0 && z_bracket[1] > 0.0) {
            return Err(bad(format!("z-bracket {z_bracket:?} must contain 0")));
        }
        let out_dir = cfg
            .out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let settings = Settings {
            task,
            map,
            delta,
            form: cfg.map.form.unwrap_or(FormName::Numerics),
            matrix,
            observable,
            scheme,
            n,
            fine,
            epsilon: cfg.epsilon,
            auto_match,
            alpha: cfg.alpha.unwrap_or(0.11872),
            boxes,
            samples,
            s_grid: parse_grid(cfg.s_grid.as_deref().unwrap_or("0:0.1:1.8"))?,
            z_grid: parse_grid(cfg.z_grid.as_deref().unwrap_or("-1:0.1:1"))?,
            z_bracket,
            out_dir,
            threads: cfg.threads.unwrap_or(0),
        };
        settings.map_model()?;
        settings.observable()?;
        Ok(settings)
    }

    pub fn map_model(&self) -> Result<MapModel, ConfigError> {
        let form = match self.form {
            FormName::Numerics => CatForm::Numerics,
            FormName::Certificate => CatForm::Certificate,
        };
        match self.map {
            MapName::PerturbedCat => Ok(MapModel::perturbed_cat(self.delta, form)),
            MapName::Cat => Ok(MapModel::cat()),
            MapName::Linear => MapModel::linear(self.matrix).map_err(|e| bad(e.to_string())),
        }
    }

    pub fn observable(&self) -> Result<Observable, ConfigError> {
        let mut modes = BTreeMap::new();
        for &[j1, j2, re, im] in &self.observable {
            if j1.fract() != 0.0 || j2.fract() != 0.0 {
                return Err(bad(format!("observable mode ({j1}, {j2}) is not an integer pair")));
            }
            modes.insert((j1 as i64, j2 as i64), C64::new(re, im));
        }
        Observable::trig(modes).map_err(|e| bad(e.to_string()))
    }

    pub fn grid(&self) -> Result<GridSpec, ConfigError> {
        GridSpec::new(self.n, self.fine).map_err(|e| bad(e.to_string()))
    }

    /// Kernel for Fourier schemes; `matched` supplies ε when it was not given.
    pub fn kernel(&self, matched: Option<f64>) -> KernelSpec {
        match self.scheme {
            Scheme::Bump => KernelSpec::Bump {
                epsilon: self.epsilon.or(matched).unwrap_or(f64::NAN),
            },
            _ => KernelSpec::Fejer,
        }
    }

    /// SHA-256 of the canonical JSON echo of these settings.
    /// Where the results land and how many threads compute them do not
    /// change the numbers, so neither enters the hash.
    pub fn hash(&self) -> String {
        let mut key = self.clone();
        key.out_dir = PathBuf::new();
        key.threads = 0;
        let json = serde_json::to_vec(&key).expect("settings serialise");
        hex::encode(Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        let g = parse_grid("0:0.1:1.8").unwrap();
        assert_eq!(g.len(), 19);
        assert!((g[18] - 1.8).abs() < 1e-12);
        assert_eq!(parse_grid("1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_grid("1:0:2").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let file: RunConfig = toml::from_str("n = 16\nN = 128\n[map]\ndelta = 0.02\n").unwrap();
        let flags = RunConfig { n: Some(8), ..Default::default() };
        let merged = flags.over(&file);
        assert_eq!(merged.n, Some(8));
        assert_eq!(merged.fine, Some(128));
        assert_eq!(merged.map.delta, Some(0.02));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("colour = 3\n").is_err());
    }

    #[test]
    fn validation() {
        let tight = RunConfig { n: Some(32), fine: Some(32), ..Default::default() };
        assert!(Settings::resolve(Task::Variance, &tight).is_err());
        let strict_bump = RunConfig {
            scheme: Some(Scheme::Bump),
            auto_match: Some(false),
            ..Default::default()
        };
        assert!(Settings::resolve(Task::Variance, &strict_bump).is_err());
        let fejer_eps = RunConfig { epsilon: Some(0.1), ..Default::default() };
        assert!(Settings::resolve(Task::Variance, &fejer_eps).is_err());
        let ok = Settings::resolve(Task::Variance, &RunConfig::default()).unwrap();
        assert_eq!((ok.n, ok.fine, ok.scheme), (32, 512, Scheme::Fejer));
        assert_eq!(ok.hash(), Settings::resolve(Task::Variance, &RunConfig::default()).unwrap().hash());
    }

    #[test]
    fn default_observable_matches_reference() {
        let s = Settings::resolve(Task::Variance, &RunConfig::default()).unwrap();
        let g = s.observable().unwrap();
        let x = [0.3, 0.7];
        let expect = (4.0 * std::f64::consts::PI * x[0]).cos() + (2.0 * std::f64::consts::PI * x[1]).sin();
        assert!((g.eval_at(x) - expect).abs() < 1e-14);
    }
}
