use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use disclosure_core::{ExtParams, ModelParams, XDist, XDistribution, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Sweep,
    Sensitivity,
    Simulate,
    CheckDeviations,
    Figures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Baseline,
    Extension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Analytic,
    Fd,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Alpha,
    Beta,
    Q,
    P,
    R,
    R0,
    Mu0,
    Sigma,
}

impl Param {
    pub const ALL: [Param; 8] = [
        Param::Alpha,
        Param::Beta,
        Param::Q,
        Param::P,
        Param::R,
        Param::R0,
        Param::Mu0,
        Param::Sigma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::Q => "q",
            Param::P => "p",
            Param::R => "r",
            Param::R0 => "r0",
            Param::Mu0 => "mu0",
            Param::Sigma => "sigma",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .with_context(|| {
                let names: Vec<_> = Param::ALL.iter().map(|p| p.name()).collect();
                format!(
                    "unknown parameter `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// A sweep axis: an explicit list or `steps` evenly spaced points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Range { min: f64, max: f64, steps: usize },
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match *self {
            GridSpec::List(ref v) => v.clone(),
            GridSpec::Range { min, max, steps } => {
                ensure!(steps > 0, "grid range needs at least one step");
                ensure!(min <= max, "grid range has min {min} > max {max}");
                if steps == 1 {
                    vec![min]
                } else {
                    (0..steps)
                        .map(|i| min + (max - min) * i as f64 / (steps - 1) as f64)
                        .collect()
                }
            }
        };
        ensure!(!v.is_empty(), "grid is empty");
        ensure!(
            v.iter().all(|x| x.is_finite()),
            "grid values must be finite"
        );
        Ok(v)
    }
}

/// Parses `param=min:max:steps` or `param=v1,v2,...`.
pub fn parse_grid(s: &str) -> Result<(Param, GridSpec)> {
    let (name, axis) = s
        .split_once('=')
        .with_context(|| format!("grid `{s}` is not of the form param=min:max:steps"))?;
    let param: Param = name.trim().parse()?;
    let axis = axis.trim();
    let grid = if axis.contains(':') {
        let parts: Vec<&str> = axis.split(':').collect();
        ensure!(
            parts.len() == 3,
            "grid `{s}` is not of the form param=min:max:steps"
        );
        GridSpec::Range {
            min: parts[0]
                .parse()
                .with_context(|| format!("bad grid minimum in `{s}`"))?,
            max: parts[1]
                .parse()
                .with_context(|| format!("bad grid maximum in `{s}`"))?,
            steps: parts[2]
                .parse()
                .with_context(|| format!("bad step count in `{s}`"))?,
        }
    } else {
        let values = axis
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("bad grid values in `{s}`"))?;
        GridSpec::List(values)
    };
    grid.values()?;
    Ok((param, grid))
}

/// One layer of settings, either from the command line or a JSON file.
/// Unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub model: Option<ModelKind>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub q: Option<f64>,
    pub p: Option<f64>,
    pub r: Option<f64>,
    pub r0: Option<f64>,
    pub mu0: Option<f64>,
    pub sigma: Option<f64>,
    pub x_dist: Option<XDist>,
    #[serde(default)]
    pub grid: BTreeMap<Param, GridSpec>,
    pub paths: Option<u64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub r_sigma: Option<f64>,
    pub method: Option<MethodKind>,
}

impl Layer {
    pub fn from_file(path: &Path) -> Result<Layer> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))
    }

    fn value(&self, p: Param) -> Option<f64> {
        match p {
            Param::Alpha => self.alpha,
            Param::Beta => self.beta,
            Param::Q => self.q,
            Param::P => self.p,
            Param::R => self.r,
            Param::R0 => self.r0,
            Param::Mu0 => self.mu0,
            Param::Sigma => self.sigma,
        }
    }
}

pub fn read_dist_file(path: &Path) -> Result<XDist> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read distribution file {}", path.display()))?;
    let d: XDist = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse distribution file {}", path.display()))?;
    d.validate()?;
    Ok(d)
}

/// Scalar parameter values of one model instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    pub p: f64,
    pub r: f64,
    pub r0: f64,
    pub mu0: f64,
    pub sigma: f64,
}

impl Point {
    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::Alpha => self.alpha,
            Param::Beta => self.beta,
            Param::Q => self.q,
            Param::P => self.p,
            Param::R => self.r,
            Param::R0 => self.r0,
            Param::Mu0 => self.mu0,
            Param::Sigma => self.sigma,
        }
    }

    pub fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::Alpha => self.alpha = v,
            Param::Beta => self.beta = v,
            Param::Q => self.q = v,
            Param::P => self.p = v,
            Param::R => self.r = v,
            Param::R0 => self.r0 = v,
            Param::Mu0 => self.mu0 = v,
            Param::Sigma => self.sigma = v,
        }
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelKind,
    pub point: Point,
    /// Family of `x`; its location and spread come from `mu0` and `sigma`.
    pub x_dist: XDist,
    pub grid: Vec<(Param, Vec<f64>)>,
    pub paths: u64,
    pub seed: u64,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub json: bool,
    pub r_sigma: Option<f64>,
    pub method: MethodKind,
    pub threads: Option<usize>,
}

pub const DEFAULT_POINT: Point = Point {
    alpha: 1.0,
    beta: 0.5,
    q: 0.8,
    p: 0.5,
    r: 0.5,
    r0: 1.0,
    mu0: 1.0,
    sigma: 0.5,
};
pub const DEFAULT_PATHS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 20240601;

impl RunConfig {
    /// Merges `flags` over `file` over the defaults.
    pub fn resolve(
        command: Command,
        flags: Layer,
        file: Layer,
        json: bool,
        threads: Option<usize>,
    ) -> Result<RunConfig> {
        let layers = [&flags, &file];
        for (layer, name) in layers.iter().zip(["command line", "config file"]) {
            for (param, _) in &layer.grid {
                if layer.value(*param).is_some() {
                    bail!("{param} is given both as a value and as a grid on the {name}");
                }
            }
        }

        let base = flags
            .x_dist
            .or(file.x_dist)
            .unwrap_or(XDist::normal(DEFAULT_POINT.mu0, DEFAULT_POINT.sigma)?);
        let mut point = Point {
            mu0: base.mean(),
            sigma: base.spread(),
            ..DEFAULT_POINT
        };
        let mut grid = Vec::new();
        for param in Param::ALL {
            // The highest layer that mentions a parameter decides it.
            let decided = layers
                .iter()
                .find(|l| l.value(param).is_some() || l.grid.contains_key(&param));
            if let Some(layer) = decided {
                match (layer.value(param), layer.grid.get(&param)) {
                    (Some(v), _) => point.set(param, v),
                    (None, Some(g)) => grid.push((param, g.values()?)),
                    (None, None) => unreachable!(),
                }
            }
        }

        let cfg = RunConfig {
            command,
            model: flags.model.or(file.model).unwrap_or(ModelKind::Baseline),
            point,
            x_dist: base,
            grid,
            paths: flags.paths.or(file.paths).unwrap_or(DEFAULT_PATHS),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            tol: flags.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
            out: flags.out.or(file.out),
            json,
            r_sigma: flags.r_sigma.or(file.r_sigma),
            method: flags.method.or(file.method).unwrap_or(MethodKind::Analytic),
            threads,
        };
        ensure!(
            cfg.tol.is_finite() && cfg.tol > 0.0,
            "tolerance must be positive, got {}",
            cfg.tol
        );
        ensure!(cfg.paths > 0, "paths must be at least 1");
        if let Some(t) = threads {
            ensure!(t > 0, "thread count must be at least 1");
        }
        Ok(cfg)
    }

    /// Every grid cell in row-major order (the last axis varies fastest).
    /// Without a grid this is the single configured point.
    pub fn cells(&self) -> Vec<Point> {
        let mut cells = vec![self.point];
        for (param, values) in &self.grid {
            cells = cells
                .iter()
                .flat_map(|c| {
                    values.iter().map(move |&v| {
                        let mut c = *c;
                        c.set(*param, v);
                        c
                    })
                })
                .collect();
        }
        cells
    }

    pub fn x_dist_at(&self, pt: &Point) -> disclosure_core::Result<XDist> {
        self.x_dist.with_mean(pt.mu0)?.with_spread(pt.sigma)
    }

    pub fn baseline(&self, pt: &Point) -> disclosure_core::Result<ModelParams> {
        ModelParams::new(pt.alpha, pt.beta, pt.q, pt.r, pt.r0, self.x_dist_at(pt)?)
    }

    pub fn extension(&self, pt: &Point) -> disclosure_core::Result<ExtParams> {
        ExtParams::new(pt.alpha, pt.beta, pt.r, pt.r0, self.x_dist_at(pt)?, pt.p)
    }
}
