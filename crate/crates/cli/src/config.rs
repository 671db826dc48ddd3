//! Flat key = value run configuration.
//!
//! The format is deliberately plain text with dotted section prefixes
//! (`scene.name`, `angular.scheme`, ...): trivially diffable, no parser
//! dependencies, and runs reproduce bit-exactly from the same file.

use mcxc_core::angular::{
    fibonacci_grid, gauss_legendre_grid, lebedev_grid, lebedev_order_for_points, AngularGrid,
};
use mcxc_core::fields::{make_scene, BoxExtents, Scene};
use mcxc_core::functionals::FunctionalId;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Angular scheme selection with its size parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularSpec {
    Lebedev { order: u32 },
    GaussLegendre { n_theta: usize, n_phi: usize },
    Fibonacci { n: usize },
}

impl AngularSpec {
    pub fn build(&self) -> Result<AngularGrid, ConfigError> {
        let grid = match *self {
            AngularSpec::Lebedev { order } => lebedev_grid(order),
            AngularSpec::GaussLegendre { n_theta, n_phi } => gauss_legendre_grid(n_theta, n_phi),
            AngularSpec::Fibonacci { n } => fibonacci_grid(n),
        };
        grid.map_err(|e| ConfigError(e.to_string()))
    }

    pub fn describe(&self) -> String {
        match *self {
            AngularSpec::Lebedev { order } => format!("lebedev order {order}"),
            AngularSpec::GaussLegendre { n_theta, n_phi } => {
                format!("gauss_legendre {n_theta}x{n_phi}")
            }
            AngularSpec::Fibonacci { n } => format!("fibonacci {n}"),
        }
    }
}

/// One entry of a convergence sweep.
#[derive(Debug, Clone, Copy)]
pub enum SweepEntry {
    LebedevPoints(usize),
    GaussLegendre { n_theta: usize, n_phi: usize },
    Fibonacci(usize),
}

impl SweepEntry {
    pub fn scheme_name(&self) -> &'static str {
        match self {
            SweepEntry::LebedevPoints(_) => "lebedev",
            SweepEntry::GaussLegendre { .. } => "gauss_legendre",
            SweepEntry::Fibonacci(_) => "fibonacci",
        }
    }

    pub fn build(&self) -> Result<AngularGrid, ConfigError> {
        match *self {
            SweepEntry::LebedevPoints(npts) => {
                let order = lebedev_order_for_points(npts).ok_or_else(|| {
                    ConfigError(format!(
                        "no Lebedev rule with {npts} points; supported point counts: \
                         6, 14, 26, 38, 50, 110, 194, 302, 434, 590, 770, 974, 1202"
                    ))
                })?;
                AngularSpec::Lebedev { order }.build()
            }
            SweepEntry::GaussLegendre { n_theta, n_phi } => {
                AngularSpec::GaussLegendre { n_theta, n_phi }.build()
            }
            SweepEntry::Fibonacci(n) => AngularSpec::Fibonacci { n }.build(),
        }
    }
}

/// Everything a command needs, resolved against the registries.
#[derive(Debug)]
pub struct RunConfig {
    pub scene: Scene,
    pub functional: FunctionalId,
    pub angular: AngularSpec,
    pub bounds: BoxExtents,
    pub n_per_axis: usize,
    pub rotation_count: usize,
    pub rotation_seed: u64,
    pub sweep: Vec<SweepEntry>,
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(format!(
                "line {}: expected key = value, got '{raw}'",
                lineno + 1
            ));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if map.insert(key.clone(), value).is_some() {
            return err(format!("line {}: duplicate key '{key}'", lineno + 1));
        }
    }
    Ok(map)
}

fn parse_vec3(key: &str, raw: &str) -> Result<[f64; 3], ConfigError> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return err(format!(
            "{key}: expected three comma-separated reals, got '{raw}'"
        ));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("{key}: cannot parse '{part}' as a real")))?;
    }
    Ok(out)
}

fn parse_gl_pair(raw: &str) -> Result<(usize, usize), ConfigError> {
    let Some((a, b)) = raw.split_once('x') else {
        return err(format!("expected n_theta x n_phi (e.g. 8x16), got '{raw}'"));
    };
    let n_theta = a
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("bad count '{a}'")))?;
    let n_phi = b
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("bad count '{b}'")))?;
    Ok((n_theta, n_phi))
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let map = parse_kv(text)?;
        let get = |key: &str| -> Option<&String> { map.get(key) };
        let require = |key: &str| -> Result<&String, ConfigError> {
            map.get(key)
                .ok_or_else(|| ConfigError(format!("missing required key '{key}'")))
        };

        // scene.* keys become the scene parameter map
        let scene_name = require("scene.name")?.clone();
        let mut scene_params = BTreeMap::new();
        for (key, value) in &map {
            if let Some(param) = key.strip_prefix("scene.") {
                if param != "name" {
                    scene_params.insert(param.to_string(), value.clone());
                }
            }
        }
        let scene =
            make_scene(&scene_name, &scene_params).map_err(|e| ConfigError(e.to_string()))?;

        let functional = FunctionalId::from_name(require("functional.name")?)
            .map_err(|e| ConfigError(e.to_string()))?;

        let angular = match require("angular.scheme")?.as_str() {
            "lebedev" => AngularSpec::Lebedev {
                order: require("angular.order")?
                    .parse()
                    .map_err(|_| ConfigError("angular.order: expected an integer".into()))?,
            },
            "gauss_legendre" => AngularSpec::GaussLegendre {
                n_theta: require("angular.n_theta")?
                    .parse()
                    .map_err(|_| ConfigError("angular.n_theta: expected an integer".into()))?,
                n_phi: require("angular.n_phi")?
                    .parse()
                    .map_err(|_| ConfigError("angular.n_phi: expected an integer".into()))?,
            },
            "fibonacci" => AngularSpec::Fibonacci {
                n: require("angular.n")?
                    .parse()
                    .map_err(|_| ConfigError("angular.n: expected an integer".into()))?,
            },
            other => {
                return err(format!(
                "angular.scheme: unknown scheme '{other}' (lebedev | gauss_legendre | fibonacci)"
            ))
            }
        };

        let lo = parse_vec3("box.min", require("box.min")?)?;
        let hi = parse_vec3("box.max", require("box.max")?)?;
        let bounds = BoxExtents::new(lo, hi).map_err(|e| ConfigError(e.to_string()))?;

        let n_per_axis: usize = require("grid.n_per_axis")?
            .parse()
            .map_err(|_| ConfigError("grid.n_per_axis: expected an integer".into()))?;
        if n_per_axis < 1 {
            return err("grid.n_per_axis must be at least 1");
        }

        let rotation_count = match get("rotation.count") {
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError("rotation.count: expected an integer".into()))?,
            None => 20,
        };
        let rotation_seed = match get("rotation.seed") {
            Some(v) => v
                .parse()
                .map_err(|_| ConfigError("rotation.seed: expected an integer".into()))?,
            None => 0,
        };

        let mut sweep = Vec::new();
        if let Some(list) = get("sweep.lebedev") {
            for tok in list.split(',') {
                let npts = tok
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError(format!("sweep.lebedev: bad point count '{tok}'")))?;
                sweep.push(SweepEntry::LebedevPoints(npts));
            }
        }
        if let Some(list) = get("sweep.gauss_legendre") {
            for tok in list.split(',') {
                let (n_theta, n_phi) = parse_gl_pair(tok.trim())?;
                sweep.push(SweepEntry::GaussLegendre { n_theta, n_phi });
            }
        }
        if let Some(list) = get("sweep.fibonacci") {
            for tok in list.split(',') {
                let n = tok
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError(format!("sweep.fibonacci: bad count '{tok}'")))?;
                sweep.push(SweepEntry::Fibonacci(n));
            }
        }

        // reject unknown keys outside the scene.* namespace
        let known = [
            "scene.name",
            "functional.name",
            "angular.scheme",
            "angular.order",
            "angular.n_theta",
            "angular.n_phi",
            "angular.n",
            "box.min",
            "box.max",
            "grid.n_per_axis",
            "rotation.count",
            "rotation.seed",
            "sweep.lebedev",
            "sweep.gauss_legendre",
            "sweep.fibonacci",
        ];
        for key in map.keys() {
            if !key.starts_with("scene.") && !known.contains(&key.as_str()) {
                return err(format!("unknown key '{key}'"));
            }
        }

        Ok(RunConfig {
            scene,
            functional,
            angular,
            bounds,
            n_per_axis,
            rotation_count,
            rotation_seed,
            sweep,
        })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }
}
