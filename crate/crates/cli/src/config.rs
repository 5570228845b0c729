//! Flat `key = value` run configuration.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use pilotwave::analysis::Grid1D;
use pilotwave::experiment::{BudgetSpec, PointerModel};
use pilotwave::rng::DEFAULT_SEED;
use pilotwave::trajectories::{EnsembleSpec, IntegratorConfig, Method};
use pilotwave::{Side, SlitParams, StateConfig, StateKind};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Trajectories,
    JointDensity,
    Marginals,
    VelocityProfile,
    WeakSim,
    Equivariance,
    Budget,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Trajectories,
        Scenario::JointDensity,
        Scenario::Marginals,
        Scenario::VelocityProfile,
        Scenario::WeakSim,
        Scenario::Equivariance,
        Scenario::Budget,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Trajectories => "trajectories",
            Scenario::JointDensity => "joint-density",
            Scenario::Marginals => "marginals",
            Scenario::VelocityProfile => "velocity-profile",
            Scenario::WeakSim => "weak-sim",
            Scenario::Equivariance => "equivariance",
            Scenario::Budget => "budget",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        Scenario::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Scenario::ALL.iter().map(|x| x.name()).collect();
            err("scenario", format!("unknown scenario {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// Every knob of a run. Field names are the config keys.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub seed: u64,
    // Physics.
    pub sigma: f64,
    pub d: f64,
    pub phi: f64,
    pub kind: StateKind,
    // Trajectories.
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    pub eps_node: f64,
    pub max_step_shrink: u32,
    pub record_stride: usize,
    pub starts: Vec<(f64, f64)>,
    pub n_traj: usize,
    pub phi1: f64,
    pub phi2: f64,
    // Snapshots.
    pub t_plane: f64,
    pub grid_n: usize,
    pub grid_reach: f64,
    // Experiment.
    pub kappa: f64,
    pub bins: usize,
    pub bins_a: usize,
    pub x_a: f64,
    pub pairs_per_bin: usize,
    pub max_events: usize,
    pub phi_list: Vec<f64>,
    pub n_events: usize,
    // Equivariance.
    pub n_ensemble: usize,
    pub hist_reach: f64,
    // Budget.
    pub planes: u64,
    pub pair_rate: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: Scenario::Trajectories,
            seed: DEFAULT_SEED,
            sigma: 0.1,
            d: 1.0,
            phi: 0.0,
            kind: StateKind::Entangled,
            dt: 1e-3,
            t_end: 4.0,
            method: Method::Rk4,
            eps_node: 1e-12,
            max_step_shrink: 10,
            record_stride: 10,
            starts: vec![(0.5, 0.5), (0.45, 0.55)],
            n_traj: 0,
            phi1: 0.0,
            phi2: PI,
            t_plane: 4.0,
            grid_n: 201,
            grid_reach: 4.0,
            kappa: 0.1,
            bins: 40,
            bins_a: 40,
            x_a: 4.0,
            pairs_per_bin: 1000,
            max_events: 100_000,
            phi_list: Vec::new(),
            n_events: 10_000,
            n_ensemble: 100_000,
            hist_reach: 8.0,
            planes: 25,
            pair_rate: 1e6,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| err(key, format!("cannot parse {v:?}")))
}

fn real(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = num(key, v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(err(key, "must be finite"))
    }
}

fn kind_name(k: StateKind) -> &'static str {
    match k {
        StateKind::Entangled => "entangled",
        StateKind::ProductUpper => "product-upper",
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Rk4 => "rk4",
        Method::Euler => "euler",
    }
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(&format!("line {}", n + 1), format!("expected `key = value`, got {line:?}")))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Split a `--set key=value` argument.
pub fn parse_override(arg: &str) -> Result<(String, String), ConfigError> {
    let (k, v) = arg
        .split_once('=')
        .ok_or_else(|| err("--set", format!("expected key=value, got {arg:?}")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "scenario" => self.scenario = Scenario::parse(v)?,
            "seed" => self.seed = num(key, v)?,
            "sigma" => self.sigma = real(key, v)?,
            "d" => self.d = real(key, v)?,
            "phi" => self.phi = real(key, v)?,
            "kind" => {
                self.kind = match v {
                    "entangled" => StateKind::Entangled,
                    "product-upper" => StateKind::ProductUpper,
                    _ => return Err(err(key, format!("expected entangled or product-upper, got {v:?}"))),
                }
            }
            "dt" => self.dt = real(key, v)?,
            "t_end" => self.t_end = real(key, v)?,
            "method" => {
                self.method = match v {
                    "rk4" => Method::Rk4,
                    "euler" => Method::Euler,
                    _ => return Err(err(key, format!("expected rk4 or euler, got {v:?}"))),
                }
            }
            "eps_node" => self.eps_node = real(key, v)?,
            "max_step_shrink" => self.max_step_shrink = num(key, v)?,
            "record_stride" => self.record_stride = num(key, v)?,
            "starts" => {
                self.starts = v
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        let (a, b) = s
                            .split_once(':')
                            .ok_or_else(|| err(key, format!("expected x_a:x_b, got {s:?}")))?;
                        Ok((real(key, a.trim())?, real(key, b.trim())?))
                    })
                    .collect::<Result<_, _>>()?
            }
            "n_traj" => self.n_traj = num(key, v)?,
            "phi1" => self.phi1 = real(key, v)?,
            "phi2" => self.phi2 = real(key, v)?,
            "t_plane" => self.t_plane = real(key, v)?,
            "grid_n" => self.grid_n = num(key, v)?,
            "grid_reach" => self.grid_reach = real(key, v)?,
            "kappa" => self.kappa = real(key, v)?,
            "bins" => self.bins = num(key, v)?,
            "bins_a" => self.bins_a = num(key, v)?,
            "x_a" => self.x_a = real(key, v)?,
            "pairs_per_bin" => self.pairs_per_bin = num(key, v)?,
            "max_events" => self.max_events = num(key, v)?,
            "phi_list" => {
                self.phi_list = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| real(key, s))
                    .collect::<Result<_, _>>()?
            }
            "n_events" => self.n_events = num(key, v)?,
            "n_ensemble" => self.n_ensemble = num(key, v)?,
            "hist_reach" => self.hist_reach = real(key, v)?,
            "planes" => self.planes = num(key, v)?,
            "pair_rate" => self.pair_rate = real(key, v)?,
            _ => return Err(err(key, "unknown config key")),
        }
        Ok(())
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = &'a (String, String)>) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        for (k, v) in pairs {
            c.set(k, v)?;
        }
        Ok(c)
    }

    /// Canonical key/value listing; floats use the shortest exact representation.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let starts: Vec<String> = self.starts.iter().map(|(a, b)| format!("{a:?}:{b:?}")).collect();
        let phis: Vec<String> = self.phi_list.iter().map(|p| format!("{p:?}")).collect();
        vec![
            ("scenario", self.scenario.name().to_string()),
            ("seed", self.seed.to_string()),
            ("sigma", format!("{:?}", self.sigma)),
            ("d", format!("{:?}", self.d)),
            ("phi", format!("{:?}", self.phi)),
            ("kind", kind_name(self.kind).to_string()),
            ("dt", format!("{:?}", self.dt)),
            ("t_end", format!("{:?}", self.t_end)),
            ("method", method_name(self.method).to_string()),
            ("eps_node", format!("{:?}", self.eps_node)),
            ("max_step_shrink", self.max_step_shrink.to_string()),
            ("record_stride", self.record_stride.to_string()),
            ("starts", starts.join(";")),
            ("n_traj", self.n_traj.to_string()),
            ("phi1", format!("{:?}", self.phi1)),
            ("phi2", format!("{:?}", self.phi2)),
            ("t_plane", format!("{:?}", self.t_plane)),
            ("grid_n", self.grid_n.to_string()),
            ("grid_reach", format!("{:?}", self.grid_reach)),
            ("kappa", format!("{:?}", self.kappa)),
            ("bins", self.bins.to_string()),
            ("bins_a", self.bins_a.to_string()),
            ("x_a", format!("{:?}", self.x_a)),
            ("pairs_per_bin", self.pairs_per_bin.to_string()),
            ("max_events", self.max_events.to_string()),
            ("phi_list", phis.join(",")),
            ("n_events", self.n_events.to_string()),
            ("n_ensemble", self.n_ensemble.to_string()),
            ("hist_reach", format!("{:?}", self.hist_reach)),
            ("planes", self.planes.to_string()),
            ("pair_rate", format!("{:?}", self.pair_rate)),
        ]
    }

    pub fn to_conf(&self) -> String {
        let mut s = String::from("# resolved pilotwave run configuration\n");
        for (k, v) in self.entries() {
            writeln!(s, "{k} = {v}").unwrap();
        }
        s
    }

    pub fn state(&self) -> Result<StateConfig, ConfigError> {
        let p = SlitParams::from_separation(self.sigma, self.d).map_err(core_err)?;
        StateConfig::new(p, p, self.phi, self.kind).map_err(core_err)
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, ConfigError> {
        let ic = IntegratorConfig {
            dt: self.dt,
            t_end: self.t_end,
            method: self.method,
            eps_node: self.eps_node,
            max_step_shrink: self.max_step_shrink,
            record_stride: self.record_stride,
        };
        ic.validate().map_err(core_err)?;
        Ok(ic)
    }

    pub fn pointer(&self) -> Result<PointerModel, ConfigError> {
        PointerModel::new(self.kappa, Side::B).map_err(core_err)
    }

    pub fn budget(&self) -> Result<BudgetSpec, ConfigError> {
        BudgetSpec::new(self.planes, self.bins as u64, self.pairs_per_bin as u64, self.pair_rate)
            .map_err(core_err)
    }

    /// Phases for the profile scenario: `phi_list`, or `phi` alone.
    pub fn profile_phases(&self) -> Vec<f64> {
        if self.phi_list.is_empty() {
            vec![self.phi]
        } else {
            self.phi_list.clone()
        }
    }

    /// Check everything the chosen scenario will use before any work starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.state()?;
        let positive = |key: &str, x: f64| if x > 0.0 { Ok(()) } else { Err(err(key, format!("must be > 0, got {x}"))) };
        let nonneg = |key: &str, x: f64| if x >= 0.0 { Ok(()) } else { Err(err(key, format!("must be >= 0, got {x}"))) };
        match self.scenario {
            Scenario::Trajectories => {
                self.integrator()?;
                if self.n_traj == 0 && self.starts.is_empty() {
                    return Err(err("starts", "give starting points or set n_traj > 0"));
                }
            }
            Scenario::JointDensity | Scenario::Marginals => {
                nonneg("t_plane", self.t_plane)?;
                positive("grid_reach", self.grid_reach)?;
                Grid1D::new(-1.0, 1.0, self.grid_n).map_err(core_err)?;
            }
            Scenario::VelocityProfile | Scenario::WeakSim => {
                nonneg("t_plane", self.t_plane)?;
                self.pointer()?;
                if self.bins == 0 {
                    return Err(err("bins", "must be positive"));
                }
                if self.bins_a < 2 {
                    return Err(err("bins_a", "must be at least 2"));
                }
                if self.scenario == Scenario::VelocityProfile {
                    if self.pairs_per_bin == 0 {
                        return Err(err("pairs_per_bin", "must be positive"));
                    }
                    if self.max_events < self.pairs_per_bin {
                        return Err(err("max_events", "must be at least pairs_per_bin"));
                    }
                } else if self.n_events == 0 {
                    return Err(err("n_events", "must be positive"));
                }
            }
            Scenario::Equivariance => {
                self.integrator()?;
                EnsembleSpec::new(self.n_ensemble, self.seed).map_err(core_err)?;
                if self.bins == 0 {
                    return Err(err("bins", "must be positive"));
                }
                positive("hist_reach", self.hist_reach)?;
            }
            Scenario::Budget => {
                self.budget()?;
            }
        }
        Ok(())
    }
}

/// Wrap a core validation error, naming the config key it came from.
fn core_err(e: pilotwave::Error) -> ConfigError {
    let field = match &e {
        pilotwave::Error::InvalidParam { field, .. } => match *field {
            "half_sep" => "d",
            "grid points" => "grid_n",
            "n" => "n_ensemble",
            f => f,
        },
        _ => "config",
    };
    err(field, e.to_string())
}
