//! One function per scenario. Each writes its CSV files and fills a [`Report`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use pilotwave::analysis::{distribution_distance, expected_histogram, Bins, Grid1D, Histogram2D, Metric};
use pilotwave::experiment::{budget, estimate_profile, BinningSpec, EventGenerator};
use pilotwave::trajectories::{divergence_metric, integrate_from, sample_initial, EnsembleSpec};
use pilotwave::wavefield::{joint_density, marginal_density};
use pilotwave::{Side, SpacetimePoint};
use serde_json::{json, Map, Value};

use crate::config::{RunConfig, Scenario};

/// Incident counts and outputs collected while a run progresses.
#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<String>,
    pub node_stall: usize,
    pub saturation: usize,
    pub out_of_range: usize,
    pub underfilled_bins: usize,
    pub summary: Map<String, Value>,
    /// Per-item numerical failures; a nonempty list makes the run fail.
    pub failures: Vec<String>,
}

#[derive(Debug)]
pub enum RunError {
    Io(String),
    Numerical(String),
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

/// Full-precision float: 17 significant digits.
fn f(x: f64) -> String {
    format!("{x:.16e}")
}

struct Csv {
    out: BufWriter<File>,
}

impl Csv {
    fn create(prefix: &str, suffix: &str, header: &str, report: &mut Report) -> Result<Csv, RunError> {
        let path = PathBuf::from(format!("{prefix}_{suffix}.csv"));
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "{header}")?;
        report.files.push(path.display().to_string());
        Ok(Csv { out })
    }

    fn row(&mut self, fields: &[String]) -> Result<(), RunError> {
        writeln!(self.out, "{}", fields.join(","))?;
        Ok(())
    }

    fn finish(mut self) -> Result<(), RunError> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn run(cfg: &RunConfig, prefix: &str, report: &mut Report) -> Result<(), RunError> {
    match cfg.scenario {
        Scenario::Trajectories => trajectories(cfg, prefix, report),
        Scenario::JointDensity => joint(cfg, prefix, report),
        Scenario::Marginals => marginals(cfg, prefix, report),
        Scenario::VelocityProfile => profile(cfg, prefix, report),
        Scenario::WeakSim => weak_sim(cfg, prefix, report),
        Scenario::Equivariance => equivariance(cfg, prefix, report),
        Scenario::Budget => budget_row(cfg, prefix, report),
    }
}

fn config_error(e: impl std::fmt::Display) -> RunError {
    RunError::Numerical(e.to_string())
}

fn trajectories(cfg: &RunConfig, prefix: &str, report: &mut Report) -> Result<(), RunError> {
    let c = cfg.state().map_err(config_error)?;
    let ic = cfg.integrator().map_err(config_error)?;
    let starts = if cfg.n_traj > 0 {
        sample_initial(&c, &EnsembleSpec::new(cfg.n_traj, cfg.seed).map_err(config_error)?)
    } else {
        cfg.starts.clone()
    };
    let runs = integrate_from(&starts, &c, &ic);
    let mut csv = Csv::create(prefix, "trajectories", "traj_id,t,x_a,x_b,v_a,v_b", report)?;
    for (i, r) in runs.iter().enumerate() {
        match r {
            Ok(tr) => {
                for s in &tr.samples {
                    csv.row(&[i.to_string(), f(s.t), f(s.x_a), f(s.x_b), f(s.v_a), f(s.v_b)])?;
                }
            }
            Err(e) => {
                report.node_stall += 1;
                report.failures.push(format!("trajectory {i}: {e}"));
            }
        }
    }
    csv.finish()?;

    let mut csv = Csv::create(prefix, "divergence", "traj_id,x_a0,x_b0,phi1,phi2,divergence", report)?;
    for (i, &x0) in starts.iter().enumerate() {
        match divergence_metric(x0, &c, cfg.phi1, cfg.phi2, &ic) {
            Ok(d) => csv.row(&[i.to_string(), f(x0.0), f(x0.1), f(cfg.phi1), f(cfg.phi2), f(d)])?,
            Err(e) => {
                report.node_stall += 1;
                report.failures.push(format!("divergence for trajectory {i}: {e}"));
            }
        }
    }
    csv.finish()?;
    report.summary.insert("n_trajectories".into(), json!(starts.len()));
    Ok(())
}

fn axis(cfg: &RunConfig, side: Side) -> Result<Grid1D, RunError> {
    let c = cfg.state().map_err(config_error)?;
    let p = c.slits(side);
    let half = p.half_sep + cfg.grid_reach * p.width_at(cfg.t_plane);
    Grid1D::new(-half, half, cfg.grid_n).map_err(config_error)
}

fn joint(cfg: &RunConfig, prefix: &str, report: &mut Report) -> Result<(), RunError> {
    let c = cfg.state().map_err(config_error)?;
    let (ga, gb) = (axis(cfg, Side::A)?, axis(cfg, Side::B)?);
    let mut csv = Csv::create(prefix, "joint_density", "x_a,x_b,density", report)?;
    for xa in ga.points() {
        for xb in gb.points() {
            let rho = joint_density(&SpacetimePoint { x_a: xa, x_b: xb, t: cfg.t_plane }, &c);
            csv.row(&[f(xa), f(xb), f(rho)])?;
        }
    }
    csv.finish()
}

fn marginals(cfg: &RunConfig, prefix: &str, report: &mut Report) -> Result<(), RunError> {
    let c = cfg.state().map_err(config_error)?;
    let mut csv = Csv::create(prefix, "marginals", "side,x,density", report)?;
    for (side, name) in [(Side::A, "A"), (Side::B, "B")] {
        for x in axis(cfg, side)?.points() {
            csv.row(&[name.to_string(), f(x), f(marginal_density(side, x, cfg.t_plane, &c))])?;
        }
    }
    csv.finish()
}

fn profile(cfg: &RunConfig, prefix: &str, report: &mut Report) -> Result<(), RunError> {
    let pm = cfg.pointer().map_err(config_error)?;
    let mut per_file = Vec::new();
    for (k, phi) in cfg.profile_phases().into_iter().enumerate() {
        let c = cfg.state().map_err(config_error)?.with_phi(phi);
        let (bs, ia) = BinningSpec::centered_on_a(&c, cfg.t_plane, cfg.x_a, cfg.bins_a, cfg.bins).map_err(config_error)?;
        bs.validate(&c).map_err(config_error)?;
        let prof = estimate_profile(&c, &pm, &bs, ia, cfg.pairs_per_bin, cfg.max_events, cfg.seed).map_err(config_error)?;
        let mut csv = Csv::create(prefix, &format!("profile_{k}"), "x_b_center,v_hat,stderr,n_used,v_analytic", report)?;
        for b in &prof.bins {
            csv.row(&[f(b.x_b_center), f(b.v_hat), f(b.stderr), b.n_used.to_string(), f(b.v_analytic)])?;
        }
        csv.finish()?;
        report.saturation += prof.incidents.saturation;
        report.underfilled_bins += prof.underfilled.len();
        for e in &prof.underfilled {
            report.failures.push(format!("profile {k} (phi = {phi}): {e}"));
        }
        per_file.push(json!({
            "phi": c.phi,
            "x_a_bin_center": bs.bins_a.center(ia),
            "typical_stderr": prof.typical_stderr(),
        }));
    }
    report.summary.insert("profiles".into(), Value::Array(per_file));
    Ok(())
}

fn weak_sim(cfg: &RunConfig, prefix: &str, report: &mut Report) -> Result<(), RunError> {
    let c = cfg.state().map_err(config_error)?;
    let pm = cfg.pointer().map_err(config_error)?;
    let bs = BinningSpec::covering(&c, cfg.t_plane, cfg.bins_a, cfg.bins).map_err(config_error)?;
    let gen = EventGenerator::new(&c, &pm, &bs).map_err(config_error)?;
    let (events, inc) = gen.events(cfg.n_events, cfg.seed);
    let bin = |b: Option<usize>| b.map(|i| i.to_string()).unwrap_or_default();
    let mut csv = Csv::create(prefix, "events", "event_id,x_a,x_b,bin_a,bin_b,outcome", report)?;
    for (i, e) in events.iter().enumerate() {
        match e {
            Ok(e) => csv.row(&[i.to_string(), f(e.x_a), f(e.x_b), bin(e.bin_a), bin(e.bin_b), e.outcome.to_string()])?,
            Err(err) => report.failures.push(format!("event {i}: {err}")),
        }
    }
    csv.finish()?;
    report.saturation += inc.saturation;
    report.out_of_range += inc.out_of_range;
    report.summary.insert("node_events".into(), json!(inc.node));
    Ok(())
}

fn equivariance(cfg: &RunConfig, prefix: &str, report: &mut Report) -> Result<(), RunError> {
    let c = cfg.state().map_err(config_error)?;
    let ic = cfg.integrator().map_err(config_error)?.endpoints_only();
    let spec = EnsembleSpec::new(cfg.n_ensemble, cfg.seed).map_err(config_error)?;
    let starts = sample_initial(&c, &spec);
    let runs = integrate_from(&starts, &c, &ic);
    let mut ends = Vec::with_capacity(runs.len());
    for (i, r) in runs.iter().enumerate() {
        match r {
            Ok(tr) => ends.push((tr.end().x_a, tr.end().x_b)),
            Err(e) => {
                report.node_stall += 1;
                report.failures.push(format!("trajectory {i}: {e}"));
            }
        }
    }
    let t = ic.t_end;
    let range = |side: Side| {
        let p = c.slits(side);
        let r = p.half_sep + cfg.hist_reach * p.width_at(t);
        Bins::new(-r, r, cfg.bins)
    };
    let (ba, bb) = (range(Side::A).map_err(config_error)?, range(Side::B).map_err(config_error)?);
    let hist = Histogram2D::from_points(ba, bb, &ends);
    let expected = expected_histogram(&c, t, ba, bb, 8, ends.len() as f64);
    let tv = distribution_distance(&hist, &expected, Metric::TotalVariation).map_err(config_error)?;
    let mut csv = Csv::create(prefix, "equivariance", "x_a_center,x_b_center,observed,expected", report)?;
    for i in 0..ba.n {
        for j in 0..bb.n {
            let k = i * bb.n + j;
            csv.row(&[f(ba.center(i)), f(bb.center(j)), f(hist.counts[k]), f(expected.counts[k])])?;
        }
    }
    csv.finish()?;
    report.out_of_range += hist.outside as usize;
    report.summary.insert("total_variation".into(), json!(tv.value));
    report.summary.insert("t".into(), json!(t));
    Ok(())
}

fn budget_row(cfg: &RunConfig, prefix: &str, report: &mut Report) -> Result<(), RunError> {
    let b = cfg.budget().map_err(config_error)?;
    let seconds = budget(&b);
    let mut csv = Csv::create(prefix, "budget", "planes,bins,pairs_per_bin,pair_rate,seconds", report)?;
    csv.row(&[
        b.n_planes.to_string(),
        b.n_bins.to_string(),
        b.pairs_per_bin.to_string(),
        f(b.pair_rate),
        f(seconds),
    ])?;
    csv.finish()?;
    report.summary.insert("hours".into(), json!(seconds / 3600.0));
    Ok(())
}
