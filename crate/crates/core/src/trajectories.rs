//! Bohmian trajectories in the (x_A, x_B) configuration space.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{ensure, Error, Result};
use crate::rng::{substream, tagged};
use crate::wavefield::{
    packet_amplitude, velocity_pair, Complex, Slit, SpacetimePoint, StateConfig, StateKind, DEFAULT_EPS_NODE,
};

const TAG_INITIAL: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Rk4,
    /// Forward Euler; only meant as a small-step cross-check.
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    pub eps_node: f64,
    /// How many times a step may be halved when it runs into a node region.
    pub max_step_shrink: u32,
    /// Keep every `record_stride`-th step; the first and last samples are always kept.
    pub record_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1e-3,
            t_end: 4.0,
            method: Method::Rk4,
            eps_node: DEFAULT_EPS_NODE,
            max_step_shrink: 10,
            record_stride: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.dt.is_finite() && self.dt > 0.0, "dt", format!("must be > 0, got {}", self.dt))?;
        ensure(
            self.t_end.is_finite() && self.t_end > 0.0,
            "t_end",
            format!("must be > 0, got {}", self.t_end),
        )?;
        ensure(
            self.eps_node.is_finite() && self.eps_node > 0.0,
            "eps_node",
            format!("must be > 0, got {}", self.eps_node),
        )?;
        ensure(self.record_stride >= 1, "record_stride", "must be at least 1")?;
        ensure(self.max_step_shrink <= 40, "max_step_shrink", "must be at most 40")
    }

    /// Just the endpoints are recorded.
    pub fn endpoints_only(self) -> Self {
        IntegratorConfig {
            record_stride: usize::MAX,
            ..self
        }
    }

    fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    fn time(&self, k: usize) -> f64 {
        (k as f64 * self.dt).min(self.t_end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x_a: f64,
    pub x_b: f64,
    pub v_a: f64,
    pub v_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn start(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn end(&self) -> &Sample {
        self.samples.last().expect("trajectory has samples")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub n: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(n: usize, seed: u64) -> Result<Self> {
        ensure(n >= 1, "n", "ensemble size must be at least 1")?;
        Ok(EnsembleSpec { n, seed })
    }
}

/// One draw from |ψ(·, t)|² using the substream for `index`.
///
/// Proposal: pick the u or d branch with probability ½ and draw both
/// coordinates from that branch's Gaussian |g|². The target over the
/// proposal is N²(1 + w) with w = 2Re(e^{iφ} (g_u g_u)* g_d g_d)/(|g_u g_u|² + |g_d g_d|²)
/// and |w| ≤ 1, so accepting with probability (1 + w)/2 is exact.
fn draw(c: &StateConfig, t: f64, seed: u64, index: u64) -> (f64, f64) {
    let mut rng = substream(seed, index);
    let (pa, pb) = (&c.slits_a, &c.slits_b);
    let normal = |center: f64, width: f64| Normal::new(center, width).expect("positive width");
    let upper_a = normal(pa.half_sep, pa.width_at(t));
    let upper_b = normal(pb.half_sep, pb.width_at(t));
    if c.kind == StateKind::ProductUpper {
        return (upper_a.sample(&mut rng), upper_b.sample(&mut rng));
    }
    let lower_a = normal(-pa.half_sep, pa.width_at(t));
    let lower_b = normal(-pb.half_sep, pb.width_at(t));
    let phase = Complex::from_polar(1.0, c.phi);
    loop {
        let (xa, xb) = if rng.random::<bool>() {
            (upper_a.sample(&mut rng), upper_b.sample(&mut rng))
        } else {
            (lower_a.sample(&mut rng), lower_b.sample(&mut rng))
        };
        let uu = packet_amplitude(Slit::Upper, xa, t, pa) * packet_amplitude(Slit::Upper, xb, t, pb);
        let dd = packet_amplitude(Slit::Lower, xa, t, pa) * packet_amplitude(Slit::Lower, xb, t, pb);
        let incoherent = uu.norm_sqr() + dd.norm_sqr();
        let w = if incoherent > 0.0 {
            2.0 * (phase * uu.conj() * dd).re / incoherent
        } else {
            0.0
        };
        if rng.random::<f64>() < 0.5 * (1.0 + w) {
            return (xa, xb);
        }
    }
}

/// `n` i.i.d. draws from |ψ(·, t)|², deterministic in the seed and
/// independent of thread count.
pub fn sample_at(c: &StateConfig, t: f64, spec: &EnsembleSpec) -> Vec<(f64, f64)> {
    (0..spec.n)
        .into_par_iter()
        .map(|i| draw(c, t, spec.seed, tagged(TAG_INITIAL, i as u32)))
        .collect()
}

/// Equilibrium initial conditions: draws from |ψ(·, 0)|².
pub fn sample_initial(c: &StateConfig, spec: &EnsembleSpec) -> Vec<(f64, f64)> {
    sample_at(c, 0.0, spec)
}

type State = (f64, f64);

fn field(t: f64, x: State, c: &StateConfig, eps: f64) -> Result<State> {
    velocity_pair(&SpacetimePoint { x_a: x.0, x_b: x.1, t }, c, eps)
}

fn single_step(method: Method, t: f64, h: f64, x: State, k1: State, c: &StateConfig, eps: f64) -> Result<State> {
    let at = |s: f64, k: State| (x.0 + s * k.0, x.1 + s * k.1);
    match method {
        Method::Euler => Ok(at(h, k1)),
        Method::Rk4 => {
            let k2 = field(t + 0.5 * h, at(0.5 * h, k1), c, eps)?;
            let k3 = field(t + 0.5 * h, at(0.5 * h, k2), c, eps)?;
            let k4 = field(t + h, at(h, k3), c, eps)?;
            Ok((
                x.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
                x.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
            ))
        }
    }
}

/// Advance from `t0` to `t1`, splitting into 2^k equal substeps when a stage
/// lands in a node region.
fn advance(t0: f64, t1: f64, x: State, v: State, c: &StateConfig, ic: &IntegratorConfig) -> Result<State> {
    let mut last_err = None;
    for shrink in 0..=ic.max_step_shrink {
        let parts = 1usize << shrink;
        let h = (t1 - t0) / parts as f64;
        let mut y = x;
        let mut k1 = v;
        let mut ok = true;
        for j in 0..parts {
            let t = t0 + j as f64 * h;
            if j > 0 {
                match field(t, y, c, ic.eps_node) {
                    Ok(k) => k1 = k,
                    Err(e) => {
                        last_err = Some(e);
                        ok = false;
                        break;
                    }
                }
            }
            match single_step(ic.method, t, h, y, k1, c, ic.eps_node) {
                Ok(next) => y = next,
                Err(e) => {
                    last_err = Some(e);
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(y);
        }
    }
    match last_err {
        Some(Error::NodeRegion { .. }) | None => Err(Error::NodeStall { t_last: t0 }),
        Some(e) => Err(e),
    }
}

/// Integrate dx/dt = v(x, t) from t = 0 to `t_end` starting at `x0`.
pub fn integrate_pair(x0: (f64, f64), c: &StateConfig, ic: &IntegratorConfig) -> Result<Trajectory> {
    ic.validate()?;
    ensure(x0.0.is_finite() && x0.1.is_finite(), "x0", "must be finite")?;
    let mut x = x0;
    let mut v = field(0.0, x, c, ic.eps_node)?;
    let steps = ic.steps();
    let mut samples = Vec::with_capacity(if ic.record_stride == 1 { steps + 1 } else { 2 });
    let sample = |t: f64, x: State, v: State| Sample {
        t,
        x_a: x.0,
        x_b: x.1,
        v_a: v.0,
        v_b: v.1,
    };
    samples.push(sample(0.0, x, v));
    for k in 0..steps {
        let (t0, t1) = (ic.time(k), ic.time(k + 1));
        x = advance(t0, t1, x, v, c, ic)?;
        v = field(t1, x, c, ic.eps_node).map_err(|_| Error::NodeStall { t_last: t1 })?;
        if (k + 1) % ic.record_stride == 0 || k + 1 == steps {
            samples.push(sample(t1, x, v));
        }
    }
    Ok(Trajectory { samples })
}

/// Sample `spec.n` equilibrium starting points and integrate each one.
/// Stalled trajectories are returned as errors in their slot.
pub fn integrate_ensemble(c: &StateConfig, spec: &EnsembleSpec, ic: &IntegratorConfig) -> Vec<Result<Trajectory>> {
    let starts = sample_initial(c, spec);
    integrate_from(&starts, c, ic)
}

/// Integrate a batch of given starting points, in input order.
pub fn integrate_from(starts: &[(f64, f64)], c: &StateConfig, ic: &IntegratorConfig) -> Vec<Result<Trajectory>> {
    starts.par_iter().map(|&x0| integrate_pair(x0, c, ic)).collect()
}

/// |x_B(t_end; φ1) − x_B(t_end; φ2)| for a common starting point.
pub fn divergence_metric(x0: (f64, f64), c_base: &StateConfig, phi1: f64, phi2: f64, ic: &IntegratorConfig) -> Result<f64> {
    let ic = ic.endpoints_only();
    let a = integrate_pair(x0, &c_base.with_phi(phi1), &ic)?;
    let b = integrate_pair(x0, &c_base.with_phi(phi2), &ic)?;
    Ok((a.end().x_b - b.end().x_b).abs())
}
