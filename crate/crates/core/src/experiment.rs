//! Monte-Carlo model of the weak-measurement experiment.
//!
//! Photon pairs are detected jointly at a transverse plane; before detection
//! one photon's transverse momentum is weakly coupled to a two-state pointer
//! (its polarization). The pointer reads +1 with probability
//! (1 + κ·Re p_w)/2, so the mean readout over events landing in a bin pair,
//! divided by κ, estimates the Bohmian velocity there.

use rand::Rng;
use rayon::prelude::*;

use crate::analysis::{Bins, Grid1D};
use crate::error::{ensure, Error, Result};
use crate::rng::{substream, tagged, Stream};
use crate::wavefield::{
    joint_density, local, marginal_density, velocity, Side, SpacetimePoint, StateConfig, DEFAULT_EPS_NODE,
};

const TAG_EVENTS: u32 = 2;
const TAG_PROFILE: u32 = 3;

/// Weak-coupling strength used when none is given.
pub const DEFAULT_KAPPA: f64 = 0.1;
/// Minimum marginal probability a binning range must enclose.
pub const MIN_COVERAGE: f64 = 0.999;

/// Linear-response pointer: readout bias κ·Re(p_w) on the chosen side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerModel {
    pub kappa: f64,
    pub side: Side,
}

impl PointerModel {
    pub fn new(kappa: f64, side: Side) -> Result<Self> {
        ensure(kappa.is_finite() && kappa > 0.0, "kappa", format!("must be > 0, got {kappa}"))?;
        Ok(PointerModel { kappa, side })
    }
}

impl Default for PointerModel {
    fn default() -> Self {
        PointerModel {
            kappa: DEFAULT_KAPPA,
            side: Side::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningSpec {
    pub t_plane: f64,
    pub bins_a: Bins,
    pub bins_b: Bins,
}

impl BinningSpec {
    pub fn new(t_plane: f64, range_a: (f64, f64), n_bins_a: usize, range_b: (f64, f64), n_bins_b: usize) -> Result<Self> {
        ensure(t_plane.is_finite() && t_plane >= 0.0, "t_plane", "must be >= 0")?;
        Ok(BinningSpec {
            t_plane,
            bins_a: Bins::new(range_a.0, range_a.1, n_bins_a)?,
            bins_b: Bins::new(range_b.0, range_b.1, n_bins_b)?,
        })
    }

    /// Symmetric ranges wide enough for [`MIN_COVERAGE`] on both sides.
    pub fn covering(c: &StateConfig, t_plane: f64, n_bins_a: usize, n_bins_b: usize) -> Result<Self> {
        let ra = coverage_half_width(c, Side::A, t_plane);
        let rb = coverage_half_width(c, Side::B, t_plane);
        Self::new(t_plane, (-ra, ra), n_bins_a, (-rb, rb), n_bins_b)
    }

    /// Like [`BinningSpec::covering`], but side A's bins are shifted so one
    /// of them is centered on `x_a`. Returns the spec and that bin's index.
    pub fn centered_on_a(c: &StateConfig, t_plane: f64, x_a: f64, n_bins_a: usize, n_bins_b: usize) -> Result<(Self, usize)> {
        ensure(n_bins_a >= 2, "n_bins_a", "need at least 2 bins to center one")?;
        let ra = coverage_half_width(c, Side::A, t_plane);
        ensure(x_a.abs() < ra, "x_a", format!("must lie inside the covered range ±{ra}"))?;
        let rb = coverage_half_width(c, Side::B, t_plane);
        // n bins spanning 2R + w, so a shift of up to w/2 keeps [−R, R] covered.
        let w = 2.0 * ra / (n_bins_a - 1) as f64;
        let k = ((x_a + ra) / w).round();
        let lo = x_a - 0.5 * w - k * w;
        let spec = Self::new(t_plane, (lo, lo + n_bins_a as f64 * w), n_bins_a, (-rb, rb), n_bins_b)?;
        let index = spec.bins_a.index(x_a).expect("x_a inside shifted range");
        Ok((spec, index))
    }

    /// Marginal probability enclosed by each side's range.
    pub fn coverage(&self, c: &StateConfig) -> Result<(f64, f64)> {
        let mass = |side: Side, b: &Bins| -> Result<f64> {
            let g = Grid1D::simpson(b.lo, b.hi, 4001)?;
            let f: Vec<f64> = g.points().map(|x| marginal_density(side, x, self.t_plane, c)).collect();
            crate::analysis::quadrature_1d(&g, &f)
        };
        Ok((mass(Side::A, &self.bins_a)?, mass(Side::B, &self.bins_b)?))
    }

    pub fn validate(&self, c: &StateConfig) -> Result<()> {
        let (ca, cb) = self.coverage(c)?;
        ensure(ca >= MIN_COVERAGE, "range_a", format!("covers {ca:.6} of the marginal, need {MIN_COVERAGE}"))?;
        ensure(cb >= MIN_COVERAGE, "range_b", format!("covers {cb:.6} of the marginal, need {MIN_COVERAGE}"))
    }
}

/// Half-width enclosing both slit packets out to 3.5 standard deviations,
/// which leaves well under 10⁻³ of the marginal outside.
fn coverage_half_width(c: &StateConfig, side: Side, t: f64) -> f64 {
    let p = c.slits(side);
    p.half_sep + 3.5 * p.width_at(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub x_a: f64,
    pub x_b: f64,
    pub bin_a: Option<usize>,
    pub bin_b: Option<usize>,
    /// Pointer readout, +1 or −1.
    pub outcome: i8,
}

impl DetectionEvent {
    pub fn out_of_range(&self) -> bool {
        self.bin_a.is_none() || self.bin_b.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Incidents {
    pub saturation: usize,
    pub node: usize,
    pub out_of_range: usize,
    pub envelope_violations: usize,
}

impl Incidents {
    pub fn merge(self, o: Incidents) -> Incidents {
        Incidents {
            saturation: self.saturation + o.saturation,
            node: self.node + o.node,
            out_of_range: self.out_of_range + o.out_of_range,
            envelope_violations: self.envelope_violations + o.envelope_violations,
        }
    }
}

/// Rejection sampler for a 2D density on a rectangle: cells are chosen by
/// inverse CDF of a tabulated piecewise-constant envelope, then points
/// uniform in the cell are accepted with probability ρ/envelope.
#[derive(Debug, Clone)]
pub struct GridSampler {
    pub x: Bins,
    pub y: Bins,
    envelope: Vec<f64>,
    cumulative: Vec<f64>,
}

/// Safety factor on the per-cell envelope.
const ENVELOPE_MARGIN: f64 = 1.25;

impl GridSampler {
    /// `probe` sub-samples per cell edge are used to find the cell maximum.
    pub fn new<F>(x: Bins, y: Bins, probe: usize, density: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let probe = probe.max(2);
        let envelope: Vec<f64> = (0..x.n * y.n)
            .into_par_iter()
            .map(|k| {
                let (x0, x1) = x.edges(k / y.n);
                let (y0, y1) = y.edges(k % y.n);
                let mut m = 0.0f64;
                for i in 0..=probe {
                    for j in 0..=probe {
                        let xa = x0 + (x1 - x0) * i as f64 / probe as f64;
                        let xb = y0 + (y1 - y0) * j as f64 / probe as f64;
                        m = m.max(density(xa, xb));
                    }
                }
                m * ENVELOPE_MARGIN
            })
            .collect();
        let cell = x.width() * y.width();
        let mut acc = 0.0;
        let cumulative = envelope
            .iter()
            .map(|e| {
                acc += e * cell;
                acc
            })
            .collect();
        GridSampler {
            x,
            y,
            envelope,
            cumulative,
        }
    }

    /// One exact draw; `violations` counts points where the density exceeded
    /// the tabulated envelope (zero for a smooth density and fine cells).
    pub fn sample<F, R>(&self, rng: &mut R, density: F, violations: &mut usize) -> (f64, f64)
    where
        F: Fn(f64, f64) -> f64,
        R: Rng + ?Sized,
    {
        let total = *self.cumulative.last().expect("non-empty grid");
        loop {
            let u = rng.random::<f64>() * total;
            let k = self.cumulative.partition_point(|&c| c <= u).min(self.envelope.len() - 1);
            let (x0, x1) = self.x.edges(k / self.y.n);
            let (y0, y1) = self.y.edges(k % self.y.n);
            let xa = x0 + (x1 - x0) * rng.random::<f64>();
            let xb = y0 + (y1 - y0) * rng.random::<f64>();
            let rho = density(xa, xb);
            let env = self.envelope[k];
            if rho > env {
                *violations += 1;
            }
            if rng.random::<f64>() * env < rho {
                return (xa, xb);
            }
        }
    }
}

/// Pointer readout for an event at (x_A, x_B) in the detection plane.
fn readout<R: Rng + ?Sized>(c: &StateConfig, pm: &PointerModel, pt: &SpacetimePoint, rng: &mut R) -> Result<i8> {
    let v = velocity(pm.side, pt, c, DEFAULT_EPS_NODE)?;
    let bias = pm.kappa * v;
    if bias.abs() > 1.0 {
        return Err(Error::Saturation { value: bias });
    }
    Ok(if rng.random::<f64>() < 0.5 * (1.0 + bias) { 1 } else { -1 })
}

/// Samples detection events for a fixed state, pointer and binning.
/// Building one tabulates the joint density at the detection plane.
#[derive(Debug, Clone)]
pub struct EventGenerator {
    pub state: StateConfig,
    pub pointer: PointerModel,
    pub binning: BinningSpec,
    sampler: GridSampler,
}

/// Cells per axis of the sampling table.
const TABLE_CELLS: usize = 256;

impl EventGenerator {
    pub fn new(c: &StateConfig, pm: &PointerModel, bs: &BinningSpec) -> Result<Self> {
        let t = bs.t_plane;
        let reach = |side: Side| {
            let p = c.slits(side);
            p.half_sep + 8.0 * p.width_at(t)
        };
        let (ra, rb) = (reach(Side::A), reach(Side::B));
        let sampler = GridSampler::new(
            Bins::new(-ra, ra, TABLE_CELLS)?,
            Bins::new(-rb, rb, TABLE_CELLS)?,
            3,
            |xa, xb| joint_density(&SpacetimePoint { x_a: xa, x_b: xb, t }, c),
        );
        Ok(EventGenerator {
            state: *c,
            pointer: *pm,
            binning: *bs,
            sampler,
        })
    }

    fn density(&self) -> impl Fn(f64, f64) -> f64 + '_ {
        let t = self.binning.t_plane;
        move |xa, xb| joint_density(&SpacetimePoint { x_a: xa, x_b: xb, t }, &self.state)
    }

    /// One coincidence: positions drawn from |ψ(t_plane)|², then the pointer.
    pub fn simulate_event(&self, stream: &mut Stream, incidents: &mut Incidents) -> Result<DetectionEvent> {
        let (x_a, x_b) = self
            .sampler
            .sample(stream, self.density(), &mut incidents.envelope_violations);
        let pt = SpacetimePoint {
            x_a,
            x_b,
            t: self.binning.t_plane,
        };
        let outcome = readout(&self.state, &self.pointer, &pt, stream).inspect_err(|e| match e {
            Error::Saturation { .. } => incidents.saturation += 1,
            Error::NodeRegion { .. } => incidents.node += 1,
            _ => {}
        })?;
        let event = DetectionEvent {
            x_a,
            x_b,
            bin_a: self.binning.bins_a.index(x_a),
            bin_b: self.binning.bins_b.index(x_b),
            outcome,
        };
        if event.out_of_range() {
            incidents.out_of_range += 1;
        }
        Ok(event)
    }

    /// `n` events, event `i` drawn from its own substream. Events that fail
    /// (saturation, node) keep their slot as an error.
    pub fn events(&self, n: usize, seed: u64) -> (Vec<Result<DetectionEvent>>, Incidents) {
        let out: Vec<(Result<DetectionEvent>, Incidents)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(seed, tagged(TAG_EVENTS, i as u32));
                let mut inc = Incidents::default();
                let ev = self.simulate_event(&mut rng, &mut inc);
                (ev, inc)
            })
            .collect();
        let incidents = out.iter().fold(Incidents::default(), |a, (_, b)| a.merge(*b));
        (out.into_iter().map(|(e, _)| e).collect(), incidents)
    }
}

/// Convenience wrapper that builds an [`EventGenerator`] for a single event.
pub fn simulate_event(c: &StateConfig, pm: &PointerModel, bs: &BinningSpec, stream: &mut Stream) -> Result<DetectionEvent> {
    EventGenerator::new(c, pm, bs)?.simulate_event(stream, &mut Incidents::default())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileBin {
    pub x_b_center: f64,
    pub v_hat: f64,
    pub stderr: f64,
    pub n_used: usize,
    /// Velocity at the center of the (bin_A, bin_B) cell.
    pub v_analytic: f64,
    /// Density-weighted mean velocity over the cell, ∬j / ∬ρ; what v̂ estimates.
    pub v_bin_avg: f64,
    /// Probability mass of the cell under |ψ(t_plane)|².
    pub cell_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub bins: Vec<ProfileBin>,
    /// One `UnderfilledBin` per bin that hit the event cap.
    pub underfilled: Vec<Error>,
    pub incidents: Incidents,
}

impl Profile {
    /// Median standard error over filled bins.
    pub fn typical_stderr(&self) -> f64 {
        let mut s: Vec<f64> = self.bins.iter().filter(|b| b.n_used > 1).map(|b| b.stderr).collect();
        if s.is_empty() {
            return f64::NAN;
        }
        s.sort_by(|a, b| a.total_cmp(b));
        s[s.len() / 2]
    }
}

/// Sub-samples per cell edge for the analytic cell averages.
const CELL_QUADRATURE: usize = 33;

/// ∬ρ and ∬j_side over one cell by Simpson; j = Im(ψ* ∂ψ) is finite at nodes.
fn cell_moments(c: &StateConfig, side: Side, t: f64, xr: (f64, f64), yr: (f64, f64)) -> (f64, f64) {
    let gx = Grid1D::new(xr.0, xr.1, CELL_QUADRATURE).expect("cell");
    let gy = Grid1D::new(yr.0, yr.1, CELL_QUADRATURE).expect("cell");
    let w = |i: usize| match i {
        0 => 1.0,
        i if i == CELL_QUADRATURE - 1 => 1.0,
        i if i % 2 == 1 => 4.0,
        _ => 2.0,
    };
    let (mut rho, mut j) = (0.0, 0.0);
    for (i, xa) in gx.points().enumerate() {
        for (k, xb) in gy.points().enumerate() {
            let l = local(&SpacetimePoint { x_a: xa, x_b: xb, t }, c);
            let d = match side {
                Side::A => l.d_a,
                Side::B => l.d_b,
            };
            let wk = w(i) * w(k);
            rho += wk * l.psi.norm_sqr();
            j += wk * (l.psi.conj() * d).im;
        }
    }
    let scale = gx.spacing() * gy.spacing() / 9.0;
    (rho * scale, j * scale)
}

/// Reconstruct the velocity profile of the pointer side at the detection
/// plane, with the other detector held on `fixed_bin_a`.
///
/// Each bin pair plays the role of one detector placement and collects
/// `pairs_per_bin` coincidences, drawn from |ψ|² restricted to that cell.
/// Saturated events are discarded and counted; a bin that cannot fill
/// within `max_events` draws is reported as `UnderfilledBin`.
pub fn estimate_profile(
    c: &StateConfig,
    pm: &PointerModel,
    bs: &BinningSpec,
    fixed_bin_a: usize,
    pairs_per_bin: usize,
    max_events: usize,
    seed: u64,
) -> Result<Profile> {
    ensure(pairs_per_bin >= 1, "pairs_per_bin", "must be at least 1")?;
    ensure(fixed_bin_a < bs.bins_a.n, "fixed_bin_a", format!("must be < {}", bs.bins_a.n))?;
    ensure(max_events >= pairs_per_bin, "max_events", "must be at least pairs_per_bin")?;
    let t = bs.t_plane;
    let a_edges = bs.bins_a.edges(fixed_bin_a);
    let a_center = bs.bins_a.center(fixed_bin_a);

    let results: Vec<(ProfileBin, Option<Error>, Incidents)> = (0..bs.bins_b.n)
        .into_par_iter()
        .map(|jb| {
            let b_edges = bs.bins_b.edges(jb);
            let x_b_center = bs.bins_b.center(jb);
            let density = |xa: f64, xb: f64| joint_density(&SpacetimePoint { x_a: xa, x_b: xb, t }, c);
            let sampler = GridSampler::new(
                Bins::new(a_edges.0, a_edges.1, 16).expect("bin"),
                Bins::new(b_edges.0, b_edges.1, 16).expect("bin"),
                3,
                density,
            );
            let mut rng = substream(seed, tagged(TAG_PROFILE, jb as u32));
            let mut inc = Incidents::default();
            let (mut n, mut sum, mut sum_sq, mut drawn) = (0usize, 0.0f64, 0.0f64, 0usize);
            while n < pairs_per_bin && drawn < max_events {
                drawn += 1;
                let (xa, xb) = sampler.sample(&mut rng, density, &mut inc.envelope_violations);
                let pt = SpacetimePoint { x_a: xa, x_b: xb, t };
                match readout(c, pm, &pt, &mut rng) {
                    Ok(o) => {
                        let o = f64::from(o);
                        n += 1;
                        sum += o;
                        sum_sq += o * o;
                    }
                    Err(Error::Saturation { .. }) => inc.saturation += 1,
                    Err(Error::NodeRegion { .. }) => inc.node += 1,
                    Err(_) => unreachable!("readout only fails with saturation or node"),
                }
            }
            let mean = if n > 0 { sum / n as f64 } else { f64::NAN };
            let var = if n > 1 {
                (sum_sq - n as f64 * mean * mean) / (n - 1) as f64
            } else {
                f64::NAN
            };
            let (rho, j) = cell_moments(c, pm.side, t, a_edges, b_edges);
            let v_analytic = velocity(pm.side, &SpacetimePoint { x_a: a_center, x_b: x_b_center, t }, c, DEFAULT_EPS_NODE)
                .unwrap_or(f64::NAN);
            let bin = ProfileBin {
                x_b_center,
                v_hat: mean / pm.kappa,
                stderr: var.max(0.0).sqrt() / (pm.kappa * (n as f64).sqrt()),
                n_used: n,
                v_analytic,
                v_bin_avg: j / rho,
                cell_mass: rho,
            };
            let under = (n < pairs_per_bin).then_some(Error::UnderfilledBin {
                bin: jb,
                n_used: n,
                wanted: pairs_per_bin,
            });
            (bin, under, inc)
        })
        .collect();

    let incidents = results.iter().fold(Incidents::default(), |a, r| a.merge(r.2));
    let underfilled = results.iter().filter_map(|r| r.1.clone()).collect();
    Ok(Profile {
        bins: results.into_iter().map(|r| r.0).collect(),
        underfilled,
        incidents,
    })
}

/// Measurement-time arithmetic for mapping the full field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetSpec {
    pub n_planes: u64,
    /// Bins per side.
    pub n_bins: u64,
    pub pairs_per_bin: u64,
    /// Detected coincidences per second.
    pub pair_rate: f64,
}

impl BudgetSpec {
    pub fn new(n_planes: u64, n_bins: u64, pairs_per_bin: u64, pair_rate: f64) -> Result<Self> {
        ensure(n_planes > 0, "planes", "must be positive")?;
        ensure(n_bins > 0, "bins", "must be positive")?;
        ensure(pairs_per_bin > 0, "pairs_per_bin", "must be positive")?;
        ensure(pair_rate.is_finite() && pair_rate > 0.0, "pair_rate", "must be positive")?;
        Ok(BudgetSpec {
            n_planes,
            n_bins,
            pairs_per_bin,
            pair_rate,
        })
    }
}

/// Seconds of data taking: every plane needs `pairs_per_bin` events in each
/// of the `n_bins²` bin combinations, and one combination sees
/// `pair_rate / n_bins²` of the coincidences.
pub fn budget(b: &BudgetSpec) -> f64 {
    let combos = (b.n_bins * b.n_bins) as f64;
    b.n_planes as f64 * combos * b.pairs_per_bin as f64 * combos / b.pair_rate
}
