//! Grids, quadrature, histograms and the checks that certify the
//! wavefield: the independent split-step Schrödinger oracle, the
//! no-signaling gap between marginals, and the phase-opposed fringe identity.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{ensure, Error, Result};
use crate::wavefield::{
    incoherent_density, joint_density, marginal_density, packet_amplitude, Complex, Side, Slit,
    SlitParams, SpacetimePoint, StateConfig, StateKind,
};

/// Relative tolerance of the Richardson check in the quadrature routines.
pub const RICHARDSON_TOL: f64 = 1e-6;

/// Pseudo-count added to each histogram cell by the chi-square metric.
pub const CHI_SQUARE_PSEUDO_COUNT: f64 = 0.5;

/// Uniformly spaced points `lo, lo + h, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        ensure(lo.is_finite() && hi.is_finite() && hi > lo, "grid range", format!("need lo < hi, got [{lo}, {hi}]"))?;
        ensure(n >= 3, "grid points", format!("need at least 3, got {n}"))?;
        Ok(Grid1D { lo, hi, n })
    }

    /// Grid with at least `n` points, rounded up so that `n - 1` is a
    /// multiple of four (Simpson at full and half resolution).
    pub fn simpson(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let intervals = (n.max(5) - 1).div_ceil(4) * 4;
        Self::new(lo, hi, intervals + 1)
    }

    /// Grid with spacing `h` starting at `lo`; `hi` is adjusted to land on a point.
    pub fn with_spacing(lo: f64, h: f64, n: usize) -> Result<Self> {
        ensure(h.is_finite() && h > 0.0, "grid spacing", "must be > 0")?;
        Self::new(lo, lo + h * (n - 1) as f64, n)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + self.spacing() * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn new(x: Grid1D, y: Grid1D) -> Self {
        Grid2D { x, y }
    }

    /// Square grid covering both packets of both sides at time `t`
    /// out to `reach` standard deviations.
    pub fn covering(c: &StateConfig, t: f64, reach: f64, n: usize) -> Result<Self> {
        let x = covering_grid(&c.slits_a, t, reach, n)?;
        let y = covering_grid(&c.slits_b, t, reach, n)?;
        Ok(Grid2D { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.n * self.y.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Symmetric Simpson grid spanning both slit packets of one side at time `t`.
pub fn covering_grid(p: &SlitParams, t: f64, reach: f64, n: usize) -> Result<Grid1D> {
    let half = p.half_sep + reach * p.width_at(t);
    Grid1D::simpson(-half, half, n)
}

/// Real field sampled on a [`Grid2D`], row-major with x as the slow index.
#[derive(Debug, Clone)]
pub struct Field2D {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl Field2D {
    pub fn sample<F>(grid: Grid2D, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|k| f(grid.x.point(k / grid.y.n), grid.y.point(k % grid.y.n)))
            .collect();
        Field2D { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.y.n + j]
    }
}

fn simpson_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n - 1 {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Composite Simpson over samples `f[0..n]` at spacing `h`, taking every
/// `stride`-th sample.
fn simpson_strided(f: &[f64], h: f64, stride: usize) -> f64 {
    let m = (f.len() - 1) / stride + 1;
    let sum: f64 = (0..m).map(|i| simpson_weight(i, m) * f[i * stride]).sum();
    sum * h * stride as f64 / 3.0
}

fn check_simpson_layout(n: usize, what: &'static str) -> Result<()> {
    ensure(
        n >= 5 && (n - 1) % 4 == 0,
        what,
        format!("Simpson with a Richardson check needs n - 1 divisible by 4, got n = {n}"),
    )
}

fn richardson(full: f64, half: f64, scale: f64) -> Result<f64> {
    let rel_diff = (full - half).abs() / scale.max(f64::MIN_POSITIVE);
    if rel_diff > RICHARDSON_TOL {
        Err(Error::GridTooCoarse { rel_diff })
    } else {
        Ok(full)
    }
}

/// Composite Simpson on a 1D grid, with a full-vs-half resolution check.
pub fn quadrature_1d(grid: &Grid1D, f: &[f64]) -> Result<f64> {
    check_simpson_layout(grid.n, "grid points")?;
    ensure(f.len() == grid.n, "field", "sample count does not match grid")?;
    let h = grid.spacing();
    let full = simpson_strided(f, h, 1);
    let half = simpson_strided(f, h, 2);
    let abs: Vec<f64> = f.iter().map(|v| v.abs()).collect();
    richardson(full, half, simpson_strided(&abs, h, 1))
}

/// Composite Simpson in both directions (error O(h⁴)). Fails with
/// `GridTooCoarse` when halving the resolution changes the result by more
/// than [`RICHARDSON_TOL`] relative to ∬|f|.
pub fn quadrature_2d(field: &Field2D) -> Result<f64> {
    let g = &field.grid;
    check_simpson_layout(g.x.n, "grid x points")?;
    check_simpson_layout(g.y.n, "grid y points")?;
    ensure(field.values.len() == g.len(), "field", "sample count does not match grid")?;
    let (hx, hy) = (g.x.spacing(), g.y.spacing());
    let integrate = |stride: usize, abs: bool| {
        let rows: Vec<f64> = (0..g.x.n)
            .step_by(stride)
            .map(|i| {
                let row = &field.values[i * g.y.n..(i + 1) * g.y.n];
                if abs {
                    let r: Vec<f64> = row.iter().map(|v| v.abs()).collect();
                    simpson_strided(&r, hy, stride)
                } else {
                    simpson_strided(row, hy, stride)
                }
            })
            .collect();
        simpson_strided(&rows, hx * stride as f64, 1)
    };
    let full = integrate(1, false);
    let half = integrate(2, false);
    richardson(full, half, integrate(1, true))
}

/// Split-step spectral solution of i∂ψ/∂t = −½∂²ψ on a periodic grid.
///
/// For the free Hamiltonian a single kinetic step is exact, so the only
/// errors are sampling and wrap-around; both are checked: the initial
/// spectrum must have decayed at the Nyquist edge and the evolved field must
/// vanish at the domain boundary.
pub fn numeric_evolve_oracle(initial: &[Complex], grid: &Grid1D, t: f64) -> Result<Vec<Complex>> {
    ensure(initial.len() == grid.n, "initial", "sample count does not match grid")?;
    ensure(t.is_finite() && t >= 0.0, "t", "must be finite and >= 0")?;
    if t == 0.0 {
        return Ok(initial.to_vec());
    }
    let n = grid.n;
    let h = grid.spacing();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let mut buf = initial.to_vec();
    forward.process(&mut buf);

    let peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let band = (n / 32).max(1);
    let edge = buf[n / 2 - band..n / 2 + band]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if edge > 1e-10 * peak {
        return Err(Error::Resolution(format!(
            "initial spectrum not resolved: |ψ̂| at Nyquist band is {:.3e} of peak",
            edge / peak
        )));
    }

    let dk = TAU / (n as f64 * h);
    for (j, z) in buf.iter_mut().enumerate() {
        let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 } * dk;
        *z *= Complex::from_polar(1.0 / n as f64, -0.5 * k * k * t);
    }
    inverse.process(&mut buf);

    let peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let wall = buf[..band]
        .iter()
        .chain(&buf[n - band..])
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if wall > 1e-10 * peak {
        return Err(Error::Resolution(format!(
            "evolved field reaches the domain edge ({:.3e} of peak); widen the grid",
            wall / peak
        )));
    }
    Ok(buf)
}

/// Grid for the oracle: spacing σ/`points_per_sigma` and an extent holding the
/// packet spread at time `t` with a wide margin. The point count is a power
/// of two and the origin lies on a grid point.
pub fn oracle_grid(p: &SlitParams, t: f64, points_per_sigma: usize) -> Result<Grid1D> {
    ensure(points_per_sigma >= 16, "points_per_sigma", "must resolve sigma with at least 16 points")?;
    let h = p.sigma / points_per_sigma as f64;
    let half = p.half_sep + 12.0 * p.width_at(t);
    let n = ((2.0 * half / h).ceil() as usize).next_power_of_two();
    Grid1D::with_spacing(-h * (n / 2) as f64, h, n)
}

/// Evolve a sampled single-slit packet with the oracle.
pub fn oracle_packet(slit: Slit, p: &SlitParams, t: f64, grid: &Grid1D) -> Result<Vec<Complex>> {
    let initial: Vec<Complex> = grid.points().map(|x| packet_amplitude(slit, x, 0.0, p)).collect();
    numeric_evolve_oracle(&initial, grid, t)
}

/// Uniform bins over `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bins {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Bins {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        ensure(lo.is_finite() && hi.is_finite() && hi > lo, "bin range", format!("need lo < hi, got [{lo}, {hi}]"))?;
        ensure(n >= 1, "bin count", "must be positive")?;
        Ok(Bins { lo, hi, n })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        (self.lo + i as f64 * self.width(), self.lo + (i + 1) as f64 * self.width())
    }

    pub fn index(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.n - 1))
    }
}

/// Weighted 2D histogram, row-major with x as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2D {
    pub x: Bins,
    pub y: Bins,
    pub counts: Vec<f64>,
    /// Entries that fell outside the bin ranges.
    pub outside: f64,
}

impl Histogram2D {
    pub fn new(x: Bins, y: Bins) -> Self {
        Histogram2D {
            x,
            y,
            counts: vec![0.0; x.n * y.n],
            outside: 0.0,
        }
    }

    pub fn fill(&mut self, xv: f64, yv: f64) {
        match (self.x.index(xv), self.y.index(yv)) {
            (Some(i), Some(j)) => self.counts[i * self.y.n + j] += 1.0,
            _ => self.outside += 1.0,
        }
    }

    pub fn from_points<'a>(x: Bins, y: Bins, points: impl IntoIterator<Item = &'a (f64, f64)>) -> Self {
        let mut h = Self::new(x, y);
        for &(a, b) in points {
            h.fill(a, b);
        }
        h
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum::<f64>() + self.outside
    }

    /// Cell probabilities including the out-of-range mass in the denominator.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total();
        self.counts.iter().map(|c| c / total).collect()
    }
}

/// Histogram of the exact cell probabilities of |ψ(t)|², from Simpson
/// quadrature on a `sub × sub` sub-grid per cell, scaled to `mass` counts.
pub fn expected_histogram(c: &StateConfig, t: f64, x: Bins, y: Bins, sub: usize, mass: f64) -> Histogram2D {
    let sub = sub.max(2).div_ceil(2) * 2 + 1;
    let counts: Vec<f64> = (0..x.n * y.n)
        .into_par_iter()
        .map(|k| {
            let (x0, x1) = x.edges(k / y.n);
            let (y0, y1) = y.edges(k % y.n);
            let gx = Grid1D::new(x0, x1, sub).expect("valid cell");
            let gy = Grid1D::new(y0, y1, sub).expect("valid cell");
            let rows: Vec<f64> = gx
                .points()
                .map(|xa| {
                    let col: Vec<f64> = gy
                        .points()
                        .map(|xb| joint_density(&SpacetimePoint { x_a: xa, x_b: xb, t }, c))
                        .collect();
                    simpson_strided(&col, gy.spacing(), 1)
                })
                .collect();
            simpson_strided(&rows, gx.spacing(), 1) * mass
        })
        .collect();
    let inside: f64 = counts.iter().sum();
    Histogram2D {
        x,
        y,
        counts,
        outside: (mass - inside).max(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    TotalVariation,
    ChiSquare,
    SupNorm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub metric: Metric,
    pub value: f64,
    pub n_cells: usize,
}

/// Distance between two histograms over identical binning.
///
/// Both are normalized to unit mass first (out-of-range mass counts toward
/// the total). The chi-square variant is the symmetric form
/// Σ(p−q)²/(p+q) after adding [`CHI_SQUARE_PSEUDO_COUNT`] to every cell.
pub fn distribution_distance(a: &Histogram2D, b: &Histogram2D, metric: Metric) -> Result<DistanceReport> {
    if a.x != b.x || a.y != b.y {
        return Err(Error::BinMismatch(format!(
            "{:?}x{:?} vs {:?}x{:?}",
            a.x, a.y, b.x, b.y
        )));
    }
    let n_cells = a.counts.len();
    let value = match metric {
        Metric::TotalVariation | Metric::SupNorm => {
            let p = a.probabilities();
            let q = b.probabilities();
            let diffs = p.iter().zip(&q).map(|(p, q)| (p - q).abs());
            if metric == Metric::SupNorm {
                diffs.fold(0.0, f64::max)
            } else {
                0.5 * diffs.sum::<f64>()
            }
        }
        Metric::ChiSquare => {
            let eps = CHI_SQUARE_PSEUDO_COUNT;
            let ta: f64 = a.counts.iter().map(|c| c + eps).sum();
            let tb: f64 = b.counts.iter().map(|c| c + eps).sum();
            a.counts
                .iter()
                .zip(&b.counts)
                .map(|(ca, cb)| {
                    let p = (ca + eps) / ta;
                    let q = (cb + eps) / tb;
                    (p - q).powi(2) / (p + q)
                })
                .sum()
        }
    };
    Ok(DistanceReport {
        metric,
        value,
        n_cells,
    })
}

/// Fails with `GridTooCoarse` unless the grid integrates the marginal on
/// `side` to one.
fn check_marginal_grid(c: &StateConfig, side: Side, t: f64, grid: &Grid1D) -> Result<()> {
    let f: Vec<f64> = grid.points().map(|x| marginal_density(side, x, t, c)).collect();
    let total = quadrature_1d(grid, &f)?;
    if (total - 1.0).abs() > RICHARDSON_TOL {
        return Err(Error::GridTooCoarse {
            rel_diff: (total - 1.0).abs(),
        });
    }
    Ok(())
}

/// sup over the grid of |p_side(x; φ1) − p_side(x; φ2)|.
pub fn no_signaling_gap(c_base: &StateConfig, phi1: f64, phi2: f64, side: Side, t: f64, grid: &Grid1D) -> Result<f64> {
    let c1 = c_base.with_phi(phi1);
    let c2 = c_base.with_phi(phi2);
    check_marginal_grid(&c1, side, t, grid)?;
    Ok(grid
        .points()
        .map(|x| (marginal_density(side, x, t, &c1) - marginal_density(side, x, t, &c2)).abs())
        .fold(0.0, f64::max))
}

/// Triangle-inequality bound on [`no_signaling_gap`] over the same grid:
/// sup |N₁² − N₂²|·(|g_u|² + |g_d|²)/2 + s_other·(N₁² + N₂²)·|g_u g_d|.
pub fn no_signaling_bound(c_base: &StateConfig, phi1: f64, phi2: f64, side: Side, t: f64, grid: &Grid1D) -> f64 {
    if c_base.kind == StateKind::ProductUpper {
        return 0.0;
    }
    let n1 = c_base.with_phi(phi1).norm().powi(2);
    let n2 = c_base.with_phi(phi2).norm().powi(2);
    let p = c_base.slits(side);
    let s_other = c_base.slits(side.other()).overlap();
    grid.points()
        .map(|x| {
            let gu = packet_amplitude(Slit::Upper, x, t, p);
            let gd = packet_amplitude(Slit::Lower, x, t, p);
            (n1 - n2).abs() * 0.5 * (gu.norm_sqr() + gd.norm_sqr()) + s_other * (n1 + n2) * (gu * gd).norm()
        })
        .fold(0.0, f64::max)
}

/// sup over the grid of |p_{φ=0} + p_{φ=π} − 2 p_incoherent|.
///
/// The cross terms of the two phase settings cancel up to the normalization
/// difference, so a small residual certifies exactly phase-opposed fringes.
pub fn fringe_shift_check(c_base: &StateConfig, t: f64, grid: &Grid2D) -> Result<f64> {
    let c0 = c_base.with_phi(0.0);
    let cpi = c_base.with_phi(PI);
    let residual = Field2D::sample(*grid, |xa, xb| {
        let pt = SpacetimePoint { x_a: xa, x_b: xb, t };
        joint_density(&pt, &c0) + joint_density(&pt, &cpi) - 2.0 * incoherent_density(&pt, c_base)
    });
    let density = Field2D::sample(*grid, |xa, xb| joint_density(&SpacetimePoint { x_a: xa, x_b: xb, t }, &c0));
    let total = quadrature_2d(&density)?;
    if (total - 1.0).abs() > RICHARDSON_TOL {
        return Err(Error::GridTooCoarse {
            rel_diff: (total - 1.0).abs(),
        });
    }
    Ok(residual.values.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

/// Spatial period of the two-photon fringes along x_A + x_B, from the
/// closed-form phase difference of the u and d branches (equal slits on both
/// sides assumed; uses side A's geometry).
pub fn fringe_period(c: &StateConfig, t: f64) -> f64 {
    let p = &c.slits_a;
    let tau = t / (2.0 * p.sigma * p.sigma);
    // d/du of the branch phase difference along x_A + x_B = u.
    let k = p.half_sep * tau / (p.sigma * p.sigma * (1.0 + tau * tau));
    TAU / k
}

/// Visibility (max − min)/(max + min) of |ψ|² along the line x_A = x_B,
/// which crosses the fringes at right angles, over one fringe period on
/// each side of the origin.
pub fn fringe_visibility(c: &StateConfig, t: f64, samples: usize) -> f64 {
    // x_A = x_B = s crosses one fringe every half period in u = 2s.
    let half_window = fringe_period(c, t) / 2.0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..=samples {
        let s = -half_window + 2.0 * half_window * i as f64 / samples as f64;
        let rho = joint_density(&SpacetimePoint { x_a: s, x_b: s, t }, c);
        lo = lo.min(rho);
        hi = hi.max(rho);
    }
    (hi - lo) / (hi + lo)
}
