//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented
//! on the functions. The plain-Rust versions in [`compute`] carry the logic
//! and are what the tests exercise.

use wasm_bindgen::prelude::*;

pub mod compute {
    use pilotwave::analysis::Grid1D;
    use pilotwave::experiment::{estimate_profile, BinningSpec, PointerModel};
    use pilotwave::trajectories::{integrate_from, sample_initial, EnsembleSpec, IntegratorConfig, Method};
    use pilotwave::wavefield::{joint_density, velocity, DEFAULT_EPS_NODE};
    use pilotwave::{Side, SlitParams, SpacetimePoint, StateConfig, StateKind};

    fn state(sigma: f64, d: f64, phi: f64) -> Result<StateConfig, String> {
        let s = SlitParams::from_separation(sigma, d).map_err(|e| e.to_string())?;
        StateConfig::new(s, s, phi, StateKind::Entangled).map_err(|e| e.to_string())
    }

    /// `n` trajectories started from |ψ(0)|² with the given seed.
    ///
    /// Layout: `[m, t_0..t_m, (x_a_0..x_a_m, x_b_0..x_b_m) per trajectory]`.
    /// A trajectory that stalls at a node is filled with NaN.
    pub fn trajectory_bundle(sigma: f64, d: f64, phi: f64, n: usize, seed: u64, t_end: f64, dt: f64) -> Result<Vec<f64>, String> {
        let c = state(sigma, d, phi)?;
        let ic = IntegratorConfig {
            dt,
            t_end,
            method: Method::Rk4,
            record_stride: ((t_end / dt / 200.0).ceil() as usize).max(1),
            ..IntegratorConfig::default()
        };
        ic.validate().map_err(|e| e.to_string())?;
        let starts = sample_initial(&c, &EnsembleSpec::new(n, seed).map_err(|e| e.to_string())?);
        let runs = integrate_from(&starts, &c, &ic);
        let times: Vec<f64> = match runs.iter().find_map(|r| r.as_ref().ok()) {
            Some(tr) => tr.samples.iter().map(|s| s.t).collect(),
            None => return Err("every trajectory stalled at a node".into()),
        };
        let m = times.len();
        let mut out = Vec::with_capacity(1 + m * (1 + 2 * n));
        out.push(m as f64);
        out.extend(&times);
        for r in &runs {
            match r {
                Ok(tr) => {
                    out.extend(tr.samples.iter().map(|s| s.x_a));
                    out.extend(tr.samples.iter().map(|s| s.x_b));
                }
                Err(_) => out.extend(std::iter::repeat(f64::NAN).take(2 * m)),
            }
        }
        Ok(out)
    }

    /// |ψ|² on an `n`×`n` grid covering both patterns at time `t`.
    ///
    /// Layout: `[half_width, values...]`, row `i` is x_b, column `j` is x_a,
    /// both running over `[-half_width, half_width]`.
    pub fn density_grid(sigma: f64, d: f64, phi: f64, t: f64, n: usize) -> Result<Vec<f64>, String> {
        let c = state(sigma, d, phi)?;
        let p = c.slits(Side::A);
        let half = p.half_sep + 3.5 * p.width_at(t);
        let g = Grid1D::new(-half, half, n).map_err(|e| e.to_string())?;
        let mut out = Vec::with_capacity(1 + n * n);
        out.push(half);
        for xb in g.points() {
            for xa in g.points() {
                out.push(joint_density(&SpacetimePoint { x_a: xa, x_b: xb, t }, &c));
            }
        }
        Ok(out)
    }

    /// Photon B velocity along x_b with photon A held at `x_a`, on `n` points.
    ///
    /// Layout: `[x..., v...]`; NaN where the point is inside a node region.
    pub fn velocity_curve(sigma: f64, d: f64, phi: f64, t: f64, x_a: f64, n: usize) -> Result<Vec<f64>, String> {
        let c = state(sigma, d, phi)?;
        let p = c.slits(Side::B);
        let half = p.half_sep + 3.5 * p.width_at(t);
        let g = Grid1D::new(-half, half, n).map_err(|e| e.to_string())?;
        let xs: Vec<f64> = g.points().collect();
        let vs = xs
            .iter()
            .map(|&xb| velocity(Side::B, &SpacetimePoint { x_a, x_b: xb, t }, &c, DEFAULT_EPS_NODE).unwrap_or(f64::NAN));
        let mut out = xs.clone();
        out.extend(vs);
        Ok(out)
    }

    /// Weak-measurement reconstruction of the B velocity profile.
    ///
    /// Layout: 5 values per bin, `[x_b_center, v_hat, stderr, n_used, v_analytic]`.
    /// Bins that could not fill within 200 × `pairs_per_bin` draws keep
    /// whatever they collected.
    #[allow(clippy::too_many_arguments)]
    pub fn weak_profile(
        sigma: f64,
        d: f64,
        phi: f64,
        t: f64,
        x_a: f64,
        bins: usize,
        kappa: f64,
        pairs_per_bin: usize,
        seed: u64,
    ) -> Result<Vec<f64>, String> {
        let c = state(sigma, d, phi)?;
        let pm = PointerModel::new(kappa, Side::B).map_err(|e| e.to_string())?;
        let (bs, ia) = BinningSpec::centered_on_a(&c, t, x_a, bins, bins).map_err(|e| e.to_string())?;
        let prof = estimate_profile(&c, &pm, &bs, ia, pairs_per_bin, 200 * pairs_per_bin, seed).map_err(|e| e.to_string())?;
        Ok(prof
            .bins
            .iter()
            .flat_map(|b| [b.x_b_center, b.v_hat, b.stderr, b.n_used as f64, b.v_analytic])
            .collect())
    }
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn trajectory_bundle(sigma: f64, d: f64, phi: f64, n: usize, seed: u32, t_end: f64, dt: f64) -> Result<Vec<f64>, JsError> {
    js(compute::trajectory_bundle(sigma, d, phi, n, u64::from(seed), t_end, dt))
}

#[wasm_bindgen]
pub fn density_grid(sigma: f64, d: f64, phi: f64, t: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(compute::density_grid(sigma, d, phi, t, n))
}

#[wasm_bindgen]
pub fn velocity_curve(sigma: f64, d: f64, phi: f64, t: f64, x_a: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(compute::velocity_curve(sigma, d, phi, t, x_a, n))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn weak_profile(
    sigma: f64,
    d: f64,
    phi: f64,
    t: f64,
    x_a: f64,
    bins: usize,
    kappa: f64,
    pairs_per_bin: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    js(compute::weak_profile(sigma, d, phi, t, x_a, bins, kappa, pairs_per_bin, u64::from(seed)))
}
