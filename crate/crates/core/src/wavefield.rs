//! Closed-form two-photon wavefunction behind a pair of Gaussian double slits.
//!
//! Units are natural (ħ = m = 1). Each photon keeps a single transverse
//! coordinate; the longitudinal distance enters only through the evolution
//! time, see [`paraxial_time`].
//!
//! The state at the slit plane is
//!
//! ```text
//! ψ(x_A, x_B, 0) = N/√2 · [ g_u(x_A) g_u(x_B) + e^{iφ} g_d(x_A) g_d(x_B) ]
//! ```
//!
//! with freely spreading Gaussian packets `g_u`, `g_d` centered on the upper
//! and lower slit. The normalization `N` accounts for the small but nonzero
//! overlap between the two slit packets.

use std::f64::consts::TAU;

use crate::error::{ensure, Error, Result};

pub use num_complex::Complex64 as Complex;

/// Default packet width at the slit plane.
pub const DEFAULT_SIGMA: f64 = 0.1;
/// Default center-to-center slit separation.
pub const DEFAULT_SEPARATION: f64 = 1.0;
/// Default node threshold, relative to [`reference_density`].
pub const DEFAULT_EPS_NODE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slit {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    /// Path-entangled pair: both photons upper, or both lower.
    Entangled,
    /// Both photons through the upper slits; a product state used as baseline.
    ProductUpper,
}

/// Gaussian double-slit geometry on one side.
///
/// `sigma` is the standard deviation of the intensity profile `|g|²` of a
/// single slit packet at t = 0; `half_sep` is half the center-to-center
/// distance between the slits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitParams {
    pub sigma: f64,
    pub half_sep: f64,
}

impl Default for SlitParams {
    fn default() -> Self {
        SlitParams {
            sigma: DEFAULT_SIGMA,
            half_sep: DEFAULT_SEPARATION / 2.0,
        }
    }
}

impl SlitParams {
    pub fn new(sigma: f64, half_sep: f64) -> Result<Self> {
        ensure(sigma.is_finite() && sigma > 0.0, "sigma", format!("must be > 0, got {sigma}"))?;
        ensure(
            half_sep.is_finite() && half_sep > 0.0,
            "half_sep",
            format!("must be > 0, got {half_sep}"),
        )?;
        Ok(SlitParams { sigma, half_sep })
    }

    /// Build from the full center-to-center separation `d`.
    pub fn from_separation(sigma: f64, d: f64) -> Result<Self> {
        ensure(d.is_finite() && d > 0.0, "d", format!("must be > 0, got {d}"))?;
        Self::new(sigma, d / 2.0)
    }

    pub fn separation(&self) -> f64 {
        2.0 * self.half_sep
    }

    /// Inner product ⟨g_u|g_d⟩ = exp(−d²/(8σ²)). Real and conserved by free evolution.
    pub fn overlap(&self) -> f64 {
        (-self.half_sep * self.half_sep / (2.0 * self.sigma * self.sigma)).exp()
    }

    pub fn center(&self, slit: Slit) -> f64 {
        match slit {
            Slit::Upper => self.half_sep,
            Slit::Lower => -self.half_sep,
        }
    }

    /// Intensity standard deviation of a packet after spreading for time `t`.
    pub fn width_at(&self, t: f64) -> f64 {
        let s = self.sigma;
        s * (1.0 + (t / (2.0 * s * s)).powi(2)).sqrt()
    }
}

/// Complete description of the two-photon state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateConfig {
    pub slits_a: SlitParams,
    pub slits_b: SlitParams,
    /// Phase applied behind the lower slit on side A, in `[0, 2π)`.
    pub phi: f64,
    pub kind: StateKind,
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig::entangled(0.0)
    }
}

impl StateConfig {
    /// `phi` is reduced into `[0, 2π)`.
    pub fn new(slits_a: SlitParams, slits_b: SlitParams, phi: f64, kind: StateKind) -> Result<Self> {
        ensure(phi.is_finite(), "phi", format!("must be finite, got {phi}"))?;
        Ok(StateConfig {
            slits_a,
            slits_b,
            phi: phi.rem_euclid(TAU),
            kind,
        })
    }

    /// Entangled state with default slits on both sides.
    pub fn entangled(phi: f64) -> Self {
        StateConfig {
            slits_a: SlitParams::default(),
            slits_b: SlitParams::default(),
            phi: phi.rem_euclid(TAU),
            kind: StateKind::Entangled,
        }
    }

    pub fn product_upper() -> Self {
        StateConfig {
            kind: StateKind::ProductUpper,
            ..StateConfig::entangled(0.0)
        }
    }

    pub fn with_phi(self, phi: f64) -> Self {
        StateConfig {
            phi: phi.rem_euclid(TAU),
            ..self
        }
    }

    pub fn with_kind(self, kind: StateKind) -> Self {
        StateConfig { kind, ..self }
    }

    pub fn slits(&self, side: Side) -> &SlitParams {
        match side {
            Side::A => &self.slits_a,
            Side::B => &self.slits_b,
        }
    }

    /// Normalization constant N; exact including the slit overlap.
    pub fn norm(&self) -> f64 {
        match self.kind {
            StateKind::Entangled => {
                let s = self.slits_a.overlap() * self.slits_b.overlap();
                (1.0 + s * self.phi.cos()).powf(-0.5)
            }
            StateKind::ProductUpper => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimePoint {
    pub x_a: f64,
    pub x_b: f64,
    pub t: f64,
}

impl SpacetimePoint {
    pub fn new(x_a: f64, x_b: f64, t: f64) -> Result<Self> {
        ensure(x_a.is_finite(), "x_a", "must be finite")?;
        ensure(x_b.is_finite(), "x_b", "must be finite")?;
        ensure(t.is_finite() && t >= 0.0, "t", format!("must be finite and >= 0, got {t}"))?;
        Ok(SpacetimePoint { x_a, x_b, t })
    }

    pub fn coord(&self, side: Side) -> f64 {
        match side {
            Side::A => self.x_a,
            Side::B => self.x_b,
        }
    }
}

/// Conversion between longitudinal lab distance and natural-unit time.
///
/// In the paraxial regime ħt/m = z/k₀. Measuring transverse lengths in units
/// of `length_scale` gives `t = z / (k0 · length_scale²)`.
///
/// For 810 nm photons (k₀ = 2π/810 nm) and 1 natural length = 1 mm, one
/// natural time unit corresponds to z ≈ 7.757 m; t = 4 is z ≈ 31.03 m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParaxialMap {
    /// Central longitudinal wavevector, 1/length in lab units.
    pub k0: f64,
    /// Lab length of one natural transverse length unit.
    pub length_scale: f64,
}

impl ParaxialMap {
    pub fn new(k0: f64, length_scale: f64) -> Result<Self> {
        ensure(k0.is_finite() && k0 > 0.0, "k0", "must be > 0")?;
        ensure(
            length_scale.is_finite() && length_scale > 0.0,
            "length_scale",
            "must be > 0",
        )?;
        Ok(ParaxialMap { k0, length_scale })
    }

    /// Wavelength in meters, transverse unit in meters.
    pub fn from_wavelength(wavelength: f64, length_scale: f64) -> Result<Self> {
        ensure(wavelength.is_finite() && wavelength > 0.0, "wavelength", "must be > 0")?;
        Self::new(TAU / wavelength, length_scale)
    }
}

pub fn paraxial_time(z: f64, map: &ParaxialMap) -> f64 {
    z / (map.k0 * map.length_scale * map.length_scale)
}

pub fn paraxial_distance(t: f64, map: &ParaxialMap) -> f64 {
    t * map.k0 * map.length_scale * map.length_scale
}

/// Packet value and its x-derivative.
#[inline]
fn packet(slit: Slit, x: f64, t: f64, p: &SlitParams) -> (Complex, Complex) {
    let sigma = p.sigma;
    let st = Complex::new(sigma, t / (2.0 * sigma));
    let dx = x - p.center(slit);
    let pref = FOURTH_ROOT_INV_TAU / st.sqrt();
    let g = pref * (-(dx * dx) / (4.0 * sigma * st)).exp();
    let dg = -dx / (2.0 * sigma * st) * g;
    (g, dg)
}

/// (2π)^(−1/4)
const FOURTH_ROOT_INV_TAU: f64 = 0.631_618_777_746_064_7;

/// Upper and lower packets with derivatives at one x, sharing the
/// time-dependent factors: (g_u, g_u', g_d, g_d').
#[inline]
fn packet_pair(x: f64, t: f64, p: &SlitParams) -> (Complex, Complex, Complex, Complex) {
    let sigma = p.sigma;
    let st = Complex::new(sigma, t / (2.0 * sigma));
    let inv = 1.0 / (4.0 * sigma * st);
    let pref = FOURTH_ROOT_INV_TAU / st.sqrt();
    let (du, dd) = (x - p.half_sep, x + p.half_sep);
    let gu = pref * (-(du * du) * inv).exp();
    let gd = pref * (-(dd * dd) * inv).exp();
    let two_inv = 2.0 * inv;
    (gu, -du * two_inv * gu, gd, -dd * two_inv * gd)
}

/// Freely evolved single-slit packet `g(x, t)`, unit L² norm for every t.
pub fn packet_amplitude(slit: Slit, x: f64, t: f64, p: &SlitParams) -> Complex {
    packet(slit, x, t, p).0
}

/// Analytic ∂g/∂x.
pub fn packet_gradient(slit: Slit, x: f64, t: f64, p: &SlitParams) -> Complex {
    packet(slit, x, t, p).1
}

/// ψ together with both partial derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Local {
    pub psi: Complex,
    pub d_a: Complex,
    pub d_b: Complex,
}

#[inline]
pub(crate) fn local(pt: &SpacetimePoint, c: &StateConfig) -> Local {
    match c.kind {
        StateKind::ProductUpper => {
            let (ua, dua) = packet(Slit::Upper, pt.x_a, pt.t, &c.slits_a);
            let (ub, dub) = packet(Slit::Upper, pt.x_b, pt.t, &c.slits_b);
            Local {
                psi: ua * ub,
                d_a: dua * ub,
                d_b: ua * dub,
            }
        }
        StateKind::Entangled => {
            let (ua, dua, la, dla) = packet_pair(pt.x_a, pt.t, &c.slits_a);
            let (ub, dub, lb, dlb) = packet_pair(pt.x_b, pt.t, &c.slits_b);
            let w = Complex::from_polar(1.0, c.phi);
            let k = c.norm() * std::f64::consts::FRAC_1_SQRT_2;
            let (uu, dd) = (ua * ub, w * la * lb);
            Local {
                psi: k * (uu + dd),
                d_a: k * (dua * ub + w * dla * lb),
                d_b: k * (ua * dub + w * la * dlb),
            }
        }
    }
}

pub fn two_photon_amplitude(pt: &SpacetimePoint, c: &StateConfig) -> Complex {
    local(pt, c).psi
}

/// Exact ∂ψ/∂x_side.
pub fn two_photon_gradient(side: Side, pt: &SpacetimePoint, c: &StateConfig) -> Complex {
    let l = local(pt, c);
    match side {
        Side::A => l.d_a,
        Side::B => l.d_b,
    }
}

pub fn joint_density(pt: &SpacetimePoint, c: &StateConfig) -> f64 {
    two_photon_amplitude(pt, c).norm_sqr()
}

/// Peak density of a single branch at time `t`; the scale against which
/// node thresholds are measured. The true peak of |ψ|² is within a factor
/// of four of this value.
pub fn reference_density(t: f64, c: &StateConfig) -> f64 {
    let branch = 1.0 / (TAU * c.slits_a.width_at(t) * c.slits_b.width_at(t));
    match c.kind {
        StateKind::Entangled => 0.5 * c.norm().powi(2) * branch,
        StateKind::ProductUpper => branch,
    }
}

/// Logarithmic derivatives (∂_A ψ/ψ, ∂_B ψ/ψ), or NodeRegion.
///
/// For the product state each factor is divided separately, which keeps
/// the A component bitwise independent of x_B.
#[inline]
fn log_derivs(pt: &SpacetimePoint, c: &StateConfig, eps_node: f64) -> Result<(Complex, Complex)> {
    let threshold = eps_node * reference_density(pt.t, c);
    let check = |density: f64| {
        if density >= threshold && density > 0.0 {
            Ok(())
        } else {
            Err(Error::NodeRegion { density, threshold })
        }
    };
    match c.kind {
        StateKind::ProductUpper => {
            let (ua, dua) = packet(Slit::Upper, pt.x_a, pt.t, &c.slits_a);
            let (ub, dub) = packet(Slit::Upper, pt.x_b, pt.t, &c.slits_b);
            check((ua * ub).norm_sqr())?;
            Ok((dua / ua, dub / ub))
        }
        StateKind::Entangled => {
            let l = local(pt, c);
            check(l.psi.norm_sqr())?;
            Ok((l.d_a / l.psi, l.d_b / l.psi))
        }
    }
}

/// Weak value of p̂_side with post-selection on |x_A, x_B⟩:
/// p_w = −i (∂ψ/∂x_side)/ψ.
pub fn weak_momentum(side: Side, pt: &SpacetimePoint, c: &StateConfig, eps_node: f64) -> Result<Complex> {
    let (qa, qb) = log_derivs(pt, c, eps_node)?;
    let q = match side {
        Side::A => qa,
        Side::B => qb,
    };
    Ok(Complex::new(q.im, -q.re))
}

/// Bohmian velocity v = Im(∂ψ/∂x_side / ψ) = j/ρ, identical to Re of [`weak_momentum`].
pub fn velocity(side: Side, pt: &SpacetimePoint, c: &StateConfig, eps_node: f64) -> Result<f64> {
    weak_momentum(side, pt, c, eps_node).map(|p| p.re)
}

/// Both velocity components from a single wavefunction evaluation.
pub fn velocity_pair(pt: &SpacetimePoint, c: &StateConfig, eps_node: f64) -> Result<(f64, f64)> {
    let (qa, qb) = log_derivs(pt, c, eps_node)?;
    Ok((qa.im, qb.im))
}

/// Single-photon detection density on `side`, in closed form.
pub fn marginal_density(side: Side, x: f64, t: f64, c: &StateConfig) -> f64 {
    let p = c.slits(side);
    let gu = packet_amplitude(Slit::Upper, x, t, p);
    match c.kind {
        StateKind::ProductUpper => gu.norm_sqr(),
        StateKind::Entangled => {
            let gd = packet_amplitude(Slit::Lower, x, t, p);
            let s_other = c.slits(side.other()).overlap();
            let cross = (Complex::from_polar(1.0, c.phi) * gu.conj() * gd).re;
            let n2 = c.norm().powi(2);
            n2 * (0.5 * (gu.norm_sqr() + gd.norm_sqr()) + s_other * cross)
        }
    }
}

/// Density with the u/d cross term dropped: (|g_u g_u|² + |g_d g_d|²)/2.
pub fn incoherent_density(pt: &SpacetimePoint, c: &StateConfig) -> f64 {
    match c.kind {
        StateKind::ProductUpper => joint_density(pt, c),
        StateKind::Entangled => {
            let ua = packet_amplitude(Slit::Upper, pt.x_a, pt.t, &c.slits_a);
            let ub = packet_amplitude(Slit::Upper, pt.x_b, pt.t, &c.slits_b);
            let la = packet_amplitude(Slit::Lower, pt.x_a, pt.t, &c.slits_a);
            let lb = packet_amplitude(Slit::Lower, pt.x_b, pt.t, &c.slits_b);
            0.5 * ((ua * ub).norm_sqr() + (la * lb).norm_sqr())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pt(x_a: f64, x_b: f64, t: f64) -> SpacetimePoint {
        SpacetimePoint::new(x_a, x_b, t).unwrap()
    }

    #[test]
    fn shared_factor_packets_agree() {
        assert!((FOURTH_ROOT_INV_TAU - TAU.powf(-0.25)).abs() < 1e-16);
        let p = SlitParams::new(0.2, 0.7).unwrap();
        for &(x, t) in &[(0.1, 0.0), (2.0, 3.0), (-5.0, 0.4)] {
            let (gu, dgu, gd, dgd) = packet_pair(x, t, &p);
            let (u, du) = packet(Slit::Upper, x, t, &p);
            let (d, dd) = packet(Slit::Lower, x, t, &p);
            for (a, b) in [(gu, u), (dgu, du), (gd, d), (dgd, dd)] {
                assert!((a - b).norm() <= 1e-14 * b.norm().max(1e-300), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn default_overlap_is_tiny() {
        let s = SlitParams::default().overlap();
        assert!((s - (-12.5f64).exp()).abs() < 1e-18);
        assert!((s - 3.73e-6).abs() < 1e-8);
    }

    #[test]
    fn packet_peak_at_t0() {
        let p = SlitParams::default();
        let g = packet_amplitude(Slit::Upper, 0.5, 0.0, &p);
        let expected = (TAU * 0.01f64).powf(-0.25);
        assert!((g.re - expected).abs() < 1e-14);
        assert!((g.re - 1.997_36).abs() < 1e-5);
        assert_eq!(g.im, 0.0);
        assert_eq!(packet_gradient(Slit::Upper, 0.5, 0.0, &p), Complex::new(0.0, 0.0));
    }

    #[test]
    fn packet_mirror_symmetry() {
        let p = SlitParams::new(0.13, 0.4).unwrap();
        for &(x, t) in &[(0.3, 0.0), (-1.2, 0.7), (4.0, 4.0), (0.0, 2.5)] {
            let u = packet_amplitude(Slit::Upper, x, t, &p);
            let l = packet_amplitude(Slit::Lower, -x, t, &p);
            assert!((u - l).norm() < 1e-15);
            let du = packet_gradient(Slit::Upper, x, t, &p);
            let dl = packet_gradient(Slit::Lower, -x, t, &p);
            assert!((du + dl).norm() < 1e-13);
        }
    }

    #[test]
    fn spreading_width() {
        let p = SlitParams::default();
        assert!((p.width_at(0.0) - 0.1).abs() < 1e-15);
        assert!((p.width_at(4.0) - 0.1 * (1.0 + 200.0f64 * 200.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn phase_is_reduced() {
        let c = StateConfig::entangled(-PI / 2.0);
        assert!((c.phi - 1.5 * PI).abs() < 1e-15);
        assert!(StateConfig::new(SlitParams::default(), SlitParams::default(), f64::NAN, StateKind::Entangled).is_err());
    }

    #[test]
    fn rejects_bad_slits() {
        assert!(SlitParams::new(0.0, 0.5).is_err());
        assert!(SlitParams::new(0.1, -1.0).is_err());
        assert!(SlitParams::from_separation(0.1, f64::INFINITY).is_err());
        assert!(SpacetimePoint::new(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn exchange_and_parity() {
        for &phi in &[0.0, 0.9, PI] {
            let c = StateConfig::entangled(phi);
            let a = two_photon_amplitude(&pt(1.3, -0.2, 2.0), &c);
            let b = two_photon_amplitude(&pt(-0.2, 1.3, 2.0), &c);
            assert!((a - b).norm() < 1e-15);
        }
        let c = StateConfig::entangled(0.0);
        let a = two_photon_amplitude(&pt(1.3, -0.2, 2.0), &c);
        let b = two_photon_amplitude(&pt(-1.3, 0.2, 2.0), &c);
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn product_state_velocity_ignores_partner() {
        let c = StateConfig::product_upper();
        let v: Vec<f64> = [-1.0, 0.0, 2.0]
            .iter()
            .map(|&xb| velocity(Side::A, &pt(0.7, xb, 1.5), &c, DEFAULT_EPS_NODE).unwrap())
            .collect();
        assert_eq!(v[0], v[1]);
        assert_eq!(v[1], v[2]);
    }

    #[test]
    fn velocity_vanishes_at_origin_for_zero_phase() {
        let c = StateConfig::entangled(0.0);
        for &t in &[0.5, 1.0, 4.0, 10.0] {
            let v = velocity(Side::B, &pt(0.0, 0.0, t), &c, DEFAULT_EPS_NODE).unwrap();
            assert!(v.abs() < 1e-12, "t={t} v={v}");
        }
    }

    #[test]
    fn weak_value_zero_at_packet_peak() {
        let c = StateConfig::product_upper();
        let p = weak_momentum(Side::A, &pt(0.5, 0.5, 0.0), &c, DEFAULT_EPS_NODE).unwrap();
        assert_eq!(p.norm(), 0.0);
    }

    #[test]
    fn node_region_is_reported() {
        // φ = π puts a nodal line on x_A + x_B = 0.
        let c = StateConfig::entangled(PI);
        let err = velocity(Side::B, &pt(4.0, -4.0, 4.0), &c, DEFAULT_EPS_NODE).unwrap_err();
        assert!(matches!(err, Error::NodeRegion { .. }));
        // Far tails at t = 0 are numerically empty.
        assert!(velocity(Side::A, &pt(30.0, 30.0, 0.0), &c, DEFAULT_EPS_NODE).is_err());
    }

    #[test]
    fn paraxial_conversion() {
        let map = ParaxialMap::from_wavelength(810e-9, 1e-3).unwrap();
        assert_eq!(paraxial_time(0.0, &map), 0.0);
        let t1 = paraxial_time(1.0, &map);
        assert!((paraxial_time(2.0, &map) - 2.0 * t1).abs() < 1e-15);
        // 1 m at 810 nm, 1 mm transverse unit.
        assert!((t1 - 810e-9 / (TAU * 1e-6)).abs() < 1e-15);
        assert!((t1 - 0.128_915).abs() < 1e-6);
        assert!((paraxial_distance(4.0, &map) - 31.028).abs() < 1e-3);
    }

    #[test]
    fn norm_constant() {
        let c = StateConfig::entangled(0.0);
        let s = SlitParams::default().overlap();
        assert!((c.norm() - (1.0 + s * s).powf(-0.5)).abs() < 1e-16);
        assert_eq!(StateConfig::product_upper().norm(), 1.0);
    }
}
