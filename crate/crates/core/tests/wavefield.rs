use std::f64::consts::{FRAC_PI_2, PI};

use pilotwave::analysis::{oracle_grid, oracle_packet, quadrature_1d, quadrature_2d, Field2D, Grid1D, Grid2D};
use pilotwave::wavefield::*;
use pilotwave::{Complex, Side, Slit, SlitParams, SpacetimePoint, StateConfig, StateKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;

fn pt(x_a: f64, x_b: f64, t: f64) -> SpacetimePoint {
    SpacetimePoint { x_a, x_b, t }
}

/// Random points inside the bulk of |ψ|², keeping clear of nodes.
fn bulk_points(c: &StateConfig, n: usize, seed: u64) -> Vec<SpacetimePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let t = rng.random_range(0.0..4.0);
        let wa = c.slits_a.half_sep + 3.0 * c.slits_a.width_at(t);
        let wb = c.slits_b.half_sep + 3.0 * c.slits_b.width_at(t);
        let p = pt(rng.random_range(-wa..wa), rng.random_range(-wb..wb), t);
        if joint_density(&p, c) > 1e-6 * reference_density(t, c) {
            out.push(p);
        }
    }
    out
}

fn configs() -> Vec<StateConfig> {
    vec![
        StateConfig::entangled(0.0),
        StateConfig::entangled(FRAC_PI_2),
        StateConfig::entangled(PI),
        StateConfig::entangled(1.234),
        StateConfig::product_upper(),
    ]
}

#[test]
fn packet_gradient_matches_finite_difference() {
    let p = SlitParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let t = rng.random_range(0.0..4.0);
        let slit = if rng.random_bool(0.5) { Slit::Upper } else { Slit::Lower };
        let w = p.width_at(t);
        let x = p.center(slit) + rng.random_range(-3.0 * w..3.0 * w);
        let fd = (packet_amplitude(slit, x + H, t, &p) - packet_amplitude(slit, x - H, t, &p)) / (2.0 * H);
        let an = packet_gradient(slit, x, t, &p);
        // Relative to the natural gradient scale |g|/σ_t, which stays finite at the peak.
        let scale = an.norm().max(packet_amplitude(slit, x, t, &p).norm() / w);
        worst = worst.max((fd - an).norm() / scale);
    }
    assert!(worst < 1e-6, "worst relative error {worst:e}");
}

#[test]
fn packet_mirror_antisymmetry_of_gradient() {
    let p = SlitParams::default();
    for &(x, t) in &[(0.3, 0.0), (1.7, 1.0), (-4.0, 4.0)] {
        let up = packet_gradient(Slit::Upper, x, t, &p);
        let lo = packet_gradient(Slit::Lower, -x, t, &p);
        assert!((up + lo).norm() < 1e-13 * up.norm().max(1.0));
    }
    assert_eq!(packet_gradient(Slit::Upper, 0.5, 0.0, &p).norm(), 0.0);
}

#[test]
fn two_photon_gradient_matches_finite_difference() {
    for c in configs() {
        let mut worst = 0.0f64;
        for q in bulk_points(&c, 1000, 21) {
            for side in [Side::A, Side::B] {
                let (plus, minus) = match side {
                    Side::A => (pt(q.x_a + H, q.x_b, q.t), pt(q.x_a - H, q.x_b, q.t)),
                    Side::B => (pt(q.x_a, q.x_b + H, q.t), pt(q.x_a, q.x_b - H, q.t)),
                };
                let fd = (two_photon_amplitude(&plus, &c) - two_photon_amplitude(&minus, &c)) / (2.0 * H);
                let an = two_photon_gradient(side, &q, &c);
                let w = c.slits(side).width_at(q.t);
                let scale = an.norm().max(two_photon_amplitude(&q, &c).norm() / w);
                worst = worst.max((fd - an).norm() / scale);
            }
        }
        assert!(worst < 1e-6, "{c:?}: worst relative error {worst:e}");
    }
}

#[test]
fn packets_match_numerical_schrodinger_oracle() {
    let p = SlitParams::default();
    let t = 4.0;
    let grid = oracle_grid(&p, t, 16).unwrap();
    for slit in [Slit::Upper, Slit::Lower] {
        let evolved = oracle_packet(slit, &p, t, &grid).unwrap();
        let sup = grid
            .points()
            .zip(&evolved)
            .map(|(x, z)| (packet_amplitude(slit, x, t, &p) - z).norm())
            .fold(0.0, f64::max);
        assert!(sup < 1e-6, "{slit:?}: sup-norm {sup:e}");
        let norm: f64 = evolved.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.spacing();
        assert!((norm - 1.0).abs() < 1e-10);
    }
    // The point x = 1 specifically.
    let i = (1.0 / grid.spacing()).round() as usize + grid.n / 2;
    assert!((grid.point(i) - 1.0).abs() < 1e-12);
    let up = oracle_packet(Slit::Upper, &p, t, &grid).unwrap();
    assert!((up[i] - packet_amplitude(Slit::Upper, 1.0, t, &p)).norm() < 1e-6);
}

#[test]
fn two_photon_amplitude_matches_oracle_composition() {
    let c = StateConfig::entangled(FRAC_PI_2);
    let p = c.slits_a;
    let t = 4.0;
    let grid = oracle_grid(&p, t, 16).unwrap();
    let idx = |x: f64| (x / grid.spacing()).round() as usize + grid.n / 2;
    let u = oracle_packet(Slit::Upper, &p, t, &grid).unwrap();
    let d = oracle_packet(Slit::Lower, &p, t, &grid).unwrap();
    // Overlap taken from the oracle fields, conserved by unitary evolution.
    let s: Complex = u.iter().zip(&d).map(|(a, b)| a.conj() * b).sum::<Complex>() * grid.spacing();
    let n = 1.0 / (1.0 + (s * s).re * c.phi.cos()).sqrt();
    let (ia, ib) = (idx(4.0), idx(1.0));
    let expected = n / 2f64.sqrt() * (u[ia] * u[ib] + Complex::from_polar(1.0, c.phi) * d[ia] * d[ib]);
    let got = two_photon_amplitude(&pt(4.0, 1.0, t), &c);
    assert!((got - expected).norm() < 1e-6, "{got} vs {expected}");
}

#[test]
fn exchange_and_parity_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let q = pt(rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0), rng.random_range(0.0..4.0));
        let phi = rng.random_range(0.0..6.0);
        let c = StateConfig::entangled(phi);
        // Branch magnitude: the rounding scale even where the branches cancel.
        let scale = (2.0 * incoherent_density(&q, &c)).sqrt();
        let a = two_photon_amplitude(&q, &c);
        let swapped = two_photon_amplitude(&pt(q.x_b, q.x_a, q.t), &c);
        assert!((a - swapped).norm() <= 1e-14 * scale);
        let c0 = StateConfig::entangled(0.0);
        let a0 = two_photon_amplitude(&q, &c0);
        let mirrored = two_photon_amplitude(&pt(-q.x_a, -q.x_b, q.t), &c0);
        assert!((a0 - mirrored).norm() <= 1e-14 * scale);
    }
}

#[test]
fn velocity_matches_phase_gradient_oracle() {
    let c = StateConfig::entangled(0.0);
    let q = pt(4.0, 1.0, 4.0);
    // Ratio before arg: no unwrapping needed across the stencil.
    let plus = two_photon_amplitude(&pt(4.0, 1.0 + H, 4.0), &c);
    let minus = two_photon_amplitude(&pt(4.0, 1.0 - H, 4.0), &c);
    let fd = (plus / minus).arg() / (2.0 * H);
    let v = velocity(Side::B, &q, &c, DEFAULT_EPS_NODE).unwrap();
    assert!((v - fd).abs() < 1e-6, "{v} vs {fd}");
}

#[test]
fn weak_value_real_part_is_velocity() {
    for c in configs() {
        for q in bulk_points(&c, 1000, 31) {
            for side in [Side::A, Side::B] {
                let pw = weak_momentum(side, &q, &c, DEFAULT_EPS_NODE).unwrap();
                let v = velocity(side, &q, &c, DEFAULT_EPS_NODE).unwrap();
                assert!((pw.re - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
            let (va, vb) = velocity_pair(&q, &c, DEFAULT_EPS_NODE).unwrap();
            assert_eq!(va, velocity(Side::A, &q, &c, DEFAULT_EPS_NODE).unwrap());
            assert_eq!(vb, velocity(Side::B, &q, &c, DEFAULT_EPS_NODE).unwrap());
        }
    }
}

#[test]
fn weak_value_imaginary_part_is_log_density_slope() {
    for c in configs() {
        let mut worst = 0.0f64;
        for q in bulk_points(&c, 1000, 41) {
            for side in [Side::A, Side::B] {
                let (plus, minus) = match side {
                    Side::A => (pt(q.x_a + H, q.x_b, q.t), pt(q.x_a - H, q.x_b, q.t)),
                    Side::B => (pt(q.x_a, q.x_b + H, q.t), pt(q.x_a, q.x_b - H, q.t)),
                };
                let fd = -0.5 * (joint_density(&plus, &c).ln() - joint_density(&minus, &c).ln()) / (2.0 * H);
                let im = weak_momentum(side, &q, &c, DEFAULT_EPS_NODE).unwrap().im;
                let scale = im.abs().max(1.0 / c.slits(side).width_at(q.t));
                worst = worst.max((im - fd).abs() / scale);
            }
        }
        assert!(worst < 1e-6, "{c:?}: {worst:e}");
    }
}

/// Fourth-order central difference.
fn d5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

#[test]
fn continuity_equation_holds_off_node() {
    let h = 1e-4;
    let ht = 1e-4;
    for c in configs() {
        let mut worst = 0.0f64;
        for t in [0.5, 2.0, 4.0] {
            let w = c.slits_a.half_sep + 3.0 * c.slits_a.width_at(t);
            for i in 0..25 {
                for k in 0..25 {
                    let xa = -w + 2.0 * w * (i as f64 + 0.5) / 25.0;
                    let xb = -w + 2.0 * w * (k as f64 + 0.5) / 25.0;
                    if joint_density(&pt(xa, xb, t), &c) < 1e-6 * reference_density(t, &c) {
                        continue;
                    }
                    let rho = |a: f64, b: f64, s: f64| joint_density(&pt(a, b, s), &c);
                    let flux = |side: Side, a: f64, b: f64| {
                        let q = pt(a, b, t);
                        (two_photon_amplitude(&q, &c).conj() * two_photon_gradient(side, &q, &c)).im
                    };
                    let drho = d5(|s| rho(xa, xb, s), t, ht);
                    let dja = d5(|a| flux(Side::A, a, xb), xa, h);
                    let djb = d5(|b| flux(Side::B, xa, b), xb, h);
                    let scale = drho.abs().max(dja.abs()).max(djb.abs());
                    if scale > 0.0 {
                        worst = worst.max((drho + dja + djb).abs() / scale);
                    }
                }
            }
        }
        assert!(worst < 1e-5, "{c:?}: continuity residual {worst:e}");
    }
}

#[test]
fn joint_density_is_normalized() {
    for c in configs() {
        for t in [0.0, 2.0, 4.0] {
            let grid = Grid2D::covering(&c, t, 9.0, 1201).unwrap();
            let f = Field2D::sample(grid, |a, b| joint_density(&pt(a, b, t), &c));
            let total = quadrature_2d(&f).unwrap();
            assert!((total - 1.0).abs() < 1e-6, "{c:?} t={t}: {total}");
        }
    }
}

#[test]
fn phase_average_is_incoherent_sum() {
    let c0 = StateConfig::entangled(0.0);
    let cpi = StateConfig::entangled(PI);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let t = rng.random_range(0.0..4.0);
        let w = 0.5 + 3.0 * c0.slits_a.width_at(t);
        let q = pt(rng.random_range(-w..w), rng.random_range(-w..w), t);
        let avg = 0.5 * (joint_density(&q, &c0) + joint_density(&q, &cpi));
        assert!((avg - incoherent_density(&q, &c0)).abs() < 1e-5);
    }
}

#[test]
fn marginal_matches_quadrature_of_joint_density() {
    let t = 4.0;
    for c in configs() {
        let g = Grid1D::simpson(-120.0, 120.0, 4001).unwrap();
        for side in [Side::A, Side::B] {
            let f: Vec<f64> = g
                .points()
                .map(|y| match side {
                    Side::A => joint_density(&pt(0.8, y, t), &c),
                    Side::B => joint_density(&pt(y, 0.8, t), &c),
                })
                .collect();
            let numeric = quadrature_1d(&g, &f).unwrap();
            let closed = marginal_density(side, 0.8, t, &c);
            assert!((numeric - closed).abs() < 1e-8, "{c:?} {side:?}: {numeric} vs {closed}");
        }
        let f: Vec<f64> = g.points().map(|x| marginal_density(Side::B, x, t, &c)).collect();
        assert!((quadrature_1d(&g, &f).unwrap() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn fringe_period_matches_density_and_cross_term_phase() {
    let c = StateConfig::entangled(0.0);
    let t = 4.0;
    let p = c.slits_a;
    let period = pilotwave::analysis::fringe_period(&c, t);

    // Zeros of p_{φ=0} − p_{φ=π} along x_A = x_B = s sit where the cross-term
    // phase crosses π/2 + nπ, spaced by half a period in u = x_A + x_B.
    let grid = oracle_grid(&p, t, 16).unwrap();
    let u = oracle_packet(Slit::Upper, &p, t, &grid).unwrap();
    let d = oracle_packet(Slit::Lower, &p, t, &grid).unwrap();
    let fringe: Vec<f64> = u.iter().zip(&d).map(|(a, b)| (a * a * (b * b).conj()).re).collect();
    let mut zeros = Vec::new();
    for i in 0..grid.n - 1 {
        let (s0, s1) = (grid.point(i), grid.point(i + 1));
        if s0.abs() > 40.0 {
            continue;
        }
        let (f0, f1) = (fringe[i], fringe[i + 1]);
        if f0 == 0.0 || f0.signum() != f1.signum() {
            zeros.push(s0 - f0 * (s1 - s0) / (f1 - f0));
        }
    }
    assert!(zeros.len() >= 4, "{zeros:?}");
    let spacing: Vec<f64> = zeros.windows(2).map(|w| 2.0 * 2.0 * (w[1] - w[0])).collect();
    for s in &spacing {
        assert!((s - period).abs() < 1e-4 * period, "{s} vs {period}");
    }

    // Phase gradient of the cross term along u, by finite differences.
    let cross = |s: f64| {
        let gu = packet_amplitude(Slit::Upper, s, t, &p);
        let gd = packet_amplitude(Slit::Lower, s, t, &p);
        gu * gu * (gd * gd).conj()
    };
    let s0 = 0.37;
    let du = (cross(s0 + H) / cross(s0 - H)).arg() / (2.0 * 2.0 * H);
    assert!((2.0 * PI / du.abs() - period).abs() < 1e-6 * period);
    // Far field at the defaults: close to 8π.
    assert!((period - 8.0 * PI).abs() < 1e-3);
}

#[test]
fn product_state_velocity_ignores_partner() {
    let c = StateConfig::product_upper();
    for t in [0.5, 1.0, 4.0] {
        for xa in [0.2, 0.5, 3.0] {
            let v0 = velocity(Side::A, &pt(xa, -1.0, t), &c, DEFAULT_EPS_NODE).unwrap();
            for xb in [0.0, 2.0] {
                assert_eq!(v0, velocity(Side::A, &pt(xa, xb, t), &c, DEFAULT_EPS_NODE).unwrap());
            }
        }
    }
    let pw = weak_momentum(Side::A, &pt(0.5, 0.5, 0.0), &c, DEFAULT_EPS_NODE).unwrap();
    assert_eq!(pw, Complex::new(0.0, 0.0));
    assert_eq!(c.kind, StateKind::ProductUpper);
}

#[test]
fn paraxial_constant_for_810nm_in_millimetres() {
    let map = ParaxialMap::from_wavelength(810e-6, 1.0).unwrap();
    let t = paraxial_time(1000.0, &map);
    assert!((t - 0.128_915).abs() < 1e-6, "{t}");
    assert!((paraxial_distance(1.0, &map) - 7757.0).abs() < 1.0);
}
