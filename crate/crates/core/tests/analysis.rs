use std::f64::consts::PI;

use pilotwave::analysis::*;
use pilotwave::trajectories::{sample_at, EnsembleSpec};
use pilotwave::wavefield::{joint_density, packet_amplitude};
use pilotwave::{Complex, Error, Side, Slit, SlitParams, SpacetimePoint, StateConfig, StateKind};

fn with_sigma(sigma: f64) -> StateConfig {
    let p = SlitParams::from_separation(sigma, 1.0).unwrap();
    StateConfig::new(p, p, 0.0, StateKind::Entangled).unwrap()
}

#[test]
fn simpson_converges_at_fourth_order() {
    let f = |x: f64| (x.sin() * 3.0).exp();
    let exact = {
        let g = Grid1D::simpson(0.0, 2.0, 40_001).unwrap();
        let v: Vec<f64> = g.points().map(f).collect();
        quadrature_1d(&g, &v).unwrap()
    };
    // Plain composite sums at n and 2n panels, without the self-check.
    let simpson = |panels: usize| {
        let h = 2.0 / panels as f64;
        let mut s = f(0.0) + f(2.0);
        for i in 1..panels {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    };
    let e1 = (simpson(16) - exact).abs();
    let e2 = (simpson(32) - exact).abs();
    let order = (e1 / e2).log2();
    assert!(order >= 3.8, "order {order}");
}

#[test]
fn quadrature_normalizes_state_at_t4() {
    let c = StateConfig::entangled(0.0);
    let grid = Grid2D::covering(&c, 4.0, 9.0, 801).unwrap();
    let f = Field2D::sample(grid, |a, b| joint_density(&SpacetimePoint { x_a: a, x_b: b, t: 4.0 }, &c));
    assert!((quadrature_2d(&f).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn oracle_conserves_norm_and_rejects_bad_grids() {
    let p = SlitParams::default();
    let grid = oracle_grid(&p, 4.0, 16).unwrap();
    let init: Vec<Complex> = grid.points().map(|x| packet_amplitude(Slit::Lower, x, 0.0, &p)).collect();
    assert_eq!(numeric_evolve_oracle(&init, &grid, 0.0).unwrap(), init);
    let out = numeric_evolve_oracle(&init, &grid, 4.0).unwrap();
    let n0: f64 = init.iter().map(|z| z.norm_sqr()).sum();
    let n1: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    assert!((n0 * grid.spacing() - 1.0).abs() < 1e-10);
    assert!((n1 - n0).abs() < 1e-10 * n0);

    // Domain far too small for the spread at t = 4.
    let small = Grid1D::with_spacing(-2.0, p.sigma / 16.0, 1024).unwrap();
    let init: Vec<Complex> = small.points().map(|x| packet_amplitude(Slit::Upper, x, 0.0, &p)).collect();
    assert!(matches!(numeric_evolve_oracle(&init, &small, 4.0), Err(Error::Resolution(_))));
    // Spacing coarser than the packet.
    let coarse = Grid1D::with_spacing(-400.0, 0.2, 4096).unwrap();
    let init: Vec<Complex> = coarse.points().map(|x| packet_amplitude(Slit::Upper, x, 0.0, &p)).collect();
    assert!(matches!(numeric_evolve_oracle(&init, &coarse, 4.0), Err(Error::Resolution(_))));
    assert!(oracle_grid(&p, 4.0, 8).is_err());
}

#[test]
fn distance_metrics() {
    let b = Bins::new(0.0, 1.0, 2).unwrap();
    let mut x = Histogram2D::new(b, b);
    let mut y = Histogram2D::new(b, b);
    x.fill(0.25, 0.25);
    y.fill(0.75, 0.75);
    for m in [Metric::TotalVariation, Metric::ChiSquare, Metric::SupNorm] {
        let r = distribution_distance(&x, &x, m).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.n_cells, 4);
    }
    assert_eq!(distribution_distance(&x, &y, Metric::TotalVariation).unwrap().value, 1.0);
    assert_eq!(distribution_distance(&x, &y, Metric::SupNorm).unwrap().value, 1.0);
    let chi = distribution_distance(&x, &y, Metric::ChiSquare).unwrap().value;
    assert!(chi > 0.0 && chi.is_finite());
    let other = Histogram2D::new(Bins::new(0.0, 2.0, 2).unwrap(), b);
    assert!(matches!(
        distribution_distance(&x, &other, Metric::TotalVariation),
        Err(Error::BinMismatch(_))
    ));
}

#[test]
fn sampling_noise_sets_the_distance_scale() {
    let c = StateConfig::entangled(0.0);
    let t = 4.0;
    let n = 100_000;
    let r = 0.5 + 8.0 * c.slits_a.width_at(t);
    let bins = Bins::new(-r, r, 40).unwrap();
    let a = Histogram2D::from_points(bins, bins, &sample_at(&c, t, &EnsembleSpec::new(n, 1).unwrap()));
    let b = Histogram2D::from_points(bins, bins, &sample_at(&c, t, &EnsembleSpec::new(n, 2).unwrap()));
    let e = expected_histogram(&c, t, bins, bins, 8, n as f64);
    let tv_a = distribution_distance(&a, &e, Metric::TotalVariation).unwrap().value;
    let tv_b = distribution_distance(&b, &e, Metric::TotalVariation).unwrap().value;
    let tv_ab = distribution_distance(&a, &b, Metric::TotalVariation).unwrap().value;
    assert!(tv_a < 0.02 && tv_b < 0.02, "{tv_a} {tv_b}");
    // Two noisy histograms: √2 times the single-sample noise.
    assert!(tv_ab < 0.02 * 2f64.sqrt(), "{tv_ab}");
    // Expected multinomial TV, ½ Σ √(2 p (1 − p)/(π n)).
    let predicted: f64 = e
        .probabilities()
        .iter()
        .map(|p| 0.5 * (2.0 * p * (1.0 - p) / (PI * n as f64)).sqrt())
        .sum();
    assert!((tv_a / predicted - 1.0).abs() < 0.2, "{tv_a} vs {predicted}");
    // A wrong phase is far away.
    let wrong = expected_histogram(&c.with_phi(PI), t, bins, bins, 8, n as f64);
    assert!(distribution_distance(&a, &wrong, Metric::TotalVariation).unwrap().value > 0.1);
}

#[test]
fn no_signaling_gap_and_bound() {
    let c = StateConfig::entangled(0.0);
    let t = 4.0;
    let g = covering_grid(&c.slits_b, t, 9.0, 4001).unwrap();
    let gap = no_signaling_gap(&c, 0.0, PI, Side::B, t, &g).unwrap();
    assert!(gap < 1e-4, "{gap}");
    assert!(gap <= no_signaling_bound(&c, 0.0, PI, Side::B, t, &g));
    assert_eq!(no_signaling_gap(&c, 1.1, 1.1, Side::A, t, &g).unwrap(), 0.0);
    let prod = StateConfig::product_upper();
    assert_eq!(no_signaling_gap(&prod, 0.0, PI, Side::B, t, &g).unwrap(), 0.0);
    let bad = Grid1D::simpson(-1.0, 1.0, 401).unwrap();
    assert!(matches!(
        no_signaling_gap(&c, 0.0, PI, Side::B, t, &bad),
        Err(Error::GridTooCoarse { .. })
    ));
}

#[test]
fn no_signaling_gap_grows_with_overlap() {
    let t = 4.0;
    let mut last = 0.0;
    for sigma in [0.1, 0.15, 0.2, 0.25, 0.3] {
        let c = with_sigma(sigma);
        let g = covering_grid(&c.slits_b, t, 9.0, 4001).unwrap();
        let gap = no_signaling_gap(&c, 0.0, PI, Side::B, t, &g).unwrap();
        let bound = no_signaling_bound(&c, 0.0, PI, Side::B, t, &g);
        assert!(gap > last, "σ={sigma}: {gap} after {last}");
        assert!(gap <= bound * (1.0 + 1e-12), "σ={sigma}: {gap} > {bound}");
        last = gap;
    }
}

#[test]
fn fringes_are_phase_opposed() {
    let c = StateConfig::entangled(0.0);
    let grid = Grid2D::covering(&c, 4.0, 9.0, 801).unwrap();
    let residual = fringe_shift_check(&c, 4.0, &grid).unwrap();
    assert!(residual < 1e-5, "{residual}");
    let prod = StateConfig::product_upper();
    let pgrid = Grid2D::covering(&prod, 4.0, 9.0, 401).unwrap();
    assert_eq!(fringe_shift_check(&prod, 4.0, &pgrid).unwrap(), 0.0);
    let v = fringe_visibility(&c, 4.0, 2000);
    assert!(v > 0.9, "visibility {v}");
    assert!(fringe_visibility(&c.with_phi(PI), 4.0, 2000) > 0.9);
}

#[test]
fn histogram_bookkeeping() {
    let b = Bins::new(-1.0, 1.0, 4).unwrap();
    assert_eq!(b.width(), 0.5);
    assert_eq!(b.center(0), -0.75);
    assert_eq!(b.index(-1.0), Some(0));
    assert_eq!(b.index(1.0), None);
    let mut h = Histogram2D::new(b, b);
    h.fill(0.1, 0.1);
    h.fill(5.0, 0.1);
    assert_eq!(h.total(), 2.0);
    assert_eq!(h.outside, 1.0);
    assert!(Bins::new(1.0, 1.0, 4).is_err());
    assert!(Grid1D::new(0.0, 1.0, 2).is_err());
}
