use std::f64::consts::PI;

use apollonian::carpet::{self, Bump, Coordinate, OrbitOptions};
use apollonian::geom::pt;
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn q8_parameters() {
    let c = carpet::solve_params(8).unwrap();
    assert!((c.t - 1.5537740).abs() < 5e-7);
    assert!((c.s - 1.1892071).abs() < 5e-7);
    assert!((c.r - 0.56882).abs() < 5e-6);
    assert!((c.t * c.t - c.s * c.s - 1.0).abs() < 1e-12);
    assert!((c.r * c.r + c.r * c.s - 1.0).abs() < 1e-12);
    assert!(c.alternative_root > 1.0);
}

#[test]
fn orbit_is_deterministic() {
    let cfg = carpet::solve_params(9).unwrap();
    let a = carpet::enumerate_circles(&cfg, 2e-3, &OrbitOptions::default()).unwrap();
    let b = carpet::enumerate_circles(&cfg, 2e-3, &OrbitOptions::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(carpet::render_orbit_svg(&a, 400.0), carpet::render_orbit_svg(&b, 400.0));
}

#[test]
fn ring_mass_is_two_pi_sum_of_squares() {
    let cfg = carpet::solve_params(8).unwrap();
    let o = carpet::enumerate_circles(&cfg, 1e-2, &OrbitOptions::default()).unwrap();
    let net = carpet::assemble_carpet_rings(&o, 16).unwrap();
    let want: f64 = o.circles.iter().map(|c| 2.0 * PI * c.radius * c.radius).sum();
    assert!((net.total_mass() - want).abs() <= 1e-12 * want);
}

/// `∫_D ∂_i v dA` by the polar midpoint rule, Richardson-extrapolated in
/// the radial step.
fn area_integral(center: Complex64, radius: f64, v: &Bump, coord: Coordinate) -> f64 {
    let (a, b) = (polar_midpoint(center, radius, v, coord, 200), polar_midpoint(center, radius, v, coord, 400));
    (4.0 * b - a) / 3.0
}

fn polar_midpoint(center: Complex64, radius: f64, v: &Bump, coord: Coordinate, nr: usize) -> f64 {
    let nt = 800;
    let mut s = 0.0;
    for i in 0..nr {
        let rho = radius * (i as f64 + 0.5) / nr as f64;
        for k in 0..nt {
            let z = center + Complex64::from_polar(rho, 2.0 * PI * k as f64 / nt as f64);
            let g = v.value_and_gradient(z).1;
            s += if coord == Coordinate::X { g.re } else { g.im } * rho;
        }
    }
    s * (radius / nr as f64) * (2.0 * PI / nt as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generator_relations_hold(q in 7u32..=24) {
        let cfg = carpet::solve_params(q).unwrap();
        prop_assert!(cfg.max_residual() < 1e-12);
        prop_assert!(cfg.bisection_discrepancy < 1e-10);
        let samples: Vec<_> = (0..50).map(|k| Complex64::from_polar(0.1 + 0.015 * k as f64, 0.7 * k as f64)).collect();
        let rel = carpet::relation_residuals(&cfg, &samples);
        prop_assert!(rel.involution.iter().all(|&x| x < 1e-10));
        prop_assert!(rel.dihedral < 1e-10);
        prop_assert!(rel.boundary_invariance < 1e-12);
    }

    #[test]
    fn flux_equals_area_integral(cx in -0.4f64..0.4, cy in -0.4f64..0.4, r in 0.02f64..0.5, which in 0usize..5, x in any::<bool>()) {
        let v = Bump::standard_family()[which];
        let coord = if x { Coordinate::X } else { Coordinate::Y };
        let flux = carpet::circle_flux(pt(cx, cy), r, &v, coord, 256);
        let area = area_integral(pt(cx, cy), r, &v, coord);
        prop_assert!((flux - area).abs() <= 1e-5 * r * r + 1e-9, "{flux} vs {area}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn orbit_circles_disjoint_inside_disk(q in 7u32..=16) {
        let cfg = carpet::solve_params(q).unwrap();
        let o = carpet::enumerate_circles(&cfg, 5e-3, &OrbitOptions::default()).unwrap();
        prop_assert_eq!(o.circles.iter().filter(|c| c.outer).count(), 1);
        let s = carpet::separation_stats(&o).unwrap();
        prop_assert_eq!(s.overlaps, 0);
        prop_assert_eq!(s.outside, 0);
        prop_assert!(s.epsilon > 0.0);
        let inner: Vec<_> = o.inner().collect();
        for (i, a) in inner.iter().enumerate() {
            prop_assert!(a.center.norm() + a.radius <= 1.0 + 1e-9);
            for b in &inner[i + 1..] {
                prop_assert!((a.center - b.center).norm() >= a.radius + b.radius - 1e-9 * a.radius.min(b.radius));
            }
        }
    }
}
