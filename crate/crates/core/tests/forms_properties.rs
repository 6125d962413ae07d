use apollonian::forms::{self, MassLumping, WeightedNetwork};
use apollonian::geom::{self, pt, DiskTriple};
use apollonian::spectra::sparse::SymSparse;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn curvature() -> impl Strategy<Value = f64> {
    (-2.3f64..2.3).prop_map(f64::exp)
}

fn triple(a: f64, b: f64, c: f64) -> DiskTriple {
    geom::triple_from_curvatures(a, b, c).unwrap()
}

fn networks(t: &DiskTriple) -> Vec<WeightedNetwork> {
    vec![
        forms::trace_network(t, 4, MassLumping::CellThirds).unwrap(),
        forms::assemble_arc_fem(t, 3, 4).unwrap().network(),
    ]
}

fn components(net: &WeightedNetwork) -> usize {
    SymSparse::from_triplets(net.vertex_count(), net.edges.iter().map(|&(i, j, c)| (i, j, -c))).components()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn clipping_never_increases_energy(seed in any::<u64>()) {
        let t = triple(1.0, 2.0, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for net in networks(&t) {
            let u: Vec<f64> = (0..net.vertex_count()).map(|_| rng.random_range(-0.5..1.5)).collect();
            let clipped: Vec<f64> = u.iter().map(|x| x.clamp(0.0, 1.0)).collect();
            prop_assert!(net.energy(&clipped) <= net.energy(&u) * (1.0 + 1e-14));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_is_dilation_invariant(a in curvature(), b in curvature(), c in curvature(), s in 0.2f64..5.0, seed in any::<u64>()) {
        let t = triple(a, b, c);
        let u_t = t.similarity(s, pt(1.0, -2.0)).unwrap();
        let f = forms::trace_network(&t, 3, MassLumping::CellThirds).unwrap();
        let g = forms::trace_network(&u_t, 3, MassLumping::CellThirds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..f.vertex_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        prop_assert!((f.energy(&u) - g.energy(&u)).abs() <= 1e-10 * f.energy(&u));
        for (m, n) in f.masses.iter().zip(&g.masses) {
            prop_assert!((n / m - s * s).abs() <= 1e-9 * s * s);
        }
    }

    #[test]
    fn trace_compatibility_on_random_triples(a in curvature(), b in curvature(), c in curvature(), seed in any::<u64>()) {
        let t = triple(a, b, c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in 0..=3 {
            let coarse = forms::assemble_trace_form(&t, m).unwrap();
            let fine = forms::assemble_trace_form(&t, m + 1).unwrap();
            let fixed: Vec<usize> = (0..coarse.vertex_count()).collect();
            let u: Vec<f64> = fixed.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let (e, _) = fine.constrained_minimum(&fixed, &u).unwrap();
            prop_assert!((e - coarse.energy(&u)).abs() <= 1e-9 * coarse.energy(&u));
        }
    }
}

#[test]
fn constants_span_the_null_space() {
    for t in [triple(1.0, 1.0, 1.0), triple(2.0, 3.0, 15.0)] {
        for m in 1..=5 {
            for net in [
                forms::trace_network(&t, m, MassLumping::CellThirds).unwrap(),
                forms::assemble_arc_fem(&t, m, 3).unwrap().network(),
            ] {
                let ones = vec![1.0; net.vertex_count()];
                assert_eq!(net.energy(&ones), 0.0);
                assert_eq!(components(&net), 1);
            }
        }
    }
}

#[test]
fn trace_mass_total_is_twice_the_triangle_area() {
    for t in [triple(1.0, 1.0, 1.0), triple(1.0, 2.0, 3.0), triple(2.0, 3.0, 15.0)] {
        let target = 2.0 * geom::triangle_area(&t).unwrap();
        for m in 0..=6 {
            let total = forms::assemble_mass_trace(&t, m, MassLumping::CellThirds).unwrap().total;
            assert!((total / target - 1.0).abs() <= 1e-12, "m={m}: {total} vs {target}");
        }
    }
}

#[test]
fn arc_fem_weights_and_mass_growth() {
    let t = triple(1.0, 2.0, 3.0);
    let bound = 2.0 * geom::triangle_area(&t).unwrap();
    let mut last = 0.0;
    for m in 1..=6 {
        let net = forms::assemble_arc_fem(&t, m, 2).unwrap();
        for e in &net.edges {
            assert!((e.stiffness() * e.mass() - e.radius * e.radius).abs() <= 1e-12 * e.radius * e.radius);
        }
        let total = net.total_mass();
        assert!(total > last && total < bound, "m={m}: {total}");
        last = total;
    }
}

#[test]
fn arc_fem_coordinate_energy_approaches_mass() {
    // Piecewise-linear interpolation of a unit-speed curve loses energy at
    // second order in the segment angle.
    let t = triple(1.0, 1.0, 1.0);
    let mut prev = f64::INFINITY;
    for refine in [2, 4, 8, 16] {
        let net = forms::assemble_arc_fem(&t, 4, refine).unwrap();
        let x: Vec<f64> = net.points.iter().map(|p| p.re).collect();
        let y: Vec<f64> = net.points.iter().map(|p| p.im).collect();
        let deficit = 1.0 - (net.energy(&x) + net.energy(&y)) / net.total_mass();
        assert!(deficit >= 0.0);
        assert!(deficit < 0.3 * prev, "refine {refine}: deficit {deficit}");
        prev = deficit;
    }
    assert!(prev < 2e-3);
}
