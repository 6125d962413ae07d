use apollonian::forms::MassLumping;
use apollonian::geom::{self, DiskTriple};
use apollonian::spectra::{self, GeneralizedEVP, HowMany, Scheme, SolveOptions, SolvePath};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRACE: Scheme = Scheme::Trace { lumping: MassLumping::CellThirds };

fn triple(a: f64, b: f64, c: f64) -> DiskTriple {
    geom::triple_from_curvatures(a, b, c).unwrap()
}

fn iterative() -> SolveOptions {
    SolveOptions { dense_threshold: 0, ..Default::default() }
}

fn residual_bound_holds(evp: &GeneralizedEVP, opts: &SolveOptions) -> (SolvePath, bool) {
    let s = spectra::solve(evp, HowMany::Lowest(40), opts).unwrap();
    let c = s.certificate.expect("certified solve");
    (c.path, c.max_residual <= 1e-8 * c.lambda_max)
}

#[test]
fn inertia_matches_computed_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for scheme in [TRACE, Scheme::ArcFem { refine: 2 }] {
        let evp = scheme.evp(&triple(1.0, 2.0, 3.0), 5, true).unwrap();
        let s = spectra::solve(&evp, HowMany::All, &iterative()).unwrap();
        let top = *s.eigenvalues.last().unwrap();
        for _ in 0..10 {
            let sigma = rng.random_range(0.0..1.1 * top);
            let listed = s.eigenvalues.partition_point(|&x| x <= sigma);
            assert_eq!(spectra::eigen_count(&evp, sigma), listed, "{} sigma {sigma}", scheme.name());
        }
    }
}

#[test]
fn certificates_on_both_paths() {
    let evp = TRACE.evp(&triple(1.0, 1.0, 1.0), 5, true).unwrap();
    assert_eq!(residual_bound_holds(&evp, &SolveOptions::default()), (SolvePath::Dense, true));
    assert_eq!(residual_bound_holds(&evp, &iterative()), (SolvePath::Iterative, true));
}

#[test]
fn dense_and_iterative_agree() {
    let evp = Scheme::ArcFem { refine: 3 }.evp(&triple(2.0, 3.0, 15.0), 4, true).unwrap();
    let a = spectra::solve(&evp, HowMany::Lowest(60), &SolveOptions::default()).unwrap();
    let b = spectra::solve(&evp, HowMany::Lowest(60), &iterative()).unwrap();
    let scale = a.certificate.unwrap().lambda_max;
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() <= 1e-8 * scale, "{x} vs {y}");
    }
}

#[test]
fn neumann_ground_state_is_constant() {
    for scheme in [TRACE, Scheme::ArcFem { refine: 2 }] {
        let evp = scheme.evp(&triple(1.0, 1.0, 1.0), 3, false).unwrap();
        let s = spectra::solve(&evp, HowMany::Lowest(2), &SolveOptions::default()).unwrap();
        let scale = s.certificate.unwrap().lambda_max;
        assert!(s.eigenvalues[0].abs() <= 1e-10 * scale);
        assert!(s.eigenvalues[1] > 1e-6 * scale);
    }
}

#[test]
fn lowest_dirichlet_eigenvalues_agree_across_schemes() {
    let t = triple(1.0, 1.0, 1.0);
    let opts = SolveOptions::default();
    let a = spectra::solve(&TRACE.evp(&t, 6, true).unwrap(), HowMany::Lowest(10), &opts).unwrap();
    let b = spectra::solve(&Scheme::ArcFem { refine: 4 }.evp(&t, 6, true).unwrap(), HowMany::Lowest(10), &opts).unwrap();
    let worst = a.eigenvalues.iter().zip(&b.eigenvalues).map(|(x, y)| (x / y - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst <= 0.05, "worst relative difference {worst:.4} over the lowest 10 (want <= 0.05)");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn enlarging_dirichlet_set_raises_eigenvalues(extra in prop::collection::vec(0usize..42, 1..6), arc in any::<bool>()) {
        let scheme = if arc { Scheme::ArcFem { refine: 2 } } else { TRACE };
        let evp = scheme.evp(&triple(1.0, 2.0, 3.0), 3, true).unwrap();
        let mut bigger = evp.boundary.clone();
        bigger.extend(&extra);
        let more = evp.with_boundary(&bigger).unwrap();
        let opts = SolveOptions { allow_disconnected: true, ..Default::default() };
        let a = spectra::solve(&evp, HowMany::All, &opts).unwrap();
        let b = spectra::solve(&more, HowMany::All, &opts).unwrap();
        for (n, (x, y)) in a.eigenvalues.iter().zip(&b.eigenvalues).enumerate() {
            prop_assert!(*y >= x * (1.0 - 1e-12), "lambda_{n}: {x} > {y}");
        }
    }

    #[test]
    fn dirichlet_ground_state_positive(a in 0.2f64..5.0, b in 0.2f64..5.0, c in 0.2f64..5.0) {
        let evp = TRACE.evp(&triple(a, b, c), 3, true).unwrap();
        let s = spectra::solve(&evp, HowMany::Lowest(1), &SolveOptions::default()).unwrap();
        prop_assert!(s.eigenvalues[0] > 0.0);
    }
}
