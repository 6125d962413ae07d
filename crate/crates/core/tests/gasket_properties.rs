use std::collections::HashMap;

use apollonian::gasket::{self, CountOptions, CurvatureQuadruple, Word};
use apollonian::geom::{self, pt, DiskTriple, Point, Tolerance};
use proptest::prelude::*;

fn curvature() -> impl Strategy<Value = f64> {
    (-2.3f64..2.3).prop_map(f64::exp)
}

fn word(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(1u8..=3, 0..=max_len).prop_map(|l| Word::new(&l).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// Number of distinct points at absolute tolerance `tol`.
fn distinct(points: &[Point], tol: f64) -> usize {
    let mut grid: HashMap<(i64, i64), Vec<Point>> = HashMap::new();
    let mut count = 0;
    for &z in points {
        let key = ((z.re / (4.0 * tol)).floor() as i64, (z.im / (4.0 * tol)).floor() as i64);
        let seen = (-1..=1).any(|dx| {
            (-1..=1).any(|dy| grid.get(&(key.0 + dx, key.1 + dy)).is_some_and(|v| v.iter().any(|p| (p - z).norm() <= tol)))
        });
        if !seen {
            grid.entry(key).or_default().push(z);
            count += 1;
        }
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn quadruple_matches_geometry(a in curvature(), b in curvature(), c in curvature(), w in word(10)) {
        let t = geom::triple_from_curvatures(a, b, c).unwrap();
        let q = gasket::quadruple_at(&t.quad(), &w).unwrap();
        let g = gasket::triple_at(&t, &w).unwrap();
        for (x, d) in q.members().iter().zip(g.disks()) {
            prop_assert!(rel(*x, d.curvature()) <= 1e-9, "{x} vs {}", d.curvature());
        }
        prop_assert!(rel(q.kappa, g.kappa()) <= 1e-9);
        let din = geom::inscribed_disk(&g).unwrap().curvature();
        prop_assert!(rel(din, q.inscribed_curvature()) <= 1e-9);
    }

    #[test]
    fn gamma_closed(a in 0.0f64..50.0, b in 0.0f64..50.0, c in 0.01f64..50.0, w in word(20)) {
        let g = CurvatureQuadruple::from_members(a, b, c).unwrap();
        let out = gasket::quadruple_at(&g, &w).unwrap();
        prop_assert!(out.kappa_defect() <= 1e-12);
    }

    #[test]
    fn counts_invariant_under_permutation(a in curvature(), b in curvature(), c in curvature(), scale in 1.0f64..200.0) {
        let base = geom::triple_from_curvatures(a, b, c).unwrap();
        let lambda = base.quad().inscribed_curvature() * scale;
        let opts = CountOptions::default();
        let n = gasket::count_inscribed(&base, lambda, &opts).unwrap();
        for (x, y, z) in [(b, c, a), (c, a, b), (b, a, c), (a, c, b), (c, b, a)] {
            let t = geom::triple_from_curvatures(x, y, z).unwrap();
            prop_assert_eq!(gasket::count_inscribed(&t, lambda, &opts).unwrap(), n);
        }
    }

    #[test]
    fn vertex_sets_invariant_under_rotation(a in curvature(), b in curvature(), c in curvature(), m in 0usize..=4) {
        let t = geom::triple_from_curvatures(a, b, c).unwrap();
        let [d1, d2, d3] = *t.disks();
        let r = geom::validate_triple(&d2, &d3, &d1, &Tolerance::default()).unwrap();
        let p = gasket::vertices(&t, m).unwrap().points;
        let q = gasket::vertices(&r, m).unwrap().points;
        prop_assert_eq!(p.len(), q.len());
        let tol = 1e-9 * t.scale();
        for z in &q {
            prop_assert!(p.iter().any(|w| (w - z).norm() <= tol));
        }
    }

    #[test]
    fn combinatorial_vertices_match_geometric_dedupe(a in curvature(), b in curvature(), c in curvature(), m in 0usize..=4) {
        let t = geom::triple_from_curvatures(a, b, c).unwrap();
        let mesh = gasket::vertices(&t, m).unwrap();
        let expected = 3 + 3 * (3usize.pow(m as u32) - 1) / 2;
        prop_assert_eq!(mesh.vertex_count(), expected);
        let mut all: Vec<Point> = Vec::new();
        for cell in gasket::cells_up_to(&t, m).unwrap() {
            all.extend_from_slice(cell.triple.q());
        }
        prop_assert_eq!(distinct(&all, 1e-9 * t.scale()), expected);
        prop_assert_eq!(distinct(&mesh.points, 1e-9 * t.scale()), expected);
    }

    #[test]
    fn similarity_scales_curvature(a in curvature(), b in curvature(), c in curvature(), s in 0.1f64..10.0, x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let t = geom::triple_from_curvatures(a, b, c).unwrap();
        let u = t.similarity(s, pt(x, y)).unwrap();
        let d = geom::inscribed_disk(&t).unwrap().curvature();
        let e = geom::inscribed_disk(&u).unwrap().curvature();
        prop_assert!(rel(d, s * e) <= 1e-9);
        prop_assert!(rel(t.kappa(), s * u.kappa()) <= 1e-9);
    }
}

#[test]
fn inscribed_curvature_increases_along_words() {
    for (a, b, c) in [(1.0, 1.0, 1.0), (2.0, 3.0, 15.0), (0.5, 7.0, 1.25)] {
        let t = geom::triple_from_curvatures(a, b, c).unwrap();
        let cells = gasket::cells_up_to(&t, 6).unwrap();
        let curv: HashMap<Word, f64> = cells.iter().map(|c| (c.word.clone(), c.inscribed.curvature())).collect();
        for cell in &cells {
            if cell.word.len() < 6 {
                for j in 1..=3 {
                    assert!(curv[&cell.word.child(j)] > curv[&cell.word]);
                }
            }
        }
    }
}

#[test]
fn index_set_words_pairwise_incomparable() {
    let words = apollonian::spectra::index_set(8);
    assert_eq!(words.len(), 6 * 8 - 3);
    for (i, u) in words.iter().enumerate() {
        for v in &words[i + 1..] {
            assert!(!u.comparable(v), "{u} and {v} are comparable");
        }
    }
}

#[test]
fn vertex_sets_are_nested() {
    let t = geom::triple_from_curvatures(1.0, 2.0, 3.0).unwrap();
    let mut prev = gasket::vertices(&t, 0).unwrap().points;
    for m in 1..=6 {
        let cur = gasket::vertices(&t, m).unwrap().points;
        assert_eq!(&cur[..prev.len()], &prev[..]);
        prev = cur;
    }
    assert_eq!(prev.len(), 1095);
}

#[test]
fn counting_is_monotone_and_integral() {
    let t = geom::triple_from_curvatures(1.0, 1.0, 1.0).unwrap();
    let opts = CountOptions::default();
    let mut last = 0;
    for k in 0..30 {
        let lambda = 6.0 * 1.4f64.powi(k);
        let n = gasket::count_inscribed(&t, lambda, &opts).unwrap();
        assert!(n >= last);
        last = n;
    }
}
