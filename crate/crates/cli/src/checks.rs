//! Reproduction suites, one per acceptance criterion.

use std::f64::consts::PI;

use apollonian::carpet::{self, Bump, Coordinate, OrbitOptions};
use apollonian::forms::{self, ArcSegmentFunction, MassLumping};
use apollonian::gasket::{self, CountOptions, CurvatureMatrix};
use apollonian::geom::{self, pt, DiskTriple};
use apollonian::spectra::{self, HowMany, Scheme, SolveOptions};
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Descartes,
    Matrix,
    Identities,
    Counting,
    Weyl,
    Interlacing,
    Gap,
    Scaling,
    Extension,
    Carpet,
    CarpetDim,
    CarpetHarmonic,
    Census,
}

/// One line of a suite report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckLine {
    fn new(criterion: u8, name: &str, passed: bool, detail: String) -> Self {
        CheckLine { criterion, name: name.into(), passed, detail }
    }

    pub fn render(&self) -> String {
        format!("{} [{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.criterion, self.name, self.detail)
    }
}

type Res<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn run(suite: Suite, seed: u64) -> Res<Vec<CheckLine>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match suite {
        Suite::Descartes => descartes(&mut rng),
        Suite::Matrix => matrix(),
        Suite::Identities => identities(&mut rng),
        Suite::Counting => counting(),
        Suite::Weyl => weyl(),
        Suite::Interlacing => interlacing(&mut rng),
        Suite::Gap => gap(),
        Suite::Scaling => scaling(),
        Suite::Extension => extension(&mut rng),
        Suite::Carpet => carpet_construction(),
        Suite::CarpetDim => carpet_dimension(),
        Suite::CarpetHarmonic => carpet_harmonicity(),
        Suite::Census => census(),
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

/// A triple with random curvatures in `[0.1, 10]`, randomly dilated and moved.
pub fn random_triple(rng: &mut ChaCha8Rng) -> Res<DiskTriple> {
    let [a, b, c] = [0; 3].map(|_| log_uniform(rng, 0.1, 10.0));
    let t = geom::triple_from_curvatures(a, b, c).map_err(err)?;
    let s = log_uniform(rng, 0.5, 2.0);
    let shift = pt(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
    t.similarity(s, shift).map_err(err)
}

fn descartes(rng: &mut ChaCha8Rng) -> Res<Vec<CheckLine>> {
    let (mut ins, mut cir, mut orth, mut tang) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let t = random_triple(rng)?;
        let [a, b, c] = t.quad().members();
        let k = t.kappa();
        let din = geom::inscribed_disk(&t).map_err(err)?;
        let expect_in = a + b + c + 2.0 * k;
        ins = ins.max((din.curvature() - expect_in).abs() / expect_in);
        let (cin, rin) = (din.center().unwrap(), din.radius().unwrap());
        let dc = geom::circumscribed_disk(&t).map_err(err)?;
        cir = cir.max((dc.curvature() - k).abs() / k);
        let (cc, rc) = (dc.center().unwrap(), dc.radius().unwrap());
        for d in t.disks() {
            let (cj, rj) = (d.center().unwrap(), d.radius().unwrap());
            orth = orth.max(((cc - cj).norm_sqr() - rc * rc - rj * rj).abs() / (rc * rc + rj * rj));
            tang = tang.max(((cin - cj).norm() - rin - rj).abs() / rin);
        }
    }
    let ok = ins < 1e-9 && cir < 1e-9 && orth < 1e-9 && tang < 1e-9;
    Ok(vec![CheckLine::new(
        1,
        "descartes",
        ok,
        format!("1000 triples: inscribed {ins:.2e}, circumscribed {cir:.2e}, orthogonality {orth:.2e}, inscribed tangency {tang:.2e} (< 1e-9)"),
    )])
}

fn matrix() -> Res<Vec<CheckLine>> {
    let mut bad = Vec::new();
    for j in 1..=3u8 {
        let mut p = CurvatureMatrix::identity();
        for n in 0..=20u64 {
            if p != CurvatureMatrix::letter_power(j, n) {
                bad.push(format!("M_{j}^{n}"));
            }
            p = p.checked_mul(&CurvatureMatrix::letter(j)).map_err(err)?;
        }
    }
    Ok(vec![CheckLine::new(
        2,
        "matrix",
        bad.is_empty(),
        if bad.is_empty() { "M_{j^n} = closed form for j = 1,2,3 and n <= 20".into() } else { format!("mismatch at {}", bad.join(", ")) },
    )])
}

pub fn identity_triples() -> Res<Vec<DiskTriple>> {
    [(1.0, 1.0, 1.0), (1.0, 2.0, 3.0), (2.0, 3.0, 15.0)]
        .into_iter()
        .map(|(a, b, c)| geom::triple_from_curvatures(a, b, c).map_err(err))
        .collect()
}

fn identities(rng: &mut ChaCha8Rng) -> Res<Vec<CheckLine>> {
    let triples = identity_triples()?;
    let (mut energy, mut harm, mut compat) = (0.0f64, 0.0f64, 0.0f64);
    for t in &triples {
        let area = geom::triangle_area(t).map_err(err)?;
        for m in 0..=6 {
            let f = forms::assemble_trace_form(t, m).map_err(err)?;
            let x: Vec<f64> = f.points.iter().map(|p| p.re).collect();
            let y: Vec<f64> = f.points.iter().map(|p| p.im).collect();
            energy = energy.max(((f.energy(&x) + f.energy(&y)) / (2.0 * area) - 1.0).abs());
            let scale = f.local_scale();
            for h in [&x, &y] {
                let l = f.laplacian(h);
                for i in 3..l.len() {
                    harm = harm.max(l[i].abs() / scale[i]);
                }
            }
        }
        for m in 0..=4 {
            let coarse = forms::assemble_trace_form(t, m).map_err(err)?;
            let fine = forms::assemble_trace_form(t, m + 1).map_err(err)?;
            let fixed: Vec<usize> = (0..coarse.vertex_count()).collect();
            for _ in 0..20 {
                let u: Vec<f64> = fixed.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
                let e = coarse.energy(&u);
                let (emin, _) = fine.constrained_minimum(&fixed, &u).map_err(err)?;
                compat = compat.max((emin - e).abs() / e);
            }
        }
    }
    Ok(vec![
        CheckLine::new(3, "energy identity", energy < 1e-10, format!("max |E_m(h1)+E_m(h2) - 2 vol| / 2 vol = {energy:.2e} over 3 triples, m <= 6 (< 1e-10)")),
        CheckLine::new(4, "coordinate harmonicity", harm < 1e-10, format!("max scaled Laplacian residual on V_m minus V_0 = {harm:.2e}, m <= 6 (< 1e-10)")),
        CheckLine::new(5, "trace compatibility", compat < 1e-9, format!("max relative gap to constrained minimum = {compat:.2e}, 20 random u, m <= 4 (< 1e-9)")),
    ])
}

/// Log-log slope of the inscribed-circle count up to `10⁴` times the root
/// inscribed curvature, with 40 grid points.
pub fn counting_slope(t: &DiskTriple) -> Res<f64> {
    let q = t.quad();
    let d0 = q.inscribed_curvature();
    let grid = apollonian::fit::geometric_grid(d0, 1e4 * d0, 40);
    let counts = gasket::count_grid(&q, &grid, &CountOptions::default()).map_err(err)?;
    let pts: Vec<(f64, f64)> = grid.iter().zip(&counts).map(|(&l, &n)| (l, n as f64)).collect();
    Ok(gasket::fit_dimension(&pts).map_err(err)?.slope)
}

fn counting() -> Res<Vec<CheckLine>> {
    let unit = geom::triple_from_curvatures(1.0, 1.0, 1.0).map_err(err)?;
    let other = geom::triple_from_curvatures(2.0, 3.0, 15.0).map_err(err)?;
    let a = counting_slope(&unit)?;
    let b = counting_slope(&other)?;
    let ok = (1.28..=1.34).contains(&a) && (a - b).abs() <= 0.02;
    Ok(vec![CheckLine::new(6, "circle counting", ok, format!("slope (1,1,1) = {a:.5} in [1.28, 1.34]; (2,3,15) = {b:.5}, |diff| = {:.4} (<= 0.02)", (a - b).abs()))])
}

/// Weyl slope of a scheme on the unit triple with Dirichlet set `V_0`.
pub fn weyl_slope(scheme: Scheme, m: usize) -> Res<spectra::WeylFit> {
    let t = geom::triple_from_curvatures(1.0, 1.0, 1.0).map_err(err)?;
    let evp = scheme.evp(&t, m, true).map_err(err)?;
    let n = evp.free_indices().len();
    let s = spectra::solve(&evp, HowMany::Lowest(n / 2 + 1 + spectra::WEYL_EXTRA), &SolveOptions::default()).map_err(err)?;
    spectra::weyl_fit(&s).map_err(err)
}

fn weyl() -> Res<Vec<CheckLine>> {
    let trace = weyl_slope(Scheme::Trace { lumping: MassLumping::CellThirds }, 7)?;
    let arc = weyl_slope(Scheme::ArcFem { refine: 4 }, 6)?;
    let in_band = (0.61..=0.70).contains(&trace.slope);
    let agree = (trace.slope - arc.slope).abs() <= 0.03;
    Ok(vec![CheckLine::new(
        7,
        "weyl exponent",
        in_band && agree,
        format!(
            "trace m=7 slope = {:.5} (want [0.61, 0.70]); arc-FEM m=6 refine 4 slope = {:.5}, |diff| = {:.4} (want <= 0.03)",
            trace.slope,
            arc.slope,
            (trace.slope - arc.slope).abs()
        ),
    )])
}

fn interlacing(rng: &mut ChaCha8Rng) -> Res<Vec<CheckLine>> {
    let t = geom::triple_from_curvatures(1.0, 2.0, 3.0).map_err(err)?;
    let opts = SolveOptions { allow_disconnected: true, ..Default::default() };
    let mut checked = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    let schemes = [(Scheme::Trace { lumping: MassLumping::CellThirds }, 5), (Scheme::ArcFem { refine: 2 }, 4)];
    for (scheme, max_m) in schemes {
        for m in 1..=max_m {
            let evp = scheme.evp(&t, m, false).map_err(err)?;
            let n = evp.vertex_count();
            let mut random: Vec<usize> = (0..5).map(|_| rng.random_range(0..n)).collect();
            random.sort_unstable();
            random.dedup();
            for v in [vec![0, 1, 2], random] {
                match spectra::interlacing_check(&evp, &v, &opts) {
                    Ok(r) => {
                        checked += r.checked;
                        worst = worst.max(r.worst_relative);
                    }
                    Err(e) => failures.push(format!("{} m={m}: {e}", scheme.name())),
                }
            }
        }
    }
    Ok(vec![CheckLine::new(
        8,
        "interlacing",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{checked} index pairs, V = V_0 and random V, trace m <= 5 and arc-FEM m <= 4; worst relative excess {worst:.2e}")
        } else {
            failures.join("; ")
        },
    )])
}

/// `40 λ₁ / κ²` for the trace scheme with Dirichlet set `V_0`.
pub fn gap_ratio(t: &DiskTriple, m: usize) -> Res<f64> {
    let evp = Scheme::Trace { lumping: MassLumping::CellThirds }.evp(t, m, true).map_err(err)?;
    let s = spectra::solve(&evp, HowMany::Lowest(1), &SolveOptions::default()).map_err(err)?;
    Ok(40.0 * s.eigenvalues[0] / (t.kappa() * t.kappa()))
}

fn gap() -> Res<Vec<CheckLine>> {
    let t = geom::triple_from_curvatures(1.0, 1.0, 1.0).map_err(err)?;
    let ratios: Vec<f64> = [5, 6, 7].iter().map(|&m| gap_ratio(&t, m)).collect::<Res<_>>()?;
    let ok = ratios.iter().all(|&r| r >= 0.8) && ratios.windows(2).all(|w| w[1] >= w[0]) && ratios[2] >= 1.0;
    Ok(vec![CheckLine::new(9, "spectral gap", ok, format!("40 lambda_1 / kappa^2 at m = 5, 6, 7: {:.4}, {:.4}, {:.4}", ratios[0], ratios[1], ratios[2]))])
}

fn scaling() -> Res<Vec<CheckLine>> {
    let t = geom::triple_from_curvatures(1.0, 2.0, 3.0).map_err(err)?;
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (scheme, m) in [(Scheme::Trace { lumping: MassLumping::CellThirds }, 5), (Scheme::ArcFem { refine: 4 }, 4)] {
        for s in [2.0, 10.0] {
            let r = spectra::scaling_check(&t, s, scheme, m, 50).map_err(err)?;
            worst = worst.max(r.max_relative_deviation);
            parts.push(format!("{} s={s}: {:.2e}", r.scheme, r.max_relative_deviation));
        }
    }
    Ok(vec![CheckLine::new(10, "scaling", worst <= 1e-9, format!("lowest 50 ratios vs s^-2: {} (<= 1e-9)", parts.join(", ")))])
}

/// A random trigonometric polynomial of degree at most 4 on a random arc.
pub fn random_arc_function(rng: &mut ChaCha8Rng) -> Res<ArcSegmentFunction> {
    let center = pt(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
    let radius = log_uniform(rng, 0.1, 10.0);
    let start = rng.random_range(0.0..2.0 * PI);
    let sweep = rng.random_range(0.2..2.0 * PI);
    let degree = rng.random_range(1..=4usize);
    let c0: f64 = rng.random_range(-1.0..1.0);
    let coeffs: Vec<(f64, f64)> = (0..degree).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    ArcSegmentFunction::from_fn(center, radius, start, sweep, 129, |th| {
        c0 + coeffs.iter().enumerate().map(|(k, (a, b))| {
            let w = (k + 1) as f64 * (start + th);
            a * w.cos() + b * w.sin()
        }).sum::<f64>()
    })
    .map_err(err)
}

fn extension(rng: &mut ChaCha8Rng) -> Res<Vec<CheckLine>> {
    let mut violations = 0;
    let mut unstable = 0;
    let mut max_change = 0.0f64;
    for _ in 0..100 {
        let f = random_arc_function(rng)?;
        let a = rng.random_range(f.min()..=f.max());
        match forms::sector_extension_check(&f, a) {
            Ok(r) => {
                max_change = max_change.max(r.max_change);
                if !r.holds() {
                    violations += 1;
                }
            }
            Err(_) => unstable += 1,
        }
    }
    Ok(vec![CheckLine::new(
        11,
        "sector extension",
        violations == 0 && unstable == 0,
        format!("100 random trigonometric polynomials: {violations} violations, {unstable} unstable quadratures, max relative change {max_change:.2e}"),
    )])
}

/// Cutoffs whose last two decades carry the stability checks.
pub const CARPET_CUTOFFS: [f64; 3] = [1e-2, 1e-3, 1e-4];

fn carpet_construction() -> Res<Vec<CheckLine>> {
    let mut ok = true;
    let mut parts = Vec::new();
    let samples: Vec<_> = (0..100).map(|k| num_complex::Complex64::from_polar(0.05 + 0.009 * k as f64, 0.37 * k as f64)).collect();
    for q in [7, 8, 9, 12] {
        let cfg = carpet::solve_params(q).map_err(err)?;
        let rel = carpet::relation_residuals(&cfg, &samples);
        let rel_max = rel.involution.iter().copied().fold(rel.dihedral, f64::max);
        let mut eps = Vec::new();
        let mut disjoint = true;
        let mut nested = true;
        let mut prev: Option<carpet::CircleOrbit> = None;
        for &c in &CARPET_CUTOFFS {
            let o = carpet::enumerate_circles(&cfg, c, &OrbitOptions::default()).map_err(err)?;
            let s = carpet::separation_stats(&o).map_err(err)?;
            disjoint &= s.overlaps == 0 && s.outside == 0;
            if let Some(p) = &prev {
                nested &= p.is_subset_of(&o);
            }
            eps.push(s.epsilon);
            prev = Some(o);
        }
        let (e1, e2) = (eps[1], eps[2]);
        let stable = e2 > 0.0 && (e2 - e1).abs() <= 0.2 * e1;
        let pass = cfg.max_residual() < 1e-12 && rel_max < 1e-10 && disjoint && nested && stable;
        ok &= pass;
        parts.push(format!(
            "q={q}: residual {:.1e}, relations {rel_max:.1e}, disjoint {disjoint}, nested {nested}, eps {e1:.5} -> {e2:.5}",
            cfg.max_residual()
        ));
    }
    Ok(vec![CheckLine::new(12, "carpet construction", ok, parts.join("; "))])
}

fn carpet_dimension() -> Res<Vec<CheckLine>> {
    let mut ok = true;
    let mut parts = Vec::new();
    for q in [8, 9, 12] {
        let cfg = carpet::solve_params(q).map_err(err)?;
        let d: Vec<f64> = CARPET_CUTOFFS[1..]
            .iter()
            .map(|&c| {
                let o = carpet::enumerate_circles(&cfg, c, &OrbitOptions::default()).map_err(err)?;
                Ok(carpet::fit_carpet_dimension(&o).map_err(err)?.slope)
            })
            .collect::<Res<_>>()?;
        let pass = d.iter().all(|&x| x > 1.0 && x < 2.0) && (d[0] - d[1]).abs() <= 0.05;
        ok &= pass;
        parts.push(format!("q={q}: {:.4} -> {:.4}", d[0], d[1]));
    }
    Ok(vec![CheckLine::new(13, "carpet dimension", ok, format!("{} (in (1,2), drift <= 0.05)", parts.join("; ")))])
}

/// Harmonicity residuals for the standard bumps at each cutoff, `q = 8`.
pub fn harmonicity_table(nodes: usize) -> Res<Vec<Vec<f64>>> {
    let cfg = carpet::solve_params(8).map_err(err)?;
    CARPET_CUTOFFS
        .iter()
        .map(|&c| {
            let o = carpet::enumerate_circles(&cfg, c, &OrbitOptions::default()).map_err(err)?;
            let mut row = Vec::new();
            for b in Bump::standard_family() {
                for coord in [Coordinate::X, Coordinate::Y] {
                    row.push(carpet::harmonicity_residual(&o, &b, coord, nodes).map_err(err)?);
                }
            }
            Ok(row)
        })
        .collect()
}

fn carpet_harmonicity() -> Res<Vec<CheckLine>> {
    let table = harmonicity_table(64)?;
    let mut ok = true;
    for w in table.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            ok &= b.abs() < a.abs();
        }
    }
    let worst = table.windows(2).flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| b.abs() / a.abs()).collect::<Vec<_>>()).fold(0.0, f64::max);
    Ok(vec![CheckLine::new(
        14,
        "carpet harmonicity",
        ok,
        format!("q=8, 5 bumps x 2 coordinates, cutoffs 1e-2 -> 1e-3 -> 1e-4: worst decay ratio {worst:.3} (< 1)"),
    )])
}

fn census() -> Res<Vec<CheckLine>> {
    let t = geom::triple_from_curvatures(1.0, 1.0, 1.0).map_err(err)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 1..=3 {
        let size = spectra::v_lambda(n).len();
        ok &= size == 9 * n - 3;
        parts.push(format!("#V(n={n}) = {size}"));
    }
    for lambda in [0.05, 200.0, 2000.0] {
        let r = spectra::subdivision_census(&t, lambda, 6, 1).map_err(err)?;
        ok &= r.lower_holds;
        parts.push(format!("lambda={lambda}: sum {} <= N {} (+2), upper report {}", r.lower_sum, r.parent_count, r.upper_report));
    }
    Ok(vec![CheckLine::new(15, "subdivision census", ok, parts.join("; "))])
}
