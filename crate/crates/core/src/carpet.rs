//! Reflection groups `G_q` (q > 6), the circles of their round Sierpiński
//! carpet limit sets, and the carpet form evaluated on truncated orbits.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::FxHashMap as HashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::{geometric_grid, linear_fit, LinearFit};
use crate::forms::WeightedNetwork;
use crate::geom::{pt, CircleImage, GeomError, MobiusMap, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CarpetError {
    #[error("q must exceed 6 (got {q})")]
    InvalidQ { q: u32 },
    #[error("orbit exceeded the budget of {cap} circles")]
    BudgetExceeded { cap: usize },
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
    #[error("test function support violation: {0}")]
    SupportViolation(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Parameters of the four mirrors `ℓ₁ = ℝ`, `ℓ₂ = {|z − t e^{iπ/q}| = s}`,
/// `ℓ₃ = ℝ·e^{iπ/q}` and `ℓ₄ = {|z| = r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupConfig {
    pub q: u32,
    pub t: f64,
    pub s: f64,
    pub r: f64,
    /// `t² − 1 − s²` (ℓ₂ orthogonal to the unit circle).
    pub orthogonality_residual: f64,
    /// Deviation of the ℓ₁/ℓ₂ intersection angle from π/3.
    pub angle12_residual: f64,
    /// Deviation of the ℓ₂/ℓ₄ intersection angle from π/3.
    pub angle24_residual: f64,
    /// `|closed form − bisection|` over `t`, `s`, `r`.
    pub bisection_discrepancy: f64,
    /// Positive root of `r² − r·s − 1 = 0`, the opposite angle convention;
    /// always > 1, hence never a valid mirror inside the disk.
    pub alternative_root: f64,
}

impl GroupConfig {
    pub fn max_residual(&self) -> f64 {
        self.orthogonality_residual.abs().max(self.angle12_residual.abs()).max(self.angle24_residual.abs())
    }

    /// `Inv_{ℓ₁}, …, Inv_{ℓ₄}`.
    pub fn generators(&self) -> [MobiusMap; 4] {
        let e = Complex64::from_polar(1.0, PI / self.q as f64);
        [
            MobiusMap::reflection(pt(0.0, 0.0), pt(1.0, 0.0)),
            MobiusMap::inversion(e * self.t, self.s),
            MobiusMap::reflection(pt(0.0, 0.0), e),
            MobiusMap::inversion(pt(0.0, 0.0), self.r),
        ]
    }
}

/// Angle between two circles meeting transversally, measured between the
/// tangent lines on the side of the lens (π/2 for orthogonal circles).
fn circle_angle(r1: f64, r2: f64, d: f64) -> f64 {
    ((d * d - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)).clamp(-1.0, 1.0).acos()
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Mirror parameters for `q > 6`.
pub fn solve_params(q: u32) -> Result<GroupConfig, CarpetError> {
    if q <= 6 {
        return Err(CarpetError::InvalidQ { q });
    }
    let sn = (PI / q as f64).sin();
    let t = 1.0 / (1.0 - 4.0 * sn * sn).sqrt();
    let s = 2.0 * t * sn;
    let r = (-s + (s * s + 4.0).sqrt()) / 2.0;

    let tb = bisect(1.0, 4.0 * t, |x| 2.0 * x * sn - (x * x - 1.0).sqrt());
    let sb = (tb * tb - 1.0).sqrt();
    let rb = bisect(0.0, 1.0, |x| x * x + x * sb - 1.0);

    let half = 0.5;
    Ok(GroupConfig {
        q,
        t,
        s,
        r,
        orthogonality_residual: t * t - 1.0 - s * s,
        angle12_residual: t * sn / s - half,
        angle24_residual: circle_angle(r, s, t) - PI / 3.0,
        bisection_discrepancy: (t - tb).abs().max((s - sb).abs()).max((r - rb).abs()),
        alternative_root: (s + (s * s + 4.0).sqrt()) / 2.0,
    })
}

/// Residuals of the generator relations on sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    /// `max |g(g(z)) − z|` per generator.
    pub involution: [f64; 4],
    /// `max |(Inv_{ℓ₁}Inv_{ℓ₃})^q(z) − z|`.
    pub dihedral: f64,
    /// `max ||Inv_{ℓ₂}(z)| − 1|` for `z` on the unit circle.
    pub boundary_invariance: f64,
}

pub fn relation_residuals(cfg: &GroupConfig, samples: &[Point]) -> RelationReport {
    let g = cfg.generators();
    let dist = |m: &MobiusMap| {
        samples
            .iter()
            .filter_map(|&z| m.apply(z).map(|w| (w - z).norm()))
            .fold(0.0, f64::max)
    };
    let mut involution = [0.0; 4];
    for (k, gk) in g.iter().enumerate() {
        involution[k] = dist(&gk.compose(gk));
    }
    let rot = g[0].compose(&g[2]);
    let mut p = MobiusMap::identity();
    for _ in 0..cfg.q {
        p = rot.compose(&p);
    }
    let boundary_invariance = (0..20)
        .filter_map(|k| g[1].apply(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 20.0 + 0.1)))
        .map(|w| (w.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    RelationReport { involution, dihedral: dist(&p), boundary_invariance }
}

/// One circle of the orbit of the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitCircle {
    pub center: Point,
    pub radius: f64,
    /// BFS level at which the circle was first found.
    pub generation: usize,
    /// The unit circle itself, bounding the complementary disk `Ĉ ∖ 𝔻̄`.
    pub outer: bool,
}

impl OrbitCircle {
    pub fn curvature(&self) -> f64 {
        1.0 / self.radius
    }
}

/// Deduplicated circles `τ(∂𝔻)` with radius at least `min_radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleOrbit {
    pub config: GroupConfig,
    pub min_radius: f64,
    /// Sorted by generation, then decreasing radius, then center.
    pub circles: Vec<OrbitCircle>,
}

/// Absolute dedupe tolerance, relative to the unit disk.
pub const DEDUPE_TOL: f64 = 1e-9;

type Key = (i64, i64, i64);

fn key(c: Point, r: f64) -> Key {
    let q = |x: f64| (x / DEDUPE_TOL).floor() as i64;
    (q(c.re), q(c.im), q(r))
}

#[derive(Default)]
struct CircleIndex {
    map: HashMap<Key, Vec<usize>>,
}

impl CircleIndex {
    fn find(&self, circles: &[OrbitCircle], c: Point, r: f64) -> Option<usize> {
        let (a, b, d) = key(c, r);
        for da in -1..=1 {
            for db in -1..=1 {
                for dd in -1..=1 {
                    if let Some(list) = self.map.get(&(a + da, b + db, d + dd)) {
                        for &i in list {
                            let o = &circles[i];
                            if (o.center - c).norm() <= DEDUPE_TOL && (o.radius - r).abs() <= DEDUPE_TOL {
                                return Some(i);
                            }
                        }
                    }
                }
            }
        }
        None
    }

    fn insert(&mut self, c: Point, r: f64, idx: usize) {
        self.map.entry(key(c, r)).or_default().push(idx);
    }
}

impl CircleOrbit {
    pub fn len(&self) -> usize {
        self.circles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circles.is_empty()
    }

    /// Circles other than the unit circle.
    pub fn inner(&self) -> impl Iterator<Item = &OrbitCircle> {
        self.circles.iter().filter(|c| !c.outer)
    }

    /// Whether every circle of `self` also appears in `other`.
    pub fn is_subset_of(&self, other: &CircleOrbit) -> bool {
        let mut idx = CircleIndex::default();
        for (i, c) in other.circles.iter().enumerate() {
            idx.insert(c.center, c.radius, i);
        }
        self.circles.iter().all(|c| idx.find(&other.circles, c.center, c.radius).is_some())
    }

    /// `#{inner circles : curvature ≤ λ}`.
    pub fn count(&self, lambda: f64) -> usize {
        self.inner().filter(|c| c.curvature() <= lambda).count()
    }
}

/// Enumeration limits.
#[derive(Debug, Clone, Copy)]
pub struct OrbitOptions {
    pub cap: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions { cap: 10_000_000 }
    }
}

/// Breadth-first orbit of the unit circle under the four generators.
pub fn enumerate_circles(cfg: &GroupConfig, min_radius: f64, opts: &OrbitOptions) -> Result<CircleOrbit, CarpetError> {
    if !(min_radius > 0.0) {
        return Err(CarpetError::InvalidArgument(format!("min radius {min_radius}")));
    }
    let gens = cfg.generators();
    let mut circles = vec![OrbitCircle { center: pt(0.0, 0.0), radius: 1.0, generation: 0, outer: true }];
    let mut index = CircleIndex::default();
    index.insert(pt(0.0, 0.0), 1.0, 0);
    // Frontier entries: circle index and the generator that produced it.
    let mut frontier: Vec<(usize, Option<usize>)> = vec![(0, None)];
    let mut generation = 0;
    while !frontier.is_empty() {
        generation += 1;
        let images: Vec<Vec<(Point, f64, usize)>> = frontier
            .par_iter()
            .map(|&(i, last)| {
                let c = circles[i];
                let mut out = Vec::with_capacity(3);
                for (k, g) in gens.iter().enumerate() {
                    if Some(k) == last {
                        continue;
                    }
                    if let CircleImage::Circle { center, radius } = g.map_circle(c.center, c.radius) {
                        if radius >= min_radius {
                            out.push((center, radius, k));
                        }
                    }
                }
                out
            })
            .collect();
        let mut next = Vec::new();
        for (center, radius, k) in images.into_iter().flatten() {
            if index.find(&circles, center, radius).is_some() {
                continue;
            }
            if circles.len() >= opts.cap {
                return Err(CarpetError::BudgetExceeded { cap: opts.cap });
            }
            index.insert(center, radius, circles.len());
            next.push((circles.len(), Some(k)));
            circles.push(OrbitCircle { center, radius, generation, outer: false });
        }
        frontier = next;
    }
    circles.sort_by(|a, b| {
        a.generation
            .cmp(&b.generation)
            .then(b.radius.total_cmp(&a.radius))
            .then(a.center.re.total_cmp(&b.center.re))
            .then(a.center.im.total_cmp(&b.center.im))
    });
    Ok(CircleOrbit { config: *cfg, min_radius, circles })
}

/// Minimum relative gap between disjoint complementary disks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationStats {
    /// `min gap(C₁,C₂) / min(rad C₁, rad C₂)` over distinct pairs.
    pub epsilon: f64,
    /// Candidate pairs examined.
    pub pairs: usize,
    /// Pairs whose disks overlap beyond `1e−9·min(r₁, r₂)`.
    pub overlaps: usize,
    /// Inner circles leaving the closed unit disk beyond the same tolerance.
    pub outside: usize,
    /// Indices of a minimizing pair.
    pub witness: (usize, usize),
}

/// Relative gap of two disks; the unit circle bounds the outside of `𝔻`.
fn relative_gap(a: &OrbitCircle, b: &OrbitCircle) -> f64 {
    let gap = match (a.outer, b.outer) {
        (true, false) => 1.0 - b.center.norm() - b.radius,
        (false, true) => 1.0 - a.center.norm() - a.radius,
        _ => (a.center - b.center).norm() - a.radius - b.radius,
    };
    gap / a.radius.min(b.radius)
}

/// Separation constant of the stored circles, found with one grid per dyadic
/// radius class: a pair with relative gap below `reach` is always examined.
pub fn separation_stats(o: &CircleOrbit) -> Result<SeparationStats, CarpetError> {
    if o.circles.len() < 2 {
        return Err(CarpetError::InsufficientRange("need at least two circles".into()));
    }
    let mut reach = 1.0;
    loop {
        let s = separation_within(o, reach);
        if s.epsilon < reach {
            return Ok(s);
        }
        reach *= 4.0;
    }
}

fn separation_within(o: &CircleOrbit, reach: f64) -> SeparationStats {
    let cs = &o.circles;
    let level = |r: f64| (-r.log2()).floor() as i32;
    let mut grids: HashMap<i32, HashMap<(i64, i64), Vec<usize>>> = HashMap::default();
    for (i, c) in cs.iter().enumerate() {
        if c.outer {
            continue;
        }
        let l = level(c.radius);
        let h = (2f64).powi(-l);
        let g = grids.entry(l).or_default();
        let lo = ((c.center.re - c.radius) / h).floor() as i64;
        let hi = ((c.center.re + c.radius) / h).floor() as i64;
        let lo2 = ((c.center.im - c.radius) / h).floor() as i64;
        let hi2 = ((c.center.im + c.radius) / h).floor() as i64;
        for a in lo..=hi {
            for b in lo2..=hi2 {
                g.entry((a, b)).or_default().push(i);
            }
        }
    }
    let mut levels: Vec<i32> = grids.keys().copied().collect();
    levels.sort_unstable();

    let per: Vec<(f64, usize, usize, (usize, usize))> = (0..cs.len())
        .into_par_iter()
        .map(|i| {
            let c = &cs[i];
            let mut best = (f64::INFINITY, (i, i));
            let mut pairs = 0;
            let mut overlaps = 0;
            if c.outer {
                return (best.0, pairs, overlaps, best.1);
            }
            let rho = c.radius * (1.0 + reach);
            let mut seen: Vec<usize> = Vec::new();
            for &l in &levels {
                let h = (2f64).powi(-l);
                // Only partners at least as large as `c` (ties by index).
                if h * 2.0 <= c.radius {
                    continue;
                }
                let g = &grids[&l];
                let lo = ((c.center.re - rho) / h).floor() as i64;
                let hi = ((c.center.re + rho) / h).floor() as i64;
                let lo2 = ((c.center.im - rho) / h).floor() as i64;
                let hi2 = ((c.center.im + rho) / h).floor() as i64;
                for a in lo..=hi {
                    for b in lo2..=hi2 {
                        if let Some(list) = g.get(&(a, b)) {
                            for &j in list {
                                let d = &cs[j];
                                if j == i || d.radius < c.radius || (d.radius == c.radius && j < i) {
                                    continue;
                                }
                                seen.push(j);
                            }
                        }
                    }
                }
            }
            seen.sort_unstable();
            seen.dedup();
            for j in seen {
                pairs += 1;
                let e = relative_gap(c, &cs[j]);
                if e < -1e-9 {
                    overlaps += 1;
                }
                if e < best.0 {
                    best = (e, (i, j));
                }
            }
            (best.0, pairs, overlaps, best.1)
        })
        .collect();

    let outer = cs.iter().position(|c| c.outer);
    let mut s = SeparationStats { epsilon: f64::INFINITY, pairs: 0, overlaps: 0, outside: 0, witness: (0, 0) };
    for (e, p, ov, w) in per {
        s.pairs += p;
        s.overlaps += ov;
        if e < s.epsilon {
            s.epsilon = e;
            s.witness = w;
        }
    }
    if let Some(u) = outer {
        for (i, c) in cs.iter().enumerate() {
            if c.outer {
                continue;
            }
            s.pairs += 1;
            let e = relative_gap(&cs[u], c);
            if e < -1e-9 {
                s.outside += 1;
            }
            if e < s.epsilon {
                s.epsilon = e;
                s.witness = (u, i);
            }
        }
    }
    s
}

/// Power-law fit of `N(λ) = #{curvature ≤ λ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingFit {
    pub slope: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub fit: LinearFit,
}

/// Least-squares slope of `log N` against `log λ` on `[λ_max/10, λ_max]`.
pub fn fit_counting_exponent(curvatures: &[f64], lambda_max: f64) -> Result<CountingFit, CarpetError> {
    let mut k: Vec<f64> = curvatures.to_vec();
    k.sort_by(f64::total_cmp);
    let lo = lambda_max / 10.0;
    let grid = geometric_grid(lo, lambda_max, 24);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &l in &grid {
        let n = k.partition_point(|&x| x <= l);
        if n > 0 {
            xs.push(l.ln());
            ys.push((n as f64).ln());
        }
    }
    let fit = linear_fit(&xs, &ys).ok_or_else(|| CarpetError::InsufficientRange("no circles in the fit window".into()))?;
    Ok(CountingFit { slope: fit.slope, lambda_lo: lo, lambda_hi: lambda_max, fit })
}

/// Exponent of the circle-counting function over the top curvature decade.
pub fn fit_carpet_dimension(o: &CircleOrbit) -> Result<CountingFit, CarpetError> {
    let k: Vec<f64> = o.inner().map(|c| c.curvature()).collect();
    if k.len() < 1000 {
        return Err(CarpetError::InsufficientRange(format!("{} circles, need 1000", k.len())));
    }
    fit_counting_exponent(&k, 1.0 / o.min_radius)
}

/// Each stored circle as a closed ring of `refine` equal arcs with stiffness
/// `rad/ℓ` and mass `rad·ℓ` per arc (ℓ the arc length).
pub fn assemble_carpet_rings(o: &CircleOrbit, refine: usize) -> Result<WeightedNetwork, CarpetError> {
    if refine < 8 {
        return Err(CarpetError::InvalidArgument(format!("refine {refine} < 8")));
    }
    let n = o.circles.len() * refine;
    let mut points = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n);
    let mut masses = vec![0.0; n];
    for (ci, c) in o.circles.iter().enumerate() {
        let base = ci * refine;
        let ell = 2.0 * PI * c.radius / refine as f64;
        for k in 0..refine {
            points.push(c.center + Complex64::from_polar(c.radius, 2.0 * PI * k as f64 / refine as f64));
            let (a, b) = (base + k, base + (k + 1) % refine);
            edges.push((a, b, c.radius / ell));
            masses[a] += 0.5 * c.radius * ell;
            masses[b] += 0.5 * c.radius * ell;
        }
    }
    Ok(WeightedNetwork { points, edges, masses })
}

/// Compactly supported test functions inside the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bump {
    Zero,
    /// `φ(|z − center|/radius)` with `φ(s) = exp(1 − 1/(1 − s²))` on `s < 1`.
    Radial { center: Point, radius: f64 },
    /// Radial bump times `cos(⟨wave, z⟩ + phase)`.
    Modulated { center: Point, radius: f64, wave: Point, phase: f64 },
}

fn phi(s2: f64) -> (f64, f64) {
    // Value and derivative with respect to s², for s² < 1.
    if s2 >= 1.0 {
        return (0.0, 0.0);
    }
    let u = 1.0 - s2;
    let v = (1.0 - 1.0 / u).exp();
    (v, -v / (u * u))
}

impl Bump {
    /// Five bumps with distinct centers, widths and modulations.
    pub fn standard_family() -> Vec<Bump> {
        vec![
            Bump::Radial { center: pt(0.15, -0.1), radius: 0.6 },
            Bump::Radial { center: pt(0.3, 0.2), radius: 0.35 },
            Bump::Modulated { center: pt(-0.2, 0.1), radius: 0.5, wave: pt(4.0, 1.0), phase: 0.3 },
            Bump::Modulated { center: pt(0.1, -0.35), radius: 0.4, wave: pt(-2.0, 5.0), phase: 1.1 },
            Bump::Radial { center: pt(-0.45, -0.3), radius: 0.3 },
        ]
    }

    /// Support disk, if any.
    pub fn support(&self) -> Option<(Point, f64)> {
        match *self {
            Bump::Zero => None,
            Bump::Radial { center, radius } | Bump::Modulated { center, radius, .. } => Some((center, radius)),
        }
    }

    pub fn value(&self, z: Point) -> f64 {
        self.value_and_gradient(z).0
    }

    pub fn value_and_gradient(&self, z: Point) -> (f64, Point) {
        match *self {
            Bump::Zero => (0.0, pt(0.0, 0.0)),
            Bump::Radial { center, radius } => {
                let d = (z - center) / radius;
                let (v, dv) = phi(d.norm_sqr());
                (v, d * (2.0 * dv / radius))
            }
            Bump::Modulated { center, radius, wave, phase } => {
                let d = (z - center) / radius;
                let (v, dv) = phi(d.norm_sqr());
                let arg = wave.re * z.re + wave.im * z.im + phase;
                let (sn, cs) = arg.sin_cos();
                (v * cs, d * (2.0 * dv / radius) * cs - wave * (v * sn))
            }
        }
    }

    fn check_support(&self) -> Result<(), CarpetError> {
        if let Some((c, r)) = self.support() {
            if !(r > 0.0) || c.norm() + r >= 1.0 {
                return Err(CarpetError::SupportViolation(format!("support disk ({}, {}) radius {r} not inside 𝔻", c.re, c.im)));
            }
        }
        Ok(())
    }
}

/// Coordinate functions `h₁ = x`, `h₂ = y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coordinate {
    X,
    Y,
}

/// `∮_C v·n_i dℋ¹` over the part of circle `C` meeting the support of `v`,
/// by the trapezoid rule with `nodes` points on that arc.
pub fn circle_flux(center: Point, radius: f64, v: &Bump, coord: Coordinate, nodes: usize) -> f64 {
    let Some((b, rb)) = v.support() else { return 0.0 };
    let d = (center - b).norm();
    if d >= radius + rb || d + rb <= radius {
        return 0.0;
    }
    // Arc of the circle inside the support disk, as an angle interval.
    let (start, sweep) = if d + radius <= rb {
        (0.0, 2.0 * PI)
    } else {
        let cosw = ((radius * radius + d * d - rb * rb) / (2.0 * radius * d)).clamp(-1.0, 1.0);
        let w = cosw.acos();
        let dir = (b - center).arg();
        (dir - w, 2.0 * w)
    };
    let full = sweep >= 2.0 * PI;
    let n = nodes.max(8);
    let h = sweep / n as f64;
    let mut sum = 0.0;
    for k in 0..n {
        // Full circle: periodic trapezoid; arc: endpoints carry zero weight
        // because the bump vanishes there, so interior nodes suffice.
        let th = if full { start + h * k as f64 } else { start + h * (k as f64 + 0.5) };
        let e = Complex64::from_polar(1.0, th);
        let nx = match coord {
            Coordinate::X => e.re,
            Coordinate::Y => e.im,
        };
        sum += v.value(center + e * radius) * nx;
    }
    sum * h * radius
}

/// `E^g(h_i, v)` over the stored circles: on each circle the tangential
/// form reduces to `∮ v·n_i dℋ¹`.
pub fn harmonicity_residual(o: &CircleOrbit, v: &Bump, coord: Coordinate, nodes: usize) -> Result<f64, CarpetError> {
    v.check_support()?;
    if matches!(v, Bump::Zero) {
        return Ok(0.0);
    }
    let parts: Vec<f64> = o.circles.par_iter().map(|c| circle_flux(c.center, c.radius, v, coord, nodes)).collect();
    Ok(parts.iter().sum())
}

/// SVG rendering of the orbit circles.
pub fn render_orbit_svg(o: &CircleOrbit, size: f64) -> String {
    let mut s = String::new();
    let half = size / 2.0;
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"{:.9} {:.9} {:.9} {:.9}\">\n",
        -1.05 * half,
        -1.05 * half,
        2.1 * half,
        2.1 * half
    ));
    for c in &o.circles {
        s.push_str(&format!(
            "<circle cx=\"{:.9}\" cy=\"{:.9}\" r=\"{:.9}\" fill=\"none\" stroke=\"black\" stroke-width=\"{:.9}\"/>\n",
            c.center.re * half,
            -c.center.im * half,
            c.radius * half,
            (0.002 * half).min(c.radius * half * 0.2)
        ));
    }
    s.push_str("</svg>\n");
    s
}
