//! Generalized symmetric eigenproblems `Ku = λMu` with Dirichlet vertex
//! sets, eigenvalue counting and the spectral experiments built on them.

pub mod sparse;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::linear_fit;
use crate::forms::{self, FormsError, MassLumping, WeightedNetwork};
use crate::gasket::{self, GasketError, Word};
use crate::geom::{pt, DiskTriple, GeomError};
use sparse::{Ldl, SymSparse};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Gasket(#[from] GasketError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("eigenpair {index} not certified: residual {residual:e} exceeds {bound:e}")]
    NotConverged { index: usize, residual: f64, bound: f64 },
    #[error("free graph has {components} connected components")]
    Disconnected { components: usize },
    #[error("λ = {lambda} lies above the trust ceiling {ceiling}")]
    AboveTrustCeiling { lambda: f64, ceiling: f64 },
    #[error("insufficient spectrum: {0}")]
    InsufficientSpectrum(String),
    #[error("interlacing violated at index {index}: {detail}")]
    Violation { index: usize, detail: String },
    #[error("enumeration exceeded the budget of {cap} members")]
    BudgetExceeded { cap: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Stiffness, lumped mass and a Dirichlet vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedEVP {
    pub stiffness: SymSparse,
    pub mass: Vec<f64>,
    pub boundary: Vec<usize>,
    pub scheme: String,
    pub depth: usize,
}

impl GeneralizedEVP {
    pub fn from_network(net: &WeightedNetwork, boundary: &[usize], scheme: &str, depth: usize) -> Result<Self, SpectraError> {
        let n = net.vertex_count();
        if net.masses.iter().any(|m| !(*m > 0.0)) {
            return Err(SpectraError::InvalidArgument("masses must be positive".into()));
        }
        let mut trip = Vec::with_capacity(3 * net.edges.len());
        for &(i, j, c) in &net.edges {
            trip.push((i, i, c));
            trip.push((j, j, c));
            trip.push((i, j, -c));
        }
        let evp = GeneralizedEVP {
            stiffness: SymSparse::from_triplets(n, trip),
            mass: net.masses.clone(),
            boundary: Vec::new(),
            scheme: scheme.to_string(),
            depth,
        };
        evp.with_boundary(boundary)
    }

    pub fn vertex_count(&self) -> usize {
        self.mass.len()
    }

    /// The same pencil with another Dirichlet set.
    pub fn with_boundary(&self, boundary: &[usize]) -> Result<Self, SpectraError> {
        let mut b = boundary.to_vec();
        b.sort_unstable();
        b.dedup();
        if b.last().is_some_and(|&v| v >= self.vertex_count()) {
            return Err(SpectraError::InvalidArgument("boundary index out of range".into()));
        }
        Ok(GeneralizedEVP { boundary: b, ..self.clone() })
    }

    /// Indices of the vertices not in the Dirichlet set.
    pub fn free_indices(&self) -> Vec<usize> {
        let mut fixed = vec![false; self.vertex_count()];
        for &b in &self.boundary {
            fixed[b] = true;
        }
        (0..self.vertex_count()).filter(|&i| !fixed[i]).collect()
    }

    /// Stiffness and mass restricted to the free vertices.
    fn reduced(&self) -> (SymSparse, Vec<f64>) {
        let free = self.free_indices();
        let mut map = vec![usize::MAX; self.vertex_count()];
        for (k, &i) in free.iter().enumerate() {
            map[i] = k;
        }
        let mut trip = Vec::new();
        for &i in &free {
            trip.push((map[i], map[i], self.stiffness.diag[i]));
            for &(j, v) in &self.stiffness.rows[i] {
                if map[j] != usize::MAX && i < j {
                    trip.push((map[i], map[j], v));
                }
            }
        }
        let m = free.iter().map(|&i| self.mass[i]).collect();
        (SymSparse::from_triplets(free.len(), trip), m)
    }
}

/// How many eigenvalues to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HowMany {
    All,
    Lowest(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolvePath {
    Dense,
    Iterative,
}

/// Solver configuration.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Largest free dimension handled by the dense path.
    pub dense_threshold: usize,
    /// Compute residual certificates for every reported eigenvalue.
    pub certify: bool,
    /// Accept a free graph with several components.
    pub allow_disconnected: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { dense_threshold: 3000, certify: true, allow_disconnected: false }
    }
}

/// Residual certificate of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub path: SolvePath,
    /// Largest eigenvalue of the pencil.
    pub lambda_max: f64,
    /// `max ‖Ãy − λy‖/‖y‖` over reported pairs, `Ã = M^{-1/2}KM^{-1/2}`.
    pub max_residual: f64,
}

/// Eigenvalues in nondecreasing order with their provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub scheme: String,
    pub depth: usize,
    pub boundary: Vec<usize>,
    /// Number of free vertices, i.e. the total number of eigenvalues.
    pub dimension: usize,
    pub eigenvalues: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

impl Spectrum {
    /// A spectrum given by its values, e.g. for testing.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Spectrum {
            scheme: "synthetic".into(),
            depth: 0,
            boundary: Vec::new(),
            dimension: eigenvalues.len(),
            eigenvalues,
            certificate: None,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.eigenvalues.len() == self.dimension
    }
}

/// Solves the pencil on the free vertices.
pub fn solve(evp: &GeneralizedEVP, how_many: HowMany, opts: &SolveOptions) -> Result<Spectrum, SpectraError> {
    let (k, m) = evp.reduced();
    let n = k.n();
    let want = match how_many {
        HowMany::All => n,
        HowMany::Lowest(c) => c.min(n),
    };
    if n > 0 && !opts.allow_disconnected {
        let c = k.components();
        if c > 1 {
            return Err(SpectraError::Disconnected { components: c });
        }
    }
    let (eigenvalues, certificate) = if n == 0 || want == 0 {
        (Vec::new(), None)
    } else if n <= opts.dense_threshold {
        let (v, c) = dense_solve(&k, &m, want, opts.certify)?;
        (v, Some(c))
    } else {
        let (v, c) = iterative_solve(&k, &m, want, opts.certify)?;
        (v, Some(c))
    };
    Ok(Spectrum {
        scheme: evp.scheme.clone(),
        depth: evp.depth,
        boundary: evp.boundary.clone(),
        dimension: n,
        eigenvalues,
        certificate,
    })
}

const RESIDUAL_BOUND: f64 = 1e-8;

fn scaled_residual(k: &SymSparse, m: &[f64], y: &[f64], lambda: f64) -> f64 {
    // y lives in the scaled space: v = M^{-1/2} y, r = M^{-1/2}(Kv) − λy.
    let n = k.n();
    let v: Vec<f64> = (0..n).map(|i| y[i] / m[i].sqrt()).collect();
    let mut kv = vec![0.0; n];
    k.mul(&v, &mut kv);
    let mut r2 = 0.0;
    let mut y2 = 0.0;
    for i in 0..n {
        let r = kv[i] / m[i].sqrt() - lambda * y[i];
        r2 += r * r;
        y2 += y[i] * y[i];
    }
    (r2 / y2).sqrt()
}

fn dense_solve(k: &SymSparse, m: &[f64], want: usize, certify: bool) -> Result<(Vec<f64>, Certificate), SpectraError> {
    let n = k.n();
    let s: Vec<f64> = m.iter().map(|x| 1.0 / x.sqrt()).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = k.diag[i] * s[i] * s[i];
        for &(j, v) in &k.rows[i] {
            a[(i, j)] = v * s[i] * s[j];
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    if certify {
        let eig = SymmetricEigen::new(a);
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let lambda_max = eig.eigenvalues[order[n - 1]].max(0.0);
        let mut max_res: f64 = 0.0;
        let bound = RESIDUAL_BOUND * lambda_max.max(f64::MIN_POSITIVE);
        for (idx, &c) in order.iter().take(want).enumerate() {
            let y: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            let r = scaled_residual(k, m, &y, eig.eigenvalues[c]);
            if r > bound {
                return Err(SpectraError::NotConverged { index: idx, residual: r, bound });
            }
            max_res = max_res.max(r);
        }
        let vals = order.iter().take(want).map(|&c| eig.eigenvalues[c]).collect();
        Ok((vals, Certificate { path: SolvePath::Dense, lambda_max, max_residual: max_res }))
    } else {
        let mut vals: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        let lambda_max = vals[n - 1].max(0.0);
        vals.truncate(want);
        Ok((vals, Certificate { path: SolvePath::Dense, lambda_max, max_residual: f64::NAN }))
    }
}

/// Deterministic pseudo-random numbers for start vectors.
fn splitmix(state: &mut u64) -> f64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}

/// A bracketed group of eigenvalues with consecutive indices.
#[derive(Debug, Clone, Copy)]
struct Cluster {
    lo: f64,
    hi: f64,
    first: usize,
    count: usize,
}

/// Isolates eigenvalues with index `< want` by inertia bisection.
fn slice(ldl: &mut Ldl, upper: f64, want: usize, n: usize) -> Vec<Cluster> {
    let abs_floor = 1e-15 * upper;
    let mut lo0 = -1e-12 * upper;
    let mut c_lo0 = ldl.factor(lo0);
    while c_lo0 > 0 {
        lo0 *= 2.0;
        c_lo0 = ldl.factor(lo0);
    }
    let mut out = Vec::new();
    let mut stack = vec![(lo0, c_lo0, upper, n)];
    while let Some((lo, clo, hi, chi)) = stack.pop() {
        if chi <= clo || clo >= want {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let width = hi - lo;
        if width <= (4.0 * f64::EPSILON * lo.abs().max(hi.abs())).max(abs_floor) || mid <= lo || mid >= hi {
            out.push(Cluster { lo, hi, first: clo, count: chi - clo });
            continue;
        }
        let cm = ldl.factor(mid).clamp(clo, chi);
        // Upper half first so the lower half is processed next (LIFO).
        stack.push((mid, cm, hi, chi));
        stack.push((lo, clo, mid, cm));
    }
    out.sort_by_key(|c| c.first);
    out
}

fn m_orthonormalize(x: &mut [Vec<f64>], m: &[f64]) {
    for a in 0..x.len() {
        for b in 0..a {
            let p: f64 = (0..m.len()).map(|i| x[a][i] * m[i] * x[b][i]).sum();
            let (head, tail) = x.split_at_mut(a);
            for (ya, yb) in tail[0].iter_mut().zip(&head[b]) {
                *ya -= p * yb;
            }
        }
        let nrm: f64 = (0..m.len()).map(|i| x[a][i] * m[i] * x[a][i]).sum::<f64>().sqrt();
        for v in x[a].iter_mut() {
            *v /= nrm;
        }
    }
}

/// Block inverse iteration at `sigma` with Rayleigh–Ritz; returns the scaled
/// residual of each Ritz pair.
fn certify_cluster(ldl: &mut Ldl, k: &SymSparse, m: &[f64], sigma: f64, p: usize, seed: u64) -> Vec<(f64, f64)> {
    let n = k.n();
    ldl.factor(sigma);
    let mut state = seed;
    let mut x: Vec<Vec<f64>> = (0..p).map(|_| (0..n).map(|_| splitmix(&mut state)).collect()).collect();
    let mut best: Vec<(f64, f64)> = Vec::new();
    for it in 0..6 {
        for col in x.iter_mut() {
            let rhs: Vec<f64> = col.iter().zip(m).map(|(v, mi)| v * mi).collect();
            ldl.solve(&rhs, col);
        }
        m_orthonormalize(&mut x, m);
        if it < 1 {
            continue;
        }
        let kx: Vec<Vec<f64>> = x
            .iter()
            .map(|c| {
                let mut y = vec![0.0; n];
                k.mul(c, &mut y);
                y
            })
            .collect();
        let h = DMatrix::from_fn(p, p, |a, b| (0..n).map(|i| x[a][i] * kx[b][i]).sum::<f64>());
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut pairs = Vec::with_capacity(p);
        for c in 0..p {
            let theta = eig.eigenvalues[c];
            let mut y = vec![0.0; n];
            for (a, xa) in x.iter().enumerate() {
                let w = eig.eigenvectors[(a, c)];
                for i in 0..n {
                    y[i] += w * xa[i] * m[i].sqrt();
                }
            }
            pairs.push((theta, scaled_residual(k, m, &y, theta)));
        }
        best = pairs;
        if best.iter().all(|p| p.1 <= 1e-12 * sigma.abs().max(1.0)) {
            break;
        }
    }
    best
}

fn iterative_solve(k: &SymSparse, m: &[f64], want: usize, certify: bool) -> Result<(Vec<f64>, Certificate), SpectraError> {
    let n = k.n();
    let mut ldl = Ldl::new(k, m);
    let upper = k.gershgorin_bound(m) * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    let top = slice_top(&mut ldl, upper, n);
    let clusters = slice(&mut ldl, upper, want, n);
    let mut vals = Vec::with_capacity(want);
    let mut max_res: f64 = 0.0;
    let bound = RESIDUAL_BOUND * top;
    for (ci, c) in clusters.iter().enumerate() {
        let mid = 0.5 * (c.lo + c.hi);
        if certify {
            let pairs = certify_cluster(&mut ldl, k, m, mid, c.count, 0x5EED ^ (ci as u64).wrapping_mul(0x1000_0001));
            for (j, &(theta, res)) in pairs.iter().enumerate() {
                let idx = c.first + j;
                let gap_ok = (theta - mid).abs() <= res + (c.hi - c.lo) + 1e-10 * mid.abs().max(top * 1e-6);
                if res > bound || !gap_ok {
                    return Err(SpectraError::NotConverged { index: idx, residual: res, bound });
                }
                if idx < want {
                    max_res = max_res.max(res);
                }
            }
        }
        for j in 0..c.count {
            if c.first + j < want {
                vals.push(mid);
            }
        }
    }
    Ok((vals, Certificate { path: SolvePath::Iterative, lambda_max: top, max_residual: if certify { max_res } else { f64::NAN } }))
}

/// Largest eigenvalue, bracketed to relative 1e-10.
fn slice_top(ldl: &mut Ldl, upper: f64, n: usize) -> f64 {
    let (mut lo, mut hi) = (0.0, upper);
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if ldl.factor(mid) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Number of eigenvalues `≤ λ`, from the inertia of `K − λM` on the free vertices.
pub fn eigen_count(evp: &GeneralizedEVP, lambda: f64) -> usize {
    let (k, m) = evp.reduced();
    if k.n() == 0 {
        return 0;
    }
    let mut ldl = Ldl::new(&k, &m);
    ldl.factor(lambda + 4.0 * f64::EPSILON * lambda.abs())
}

/// `#{n : λ_n ≤ λ}` in a computed spectrum.
pub fn counting(s: &Spectrum, lambda: f64) -> Result<usize, SpectraError> {
    if !s.is_complete() {
        if let Some(&last) = s.eigenvalues.last() {
            if lambda > last {
                return Err(SpectraError::AboveTrustCeiling { lambda, ceiling: last });
            }
        }
    }
    Ok(s.eigenvalues.partition_point(|&x| x <= lambda))
}

/// Log-log fit of the counting function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylFit {
    pub slope: f64,
    pub prefactor: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    /// RMS residual of the fit in log space.
    pub residual: f64,
    pub points: usize,
}

/// Relative tolerance under which eigenvalues count as tied in [`weyl_fit`].
pub const TIE_TOL: f64 = 1e-9;

/// Eigenvalues to request beyond the window end so that ties at the window
/// end are fully known.
pub const WEYL_EXTRA: usize = 16;

/// Fits `log N(λ)` against `log λ` over the eigenvalues with index between
/// 10% and 50% of the discrete dimension.
pub fn weyl_fit(s: &Spectrum) -> Result<WeylFit, SpectraError> {
    let n = s.dimension;
    let lo = n / 10;
    let hi = n / 2;
    if s.eigenvalues.len() < 200 {
        return Err(SpectraError::InsufficientSpectrum(format!("{} eigenvalues, need 200", s.eigenvalues.len())));
    }
    if s.eigenvalues.len() <= hi {
        return Err(SpectraError::InsufficientSpectrum(format!(
            "window reaches index {hi} but only {} eigenvalues are known",
            s.eigenvalues.len()
        )));
    }
    let top = s.eigenvalues[hi] * (1.0 + TIE_TOL);
    if !s.is_complete() && s.eigenvalues.last().is_some_and(|&l| l <= top) {
        return Err(SpectraError::InsufficientSpectrum(format!(
            "eigenvalues tied with index {hi} may lie past the {} known",
            s.eigenvalues.len()
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in lo..=hi {
        let l = s.eigenvalues[i];
        if l > 0.0 {
            xs.push(l.ln());
            ys.push((s.eigenvalues.partition_point(|&x| x <= l * (1.0 + TIE_TOL)) as f64).ln());
        }
    }
    let f = linear_fit(&xs, &ys).ok_or_else(|| SpectraError::InsufficientSpectrum("degenerate window".into()))?;
    Ok(WeylFit {
        slope: f.slope,
        prefactor: f.intercept.exp(),
        window_lo: s.eigenvalues[lo],
        window_hi: s.eigenvalues[hi],
        residual: f.rms,
        points: xs.len(),
    })
}

/// Outcome of an interlacing comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingReport {
    pub added: usize,
    pub checked: usize,
    /// Largest violation relative to the compared eigenvalue (≤ 0 when it holds).
    pub worst_relative: f64,
}

const INTERLACING_TOL: f64 = 1e-9;

/// Checks `λ_n ≤ λ^V_n ≤ λ_{n+#V}` where `λ^V` adds `v` to the Dirichlet set.
pub fn interlacing_check(evp: &GeneralizedEVP, v: &[usize], opts: &SolveOptions) -> Result<InterlacingReport, SpectraError> {
    let mut enlarged = evp.boundary.clone();
    enlarged.extend_from_slice(v);
    let bigger = evp.with_boundary(&enlarged)?;
    let added = bigger.boundary.len() - evp.boundary.len();
    let base = solve(evp, HowMany::All, opts)?;
    let restricted = solve(&bigger, HowMany::All, opts)?;
    let scale = base.certificate.map(|c| c.lambda_max).unwrap_or(1.0);
    let (a, b) = (&base.eigenvalues, &restricted.eigenvalues);
    let mut worst = f64::NEG_INFINITY;
    let mut checked = 0;
    for i in 0..b.len() {
        let tol = |x: f64, y: f64| INTERLACING_TOL * x.abs().max(y.abs()) + 1e-13 * scale;
        let lower = a[i] - b[i];
        worst = worst.max(lower / b[i].abs().max(1e-300));
        if lower > tol(a[i], b[i]) {
            return Err(SpectraError::Violation { index: i, detail: format!("λ_n = {} > λ^V_n = {}", a[i], b[i]) });
        }
        if i + added < a.len() {
            let upper = b[i] - a[i + added];
            worst = worst.max(upper / b[i].abs().max(1e-300));
            if upper > tol(b[i], a[i + added]) {
                return Err(SpectraError::Violation {
                    index: i,
                    detail: format!("λ^V_n = {} > λ_(n+#V) = {}", b[i], a[i + added]),
                });
            }
        }
        checked += 1;
    }
    Ok(InterlacingReport { added, checked, worst_relative: worst })
}

/// A discretization scheme of the gasket form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    Trace { lumping: MassLumping },
    ArcFem { refine: usize },
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Trace { .. } => "trace",
            Scheme::ArcFem { .. } => "arcfem",
        }
    }

    pub fn network(&self, t: &DiskTriple, m: usize) -> Result<WeightedNetwork, SpectraError> {
        Ok(match *self {
            Scheme::Trace { lumping } => forms::trace_network(t, m, lumping)?,
            Scheme::ArcFem { refine } => forms::assemble_arc_fem(t, m, refine)?.network(),
        })
    }

    /// Assembled pencil with Dirichlet set `V_0` (vertices 0, 1, 2) or none.
    pub fn evp(&self, t: &DiskTriple, m: usize, dirichlet_v0: bool) -> Result<GeneralizedEVP, SpectraError> {
        let net = self.network(t, m)?;
        let b: &[usize] = if dirichlet_v0 { &[0, 1, 2] } else { &[] };
        GeneralizedEVP::from_network(&net, b, self.name(), m)
    }
}

/// Ratios of eigenvalues after dilating the triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub scheme: String,
    pub factor: f64,
    pub expected_ratio: f64,
    pub compared: usize,
    pub max_relative_deviation: f64,
}

/// Compares the lowest `count` Dirichlet eigenvalues of `t` and of `t`
/// dilated by `s` about the origin.
pub fn scaling_check(t: &DiskTriple, s: f64, scheme: Scheme, m: usize, count: usize) -> Result<ScalingReport, SpectraError> {
    if !(s > 0.0) {
        return Err(SpectraError::InvalidArgument(format!("dilation factor {s}")));
    }
    let dilated = t.similarity(s, pt(0.0, 0.0))?;
    let opts = SolveOptions::default();
    let a = solve(&scheme.evp(t, m, true)?, HowMany::Lowest(count), &opts)?;
    let b = solve(&scheme.evp(&dilated, m, true)?, HowMany::Lowest(count), &opts)?;
    let expected = s.powi(-2);
    let dev = a
        .eigenvalues
        .iter()
        .zip(&b.eigenvalues)
        .map(|(x, y)| ((y / x) / expected - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ScalingReport {
        scheme: scheme.name().into(),
        factor: s,
        expected_ratio: expected,
        compared: a.eigenvalues.len().min(b.eigenvalues.len()),
        max_relative_deviation: dev,
    })
}

/// `n_λ = min{n ≥ 1 : c_g² n² ≥ 40λ}` with `c_g = min{β+γ, γ+α, α+β}`.
pub fn n_lambda(t: &DiskTriple, lambda: f64) -> usize {
    let c = t.quad().min_pair_sum();
    let mut n = ((40.0 * lambda).sqrt() / c).ceil().max(1.0) as usize;
    while n > 1 && c * c * ((n - 1) * (n - 1)) as f64 >= 40.0 * lambda {
        n -= 1;
    }
    while c * c * ((n * n) as f64) < 40.0 * lambda {
        n += 1;
    }
    n
}

/// `I_λ = {j^n k : n + 1 ≤ n_λ, j ≠ k} ∪ {j^{n_λ}}`.
pub fn index_set(n: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for j in 1..=3u8 {
        for len in 1..n {
            for k in 1..=3u8 {
                if k != j {
                    let mut letters = vec![j; len];
                    letters.push(k);
                    out.push(Word::new(&letters).expect("letters in range"));
                }
            }
        }
        out.push(Word::power(j, n).expect("letters in range"));
    }
    out
}

/// `V_λ = ∪_{τ ∈ I_λ} V_0(𝒟_τ)` as vertex indices.
pub fn v_lambda(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = index_set(n).iter().flat_map(gasket::cell_vertex_ids).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// One member of the census.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusMember {
    pub word: Word,
    pub depth: usize,
    pub count: usize,
}

/// Both sides of the subdivision counting inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub lambda: f64,
    pub n_lambda: usize,
    /// `min(n_λ, truncation)`, the length bound actually used.
    pub n_used: usize,
    pub parent_depth: usize,
    pub members: Vec<CensusMember>,
    /// `Σ_τ N_{𝒟_τ,0}(λ)`.
    pub lower_sum: usize,
    /// `N_{𝒟,0}(λ)`.
    pub parent_count: usize,
    /// `N_{𝒟,V_λ}(λ)`.
    pub parent_count_v_lambda: usize,
    /// `#V_λ` for the length bound used.
    pub v_lambda_size: usize,
    /// `N_{𝒟,V_λ}(λ) + #V_λ − 3`, the computable upper side.
    pub upper_report: usize,
    pub lower_holds: bool,
}

/// Slack allowed in the census lower bound.
pub const CENSUS_SLACK: usize = 2;

/// Evaluates the subdivision inequality with the trace scheme; children
/// `𝒟_τ` are discretized at depth `parent_depth − |τ|` so that their vertex
/// sets are exactly the restriction of the parent's.
pub fn subdivision_census(t: &DiskTriple, lambda: f64, truncation: usize, depth_margin: usize) -> Result<CensusReport, SpectraError> {
    if truncation == 0 {
        return Err(SpectraError::InvalidArgument("truncation must be positive".into()));
    }
    let nl = n_lambda(t, lambda);
    let n_used = nl.min(truncation);
    if n_used > 12 {
        return Err(SpectraError::BudgetExceeded { cap: 12 });
    }
    let parent_depth = n_used + depth_margin.max(1);
    let scheme = Scheme::Trace { lumping: MassLumping::CellThirds };
    let parent = scheme.evp(t, parent_depth, true)?;
    let parent_count = eigen_count(&parent, lambda);
    let vl = v_lambda(n_used);
    let parent_count_v_lambda = eigen_count(&parent.with_boundary(&vl)?, lambda);
    let mut members = Vec::new();
    for w in index_set(n_used) {
        let depth = parent_depth - w.len();
        let child = gasket::triple_at(t, &w)?;
        let count = if depth == 0 { 0 } else { eigen_count(&scheme.evp(&child, depth, true)?, lambda) };
        members.push(CensusMember { word: w, depth, count });
    }
    let lower_sum = members.iter().map(|m| m.count).sum();
    Ok(CensusReport {
        lambda,
        n_lambda: nl,
        n_used,
        parent_depth,
        members,
        lower_sum,
        parent_count,
        parent_count_v_lambda,
        v_lambda_size: vl.len(),
        upper_report: parent_count_v_lambda + vl.len() - 3,
        lower_holds: lower_sum <= parent_count + CENSUS_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{pt, triple_from_curvatures};

    fn net(points: usize, edges: Vec<(usize, usize, f64)>, masses: Vec<f64>) -> WeightedNetwork {
        WeightedNetwork { points: vec![pt(0.0, 0.0); points], edges, masses }
    }

    #[test]
    fn single_edge() {
        let (c, m1, m2) = (2.0, 0.5, 3.0);
        let evp = GeneralizedEVP::from_network(&net(2, vec![(0, 1, c)], vec![m1, m2]), &[], "test", 0).unwrap();
        let s = solve(&evp, HowMany::All, &SolveOptions::default()).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-14);
        assert!((s.eigenvalues[1] - c * (1.0 / m1 + 1.0 / m2)).abs() < 1e-13);
    }

    #[test]
    fn path_dirichlet_ends() {
        let evp = GeneralizedEVP::from_network(&net(3, vec![(0, 1, 1.0), (1, 2, 1.0)], vec![1.0; 3]), &[0, 2], "test", 0).unwrap();
        let s = solve(&evp, HowMany::All, &SolveOptions::default()).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert!((s.eigenvalues[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn counting_examples() {
        let s = Spectrum::from_eigenvalues(vec![3.0, 1.0, 2.0]);
        assert_eq!(counting(&s, 0.5).unwrap(), 0);
        assert_eq!(counting(&s, 2.0).unwrap(), 2);
        assert_eq!(counting(&s, 2.5).unwrap(), 2);
        let mut partial = s.clone();
        partial.dimension = 10;
        assert!(matches!(counting(&partial, 3.5), Err(SpectraError::AboveTrustCeiling { .. })));
    }

    #[test]
    fn weyl_synthetic() {
        let d = 1.3057;
        let s = Spectrum::from_eigenvalues((1..=2000).map(|n| (n as f64).powf(2.0 / d)).collect());
        let f = weyl_fit(&s).unwrap();
        assert!((f.slope - d / 2.0).abs() < 1e-3);
        assert!(weyl_fit(&Spectrum::from_eigenvalues(vec![1.0; 50])).is_err());
    }

    #[test]
    fn iterative_matches_dense() {
        let t = triple_from_curvatures(1.0, 2.0, 3.0).unwrap();
        let evp = Scheme::Trace { lumping: MassLumping::CellThirds }.evp(&t, 4, true).unwrap();
        let dense = solve(&evp, HowMany::All, &SolveOptions::default()).unwrap();
        let it = solve(&evp, HowMany::All, &SolveOptions { dense_threshold: 0, ..Default::default() }).unwrap();
        assert_eq!(it.certificate.unwrap().path, SolvePath::Iterative);
        let top = dense.certificate.unwrap().lambda_max;
        for (a, b) in dense.eigenvalues.iter().zip(&it.eigenvalues) {
            assert!((a - b).abs() <= 1e-9 * top, "{a} vs {b}");
        }
    }

    #[test]
    fn neumann_has_zero() {
        let t = triple_from_curvatures(1.0, 1.0, 1.0).unwrap();
        let evp = Scheme::Trace { lumping: MassLumping::CellThirds }.evp(&t, 2, false).unwrap();
        let s = solve(&evp, HowMany::All, &SolveOptions::default()).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-10);
        assert!(s.eigenvalues[1] > 1e-3);
    }

    #[test]
    fn interlacing_small() {
        let evp = GeneralizedEVP::from_network(&net(3, vec![(0, 1, 1.0), (1, 2, 1.0)], vec![1.0; 3]), &[], "test", 0).unwrap();
        let r = interlacing_check(&evp, &[1], &SolveOptions { allow_disconnected: true, ..Default::default() }).unwrap();
        assert_eq!(r.added, 1);
        let r = interlacing_check(&evp, &[], &SolveOptions::default()).unwrap();
        assert_eq!(r.added, 0);
        assert!(r.worst_relative <= 1e-12);
    }

    #[test]
    fn index_set_sizes() {
        for n in 1..=4 {
            assert_eq!(index_set(n).len(), 6 * n - 3);
        }
        for n in 1..=3 {
            assert_eq!(v_lambda(n).len(), 9 * n - 3);
        }
    }

    #[test]
    fn n_lambda_definition() {
        let t = triple_from_curvatures(1.0, 1.0, 1.0).unwrap();
        // c_g = 2: 4n² ≥ 8000 first at n = 45.
        assert_eq!(n_lambda(&t, 200.0), 45);
        assert_eq!(n_lambda(&t, 0.1), 1);
    }
}
