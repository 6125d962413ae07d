//! Discrete carriers of the canonical Dirichlet form on a gasket: the trace
//! forms on `V_m`, the arc-network finite elements, mass lumping and the
//! sector extension inequalities.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gasket::{self, CircleOrigin, GasketError, GasketMesh};
use crate::geom::{triangle_area, DiskTriple, GeneralizedDisk, GeomError, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormsError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Gasket(#[from] GasketError),
    #[error("operation needs bounded disks but a half-plane is present")]
    HalfPlanePresent,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature changed by {change:e} under refinement")]
    QuadratureUnstable { change: f64 },
    #[error("linear solve failed: {0}")]
    Solve(String),
}

/// Vertices with plane coordinates, symmetric edge conductances and diagonal masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNetwork {
    pub points: Vec<Point>,
    /// `(i, j, conductance)` with `i < j`, sorted, no repeats.
    pub edges: Vec<(usize, usize, f64)>,
    pub masses: Vec<f64>,
}

impl WeightedNetwork {
    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        energy(&self.edges, u)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

fn energy(edges: &[(usize, usize, f64)], u: &[f64]) -> f64 {
    edges.iter().map(|&(i, j, c)| c * (u[i] - u[j]).powi(2)).sum()
}

/// Sorts edges by endpoints and merges parallel ones by summation.
fn merge_edges(mut raw: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    for e in raw.iter_mut() {
        if e.0 > e.1 {
            std::mem::swap(&mut e.0, &mut e.1);
        }
    }
    raw.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(raw.len());
    for e in raw {
        match out.last_mut() {
            Some(last) if last.0 == e.0 && last.1 == e.1 => last.2 += e.2,
            _ => out.push(e),
        }
    }
    out
}

/// Conductances `c_j = (κ² + α_j²)/(2κα_j)` of the edges opposite `q_j`.
pub fn cell_conductances(t: &DiskTriple) -> Result<[f64; 3], FormsError> {
    if !t.all_disks() {
        return Err(FormsError::HalfPlanePresent);
    }
    let k = t.kappa();
    Ok(t.quad().members().map(|a| (k * k + a * a) / (2.0 * k * a)))
}

/// The trace form `E_m` on `V_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceForm {
    pub depth: usize,
    pub points: Vec<Point>,
    /// Depth at which each vertex first appears.
    pub level: Vec<usize>,
    pub edges: Vec<(usize, usize, f64)>,
    /// Vertex indices of the depth-`m` cells.
    pub cells: Vec<[usize; 3]>,
}

impl TraceForm {
    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        energy(&self.edges, u)
    }

    /// `(Lu)_i = Σ_j c_ij (u_i − u_j)`.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for &(i, j, c) in &self.edges {
            let d = c * (u[i] - u[j]);
            out[i] += d;
            out[j] -= d;
        }
        out
    }

    /// Per vertex `Σ_j c_ij |x_i − x_j|`, the natural scale of Laplacian
    /// residuals of coordinate functions.
    pub fn local_scale(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.points.len()];
        for &(i, j, c) in &self.edges {
            let d = c * (self.points[i] - self.points[j]).norm();
            out[i] += d;
            out[j] += d;
        }
        out
    }

    /// `min{E(v) : v = values on fixed}` and the minimizer.
    pub fn constrained_minimum(&self, fixed: &[usize], values: &[f64]) -> Result<(f64, Vec<f64>), FormsError> {
        if fixed.len() != values.len() {
            return Err(FormsError::InvalidArgument("fixed and values differ in length".into()));
        }
        let n = self.points.len();
        let mut v = vec![0.0; n];
        let mut free_idx = vec![usize::MAX; n];
        for (&i, &x) in fixed.iter().zip(values) {
            v[i] = x;
            free_idx[i] = usize::MAX - 1;
        }
        let mut free = Vec::new();
        for (i, f) in free_idx.iter_mut().enumerate() {
            if *f == usize::MAX {
                *f = free.len();
                free.push(i);
            }
        }
        if !free.is_empty() {
            let nf = free.len();
            let mut a = DMatrix::<f64>::zeros(nf, nf);
            let mut b = DVector::<f64>::zeros(nf);
            for &(i, j, c) in &self.edges {
                let (fi, fj) = (free_idx[i], free_idx[j]);
                let i_free = fi < usize::MAX - 1;
                let j_free = fj < usize::MAX - 1;
                if i_free {
                    a[(fi, fi)] += c;
                }
                if j_free {
                    a[(fj, fj)] += c;
                }
                match (i_free, j_free) {
                    (true, true) => {
                        a[(fi, fj)] -= c;
                        a[(fj, fi)] -= c;
                    }
                    (true, false) => b[fi] += c * v[j],
                    (false, true) => b[fj] += c * v[i],
                    _ => {}
                }
            }
            let chol = a.cholesky().ok_or_else(|| FormsError::Solve("interior block is not positive definite".into()))?;
            let x = chol.solve(&b);
            for (k, &i) in free.iter().enumerate() {
                v[i] = x[k];
            }
        }
        Ok((self.energy(&v), v))
    }
}

/// Assembles `E_m` from the depth-`m` cells.
pub fn assemble_trace_form(t: &DiskTriple, m: usize) -> Result<TraceForm, FormsError> {
    let mesh = gasket::vertices(t, m)?;
    trace_form_from_mesh(&mesh)
}

/// [`assemble_trace_form`] on an already built mesh.
pub fn trace_form_from_mesh(mesh: &GasketMesh) -> Result<TraceForm, FormsError> {
    let mut raw = Vec::with_capacity(mesh.cells.len() * 3);
    for cell in &mesh.cells {
        let c = cell_conductances(&cell.triple)?;
        for j in 0..3 {
            raw.push((cell.vertices[(j + 1) % 3], cell.vertices[(j + 2) % 3], c[j]));
        }
    }
    Ok(TraceForm {
        depth: mesh.depth,
        points: mesh.points.clone(),
        level: mesh.level.clone(),
        edges: merge_edges(raw),
        cells: mesh.cells.iter().map(|c| c.vertices).collect(),
    })
}

/// How the measure is lumped onto `V_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MassLumping {
    /// Each depth-`m` cell gives `2·vol(△(𝒟_w))/3` to each vertex.
    #[default]
    CellThirds,
    /// Each vertex receives half of `rad·length` of the adjacent arc pieces
    /// of the truncated arc network.
    ArcLength,
}

/// Diagonal vertex masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassVector {
    pub masses: Vec<f64>,
    pub total: f64,
}

impl MassVector {
    fn new(masses: Vec<f64>) -> Self {
        let total = masses.iter().sum();
        MassVector { masses, total }
    }
}

/// Lumped masses for the trace scheme.
pub fn assemble_mass_trace(t: &DiskTriple, m: usize, lumping: MassLumping) -> Result<MassVector, FormsError> {
    let mesh = gasket::vertices(t, m)?;
    mass_from_mesh(&mesh, lumping)
}

/// [`assemble_mass_trace`] on an already built mesh.
pub fn mass_from_mesh(mesh: &GasketMesh, lumping: MassLumping) -> Result<MassVector, FormsError> {
    let mut masses = vec![0.0; mesh.points.len()];
    match lumping {
        MassLumping::CellThirds => {
            for cell in &mesh.cells {
                let share = 2.0 * triangle_area(&cell.triple).map_err(|_| FormsError::HalfPlanePresent)? / 3.0;
                for &v in &cell.vertices {
                    masses[v] += share;
                }
            }
        }
        MassLumping::ArcLength => {
            if mesh.depth == 0 {
                return Err(FormsError::InvalidArgument("arc-length lumping needs m >= 1".into()));
            }
            let net = arc_network_from_mesh(mesh, 1)?;
            masses.copy_from_slice(&net.masses()[..mesh.points.len()]);
        }
    }
    Ok(MassVector::new(masses))
}

/// Trace form and masses packaged as a weighted network.
pub fn trace_network(t: &DiskTriple, m: usize, lumping: MassLumping) -> Result<WeightedNetwork, FormsError> {
    let mesh = gasket::vertices(t, m)?;
    let form = trace_form_from_mesh(&mesh)?;
    let mass = mass_from_mesh(&mesh, lumping)?;
    Ok(WeightedNetwork { points: form.points, edges: form.edges, masses: mass.masses })
}

/// A circle of the arc network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcCircle {
    pub center: Point,
    pub radius: f64,
    pub origin: CircleOrigin,
}

/// One finite element: a circular segment between two vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcEdge {
    pub a: usize,
    pub b: usize,
    /// Index into [`ArcNetwork::circles`].
    pub circle: usize,
    /// Arc length of the segment.
    pub length: f64,
    pub radius: f64,
}

impl ArcEdge {
    pub fn stiffness(&self) -> f64 {
        self.radius / self.length
    }

    pub fn mass(&self) -> f64 {
        self.radius * self.length
    }
}

/// The truncated arc network with piecewise-linear elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcNetwork {
    pub depth: usize,
    pub refine: usize,
    /// The first `tangency_count` vertices are `V_m` in mesh order.
    pub points: Vec<Point>,
    pub tangency_count: usize,
    pub edges: Vec<ArcEdge>,
    pub circles: Vec<ArcCircle>,
}

impl ArcNetwork {
    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    pub fn masses(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.points.len()];
        for e in &self.edges {
            let h = 0.5 * e.mass();
            m[e.a] += h;
            m[e.b] += h;
        }
        m
    }

    pub fn total_mass(&self) -> f64 {
        self.edges.iter().map(|e| e.mass()).sum()
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        self.edges.iter().map(|e| e.stiffness() * (u[e.a] - u[e.b]).powi(2)).sum()
    }

    pub fn network(&self) -> WeightedNetwork {
        let raw = self.edges.iter().map(|e| (e.a, e.b, e.stiffness())).collect();
        WeightedNetwork { points: self.points.clone(), edges: merge_edges(raw), masses: self.masses() }
    }
}

fn wrap_angle(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    } else if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Arc-network elements on the outer arcs and the inscribed circles of
/// cells with `|w| < m`, each piece between `V_m` points cut into `refine`
/// equal-angle segments.
pub fn assemble_arc_fem(t: &DiskTriple, m: usize, refine: usize) -> Result<ArcNetwork, FormsError> {
    if m < 1 || refine < 1 {
        return Err(FormsError::InvalidArgument(format!("need m >= 1 and refine >= 1, got m={m}, refine={refine}")));
    }
    let mesh = gasket::vertices(t, m)?;
    arc_network_from_mesh(&mesh, refine)
}

fn arc_network_from_mesh(mesh: &GasketMesh, refine: usize) -> Result<ArcNetwork, FormsError> {
    let mut points = mesh.points.clone();
    let tangency_count = points.len();
    let mut edges = Vec::new();
    let mut circles = Vec::with_capacity(mesh.circles.len());
    let root_q = [mesh.points[0], mesh.points[1], mesh.points[2]];
    for (ci, mc) in mesh.circles.iter().enumerate() {
        let GeneralizedDisk::Disk { center, radius } = mc.disk else {
            return Err(FormsError::HalfPlanePresent);
        };
        circles.push(ArcCircle { center, radius, origin: mc.origin.clone() });
        // (vertex, angle offset) along the arc, sorted.
        let (start, mut stops, closed): (f64, Vec<(usize, f64)>, bool) = match mc.origin {
            CircleOrigin::Member(j) => {
                let a = root_q[(j + 1) % 3] - center;
                let b = root_q[(j + 2) % 3] - center;
                let s = a.arg();
                let sweep = wrap_angle(b.arg() - s);
                let stops = mc
                    .vertices
                    .iter()
                    .map(|&v| {
                        let off = wrap_angle((points[v] - center).arg() - s);
                        (v, off * sweep.signum())
                    })
                    .collect();
                (s, stops, false)
            }
            CircleOrigin::Inscribed(_) => {
                let stops = mc
                    .vertices
                    .iter()
                    .map(|&v| {
                        let mut th = (points[v] - center).arg();
                        if th < 0.0 {
                            th += 2.0 * PI;
                        }
                        (v, th)
                    })
                    .collect();
                (0.0, stops, true)
            }
        };
        stops.sort_by(|a, b| a.1.total_cmp(&b.1));
        let dir = match mc.origin {
            CircleOrigin::Member(j) => {
                let a = root_q[(j + 1) % 3] - center;
                let b = root_q[(j + 2) % 3] - center;
                wrap_angle(b.arg() - a.arg()).signum()
            }
            CircleOrigin::Inscribed(_) => 1.0,
        };
        let pieces = if closed { stops.len() } else { stops.len().saturating_sub(1) };
        for p in 0..pieces {
            let (va, ta) = stops[p];
            let (vb, mut tb) = stops[(p + 1) % stops.len()];
            if closed && p + 1 == stops.len() {
                tb += 2.0 * PI;
            }
            let dth = (tb - ta) / refine as f64;
            let length = radius * dth.abs();
            let mut prev = va;
            for s in 1..=refine {
                let next = if s == refine {
                    vb
                } else {
                    let th = start + dir * (ta + dth * s as f64);
                    points.push(center + Point::from_polar(radius, th));
                    points.len() - 1
                };
                edges.push(ArcEdge { a: prev, b: next, circle: ci, length, radius });
                prev = next;
            }
        }
    }
    Ok(ArcNetwork { depth: mesh.depth, refine, points, tangency_count, edges, circles })
}

/// Values of a function on a circular arc, sampled on a uniform angle grid
/// and interpolated linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSegmentFunction {
    pub center: Point,
    pub radius: f64,
    pub start: f64,
    /// Angular extent in `(0, 2π]`.
    pub sweep: f64,
    pub samples: Vec<f64>,
}

impl ArcSegmentFunction {
    pub fn new(center: Point, radius: f64, start: f64, sweep: f64, samples: Vec<f64>) -> Result<Self, FormsError> {
        if samples.len() < 16 {
            return Err(FormsError::InvalidArgument(format!("{} samples, need at least 16", samples.len())));
        }
        if !(radius > 0.0) || !(sweep > 0.0 && sweep <= 2.0 * PI + 1e-12) {
            return Err(FormsError::InvalidArgument(format!("radius {radius}, sweep {sweep}")));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(FormsError::InvalidArgument("non-finite sample".into()));
        }
        Ok(ArcSegmentFunction { center, radius, start, sweep, samples })
    }

    /// Samples `f(θ)` for local angle `θ ∈ [0, sweep]` at `n` grid points.
    pub fn from_fn(center: Point, radius: f64, start: f64, sweep: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self, FormsError> {
        let samples = (0..n).map(|i| f(sweep * i as f64 / (n - 1) as f64)).collect();
        Self::new(center, radius, start, sweep, samples)
    }

    fn step(&self) -> f64 {
        self.sweep / (self.samples.len() - 1) as f64
    }

    /// Value and angular derivative at local angle `θ`.
    fn eval(&self, th: f64) -> (f64, f64) {
        let h = self.step();
        let k = ((th / h).floor() as usize).min(self.samples.len() - 2);
        let s = (th - k as f64 * h) / h;
        let (a, b) = (self.samples[k], self.samples[k + 1]);
        (a + s * (b - a), (b - a) / h)
    }

    /// Arc average `ū` with respect to length.
    pub fn mean(&self) -> f64 {
        let s: f64 = self.samples.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum();
        s / (self.samples.len() - 1) as f64
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One two-sided inequality `lower ≤ middle ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub holds: bool,
}

impl Sandwich {
    fn new(lower: f64, middle: f64, upper: f64, slack: f64) -> Self {
        let tol = slack * lower.abs().max(middle.abs()).max(upper.abs()).max(f64::MIN_POSITIVE);
        Sandwich { lower, middle, upper, holds: lower <= middle + tol && middle <= upper + tol }
    }
}

/// Both sides of the sector extension inequalities for one arc function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub a: f64,
    /// `(2/21)∫|∇I|² ≤ ∫|∇_C u|² rad ≤ 2∫|∇I|²`, or `None` when `a` lies
    /// outside `[min u, max u]`.
    pub gradient: Option<Sandwich>,
    /// `2∫I² ≤ ∫u² rad ≤ 4∫I²` for `a = 0`.
    pub l2_zero: Sandwich,
    /// The same with `a = ū`.
    pub l2_mean: Sandwich,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub max_change: f64,
}

impl SectorReport {
    pub fn holds(&self) -> bool {
        self.gradient.is_none_or(|g| g.holds) && self.l2_zero.holds && self.l2_mean.holds
    }
}

struct SectorIntegrals {
    grad_sector: f64,
    l2_sector: f64,
    grad_arc: f64,
    l2_arc: f64,
}

fn sector_integrals(f: &ArcSegmentFunction, a: f64, nt: usize, nth: usize) -> SectorIntegrals {
    let r = f.radius;
    let dt = 1.0 / nt as f64;
    let dth = f.sweep / nth as f64;
    let mut gs = 0.0;
    let mut ls = 0.0;
    let mut ga = 0.0;
    let mut la = 0.0;
    for j in 0..nth {
        let th = (j as f64 + 0.5) * dth;
        let (u, du) = f.eval(th);
        ga += du * du / (r * r) * r * r * dth;
        la += u * u * r * r * dth;
        for i in 0..nt {
            let t = (i as f64 + 0.5) * dt;
            let rho = t * r;
            // I = (1 − t)a + t·u(θ) with t = ρ/R.
            let val = (1.0 - t) * a + t * u;
            let d_rho = (u - a) / r;
            let d_tan = t * du / rho;
            let w = rho * (r * dt) * dth;
            gs += (d_rho * d_rho + d_tan * d_tan) * w;
            ls += val * val * w;
        }
    }
    SectorIntegrals { grad_sector: gs, l2_sector: ls, grad_arc: ga, l2_arc: la }
}

const SECTOR_SLACK: f64 = 1e-6;
const SECTOR_STABILITY: f64 = 1e-4;

/// Evaluates both sector extension inequalities by tensor-product midpoint
/// quadrature with Richardson extrapolation, doubling the grid until
/// successive extrapolated values agree to 1e-4.
pub fn sector_extension_check(f: &ArcSegmentFunction, a: f64) -> Result<SectorReport, FormsError> {
    let mean = f.mean();
    let mut nt = 64;
    let mut nth = 4 * (f.samples.len() - 1);
    let eval = |nt: usize, nth: usize| {
        [a, 0.0, mean].map(|b| {
            let s = sector_integrals(f, b, nt, nth);
            [s.grad_sector, s.l2_sector, s.grad_arc, s.l2_arc]
        })
    };
    let extrapolate = |coarse: &[[f64; 4]; 3], fine: &[[f64; 4]; 3]| {
        let mut out = [[0.0; 4]; 3];
        for k in 0..3 {
            for q in 0..4 {
                out[k][q] = (4.0 * fine[k][q] - coarse[k][q]) / 3.0;
            }
        }
        out
    };
    let mut raw = eval(nt, nth);
    let mut prev: Option<[[f64; 4]; 3]> = None;
    let mut change = f64::INFINITY;
    for _ in 0..4 {
        nt *= 2;
        nth *= 2;
        let next = eval(nt, nth);
        let cur = extrapolate(&raw, &next);
        raw = next;
        if let Some(p) = prev {
            change = 0.0f64;
            for (pk, ck) in p.iter().zip(&cur) {
                for (x, y) in pk.iter().zip(ck) {
                    let scale = x.abs().max(y.abs());
                    if scale > 0.0 {
                        change = change.max((x - y).abs() / scale);
                    }
                }
            }
        }
        prev = Some(cur);
        if change <= SECTOR_STABILITY {
            break;
        }
    }
    if change > SECTOR_STABILITY {
        return Err(FormsError::QuadratureUnstable { change });
    }
    let v = prev.unwrap();
    let (ga, z, mn) = (v[0], v[1], v[2]);
    let gradient = if a >= f.min() - 1e-12 && a <= f.max() + 1e-12 {
        Some(Sandwich::new(2.0 / 21.0 * ga[0], ga[2], 2.0 * ga[0], SECTOR_SLACK))
    } else {
        None
    };
    Ok(SectorReport {
        a,
        gradient,
        l2_zero: Sandwich::new(2.0 * z[1], z[3], 4.0 * z[1], SECTOR_SLACK),
        l2_mean: Sandwich::new(2.0 * mn[1], mn[3], 4.0 * mn[1], SECTOR_SLACK),
        radial_nodes: nt,
        angular_nodes: nth,
        max_change: change,
    })
}
#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{pt, triple_from_curvatures};

    fn unit() -> DiskTriple {
        triple_from_curvatures(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn unit_conductances() {
        let c = cell_conductances(&unit()).unwrap();
        for x in c {
            assert!((x - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn conductance_at_least_one() {
        for (a, b, c) in [(1.0, 2.0, 3.0), (0.1, 10.0, 5.0), (4.0, 4.0, 0.2)] {
            let t = triple_from_curvatures(a, b, c).unwrap();
            let k = t.kappa();
            for (cj, aj) in cell_conductances(&t).unwrap().iter().zip(t.quad().members()) {
                assert!(*cj >= 1.0 - 1e-15);
                assert!((cj - 1.0).abs() > 1e-12 || (aj - k).abs() < 1e-6 * k);
            }
            let s = t.similarity(3.0, pt(1.0, -2.0)).unwrap();
            for (x, y) in cell_conductances(&t).unwrap().iter().zip(cell_conductances(&s).unwrap()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_identity_m0() {
        let t = unit();
        let f = assemble_trace_form(&t, 0).unwrap();
        let h1: Vec<f64> = f.points.iter().map(|p| p.re).collect();
        let h2: Vec<f64> = f.points.iter().map(|p| p.im).collect();
        let e = f.energy(&h1) + f.energy(&h2);
        assert!((e - 2.0 * 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mass_m0() {
        let m = assemble_mass_trace(&unit(), 0, MassLumping::CellThirds).unwrap();
        for x in &m.masses {
            assert!((x - 2.0 * 3f64.sqrt() / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn arc_fem_counts() {
        let n = assemble_arc_fem(&unit(), 1, 1).unwrap();
        assert_eq!(n.vertex_count(), 6);
        assert_eq!(n.edges.len(), 9);
        let n = assemble_arc_fem(&unit(), 3, 4).unwrap();
        assert_eq!(n.edges.len(), 81 * 4);
        assert_eq!(n.vertex_count(), 42 + 81 * 3);
        for e in &n.edges {
            assert!((e.stiffness() * e.mass() - e.radius * e.radius).abs() < 1e-12 * e.radius * e.radius);
            let chord = (n.points[e.a] - n.points[e.b]).norm();
            assert!(chord <= e.length * (1.0 + 1e-12));
            assert!(chord >= 2.0 * e.radius * (e.length / (2.0 * e.radius)).sin() * (1.0 - 1e-9));
        }
    }

    #[test]
    fn arc_points_lie_on_circles() {
        let n = assemble_arc_fem(&triple_from_curvatures(1.0, 2.0, 3.0).unwrap(), 3, 3).unwrap();
        for e in &n.edges {
            let c = &n.circles[e.circle];
            for v in [e.a, e.b] {
                assert!(((n.points[v] - c.center).norm() - c.radius).abs() < 1e-12 * c.radius.max(1.0));
            }
        }
    }

    #[test]
    fn constrained_minimum_matches_trace() {
        let t = unit();
        let coarse = assemble_trace_form(&t, 1).unwrap();
        let fine = assemble_trace_form(&t, 2).unwrap();
        let u: Vec<f64> = (0..coarse.vertex_count()).map(|i| (i as f64 * 0.7).sin()).collect();
        let fixed: Vec<usize> = (0..coarse.vertex_count()).collect();
        let (e, _) = fine.constrained_minimum(&fixed, &u).unwrap();
        assert!((e - coarse.energy(&u)).abs() < 1e-10 * e);
    }

    #[test]
    fn sector_constant() {
        let f = ArcSegmentFunction::from_fn(pt(0.0, 0.0), 2.0, 0.3, 1.0, 16, |_| 1.5).unwrap();
        let r = sector_extension_check(&f, 1.5).unwrap();
        let g = r.gradient.unwrap();
        assert_eq!((g.lower, g.middle, g.upper), (0.0, 0.0, 0.0));
        // With a equal to the constant, ∫I² = area·a² and area = rad·len/2.
        let area = 0.5 * 2.0 * 2.0;
        assert!((r.l2_mean.lower - 2.0 * area * 2.25).abs() < 1e-9);
        assert!((r.l2_mean.middle - 2.0 * 2.0 * 2.25).abs() < 1e-9);
        assert!(r.holds());
    }

    #[test]
    fn sector_sine_quarter() {
        let f = ArcSegmentFunction::from_fn(pt(1.0, 1.0), 1.0, 0.0, PI / 2.0, 257, f64::sin).unwrap();
        let r = sector_extension_check(&f, f.mean()).unwrap();
        assert!(r.holds());
        // Closed form: ∫u'² dθ = ∫cos² over [0, π/2] = π/4.
        assert!((r.gradient.unwrap().middle - PI / 4.0).abs() < 1e-4);
    }

    #[test]
    fn arc_function_validation() {
        assert!(ArcSegmentFunction::new(pt(0.0, 0.0), 1.0, 0.0, 1.0, vec![0.0; 8]).is_err());
        assert!(ArcSegmentFunction::new(pt(0.0, 0.0), -1.0, 0.0, 1.0, vec![0.0; 16]).is_err());
    }
}
