//! Word addressing of gasket cells, the integer curvature matrices, circle
//! counting and the tangency vertex sets `V_m`.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::{linear_fit, LinearFit};
use crate::geom::{self, DiskTriple, GeneralizedDisk, GeomError, Point, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GasketError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("curvature matrix entry overflowed 128 bits")]
    Overflow,
    #[error("enumeration exceeded the budget of {cap} items")]
    BudgetExceeded { cap: u64 },
    #[error("insufficient range for a fit: {0}")]
    InsufficientRange(String),
    #[error("quadruple is not in Γ: {0}")]
    NotInGamma(String),
    #[error("invalid word {0:?}")]
    InvalidWord(String),
}

/// A finite word over the alphabet {1, 2, 3}.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from letters in {1, 2, 3}.
    pub fn new(letters: &[u8]) -> Result<Self, GasketError> {
        if letters.iter().any(|&l| !(1..=3).contains(&l)) {
            return Err(GasketError::InvalidWord(format!("{letters:?}")));
        }
        Ok(Word(letters.to_vec()))
    }

    /// The word `j^n`.
    pub fn power(j: u8, n: usize) -> Result<Self, GasketError> {
        Word::new(&vec![j; n])
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self` followed by letter `j`.
    pub fn child(&self, j: u8) -> Word {
        debug_assert!((1..=3).contains(&j));
        let mut v = self.0.clone();
        v.push(j);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Two words are comparable when one extends the other.
    pub fn comparable(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// All words of length `m` in lexicographic order.
    pub fn all_of_length(m: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..m {
            out = out.iter().flat_map(|w| (1..=3).map(move |j| w.child(j))).collect();
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = GasketError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "∅" {
            return Ok(Word::empty());
        }
        let letters: Vec<u8> = s
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| GasketError::InvalidWord(s.to_string())))
            .collect::<Result<_, _>>()?;
        Word::new(&letters)
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.0.iter().map(|l| char::from(b'0' + l)).collect()
    }
}

impl TryFrom<String> for Word {
    type Error = GasketError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// A 4×4 nonnegative integer matrix acting on curvature quadruples from the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CurvatureMatrix(pub [[u128; 4]; 4]);

impl CurvatureMatrix {
    pub fn identity() -> Self {
        let mut m = [[0u128; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1;
        }
        CurvatureMatrix(m)
    }

    /// The generator `M_j`, `j ∈ {1, 2, 3}`.
    pub fn letter(j: u8) -> Self {
        match j {
            1 => CurvatureMatrix([[1, 0, 0, 0], [1, 1, 0, 1], [1, 0, 1, 1], [2, 0, 0, 1]]),
            2 => CurvatureMatrix([[1, 1, 0, 1], [0, 1, 0, 0], [0, 1, 1, 1], [0, 2, 0, 1]]),
            3 => CurvatureMatrix([[1, 0, 1, 1], [0, 1, 1, 1], [0, 0, 1, 0], [0, 0, 2, 1]]),
            _ => panic!("letter {j} outside {{1,2,3}}"),
        }
    }

    /// Closed form of `M_{j^n}`.
    pub fn letter_power(j: u8, n: u64) -> Self {
        let n = n as u128;
        let n2 = n * n;
        match j {
            1 => CurvatureMatrix([[1, 0, 0, 0], [n2, 1, 0, n], [n2, 0, 1, n], [2 * n, 0, 0, 1]]),
            2 => CurvatureMatrix([[1, n2, 0, n], [0, 1, 0, 0], [0, n2, 1, n], [0, 2 * n, 0, 1]]),
            3 => CurvatureMatrix([[1, 0, n2, n], [0, 1, n2, n], [0, 0, 1, 0], [0, 0, 2 * n, 1]]),
            _ => panic!("letter {j} outside {{1,2,3}}"),
        }
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, GasketError> {
        let mut out = [[0u128; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (k, cell) in row.iter_mut().enumerate() {
                let mut acc: u128 = 0;
                for j in 0..4 {
                    let p = self.0[i][j].checked_mul(other.0[j][k]).ok_or(GasketError::Overflow)?;
                    acc = acc.checked_add(p).ok_or(GasketError::Overflow)?;
                }
                *cell = acc;
            }
        }
        Ok(CurvatureMatrix(out))
    }
}

/// `M_w = M_{w_1} ⋯ M_{w_m}`.
pub fn matrix_of(w: &Word) -> Result<CurvatureMatrix, GasketError> {
    let mut m = CurvatureMatrix::identity();
    for &l in w.letters() {
        m = m.checked_mul(&CurvatureMatrix::letter(l))?;
    }
    Ok(m)
}

/// Member curvatures `(α, β, γ)` and the circumscribed curvature `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureQuadruple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub kappa: f64,
}

impl CurvatureQuadruple {
    /// Completes member curvatures with `κ = √(βγ + γα + αβ)`.
    pub fn from_members(alpha: f64, beta: f64, gamma: f64) -> Result<Self, GasketError> {
        let kappa = (beta * gamma + gamma * alpha + alpha * beta).sqrt();
        Self::new(alpha, beta, gamma, kappa)
    }

    /// Checks membership in Γ: nonnegative entries, `κ > 0` and the κ-identity.
    pub fn new(alpha: f64, beta: f64, gamma: f64, kappa: f64) -> Result<Self, GasketError> {
        let g = CurvatureQuadruple { alpha, beta, gamma, kappa };
        if ![alpha, beta, gamma, kappa].iter().all(|x| x.is_finite() && *x >= 0.0) || !(kappa > 0.0) {
            return Err(GasketError::NotInGamma(format!("{g:?}")));
        }
        if g.kappa_defect() > 1e-12 {
            return Err(GasketError::NotInGamma(format!("κ-identity defect {:e}", g.kappa_defect())));
        }
        Ok(g)
    }

    /// Relative defect of `κ² = βγ + γα + αβ`.
    pub fn kappa_defect(&self) -> f64 {
        let rhs = self.beta * self.gamma + self.gamma * self.alpha + self.alpha * self.beta;
        (self.kappa * self.kappa - rhs).abs() / (self.kappa * self.kappa)
    }

    pub fn members(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.kappa]
    }

    pub fn inscribed_curvature(&self) -> f64 {
        self.alpha + self.beta + self.gamma + 2.0 * self.kappa
    }

    /// The quadruple of `Φ_j` of the cell, `j ∈ {1, 2, 3}`.
    pub fn child(&self, j: u8) -> Self {
        let (a, b, c, k) = (self.alpha, self.beta, self.gamma, self.kappa);
        let d = a + b + c + 2.0 * k;
        match j {
            1 => CurvatureQuadruple { alpha: d, beta: b, gamma: c, kappa: b + c + k },
            2 => CurvatureQuadruple { alpha: a, beta: d, gamma: c, kappa: a + c + k },
            3 => CurvatureQuadruple { alpha: a, beta: b, gamma: d, kappa: a + b + k },
            _ => panic!("letter {j} outside {{1,2,3}}"),
        }
    }

    /// Row vector times matrix.
    pub fn times(&self, m: &CurvatureMatrix) -> Self {
        let g = self.as_array();
        let mut out = [0.0f64; 4];
        for (c, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|r| g[r] * m.0[r][c] as f64).sum();
        }
        CurvatureQuadruple { alpha: out[0], beta: out[1], gamma: out[2], kappa: out[3] }
    }

    /// Smallest pairwise member sum `min{β+γ, γ+α, α+β}`.
    pub fn min_pair_sum(&self) -> f64 {
        (self.beta + self.gamma).min(self.gamma + self.alpha).min(self.alpha + self.beta)
    }
}

/// `(α, β, γ, κ)·M_w`, with the κ-identity rechecked.
pub fn quadruple_at(g: &CurvatureQuadruple, w: &Word) -> Result<CurvatureQuadruple, GasketError> {
    let g = CurvatureQuadruple::new(g.alpha, g.beta, g.gamma, g.kappa)?;
    let out = g.times(&matrix_of(w)?);
    if out.kappa_defect() > 1e-12 {
        return Err(GasketError::NotInGamma(format!("κ-identity defect {:e} after {w}", out.kappa_defect())));
    }
    Ok(out)
}

/// `Φ_j`: replaces member `j` by the inscribed disk.
pub fn phi(t: &DiskTriple, j: u8) -> Result<DiskTriple, GasketError> {
    let d = geom::inscribed_disk(t)?;
    Ok(t.with_member(j as usize - 1, d, &Tolerance::default())?)
}

/// `Φ_w` of the triple.
pub fn triple_at(t: &DiskTriple, w: &Word) -> Result<DiskTriple, GasketError> {
    let mut cur = *t;
    for &l in w.letters() {
        cur = phi(&cur, l)?;
    }
    Ok(cur)
}

/// A gasket cell `𝒟_w` with its inscribed disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasketCell {
    pub word: Word,
    pub triple: DiskTriple,
    pub inscribed: GeneralizedDisk,
}

/// All cells with `|w| <= depth`, in breadth-first lexicographic order.
pub fn cells_up_to(t: &DiskTriple, depth: usize) -> Result<Vec<GasketCell>, GasketError> {
    let mut out = Vec::new();
    let mut level = vec![(Word::empty(), *t)];
    for m in 0..=depth {
        let mut next = Vec::new();
        for (w, tr) in &level {
            let inscribed = geom::inscribed_disk(tr)?;
            out.push(GasketCell { word: w.clone(), triple: *tr, inscribed });
            if m < depth {
                for j in 1..=3u8 {
                    next.push((w.child(j), tr.with_member(j as usize - 1, inscribed, &Tolerance::default())?));
                }
            }
        }
        level = next;
    }
    Ok(out)
}

/// Options for [`count_inscribed`].
#[derive(Debug, Clone, Copy)]
pub struct CountOptions {
    pub cap: u64,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { cap: 100_000_000 }
    }
}

/// Number of words whose inscribed disk has curvature at most `lambda`.
pub fn count_inscribed(t: &DiskTriple, lambda: f64, opts: &CountOptions) -> Result<u64, GasketError> {
    count_inscribed_quad(&t.quad(), lambda, opts)
}

/// [`count_inscribed`] on the curvature quadruple alone.
pub fn count_inscribed_quad(g: &CurvatureQuadruple, lambda: f64, opts: &CountOptions) -> Result<u64, GasketError> {
    Ok(count_grid(g, &[lambda], opts)?[0])
}

/// Counts `N(λ)` for every `λ` in `lambdas` in a single pruned traversal.
pub fn count_grid(g: &CurvatureQuadruple, lambdas: &[f64], opts: &CountOptions) -> Result<Vec<u64>, GasketError> {
    let mut sorted: Vec<(usize, f64)> = lambdas.iter().copied().enumerate().collect();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    let grid: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let Some(&top) = grid.last() else {
        return Ok(Vec::new());
    };
    let budget = AtomicU64::new(0);
    let hist = count_rec(g, &grid, top, opts.cap, &budget, 0)?;
    let mut cum = vec![0u64; grid.len()];
    let mut acc = 0;
    for (i, h) in hist.iter().enumerate() {
        acc += h;
        cum[i] = acc;
    }
    let mut out = vec![0u64; lambdas.len()];
    for (pos, (orig, _)) in sorted.iter().enumerate() {
        out[*orig] = cum[pos];
    }
    Ok(out)
}

const PARALLEL_DEPTH: usize = 6;

fn count_rec(
    g: &CurvatureQuadruple,
    grid: &[f64],
    top: f64,
    cap: u64,
    budget: &AtomicU64,
    depth: usize,
) -> Result<Vec<u64>, GasketError> {
    let mut hist = vec![0u64; grid.len()];
    let k = g.inscribed_curvature();
    if k > top {
        return Ok(hist);
    }
    if depth < PARALLEL_DEPTH {
        hist[grid.partition_point(|&l| l < k)] += 1;
        let children: Vec<CurvatureQuadruple> = (1..=3).map(|j| g.child(j)).collect();
        let parts: Vec<Result<Vec<u64>, GasketError>> = {
            use rayon::prelude::*;
            children.par_iter().map(|c| count_rec(c, grid, top, cap, budget, depth + 1)).collect()
        };
        for p in parts {
            for (h, v) in hist.iter_mut().zip(p?) {
                *h += v;
            }
        }
        return Ok(hist);
    }
    let mut stack = vec![*g];
    let mut local: u64 = 0;
    while let Some(q) = stack.pop() {
        let k = q.inscribed_curvature();
        if k > top {
            continue;
        }
        hist[grid.partition_point(|&l| l < k)] += 1;
        local += 1;
        if local >= 4096 {
            if budget.fetch_add(local, Ordering::Relaxed) + local > cap {
                return Err(GasketError::BudgetExceeded { cap });
            }
            local = 0;
        }
        for j in 1..=3 {
            stack.push(q.child(j));
        }
    }
    if budget.fetch_add(local, Ordering::Relaxed) + local > cap {
        return Err(GasketError::BudgetExceeded { cap });
    }
    Ok(hist)
}

/// A fitted power law `N(λ) ≈ prefactor·λ^slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub prefactor: f64,
    pub r2: f64,
}

impl From<LinearFit> for PowerLawFit {
    fn from(f: LinearFit) -> Self {
        PowerLawFit { slope: f.slope, prefactor: f.intercept.exp(), r2: f.r2 }
    }
}

/// Log-log slope of `N(λ)` over the upper half of a geometric grid.
pub fn fit_dimension(counts: &[(f64, f64)]) -> Result<PowerLawFit, GasketError> {
    if counts.len() < 8 {
        return Err(GasketError::InsufficientRange(format!("{} points, need at least 8", counts.len())));
    }
    let mut pts = counts.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
    if !(lo > 0.0) || hi / lo < 999.0 {
        return Err(GasketError::InsufficientRange(format!("grid spans [{lo}, {hi}], need 3 decades")));
    }
    let upper = &pts[pts.len() / 2..];
    if upper.iter().any(|p| !(p.1 > 0.0)) {
        return Err(GasketError::InsufficientRange("zero counts in the upper half of the grid".into()));
    }
    let xs: Vec<f64> = upper.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = upper.iter().map(|p| p.1.ln()).collect();
    linear_fit(&xs, &ys)
        .map(PowerLawFit::from)
        .ok_or_else(|| GasketError::InsufficientRange("degenerate grid".into()))
}

/// Which circle of the packing a mesh circle is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CircleOrigin {
    /// Root member `j` (0-based).
    Member(usize),
    /// Inscribed disk of the cell with this word.
    Inscribed(Word),
}

/// A circle of the packing together with the mesh vertices lying on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshCircle {
    pub origin: CircleOrigin,
    pub disk: GeneralizedDisk,
    pub vertices: Vec<usize>,
}

/// A depth-`m` cell with the indices of its tangency vertices and member circles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshCell {
    pub word: Word,
    pub triple: DiskTriple,
    /// `vertices[j]` is the index of `q_{j+1}` of the cell.
    pub vertices: [usize; 3],
    /// `circles[j]` is the index of member `j` of the cell in [`GasketMesh::circles`].
    pub circles: [usize; 3],
}

/// The vertex set `V_m` with cell incidences and the circles of `𝒜` meeting it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasketMesh {
    pub depth: usize,
    pub points: Vec<Point>,
    /// Depth at which each vertex first appears (0 for `V_0`).
    pub level: Vec<usize>,
    pub cells: Vec<MeshCell>,
    /// Root members first, then the inscribed disks of cells with `|w| < m`.
    pub circles: Vec<MeshCircle>,
}

impl GasketMesh {
    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }
}

/// Builds `V_m`. Vertices are identified combinatorially: cell `w` with
/// vertices `(i1, i2, i3)` creates `p_j = ∂D_in ∩ ∂D_j` and passes
/// `(i1, p3, p2)`, `(p3, i2, p1)`, `(p2, p1, i3)` to its children.
pub fn vertices(t: &DiskTriple, m: usize) -> Result<GasketMesh, GasketError> {
    let mut points: Vec<Point> = t.q().to_vec();
    let mut level = vec![0; 3];
    let mut circles: Vec<MeshCircle> = (0..3)
        .map(|j| MeshCircle { origin: CircleOrigin::Member(j), disk: t.disks()[j], vertices: Vec::new() })
        .collect();
    // q_j lies on members j+1 and j+2.
    for j in 0..3 {
        circles[(j + 1) % 3].vertices.push(j);
        circles[(j + 2) % 3].vertices.push(j);
    }
    let mut cells = vec![MeshCell { word: Word::empty(), triple: *t, vertices: [0, 1, 2], circles: [0, 1, 2] }];
    let tol = Tolerance::default();
    for depth in 1..=m {
        let mut next = Vec::with_capacity(cells.len() * 3);
        for cell in &cells {
            let inscribed = geom::inscribed_disk(&cell.triple)?;
            let cin = circles.len();
            circles.push(MeshCircle { origin: CircleOrigin::Inscribed(cell.word.clone()), disk: inscribed, vertices: Vec::new() });
            let children: Vec<DiskTriple> = (0..3)
                .map(|j| cell.triple.with_member(j, inscribed, &tol))
                .collect::<Result<_, _>>()?;
            // Child 1 has q = (q1, p3, p2); child 2 has q = (p3, q2, p1).
            let p3 = children[0].q()[1];
            let p2 = children[0].q()[2];
            let p1 = children[1].q()[2];
            let base = points.len();
            points.extend_from_slice(&[p1, p2, p3]);
            level.extend_from_slice(&[depth; 3]);
            let (i1, i2, i3) = (base, base + 1, base + 2);
            for (j, &p) in [i1, i2, i3].iter().enumerate() {
                circles[cin].vertices.push(p);
                circles[cell.circles[j]].vertices.push(p);
            }
            let [v1, v2, v3] = cell.vertices;
            let [c1, c2, c3] = cell.circles;
            let specs = [([v1, i3, i2], [cin, c2, c3]), ([i3, v2, i1], [c1, cin, c3]), ([i2, i1, v3], [c1, c2, cin])];
            for (j, (verts, circs)) in specs.into_iter().enumerate() {
                next.push(MeshCell { word: cell.word.child(j as u8 + 1), triple: children[j], vertices: verts, circles: circs });
            }
        }
        cells = next;
    }
    Ok(GasketMesh { depth: m, points, level, cells, circles })
}

/// Indices of `V_0(𝒟_w)` in the numbering produced by [`vertices`], for any
/// mesh depth `m >= |w|`. Computed from the word alone.
pub fn cell_vertex_ids(w: &Word) -> [usize; 3] {
    let mut ids = [0, 1, 2];
    let mut lex = 0usize;
    let mut count = 3usize;
    let mut cells = 1usize;
    for &l in w.letters() {
        let base = count + 3 * lex;
        let (p1, p2, p3) = (base, base + 1, base + 2);
        let [v1, v2, v3] = ids;
        ids = match l {
            1 => [v1, p3, p2],
            2 => [p3, v2, p1],
            _ => [p2, p1, v3],
        };
        count += 3 * cells;
        cells *= 3;
        lex = 3 * lex + (l as usize - 1);
    }
    ids
}

/// Options for [`render_svg`].
#[derive(Debug, Clone)]
pub struct SvgOptions {
    pub stroke: String,
    pub stroke_width: f64,
    pub size: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions { stroke: "black".into(), stroke_width: 0.004, size: 800.0 }
    }
}

/// Draws every distinct member and inscribed circle of the given cells.
pub fn render_svg(cells: &[GasketCell], opts: &SvgOptions) -> String {
    let mut disks: Vec<GeneralizedDisk> = Vec::new();
    let same = |a: &GeneralizedDisk, b: &GeneralizedDisk| match (a, b) {
        (GeneralizedDisk::Disk { center: c1, radius: r1 }, GeneralizedDisk::Disk { center: c2, radius: r2 }) => {
            (c1 - c2).norm() <= 1e-9 * r1.max(*r2) && (r1 - r2).abs() <= 1e-9 * r1.max(*r2)
        }
        (GeneralizedDisk::HalfPlane { normal: n1, offset: o1 }, GeneralizedDisk::HalfPlane { normal: n2, offset: o2 }) => {
            (n1 - n2).norm() <= 1e-9 && (o1 - o2).abs() <= 1e-9 * o1.abs().max(1.0)
        }
        _ => false,
    };
    for c in cells {
        for d in c.triple.disks().iter().chain(std::iter::once(&c.inscribed)) {
            if !disks.iter().any(|e| same(e, d)) {
                disks.push(*d);
            }
        }
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in cells {
        for z in c.triple.q().iter().copied().chain(c.inscribed.center()) {
            x0 = x0.min(z.re);
            y0 = y0.min(z.im);
            x1 = x1.max(z.re);
            y1 = y1.max(z.im);
        }
        for d in c.triple.disks() {
            if let GeneralizedDisk::Disk { center, radius } = d {
                x0 = x0.min(center.re - radius);
                y0 = y0.min(center.im - radius);
                x1 = x1.max(center.re + radius);
                y1 = y1.max(center.im + radius);
            }
        }
    }
    let mut s = String::new();
    if disks.is_empty() {
        s.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 1 1\"></svg>\n",
            opts.size
        ));
        return s;
    }
    let w = (x1 - x0).max(y1 - y0);
    let pad = 0.02 * w;
    let (vx, vy, vw) = (x0 - pad, -(y1 + pad), w + 2.0 * pad);
    let sw = opts.stroke_width * vw;
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"{} {} {} {}\">\n",
        opts.size, opts.size, fmt_num(vx), fmt_num(vy), fmt_num(vw), fmt_num(vw)
    ));
    s.push_str(&format!(
        "<g fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" transform=\"scale(1,-1)\">\n",
        opts.stroke,
        fmt_num(sw)
    ));
    for d in &disks {
        match *d {
            GeneralizedDisk::Disk { center, radius } => s.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n",
                fmt_num(center.re),
                fmt_num(center.im),
                fmt_num(radius)
            )),
            GeneralizedDisk::HalfPlane { normal, offset } => {
                let base = normal * offset;
                let along = normal * num_complex::Complex64::i();
                let (a, b) = (base - along * (2.0 * vw), base + along * (2.0 * vw));
                s.push_str(&format!(
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
                    fmt_num(a.re),
                    fmt_num(a.im),
                    fmt_num(b.re),
                    fmt_num(b.im)
                ));
            }
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn fmt_num(x: f64) -> String {
    format!("{x:.9}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::triple_from_curvatures;

    fn unit() -> DiskTriple {
        triple_from_curvatures(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn letter_matrices() {
        let m = matrix_of(&"1".parse().unwrap()).unwrap();
        assert_eq!(m.0, [[1, 0, 0, 0], [1, 1, 0, 1], [1, 0, 1, 1], [2, 0, 0, 1]]);
        let m = matrix_of(&Word::power(1, 5).unwrap()).unwrap();
        assert_eq!(m.0, [[1, 0, 0, 0], [25, 1, 0, 5], [25, 0, 1, 5], [10, 0, 0, 1]]);
        assert_eq!(matrix_of(&Word::empty()).unwrap(), CurvatureMatrix::identity());
    }

    #[test]
    fn matrix_overflow_reported() {
        let w = Word::new(&[1, 2].repeat(200)).unwrap();
        assert_eq!(matrix_of(&w), Err(GasketError::Overflow));
    }

    #[test]
    fn quadruple_examples() {
        let s3 = 3f64.sqrt();
        let g = CurvatureQuadruple::new(1.0, 1.0, 1.0, s3).unwrap();
        let c = quadruple_at(&g, &"1".parse().unwrap()).unwrap();
        assert!((c.alpha - (3.0 + 2.0 * s3)).abs() < 1e-14);
        assert_eq!((c.beta, c.gamma), (1.0, 1.0));
        assert!((c.kappa - (2.0 + s3)).abs() < 1e-14);
        assert_eq!(quadruple_at(&g, &Word::empty()).unwrap(), g);
        assert!(CurvatureQuadruple::new(0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn phi_examples() {
        let t = unit();
        let c = phi(&t, 1).unwrap();
        let s3 = 3f64.sqrt();
        assert!((c.quad().alpha - (3.0 + 2.0 * s3)).abs() < 1e-12);
        assert!((c.kappa() - (2.0 + s3)).abs() < 1e-12);
        assert_eq!(c.disks()[1], t.disks()[1]);
        assert_eq!(c.disks()[2], t.disks()[2]);
        let c12 = phi(&c, 2).unwrap();
        let pred = quadruple_at(&t.quad(), &"12".parse().unwrap()).unwrap();
        for (a, b) in c12.quad().as_array().iter().zip(pred.as_array()) {
            assert!((a - b).abs() <= 1e-9 * b);
        }
    }

    #[test]
    fn count_small() {
        let t = unit();
        let k = t.quad().inscribed_curvature();
        let o = CountOptions::default();
        assert_eq!(count_inscribed(&t, k * 0.99, &o).unwrap(), 0);
        assert_eq!(count_inscribed(&t, k, &o).unwrap(), 1);
    }

    #[test]
    fn count_matches_brute_force() {
        let g = unit().quad();
        let lambda = 100.0;
        // Unpruned enumeration to a depth where every cell is already too fine.
        let mut brute = 0;
        let mut level = vec![g];
        for _ in 0..=9 {
            brute += level.iter().filter(|q| q.inscribed_curvature() <= lambda).count() as u64;
            level = level.iter().flat_map(|q| (1..=3).map(|j| q.child(j))).collect();
        }
        assert!(level.iter().all(|q| q.inscribed_curvature() > lambda));
        assert_eq!(count_inscribed_quad(&g, lambda, &CountOptions::default()).unwrap(), brute);
    }

    #[test]
    fn count_budget() {
        let g = unit().quad();
        let r = count_inscribed_quad(&g, 1e6, &CountOptions { cap: 1000 });
        assert_eq!(r, Err(GasketError::BudgetExceeded { cap: 1000 }));
    }

    #[test]
    fn grid_counts_match_single() {
        let g = unit().quad();
        let lams = [500.0, 20.0, 100.0];
        let grid = count_grid(&g, &lams, &CountOptions::default()).unwrap();
        for (l, n) in lams.iter().zip(grid) {
            assert_eq!(n, count_inscribed_quad(&g, *l, &CountOptions::default()).unwrap());
        }
    }

    #[test]
    fn power_law_fit() {
        let pts: Vec<(f64, f64)> = crate::fit::geometric_grid(1.0, 1e4, 12).into_iter().map(|l| (l, l.powf(1.5))).collect();
        let f = fit_dimension(&pts).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-9);
        assert!(fit_dimension(&pts[..5]).is_err());
        let narrow: Vec<(f64, f64)> = crate::fit::geometric_grid(1.0, 10.0, 12).into_iter().map(|l| (l, l)).collect();
        assert!(matches!(fit_dimension(&narrow), Err(GasketError::InsufficientRange(_))));
    }

    #[test]
    fn vertex_counts() {
        let t = unit();
        for (m, n) in [(0, 3), (1, 6), (2, 15), (3, 42)] {
            let mesh = vertices(&t, m).unwrap();
            assert_eq!(mesh.vertex_count(), n);
            assert_eq!(mesh.cells.len(), 3usize.pow(m as u32));
        }
    }

    #[test]
    fn mesh_cells_match_vertices() {
        let mesh = vertices(&unit(), 3).unwrap();
        for c in &mesh.cells {
            for j in 0..3 {
                assert!((mesh.points[c.vertices[j]] - c.triple.q()[j]).norm() < 1e-12);
                assert_eq!(mesh.circles[c.circles[j]].disk, c.triple.disks()[j]);
            }
        }
    }

    #[test]
    fn combinatorial_ids_match_mesh() {
        let mesh = vertices(&unit(), 4).unwrap();
        for c in &mesh.cells {
            assert_eq!(cell_vertex_ids(&c.word), c.vertices);
        }
        let mesh2 = vertices(&unit(), 2).unwrap();
        for c in &mesh2.cells {
            assert_eq!(cell_vertex_ids(&c.word), c.vertices);
        }
    }

    #[test]
    fn svg_counts() {
        let t = unit();
        let count = |d| render_svg(&cells_up_to(&t, d).unwrap(), &SvgOptions::default()).matches("<circle").count();
        assert_eq!(count(0), 4);
        assert_eq!(count(2), 16);
        let empty = render_svg(&[], &SvgOptions::default());
        assert!(empty.starts_with("<svg") && empty.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn word_roundtrip() {
        let w: Word = "1231".parse().unwrap();
        assert_eq!(w.to_string(), "1231");
        assert!("124".parse::<Word>().is_err());
        assert_eq!(Word::empty().to_string(), "∅");
        assert_eq!(serde_json::to_string(&w).unwrap(), "\"1231\"");
    }
}
