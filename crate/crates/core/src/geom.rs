//! Plane geometry of tangent disks: tangency points, the Descartes
//! quadruple, circumscribed and inscribed disks, and Möbius maps.
//!
//! Points are [`Complex64`] values. A [`GeneralizedDisk`] is either a bounded
//! open disk or an open half-plane `{z : <normal, z> < offset}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gasket::CurvatureQuadruple;

/// A point of the plane.
pub type Point = Complex64;

/// Shorthand for building a point.
pub fn pt(x: f64, y: f64) -> Point {
    Complex64::new(x, y)
}

/// Errors raised by the geometry layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("disks are not externally tangent (boundary gap {gap:e})")]
    NotTangent { gap: f64 },
    #[error("two half-planes cannot be tangent at a finite point")]
    TwoHalfPlanes,
    #[error("tangency points are negatively oriented (signed area {area:e})")]
    NotPositivelyOriented { area: f64 },
    #[error("tangency points are collinear")]
    DegenerateTriple,
    #[error("trilateration residual {residual:e} exceeds tolerance")]
    NumericBreakdown { residual: f64 },
    #[error("operation needs bounded disks but a half-plane is present")]
    HalfPlanePresent,
    #[error("image region is unbounded and not a half-plane")]
    UnrepresentableImage,
    #[error("invalid disk: {0}")]
    InvalidDisk(String),
    #[error("Möbius map has zero determinant")]
    SingularMap,
}

/// Tolerances used by validation routines. Both are relative to the local
/// length scale (largest incident radius).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub geometric: f64,
    pub algebraic: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { geometric: 1e-9, algebraic: 1e-12 }
    }
}

/// An open disk or an open half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "DiskRepr", into = "DiskRepr")]
pub enum GeneralizedDisk {
    Disk { center: Point, radius: f64 },
    /// The region `{z : <normal, z> < offset}` with `|normal| = 1`.
    HalfPlane { normal: Point, offset: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum DiskRepr {
    Disk { center: [f64; 2], radius: f64 },
    Halfplane { normal: [f64; 2], offset: f64 },
}

impl From<DiskRepr> for GeneralizedDisk {
    fn from(r: DiskRepr) -> Self {
        match r {
            DiskRepr::Disk { center, radius } => GeneralizedDisk::Disk { center: pt(center[0], center[1]), radius },
            DiskRepr::Halfplane { normal, offset } => GeneralizedDisk::HalfPlane { normal: pt(normal[0], normal[1]), offset },
        }
    }
}

impl From<GeneralizedDisk> for DiskRepr {
    fn from(d: GeneralizedDisk) -> Self {
        match d {
            GeneralizedDisk::Disk { center, radius } => DiskRepr::Disk { center: [center.re, center.im], radius },
            GeneralizedDisk::HalfPlane { normal, offset } => DiskRepr::Halfplane { normal: [normal.re, normal.im], offset },
        }
    }
}

impl GeneralizedDisk {
    /// A bounded disk; the radius must be positive and finite.
    pub fn disk(center: Point, radius: f64) -> Result<Self, GeomError> {
        if !(radius > 0.0 && radius.is_finite()) || !center.re.is_finite() || !center.im.is_finite() {
            return Err(GeomError::InvalidDisk(format!("radius {radius} at {center}")));
        }
        Ok(GeneralizedDisk::Disk { center, radius })
    }

    /// The half-plane `{z : <normal, z> < offset}`. The normal is normalized.
    pub fn half_plane(normal: Point, offset: f64) -> Result<Self, GeomError> {
        let n = normal.norm();
        if !(n > 0.0 && n.is_finite() && offset.is_finite()) {
            return Err(GeomError::InvalidDisk(format!("half-plane normal {normal}")));
        }
        Ok(GeneralizedDisk::HalfPlane { normal: normal / n, offset: offset / n })
    }

    /// Checks the representation invariants after deserialization.
    pub fn validated(self) -> Result<Self, GeomError> {
        match self {
            GeneralizedDisk::Disk { center, radius } => Self::disk(center, radius),
            GeneralizedDisk::HalfPlane { normal, offset } => {
                if ((normal.norm() - 1.0).abs()) > 1e-12 {
                    return Err(GeomError::InvalidDisk("half-plane normal is not a unit vector".into()));
                }
                Self::half_plane(normal, offset)
            }
        }
    }

    pub fn curvature(&self) -> f64 {
        match self {
            GeneralizedDisk::Disk { radius, .. } => 1.0 / radius,
            GeneralizedDisk::HalfPlane { .. } => 0.0,
        }
    }

    /// Radius of a bounded disk, `None` for a half-plane.
    pub fn radius(&self) -> Option<f64> {
        match self {
            GeneralizedDisk::Disk { radius, .. } => Some(*radius),
            GeneralizedDisk::HalfPlane { .. } => None,
        }
    }

    pub fn center(&self) -> Option<Point> {
        match self {
            GeneralizedDisk::Disk { center, .. } => Some(*center),
            GeneralizedDisk::HalfPlane { .. } => None,
        }
    }

    pub fn is_half_plane(&self) -> bool {
        matches!(self, GeneralizedDisk::HalfPlane { .. })
    }

    /// Signed distance from `z` to the boundary, negative inside.
    pub fn boundary_distance(&self, z: Point) -> f64 {
        match *self {
            GeneralizedDisk::Disk { center, radius } => (z - center).norm() - radius,
            GeneralizedDisk::HalfPlane { normal, offset } => dot(normal, z) - offset,
        }
    }

    /// Image under `z -> s z + shift`, with `s > 0`.
    pub fn similarity(&self, s: f64, shift: Point) -> Self {
        match *self {
            GeneralizedDisk::Disk { center, radius } => GeneralizedDisk::Disk { center: center * s + shift, radius: radius * s },
            GeneralizedDisk::HalfPlane { normal, offset } => {
                GeneralizedDisk::HalfPlane { normal, offset: offset * s + dot(normal, shift) }
            }
        }
    }
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a.re * b.re + a.im * b.im
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Signed area of the triangle `(a, b, c)`; positive when counter-clockwise.
pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * cross(b - a, c - a)
}

/// The common boundary point of two externally tangent generalized disks.
pub fn tangency_point(d1: &GeneralizedDisk, d2: &GeneralizedDisk, tol: &Tolerance) -> Result<Point, GeomError> {
    use GeneralizedDisk::*;
    match (*d1, *d2) {
        (Disk { center: c1, radius: r1 }, Disk { center: c2, radius: r2 }) => {
            let gap = (c2 - c1).norm() - (r1 + r2);
            if gap.abs() > tol.geometric * r1.max(r2) {
                return Err(GeomError::NotTangent { gap });
            }
            Ok((c1 * r2 + c2 * r1) / (r1 + r2))
        }
        (Disk { center, radius }, HalfPlane { normal, offset }) | (HalfPlane { normal, offset }, Disk { center, radius }) => {
            let gap = dot(normal, center) - offset - radius;
            if gap.abs() > tol.geometric * radius {
                return Err(GeomError::NotTangent { gap });
            }
            Ok(center - normal * radius)
        }
        (HalfPlane { .. }, HalfPlane { .. }) => Err(GeomError::TwoHalfPlanes),
    }
}

/// A validated, positively oriented tangential disk triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskTriple {
    disks: [GeneralizedDisk; 3],
    q: [Point; 3],
    quad: CurvatureQuadruple,
}

impl DiskTriple {
    pub fn disks(&self) -> &[GeneralizedDisk; 3] {
        &self.disks
    }

    /// Tangency points; `q[j]` is the contact of the other two members.
    pub fn q(&self) -> &[Point; 3] {
        &self.q
    }

    pub fn quad(&self) -> CurvatureQuadruple {
        self.quad
    }

    pub fn kappa(&self) -> f64 {
        self.quad.kappa
    }

    /// True when all three members are bounded disks.
    pub fn all_disks(&self) -> bool {
        self.disks.iter().all(|d| !d.is_half_plane())
    }

    /// Largest member radius; the length scale of the triple.
    pub fn scale(&self) -> f64 {
        let mut s: f64 = 0.0;
        for d in &self.disks {
            if let Some(r) = d.radius() {
                s = s.max(r);
            }
        }
        if s == 0.0 {
            1.0
        } else {
            s
        }
    }

    /// The triple transformed by `z -> s z + shift`.
    pub fn similarity(&self, s: f64, shift: Point) -> Result<DiskTriple, GeomError> {
        let [a, b, c] = self.disks.map(|d| d.similarity(s, shift));
        validate_triple(&a, &b, &c, &Tolerance::default())
    }

    /// Replaces member `j` (0-based) by `d` without revalidating tangency.
    pub(crate) fn with_member(&self, j: usize, d: GeneralizedDisk, tol: &Tolerance) -> Result<DiskTriple, GeomError> {
        let mut disks = self.disks;
        disks[j] = d;
        validate_triple(&disks[0], &disks[1], &disks[2], tol)
    }
}

/// Validates three generalized disks as a positively oriented tangential triple.
pub fn validate_triple(
    d1: &GeneralizedDisk,
    d2: &GeneralizedDisk,
    d3: &GeneralizedDisk,
    tol: &Tolerance,
) -> Result<DiskTriple, GeomError> {
    let disks = [*d1, *d2, *d3];
    if disks.iter().filter(|d| d.is_half_plane()).count() > 1 {
        return Err(GeomError::TwoHalfPlanes);
    }
    let q = [
        tangency_point(d2, d3, tol)?,
        tangency_point(d3, d1, tol)?,
        tangency_point(d1, d2, tol)?,
    ];
    let area = signed_area(q[0], q[1], q[2]);
    if !(area > 0.0) {
        return Err(GeomError::NotPositivelyOriented { area });
    }
    let quad = CurvatureQuadruple::from_members(d1.curvature(), d2.curvature(), d3.curvature())
        .map_err(|_| GeomError::DegenerateTriple)?;
    Ok(DiskTriple { disks, q, quad })
}

/// Builds the standard triple with the given member curvatures: the first
/// disk centred at the origin, the second on the positive real axis and the
/// third above it.
pub fn triple_from_curvatures(a: f64, b: f64, c: f64) -> Result<DiskTriple, GeomError> {
    for k in [a, b, c] {
        if !(k > 0.0 && k.is_finite()) {
            return Err(GeomError::InvalidDisk(format!("curvature {k}")));
        }
    }
    let (r1, r2, r3) = (1.0 / a, 1.0 / b, 1.0 / c);
    let d12 = r1 + r2;
    let d13 = r1 + r3;
    let d23 = r2 + r3;
    let x = (d13 * d13 - d23 * d23 + d12 * d12) / (2.0 * d12);
    let y = (d13 * d13 - x * x).max(0.0).sqrt();
    let d1 = GeneralizedDisk::disk(pt(0.0, 0.0), r1)?;
    let d2 = GeneralizedDisk::disk(pt(d12, 0.0), r2)?;
    let d3 = GeneralizedDisk::disk(pt(x, y), r3)?;
    validate_triple(&d1, &d2, &d3, &Tolerance::default())
}

fn circumcircle(a: Point, b: Point, c: Point) -> Option<(Point, f64)> {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * cross(ab, ac);
    let scale = ab.norm_sqr().max(ac.norm_sqr());
    if d.abs() <= 1e-14 * scale {
        return None;
    }
    let ux = (ac.im * ab.norm_sqr() - ab.im * ac.norm_sqr()) / d;
    let uy = (ab.re * ac.norm_sqr() - ac.re * ab.norm_sqr()) / d;
    let u = pt(ux, uy);
    Some((a + u, u.norm()))
}

/// The disk whose boundary passes through the three tangency points.
pub fn circumscribed_disk(t: &DiskTriple) -> Result<GeneralizedDisk, GeomError> {
    circumscribed_from_points(t.q[0], t.q[1], t.q[2])
}

/// Circum-disk of three points.
pub fn circumscribed_from_points(a: Point, b: Point, c: Point) -> Result<GeneralizedDisk, GeomError> {
    let (center, radius) = circumcircle(a, b, c).ok_or(GeomError::DegenerateTriple)?;
    GeneralizedDisk::disk(center, radius)
}

/// Residual of external tangency between a candidate disk `(z, r)` and `d`.
fn tangency_residual(d: &GeneralizedDisk, z: Point, r: f64) -> f64 {
    match *d {
        GeneralizedDisk::Disk { center, radius } => (z - center).norm() - (r + radius),
        GeneralizedDisk::HalfPlane { normal, offset } => dot(normal, z) - offset - r,
    }
}

/// Intersections of the circles `|z - c1| = s1` and `|z - c2| = s2`.
fn circle_intersections(c1: Point, s1: f64, c2: Point, s2: f64) -> Option<[Point; 2]> {
    let d = (c2 - c1).norm();
    if d == 0.0 {
        return None;
    }
    let a = (s1 * s1 - s2 * s2 + d * d) / (2.0 * d);
    let h2 = s1 * s1 - a * a;
    let h = h2.max(0.0).sqrt();
    let e = (c2 - c1) / d;
    let base = c1 + e * a;
    let perp = e * Complex64::i();
    Some([base + perp * h, base - perp * h])
}

/// The disk inside the ideal triangle tangent to all three members.
pub fn inscribed_disk(t: &DiskTriple) -> Result<GeneralizedDisk, GeomError> {
    let k_in = t.quad.inscribed_curvature();
    let r = 1.0 / k_in;
    let disks = &t.disks;
    // Seed from the two members with the largest radii (half-planes count as infinite).
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| {
        let ri = disks[i].radius().unwrap_or(f64::INFINITY);
        let rj = disks[j].radius().unwrap_or(f64::INFINITY);
        rj.partial_cmp(&ri).unwrap()
    });
    let candidates: Vec<Point> = match (disks[order[0]], disks[order[1]]) {
        (GeneralizedDisk::HalfPlane { normal, offset }, GeneralizedDisk::Disk { center, radius }) => {
            // Points at distance r from the line on the disk side, and r + radius from the centre.
            let foot = center - normal * (dot(normal, center) - offset);
            let line_pt = foot + normal * r;
            let along = Complex64::i() * normal;
            let dperp = dot(normal, center - line_pt);
            let s = r + radius;
            let h = (s * s - dperp * dperp).max(0.0).sqrt();
            let base = line_pt + along * dot(along, center - line_pt);
            vec![base + along * h, base - along * h]
        }
        (GeneralizedDisk::Disk { center: c1, radius: r1 }, GeneralizedDisk::Disk { center: c2, radius: r2 }) => {
            circle_intersections(c1, r + r1, c2, r + r2).ok_or(GeomError::NumericBreakdown { residual: f64::NAN })?.to_vec()
        }
        _ => return Err(GeomError::TwoHalfPlanes),
    };
    let third = &disks[order[2]];
    let mut z = candidates
        .iter()
        .copied()
        .min_by(|a, b| {
            tangency_residual(third, *a, r).abs().partial_cmp(&tangency_residual(third, *b, r).abs()).unwrap()
        })
        .unwrap();
    // Gauss-Newton polish on all three tangency constraints.
    for _ in 0..3 {
        let mut jtj = [[0.0f64; 2]; 2];
        let mut jtr = [0.0f64; 2];
        for d in disks {
            let res = tangency_residual(d, z, r);
            let g = match *d {
                GeneralizedDisk::Disk { center, .. } => {
                    let v = z - center;
                    v / v.norm()
                }
                GeneralizedDisk::HalfPlane { normal, .. } => normal,
            };
            let gv = [g.re, g.im];
            for a in 0..2 {
                for b in 0..2 {
                    jtj[a][b] += gv[a] * gv[b];
                }
                jtr[a] += gv[a] * res;
            }
        }
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dx = (jtj[1][1] * jtr[0] - jtj[0][1] * jtr[1]) / det;
        let dy = (jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det;
        z -= pt(dx, dy);
    }
    let residual = disks.iter().map(|d| tangency_residual(d, z, r).abs()).fold(0.0, f64::max);
    if residual > 1e-6 * r || !residual.is_finite() {
        return Err(GeomError::NumericBreakdown { residual });
    }
    if let Some(dev) = descartes_center_deviation(t, z) {
        if dev > 1e-6 * t.scale() {
            return Err(GeomError::NumericBreakdown { residual: dev });
        }
    }
    GeneralizedDisk::disk(z, r)
}

/// Distance from `z` to the nearest root of the complex Descartes relation
/// for the inscribed centre. `None` when a member is a half-plane.
pub fn descartes_center_deviation(t: &DiskTriple, z: Point) -> Option<f64> {
    if !t.all_disks() {
        return None;
    }
    let k: Vec<f64> = t.disks.iter().map(|d| d.curvature()).collect();
    let c: Vec<Point> = t.disks.iter().map(|d| d.center().unwrap()).collect();
    let k4 = t.quad.inscribed_curvature();
    let lin = c[0] * k[0] + c[1] * k[1] + c[2] * k[2];
    let prod = c[0] * c[1] * (k[0] * k[1]) + c[1] * c[2] * (k[1] * k[2]) + c[0] * c[2] * (k[0] * k[2]);
    let root = prod.sqrt() * 2.0;
    let z1 = (lin + root) / k4;
    let z2 = (lin - root) / k4;
    Some((z - z1).norm().min((z - z2).norm()))
}

/// Area of the triangle spanned by the three member centres.
pub fn triangle_area(t: &DiskTriple) -> Result<f64, GeomError> {
    let c: Vec<Point> = t.disks.iter().map(|d| d.center().ok_or(GeomError::HalfPlanePresent)).collect::<Result<_, _>>()?;
    Ok(signed_area(c[0], c[1], c[2]).abs())
}

/// A Möbius map `z -> (a w + b)/(c w + d)` where `w = z` or `w = conj(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    /// Orientation-reversing maps conjugate their argument first.
    pub reversing: bool,
}

/// Image of a circle under a Möbius map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CircleImage {
    Circle { center: Point, radius: f64 },
    /// A line through `point` with unit direction `direction`.
    Line { point: Point, direction: Point },
}

/// Image of a generalized disk under a Möbius map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MappedRegion {
    Region(GeneralizedDisk),
    /// The exterior of the closed disk `|z - center| <= radius`, including ∞.
    Exterior { center: Point, radius: f64 },
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64, reversing: bool) -> Result<Self, GeomError> {
        let m = MobiusMap { a, b, c, d, reversing };
        if m.det().norm() == 0.0 {
            return Err(GeomError::SingularMap);
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        MobiusMap { a: one, b: zero, c: zero, d: one, reversing: false }
    }

    /// Inversion in the circle `|z - center| = radius`.
    pub fn inversion(center: Point, radius: f64) -> Self {
        MobiusMap {
            a: center,
            b: Complex64::new(radius * radius - center.norm_sqr(), 0.0),
            c: Complex64::new(1.0, 0.0),
            d: -center.conj(),
            reversing: true,
        }
    }

    /// Reflection in the line through `point` with direction `direction`.
    pub fn reflection(point: Point, direction: Point) -> Self {
        let e = direction / direction.norm();
        let e2 = e * e;
        MobiusMap {
            a: e2,
            b: point - e2 * point.conj(),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
            reversing: true,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        let (oa, ob, oc, od) = if self.reversing {
            (other.a.conj(), other.b.conj(), other.c.conj(), other.d.conj())
        } else {
            (other.a, other.b, other.c, other.d)
        };
        MobiusMap {
            a: self.a * oa + self.b * oc,
            b: self.a * ob + self.b * od,
            c: self.c * oa + self.d * oc,
            d: self.c * ob + self.d * od,
            reversing: self.reversing ^ other.reversing,
        }
    }

    pub fn inverse(&self) -> MobiusMap {
        let (a, b, c, d) = (self.d, -self.b, -self.c, self.a);
        if self.reversing {
            MobiusMap { a: a.conj(), b: b.conj(), c: c.conj(), d: d.conj(), reversing: true }
        } else {
            MobiusMap { a, b, c, d, reversing: false }
        }
    }

    fn pre(&self, z: Point) -> Point {
        if self.reversing {
            z.conj()
        } else {
            z
        }
    }

    /// Image of a finite point; `None` when it is sent to ∞.
    pub fn apply(&self, z: Point) -> Option<Point> {
        let w = self.pre(z);
        let den = self.c * w + self.d;
        if den.norm() == 0.0 {
            return None;
        }
        Some((self.a * w + self.b) / den)
    }

    /// Image of ∞; `None` when ∞ is fixed.
    pub fn apply_infinity(&self) -> Option<Point> {
        if self.c.norm() == 0.0 {
            None
        } else {
            Some(self.a / self.c)
        }
    }

    /// The point sent to ∞, if finite.
    pub fn pole(&self) -> Option<Point> {
        if self.c.norm() == 0.0 {
            return None;
        }
        let p = -self.d / self.c;
        Some(if self.reversing { p.conj() } else { p })
    }

    /// Image of the circle `|z - center| = radius`, computed by closed-form
    /// decomposition into translation, inversion and similarity.
    pub fn map_circle(&self, center: Point, radius: f64) -> CircleImage {
        let m = self.pre(center);
        if self.c.norm() == 0.0 {
            let k = self.a / self.d;
            return CircleImage::Circle { center: (self.a * m + self.b) / self.d, radius: radius * k.norm() };
        }
        // f(w) = a/c - det/(c^2 (w + d/c))
        let shift = self.d / self.c;
        let mp = m + shift;
        let k = -self.det() / (self.c * self.c);
        let denom = mp.norm_sqr() - radius * radius;
        let tail = self.a / self.c;
        if denom.abs() <= 1e-14 * radius * radius.max(mp.norm()) {
            // Circle through the pole maps to a line; take two other points of it.
            let p1 = self.apply(center + (center - self.pole().unwrap_or(center)));
            let dir = Complex64::i() * (center - self.pole().unwrap_or(center));
            let p2 = self.apply(center + dir);
            if let (Some(p1), Some(p2)) = (p1, p2) {
                let d = p2 - p1;
                return CircleImage::Line { point: p1, direction: d / d.norm() };
            }
            return CircleImage::Line { point: tail, direction: Complex64::new(1.0, 0.0) };
        }
        let inv_center = mp.conj() / denom;
        let inv_radius = radius / denom.abs();
        CircleImage::Circle { center: inv_center * k + tail, radius: inv_radius * k.norm() }
    }

    /// Image of a generalized disk, reporting images that contain ∞.
    pub fn map_region(&self, disk: &GeneralizedDisk) -> Result<MappedRegion, GeomError> {
        match *disk {
            GeneralizedDisk::Disk { center, radius } => {
                let inside_pole = self.pole().map(|p| (p - center).norm() < radius);
                match self.map_circle(center, radius) {
                    CircleImage::Circle { center: c, radius: r } => {
                        if inside_pole == Some(true) {
                            Ok(MappedRegion::Exterior { center: c, radius: r })
                        } else {
                            Ok(MappedRegion::Region(GeneralizedDisk::disk(c, r)?))
                        }
                    }
                    CircleImage::Line { point, direction } => {
                        let probe = self.apply(center).ok_or(GeomError::UnrepresentableImage)?;
                        Ok(MappedRegion::Region(half_plane_containing(point, direction, probe)?))
                    }
                }
            }
            GeneralizedDisk::HalfPlane { normal, offset } => {
                let base = normal * offset;
                let inside = base - normal;
                let along = Complex64::i() * normal;
                let probe = match self.apply(inside) {
                    Some(p) => p,
                    None => return Err(GeomError::UnrepresentableImage),
                };
                let w0 = self.apply(base);
                let w1 = self.apply(base + along);
                let winf = self.apply_infinity();
                let pts: Vec<Point> = [w0, w1, winf].into_iter().flatten().collect();
                let far = self.apply(base - along);
                match (pts.len(), winf) {
                    (3, Some(_)) => {
                        let (c, r) = circumcircle(pts[0], pts[1], pts[2]).ok_or(GeomError::UnrepresentableImage)?;
                        if (probe - c).norm() < r {
                            Ok(MappedRegion::Region(GeneralizedDisk::disk(c, r)?))
                        } else {
                            Ok(MappedRegion::Exterior { center: c, radius: r })
                        }
                    }
                    _ => {
                        // ∞ stays on the boundary: the image is a half-plane.
                        let a = w0.or(far).ok_or(GeomError::UnrepresentableImage)?;
                        let b = w1.or(far).ok_or(GeomError::UnrepresentableImage)?;
                        let d = b - a;
                        Ok(MappedRegion::Region(half_plane_containing(a, d / d.norm(), probe)?))
                    }
                }
            }
        }
    }
}

fn half_plane_containing(point: Point, direction: Point, probe: Point) -> Result<GeneralizedDisk, GeomError> {
    let mut normal = direction * Complex64::i();
    if dot(normal, probe - point) > 0.0 {
        normal = -normal;
    }
    GeneralizedDisk::half_plane(normal, dot(normal, point))
}

/// Image of a generalized disk; fails when the image contains ∞ in its interior.
pub fn invert(m: &MobiusMap, d: &GeneralizedDisk) -> Result<GeneralizedDisk, GeomError> {
    match m.map_region(d)? {
        MappedRegion::Region(r) => Ok(r),
        MappedRegion::Exterior { .. } => Err(GeomError::UnrepresentableImage),
    }
}
