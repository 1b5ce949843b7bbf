//! Polytopes in V = R^n (n ≤ 6), convex hulls, H-representations,
//! Euclidean projection and Hausdorff distance, and test families.

mod hull;
mod project;
pub mod sequence;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::TOL;

pub use project::{project_onto_hull, Projection, GAP_TOL, MAX_PROJECTION_ITERS};
pub use sequence::{FamilySpec, HeightSchedule, LimitBody, PolytopeSequence};

/// A point or direction in V.
pub type Vector = DVector<f64>;

/// Largest ambient dimension handled by the brute-force routines.
pub const MAX_DIM: usize = 6;

/// A facet within the affine hull: `normal · x ≤ offset`, `normal` unit and
/// parallel to the affine hull.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub normal: Vector,
    pub offset: f64,
    pub vertices: Vec<usize>,
}

/// Convex polytope stored by vertices and facets, possibly lower-dimensional.
///
/// For `affine_dim < ambient_dim` the facets live inside the affine hull and
/// `complement` holds an orthonormal basis of the normal space of that hull.
#[derive(Clone, Debug)]
pub struct Polytope {
    ambient_dim: usize,
    vertices: Vec<Vector>,
    facets: Vec<Facet>,
    affine_dim: usize,
    origin: Vector,
    span: Vec<Vector>,
    complement: Vec<Vector>,
}

impl Polytope {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }
    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }
    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }
    /// A point of the affine hull (vertex centroid).
    pub fn origin(&self) -> &Vector {
        &self.origin
    }
    /// Orthonormal basis of the direction space of the affine hull.
    pub fn span(&self) -> &[Vector] {
        &self.span
    }
    /// Orthonormal basis of the orthogonal complement of `span`.
    pub fn complement(&self) -> &[Vector] {
        &self.complement
    }
    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim == self.ambient_dim
    }

    /// Largest vertex distance from the centroid, at least 1. Used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v - &self.origin).norm())
            .fold(1.0, f64::max)
    }

    pub fn support(&self, x: &Vector) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn translate(&self, t: &Vector) -> Polytope {
        let mut p = self.clone();
        for v in &mut p.vertices {
            *v += t;
        }
        for f in &mut p.facets {
            f.offset += f.normal.dot(t);
        }
        p.origin += t;
        p
    }

    /// Dilation about the coordinate origin; `s = 0` collapses to a point.
    pub fn scale_by(&self, s: f64) -> Result<Polytope> {
        if s <= 0.0 {
            let pts: Vec<Vector> = self.vertices.iter().map(|v| v * s).collect();
            return convex_hull(&pts);
        }
        let mut p = self.clone();
        for v in &mut p.vertices {
            *v *= s;
        }
        for f in &mut p.facets {
            f.offset *= s;
        }
        p.origin *= s;
        Ok(p)
    }

    /// Image under x ↦ M x + t, recomputed as a hull.
    pub fn affine_image(&self, m: &nalgebra::DMatrix<f64>, t: &Vector) -> Result<Polytope> {
        let pts: Vec<Vector> = self.vertices.iter().map(|v| m * v + t).collect();
        convex_hull(&pts)
    }

    pub fn reflect(&self) -> Polytope {
        let pts: Vec<Vector> = self.vertices.iter().map(|v| -v).collect();
        convex_hull(&pts).expect("reflection of a valid polytope")
    }

    /// Membership with tolerance.
    pub fn contains(&self, x: &Vector) -> bool {
        let eps = TOL * self.scale();
        for c in &self.complement {
            if c.dot(&(x - &self.origin)).abs() > eps {
                return false;
            }
        }
        if self.affine_dim == 0 {
            return (x - &self.vertices[0]).norm() <= eps;
        }
        self.facets.iter().all(|f| f.normal.dot(x) <= f.offset + eps)
    }

    /// Axis-parallel box `[0, a_1] × … × [0, a_n]`.
    pub fn boxed(edges: &[f64]) -> Result<Polytope> {
        let n = edges.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::UnsupportedDimension(format!("box of dimension {n}")));
        }
        let pts: Vec<Vector> = (0..1usize << n)
            .map(|mask| {
                DVector::from_iterator(
                    n,
                    (0..n).map(|i| if mask >> i & 1 == 1 { edges[i] } else { 0.0 }),
                )
            })
            .collect();
        convex_hull(&pts)
    }

    pub fn cube(n: usize) -> Result<Polytope> {
        Polytope::boxed(&vec![1.0; n])
    }

    /// conv{0, e_1, …, e_n}.
    pub fn simplex(n: usize) -> Result<Polytope> {
        let mut pts = vec![DVector::zeros(n)];
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            pts.push(e);
        }
        convex_hull(&pts)
    }

    /// Index of the vertex at coordinates `x`.
    pub fn vertex_index(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: x.len() });
        }
        let x = DVector::from_column_slice(x);
        self.vertices
            .iter()
            .position(|v| (v - &x).norm() <= 1e-7 * self.scale())
            .ok_or_else(|| Error::InvalidParameter(format!("{:?} is not a vertex", x.as_slice())))
    }

    pub fn to_file(&self) -> PolytopeFile {
        PolytopeFile {
            dim: self.ambient_dim,
            vertices: self.vertices.iter().map(|v| v.iter().copied().collect()).collect(),
        }
    }
}

/// JSON form `{"dim": n, "vertices": [[...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolytopeFile {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
}

impl PolytopeFile {
    pub fn to_polytope(&self) -> Result<Polytope> {
        let pts = self
            .vertices
            .iter()
            .map(|v| {
                if v.len() != self.dim {
                    Err(Error::DimensionMismatch { expected: self.dim, found: v.len() })
                } else {
                    Ok(DVector::from_column_slice(v))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        convex_hull(&pts)
    }
}

/// Polytope input accepted in configs: vertex list, H-representation, or a box.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PolytopeSpec {
    Vertices(PolytopeFile),
    HRep { normals: Vec<Vec<f64>>, offsets: Vec<f64> },
    Box {
        #[serde(rename = "box")]
        edges: Vec<f64>,
    },
    Simplex { simplex: usize },
}

impl PolytopeSpec {
    pub fn build(&self) -> Result<Polytope> {
        match self {
            PolytopeSpec::Vertices(f) => f.to_polytope(),
            PolytopeSpec::HRep { normals, offsets } => {
                let ns: Vec<Vector> = normals.iter().map(|v| DVector::from_column_slice(v)).collect();
                hrep_polytope(&ns, offsets)
            }
            PolytopeSpec::Box { edges } => Polytope::boxed(edges),
            PolytopeSpec::Simplex { simplex } => Polytope::simplex(*simplex),
        }
    }
}

fn validate_points(points: &[Vector]) -> Result<usize> {
    let first = points.first().ok_or_else(|| Error::EmptyInput("point set".into()))?;
    let n = first.len();
    if n == 0 || n > MAX_DIM {
        return Err(Error::UnsupportedDimension(format!("ambient dimension {n}")));
    }
    for p in points {
        if p.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.len() });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinates".into()));
        }
    }
    Ok(n)
}

/// Convex hull of a finite point set. Degenerate inputs give lower-dimensional
/// polytopes; interior and duplicate points are dropped.
pub fn convex_hull(points: &[Vector]) -> Result<Polytope> {
    let n = validate_points(points)?;
    let scale = points
        .iter()
        .map(|p| (p - &points[0]).norm())
        .fold(1.0, f64::max);
    let eps = TOL * scale;

    let mut pts: Vec<Vector> = Vec::new();
    for p in points {
        if !pts.iter().any(|q| (q - p).norm() <= eps) {
            pts.push(p.clone());
        }
    }
    let origin = pts.iter().fold(DVector::zeros(n), |acc, p| acc + p) / pts.len() as f64;

    // greedy affine basis: repeatedly take the point farthest from the current span
    let mut span: Vec<Vector> = Vec::new();
    loop {
        let mut best: Option<(f64, Vector)> = None;
        for p in &pts {
            let d = p - &origin;
            let r = &d - linalg::project(&d, &span);
            let nr = r.norm();
            if best.as_ref().map_or(true, |b| nr > b.0) {
                best = Some((nr, r));
            }
        }
        match best {
            Some((nr, r)) if nr > eps && span.len() < n => {
                let mut q = linalg::orthonormalize(&[span.clone(), vec![r / nr]].concat(), 1e-12);
                span = std::mem::take(&mut q);
            }
            _ => break,
        }
    }
    let d = span.len();
    let complement = linalg::complement(&span, n);
    let local: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| {
            let c = p - &origin;
            span.iter().map(|q| q.dot(&c)).collect()
        })
        .collect();

    let (local_facets, vertex_flags) = match d {
        0 => (Vec::new(), vec![true; 1]),
        1 => {
            let (imin, imax) = argminmax(&local, 0);
            let mut flags = vec![false; pts.len()];
            flags[imin] = true;
            flags[imax] = true;
            let facets = vec![(vec![-1.0], -local[imin][0]), (vec![1.0], local[imax][0])];
            (facets, flags)
        }
        _ => {
            let facets = if d == 3 && pts.len() > 32 {
                hull::facets_incremental3(&local, eps)
            } else {
                hull::facets_brute(&local, d, eps)
            };
            let flags = hull::vertex_flags(&local, &facets, d, eps);
            (facets, flags)
        }
    };

    let mut index_map = vec![usize::MAX; pts.len()];
    let mut vertices = Vec::new();
    for (i, keep) in vertex_flags.iter().enumerate() {
        if *keep {
            index_map[i] = vertices.len();
            vertices.push(pts[i].clone());
        }
    }
    let mut facets: Vec<Facet> = local_facets
        .iter()
        .map(|(nl, c)| {
            let mut normal = DVector::zeros(n);
            for (coef, q) in nl.iter().zip(&span) {
                normal += q * *coef;
            }
            let offset = c + normal.dot(&origin);
            let mut vs: Vec<usize> = local
                .iter()
                .enumerate()
                .filter(|(i, x)| {
                    vertex_flags[*i] && (dot(nl, x) - c).abs() <= eps * 10.0
                })
                .map(|(i, _)| index_map[i])
                .collect();
            vs.sort_unstable();
            Facet { normal, offset, vertices: vs }
        })
        .collect();
    facets.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    let origin = vertices.iter().fold(DVector::zeros(n), |acc, p| acc + p) / vertices.len() as f64;
    Ok(Polytope { ambient_dim: n, vertices, facets, affine_dim: d, origin, span, complement })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn argminmax(local: &[Vec<f64>], axis: usize) -> (usize, usize) {
    let mut imin = 0;
    let mut imax = 0;
    for (i, p) in local.iter().enumerate() {
        if p[axis] < local[imin][axis] {
            imin = i;
        }
        if p[axis] > local[imax][axis] {
            imax = i;
        }
    }
    (imin, imax)
}

/// Polytope `{x : ⟨ξ_i, x⟩ ≤ y_i}` by brute-force vertex enumeration.
/// Unbounded and empty systems give distinct errors.
pub fn hrep_polytope(normals: &[Vector], offsets: &[f64]) -> Result<Polytope> {
    if normals.is_empty() {
        return Err(Error::EmptyInput("constraint list".into()));
    }
    if normals.len() != offsets.len() {
        return Err(Error::DimensionMismatch { expected: normals.len(), found: offsets.len() });
    }
    let n = validate_points(normals)?;
    let mut rows: Vec<(Vector, f64)> = Vec::new();
    for (xi, y) in normals.iter().zip(offsets) {
        if !y.is_finite() {
            return Err(Error::NonFinite("constraint offsets".into()));
        }
        let nx = xi.norm();
        if nx < 1e-14 {
            if *y < 0.0 {
                return Err(Error::Infeasible);
            }
            continue;
        }
        rows.push((xi / nx, y / nx));
    }
    let big = 1e4 * (1.0 + rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max));
    let m = rows.len();
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        rows.push((e.clone(), big));
        rows.push((-e, big));
    }
    let eps = TOL * (1.0 + rows[..m].iter().map(|r| r.1.abs()).fold(0.0, f64::max));
    let mut verts: Vec<Vector> = Vec::new();
    let mut unbounded = false;
    for combo in hull::Combinations::new(rows.len(), n) {
        let a = nalgebra::DMatrix::from_fn(n, n, |r, c| rows[combo[r]].0[c]);
        let b = DVector::from_iterator(n, combo.iter().map(|&i| rows[i].1));
        let lu = a.lu();
        let Some(x) = lu.solve(&b) else { continue };
        if a_det_small(&rows, &combo, n) {
            continue;
        }
        if rows.iter().all(|(xi, y)| xi.dot(&x) <= y + eps * (1.0 + x.norm() * 1e-6)) {
            if combo.iter().any(|&i| i >= m) {
                unbounded = true;
            } else if !verts.iter().any(|v| (v - &x).norm() <= eps * 10.0) {
                verts.push(x);
            }
        }
    }
    if unbounded {
        return Err(Error::Unbounded);
    }
    if verts.is_empty() {
        return Err(Error::Infeasible);
    }
    convex_hull(&verts)
}

fn a_det_small(rows: &[(Vector, f64)], combo: &[usize], n: usize) -> bool {
    let vs: Vec<Vector> = combo.iter().map(|&i| rows[i].0.clone()).collect();
    linalg::orthonormalize(&vs, 1e-9).len() < n
}

/// Hausdorff distance between polytopes: the larger of the two directed
/// distances, each the maximum over vertices of the distance to the other body.
pub fn hausdorff_distance(p: &Polytope, q: &Polytope) -> Result<f64> {
    if p.ambient_dim != q.ambient_dim {
        return Err(Error::DimensionMismatch { expected: p.ambient_dim, found: q.ambient_dim });
    }
    Ok(directed_distance(p, q)?.max(directed_distance(q, p)?))
}

fn directed_distance(p: &Polytope, q: &Polytope) -> Result<f64> {
    let mut best: f64 = 0.0;
    for v in &p.vertices {
        if q.contains(v) {
            continue;
        }
        best = best.max(project_onto_hull(v, &q.vertices)?.distance);
    }
    Ok(best)
}

/// Inscribed polytope of a ball together with its Hausdorff distance to the ball.
#[derive(Clone, Debug)]
pub struct BallApproximant {
    pub polytope: Polytope,
    pub hausdorff_to_ball: f64,
}

/// Hull of `m` quasi-uniform points on the sphere of radius `r` (Fibonacci
/// lattice in R^3, regular polygon in R^2; `m = 4` in R^3 gives the regular
/// tetrahedron).
pub fn ball_approximant(center: &Vector, r: f64, m: usize) -> Result<BallApproximant> {
    let n = center.len();
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidParameter(format!("radius {r}")));
    }
    if r == 0.0 {
        return Ok(BallApproximant { polytope: convex_hull(&[center.clone()])?, hausdorff_to_ball: 0.0 });
    }
    if m < n + 1 {
        return Err(Error::InvalidParameter(format!(
            "{m} points cannot span a full-dimensional body in R^{n}"
        )));
    }
    let dirs: Vec<Vector> = match n {
        2 => (0..m)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / m as f64;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        3 if m == 4 => {
            let s = 1.0 / 3f64.sqrt();
            [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
                .iter()
                .map(|v| DVector::from_vec(v.iter().map(|c| c * s).collect()))
                .collect()
        }
        3 => fibonacci_sphere(m),
        _ => return Err(Error::UnsupportedDimension(format!("ball approximant in R^{n}"))),
    };
    let pts: Vec<Vector> = dirs.iter().map(|u| center + u * r).collect();
    let polytope = convex_hull(&pts)?;
    let inner = polytope
        .facets
        .iter()
        .map(|f| f.offset - f.normal.dot(center))
        .fold(f64::INFINITY, f64::min);
    Ok(BallApproximant { polytope, hausdorff_to_ball: r - inner })
}

/// Fibonacci lattice on S^2.
pub fn fibonacci_sphere(m: usize) -> Vec<Vector> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / m as f64;
            let s = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * i as f64;
            DVector::from_vec(vec![s * t.cos(), s * t.sin(), z])
        })
        .collect()
}

/// Weighted Minkowski combination `Σ w_i P_i` kept in factored form.
#[derive(Clone, Debug)]
pub struct MinkowskiSum {
    pub terms: Vec<(f64, Polytope)>,
}

impl MinkowskiSum {
    pub fn support(&self, x: &Vector) -> f64 {
        self.terms.iter().map(|(w, p)| w * p.support(x)).sum()
    }

    /// Explicit polytope, built by successive pairwise sums and hulls.
    pub fn explicit(&self) -> Result<Polytope> {
        let mut acc: Option<Polytope> = None;
        for (w, p) in &self.terms {
            let scaled = p.scale_by(*w)?;
            acc = Some(match acc {
                None => scaled,
                Some(a) => {
                    let mut pts = Vec::new();
                    for u in a.vertices() {
                        for v in scaled.vertices() {
                            pts.push(u + v);
                        }
                    }
                    convex_hull(&pts)?
                }
            });
        }
        acc.ok_or_else(|| Error::EmptyInput("Minkowski sum".into()))
    }
}

/// A convex body that the valuation can be evaluated on.
#[derive(Clone, Debug)]
pub enum Body {
    Polytope(Polytope),
    Minkowski(MinkowskiSum),
}

impl Body {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Body::Polytope(p) => p.ambient_dim(),
            Body::Minkowski(s) => s.terms.first().map_or(0, |t| t.1.ambient_dim()),
        }
    }
    pub fn support(&self, x: &Vector) -> f64 {
        match self {
            Body::Polytope(p) => p.support(x),
            Body::Minkowski(s) => s.support(x),
        }
    }
}

/// Hausdorff distance of two bodies in R^3 through `sup |h_A − h_B|` on a
/// Fibonacci direction grid refined around the worst direction. A lower bound
/// that converges as the grid is refined.
pub fn support_hausdorff<A, B>(ha: A, hb: B, grid: usize) -> f64
where
    A: Fn(&Vector) -> f64,
    B: Fn(&Vector) -> f64,
{
    let dirs = fibonacci_sphere(grid.max(16));
    let mut best = (0.0, dirs[0].clone());
    for u in dirs {
        let g = (ha(&u) - hb(&u)).abs();
        if g > best.0 {
            best = (g, u);
        }
    }
    let mut step = (4.0 * std::f64::consts::PI / grid as f64).sqrt();
    for _ in 0..30 {
        let u0 = best.1.clone();
        let frame = linalg::complement(&[u0.clone()], 3);
        let mut improved = false;
        for (a, b) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let v = &u0 + &frame[0] * (a * step) + &frame[1] * (b * step);
            let v = &v / v.norm();
            let g = (ha(&v) - hb(&v)).abs();
            if g > best.0 {
                best = (g, v);
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best.0
}
