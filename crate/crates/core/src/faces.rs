//! Face lattice, k-volumes, exterior angles and integration over them.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, Polytope, Vector};
use crate::kernels::Kernel;
use crate::linalg;
use crate::quadrature::{adaptive_gauss, sample_sphere, ARC_REL_TOL};
use crate::TOL;

/// A k-face with its k-volume and an orthonormal basis of its direction space F̄.
#[derive(Clone, Debug)]
pub struct Face {
    pub dim: usize,
    pub vertices: Vec<usize>,
    pub kvol: f64,
    /// Vertex centroid, a relative-interior point.
    pub point: Vector,
    pub span: Vec<Vector>,
}

fn affine_rank(p: &Polytope, set: &[usize]) -> usize {
    let v = p.vertices();
    let diffs: Vec<Vector> = set[1..].iter().map(|&i| &v[i] - &v[set[0]]).collect();
    linalg::orthonormalize(&diffs, TOL * p.scale()).len()
}

fn make_face(p: &Polytope, set: Vec<usize>) -> Result<Face> {
    let v = p.vertices();
    let pts: Vec<Vector> = set.iter().map(|&i| v[i].clone()).collect();
    let diffs: Vec<Vector> = pts[1..].iter().map(|q| q - &pts[0]).collect();
    let span = linalg::orthonormalize(&diffs, TOL * p.scale());
    let point = pts.iter().fold(Vector::zeros(p.ambient_dim()), |a, q| a + q) / pts.len() as f64;
    let kvol = volume(&convex_hull(&pts)?);
    Ok(Face { dim: span.len(), vertices: set, kvol, point, span })
}

/// k-dimensional volume of a polytope in its own affine hull (1 for a point).
pub fn volume(p: &Polytope) -> f64 {
    let d = p.affine_dim();
    match d {
        0 => 1.0,
        1 => {
            let u = &p.span()[0];
            let c: Vec<f64> = p.vertices().iter().map(|v| u.dot(v)).collect();
            c.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - c.iter().cloned().fold(f64::INFINITY, f64::min)
        }
        _ => {
            let o = p.origin();
            p.facets()
                .iter()
                .map(|f| {
                    let pts: Vec<Vector> = f.vertices.iter().map(|&i| p.vertices()[i].clone()).collect();
                    let sub = convex_hull(&pts).expect("facet hull");
                    (f.offset - f.normal.dot(o)) * volume(&sub) / d as f64
                })
                .sum()
        }
    }
}

/// All k-faces with positive k-volume. For a lower-dimensional polytope
/// whose affine dimension equals k the polytope itself is returned.
pub fn enumerate_faces(p: &Polytope, k: usize) -> Result<Vec<Face>> {
    let n = p.ambient_dim();
    if k == 0 || k >= n {
        return Err(Error::InvalidFaceDimension { k, n });
    }
    let d = p.affine_dim();
    if k > d {
        return Ok(Vec::new());
    }
    if k == d {
        return Ok(vec![make_face(p, (0..p.vertices().len()).collect())?]);
    }
    let mut level: BTreeSet<Vec<usize>> = p.facets().iter().map(|f| f.vertices.clone()).collect();
    let mut cur = d - 1;
    while cur > k {
        let items: Vec<&Vec<usize>> = level.iter().collect();
        let mut next = BTreeSet::new();
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                let inter: Vec<usize> = items[i].iter().filter(|x| items[j].binary_search(x).is_ok()).copied().collect();
                if inter.len() >= cur && affine_rank(p, &inter) == cur - 1 {
                    next.insert(inter);
                }
            }
        }
        level = next;
        cur -= 1;
    }
    level.into_iter().map(|s| make_face(p, s)).collect()
}

/// Checks that `set` is the vertex set of a face and returns it.
pub fn face_from_vertices(p: &Polytope, set: &[usize]) -> Result<Face> {
    let mut s: Vec<usize> = set.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.is_empty() || s.iter().any(|&i| i >= p.vertices().len()) {
        return Err(Error::NotAFace);
    }
    let k = affine_rank(p, &s);
    if k == p.affine_dim() {
        if s.len() == p.vertices().len() {
            return make_face(p, s);
        }
        return Err(Error::NotAFace);
    }
    if k == 0 {
        return Err(Error::NotAFace);
    }
    if enumerate_faces(p, k)?.iter().any(|f| f.vertices == s) {
        make_face(p, s)
    } else {
        Err(Error::NotAFace)
    }
}

/// Arc `θ ↦ cos θ · start + sin θ · ortho`, θ ∈ [0, width].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Arc {
    pub start: Vec<f64>,
    pub ortho: Vec<f64>,
    pub width: f64,
}

impl Arc {
    pub fn point(&self, theta: f64) -> Vector {
        let (s, c) = theta.sin_cos();
        Vector::from_iterator(self.start.len(), self.start.iter().zip(&self.ortho).map(|(a, b)| c * a + s * b))
    }
}

#[derive(Clone, Debug)]
pub enum RegionShape {
    /// n − k = 1: a subset of {±ν}, each point of mass 1/2.
    Points(Vec<Vector>),
    /// n − k = 2.
    Arc(Arc),
    /// n − k ≥ 3: spherical cone given only by membership.
    Cone,
}

/// Exterior angle γ_F: unit normals n ∈ S(F̄^⊥) with ⟨n, p − x⟩ ≤ 0 for all p ∈ P.
#[derive(Clone, Debug)]
pub struct NormalRegion {
    pub ambient_dim: usize,
    pub face_dim: usize,
    /// Orthonormal basis of F̄^⊥.
    pub basis: Vec<Vector>,
    /// Incident facet normals (and ± normals of a lower-dimensional hull) projected to F̄^⊥.
    pub generators: Vec<Vector>,
    /// Directions `proj(p − x)` that every member must have non-positive product with.
    pub constraints: Vec<Vector>,
    pub shape: RegionShape,
}

impl NormalRegion {
    pub fn contains(&self, u: &Vector) -> bool {
        self.constraints.iter().all(|c| c.dot(u) <= 1e-12)
    }
}

/// The exterior angle of `p` at `face`.
pub fn exterior_angle(p: &Polytope, face: &Face) -> Result<NormalRegion> {
    let n = p.ambient_dim();
    let basis = linalg::complement(&face.span, n);
    let eps = TOL * p.scale();
    let mut constraints: Vec<Vector> = Vec::new();
    for v in p.vertices() {
        let c = linalg::project(&(v - &face.point), &basis);
        let nc = c.norm();
        if nc > eps {
            let c = c / nc;
            if !constraints.iter().any(|q| (q - &c).norm() < 1e-12) {
                constraints.push(c);
            }
        }
    }
    let mut generators: Vec<Vector> = Vec::new();
    for f in p.facets() {
        if face.vertices.iter().all(|i| f.vertices.binary_search(i).is_ok()) {
            let g = linalg::project(&f.normal, &basis);
            if g.norm() > 1e-12 {
                generators.push(&g / g.norm());
            }
        }
    }
    for c in p.complement() {
        generators.push(c.clone());
        generators.push(-c);
    }
    let shape = match basis.len() {
        1 => {
            let nu = &basis[0];
            let pts = [nu.clone(), -nu]
                .into_iter()
                .filter(|u| constraints.iter().all(|c| c.dot(u) <= 1e-12))
                .collect();
            RegionShape::Points(pts)
        }
        2 => RegionShape::Arc(arc_from_constraints(&basis, &constraints)),
        _ => RegionShape::Cone,
    };
    Ok(NormalRegion { ambient_dim: n, face_dim: face.dim, basis, generators, constraints, shape })
}

/// Polar of the cone spanned by the constraint directions, in a 2-plane.
fn arc_from_constraints(basis: &[Vector], constraints: &[Vector]) -> Arc {
    let to_vec = |v: &Vector| v.iter().copied().collect::<Vec<f64>>();
    let point = |ang: f64| &basis[0] * ang.cos() + &basis[1] * ang.sin();
    if constraints.is_empty() {
        return Arc { start: to_vec(&basis[0]), ortho: to_vec(&basis[1]), width: TAU };
    }
    let mut angs: Vec<f64> = constraints
        .iter()
        .map(|c| c.dot(&basis[1]).atan2(c.dot(&basis[0])).rem_euclid(TAU))
        .collect();
    angs.sort_by(f64::total_cmp);
    // the cone of constraints is the complement of the largest angular gap
    let m = angs.len();
    let (mut gap, mut after) = (TAU - (angs[m - 1] - angs[0]), 0usize);
    for i in 1..m {
        let g = angs[i] - angs[i - 1];
        if g > gap {
            gap = g;
            after = i;
        }
    }
    let cone_start = angs[after];
    let cone_end = angs[(after + m - 1) % m];
    let span = TAU - gap;
    let width = (PI - span).max(0.0);
    let s = cone_end + PI / 2.0;
    let start = point(s);
    let ortho = point(s + PI / 2.0);
    let _ = cone_start;
    Arc { start: to_vec(&start), ortho: to_vec(&ortho), width }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureMethod {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Measure {
    pub value: f64,
    pub std_error: f64,
}

/// Normalized measure of the exterior angle (the full sphere has mass one).
pub fn region_measure(r: &NormalRegion, method: MeasureMethod) -> Result<Measure> {
    match (&r.shape, method) {
        (RegionShape::Points(p), _) => Ok(Measure { value: 0.5 * p.len() as f64, std_error: 0.0 }),
        (RegionShape::Arc(a), _) => Ok(Measure { value: a.width / TAU, std_error: 0.0 }),
        (RegionShape::Cone, _) if r.constraints.is_empty() => Ok(Measure { value: 1.0, std_error: 0.0 }),
        (RegionShape::Cone, MeasureMethod::Exact) => Err(Error::UnsupportedDimension(format!(
            "exact exterior-angle measure needs n - k <= 2 (here {}); use Monte Carlo",
            r.basis.len()
        ))),
        (RegionShape::Cone, MeasureMethod::MonteCarlo { samples, seed }) => {
            let s = monte_carlo(r, samples, seed, |_| 1.0)?;
            Ok(Measure { value: s.value, std_error: s.error })
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Quadrature error estimate, or the standard error for Monte Carlo.
    pub error: f64,
}

fn monte_carlo<F: FnMut(&Vector) -> f64>(r: &NormalRegion, samples: usize, seed: u64, mut f: F) -> Result<Integral> {
    if samples < 2 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least 2 samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let u = sample_sphere(&mut rng, &r.basis);
        let x = if r.contains(&u) { f(&u) } else { 0.0 };
        s += x;
        s2 += x * x;
    }
    let nf = samples as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok(Integral { value: mean, error: (var / nf).sqrt() })
}

/// ∫_{γ_F} f(F̄, l) dl with the normalized measure.
pub fn integrate_kernel_over_region(
    f: &Kernel,
    face: &Face,
    region: &NormalRegion,
    method: MeasureMethod,
) -> Result<Integral> {
    if f.n() != region.ambient_dim || f.k() != face.dim {
        return Err(Error::DimensionMismatch { expected: f.k(), found: face.dim });
    }
    match &region.shape {
        RegionShape::Points(pts) => {
            let v: f64 = pts.iter().map(|u| f.eval(&face.span, u)).sum();
            Ok(Integral { value: 0.5 * v, error: 0.0 })
        }
        RegionShape::Arc(a) => {
            if a.width <= 0.0 {
                return Ok(Integral { value: 0.0, error: 0.0 });
            }
            let q = adaptive_gauss(|t| f.eval(&face.span, &a.point(t)), 0.0, a.width, ARC_REL_TOL)?;
            Ok(Integral { value: q.value / TAU, error: q.error / TAU })
        }
        // the whole sphere of F̄^⊥ (a body of dimension k): deterministic rule
        RegionShape::Cone if region.constraints.is_empty() => {
            let v = crate::kernels::sphere_mean(&region.basis, |u| f.eval(&face.span, u))?;
            Ok(Integral { value: v, error: 0.0 })
        }
        RegionShape::Cone => match method {
            MeasureMethod::MonteCarlo { samples, seed } => {
                monte_carlo(region, samples, seed, |u| f.eval(&face.span, u))
            }
            MeasureMethod::Exact => Err(Error::UnsupportedDimension(
                "exact integration over exterior angles with n - k >= 3".into(),
            )),
        },
    }
}
