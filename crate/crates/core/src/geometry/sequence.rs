//! Polytope sequences with a known Hausdorff limit.
//!
//! * `bulge`: a helical chain of short edges glued along an edge of P, tilted
//!   by δ against the edge and at height h_m above it.
//! * `ball`: inscribed polytopes of a ball.
//! * `rotation_average`: P_q = Σ_i w_i R_i P for a product Gauss rule with q
//!   nodes per axis on rotation vectors ω ∈ [−s, s]^3 with density
//!   ∝ Π (1 − (ω_j/s)^2)^2. The limit is the body K with
//!   h_K = E[h_{RP}].

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{
    ball_approximant, convex_hull, hausdorff_distance, support_hausdorff, Body, MinkowskiSum, Polytope,
    PolytopeSpec, Vector,
};
use crate::error::{Error, Result};
use crate::faces::{exterior_angle, face_from_vertices, RegionShape};
use crate::linalg::{from3, rotation_exp, to3};
use crate::quadrature::gauss_legendre;

/// m ↦ h_m.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeightSchedule {
    /// h_0 · m^{−p}
    Power { h0: f64, p: f64 },
    /// h_0 · ratio^m
    Geometric { h0: f64, ratio: f64 },
}

impl HeightSchedule {
    pub fn at(&self, m: usize) -> f64 {
        match *self {
            HeightSchedule::Power { h0, p } => h0 * (m.max(1) as f64).powf(-p),
            HeightSchedule::Geometric { h0, ratio } => h0 * ratio.powi(m as i32),
        }
    }
}

fn default_growth() -> usize {
    16
}
fn default_reference() -> usize {
    8
}

/// `{"family": ..., "params": {...}}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum FamilySpec {
    Bulge {
        polytope: PolytopeSpec,
        edge: [Vec<f64>; 2],
        delta: f64,
        segments: usize,
        height: HeightSchedule,
    },
    /// Member m is the hull of `growth · m` Fibonacci points.
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "default_growth")]
        growth: usize,
    },
    /// Member m uses m Gauss nodes per axis.
    RotationAverage {
        polytope: PolytopeSpec,
        spread: f64,
        #[serde(default = "default_reference")]
        reference_order: usize,
    },
}

/// Weighted rotations of the rotation-average rule.
pub type RotationRule = Vec<(f64, Matrix3<f64>)>;

/// Product rule with `q` nodes per axis; weights sum to one.
pub fn rotation_rule(spread: f64, q: usize) -> RotationRule {
    let g = gauss_legendre(q.max(1));
    let mut out = Vec::with_capacity(q * q * q);
    for a in g.iter() {
        for b in g.iter() {
            for c in g.iter() {
                let w: f64 = [a, b, c].iter().map(|(t, w)| w * (1.0 - t * t).powi(2)).product();
                out.push((w, rotation_exp([spread * a.0, spread * b.0, spread * c.0])));
            }
        }
    }
    let total: f64 = out.iter().map(|t| t.0).sum();
    for t in &mut out {
        t.0 /= total;
    }
    out
}

fn rotate(p: &Polytope, r: &Matrix3<f64>) -> Result<Polytope> {
    let m = DMatrix::from_fn(3, 3, |i, j| r[(i, j)]);
    p.affine_image(&m, &DVector::zeros(3))
}

/// Rotated vertex sets with weights, for fast support evaluation.
pub type RotatedVertices = Arc<Vec<(f64, Vec<Vector3<f64>>)>>;

fn rotated_vertices(base: &Polytope, spread: f64, q: usize) -> RotatedVertices {
    let vs: Vec<Vector3<f64>> = base.vertices().iter().map(to3).collect();
    Arc::new(
        rotation_rule(spread, q)
            .into_iter()
            .map(|(w, r)| (w, vs.iter().map(|v| r * v).collect()))
            .collect(),
    )
}

fn weighted_support(terms: &[(f64, Vec<Vector3<f64>>)], x: &Vector3<f64>) -> f64 {
    terms
        .iter()
        .map(|(w, vs)| w * vs.iter().map(|v| v.dot(x)).fold(f64::NEG_INFINITY, f64::max))
        .sum()
}

/// The limit body of a sequence.
#[derive(Clone, Debug)]
pub enum LimitBody {
    Polytope(Polytope),
    Ball { center: Vector, radius: f64 },
    /// E_ν[R·base] for the rotation-average density. Its support function is
    /// evaluated with the rule of order 2·`reference_order`.
    RotationAverage { base: Polytope, spread: f64, reference_order: usize, support_terms: RotatedVertices },
}

impl LimitBody {
    pub fn support(&self, x: &Vector) -> f64 {
        match self {
            LimitBody::Polytope(p) => p.support(x),
            LimitBody::Ball { center, radius } => center.dot(x) + radius * x.norm(),
            LimitBody::RotationAverage { support_terms, .. } => weighted_support(support_terms, &to3(x)),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LimitBody::Polytope(_) => "polytope",
            LimitBody::Ball { .. } => "ball",
            LimitBody::RotationAverage { .. } => "rotation_average",
        }
    }
}

/// A sequence member with its distance to the limit.
#[derive(Clone, Debug)]
pub struct Member {
    pub index: usize,
    pub body: Body,
    pub hausdorff_to_limit: f64,
}

#[derive(Clone, Debug)]
struct Bulge {
    base: Polytope,
    midpoint: Vector3<f64>,
    u0: Vector3<f64>,
    half_length: f64,
    a: Vector3<f64>,
    b: Vector3<f64>,
    width: f64,
    delta: f64,
    segments: usize,
    height: HeightSchedule,
}

impl Bulge {
    fn normal(&self, theta: f64) -> Vector3<f64> {
        self.a * theta.cos() + self.b * theta.sin()
    }

    /// Chain points for height h.
    fn chain(&self, h: f64) -> Result<Vec<Vector3<f64>>> {
        if self.delta == 0.0 {
            let n = self.normal(0.5 * self.width) * h;
            return Ok(vec![
                self.midpoint - self.u0 * self.half_length + n,
                self.midpoint + self.u0 * self.half_length + n,
            ]);
        }
        let s = self.segments;
        let dw = self.width / s as f64;
        let dx = 2.0 * h * (0.5 * dw).sin() / self.delta.tan();
        let reach = 0.5 * s as f64 * dx;
        if reach >= self.half_length {
            return Err(Error::NonConvex(format!(
                "chain of half-length {reach:.3e} does not fit on an edge of half-length {:.3e}; lower the height or raise delta",
                self.half_length
            )));
        }
        Ok((0..=s)
            .map(|j| {
                let x = (j as f64 - 0.5 * s as f64) * dx;
                self.midpoint + self.u0 * x + self.normal(j as f64 * dw) * h
            })
            .collect())
    }

    fn member(&self, m: usize) -> Result<(Polytope, f64)> {
        let h = self.height.at(m);
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("height {h} at m = {m}")));
        }
        let chain = self.chain(h)?;
        let mut pts: Vec<Vector> = self.base.vertices().to_vec();
        pts.extend(chain.iter().map(from3));
        let p = convex_hull(&pts)?;
        if self.delta > 0.0 {
            let tol = 1e-9 * p.scale();
            for q in &chain {
                let qv = from3(q);
                if !p.vertices().iter().any(|v| (v - &qv).norm() <= tol) {
                    return Err(Error::NonConvex("a chain point is not extreme in the hull".into()));
                }
            }
        }
        let d = hausdorff_distance(&p, &self.base)?;
        Ok((p, d))
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Bulge(Box<Bulge>),
    Ball { center: Vector, radius: f64, growth: usize },
    RotationAverage { base: Polytope, spread: f64 },
}

/// A lazily generated sequence of polytopes.
#[derive(Clone, Debug)]
pub struct PolytopeSequence {
    pub spec: FamilySpec,
    kind: Kind,
    limit: LimitBody,
}

impl PolytopeSequence {
    pub fn new(spec: &FamilySpec) -> Result<Self> {
        let (kind, limit) = match spec {
            FamilySpec::Bulge { polytope, edge, delta, segments, height } => {
                let base = polytope.build()?;
                if base.ambient_dim() != 3 || !base.is_full_dimensional() {
                    return Err(Error::UnsupportedDimension("bulge family needs a full-dimensional polytope in R^3".into()));
                }
                if !(delta.is_finite() && *delta >= 0.0) {
                    return Err(Error::InvalidParameter(format!("delta {delta}")));
                }
                if *delta >= PI / 2.0 {
                    return Err(Error::NonConvex(format!("delta {delta} ≥ π/2 folds the chain back")));
                }
                if *segments == 0 {
                    return Err(Error::InvalidParameter("segments must be positive".into()));
                }
                let ids = [base.vertex_index(&edge[0])?, base.vertex_index(&edge[1])?];
                let face = face_from_vertices(&base, &ids)?;
                if face.dim != 1 {
                    return Err(Error::NotAFace);
                }
                let region = exterior_angle(&base, &face)?;
                let RegionShape::Arc(arc) = region.shape else {
                    return Err(Error::Numerical("edge exterior angle is not an arc".into()));
                };
                let (p0, p1) = (to3(&base.vertices()[ids[0]]), to3(&base.vertices()[ids[1]]));
                let width = if arc.width >= TAU - 1e-12 { PI } else { arc.width };
                let bulge = Bulge {
                    midpoint: (p0 + p1) * 0.5,
                    u0: (p1 - p0).normalize(),
                    half_length: 0.5 * (p1 - p0).norm(),
                    a: Vector3::from_column_slice(&arc.start),
                    b: Vector3::from_column_slice(&arc.ortho),
                    width,
                    delta: *delta,
                    segments: *segments,
                    height: *height,
                    base: base.clone(),
                };
                (Kind::Bulge(Box::new(bulge)), LimitBody::Polytope(base))
            }
            FamilySpec::Ball { center, radius, growth } => {
                if center.len() != 3 {
                    return Err(Error::UnsupportedDimension("ball family lives in R^3".into()));
                }
                if !(radius.is_finite() && *radius > 0.0) || *growth == 0 {
                    return Err(Error::InvalidParameter(format!("radius {radius}, growth {growth}")));
                }
                let c = DVector::from_column_slice(center);
                (
                    Kind::Ball { center: c.clone(), radius: *radius, growth: *growth },
                    LimitBody::Ball { center: c, radius: *radius },
                )
            }
            FamilySpec::RotationAverage { polytope, spread, reference_order } => {
                let p = polytope.build()?;
                if p.ambient_dim() != 3 {
                    return Err(Error::UnsupportedDimension("rotation averages live in R^3".into()));
                }
                if !(spread.is_finite() && *spread > 0.0 && *spread < PI) {
                    return Err(Error::InvalidParameter(format!("spread {spread} must lie in (0, π)")));
                }
                if *reference_order < 2 {
                    return Err(Error::InvalidParameter("reference order must be at least 2".into()));
                }
                let c = p.origin().clone();
                let base = p.translate(&-c);
                let support_terms = rotated_vertices(&base, *spread, 2 * reference_order);
                (
                    Kind::RotationAverage { base: base.clone(), spread: *spread },
                    LimitBody::RotationAverage {
                        base,
                        spread: *spread,
                        reference_order: *reference_order,
                        support_terms,
                    },
                )
            }
        };
        Ok(PolytopeSequence { spec: spec.clone(), kind, limit })
    }

    pub fn limit(&self) -> &LimitBody {
        &self.limit
    }

    /// Member m (m ≥ 1) with its Hausdorff distance to the limit.
    pub fn member(&self, m: usize) -> Result<Member> {
        if m == 0 {
            return Err(Error::InvalidParameter("members are indexed from 1".into()));
        }
        match &self.kind {
            Kind::Bulge(b) => {
                let (p, d) = b.member(m)?;
                Ok(Member { index: m, body: Body::Polytope(p), hausdorff_to_limit: d })
            }
            Kind::Ball { center, radius, growth } => {
                let a = ball_approximant(center, *radius, (growth * m).max(4))?;
                Ok(Member { index: m, body: Body::Polytope(a.polytope), hausdorff_to_limit: a.hausdorff_to_ball })
            }
            Kind::RotationAverage { base, spread } => {
                let terms = rotation_rule(*spread, m)
                    .iter()
                    .map(|(w, r)| Ok((*w, rotate(base, r)?)))
                    .collect::<Result<Vec<_>>>()?;
                let fast = rotated_vertices(base, *spread, m);
                let d = support_hausdorff(|x| weighted_support(&fast, &to3(x)), |x| self.limit.support(x), 2000);
                let sum = MinkowskiSum { terms };
                Ok(Member { index: m, body: Body::Minkowski(sum), hausdorff_to_limit: d })
            }
        }
    }

    /// Height h_m of a bulge member, if this is a bulge family.
    pub fn height(&self, m: usize) -> Option<f64> {
        match &self.kind {
            Kind::Bulge(b) => Some(b.height.at(m)),
            _ => None,
        }
    }
}
