//! Small dense helpers on top of nalgebra.

use nalgebra::{DVector, Matrix3, Rotation3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::Vector;

/// Gram–Schmidt with one re-orthogonalization pass. Vectors whose residual
/// falls below `eps` are dropped.
pub fn orthonormalize(vs: &[Vector], eps: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vs {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&r);
                r -= q * c;
            }
        }
        let nr = r.norm();
        if nr > eps {
            out.push(r / nr);
        }
    }
    out
}

/// Orthonormal basis of the orthogonal complement of an orthonormal `basis` in R^n.
pub fn complement(basis: &[Vector], n: usize) -> Vec<Vector> {
    let mut all = basis.to_vec();
    let start = all.len();
    for i in 0..n {
        if all.len() == n {
            break;
        }
        let mut r = DVector::from_element(n, 0.0);
        r[i] = 1.0;
        for _ in 0..2 {
            for q in &all {
                let c = q.dot(&r);
                r -= q * c;
            }
        }
        let nr = r.norm();
        if nr > 1e-6 {
            all.push(r / nr);
        }
    }
    all.split_off(start)
}

/// Orthogonal projection of `v` onto the span of an orthonormal basis.
pub fn project(v: &Vector, basis: &[Vector]) -> Vector {
    let mut out = DVector::from_element(v.len(), 0.0);
    for q in basis {
        out += q * q.dot(v);
    }
    out
}

/// Coordinates of `v` in an orthonormal basis.
pub fn coords(v: &Vector, basis: &[Vector]) -> Vector {
    DVector::from_iterator(basis.len(), basis.iter().map(|q| q.dot(v)))
}

/// Unit vector orthogonal to `d - 1` vectors in R^d, if they are independent.
pub fn normal_of(rows: &[Vector], d: usize, eps: f64) -> Option<Vector> {
    let q = orthonormalize(rows, eps);
    if q.len() + 1 != d {
        return None;
    }
    complement(&q, d).into_iter().next()
}

pub fn to3(v: &Vector) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

pub fn from3(v: &Vector3<f64>) -> Vector {
    DVector::from_column_slice(v.as_slice())
}

/// Rotation exp([ω]×).
pub fn rotation_exp(omega: [f64; 3]) -> Matrix3<f64> {
    *Rotation3::new(Vector3::new(omega[0], omega[1], omega[2])).matrix()
}

/// Rotation by the smallest angle taking unit `a` to unit `b` (applied to `v`).
pub fn rotate_minimal(a: &Vector3<f64>, b: &Vector3<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    let k = a.cross(b);
    let s = k.norm();
    let c = a.dot(b);
    if s < 1e-15 {
        return *v;
    }
    let k = k / s;
    v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c))
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    loop {
        let v = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let nv = v.norm();
        if nv > 1e-12 {
            return v / nv;
        }
    }
}

/// Uniformly random k-dimensional subspace, as an orthonormal basis.
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<Vector> {
    loop {
        let vs: Vec<Vector> = (0..k).map(|_| random_unit(rng, n)).collect();
        let q = orthonormalize(&vs, 1e-8);
        if q.len() == k {
            return q;
        }
    }
}

/// Orthogonal projector onto the span of an orthonormal basis.
pub fn projector(basis: &[Vector], n: usize) -> nalgebra::DMatrix<f64> {
    let mut p = nalgebra::DMatrix::zeros(n, n);
    for q in basis {
        p += q * q.transpose();
    }
    p
}
