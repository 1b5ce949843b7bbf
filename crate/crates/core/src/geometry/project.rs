//! Euclidean projection onto the convex hull of a point set (Wolfe's
//! minimum-norm-point method) with a Frank–Wolfe duality-gap certificate.

use nalgebra::{DMatrix, DVector};

use super::Vector;
use crate::error::{Error, Result};

/// Stop when the duality gap drops below this (scaled by the squared diameter).
pub const GAP_TOL: f64 = 1e-10;
pub const MAX_PROJECTION_ITERS: usize = 100_000;

#[derive(Clone, Debug)]
pub struct Projection {
    pub point: Vector,
    pub distance: f64,
    /// Final Frank–Wolfe gap `max_i ⟨x − y, x − p_i⟩`.
    pub gap: f64,
    pub iterations: usize,
}

/// Nearest point of `conv(points)` to `y`.
pub fn project_onto_hull(y: &Vector, points: &[Vector]) -> Result<Projection> {
    if points.is_empty() {
        return Err(Error::EmptyInput("projection target".into()));
    }
    let q: Vec<Vector> = points.iter().map(|p| p - y).collect();
    let scale2 = q.iter().map(|v| v.norm_squared()).fold(1.0, f64::max);
    let tol = GAP_TOL * scale2;

    let i0 = (0..q.len())
        .min_by(|&a, &b| q[a].norm_squared().total_cmp(&q[b].norm_squared()))
        .expect("nonempty");
    let mut set = vec![i0];
    let mut lam = vec![1.0];
    let mut x = q[i0].clone();

    for iter in 0..MAX_PROJECTION_ITERS {
        let (j, minval) = q
            .iter()
            .enumerate()
            .map(|(i, p)| (i, x.dot(p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        let gap = x.norm_squared() - minval;
        if gap <= tol || set.contains(&j) {
            return Ok(Projection { point: &x + y, distance: x.norm(), gap: gap.max(0.0), iterations: iter });
        }
        set.push(j);
        lam.push(0.0);
        loop {
            let alpha = affine_minimizer(&q, &set);
            if alpha.iter().all(|a| *a > 1e-14) {
                lam = alpha;
                x = combine(&q, &set, &lam);
                break;
            }
            let mut theta = 1.0f64;
            for (l, a) in lam.iter().zip(&alpha) {
                if *a <= 1e-14 && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lam.iter_mut().zip(&alpha) {
                *l += theta * (a - *l);
            }
            let mut k = 0;
            while k < set.len() {
                if lam[k] <= 1e-14 {
                    set.remove(k);
                    lam.remove(k);
                } else {
                    k += 1;
                }
            }
            let s: f64 = lam.iter().sum();
            for l in &mut lam {
                *l /= s;
            }
            x = combine(&q, &set, &lam);
            if set.len() <= 1 {
                break;
            }
        }
    }
    Err(Error::ProjectionCap(MAX_PROJECTION_ITERS))
}

fn combine(q: &[Vector], set: &[usize], lam: &[f64]) -> Vector {
    let mut x = DVector::zeros(q[0].len());
    for (&i, l) in set.iter().zip(lam) {
        x += &q[i] * *l;
    }
    x
}

/// Coefficients (summing to one) of the min-norm point of the affine hull of `set`.
fn affine_minimizer(q: &[Vector], set: &[usize]) -> Vec<f64> {
    let base = &q[set[0]];
    let m = set.len() - 1;
    if m == 0 {
        return vec![1.0];
    }
    let d = DMatrix::from_fn(base.len(), m, |r, c| q[set[c + 1]][r] - base[r]);
    let rhs = -(d.transpose() * base);
    let gram = d.transpose() * &d;
    let beta = gram
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-13 * gram.norm().max(1e-300))
        .unwrap_or_else(|_| DVector::zeros(m));
    let mut out = Vec::with_capacity(m + 1);
    out.push(1.0 - beta.sum());
    out.extend(beta.iter().copied());
    out
}
