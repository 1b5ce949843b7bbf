//! Quadrature rules: Gauss–Legendre, adaptive Gauss on intervals, periodic
//! trapezoid, product rules on spheres, and uniform sphere sampling.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::Vector;

/// Default relative tolerance for adaptive arc quadrature.
pub const ARC_REL_TOL: f64 = 1e-10;

type Rule = Arc<Vec<(f64, f64)>>;

/// Gauss–Legendre nodes and weights on [-1, 1], cached per order.
pub fn gauss_legendre(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let nz = NonZeroUsize::new(n.max(1)).expect("nonzero");
            let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(nz).as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(pairs)
        })
        .clone()
}

/// Fixed-order Gauss–Legendre on [a, b].
pub fn gauss<F: FnMut(f64) -> f64>(n: usize, a: f64, b: f64, mut f: F) -> f64 {
    let rule = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let mut s = 0.0;
    for &(x, w) in rule.iter() {
        s += w * f(c + h * x);
    }
    s * h
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

const ADAPT_ORDER: usize = 10;
const MAX_INTERVALS: usize = 4000;

/// Globally adaptive Gauss: each panel compares one 10-point rule against two
/// half-panel rules; the worst panel is split until the summed estimate is
/// below `rel_tol · |I|` (or a tiny absolute floor).
pub fn adaptive_gauss<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<Quad> {
    if a == b {
        return Ok(Quad { value: 0.0, error: 0.0, intervals: 0 });
    }
    // largest |f| seen, so that integrals cancelling to ~0 still terminate
    let fmax = std::cell::Cell::new(0.0f64);
    let mut g = |x: f64| {
        let y = f(x);
        fmax.set(fmax.get().max(y.abs()));
        y
    };
    let panel = |lo: f64, hi: f64, g: &mut dyn FnMut(f64) -> f64| {
        let mid = 0.5 * (lo + hi);
        let coarse = gauss(ADAPT_ORDER, lo, hi, &mut *g);
        let fine = gauss(ADAPT_ORDER, lo, mid, &mut *g) + gauss(ADAPT_ORDER, mid, hi, &mut *g);
        (lo, hi, fine, (fine - coarse).abs())
    };
    let mut panels = vec![panel(a, b, &mut g)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let abs_floor = 1e-14 * (b - a).abs() * fmax.get();
        if err <= (rel_tol * total.abs()).max(abs_floor) {
            return Ok(Quad { value: total, error: err, intervals: panels.len() });
        }
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailure(format!(
                "adaptive Gauss stalled at error {err:.3e} for value {total:.6e}"
            )));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        panels.push(panel(lo, mid, &mut g));
        panels.push(panel(mid, hi, &mut g));
    }
}

/// Mean of a 2π-periodic function by trapezoid doubling.
pub fn periodic_mean<F: FnMut(f64) -> f64>(mut f: F, rel_tol: f64) -> Result<f64> {
    let mut n = 16usize;
    let mut prev = trapezoid(&mut f, n);
    loop {
        // reuse the previous nodes: new nodes sit at the midpoints
        let h = std::f64::consts::TAU / (2 * n) as f64;
        let mut s = 0.0;
        for i in 0..n {
            s += f(h * (2 * i + 1) as f64);
        }
        let cur = 0.5 * prev + s / (2 * n) as f64;
        n *= 2;
        if (cur - prev).abs() <= rel_tol * cur.abs().max(1e-3) || (cur - prev).abs() < 1e-15 {
            return Ok(cur);
        }
        if n > 1 << 17 {
            return Err(Error::QuadratureFailure("periodic trapezoid did not converge".into()));
        }
        prev = cur;
    }
}

fn trapezoid<F: FnMut(f64) -> f64>(f: &mut F, n: usize) -> f64 {
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|i| f(h * i as f64)).sum::<f64>() / n as f64
}

/// Product rule on the unit sphere S^d ⊂ R^{d+1} with weights summing to one.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// `order` is the Gauss order per polar angle; circles get `2·order` nodes.
    pub fn new(dim: usize, order: usize) -> Self {
        let (points, mut weights) = Self::build(dim, order);
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        SphereRule { dim, points, weights }
    }

    fn build(dim: usize, order: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        match dim {
            0 => (vec![vec![1.0], vec![-1.0]], vec![0.5, 0.5]),
            1 => {
                let m = 2 * order;
                let pts = (0..m)
                    .map(|i| {
                        let t = std::f64::consts::TAU * i as f64 / m as f64;
                        vec![t.cos(), t.sin()]
                    })
                    .collect();
                (pts, vec![1.0 / m as f64; m])
            }
            _ => {
                let (sub_p, sub_w) = Self::build(dim - 1, order);
                let rule = gauss_legendre(order);
                let mut pts = Vec::new();
                let mut ws = Vec::new();
                let half = std::f64::consts::FRAC_PI_2;
                for &(x, w) in rule.iter() {
                    let th = half * (x + 1.0);
                    let s = th.sin();
                    let wt = w * s.powi(dim as i32 - 1);
                    for (p, pw) in sub_p.iter().zip(&sub_w) {
                        let mut q = Vec::with_capacity(dim + 1);
                        q.push(th.cos());
                        q.extend(p.iter().map(|c| c * s));
                        pts.push(q);
                        ws.push(wt * pw);
                    }
                }
                (pts, ws)
            }
        }
    }

    /// Nodes embedded in R^n through an orthonormal basis of a (dim+1)-subspace.
    pub fn embed(&self, basis: &[Vector]) -> Vec<Vector> {
        let n = basis[0].len();
        self.points
            .iter()
            .map(|p| {
                let mut v = DVector::from_element(n, 0.0);
                for (c, q) in p.iter().zip(basis) {
                    v += q * *c;
                }
                v
            })
            .collect()
    }
}

/// Uniform sample from the unit sphere of the span of an orthonormal basis.
pub fn sample_sphere<R: Rng + ?Sized>(rng: &mut R, basis: &[Vector]) -> Vector {
    let n = basis[0].len();
    loop {
        let mut v = DVector::from_element(n, 0.0);
        for q in basis {
            let g: f64 = rng.sample(StandardNormal);
            v += q * g;
        }
        let nv = v.norm();
        if nv > 1e-12 {
            return v / nv;
        }
    }
}
