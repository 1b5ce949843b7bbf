//! Kernels f(E, l) on pairs (k-plane E, unit l ⊥ E), functions on the
//! Grassmannian, the fiber-average map S and its pullback.

mod form;
mod lemma;
mod restrict;
mod spec;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::linalg;
use crate::quadrature::{periodic_mean, SphereRule};

pub use form::{chform_kernel, FormTerm, SphereForm};
pub use lemma::{lemma18_kernel, Lemma18Info};
pub use restrict::{calibrate_kappa, kappa_closed_form, restrict_kernel, RestrictedKernel};
pub use spec::{FormSpec, KernelSpec, SeparableParams};

type KernelFn = dyn Fn(&[Vector], &Vector) -> f64 + Send + Sync;
type GrassFn = dyn Fn(&[Vector]) -> f64 + Send + Sync;

/// A kernel on the partial flag manifold. `eval` receives an orthonormal
/// basis of E and a unit vector l ∈ E^⊥; implementations must not depend
/// on the choice of basis and must be even in l.
#[derive(Clone)]
pub struct Kernel {
    n: usize,
    k: usize,
    label: String,
    f: Arc<KernelFn>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "Kernel({}, n={}, k={})", self.label, self.n, self.k)
    }
}

impl Kernel {
    pub fn new<F>(n: usize, k: usize, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[Vector], &Vector) -> f64 + Send + Sync + 'static,
    {
        Kernel { n, k, label: label.into(), f: Arc::new(f) }
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn eval(&self, e: &[Vector], l: &Vector) -> f64 {
        (self.f)(e, l)
    }

    /// Linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Kernel, b: f64) -> Result<Kernel> {
        if self.n != other.n || self.k != other.k {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let (f, g) = (self.f.clone(), other.f.clone());
        Ok(Kernel::new(self.n, self.k, format!("{a}*{} + {b}*{}", self.label, other.label), move |e, l| {
            a * f(e, l) + b * g(e, l)
        }))
    }

    /// The kernel transported by an orthogonal map Q: (Q·f)(E, l) = f(Qᵀ E, Qᵀ l).
    pub fn rotated(&self, q: &DMatrix<f64>) -> Kernel {
        let f = self.f.clone();
        let qt = q.transpose();
        Kernel::new(self.n, self.k, format!("rot({})", self.label), move |e, l| {
            let e2: Vec<Vector> = e.iter().map(|v| &qt * v).collect();
            f(&e2, &(&qt * l))
        })
    }
}

/// A function on Gr_k(R^n), evaluated on an orthonormal basis of E.
#[derive(Clone)]
pub struct GrassFunction {
    n: usize,
    k: usize,
    f: Arc<GrassFn>,
}

impl fmt::Debug for GrassFunction {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "GrassFunction(n={}, k={})", self.n, self.k)
    }
}

impl GrassFunction {
    pub fn new<F>(n: usize, k: usize, f: F) -> Self
    where
        F: Fn(&[Vector]) -> f64 + Send + Sync + 'static,
    {
        GrassFunction { n, k, f: Arc::new(f) }
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn eval(&self, e: &[Vector]) -> f64 {
        (self.f)(e)
    }
}

pub fn constant_kernel(n: usize, k: usize, c: f64) -> Result<Kernel> {
    check_nk(n, k)?;
    Ok(Kernel::new(n, k, format!("constant({c})"), move |_, _| c))
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n < 2 || n > crate::geometry::MAX_DIM {
        return Err(Error::UnsupportedDimension(format!("ambient dimension {n}")));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidFaceDimension { k, n });
    }
    Ok(())
}

/// Average of `g` over the unit sphere of the span of `basis` (dimension ≥ 1).
pub fn sphere_mean<G: Fn(&Vector) -> f64>(basis: &[Vector], g: G) -> Result<f64> {
    match basis.len() {
        0 => Err(Error::InvalidParameter("empty sphere".into())),
        1 => Ok(0.5 * (g(&basis[0]) + g(&-&basis[0]))),
        2 => periodic_mean(|t| g(&(&basis[0] * t.cos() + &basis[1] * t.sin())), 1e-13),
        d => {
            let rule = SphereRule::new(d - 1, 24);
            let pts = rule.embed(basis);
            Ok(pts.iter().zip(&rule.weights).map(|(p, w)| w * g(p)).sum())
        }
    }
}

/// S(f)(E): the average of f(E, ·) over the unit sphere of E^⊥.
pub fn smap(f: &Kernel) -> GrassFunction {
    let f = f.clone();
    let (n, k) = (f.n, f.k);
    GrassFunction::new(n, k, move |e| {
        let perp = linalg::complement(e, n);
        sphere_mean(&perp, |l| f.eval(e, l)).unwrap_or(f64::NAN)
    })
}

/// The kernel constant on fibers: (p* h)(E, l) = h(E).
pub fn pullback(h: &GrassFunction) -> Kernel {
    let h = h.clone();
    Kernel::new(h.n, h.k, "pullback", move |e, _| h.eval(e))
}

/// One term `c · tr(M P_E)^p · (lᵀ N l)^q` of a separable kernel.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SeparableTerm {
    pub coef: f64,
    pub e_matrix: Vec<Vec<f64>>,
    pub e_power: u32,
    pub l_matrix: Vec<Vec<f64>>,
    pub l_power: u32,
}

/// Polynomial kernel `c_0 + Σ_j c_j tr(M_j P_E)^{p_j} (lᵀ N_j l)^{q_j}`.
pub fn separable_kernel(n: usize, k: usize, constant: f64, terms: &[SeparableTerm]) -> Result<Kernel> {
    check_nk(n, k)?;
    let mats: Vec<(f64, DMatrix<f64>, u32, DMatrix<f64>, u32)> = terms
        .iter()
        .map(|t| {
            let m = to_matrix(&t.e_matrix, n)?;
            let q = to_matrix(&t.l_matrix, n)?;
            Ok((t.coef, m, t.e_power, q, t.l_power))
        })
        .collect::<Result<_>>()?;
    Ok(Kernel::new(n, k, "separable", move |e, l| {
        let mut s = constant;
        for (c, m, p, q, r) in &mats {
            let a: f64 = e.iter().map(|v| v.dot(&(m * v))).sum();
            let b = l.dot(&(q * l));
            s += c * a.powi(*p as i32) * b.powi(*r as i32);
        }
        s
    }))
}

fn to_matrix(rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: rows.len() });
    }
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok((&m + m.transpose()) * 0.5)
}

/// Random separable kernel with three terms and powers in {1, 2}.
pub fn random_separable_terms<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (f64, Vec<SeparableTerm>) {
    let mat = |rng: &mut R| -> Vec<Vec<f64>> {
        (0..n).map(|_| (0..n).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect()).collect()
    };
    let constant = rng.sample::<f64, _>(StandardNormal);
    let terms = (0..3)
        .map(|_| SeparableTerm {
            coef: rng.sample::<f64, _>(StandardNormal),
            e_matrix: mat(rng),
            e_power: rng.gen_range(1..=2),
            l_matrix: mat(rng),
            l_power: rng.gen_range(1..=2),
        })
        .collect();
    (constant, terms)
}

pub fn random_separable_kernel<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Result<Kernel> {
    let (c, terms) = random_separable_terms(rng, n);
    separable_kernel(n, k, c, &terms)
}
