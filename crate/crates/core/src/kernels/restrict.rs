//! Restriction of a kernel on Gr_1(R^n) × S^{n-1} to a 3-dimensional subspace W:
//!
//! g(E, l) = κ_n ∫_{S(l ⊕ W^⊥)} f(E, m) √(1 − |p_{W^⊥} m|²) dm.
//!
//! With m = cos θ · l + sin θ · w (w ∈ S(W^⊥)) the weight is |cos θ| and the
//! normalized measure is ∝ sin^{q−1} θ dθ dw, q = n − 3.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;

use super::Kernel;
use crate::error::{Error, Result};
use crate::geometry::Vector;
use crate::linalg;
use crate::quadrature::{gauss_legendre, SphereRule};

const THETA_ORDER: usize = 32;
const FIBER_ORDER: usize = 16;

/// Nodes (θ, weight) on [0, π] split at π/2, weights ∝ sin^{q−1}θ, unnormalized.
fn theta_nodes(q: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(THETA_ORDER);
    let mut out = Vec::new();
    for (lo, hi) in [(0.0, PI / 2.0), (PI / 2.0, PI)] {
        let h = 0.5 * (hi - lo);
        for &(x, w) in rule.iter() {
            let th: f64 = lo + h * (x + 1.0);
            out.push((th, w * h * th.sin().powi(q as i32 - 1)));
        }
    }
    out
}

fn sin_mass(q: usize) -> f64 {
    theta_nodes(q).iter().map(|(_, w)| w).sum()
}

/// κ_n with U(1) = 1, from the same quadrature the restriction uses.
pub fn calibrate_kappa(n: usize) -> Result<f64> {
    if !(4..=crate::geometry::MAX_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension(format!("restriction needs 4 ≤ n ≤ 6, got {n}")));
    }
    let q = n - 3;
    let nodes = theta_nodes(q);
    let total: f64 = nodes.iter().map(|(_, w)| w).sum();
    let weighted: f64 = nodes.iter().map(|(t, w)| w * t.cos().abs()).sum();
    Ok(total / weighted)
}

/// κ_n = 1 / E|⟨m, l⟩| over the unit sphere of R^{n−2}, via Gamma functions.
pub fn kappa_closed_form(n: usize) -> f64 {
    // E|x_1| on S^{d-1} = Γ(d/2) / (√π Γ((d+1)/2)), d = n − 2
    let d = (n - 2) as f64;
    let lg = |x: f64| half_lgamma(x);
    1.0 / (lg(d / 2.0) - lg((d + 1.0) / 2.0)).exp() * PI.sqrt()
}

/// log Γ for the half-integers used here.
fn half_lgamma(x: f64) -> f64 {
    // Γ(x) for x ∈ ½ℕ by recursion from Γ(1) = 1, Γ(½) = √π
    let mut v = if (x.fract() - 0.5).abs() < 1e-12 { 0.5 * PI.ln() } else { 0.0 };
    let mut y = if (x.fract() - 0.5).abs() < 1e-12 { 0.5 } else { 1.0 };
    while y + 0.5 < x {
        v += y.ln();
        y += 1.0;
    }
    v
}

/// A restricted kernel, usable either with ambient vectors lying in W
/// (`eval_ambient`) or as an intrinsic kernel on W ≅ R^3 (`kernel`).
#[derive(Clone, Debug)]
pub struct RestrictedKernel {
    pub w: Vec<Vector>,
    pub w_perp: Vec<Vector>,
    pub kappa: f64,
    inner: Kernel,
    intrinsic: Kernel,
}

pub fn restrict_kernel(f: &Kernel, w: &[Vector], kappa: Option<f64>) -> Result<RestrictedKernel> {
    let n = f.n();
    if f.k() != 1 {
        return Err(Error::InvalidFaceDimension { k: f.k(), n });
    }
    if n < 4 {
        return Err(Error::UnsupportedDimension(format!("restriction from R^{n}")));
    }
    if w.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: w[0].len() });
    }
    let basis = linalg::orthonormalize(w, 1e-9);
    if basis.len() != 3 || w.len() != 3 {
        return Err(Error::InvalidParameter("W must be spanned by 3 independent vectors".into()));
    }
    let w_perp = linalg::complement(&basis, n);
    let kappa = match kappa {
        Some(k) => k,
        None => calibrate_kappa(n)?,
    };
    let q = n - 3;
    let nodes = Arc::new(theta_nodes(q));
    let mass = sin_mass(q);
    let fiber_rule = SphereRule::new(q - 1, FIBER_ORDER);
    let fiber = Arc::new(fiber_rule.embed(&w_perp));
    let fiber_w = Arc::new(fiber_rule.weights.clone());
    let inner = f.clone();
    let (b2, g) = (basis.clone(), f.clone());
    let intrinsic = Kernel::new(3, 1, format!("restricted({})", f.label()), move |e, l| {
        let embed = |x: &Vector| -> Vector {
            let mut v = DVector::zeros(n);
            for (c, q) in x.iter().zip(&b2) {
                v += q * *c;
            }
            v
        };
        let ea = embed(&e[0]);
        let la = embed(l);
        let mut s = 0.0;
        for (th, wt) in nodes.iter() {
            let (sn, cs) = th.sin_cos();
            for (wv, ww) in fiber.iter().zip(fiber_w.iter()) {
                let m = &la * cs + wv * sn;
                s += wt * ww * cs.abs() * g.eval(std::slice::from_ref(&ea), &m);
            }
        }
        kappa * s / mass
    });
    Ok(RestrictedKernel { w: basis, w_perp, kappa, inner, intrinsic })
}

impl RestrictedKernel {
    /// The restriction as a kernel on R^3 in the coordinates of the W basis.
    pub fn kernel(&self) -> &Kernel {
        &self.intrinsic
    }
    pub fn inner(&self) -> &Kernel {
        &self.inner
    }

    /// Coordinates in the W basis of an ambient vector of W.
    pub fn to_w(&self, x: &Vector) -> Vector {
        linalg::coords(x, &self.w)
    }

    /// Ambient vector from W coordinates.
    pub fn from_w(&self, x: &Vector) -> Vector {
        let mut v = DVector::zeros(self.inner.n());
        for (c, q) in x.iter().zip(&self.w) {
            v += q * *c;
        }
        v
    }

    /// g(E, l) for ambient unit vectors `e` (spanning E) and `l`.
    pub fn eval_ambient(&self, e: &Vector, l: &Vector) -> Result<f64> {
        let tol = 1e-9;
        if linalg::project(e, &self.w_perp).norm() > tol {
            return Err(Error::NotInSubspace("E is not contained in W".into()));
        }
        if linalg::project(l, &self.w_perp).norm() > tol || l.dot(e).abs() > tol {
            return Err(Error::NotInSubspace("l is not in W ∩ E^⊥".into()));
        }
        Ok(self.intrinsic.eval(&[self.to_w(e)], &self.to_w(l)))
    }
}
