//! Kernels of translation-invariant (1,1)-forms on R^3 × S^2.
//!
//! A form is stored as a matrix field A(m): its value on a sphere tangent τ
//! and a space vector u is τᵀ A(m) u. On an edge with direction e the normal
//! cycle is swept by m along the arc with tangent τ = m × e, so the kernel is
//! f(e, m) = (m × e)ᵀ A(m) e. Only the part of A odd in m gives an even kernel.

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Kernel;
use crate::error::{Error, Result};
use crate::linalg::{random_unit, to3};

/// Monomial `m^exponents` times a constant matrix.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FormTerm {
    pub exponents: [u32; 3],
    pub matrix: [[f64; 3]; 3],
}

/// Polynomial matrix field on S^2 representing a (1,1)-form.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct SphereForm {
    pub terms: Vec<FormTerm>,
}

fn monomial(m: &Vector3<f64>, e: [u32; 3]) -> f64 {
    m.x.powi(e[0] as i32) * m.y.powi(e[1] as i32) * m.z.powi(e[2] as i32)
}

impl SphereForm {
    pub fn matrix_at(&self, m: &Vector3<f64>) -> Matrix3<f64> {
        let mut a = Matrix3::zeros();
        for t in &self.terms {
            let c = monomial(m, t.exponents);
            a += Matrix3::from_fn(|i, j| t.matrix[i][j]) * c;
        }
        a
    }

    /// The rotation-invariant form pairing τ with m × u; its kernel is ≡ 1.
    pub fn invariant() -> Self {
        let cross = |i: usize| {
            let mut e = Vector3::zeros();
            e[i] = 1.0;
            let m = e.cross_matrix();
            let mut out = [[0.0; 3]; 3];
            for (r, row) in out.iter_mut().enumerate() {
                for (c, x) in row.iter_mut().enumerate() {
                    *x = m[(r, c)];
                }
            }
            out
        };
        let terms = (0..3)
            .map(|i| {
                let mut ex = [0; 3];
                ex[i] = 1;
                FormTerm { exponents: ex, matrix: cross(i) }
            })
            .collect();
        SphereForm { terms }
    }

    /// Random form with odd monomials of degree ≤ `max_degree` (1 or 3).
    pub fn random_odd<R: Rng + ?Sized>(rng: &mut R, max_degree: u32) -> Self {
        let mut terms = Vec::new();
        for a in 0..=max_degree {
            for b in 0..=max_degree - a {
                for c in 0..=max_degree - a - b {
                    if (a + b + c) % 2 == 1 {
                        let mut mat = [[0.0; 3]; 3];
                        for row in &mut mat {
                            for x in row.iter_mut() {
                                *x = rng.sample::<f64, _>(StandardNormal) / (1 + a + b + c) as f64;
                            }
                        }
                        terms.push(FormTerm { exponents: [a, b, c], matrix: mat });
                    }
                }
            }
        }
        SphereForm { terms }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            for row in &mut t.matrix {
                for x in row.iter_mut() {
                    *x *= s;
                }
            }
        }
        out
    }

    pub fn plus(&self, other: &SphereForm) -> Self {
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        out
    }

    fn raw(&self, e: &Vector3<f64>, m: &Vector3<f64>) -> f64 {
        m.cross(e).dot(&(self.matrix_at(m) * e))
    }
}

/// Kernel of the form, even in the normal line. Forms whose four sign
/// evaluations disagree in absolute value, or whose symmetrization is zero,
/// are rejected.
pub fn chform_kernel(omega: &SphereForm) -> Result<Kernel> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f0f0);
    let (mut scale, mut even_gap, mut odd_gap, mut abs_gap) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..256 {
        let e = to3(&random_unit(&mut rng, 3));
        let mut m = to3(&random_unit(&mut rng, 3));
        m -= e * e.dot(&m);
        let m = m.normalize();
        let mut vals = Vec::with_capacity(4);
        for se in [1.0, -1.0] {
            for sm in [1.0, -1.0] {
                vals.push(omega.raw(&(e * se), &(m * sm)));
            }
        }
        let (p, q) = (vals[0], vals[1]);
        scale = scale.max(p.abs()).max(q.abs());
        even_gap = even_gap.max((p - q).abs());
        odd_gap = odd_gap.max((p + q).abs());
        for v in &vals {
            abs_gap = abs_gap.max((v.abs() - p.abs()).abs());
        }
    }
    let tol = 1e-10 * scale.max(1e-300);
    if scale == 0.0 || (odd_gap <= tol && even_gap > tol) {
        return Err(Error::VanishingSymmetrization);
    }
    if even_gap > tol {
        return Err(Error::ParityViolation(abs_gap.max(even_gap)));
    }
    let omega = Arc::new(omega.clone());
    Ok(Kernel::new(3, 1, "chform", move |e, l| {
        let (e, m) = (to3(&e[0]), to3(l));
        0.5 * (omega.raw(&e, &m) + omega.raw(&e, &-m))
    }))
}
