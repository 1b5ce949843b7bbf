//! The value forced on a convex body K by the Klain function of f (n = 3, k = 1):
//!
//! ψ(K) = 2 ∫_{S^2} (C^{-1} S f)(u) h_K(u) dσ(u).
//!
//! ψ is the only even, continuous, translation-invariant, 1-homogeneous
//! valuation whose Klain function is S f, and φ_f = ψ on polytopes exactly
//! when φ_f extends continuously.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::sequence::rotation_rule;
use crate::geometry::{LimitBody, Polytope};
use crate::transforms::{integrate_against_support, Preimage};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct ForcedValueOptions {
    /// Gauss order per spherical triangle.
    pub order: usize,
    /// Higher order used for the error estimate.
    pub check_order: usize,
}

impl Default for ForcedValueOptions {
    fn default() -> Self {
        ForcedValueOptions { order: 8, check_order: 12 }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct ForcedValue {
    pub value: f64,
    pub error: f64,
}

fn on_polytope(pre: &Preimage, p: &Polytope, order: usize) -> Result<f64> {
    Ok(2.0 * integrate_against_support(|u| pre.eval(u), p, order)?)
}

/// ψ(K) for a polytope, a ball or a rotation average.
pub fn forced_value(pre: &Preimage, body: &LimitBody, opts: ForcedValueOptions) -> Result<ForcedValue> {
    match body {
        LimitBody::Polytope(p) => {
            let a = on_polytope(pre, p, opts.order)?;
            let b = on_polytope(pre, p, opts.check_order)?;
            Ok(ForcedValue { value: b, error: (a - b).abs() })
        }
        LimitBody::Ball { radius, .. } => {
            let mean = pre.spectrum.degrees.get(&0).map_or(0.0, |c| c[0]);
            Ok(ForcedValue { value: 2.0 * radius * mean, error: 0.0 })
        }
        LimitBody::RotationAverage { base, spread, reference_order, .. } => {
            let quad = {
                let a = on_polytope(pre, base, opts.order)?;
                let b = on_polytope(pre, base, opts.check_order)?;
                (a - b).abs()
            };
            let average = |q: usize, order: usize| -> Result<f64> {
                let parts = rotation_rule(*spread, q)
                    .par_iter()
                    .map(|(w, r)| {
                        let m = nalgebra::DMatrix::from_fn(3, 3, |i, j| r[(i, j)]);
                        let p = base.affine_image(&m, &nalgebra::DVector::zeros(3))?;
                        Ok(w * on_polytope(pre, &p, order)?)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok(parts.iter().sum())
            };
            let v = average(*reference_order + 2, opts.check_order)?;
            let coarse = average(*reference_order, opts.order)?;
            if !v.is_finite() {
                return Err(Error::Numerical("non-finite forced value".into()));
            }
            Ok(ForcedValue { value: v, error: (v - coarse).abs() + quad })
        }
    }
}
