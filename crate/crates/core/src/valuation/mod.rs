//! The valuation φ_f(P) = Σ_F vol(F) ∫_{γ_F} f(F̄, l) dl, intrinsic volumes,
//! the Klain function, and continuity probes.

mod klain;
mod probe;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::{enumerate_faces, exterior_angle, integrate_kernel_over_region, MeasureMethod};
use crate::geometry::{convex_hull, Body, Polytope, Vector};
use crate::kernels::{constant_kernel, Kernel};

pub use klain::{forced_value, ForcedValue, ForcedValueOptions};
pub use probe::{
    continuity_probe, weak_continuity_scan, Extrapolation, ExtrapolationMode, ProbeOptions, ProbeReport, ProbeSample, Verdict,
    WeakScanReport, WeakScanStep,
};

/// One face's share of φ.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FaceTerm {
    pub face: usize,
    pub vertices: Vec<usize>,
    pub kvol: f64,
    pub integral: f64,
    pub integral_error: f64,
    pub contribution: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ValuationResult {
    pub value: f64,
    pub error_estimate: f64,
    pub per_face_terms: Vec<FaceTerm>,
    pub method: MeasureMethod,
    /// Number of Minkowski summands when evaluated on a factored sum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summands: Option<usize>,
}

/// Per-face seed derived from the run seed (splitmix64 step).
fn face_seed(seed: u64, i: usize) -> u64 {
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(i as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn check_even(f: &Kernel, e: &[Vector], l: &Vector) -> Result<()> {
    let (a, b) = (f.eval(e, l), f.eval(e, &-l));
    if (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
        return Err(Error::OddInput(format!("kernel {} is not even in l ({a} vs {b})", f.label())));
    }
    Ok(())
}

/// φ_f(P). Faces with n − k ≤ 2 are integrated exactly; larger codimension
/// uses `method` (Monte Carlo with per-face derived seeds).
pub fn phi(f: &Kernel, p: &Polytope, method: MeasureMethod) -> Result<ValuationResult> {
    let n = p.ambient_dim();
    if f.n() != n {
        return Err(Error::DimensionMismatch { expected: f.n(), found: n });
    }
    let faces = enumerate_faces(p, f.k())?;
    let terms = faces
        .par_iter()
        .enumerate()
        .map(|(i, face)| {
            let region = exterior_angle(p, face)?;
            check_even(f, &face.span, &region.basis[0])?;
            let m = match method {
                MeasureMethod::Exact => MeasureMethod::Exact,
                MeasureMethod::MonteCarlo { samples, seed } => {
                    MeasureMethod::MonteCarlo { samples, seed: face_seed(seed, i) }
                }
            };
            let it = integrate_kernel_over_region(f, face, &region, m)?;
            Ok(FaceTerm {
                face: i,
                vertices: face.vertices.clone(),
                kvol: face.kvol,
                integral: it.value,
                integral_error: it.error,
                contribution: face.kvol * it.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let value = terms.iter().map(|t| t.contribution).sum();
    let error_estimate = match method {
        MeasureMethod::Exact => terms.iter().map(|t| t.kvol * t.integral_error).sum(),
        // independent standard errors add in quadrature
        MeasureMethod::MonteCarlo { .. } => terms.iter().map(|t| (t.kvol * t.integral_error).powi(2)).sum::<f64>().sqrt(),
    };
    Ok(ValuationResult { value, error_estimate, per_face_terms: terms, method, summands: None })
}

/// φ_f on a body: polytopes directly, Minkowski sums through additivity of
/// 1-homogeneous translation-invariant valuations.
pub fn phi_body(f: &Kernel, body: &Body, method: MeasureMethod) -> Result<ValuationResult> {
    match body {
        Body::Polytope(p) => phi(f, p, method),
        Body::Minkowski(s) => {
            if f.k() != 1 {
                return Err(Error::InvalidParameter(
                    "factored Minkowski sums are only evaluated for k = 1".into(),
                ));
            }
            let parts = s
                .terms
                .par_iter()
                .enumerate()
                .map(|(i, (w, p))| {
                    let m = match method {
                        MeasureMethod::MonteCarlo { samples, seed } => {
                            MeasureMethod::MonteCarlo { samples, seed: face_seed(seed ^ 0x5eed, i) }
                        }
                        e => e,
                    };
                    let r = phi(f, p, m)?;
                    Ok((w * r.value, w.abs() * r.error_estimate))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ValuationResult {
                value: parts.iter().map(|t| t.0).sum(),
                error_estimate: parts.iter().map(|t| t.1).sum(),
                per_face_terms: Vec::new(),
                method,
                summands: Some(parts.len()),
            })
        }
    }
}

/// V_k(P) as φ of the constant kernel 1.
pub fn intrinsic_volume(p: &Polytope, k: usize, method: MeasureMethod) -> Result<ValuationResult> {
    phi(&constant_kernel(p.ambient_dim(), k, 1.0)?, p, method)
}

/// φ_f of the unit k-cube spanned by an orthonormal basis of E.
pub fn klain_function(f: &Kernel, e: &[Vector], method: MeasureMethod) -> Result<ValuationResult> {
    let k = e.len();
    if k != f.k() {
        return Err(Error::DimensionMismatch { expected: f.k(), found: k });
    }
    let n = f.n();
    let pts: Vec<Vector> = (0..1usize << k)
        .map(|mask| {
            (0..k).filter(|i| mask >> i & 1 == 1).fold(Vector::zeros(n), |acc, i| acc + &e[i])
        })
        .collect();
    phi(f, &convex_hull(&pts)?, method)
}
