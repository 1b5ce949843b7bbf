//! Continuity experiments: φ_f along a Hausdorff-convergent sequence, and
//! φ_f along a path of facet offsets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::klain::{forced_value, ForcedValueOptions};
use super::{phi, phi_body};
use crate::error::{Error, Result};
use crate::faces::MeasureMethod;
use crate::geometry::{hrep_polytope, FamilySpec, LimitBody, PolytopeSequence, Vector};
use crate::kernels::Kernel;
use crate::transforms::{klain_preimage, multiplier_exact};
use crate::VERSION;

/// Accept below this many combined standard deviations.
pub const ACCEPT_SIGMAS: f64 = 3.0;
/// Reject above this many combined standard deviations.
pub const REJECT_SIGMAS: f64 = 10.0;
/// Number of trailing members used for extrapolation.
pub const TAIL: usize = 4;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConvergesToValue,
    ConvergesElsewhere,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    /// Tail values agree within their own error bars.
    Settled,
    /// Linear fit in the Hausdorff distance.
    Richardson,
    /// Non-monotone tail; no limit claimed.
    Failed,
    /// No extrapolation: the last member, with the last step as its uncertainty.
    LastMember,
}

/// How the limit of the sequence values is estimated.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationMode {
    None,
    #[default]
    Richardson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProbeOptions {
    pub indices: Vec<usize>,
    pub method: MeasureMethod,
    /// Harmonic degree of C^{-1} S f for limits that are not polytopes.
    pub preimage_degree: usize,
    pub forced: ForcedValueOptions,
    pub extrapolation: ExtrapolationMode,
}

impl ProbeOptions {
    pub fn new(indices: Vec<usize>) -> Self {
        ProbeOptions {
            indices,
            method: MeasureMethod::MonteCarlo { samples: 100_000, seed: 1 },
            preimage_degree: 8,
            forced: ForcedValueOptions::default(),
            extrapolation: ExtrapolationMode::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProbeSample {
    pub m: usize,
    pub hausdorff: f64,
    pub phi: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProbeReport {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<serde_json::Value>,
    pub kernel_label: String,
    pub family: FamilySpec,
    pub samples: Vec<ProbeSample>,
    pub extrapolation: Extrapolation,
    pub extrapolated_limit: f64,
    pub extrapolation_sigma: f64,
    pub limit_kind: String,
    /// How the value at the limit was obtained: `phi` on a polytope limit,
    /// `klain_forced` (ψ through the cosine transform) otherwise.
    pub limit_method: String,
    pub phi_at_limit_body: f64,
    pub limit_sigma: f64,
    pub combined_uncertainty: f64,
    /// |extrapolated − φ(limit)| in units of the combined uncertainty.
    pub margin: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

struct Fit {
    kind: Extrapolation,
    value: f64,
    sigma: f64,
}

fn extrapolate(tail: &[ProbeSample], mode: ExtrapolationMode) -> Fit {
    let last = tail[tail.len() - 1];
    let noise = tail.iter().map(|s| s.error).fold(0.0, f64::max).max(1e-12 * (1.0 + last.phi.abs()));
    if mode == ExtrapolationMode::None {
        let step = (last.phi - tail[tail.len() - 2].phi).abs();
        return Fit { kind: Extrapolation::LastMember, value: last.phi, sigma: (step * step + noise * noise).sqrt() };
    }
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.phi), b.max(s.phi)));
    if hi - lo <= ACCEPT_SIGMAS * noise {
        return Fit { kind: Extrapolation::Settled, value: last.phi, sigma: noise };
    }
    let diffs: Vec<f64> = tail.windows(2).map(|w| w[1].phi - w[0].phi).collect();
    let monotone = diffs.iter().all(|d| *d >= -noise) || diffs.iter().all(|d| *d <= noise);
    let shrinking = tail.windows(2).all(|w| w[1].hausdorff <= w[0].hausdorff * (1.0 + 1e-9));
    if !monotone || !shrinking {
        return Fit { kind: Extrapolation::Failed, value: last.phi, sigma: hi - lo };
    }
    let n = tail.len() as f64;
    let xm = tail.iter().map(|s| s.hausdorff).sum::<f64>() / n;
    let ym = tail.iter().map(|s| s.phi).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|s| (s.hausdorff - xm).powi(2)).sum();
    if sxx <= 0.0 {
        return Fit { kind: Extrapolation::Failed, value: last.phi, sigma: hi - lo };
    }
    let sxy: f64 = tail.iter().map(|s| (s.hausdorff - xm) * (s.phi - ym)).sum();
    let b = sxy / sxx;
    let a = ym - b * xm;
    let rss: f64 = tail.iter().map(|s| (s.phi - a - b * s.hausdorff).powi(2)).sum();
    let s2 = rss / (n - 2.0).max(1.0);
    let se_a = (s2 * (1.0 / n + xm * xm / sxx)).sqrt();
    Fit { kind: Extrapolation::Richardson, value: a, sigma: (se_a * se_a + noise * noise).sqrt() }
}

/// φ_f along `seq` at the given indices, compared with the value at the limit.
pub fn continuity_probe(
    f: &Kernel,
    kernel_spec: Option<serde_json::Value>,
    seq: &PolytopeSequence,
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    let mut idx = opts.indices.clone();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() < TAIL {
        return Err(Error::InvalidParameter(format!("a probe needs at least {TAIL} members")));
    }
    let samples = idx
        .par_iter()
        .map(|&m| {
            let mem = seq.member(m)?;
            let r = phi_body(f, &mem.body, opts.method)?;
            Ok(ProbeSample { m, hausdorff: mem.hausdorff_to_limit, phi: r.value, error: r.error_estimate })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut notes = vec![match opts.extrapolation {
        ExtrapolationMode::Richardson => "limit extrapolated assuming first-order convergence in the Hausdorff distance",
        ExtrapolationMode::None => "limit taken as the last member; uncertainty includes the last step",
    }
    .to_string()];
    let (limit_value, limit_sigma, limit_method) = match seq.limit() {
        LimitBody::Polytope(p) => {
            let r = phi(f, p, opts.method)?;
            (r.value, r.error_estimate, "phi")
        }
        body => {
            if f.n() != 3 || f.k() != 1 {
                return Err(Error::UnsupportedDimension("smooth limits need n = 3, k = 1".into()));
            }
            let (pre, spec) = klain_preimage(f, opts.preimage_degree)?;
            let fv = forced_value(&pre, body, opts.forced)?;
            // energy of S f beyond the cut, propagated through 1/λ and |h_K| ≤ R
            let excess = (spec.truncation_residual - 1e-12 * spec.energy).max(0.0);
            let radius = crate::geometry::fibonacci_sphere(256)
                .iter()
                .map(|u| body.support(u).abs())
                .fold(0.0, f64::max);
            let lambda = multiplier_exact(opts.preimage_degree + 2 - opts.preimage_degree % 2).abs();
            let trunc = 2.0 * excess.sqrt() / lambda * radius;
            notes.push(format!(
                "value at the limit is the Klain-forced value ψ(K) = 2⟨C⁻¹Sf, h_K⟩ (degree ≤ {}, S f energy beyond it {:.2e})",
                opts.preimage_degree, spec.truncation_residual
            ));
            (fv.value, fv.error + trunc, "klain_forced")
        }
    };
    let tail = &samples[samples.len() - TAIL..];
    let fit = extrapolate(tail, opts.extrapolation);
    let combined = (fit.sigma.powi(2) + limit_sigma.powi(2))
        .sqrt()
        .max(1e-12 * (1.0 + limit_value.abs().max(fit.value.abs())));
    let diff = (fit.value - limit_value).abs();
    let margin = diff / combined;
    let verdict = match fit.kind {
        Extrapolation::Failed => {
            notes.push("non-monotone tail: extrapolation failed".into());
            Verdict::Inconclusive
        }
        _ if margin < ACCEPT_SIGMAS => Verdict::ConvergesToValue,
        _ if margin > REJECT_SIGMAS => Verdict::ConvergesElsewhere,
        _ => Verdict::Inconclusive,
    };
    Ok(ProbeReport {
        version: VERSION.to_string(),
        kernel: kernel_spec,
        kernel_label: f.label().to_string(),
        family: seq.spec.clone(),
        samples,
        extrapolation: fit.kind,
        extrapolated_limit: fit.value,
        extrapolation_sigma: fit.sigma,
        limit_kind: seq.limit().kind().to_string(),
        limit_method: limit_method.to_string(),
        phi_at_limit_body: limit_value,
        limit_sigma,
        combined_uncertainty: combined,
        margin,
        verdict,
        notes,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct WeakScanStep {
    pub t_lo: f64,
    pub t_hi: f64,
    pub jump: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WeakScanReport {
    /// (t, φ(P_ξ(y(t)))) on the initial uniform grid.
    pub samples: Vec<(f64, f64)>,
    pub max_jump: f64,
    /// Bisection of the interval with the largest jump.
    pub refinement: Vec<WeakScanStep>,
    pub refined_jump: f64,
    pub threshold: f64,
    pub passes: bool,
}

/// Jump a refined interval must stay below for the scan to pass.
pub const WEAK_JUMP_TOL: f64 = 1e-4;

/// φ_f(P_ξ(y(t))) along y(t) = y0 + t·dy, t ∈ [t0, t1]: uniform samples,
/// then bisection towards the largest jump until the interval is below
/// `min_width`.
#[allow(clippy::too_many_arguments)]
pub fn weak_continuity_scan(
    f: &Kernel,
    xi: &[Vector],
    y0: &[f64],
    dy: &[f64],
    t_range: (f64, f64),
    steps: usize,
    min_width: f64,
    method: MeasureMethod,
) -> Result<WeakScanReport> {
    if y0.len() != xi.len() || dy.len() != xi.len() {
        return Err(Error::DimensionMismatch { expected: xi.len(), found: y0.len().min(dy.len()) });
    }
    if steps < 2 || !(t_range.1 > t_range.0) {
        return Err(Error::InvalidParameter("scan needs t1 > t0 and at least 2 steps".into()));
    }
    let eval = |t: f64| -> Result<f64> {
        let y: Vec<f64> = y0.iter().zip(dy).map(|(a, b)| a + t * b).collect();
        Ok(phi(f, &hrep_polytope(xi, &y)?, method)?.value)
    };
    let ts: Vec<f64> =
        (0..=steps).map(|i| t_range.0 + (t_range.1 - t_range.0) * i as f64 / steps as f64).collect();
    let vals = ts.par_iter().map(|&t| eval(t)).collect::<Result<Vec<f64>>>()?;
    let samples: Vec<(f64, f64)> = ts.iter().copied().zip(vals.iter().copied()).collect();
    let (mut i_max, mut max_jump) = (0, 0.0);
    for i in 0..steps {
        let j = (vals[i + 1] - vals[i]).abs();
        if j > max_jump {
            max_jump = j;
            i_max = i;
        }
    }
    let (mut lo, mut hi) = (samples[i_max], samples[i_max + 1]);
    let mut refinement = vec![WeakScanStep { t_lo: lo.0, t_hi: hi.0, jump: (hi.1 - lo.1).abs() }];
    while hi.0 - lo.0 > min_width {
        let tm = 0.5 * (lo.0 + hi.0);
        let mid = (tm, eval(tm)?);
        if (mid.1 - lo.1).abs() >= (hi.1 - mid.1).abs() {
            hi = mid;
        } else {
            lo = mid;
        }
        refinement.push(WeakScanStep { t_lo: lo.0, t_hi: hi.0, jump: (hi.1 - lo.1).abs() });
    }
    let refined_jump = (hi.1 - lo.1).abs();
    Ok(WeakScanReport {
        samples,
        max_jump,
        refinement,
        refined_jump,
        threshold: WEAK_JUMP_TOL,
        passes: refined_jump < WEAK_JUMP_TOL,
    })
}
