//! One function per subcommand. Each returns the JSON report and the CSV
//! tables it wrote, and a one-line summary for stdout.

use std::fs;
use std::path::Path;

use serde::Serialize;
use valab_core::faces::{enumerate_faces, exterior_angle, region_measure};
use valab_core::geometry::{FamilySpec, PolytopeSequence};
use valab_core::kernels::{KernelSpec, Lemma18Info};
use valab_core::transforms::{
    cosine_multipliers, cosine_transform, harmonic_project, legendre, multiplier_exact, range_diagnostic,
    HarmonicSpectrum, RangeReport, SphereFunction,
};
use valab_core::valuation::{continuity_probe, phi, ProbeOptions, ProbeReport, ValuationResult};
use valab_core::{Vector, VERSION};

use crate::config::{CosineConfig, ExperimentConfig, FunctionSpec};
use crate::error::CliError;

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    version: &'static str,
    command: &'a str,
    config: &'a ExperimentConfig,
    warnings: &'a [String],
    result: T,
}

pub struct Outcome {
    pub summary: String,
    pub warnings: Vec<String>,
}

fn join(v: &[usize]) -> String {
    v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    cfg: &ExperimentConfig,
    warnings: &[String],
    result: T,
) -> Result<(), CliError> {
    let command = cfg.command.as_deref().unwrap_or_default();
    let report = Report { version: VERSION, command, config: cfg, warnings, result };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T], header: &[&str]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(dir.join(name))?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn prepare(cfg: &ExperimentConfig) -> Result<std::path::PathBuf, CliError> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

#[derive(Serialize)]
struct FaceRow {
    face: usize,
    k: usize,
    vertices: String,
    kvol: f64,
    measure: f64,
    measure_error: f64,
}

pub fn faces(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p = cfg.polytope_spec()?.build()?;
    let k = cfg.k.ok_or_else(|| CliError::Config("missing `k`".into()))?;
    let n = p.ambient_dim();
    let method = cfg.measure_method(n, k);
    let mut rows = Vec::new();
    for (i, face) in enumerate_faces(&p, k)?.iter().enumerate() {
        let m = region_measure(&exterior_angle(&p, face)?, method)?;
        rows.push(FaceRow {
            face: i,
            k,
            vertices: join(&face.vertices),
            kvol: face.kvol,
            measure: m.value,
            measure_error: m.std_error,
        });
    }
    let mut warnings = Vec::new();
    if rows.is_empty() {
        warnings.push(format!("the polytope has no {k}-faces (affine dimension {})", p.affine_dim()));
    }
    let dir = prepare(cfg)?;
    write_csv(&dir, "faces.csv", &rows, &["face", "k", "vertices", "kvol", "measure", "measure_error"])?;
    write_json(&dir, "faces.json", cfg, &warnings, &rows)?;
    Ok(Outcome { summary: format!("{} faces of dimension {k}", rows.len()), warnings })
}

#[derive(Serialize)]
struct PhiResult {
    valuation: ValuationResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    lemma18: Option<Lemma18Info>,
}

#[derive(Serialize)]
struct TermRow {
    face: usize,
    vertices: String,
    kvol: f64,
    integral: f64,
    integral_error: f64,
    contribution: f64,
}

pub fn phi_cmd(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p = cfg.polytope_spec()?.build()?;
    let (f, lemma18) = cfg.kernel_spec()?.build_with_info()?;
    let r = phi(&f, &p, cfg.measure_method(f.n(), f.k()))?;
    let rows: Vec<TermRow> = r
        .per_face_terms
        .iter()
        .map(|t| TermRow {
            face: t.face,
            vertices: join(&t.vertices),
            kvol: t.kvol,
            integral: t.integral,
            integral_error: t.integral_error,
            contribution: t.contribution,
        })
        .collect();
    let summary = format!("phi = {:.12} ± {:.3e}", r.value, r.error_estimate);
    let dir = prepare(cfg)?;
    write_csv(&dir, "phi_faces.csv", &rows, &["face", "vertices", "kvol", "integral", "integral_error", "contribution"])?;
    write_json(&dir, "phi.json", cfg, &[], PhiResult { valuation: r, lemma18 })?;
    Ok(Outcome { summary, warnings: Vec::new() })
}

fn default_indices(f: &FamilySpec) -> Vec<usize> {
    match f {
        FamilySpec::Bulge { .. } => vec![8, 16, 32, 64],
        FamilySpec::Ball { .. } => vec![4, 8, 16, 32],
        FamilySpec::RotationAverage { .. } => vec![4, 6, 8, 10, 12],
    }
}

pub fn probe(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let family = cfg.family.as_ref().ok_or_else(|| CliError::Config("missing `family`".into()))?;
    let spec: &KernelSpec = cfg.kernel_spec()?;
    let f = spec.build()?;
    let seq = PolytopeSequence::new(family)?;
    let mut opts = ProbeOptions::new(cfg.indices.clone().unwrap_or_else(|| default_indices(family)));
    opts.method = cfg.measure_method(f.n(), f.k());
    opts.extrapolation = cfg.extrapolation;
    if let Some(d) = cfg.preimage_degree {
        opts.preimage_degree = d;
    }
    let value = serde_json::to_value(spec).map_err(|e| CliError::Output(e.to_string()))?;
    let report: ProbeReport = continuity_probe(&f, Some(value), &seq, &opts)?;
    let summary = format!(
        "verdict {} (margin {:.3e}, limit {:.12}, extrapolated {:.12})",
        serde_json::to_value(report.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        report.margin,
        report.phi_at_limit_body,
        report.extrapolated_limit
    );
    let dir = prepare(cfg)?;
    write_csv(&dir, "probe.csv", &report.samples, &["m", "hausdorff", "phi", "error"])?;
    write_json(&dir, "probe.json", cfg, &[], &report)?;
    Ok(Outcome { summary, warnings: Vec::new() })
}

#[derive(Serialize)]
struct MultiplierRow {
    degree: usize,
    multiplier: f64,
    exact: f64,
    error: f64,
    leakage: f64,
}

#[derive(Serialize)]
struct DegreeRatio {
    degree: usize,
    input_energy: f64,
    transform_energy: f64,
    /// √(transform / input), |λ_d| when the input is a pure degree-d harmonic.
    gain: f64,
}

#[derive(Serialize)]
struct FunctionTransform {
    input: HarmonicSpectrum,
    transform: HarmonicSpectrum,
    per_degree: Vec<DegreeRatio>,
}

#[derive(Serialize)]
struct CosineResult {
    multipliers: Vec<MultiplierRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    function: Option<FunctionTransform>,
    #[serde(skip_serializing_if = "Option::is_none")]
    range: Option<RangeReport>,
}

fn sphere_function(spec: &FunctionSpec) -> Result<SphereFunction, CliError> {
    match spec {
        FunctionSpec::Constant { value } => {
            let c = *value;
            Ok(SphereFunction::new(3, move |_| c))
        }
        FunctionSpec::Zonal { degree, axis } => {
            let a = Vector::from_column_slice(axis);
            let norm = a.norm();
            if !(norm > 0.0) {
                return Err(CliError::Config("zonal axis must be non-zero".into()));
            }
            let (a, d) = (a / norm, *degree);
            let c = ((2 * d + 1) as f64).sqrt();
            Ok(SphereFunction::new(3, move |v| c * legendre(d, a.dot(v) / v.norm())))
        }
    }
}

fn transform_function(spec: &FunctionSpec, max_degree: usize) -> Result<FunctionTransform, CliError> {
    let g = sphere_function(spec)?;
    let cg = cosine_transform(&g)?;
    let input = harmonic_project(&g, max_degree)?;
    let transform = harmonic_project(&cg, max_degree)?;
    let per_degree = input
        .degrees
        .keys()
        .map(|&d| {
            let (a, b) = (input.block_energy(d), transform.block_energy(d));
            DegreeRatio { degree: d, input_energy: a, transform_energy: b, gain: if a > 0.0 { (b / a).sqrt() } else { 0.0 } }
        })
        .collect();
    Ok(FunctionTransform { input, transform, per_degree })
}

pub fn cosine(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    if cfg.cosine.is_none() && cfg.kernel.is_none() {
        return Err(CliError::Usage("cosine needs a `cosine` section or a `kernel`".into()));
    }
    let cc = cfg.cosine.clone().unwrap_or(CosineConfig { max_degree: 8, function: None });
    let multipliers: Vec<MultiplierRow> = cosine_multipliers(cc.max_degree)?
        .into_iter()
        .map(|m| MultiplierRow {
            degree: m.degree,
            multiplier: m.multiplier,
            exact: multiplier_exact(m.degree),
            error: m.error,
            leakage: m.leakage,
        })
        .collect();
    let function = cc.function.as_ref().map(|s| transform_function(s, cc.max_degree)).transpose()?;
    let range = match &cfg.kernel {
        Some(spec) => Some(range_diagnostic(&spec.build()?, cc.max_degree)?),
        None => None,
    };
    let mut summary = format!("lambda_0 = {:.12}", multipliers[0].multiplier);
    if let Some(r) = &range {
        summary.push_str(&format!(", S f energy {:.3e}", r.fiber_average_energy));
    }
    let dir = prepare(cfg)?;
    write_csv(&dir, "multipliers.csv", &multipliers, &["degree", "multiplier", "exact", "error", "leakage"])?;
    if let Some(r) = &range {
        write_csv(&dir, "range.csv", &r.per_degree, &["degree", "fiber_average", "preimage"])?;
    }
    write_json(&dir, "cosine.json", cfg, &[], CosineResult { multipliers, function, range })?;
    Ok(Outcome { summary, warnings: Vec::new() })
}
