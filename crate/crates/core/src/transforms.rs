//! Cosine transform on the sphere, real spherical harmonics on S^2, and the
//! range diagnostic for the fiber averages S f of kernels on G_1(R^3).
//!
//! Measures are normalized to total mass one and harmonics are normalized so
//! that the mean of Y_{l,m}^2 is one. With these conventions a degree d
//! harmonic is scaled by λ_d = ∫_0^1 t P_d(t) dt under the cosine transform.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use nalgebra::{DVector, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Polytope, Vector};
use crate::kernels::{smap, Kernel};
use crate::linalg::{self, random_unit, to3};
use crate::quadrature::{gauss_legendre, SphereRule};

/// Gauss order of the fixed product grid on S^2 (exact through degree 47).
pub const GRID_ORDER: usize = 24;
/// Gauss order per half of the polar angle in the cosine transform.
pub const COSINE_ORDER: usize = 24;
/// Largest harmonic degree accepted by `cosine_multipliers`.
pub const MAX_MULTIPLIER_DEGREE: usize = 16;
/// Largest degree accepted by `harmonic_project`.
pub const MAX_DEGREE: usize = 40;
/// Leakage above which a multiplier is treated as a quadrature failure.
pub const LEAKAGE_TOL: f64 = 1e-6;

type SphereFn = dyn Fn(&Vector) -> f64 + Send + Sync;

/// A function on the unit sphere of R^n.
#[derive(Clone)]
pub struct SphereFunction {
    dim: usize,
    f: Arc<SphereFn>,
}

impl std::fmt::Debug for SphereFunction {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fm, "SphereFunction(n={})", self.dim)
    }
}

impl SphereFunction {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&Vector) -> f64 + Send + Sync + 'static,
    {
        SphereFunction { dim, f: Arc::new(f) }
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn eval(&self, v: &Vector) -> f64 {
        (self.f)(v)
    }

    /// Largest |g(v) − g(−v)| over a fixed set of random directions.
    pub fn odd_part(&self, samples: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0dd);
        (0..samples)
            .map(|_| {
                let v = random_unit(&mut rng, self.dim);
                (self.eval(&v) - self.eval(&-&v)).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn check_even(&self) -> Result<()> {
        let gap = self.odd_part(64);
        if gap > 1e-9 {
            return Err(Error::OddInput(format!("g(v) − g(−v) reaches {gap:.3e}")));
        }
        Ok(())
    }

    /// g ∘ Rᵀ, i.e. the function rotated by R.
    pub fn rotated(&self, r: &nalgebra::DMatrix<f64>) -> SphereFunction {
        let f = self.f.clone();
        let rt = r.transpose();
        SphereFunction::new(self.dim, move |v| f(&(&rt * v)))
    }
}

/// Sum in a fixed pairwise order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// The shared product grid on S^2: Gauss in z, uniform in azimuth.
pub fn sphere_grid() -> &'static (Vec<Vector3<f64>>, Vec<f64>) {
    static GRID: std::sync::OnceLock<(Vec<Vector3<f64>>, Vec<f64>)> = std::sync::OnceLock::new();
    GRID.get_or_init(|| {
        let rule = gauss_legendre(GRID_ORDER);
        let naz = 2 * GRID_ORDER;
        let mut pts = Vec::with_capacity(rule.len() * naz);
        let mut ws = Vec::with_capacity(rule.len() * naz);
        for &(z, w) in rule.iter() {
            let s = (1.0 - z * z).sqrt();
            for j in 0..naz {
                let ph = TAU * j as f64 / naz as f64;
                pts.push(Vector3::new(s * ph.cos(), s * ph.sin(), z));
                ws.push(0.5 * w / naz as f64);
            }
        }
        (pts, ws)
    })
}

/// Legendre polynomial P_d(t).
pub fn legendre(d: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if d == 0 {
        return 1.0;
    }
    for l in 1..d {
        let p2 = ((2 * l + 1) as f64 * t * p1 - l as f64 * p0) / (l + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// λ_d = ∫_0^1 t P_d(t) dt, the multiplier of the cosine transform on even
/// degree d harmonics of S^2 (Gauss rule exact for the polynomial integrand).
pub fn multiplier_exact(d: usize) -> f64 {
    let rule = gauss_legendre(d / 2 + 2);
    rule.iter().map(|&(x, w)| {
        let t = 0.5 * (x + 1.0);
        0.5 * w * t * legendre(d, t)
    }).sum()
}

/// All real harmonics of degree ≤ L at a unit vector, by degree, with
/// m = −l..l in order (negative m carry sin mφ).
pub fn harmonics(v: &Vector3<f64>, max_degree: usize) -> Vec<Vec<f64>> {
    let t = v.z.clamp(-1.0, 1.0);
    let s = (v.x * v.x + v.y * v.y).sqrt();
    let ph = v.y.atan2(v.x);
    let lmax = max_degree;
    // fully normalized associated Legendre functions p[l][m]
    let mut p = vec![vec![0.0; lmax + 1]; lmax + 1];
    p[0][0] = 1.0;
    for m in 1..=lmax {
        let f = if m == 1 { 3f64.sqrt() } else { ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() };
        p[m][m] = f * s * p[m - 1][m - 1];
    }
    for m in 0..lmax {
        p[m + 1][m] = ((2 * m + 3) as f64).sqrt() * t * p[m][m];
    }
    for m in 0..=lmax {
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((2.0 * lf - 1.0) * (2.0 * lf + 1.0) / ((lf - mf) * (lf + mf))).sqrt();
            let b = ((2.0 * lf + 1.0) * (lf + mf - 1.0) * (lf - mf - 1.0) / ((lf - mf) * (lf + mf) * (2.0 * lf - 3.0)))
                .sqrt();
            p[l][m] = a * t * p[l - 1][m] - b * p[l - 2][m];
        }
    }
    (0..=lmax)
        .map(|l| {
            let mut row = vec![0.0; 2 * l + 1];
            row[l] = p[l][0];
            for m in 1..=l {
                let c = p[l][m];
                let (sm, cm) = (m as f64 * ph).sin_cos();
                row[l + m] = c * cm;
                row[l - m] = c * sm;
            }
            row
        })
        .collect()
}

/// Harmonic coefficients of an even function: blocks for even degrees,
/// odd-degree energy folded into `odd_residual`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HarmonicSpectrum {
    pub max_degree: usize,
    pub degrees: BTreeMap<usize, Vec<f64>>,
    pub odd_residual: f64,
    /// Mean of g^2 on the grid.
    pub energy: f64,
    /// Energy not captured by degrees ≤ max_degree.
    pub truncation_residual: f64,
}

impl HarmonicSpectrum {
    pub fn block_energy(&self, d: usize) -> f64 {
        self.degrees.get(&d).map_or(0.0, |c| c.iter().map(|x| x * x).sum())
    }

    /// Σ c_{l,m} Y_{l,m}(u).
    pub fn eval(&self, u: &Vector3<f64>) -> f64 {
        let y = harmonics(u, self.max_degree);
        self.degrees.iter().map(|(d, c)| c.iter().zip(&y[*d]).map(|(a, b)| a * b).sum::<f64>()).sum()
    }
}

/// Projection of g: S^2 → R onto harmonics of degree ≤ L.
pub fn harmonic_project(g: &SphereFunction, max_degree: usize) -> Result<HarmonicSpectrum> {
    if g.dim() != 3 {
        return Err(Error::UnsupportedDimension(format!("harmonics on S^{}", g.dim().saturating_sub(1))));
    }
    let vals: Vec<f64> = sphere_grid().0.iter().map(|p| g.eval(&linalg::from3(p))).collect();
    project_values(&vals, max_degree)
}

/// Projection from values on the shared grid.
pub fn project_values(vals: &[f64], max_degree: usize) -> Result<HarmonicSpectrum> {
    if max_degree > MAX_DEGREE {
        return Err(Error::DegreeTooLarge(max_degree));
    }
    let (pts, ws) = sphere_grid();
    let mut terms: Vec<Vec<Vec<f64>>> = (0..=max_degree).map(|l| vec![Vec::with_capacity(pts.len()); 2 * l + 1]).collect();
    let mut sq = Vec::with_capacity(pts.len());
    for ((p, w), v) in pts.iter().zip(ws).zip(vals) {
        let y = harmonics(p, max_degree);
        for (l, row) in y.iter().enumerate() {
            for (m, ylm) in row.iter().enumerate() {
                terms[l][m].push(w * v * ylm);
            }
        }
        sq.push(w * v * v);
    }
    let energy = pairwise_sum(&sq);
    let mut degrees = BTreeMap::new();
    let (mut odd, mut captured) = (0.0, 0.0);
    for (l, block) in terms.iter().enumerate() {
        let c: Vec<f64> = block.iter().map(|t| pairwise_sum(t)).collect();
        let e: f64 = c.iter().map(|x| x * x).sum();
        captured += e;
        if l % 2 == 1 {
            odd += e;
        } else {
            degrees.insert(l, c);
        }
    }
    Ok(HarmonicSpectrum {
        max_degree,
        degrees,
        odd_residual: odd,
        energy,
        truncation_residual: (energy - captured).max(0.0),
    })
}

/// Nodes of the cosine-transform rule around a pole: polar angle split at π/2
/// (where |cos| has its kink) times a rule on the equatorial S^{n−2}.
fn cosine_nodes(n: usize, order: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(order);
    let mut out = Vec::with_capacity(2 * order);
    for (lo, hi) in [(0.0, FRAC_PI_2), (FRAC_PI_2, PI)] {
        let h = 0.5 * (hi - lo);
        for &(x, w) in rule.iter() {
            let a: f64 = lo + h * (x + 1.0);
            out.push((a, w * h * a.sin().powi(n as i32 - 2)));
        }
    }
    let total: f64 = out.iter().map(|t| t.1).sum();
    out.into_iter().map(|(a, w)| (a, w / total)).collect()
}

fn cosine_at(g: &SphereFunction, u: &Vector, order: usize) -> f64 {
    let n = g.dim();
    let frame = linalg::complement(&[u.clone()], n);
    let eq = SphereRule::new(n - 2, order);
    let eqp = eq.embed(&frame);
    let mut terms = Vec::with_capacity(2 * order * eqp.len());
    for (a, wa) in cosine_nodes(n, order) {
        let (s, c) = a.sin_cos();
        for (q, wq) in eqp.iter().zip(&eq.weights) {
            let v = u * c + q * s;
            terms.push(wa * wq * c.abs() * g.eval(&v));
        }
    }
    pairwise_sum(&terms)
}

/// (C g)(u) = ∫ |⟨u, v⟩| g(v) dσ(v) for even g on S^2 or S^3.
pub fn cosine_transform(g: &SphereFunction) -> Result<SphereFunction> {
    cosine_transform_with_order(g, COSINE_ORDER)
}

pub fn cosine_transform_with_order(g: &SphereFunction, order: usize) -> Result<SphereFunction> {
    let n = g.dim();
    if n != 3 && n != 4 {
        return Err(Error::UnsupportedDimension(format!("cosine transform on S^{}", n.saturating_sub(1))));
    }
    g.check_even()?;
    let g = g.clone();
    Ok(SphereFunction::new(n, move |u| {
        let nu = u.norm();
        cosine_at(&g, &(u / nu), order)
    }))
}

/// One row of the multiplier table.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct Multiplier {
    pub degree: usize,
    pub multiplier: f64,
    /// Change under a higher-order rule.
    pub error: f64,
    /// Fraction of the energy of C Y outside degree d.
    pub leakage: f64,
}

/// Test harmonic of degree d: √(2d+1) P_d(⟨a, v⟩) for a fixed generic axis.
pub fn test_harmonic(d: usize) -> SphereFunction {
    let a = DVector::from_vec(vec![1.0, 2.0, 3.0]).normalize();
    let c = ((2 * d + 1) as f64).sqrt();
    SphereFunction::new(3, move |v| c * legendre(d, a.dot(v)))
}

/// Multipliers λ_d of the cosine transform on S^2 for even d ≤ L, read off
/// from transforming one harmonic per degree.
pub fn cosine_multipliers(max_degree: usize) -> Result<Vec<Multiplier>> {
    if max_degree > MAX_MULTIPLIER_DEGREE {
        return Err(Error::DegreeTooLarge(max_degree));
    }
    let (pts, ws) = sphere_grid();
    let mut out = Vec::new();
    for d in (0..=max_degree).step_by(2) {
        let y = test_harmonic(d);
        let cy = cosine_transform(&y)?;
        let cy2 = cosine_transform_with_order(&y, COSINE_ORDER + 8)?;
        let mut vals = Vec::with_capacity(pts.len());
        let (mut ip, mut ip2) = (Vec::new(), Vec::new());
        for (p, w) in pts.iter().zip(ws) {
            let v = linalg::from3(p);
            let c = cy.eval(&v);
            vals.push(c);
            ip.push(w * c * y.eval(&v));
            ip2.push(w * cy2.eval(&v) * y.eval(&v));
        }
        let spec = project_values(&vals, max_degree + 4)?;
        let lambda = pairwise_sum(&ip);
        let leakage = if spec.energy > 0.0 { 1.0 - spec.block_energy(d) / spec.energy } else { 1.0 };
        out.push(Multiplier { degree: d, multiplier: lambda, error: (pairwise_sum(&ip2) - lambda).abs(), leakage: leakage.max(0.0) });
    }
    if let Some(bad) = out.iter().find(|m| m.leakage > LEAKAGE_TOL) {
        return Err(Error::QuadratureFailure(format!(
            "degree {} leaks {:.3e} of its energy under the cosine transform",
            bad.degree, bad.leakage
        )));
    }
    Ok(out)
}

/// S f of a kernel on G_1(R^3) as an even function of the unit vector spanning E.
pub fn fiber_average_function(f: &Kernel) -> Result<SphereFunction> {
    if f.n() != 3 || f.k() != 1 {
        return Err(Error::UnsupportedDimension(format!("needs n = 3, k = 1 (got n = {}, k = {})", f.n(), f.k())));
    }
    let s = smap(f);
    Ok(SphereFunction::new(3, move |e| s.eval(std::slice::from_ref(&(e / e.norm())))))
}

/// Largest degree for which the preimage is also kept as a monomial sum.
const MONOMIAL_DEGREE: usize = 12;

/// Coefficients of C^{-1} S f.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Preimage {
    pub spectrum: HarmonicSpectrum,
    /// The same even polynomial as Σ c·x^a y^b z^c with a+b+c = D, which
    /// agrees with the harmonic sum on the sphere.
    #[serde(skip)]
    monomials: Option<(usize, Vec<([usize; 3], f64)>)>,
}

fn homogeneous_exponents(d: usize) -> Vec<[usize; 3]> {
    (0..=d).flat_map(|a| (0..=d - a).map(move |b| [a, b, d - a - b])).collect()
}

fn powers(x: f64, d: usize) -> [f64; MONOMIAL_DEGREE + 1] {
    let mut p = [1.0; MONOMIAL_DEGREE + 1];
    for i in 1..=d {
        p[i] = p[i - 1] * x;
    }
    p
}

impl Preimage {
    pub fn new(spectrum: HarmonicSpectrum) -> Self {
        let monomials = Self::fit_monomials(&spectrum);
        Preimage { spectrum, monomials }
    }

    fn fit_monomials(spectrum: &HarmonicSpectrum) -> Option<(usize, Vec<([usize; 3], f64)>)> {
        let d = spectrum.degrees.keys().copied().max().unwrap_or(0);
        if d > MONOMIAL_DEGREE {
            return None;
        }
        let exps = homogeneous_exponents(d);
        let pts = &sphere_grid().0;
        let a = nalgebra::DMatrix::from_fn(pts.len(), exps.len(), |i, j| {
            let [x, y, z] = [pts[i].x, pts[i].y, pts[i].z];
            x.powi(exps[j][0] as i32) * y.powi(exps[j][1] as i32) * z.powi(exps[j][2] as i32)
        });
        let b = DVector::from_iterator(pts.len(), pts.iter().map(|u| spectrum.eval(u)));
        let c = a.clone().svd(true, true).solve(&b, 1e-13).ok()?;
        let fit = &a * &c - &b;
        if fit.amax() > 1e-10 * (1.0 + b.amax()) {
            return None;
        }
        Some((d, exps.into_iter().zip(c.iter().copied()).collect()))
    }

    pub fn eval(&self, u: &Vector3<f64>) -> f64 {
        match &self.monomials {
            Some((d, terms)) => {
                let n = u.norm();
                let (px, py, pz) = (powers(u.x / n, *d), powers(u.y / n, *d), powers(u.z / n, *d));
                terms.iter().map(|([a, b, c], w)| w * px[*a] * py[*b] * pz[*c]).sum()
            }
            None => self.spectrum.eval(u),
        }
    }
}

/// Preimage of S f under the cosine transform, truncated at degree L.
pub fn klain_preimage(f: &Kernel, max_degree: usize) -> Result<(Preimage, HarmonicSpectrum)> {
    let sf = fiber_average_function(f)?;
    let spec = harmonic_project(&sf, max_degree)?;
    let mut pre = spec.clone();
    for (d, c) in pre.degrees.iter_mut() {
        let l = multiplier_exact(*d);
        for x in c.iter_mut() {
            *x /= l;
        }
    }
    pre.energy = pre.degrees.values().flatten().map(|x| x * x).sum();
    pre.odd_residual = 0.0;
    pre.truncation_residual = 0.0;
    Ok((Preimage::new(pre), spec))
}

/// Energy per even degree.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DegreeEnergy {
    pub degree: usize,
    pub fiber_average: f64,
    pub preimage: f64,
}

/// Range diagnostic for S f: its spectrum, the preimage under the cosine
/// transform and how fast the preimage coefficients decay.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RangeReport {
    pub max_degree: usize,
    pub fiber_average_energy: f64,
    pub odd_residual: f64,
    pub truncation_residual: f64,
    pub per_degree: Vec<DegreeEnergy>,
    /// Mean of the preimage (its degree-0 coefficient).
    pub preimage_mean: f64,
    pub preimage_energy: f64,
    /// Preimage energy in the top two even degrees over the total.
    pub tail_fraction: f64,
    pub fiber_average_spectrum: HarmonicSpectrum,
    pub preimage_spectrum: HarmonicSpectrum,
}

pub fn range_diagnostic(f: &Kernel, max_degree: usize) -> Result<RangeReport> {
    let (pre, spec) = klain_preimage(f, max_degree)?;
    let per_degree: Vec<DegreeEnergy> = spec
        .degrees
        .keys()
        .map(|&d| DegreeEnergy { degree: d, fiber_average: spec.block_energy(d), preimage: pre.spectrum.block_energy(d) })
        .collect();
    let pe = pre.spectrum.energy;
    let tail: f64 = per_degree.iter().rev().take(2).map(|e| e.preimage).sum();
    Ok(RangeReport {
        max_degree,
        fiber_average_energy: spec.energy,
        odd_residual: spec.odd_residual,
        truncation_residual: spec.truncation_residual,
        preimage_mean: pre.spectrum.degrees.get(&0).map_or(0.0, |c| c[0]),
        preimage_energy: pe,
        tail_fraction: if pe > 0.0 { tail / pe } else { 0.0 },
        per_degree,
        fiber_average_spectrum: spec,
        preimage_spectrum: pre.spectrum,
    })
}

/// Vertex normal cones of a full-dimensional polytope in R^3: for each vertex
/// the incident facet normals in cyclic order.
pub fn vertex_normal_cones(p: &Polytope) -> Result<Vec<(Vector3<f64>, Vec<Vector3<f64>>)>> {
    if p.ambient_dim() != 3 || !p.is_full_dimensional() {
        return Err(Error::UnsupportedDimension("normal fans need a full-dimensional polytope in R^3".into()));
    }
    let mut out = Vec::with_capacity(p.vertices().len());
    for (i, v) in p.vertices().iter().enumerate() {
        let ns: Vec<Vector3<f64>> =
            p.facets().iter().filter(|f| f.vertices.binary_search(&i).is_ok()).map(|f| to3(&f.normal)).collect();
        if ns.len() < 3 {
            return Err(Error::Numerical(format!("vertex {i} meets only {} facets", ns.len())));
        }
        let axis = ns.iter().sum::<Vector3<f64>>().normalize();
        let e1 = (ns[0] - axis * axis.dot(&ns[0])).normalize();
        let e2 = axis.cross(&e1);
        let mut ord: Vec<(f64, Vector3<f64>)> = ns.iter().map(|n| (n.dot(&e2).atan2(n.dot(&e1)), *n)).collect();
        ord.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.push((to3(v), ord.into_iter().map(|t| t.1).collect()));
    }
    Ok(out)
}

/// Spherical triangles per fan triangle are split into 4^SUBDIVISION pieces.
pub const SUBDIVISION: usize = 2;

/// ∫ g(u) h_P(u) dσ(u) over S^2 (normalized), splitting the sphere into the
/// vertex normal cones where h_P is linear, fanning each cone into triangles,
/// subdividing them and mapping flat triangles radially onto the sphere.
pub fn integrate_against_support<G: Fn(&Vector3<f64>) -> f64>(g: G, p: &Polytope, order: usize) -> Result<f64> {
    let rule = gauss_legendre(order);
    let mut terms = Vec::new();
    for (v, ns) in vertex_normal_cones(p)? {
        let a = ns.iter().sum::<Vector3<f64>>().normalize();
        let mut tris = Vec::new();
        for j in 0..ns.len() {
            tris.push([a, ns[j], ns[(j + 1) % ns.len()]]);
        }
        for _ in 0..SUBDIVISION {
            tris = tris
                .into_iter()
                .flat_map(|[a, b, c]| {
                    let (ab, bc, ca) = ((a + b).normalize(), (b + c).normalize(), (c + a).normalize());
                    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
                })
                .collect();
        }
        for [a, b, c] in tris {
            let (ba, cb) = (b - a, c - b);
            let nrm = ba.cross(&cb);
            let mut t_sum = Vec::with_capacity(rule.len() * rule.len());
            for &(xs, ws) in rule.iter() {
                let s = 0.5 * (xs + 1.0);
                for &(xt, wt) in rule.iter() {
                    let t = 0.5 * (xt + 1.0);
                    let x = a + ba * s + cb * (s * t);
                    let r = x.norm();
                    let u = x / r;
                    let jac = x.dot(&nrm).abs() * s / (r * r * r);
                    t_sum.push(0.25 * ws * wt * jac * g(&u) * v.dot(&u));
                }
            }
            terms.push(pairwise_sum(&t_sum));
        }
    }
    Ok(pairwise_sum(&terms) / (4.0 * PI))
}
