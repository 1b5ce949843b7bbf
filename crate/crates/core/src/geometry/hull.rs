//! Facet enumeration in local (affine-hull) coordinates.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::linalg;

/// Facets as (unit normal, offset) in local coordinates.
pub type LocalFacet = (Vec<f64>, f64);

/// Lexicographic k-subsets of 0..n.
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations { n, idx: (0..k).collect(), done: k > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn push_unique(facets: &mut Vec<LocalFacet>, normal: Vec<f64>, offset: f64, eps: f64) {
    let dup = facets.iter().any(|(m, c)| {
        (c - offset).abs() <= eps * 10.0
            && m.iter().zip(&normal).map(|(a, b)| (a - b).powi(2)).sum::<f64>() < 1e-12
    });
    if !dup {
        facets.push((normal, offset));
    }
}

/// Every d-subset spanning a hyperplane with all points on one side.
pub fn facets_brute(pts: &[Vec<f64>], d: usize, eps: f64) -> Vec<LocalFacet> {
    let mut facets: Vec<LocalFacet> = Vec::new();
    for combo in Combinations::new(pts.len(), d) {
        let p0 = &pts[combo[0]];
        // skip subsets already lying on a known facet plane
        if facets.iter().any(|(m, c)| combo.iter().all(|&i| (dot(m, &pts[i]) - c).abs() <= eps)) {
            continue;
        }
        let rows: Vec<DVector<f64>> = combo[1..]
            .iter()
            .map(|&i| DVector::from_iterator(d, pts[i].iter().zip(p0).map(|(a, b)| a - b)))
            .collect();
        let Some(nrm) = linalg::normal_of(&rows, d, eps) else { continue };
        let nv: Vec<f64> = nrm.iter().copied().collect();
        let c = dot(&nv, p0);
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for p in pts {
            let s = dot(&nv, p) - c;
            lo = lo.min(s);
            hi = hi.max(s);
        }
        if hi <= eps && lo < -eps {
            push_unique(&mut facets, nv, c, eps);
        } else if lo >= -eps && hi > eps {
            push_unique(&mut facets, nv.iter().map(|x| -x).collect(), -c, eps);
        }
    }
    facets
}

/// A point is a vertex iff the normals of the facets through it span R^d.
pub fn vertex_flags(pts: &[Vec<f64>], facets: &[LocalFacet], d: usize, eps: f64) -> Vec<bool> {
    pts.iter()
        .map(|p| {
            let normals: Vec<DVector<f64>> = facets
                .iter()
                .filter(|(m, c)| (dot(m, p) - c).abs() <= eps * 10.0)
                .map(|(m, _)| DVector::from_column_slice(m))
                .collect();
            linalg::orthonormalize(&normals, 1e-7).len() == d
        })
        .collect()
}

#[derive(Clone)]
struct Tri {
    v: [usize; 3],
    n: [f64; 3],
    c: f64,
    alive: bool,
}

fn sub(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn make_tri(pts: &[Vec<f64>], v: [usize; 3], interior: &[f64]) -> Tri {
    let mut n = cross(sub(&pts[v[1]], &pts[v[0]]), sub(&pts[v[2]], &pts[v[0]]));
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    for x in &mut n {
        *x /= len;
    }
    let mut t = Tri { v, n, c: dot(&n, &pts[v[0]]), alive: true };
    if dot(&t.n, interior) - t.c > 0.0 {
        t.v.swap(1, 2);
        for x in &mut t.n {
            *x = -*x;
        }
        t.c = -t.c;
    }
    t
}

/// Incremental hull for full-dimensional point sets in R^3. Triangles are
/// merged into planar facets at the end.
pub fn facets_incremental3(pts: &[Vec<f64>], eps: f64) -> Vec<LocalFacet> {
    let far = |from: &dyn Fn(&[f64]) -> f64| -> usize {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, p) in pts.iter().enumerate() {
            let d = from(p);
            if d > best.0 {
                best = (d, i);
            }
        }
        best.1
    };
    let i0 = far(&|p: &[f64]| p[0]);
    let i1 = far(&|p: &[f64]| dot(&sub(p, &pts[i0]), &sub(p, &pts[i0])));
    let axis = sub(&pts[i1], &pts[i0]);
    let i2 = far(&|p: &[f64]| {
        let c = cross(axis, sub(p, &pts[i0]));
        dot(&c, &c)
    });
    let pn = cross(axis, sub(&pts[i2], &pts[i0]));
    let i3 = far(&|p: &[f64]| dot(&pn, &sub(p, &pts[i0])).abs());
    let seed = [i0, i1, i2, i3];
    let interior: Vec<f64> = (0..3).map(|k| seed.iter().map(|&i| pts[i][k]).sum::<f64>() / 4.0).collect();

    let mut tris: Vec<Tri> = vec![
        make_tri(pts, [i0, i1, i2], &interior),
        make_tri(pts, [i0, i1, i3], &interior),
        make_tri(pts, [i0, i2, i3], &interior),
        make_tri(pts, [i1, i2, i3], &interior),
    ];
    for (pi, p) in pts.iter().enumerate() {
        if seed.contains(&pi) {
            continue;
        }
        let visible: Vec<usize> = tris
            .iter()
            .enumerate()
            .filter(|(_, t)| t.alive && dot(&t.n, p) - t.c > eps)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut edges: HashMap<(usize, usize), ()> = HashMap::new();
        for &ti in &visible {
            let v = tris[ti].v;
            for k in 0..3 {
                edges.insert((v[k], v[(k + 1) % 3]), ());
            }
        }
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for &ti in &visible {
            let v = tris[ti].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                if !edges.contains_key(&(b, a)) {
                    horizon.push((a, b));
                }
            }
            tris[ti].alive = false;
        }
        for (a, b) in horizon {
            let mut n = cross(sub(&pts[b], &pts[a]), sub(p, &pts[a]));
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            if len < 1e-300 {
                continue;
            }
            for x in &mut n {
                *x /= len;
            }
            tris.push(Tri { v: [a, b, pi], n, c: dot(&n, &pts[a]), alive: true });
        }
        if tris.len() > 8 * pts.len() + 64 {
            tris.retain(|t| t.alive);
        }
    }
    let mut facets: Vec<LocalFacet> = Vec::new();
    for t in tris.iter().filter(|t| t.alive) {
        push_unique(&mut facets, t.n.to_vec(), t.c, eps);
    }
    // drop planes that do not actually support the set (numerical slivers)
    facets.retain(|(m, c)| pts.iter().all(|p| dot(m, p) - c <= eps * 100.0));
    facets
}
