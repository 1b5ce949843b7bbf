//! A kernel in the kernel of S that does not vanish on a given polytope.
//!
//! Near the line of a chosen edge F₁ the kernel is a bump in the angle to F̄₁
//! times a cos 2θ profile on the circle of normals, phased so the arc γ_{F₁}
//! sees its positive lobe. The profile is moved to nearby lines by the
//! minimal rotation, so the circle average vanishes on every fiber.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::Kernel;
use crate::error::{Error, Result};
use crate::faces::{enumerate_faces, exterior_angle, face_from_vertices, RegionShape};
use crate::geometry::Polytope;
use crate::linalg::{rotate_minimal, to3};

/// Data of a constructed kernel, including the value it must give on P.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lemma18Info {
    pub direction: [f64; 3],
    pub arc_width: f64,
    pub bump_width: f64,
    pub edge_length: f64,
    /// Σ over edges parallel to F₁ of length × ∫ profile over the arc.
    pub predicted_value: f64,
}

/// C^∞ bump, 1 at 0 and supported on [0, w).
pub fn bump(angle: f64, w: f64) -> f64 {
    let t = angle / w;
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

pub fn lemma18_kernel(p: &Polytope, edge: [usize; 2], bump_width: f64) -> Result<(Kernel, Lemma18Info)> {
    if p.ambient_dim() != 3 || !p.is_full_dimensional() {
        return Err(Error::UnsupportedDimension("the construction needs a full-dimensional polytope in R^3".into()));
    }
    if !(bump_width > 0.0 && bump_width < PI / 2.0) {
        return Err(Error::InvalidParameter(format!("bump width {bump_width} must lie in (0, π/2)")));
    }
    let face = face_from_vertices(p, &edge)?;
    if face.dim != 1 {
        return Err(Error::NotAFace);
    }
    let region = exterior_angle(p, &face)?;
    let RegionShape::Arc(arc) = region.shape else {
        return Err(Error::Numerical("edge exterior angle is not an arc".into()));
    };
    let u0 = to3(&face.span[0]);
    let a0 = Vector3::from_column_slice(&arc.start);
    let b0 = Vector3::from_column_slice(&arc.ortho);
    let theta_c = 0.5 * arc.width;

    let edges = enumerate_faces(p, 1)?;
    let mut predicted = 0.0;
    for e in &edges {
        let u = to3(&e.span[0]);
        let ang = u.cross(&u0).norm().atan2(u.dot(&u0).abs());
        if ang < 1e-9 {
            let r = exterior_angle(p, e)?;
            let RegionShape::Arc(a) = r.shape else { continue };
            let s = Vector3::from_column_slice(&a.start);
            let o = Vector3::from_column_slice(&a.ortho);
            let s_ang = s.dot(&b0).atan2(s.dot(&a0));
            let eps = if o.dot(&b0) * s.dot(&a0) - o.dot(&a0) * s.dot(&b0) >= 0.0 { 1.0 } else { -1.0 };
            let integral = ((2.0 * (s_ang + eps * a.width - theta_c)).sin() - (2.0 * (s_ang - theta_c)).sin()) / (2.0 * eps);
            predicted += e.kvol * integral / TAU;
        } else if ang < bump_width {
            return Err(Error::BumpOverlap { width: bump_width, angle: ang });
        }
    }
    let info = Lemma18Info {
        direction: [u0.x, u0.y, u0.z],
        arc_width: arc.width,
        bump_width,
        edge_length: face.kvol,
        predicted_value: predicted,
    };
    let kernel = Kernel::new(3, 1, "lemma18", move |e, l| {
        let mut u = to3(&e[0]);
        let c = u.dot(&u0);
        if c < 0.0 {
            u = -u;
        }
        let b = bump(c.abs().min(1.0).acos(), bump_width);
        if b == 0.0 {
            return 0.0;
        }
        // carry l back to the reference circle around u0
        let lr = rotate_minimal(&u, &u0, &to3(l));
        let theta = lr.dot(&b0).atan2(lr.dot(&a0));
        let g = b * (1.0 + (2.0 * (theta - theta_c)).cos());
        // subtract the fiber mean of g, which is b
        g - b
    });
    Ok((kernel, info))
}
