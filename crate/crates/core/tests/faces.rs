use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use nalgebra::DVector;
use valab_core::faces::{
    enumerate_faces, exterior_angle, face_from_vertices, integrate_kernel_over_region, region_measure, MeasureMethod,
    RegionShape,
};
use valab_core::kernels::{constant_kernel, Kernel};
use valab_core::{Error, Polytope, Vector};

fn v(a: &[f64]) -> Vector {
    DVector::from_column_slice(a)
}

const MC: MeasureMethod = MeasureMethod::MonteCarlo { samples: 1_000_000, seed: 17 };

#[test]
fn face_counts() {
    let cube = Polytope::cube(3).unwrap();
    let edges = enumerate_faces(&cube, 1).unwrap();
    assert_eq!(edges.len(), 12);
    assert!(edges.iter().all(|e| (e.kvol - 1.0).abs() < 1e-12));
    assert_eq!(enumerate_faces(&cube, 2).unwrap().len(), 6);

    let s = Polytope::simplex(3).unwrap();
    let mut lens: Vec<f64> = enumerate_faces(&s, 1).unwrap().iter().map(|e| e.kvol).collect();
    lens.sort_by(f64::total_cmp);
    for (got, want) in lens.iter().zip([1.0, 1.0, 1.0, 2f64.sqrt(), 2f64.sqrt(), 2f64.sqrt()]) {
        assert_relative_eq!(*got, want, epsilon = 1e-12);
    }

    let c4 = enumerate_faces(&Polytope::cube(4).unwrap(), 2).unwrap();
    assert_eq!(c4.len(), 24);
    assert!(c4.iter().all(|f| (f.kvol - 1.0).abs() < 1e-12));
    assert_eq!(enumerate_faces(&Polytope::cube(4).unwrap(), 1).unwrap().len(), 32);
}

#[test]
fn invalid_face_dimension() {
    let cube = Polytope::cube(3).unwrap();
    assert!(matches!(enumerate_faces(&cube, 0), Err(Error::InvalidFaceDimension { .. })));
    assert!(matches!(enumerate_faces(&cube, 3), Err(Error::InvalidFaceDimension { .. })));
}

#[test]
fn not_a_face() {
    let cube = Polytope::cube(3).unwrap();
    // a face diagonal
    let a = cube.vertex_index(&[0., 0., 0.]).unwrap();
    let b = cube.vertex_index(&[1., 1., 0.]).unwrap();
    assert!(matches!(face_from_vertices(&cube, &[a, b]), Err(Error::NotAFace)));
}

#[test]
fn cube_edge_is_a_quarter_arc() {
    let cube = Polytope::cube(3).unwrap();
    for e in enumerate_faces(&cube, 1).unwrap() {
        let r = exterior_angle(&cube, &e).unwrap();
        match &r.shape {
            RegionShape::Arc(a) => assert_relative_eq!(a.width, PI / 2.0, epsilon = 1e-12),
            other => panic!("expected an arc, got {other:?}"),
        }
        assert_relative_eq!(region_measure(&r, MeasureMethod::Exact).unwrap().value, 0.25, epsilon = 1e-12);
    }
}

#[test]
fn facets_are_half_points() {
    let s = Polytope::simplex(3).unwrap();
    for f in enumerate_faces(&s, 2).unwrap() {
        let r = exterior_angle(&s, &f).unwrap();
        assert!(matches!(&r.shape, RegionShape::Points(p) if p.len() == 1));
        assert_relative_eq!(region_measure(&r, MeasureMethod::Exact).unwrap().value, 0.5);
    }
}

#[test]
fn simplex_edge_angle_from_facet_normals_and_monte_carlo() {
    let s = Polytope::simplex(3).unwrap();
    let ids = [s.vertex_index(&[1., 0., 0.]).unwrap(), s.vertex_index(&[0., 1., 0.]).unwrap()];
    let face = face_from_vertices(&s, &ids).unwrap();
    let r = exterior_angle(&s, &face).unwrap();
    // outer normals of the two incident facets: −e3 and (1,1,1)/√3
    let n1 = v(&[0., 0., -1.]);
    let n2 = v(&[1., 1., 1.]) / 3f64.sqrt();
    let want = n1.dot(&n2).acos();
    assert_relative_eq!(want, (-1.0 / 3f64.sqrt()).acos(), epsilon = 1e-12);
    let exact = region_measure(&r, MeasureMethod::Exact).unwrap().value;
    assert_relative_eq!(exact * TAU, want, epsilon = 1e-12);
    // Monte Carlo on the same region, treated as a cone
    let mut cone = r.clone();
    cone.shape = RegionShape::Cone;
    let mc = region_measure(&cone, MC).unwrap();
    assert!((mc.value - exact).abs() < 4.0 * mc.std_error);
}

#[test]
fn four_cube_edge_is_an_octant() {
    let c = Polytope::cube(4).unwrap();
    let e = &enumerate_faces(&c, 1).unwrap()[0];
    let r = exterior_angle(&c, e).unwrap();
    assert!(matches!(r.shape, RegionShape::Cone));
    let m = region_measure(&r, MC).unwrap();
    assert!((m.value - 0.125).abs() < 4.0 * m.std_error);
    assert!(region_measure(&r, MeasureMethod::Exact).is_err());
}

#[test]
fn monte_carlo_is_reproducible() {
    let c = Polytope::cube(4).unwrap();
    let e = &enumerate_faces(&c, 1).unwrap()[3];
    let r = exterior_angle(&c, e).unwrap();
    let m = MeasureMethod::MonteCarlo { samples: 10_000, seed: 5 };
    assert_eq!(region_measure(&r, m).unwrap(), region_measure(&r, m).unwrap());
}

#[test]
fn kernel_integrals() {
    let cube = Polytope::cube(3).unwrap();
    let one = constant_kernel(3, 1, 1.0).unwrap();
    let e = &enumerate_faces(&cube, 1).unwrap()[0];
    let r = exterior_angle(&cube, e).unwrap();
    let it = integrate_kernel_over_region(&one, e, &r, MeasureMethod::Exact).unwrap();
    assert_relative_eq!(it.value, 0.25, epsilon = 1e-12);

    // (l·e3)^2 on the facet of the cube with normal e3
    let sq = Kernel::new(3, 2, "l3^2", |_, l| l[2] * l[2]);
    let top = enumerate_faces(&cube, 2)
        .unwrap()
        .into_iter()
        .find(|f| (f.point[2] - 1.0).abs() < 1e-12)
        .unwrap();
    let r = exterior_angle(&cube, &top).unwrap();
    assert_relative_eq!(integrate_kernel_over_region(&sq, &top, &r, MeasureMethod::Exact).unwrap().value, 0.5);
}

#[test]
fn arc_integral_matches_closed_form() {
    // ∫ cos²θ over the quarter arc between −e2 and −e3 at the x-edge of the simplex
    let s = Polytope::simplex(3).unwrap();
    let ids = [s.vertex_index(&[0., 0., 0.]).unwrap(), s.vertex_index(&[1., 0., 0.]).unwrap()];
    let face = face_from_vertices(&s, &ids).unwrap();
    let r = exterior_angle(&s, &face).unwrap();
    let f = Kernel::new(3, 1, "l2^2", |_, l| l[1] * l[1]);
    let got = integrate_kernel_over_region(&f, &face, &r, MeasureMethod::Exact).unwrap().value;
    // arc from −e2 to −e3: l2 = −cos θ, θ ∈ [0, π/2]; ∫ cos² = π/4
    assert_relative_eq!(got, (PI / 4.0) / TAU, epsilon = 1e-12);
}

#[test]
fn lower_dimensional_polytopes() {
    let square = Polytope::boxed(&[1.0, 2.0]).unwrap();
    let flat = valab_core::geometry::convex_hull(
        &square.vertices().iter().map(|p| v(&[p[0], p[1], 0.0])).collect::<Vec<_>>(),
    )
    .unwrap();
    // the square itself as a 2-face has both normals ±e3
    let f = enumerate_faces(&flat, 2).unwrap();
    assert_eq!(f.len(), 1);
    let r = exterior_angle(&flat, &f[0]).unwrap();
    assert_relative_eq!(region_measure(&r, MeasureMethod::Exact).unwrap().value, 1.0);
    // its edges see half circles
    for e in enumerate_faces(&flat, 1).unwrap() {
        let r = exterior_angle(&flat, &e).unwrap();
        assert_relative_eq!(region_measure(&r, MeasureMethod::Exact).unwrap().value, 0.5, epsilon = 1e-12);
    }
    let point = valab_core::geometry::convex_hull(&[v(&[1., 1., 1.])]).unwrap();
    assert!(enumerate_faces(&point, 1).unwrap().is_empty());
}
