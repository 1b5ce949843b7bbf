use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use valab_core::faces::MeasureMethod;
use valab_core::geometry::{convex_hull, Body, FamilySpec, HeightSchedule, MinkowskiSum, PolytopeSequence, PolytopeSpec};
use valab_core::kernels::{constant_kernel, lemma18_kernel, random_separable_kernel, Kernel};
use valab_core::linalg::random_subspace;
use valab_core::valuation::{
    continuity_probe, intrinsic_volume, klain_function, phi, phi_body, weak_continuity_scan, Extrapolation,
    ExtrapolationMode, ProbeOptions, Verdict,
};
use valab_core::{Error, Polytope, Vector};

fn v(a: &[f64]) -> Vector {
    DVector::from_column_slice(a)
}

const EXACT: MeasureMethod = MeasureMethod::Exact;

/// Elementary symmetric polynomial e_k of the box edge lengths, which is
/// V_k of the box.
fn elementary(a: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &x in a {
        for j in (1..=k).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e[k]
}

fn random_rotation(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_columns(&random_subspace(rng, n, n))
}

#[test]
fn unit_cube_intrinsic_volumes() {
    let c = Polytope::cube(3).unwrap();
    assert_relative_eq!(intrinsic_volume(&c, 1, EXACT).unwrap().value, 3.0, epsilon = 1e-12);
    assert_relative_eq!(intrinsic_volume(&c, 2, EXACT).unwrap().value, 3.0, epsilon = 1e-12);
}

#[test]
fn boxes_match_elementary_symmetric_polynomials() {
    for a in [[1.0, 2.0, 3.0], [0.2, 5.0, 1.5]] {
        let p = Polytope::boxed(&a).unwrap();
        for k in 1..=2 {
            assert_relative_eq!(intrinsic_volume(&p, k, EXACT).unwrap().value, elementary(&a, k), epsilon = 1e-11);
        }
    }
    let a = [1.0, 0.5, 2.0, 1.5];
    let p = Polytope::boxed(&a).unwrap();
    assert_relative_eq!(intrinsic_volume(&p, 2, EXACT).unwrap().value, elementary(&a, 2), epsilon = 1e-11);
    let mc = intrinsic_volume(&p, 1, MeasureMethod::MonteCarlo { samples: 200_000, seed: 3 }).unwrap();
    assert!((mc.value - elementary(&a, 1)).abs() < 4.0 * mc.error_estimate);
}

#[test]
fn a_point_has_no_faces_to_weigh() {
    let p = convex_hull(&[v(&[0.3, 0.1, 2.0])]).unwrap();
    let r = intrinsic_volume(&p, 1, EXACT).unwrap();
    assert_eq!(r.value, 0.0);
    assert!(r.per_face_terms.is_empty());
}

#[test]
fn per_face_terms_sum_to_the_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_separable_kernel(&mut rng, 3, 1).unwrap();
    let r = phi(&f, &Polytope::simplex(3).unwrap(), EXACT).unwrap();
    assert_eq!(r.per_face_terms.len(), 6);
    let s: f64 = r.per_face_terms.iter().map(|t| t.contribution).sum();
    assert_relative_eq!(s, r.value, epsilon = 1e-14);
}

#[test]
fn klain_function_of_the_constant_kernel() {
    let f = constant_kernel(3, 2, 1.0).unwrap();
    let e = random_subspace(&mut ChaCha8Rng::seed_from_u64(1), 3, 2);
    assert_relative_eq!(klain_function(&f, &e, EXACT).unwrap().value, 1.0, epsilon = 1e-12);
    let f1 = constant_kernel(3, 1, 1.0).unwrap();
    assert!(matches!(klain_function(&f1, &e, EXACT), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn lemma18_kernel_has_a_vanishing_klain_function() {
    let s = Polytope::simplex(3).unwrap();
    let (f, _) = lemma18_kernel(&s, [0, 1], 0.4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let e = random_subspace(&mut rng, 3, 1);
        assert!(klain_function(&f, &e, EXACT).unwrap().value.abs() < 1e-8);
    }
}

#[test]
fn odd_kernels_are_rejected() {
    let f = Kernel::new(3, 1, "odd", |_, l| l[0]);
    assert!(matches!(phi(&f, &Polytope::cube(3).unwrap(), EXACT), Err(Error::OddInput(_))));
    let g = constant_kernel(4, 1, 1.0).unwrap();
    assert!(matches!(phi(&g, &Polytope::cube(3).unwrap(), EXACT), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn monte_carlo_is_deterministic_per_seed() {
    let f = constant_kernel(4, 1, 1.0).unwrap();
    let p = Polytope::simplex(4).unwrap();
    let m = MeasureMethod::MonteCarlo { samples: 20_000, seed: 9 };
    let a = phi(&f, &p, m).unwrap();
    assert_eq!(a, phi(&f, &p, m).unwrap());
    let b = phi(&f, &p, MeasureMethod::MonteCarlo { samples: 20_000, seed: 10 }).unwrap();
    assert_ne!(a.value, b.value);
}

#[test]
fn factored_minkowski_sums_are_additive() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let f = random_separable_kernel(&mut rng, 3, 1).unwrap();
    let (a, b) = (Polytope::cube(3).unwrap(), Polytope::simplex(3).unwrap());
    let s = MinkowskiSum { terms: vec![(0.5, a.clone()), (2.0, b.clone())] };
    let factored = phi_body(&f, &Body::Minkowski(s.clone()), EXACT).unwrap();
    assert_eq!(factored.summands, Some(2));
    let explicit = phi(&f, &s.explicit().unwrap(), EXACT).unwrap().value;
    assert_relative_eq!(factored.value, explicit, epsilon = 1e-9);
    let f2 = constant_kernel(3, 2, 1.0).unwrap();
    assert!(phi_body(&f2, &Body::Minkowski(s), EXACT).is_err());
}

#[test]
fn probe_on_a_polytope_limit_without_extrapolation() {
    let fam = FamilySpec::Bulge {
        polytope: PolytopeSpec::Simplex { simplex: 3 },
        edge: [vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
        delta: 0.3,
        segments: 4,
        height: HeightSchedule::Power { h0: 0.2, p: 1.0 },
    };
    let seq = PolytopeSequence::new(&fam).unwrap();
    let f = constant_kernel(3, 1, 1.0).unwrap();
    let mut opts = ProbeOptions::new(vec![64, 128, 256, 512]);
    opts.method = EXACT;
    let r = continuity_probe(&f, None, &seq, &opts).unwrap();
    assert_eq!(r.limit_method, "phi");
    assert_eq!(r.verdict, Verdict::ConvergesToValue);

    opts.extrapolation = ExtrapolationMode::None;
    let r = continuity_probe(&f, None, &seq, &opts).unwrap();
    assert_eq!(r.extrapolation, Extrapolation::LastMember);
    assert_eq!(r.extrapolated_limit, r.samples.last().unwrap().phi);
    assert!(r.extrapolation_sigma >= (r.samples[3].phi - r.samples[2].phi).abs());
}

#[test]
fn probe_needs_enough_members() {
    let fam = FamilySpec::Ball { center: vec![0.0; 3], radius: 1.0, growth: 8 };
    let seq = PolytopeSequence::new(&fam).unwrap();
    let f = constant_kernel(3, 1, 1.0).unwrap();
    let r = continuity_probe(&f, None, &seq, &ProbeOptions::new(vec![4, 8, 8, 16]));
    assert!(matches!(r, Err(Error::InvalidParameter(_))));
}

#[test]
fn weak_scan_of_the_constant_kernel_passes() {
    let f = constant_kernel(3, 1, 1.0).unwrap();
    let xi = vec![v(&[-1., 0., 0.]), v(&[0., -1., 0.]), v(&[0., 0., -1.]), v(&[1., 1., 1.]), v(&[1., 0., 0.])];
    let r = weak_continuity_scan(&f, &xi, &[0., 0., 0., 1., 1.], &[0., 0., 0., 0., 1.], (-0.2, 0.2), 8, 1e-5, EXACT)
        .unwrap();
    assert!(r.passes);
    assert!(r.refinement.last().map_or(true, |s| s.t_hi - s.t_lo <= 1e-5 + 1e-12));
    assert!(weak_continuity_scan(&f, &xi, &[0.; 4], &[0.; 5], (0.0, 1.0), 8, 1e-3, EXACT).is_err());
}

fn random_box(edges: [f64; 3], t: [f64; 3]) -> Polytope {
    Polytope::boxed(&edges).unwrap().translate(&v(&t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn translation_invariance(seed in 0u64..500, t in prop::array::uniform3(-3.0f64..3.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_separable_kernel(&mut rng, 3, 1).unwrap();
        let p = Polytope::simplex(3).unwrap();
        let a = phi(&f, &p, EXACT).unwrap().value;
        let b = phi(&f, &p.translate(&v(&t)), EXACT).unwrap().value;
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn homogeneity(seed in 0u64..500, s in 0.1f64..4.0, k in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_separable_kernel(&mut rng, 3, k).unwrap();
        let p = Polytope::simplex(3).unwrap();
        let a = phi(&f, &p, EXACT).unwrap().value;
        let b = phi(&f, &p.scale_by(s).unwrap(), EXACT).unwrap().value;
        prop_assert!((b - s.powi(k as i32) * a).abs() < 1e-9 * (1.0 + b.abs()));
    }

    #[test]
    fn inclusion_exclusion_for_split_boxes(
        seed in 0u64..500,
        edges in prop::array::uniform3(0.2f64..2.0),
        cut in 0.1f64..0.9,
        k in 1usize..3,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_separable_kernel(&mut rng, 3, k).unwrap();
        let whole = random_box(edges, [0.0; 3]);
        let c = cut * edges[0];
        let left = random_box([c, edges[1], edges[2]], [0.0; 3]);
        let right = random_box([edges[0] - c, edges[1], edges[2]], [c, 0.0, 0.0]);
        let wall = convex_hull(&[
            v(&[c, 0.0, 0.0]), v(&[c, edges[1], 0.0]), v(&[c, 0.0, edges[2]]), v(&[c, edges[1], edges[2]]),
        ]).unwrap();
        let val = |p: &Polytope| phi(&f, p, EXACT).unwrap().value;
        let lhs = val(&whole) + val(&wall);
        let rhs = val(&left) + val(&right);
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn rotation_covariance(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_separable_kernel(&mut rng, 3, 1).unwrap();
        let q = random_rotation(&mut rng, 3);
        let p = Polytope::simplex(3).unwrap();
        let qp = p.affine_image(&q, &Vector::zeros(3)).unwrap();
        let a = phi(&f, &p, EXACT).unwrap().value;
        let b = phi(&f.rotated(&q), &qp, EXACT).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        let c = intrinsic_volume(&qp, 1, EXACT).unwrap().value;
        prop_assert!((c - intrinsic_volume(&p, 1, EXACT).unwrap().value).abs() < 1e-10);
    }
}
