use approx::assert_relative_eq;
use nalgebra::{DVector, Vector3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use valab_core::faces::MeasureMethod;
use valab_core::kernels::{chform_kernel, constant_kernel, lemma18_kernel, FormSpec};
use valab_core::linalg::random_unit;
use valab_core::transforms::{
    cosine_multipliers, cosine_transform, harmonic_project, integrate_against_support, klain_preimage, legendre,
    multiplier_exact, range_diagnostic, test_harmonic, SphereFunction,
};
use valab_core::valuation::phi;
use valab_core::{Error, Polytope};

/// λ_d = ∫_0^1 t P_d(t) dt for even d ≥ 2 in closed form.
fn lambda_closed(d: usize) -> f64 {
    if d == 0 {
        return 0.5;
    }
    let h = d / 2;
    let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
    let sign = if h % 2 == 1 { 1.0 } else { -1.0 };
    sign * fact(d - 2) / (2f64.powi(d as i32) * fact(h - 1) * fact(h + 1))
}

#[test]
fn closed_form_multipliers_agree_with_the_library() {
    assert_relative_eq!(lambda_closed(2), 0.125, epsilon = 1e-15);
    for d in (0..=16).step_by(2) {
        assert_relative_eq!(multiplier_exact(d), lambda_closed(d), epsilon = 1e-14);
    }
}

#[test]
fn numerical_multipliers_alternate_and_decay() {
    let ms = cosine_multipliers(10).unwrap();
    assert_eq!(ms.len(), 6);
    for m in &ms {
        assert_relative_eq!(m.multiplier, lambda_closed(m.degree), epsilon = 1e-9);
        assert!(m.leakage < 1e-8);
    }
    for w in ms[1..].windows(2) {
        assert!(w[0].multiplier * w[1].multiplier < 0.0);
        assert!(w[1].multiplier.abs() < w[0].multiplier.abs());
    }
}

#[test]
fn cosine_transform_of_constants_and_harmonics() {
    let one = SphereFunction::new(3, |_| 1.0);
    let c1 = cosine_transform(&one).unwrap();
    let y = test_harmonic(2);
    let cy = cosine_transform(&y).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let u = random_unit(&mut rng, 3);
        assert_relative_eq!(c1.eval(&u), 0.5, epsilon = 1e-10);
        assert_relative_eq!(cy.eval(&u), 0.125 * y.eval(&u), epsilon = 1e-10);
    }
    // on S^3 the density of t = ⟨u, v⟩ is ∝ (1 − t²)^{1/2}
    let m = 100_000;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..m {
        let t = -1.0 + (i as f64 + 0.5) * 2.0 / m as f64;
        let w = (1.0 - t * t).sqrt();
        num += t.abs() * w;
        den += w;
    }
    let one4 = SphereFunction::new(4, |_| 1.0);
    let c4 = cosine_transform(&one4).unwrap();
    assert_relative_eq!(c4.eval(&random_unit(&mut rng, 4)), num / den, epsilon = 1e-6);
}

#[test]
fn odd_functions_and_other_dimensions_are_rejected() {
    let odd = SphereFunction::new(3, |v| v[0]);
    assert!(matches!(cosine_transform(&odd), Err(Error::OddInput(_))));
    let g5 = SphereFunction::new(5, |_| 1.0);
    assert!(matches!(cosine_transform(&g5), Err(Error::UnsupportedDimension(_))));
}

#[test]
fn energy_split_of_z_squared() {
    let g = SphereFunction::new(3, |v| v[2] * v[2]);
    let s = harmonic_project(&g, 4).unwrap();
    assert_relative_eq!(s.energy, 0.2, epsilon = 1e-12);
    assert_relative_eq!(s.block_energy(0), 1.0 / 9.0, epsilon = 1e-12);
    assert_relative_eq!(s.block_energy(2), 4.0 / 45.0, epsilon = 1e-12);
    assert!(s.block_energy(4) < 1e-24);
    assert!(s.odd_residual < 1e-24);
}

#[test]
fn zonal_harmonics_project_onto_their_degree() {
    for d in [0, 2, 4, 6] {
        let s = harmonic_project(&test_harmonic(d), 8).unwrap();
        assert_relative_eq!(s.block_energy(d), 1.0, epsilon = 1e-10);
        assert_relative_eq!(s.energy, 1.0, epsilon = 1e-10);
    }
    assert_relative_eq!(legendre(4, 0.3), (35.0 * 0.3f64.powi(4) - 30.0 * 0.09 + 3.0) / 8.0, epsilon = 1e-15);
}

#[test]
fn range_of_the_constant_kernel() {
    let r = range_diagnostic(&constant_kernel(3, 1, 1.0).unwrap(), 8).unwrap();
    assert_relative_eq!(r.preimage_mean, 2.0, epsilon = 1e-12);
    assert!(r.tail_fraction < 1e-20);
    let r = range_diagnostic(&lemma18_kernel(&Polytope::simplex(3).unwrap(), [0, 1], 0.4).unwrap().0, 8).unwrap();
    assert!(r.fiber_average_energy < 1e-10);
}

#[test]
fn chform_preimages_decay() {
    let f = chform_kernel(&FormSpec::Random { seed: 1, degree: 3 }.build().unwrap()).unwrap();
    let r = range_diagnostic(&f, 10).unwrap();
    assert!(r.fiber_average_energy > 1e-6);
    assert!(r.truncation_residual < 1e-10 * r.fiber_average_energy.max(1.0));
    assert!(r.tail_fraction < 1e-3, "tail fraction {}", r.tail_fraction);
}

#[test]
fn preimage_monomials_match_the_harmonic_sum() {
    let f = chform_kernel(&FormSpec::Random { seed: 2, degree: 1 }.build().unwrap()).unwrap();
    let (pre, _) = klain_preimage(&f, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let u = random_unit(&mut rng, 3);
        let u = Vector3::new(u[0], u[1], u[2]);
        assert_relative_eq!(pre.eval(&u), pre.spectrum.eval(&u), epsilon = 1e-10);
    }
}

#[test]
fn klain_preimage_needs_lines_in_three_space() {
    assert!(klain_preimage(&constant_kernel(3, 2, 1.0).unwrap(), 4).is_err());
    assert!(klain_preimage(&constant_kernel(4, 1, 1.0).unwrap(), 4).is_err());
}

#[test]
fn mean_support_of_the_unit_cube() {
    // h(u) = Σ max(u_i, 0) has mean 3/4
    let cube = Polytope::cube(3).unwrap();
    assert_relative_eq!(integrate_against_support(|_| 1.0, &cube, 8).unwrap(), 0.75, epsilon = 1e-12);
}

#[test]
fn forced_value_reproduces_phi_on_polytopes() {
    // ψ(P) = 2⟨C⁻¹ S f, h_P⟩ agrees with φ_f(P) for kernels whose S f is in the range
    let p = Polytope::boxed(&[1.0, 0.5, 2.0]).unwrap();
    for f in [
        constant_kernel(3, 1, 1.0).unwrap(),
        chform_kernel(&FormSpec::Random { seed: 3, degree: 1 }.build().unwrap()).unwrap(),
    ] {
        let (pre, _) = klain_preimage(&f, 12).unwrap();
        let psi = 2.0 * integrate_against_support(|u| pre.eval(u), &p, 12).unwrap();
        let want = phi(&f, &p, MeasureMethod::Exact).unwrap().value;
        assert_relative_eq!(psi, want, epsilon = 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn cosine_transform_is_rotation_equivariant(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = nalgebra::DMatrix::from_columns(&valab_core::linalg::random_subspace(&mut rng, 3, 3));
        let g = SphereFunction::new(3, |v| v[0] * v[0] + 0.5 * v[1] * v[2] + v[2].powi(4));
        let u = random_unit(&mut rng, 3);
        let a = cosine_transform(&g.rotated(&q)).unwrap().eval(&(&q * &u));
        let b = cosine_transform(&g).unwrap().eval(&u);
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn quartic_polynomials_are_reproduced(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = SphereFunction::new(3, move |v| a * v[0] * v[1] + b * v[2].powi(2));
        let s = harmonic_project(&g, 4).unwrap();
        let e: f64 = [0, 2, 4].iter().map(|&d| s.block_energy(d)).sum();
        prop_assert!((e - s.energy).abs() < 1e-12 * (1.0 + s.energy));
        let u = DVector::from_vec(vec![0.36, 0.48, 0.8]);
        let u3 = Vector3::new(0.36, 0.48, 0.8);
        prop_assert!((s.eval(&u3) - g.eval(&u)).abs() < 1e-10);
    }
}

