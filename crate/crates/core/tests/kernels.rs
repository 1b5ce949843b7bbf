use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use valab_core::faces::MeasureMethod;
use valab_core::kernels::{
    calibrate_kappa, chform_kernel, constant_kernel, kappa_closed_form, lemma18_kernel, pullback, random_separable_kernel,
    restrict_kernel, smap, FormSpec, GrassFunction, Kernel, KernelSpec, SphereForm,
};
use valab_core::linalg::{complement, random_subspace, random_unit};
use valab_core::valuation::{intrinsic_volume, phi};
use valab_core::{Error, Polytope, Vector};

fn v(a: &[f64]) -> Vector {
    DVector::from_column_slice(a)
}

/// Mean over the unit circle of span(a, b) by the trapezoid rule, written
/// independently of the library's sphere rules.
fn circle_mean(a: &Vector, b: &Vector, g: impl Fn(&Vector) -> f64) -> f64 {
    let n = 4096;
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            g(&(a * t.cos() + b * t.sin()))
        })
        .sum::<f64>()
        / n as f64
}

#[test]
fn constant_kernel_and_its_fiber_average() {
    let f = constant_kernel(3, 1, 2.5).unwrap();
    assert_eq!(f.eval(&[v(&[1., 0., 0.])], &v(&[0., 1., 0.])), 2.5);
    assert_relative_eq!(smap(&f).eval(&[v(&[0., 0., 1.])]), 2.5, epsilon = 1e-12);
    assert!(matches!(constant_kernel(3, 3, 1.0), Err(Error::InvalidFaceDimension { .. })));
}

#[test]
fn smap_of_a_square() {
    let f = Kernel::new(3, 1, "(l·e2)^2", |_, l| l[1] * l[1]);
    assert_relative_eq!(smap(&f).eval(&[v(&[1., 0., 0.])]), 0.5, epsilon = 1e-12);
}

#[test]
fn smap_of_a_zero_mean_profile() {
    // cos 2θ in the frame (e2, e3) of the circle around E = span(e1)
    let f = Kernel::new(3, 1, "cos2", |_, l| l[1] * l[1] - l[2] * l[2]);
    assert!(smap(&f).eval(&[v(&[1., 0., 0.])]).abs() < 1e-12);
}

#[test]
fn smap_agrees_with_an_independent_circle_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let f = random_separable_kernel(&mut rng, 3, 1).unwrap();
        let e = random_unit(&mut rng, 3);
        let perp = complement(std::slice::from_ref(&e), 3);
        let want = circle_mean(&perp[0], &perp[1], |l| f.eval(std::slice::from_ref(&e), l));
        assert_relative_eq!(smap(&f).eval(&[e]), want, epsilon = 1e-10);
    }
}

#[test]
fn pullback_is_a_section_of_smap() {
    let h = GrassFunction::new(3, 1, |e| 1.0 + e[0][0] * e[0][0] - 0.3 * e[0][2] * e[0][2]);
    let f = pullback(&h);
    let s = smap(&f);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let e = random_unit(&mut rng, 3);
        assert_relative_eq!(s.eval(&[e.clone()]), h.eval(&[e]), epsilon = 1e-12);
    }
}

#[test]
fn subtracting_the_pulled_back_average_lands_in_ker_s() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (n, k) in [(3, 1), (3, 2), (4, 1), (4, 2)] {
        let g = random_separable_kernel(&mut rng, n, k).unwrap();
        let f = g.combine(1.0, &pullback(&smap(&g)), -1.0).unwrap();
        let s = smap(&f);
        for _ in 0..10 {
            let e = random_subspace(&mut rng, n, k);
            assert!(s.eval(&e).abs() < 1e-9, "(n, k) = ({n}, {k})");
        }
    }
}

#[test]
fn lemma18_lies_in_ker_s_and_matches_its_prediction() {
    let s = Polytope::simplex(3).unwrap();
    for w in [0.1, 0.4, 0.6] {
        let (f, info) = lemma18_kernel(&s, [0, 1], w).unwrap();
        let sf = smap(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert!(sf.eval(&[random_unit(&mut rng, 3)]).abs() < 1e-8);
        }
        // near the edge direction, where the bump is active
        assert!(sf.eval(&[v(&[1.0, 0.05, 0.0]).normalize()]).abs() < 1e-8);
        let value = phi(&f, &s, MeasureMethod::Exact).unwrap().value;
        assert_relative_eq!(value, info.predicted_value, epsilon = 1e-10);
        assert!(value.abs() > 1e-2);
    }
}

#[test]
fn lemma18_rejects_overlapping_bumps() {
    // edges [0,e1] and [e2, e1+e2]... in the cube are parallel; in the simplex
    // [e1,e2] makes an angle of π/4 with [0,e1]
    let s = Polytope::simplex(3).unwrap();
    assert!(matches!(lemma18_kernel(&s, [0, 1], 0.9), Err(Error::BumpOverlap { .. })));
    assert!(matches!(lemma18_kernel(&s, [1, 2], 0.3).map(|_| ()), Ok(())));
    assert!(lemma18_kernel(&s, [0, 1], 2.0).is_err());
}

#[test]
fn invariant_form_gives_the_constant_kernel() {
    let f = chform_kernel(&SphereForm::invariant()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let c = {
        let e = v(&[1., 0., 0.]);
        f.eval(std::slice::from_ref(&e), &v(&[0., 1., 0.]))
    };
    assert!(c.abs() > 0.5);
    for _ in 0..20 {
        let e = random_unit(&mut rng, 3);
        let l = complement(std::slice::from_ref(&e), 3)[0].clone();
        assert_relative_eq!(f.eval(std::slice::from_ref(&e), &l), c, epsilon = 1e-12);
    }
    let p = Polytope::boxed(&[1.0, 2.0, 0.5]).unwrap();
    let v1 = intrinsic_volume(&p, 1, MeasureMethod::Exact).unwrap().value;
    assert_relative_eq!(phi(&f, &p, MeasureMethod::Exact).unwrap().value, c * v1, epsilon = 1e-10);
}

#[test]
fn chform_rejects_an_even_form() {
    // an m-independent matrix field is even in m, so its kernel is odd and vanishes
    let form = SphereForm {
        terms: vec![valab_core::kernels::FormTerm { exponents: [0, 0, 0], matrix: [[1., 2., 0.], [0., 1., 3.], [1., 0., 1.]] }],
    };
    assert!(chform_kernel(&form).is_err());
    assert!(chform_kernel(&SphereForm::default()).is_err());
}

#[test]
fn random_chforms_are_even_in_l() {
    for seed in 0..4 {
        let f = chform_kernel(&FormSpec::Random { seed, degree: 3 }.build().unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let e = random_unit(&mut rng, 3);
            let l = complement(std::slice::from_ref(&e), 3)[1].clone();
            let a = f.eval(std::slice::from_ref(&e), &l);
            assert_relative_eq!(a, f.eval(std::slice::from_ref(&e), &-&l), epsilon = 1e-12);
            assert_relative_eq!(a, f.eval(&[-&e], &l), epsilon = 1e-12);
        }
    }
}

#[test]
fn kappa_values() {
    assert_relative_eq!(calibrate_kappa(4).unwrap(), PI / 2.0, epsilon = 1e-12);
    assert_relative_eq!(kappa_closed_form(4), PI / 2.0, epsilon = 1e-12);
    // n = 5: the fiber is S^2 and the weight is |cos θ|; E|cos θ| = 1/2 by a
    // midpoint rule in θ with the sin θ area element
    let m = 200_000;
    let h = PI / m as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..m {
        let t = (i as f64 + 0.5) * h;
        num += t.cos().abs() * t.sin();
        den += t.sin();
    }
    let oracle = den / num;
    assert_relative_eq!(calibrate_kappa(5).unwrap(), oracle, epsilon = 1e-8);
    assert_relative_eq!(kappa_closed_form(5), 2.0, epsilon = 1e-12);
    assert_relative_eq!(calibrate_kappa(6).unwrap(), kappa_closed_form(6), epsilon = 1e-10);
    assert!(calibrate_kappa(3).is_err());
}

#[test]
fn restriction_of_one_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [4, 5] {
        let w = random_subspace(&mut rng, n, 3);
        let u = restrict_kernel(&constant_kernel(n, 1, 1.0).unwrap(), &w, None).unwrap();
        for _ in 0..10 {
            let e = random_unit(&mut rng, 3);
            let l = complement(std::slice::from_ref(&e), 3)[0].clone();
            assert_relative_eq!(u.kernel().eval(&[e], &l), 1.0, epsilon = 1e-6);
        }
    }
}

#[test]
fn restriction_of_a_kernel_vanishing_on_the_fibers() {
    // (m·e)^2 vanishes for m ⊥ E, and span(l, W^⊥) ⊥ E when E ⊂ W
    let f = Kernel::new(4, 1, "(m·e)^2", |e, m| e[0].dot(m).powi(2));
    let w = vec![v(&[1., 0., 0., 0.]), v(&[0., 1., 0., 0.]), v(&[0., 0., 1., 0.])];
    let u = restrict_kernel(&f, &w, None).unwrap();
    let g = u.kernel().eval(&[v(&[0.6, 0.8, 0.])], &v(&[0., 0., 1.]));
    assert!(g.abs() < 1e-14);
}

#[test]
fn restriction_ambient_checks() {
    let w = vec![v(&[1., 0., 0., 0.]), v(&[0., 1., 0., 0.]), v(&[0., 0., 1., 0.])];
    let u = restrict_kernel(&constant_kernel(4, 1, 1.0).unwrap(), &w, Some(PI / 2.0)).unwrap();
    assert_relative_eq!(u.eval_ambient(&v(&[1., 0., 0., 0.]), &v(&[0., 1., 0., 0.])).unwrap(), 1.0, epsilon = 1e-10);
    assert!(matches!(
        u.eval_ambient(&v(&[0., 0., 0., 1.]), &v(&[0., 1., 0., 0.])),
        Err(Error::NotInSubspace(_))
    ));
    assert!(restrict_kernel(&constant_kernel(3, 1, 1.0).unwrap(), &w, None).is_err());
}

#[test]
fn kernel_specs_from_json() {
    let specs = [
        r#"{"kind": "constant", "params": {"n": 3, "k": 2, "value": 0.5}}"#,
        r#"{"kind": "separable", "params": {"n": 3, "k": 1, "random_seed": 4}}"#,
        r#"{"kind": "lemma18", "params": {"polytope": {"simplex": 3}, "edge": [[0,0,0],[1,0,0]], "bump_width": 0.4}}"#,
        r#"{"kind": "chform", "params": {"form": "invariant"}}"#,
        r#"{"kind": "chform", "params": {"form": "random", "seed": 3, "degree": 1}}"#,
        r#"{"kind": "restricted", "params": {"inner": {"kind": "constant", "params": {"n": 4, "k": 1}},
            "w": [[1,0,0,0],[0,1,0,0],[0,0,1,0]]}}"#,
    ];
    for s in specs {
        let spec: KernelSpec = serde_json::from_str(s).unwrap();
        let back: KernelSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
        spec.build().unwrap();
    }
    let (_, info) = serde_json::from_str::<KernelSpec>(specs[2]).unwrap().build_with_info().unwrap();
    assert!(info.is_some());
    let bad: KernelSpec = serde_json::from_str(r#"{"kind": "chform", "params": {"form": "random", "seed": 3, "degree": 2}}"#).unwrap();
    assert!(bad.build().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn separable_kernels_are_even(seed in 0u64..1000, e in prop::array::uniform3(-1.0f64..1.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_separable_kernel(&mut rng, 3, 1).unwrap();
        let e = v(&e);
        prop_assume!(e.norm() > 1e-3);
        let e = e.normalize();
        let l = complement(std::slice::from_ref(&e), 3)[0].clone();
        let a = f.eval(std::slice::from_ref(&e), &l);
        prop_assert!((a - f.eval(std::slice::from_ref(&e), &-&l)).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn smap_is_rotation_equivariant(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_separable_kernel(&mut rng, 3, 1).unwrap();
        let q = {
            let b = random_subspace(&mut rng, 3, 3);
            nalgebra::DMatrix::from_columns(&b)
        };
        let e = random_unit(&mut rng, 3);
        let rotated = smap(&f.rotated(&q)).eval(&[&q * &e]);
        prop_assert!((rotated - smap(&f).eval(&[e])).abs() < 1e-10);
    }
}
