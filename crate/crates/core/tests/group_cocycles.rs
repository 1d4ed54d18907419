//! Cocycles on finite groups and their multiplier semigroups.

use nalgebra::DVector;
use proptest::prelude::*;
use tomita_core::bimodule::check_bimodule_axioms;
use tomita_core::checkers::choi;
use tomita_core::dirichlet::{build_form, T_GRID};
use tomita_core::group::{
    check_cocycle, cnd_check, cocycle_derivation, group_bimodule, multiplier_semigroup, sample_cocycle, Cocycle,
    GroupAlgebra, GroupSpec, OrthogonalRep,
};
use tomita_core::linalg::{cplx, CMat, CVec, HermitianEigen};
use tomita_core::rng::seeded;
use tomita_core::{Error, Tolerances};

const PRESETS: [(&str, &str); 4] = [
    ("cyclic:2", "sign"),
    ("cyclic:3", "rotation"),
    ("cyclic:4", "rotation"),
    ("sym:3", "standard"),
];

fn scalar_cocycle(values: &[f64]) -> Cocycle<f64> {
    Cocycle {
        values: values.iter().map(|&v| DVector::from_element(1, v)).collect(),
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn z2_sign_cocycles_are_arbitrary_at_the_generator() {
    let g = GroupSpec::cyclic(2).unwrap();
    let sign = OrthogonalRep::<f64>::sign(&g).unwrap();
    let tol = Tolerances::default();
    for c in [-2.0, 0.0, 0.3, 5.0] {
        assert!(check_cocycle(&g, &sign, &scalar_cocycle(&[0.0, c]), &tol).passed());
    }
    let trivial = OrthogonalRep::<f64>::trivial(&g, 1);
    assert!(!check_cocycle(&g, &trivial, &scalar_cocycle(&[0.0, 1.0]), &tol).passed());
    assert!(check_cocycle(&g, &trivial, &scalar_cocycle(&[0.0, 0.0]), &tol).passed());
}

#[test]
fn violated_cocycle_is_rejected_by_the_derivation() {
    let g = GroupSpec::cyclic(2).unwrap();
    let ga = GroupAlgebra::<f64>::new(g.clone()).unwrap();
    let trivial = OrthogonalRep::<f64>::trivial(&g, 1);
    let err = cocycle_derivation(&ga, &trivial, &scalar_cocycle(&[0.0, 1.0])).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

#[test]
fn z2_generator_and_multiplier() {
    let g = GroupSpec::cyclic(2).unwrap();
    let ga = GroupAlgebra::<f64>::new(g.clone()).unwrap();
    let sign = OrthogonalRep::<f64>::sign(&g).unwrap();
    let b = scalar_cocycle(&[0.0, 1.0]);
    let form = build_form(&cocycle_derivation(&ga, &sign, &b).unwrap());
    let spec = sorted(form.eigen().values.clone());
    assert!(spec[0].abs() < 1e-12 && (spec[1] - 1.0).abs() < 1e-12);

    let c2: f64 = 2.25;
    let lam = ga.lambda_coords();
    let inv = lam.clone().try_inverse().unwrap();
    for t in [0.0, 0.3, 1.0] {
        let m = multiplier_semigroup(&ga, &[0.0, c2], t).unwrap();
        let in_lambda = &inv * m * lam;
        let want = CMat::from_diagonal(&CVec::from_vec(vec![cplx(1.0, 0.0), cplx((-t * c2).exp(), 0.0)]));
        assert!((in_lambda - want).norm() < 1e-12, "t={t}");
    }
}

#[test]
fn group_algebras_are_tracial() {
    for (name, _) in PRESETS {
        let ga = GroupAlgebra::<f64>::new(GroupSpec::preset(name).unwrap()).unwrap();
        let d = ga.modular().algebra().dim();
        assert!(ga.modular().state().is_tracial(), "{name}");
        assert!((ga.modular().delta() - CMat::identity(d, d)).norm() < 1e-10, "{name}");
    }
}

#[test]
fn trivial_representation_conjugation_formula() {
    let g = GroupSpec::cyclic(3).unwrap();
    let ga = GroupAlgebra::<f64>::new(g.clone()).unwrap();
    let h = group_bimodule(&ga, &OrthogonalRep::trivial(&g, 1)).unwrap();
    for k in 0..3 {
        let mut v = CVec::<f64>::zeros(3);
        v[k] = cplx(0.5, 2.0);
        let mut want = CVec::<f64>::zeros(3);
        want[g.inv(k)] = -cplx(0.5, -2.0);
        assert!((h.apply_j(&v) - want).norm() < 1e-12, "g={k}");
    }
}

#[test]
fn group_bimodules_satisfy_axioms() {
    let tol = Tolerances::default();
    for (name, rep) in [("cyclic:2", "sign"), ("sym:3", "standard")] {
        let g = GroupSpec::preset(name).unwrap();
        let ga = GroupAlgebra::<f64>::new(g.clone()).unwrap();
        let r = OrthogonalRep::<f64>::preset(&g, rep).unwrap();
        let h = group_bimodule(&ga, &r).unwrap();
        assert_eq!(h.dim(), g.order() * r.dim());
        let rep = check_bimodule_axioms(&h, 20, 3, &tol).unwrap();
        assert!(rep.passed(), "{name}: {:?}", rep.failures().collect::<Vec<_>>());
    }
}

#[test]
fn cnd_controls() {
    let g = GroupSpec::cyclic(2).unwrap();
    let tol = Tolerances::default();
    assert!(cnd_check(&g, &[0.0, 0.0], &T_GRID, &tol).passed());
    assert!(!cnd_check(&g, &[0.0, -1.0], &T_GRID, &tol).passed());
}

#[test]
fn multiplier_choi_is_positive_on_z3() {
    let g = GroupSpec::cyclic(3).unwrap();
    let ga = GroupAlgebra::<f64>::new(g.clone()).unwrap();
    let r = OrthogonalRep::<f64>::rotation(&g).unwrap();
    let psi = sample_cocycle(&g, &r, &mut seeded(3)).psi();
    for t in T_GRID {
        let m = multiplier_semigroup(&ga, &psi, t).unwrap();
        assert!(choi(ga.modular().algebra(), &m).min_eigenvalue >= -1e-10, "t={t}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn prop_multiplier_equals_derivation_semigroup(p in 0usize..4, seed in any::<u64>()) {
        let (name, rep) = PRESETS[p];
        let g = GroupSpec::preset(name).unwrap();
        let ga = GroupAlgebra::<f64>::new(g.clone()).unwrap();
        let r = OrthogonalRep::<f64>::preset(&g, rep).unwrap();
        let b = sample_cocycle(&g, &r, &mut seeded(seed));
        let tol = Tolerances::default();
        prop_assert!(check_cocycle(&g, &r, &b, &tol).passed());
        let psi = b.psi();
        prop_assert!(cnd_check(&g, &psi, &T_GRID, &tol).passed());
        let form = build_form(&cocycle_derivation(&ga, &r, &b).unwrap());
        let got = sorted(form.eigen().values.clone());
        let want = sorted(psi.clone());
        for (x, y) in got.iter().zip(&want) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + y));
        }
        for t in T_GRID {
            let m = multiplier_semigroup(&ga, &psi, t).unwrap();
            let s = form.snapshot(t).unwrap().on_algebra;
            prop_assert!((m - s).norm() <= 1e-10);
        }
    }

    #[test]
    fn prop_non_cnd_functions_fail(p in 0usize..4, seed in any::<u64>()) {
        let g = GroupSpec::preset(PRESETS[p].0).unwrap();
        let n = g.order();
        // A negative constant off the identity is negative definite on mean-zero vectors.
        let mut rng = seeded(seed);
        let bump: f64 = tomita_core::rng::uniform(&mut rng, 0.5, 3.0);
        let mut psi = vec![-bump; n];
        psi[0] = 0.0;
        let sym: Vec<f64> = (0..n).map(|h| 0.5 * (psi[h] + psi[g.inv(h)])).collect();
        let rep = cnd_check(&g, &sym, &T_GRID, &Tolerances::default());
        prop_assert!(!rep.passed());
        let k = CMat::<f64>::from_fn(n, n, |i, j| cplx(sym[g.mul(g.inv(i), j)], 0.0));
        prop_assert!(HermitianEigen::new(&k).max() > 0.0);
    }
}
