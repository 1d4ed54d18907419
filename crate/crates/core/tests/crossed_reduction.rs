//! Crossed products, the extended derivation, and the weight-change and
//! approximation harnesses.

use tomita_core::algebra::{FaithfulState, MatrixAlgebra};
use tomita_core::bimodule::check_bimodule_axioms;
use tomita_core::catalog::{crossed_inner, crossed_m2, diagonal_m2, weight_triples};
use tomita_core::crossed::{
    check_crossed_structure, check_group_commutation, extend_derivation, twisted_extension, ActionSpec, CrossedProduct,
};
use tomita_core::derivation::{check_derivation, gns_inner_derivation};
use tomita_core::dirichlet::build_form;
use tomita_core::linalg::{real, CMat};
use tomita_core::modular::ModularData;
use tomita_core::reduction::{approximation_harness, change_weight_harness, HarnessOptions};
use tomita_core::rng::seeded;
use tomita_core::{Error, Tolerances};

fn sorted_eigenvalues(m: &CMat<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = tomita_core::linalg::HermitianEigen::new(m).values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn trivial_group_reproduces_base_exactly() {
    for blocks in [&[2][..], &[1, 2][..]] {
        let a = MatrixAlgebra::new(blocks).unwrap();
        let md = ModularData::new(FaithfulState::<f64>::random(a, &mut seeded(1), 0.2));
        let delta = gns_inner_derivation(&md, &md.algebra().random_element(&mut seeded(2))).unwrap();
        let cp = CrossedProduct::build(&md, 1, ActionSpec::ModularDiscretized).unwrap();
        assert_eq!(cp.algebra(), md.algebra());
        assert_eq!(cp.modular().state().density(), md.state().density());
        let ext = extend_derivation(&delta, &cp).unwrap();
        assert_eq!(ext.matrix(), delta.matrix());
        assert_eq!(build_form(&ext).matrix(), build_form(&delta).matrix());
    }
}

#[test]
fn extended_generator_spectrum_is_replicated() {
    let (delta, cp, ext) = crossed_inner().unwrap();
    let base = sorted_eigenvalues(build_form(&delta).matrix());
    let mut expected: Vec<f64> = base.iter().flat_map(|&v| std::iter::repeat_n(v, cp.order())).collect();
    expected.sort_by(f64::total_cmp);
    let got = sorted_eigenvalues(build_form(&ext).matrix());
    assert_eq!(got.len(), expected.len());
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() <= 1e-9, "{g} vs {e}");
    }
}

#[test]
fn embedded_fiber_energy_matches_base() {
    let (delta, cp, ext) = crossed_inner().unwrap();
    let (base, big) = (build_form(&delta), build_form(&ext));
    let mut rng = seeded(3);
    for _ in 0..20 {
        let x = delta.modular().algebra().random_element::<f64>(&mut rng);
        let coords = delta.modular().algebra().coords(&x);
        let e0 = base.energy(&coords);
        let e1 = big.energy(&cp.embed(&coords));
        assert!((e0 - e1).abs() <= 1e-10 * (1.0 + e0));
        assert!((cp.embed(&coords).norm() - coords.norm()).abs() <= 1e-12 * coords.norm());
    }
}

#[test]
fn group_commutation_on_z2_crossed_m2() {
    let (delta, cp, ext) = crossed_inner().unwrap();
    let tol = Tolerances::default();
    let rep = check_group_commutation(&ext, &cp, 200, 4, &tol).unwrap();
    for row in ["left_group_commutation", "right_group_commutation"] {
        assert!(rep.get(row).unwrap().residual <= 1e-9, "{row}");
    }
    assert!(check_bimodule_axioms(ext.target(), 20, 5, &tol).unwrap().passed());
    assert!(check_derivation(&ext, 20, 6, &tol).unwrap().passed());
    let twisted = twisted_extension(&delta, &cp, &[0.0, 0.7]).unwrap();
    assert!(!check_group_commutation(&twisted, &cp, 10, 7, &tol).unwrap().passed());
    let untwisted = twisted_extension(&delta, &cp, &[0.0, 0.0]).unwrap();
    assert!(check_group_commutation(&untwisted, &cp, 10, 7, &tol).unwrap().passed());
}

#[test]
fn crossed_structure_rows_pass() {
    let cp = crossed_m2().unwrap();
    assert_eq!(cp.algebra().dim(), 8);
    let rep = check_crossed_structure(&cp, 30, 8, &Tolerances::default()).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
    assert!(rep.get("convolution_associative").unwrap().residual <= 1e-10);
}

#[test]
fn swap_on_two_points_is_full_matrix_algebra() {
    let a = MatrixAlgebra::new(&[1, 1]).unwrap();
    let md = ModularData::new(FaithfulState::<f64>::tracial(a.clone()));
    let mut w = CMat::zeros(2, 2);
    w[(0, 1)] = real(1.0);
    w[(1, 0)] = real(1.0);
    let cp = CrossedProduct::build(&md, 2, ActionSpec::Explicit(w)).unwrap();
    assert_eq!(cp.algebra().blocks(), &[2]);

    let e = |k| a.basis::<f64>(k);
    let lam = cp.shift(1);
    // Candidate matrix units indexed (row, col).
    let units = [[cp.pi(&e(0)), &lam * cp.pi(&e(1))], [&lam * cp.pi(&e(0)), cp.pi(&e(1))]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((units[i][j].adjoint() - &units[j][i]).norm() < 1e-12);
            for k in 0..2 {
                for l in 0..2 {
                    let prod = &units[i][j] * &units[k][l];
                    let want = if j == k {
                        units[i][l].clone()
                    } else {
                        CMat::zeros(prod.nrows(), prod.ncols())
                    };
                    assert!((prod - want).norm() < 1e-12, "E{i}{j}·E{k}{l}");
                }
            }
        }
    }
    let sum = &units[0][0] + &units[1][1];
    assert!((sum - CMat::identity(lam.nrows(), lam.ncols())).norm() < 1e-12);
}

#[test]
fn unsupported_actions_are_rejected() {
    let md = diagonal_m2();
    let mut w = CMat::zeros(2, 2);
    w[(0, 1)] = real(1.0);
    w[(1, 0)] = real(1.0);
    assert!(matches!(
        CrossedProduct::build(&md, 2, ActionSpec::Explicit(w)),
        Err(Error::Config(_))
    ));
    let a = MatrixAlgebra::full(3).unwrap();
    let md = ModularData::new(FaithfulState::<f64>::diagonal(a, &[0.5, 0.3, 0.2]).unwrap());
    assert!(matches!(
        CrossedProduct::build(&md, 2, ActionSpec::ModularDiscretized),
        Err(Error::Config(_))
    ));
}

#[test]
fn weight_change_triples_pass() {
    let opts = HarnessOptions {
        samples: 40,
        ..Default::default()
    };
    let tol = Tolerances::default();
    let triples = weight_triples().unwrap();
    assert_eq!(triples.len(), 5);
    for (k, (name, form, x)) in triples.iter().enumerate() {
        let rep = change_weight_harness(form, x, &opts, k as u64, &tol).unwrap();
        assert!(rep.passed(), "{name}: {:?}", rep.failures().collect::<Vec<_>>());
        assert_eq!(rep.labels["conclusion"], "pass", "{name}");
    }
}

#[test]
fn weight_breaking_form_commutation_is_refused() {
    let md = ModularData::new(FaithfulState::<f64>::tracial(MatrixAlgebra::full(2).unwrap()));
    let a = md.algebra();
    let mut v = a.zero::<f64>();
    v[(0, 0)] = real(1.0);
    v[(1, 1)] = real(-1.0);
    let form = build_form(&gns_inner_derivation(&md, &md.state().gns_embed(&v).unwrap()).unwrap());
    let mut x = a.identity::<f64>();
    x[(0, 1)] = real(0.4);
    x[(1, 0)] = real(0.4);
    let err = change_weight_harness(&form, &x, &HarnessOptions::default(), 1, &Tolerances::default());
    assert!(matches!(err, Err(Error::Precondition(_))));
}

#[test]
fn diagonal_tower_hypotheses_and_conclusion() {
    let md = diagonal_m2();
    let mut v = md.algebra().zero::<f64>();
    v[(0, 0)] = real(1.0);
    v[(1, 1)] = real(-0.5);
    let form = build_form(&gns_inner_derivation(&md, &md.state().gns_embed(&v).unwrap()).unwrap());
    let opts = HarnessOptions {
        samples: 40,
        ..Default::default()
    };
    let tol = Tolerances::default();
    let rep = approximation_harness(&form, &[vec![vec![0], vec![1]]], &opts, 9, &tol).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
    assert!(rep.get("level0.semigroup_commutation").unwrap().residual <= 1e-9);
    let single = approximation_harness(&form, &[], &opts, 9, &tol).unwrap();
    assert!(single.passed());
}
