//! Derivations, their forms, semigroups and the cone projection.

use proptest::prelude::*;
use tomita_core::algebra::{FaithfulState, MatrixAlgebra};
use tomita_core::bimodule::{check_bimodule_axioms, TomitaBimodule};
use tomita_core::catalog::{diagonal_m2, eigenvector_inner, group_cocycle, random_eigen_inner, reference_suite};
use tomita_core::checkers::{check_gns_symmetric, check_markov, MarkovClass};
use tomita_core::derivation::{bounded_ops, check_derivation, gns_inner_derivation, inner_derivation, Derivation};
use tomita_core::dirichlet::{
    build_form, check_completely_dirichlet, check_dirichlet, check_modular, DirichletCone, FormGenerator,
    ProjectionConfig, T_GRID,
};
use tomita_core::linalg::{conj_mat, expm, hermitian_part, op_norm, CMat};
use tomita_core::modular::ModularData;
use tomita_core::rng::seeded;
use tomita_core::{Error, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn unit_vector_gives_zero_derivation() {
    let md = diagonal_m2();
    let base = TomitaBimodule::gns(&md);
    let one = md.algebra().coords(&md.state().cyclic_vector());
    let delta = inner_derivation(&base, &one, 0.0).unwrap();
    assert!(delta.matrix().norm() < 1e-14);
    assert!(build_form(&delta).matrix().norm() < 1e-14);
    assert!(check_derivation(&delta, 10, 1, &tol()).unwrap().passed());
}

#[test]
fn zero_derivation_passes_and_has_zero_form() {
    let md = diagonal_m2();
    let delta = Derivation::zero(TomitaBimodule::gns(&md));
    assert!(check_derivation(&delta, 10, 1, &tol()).unwrap().passed());
    let form = build_form(&delta);
    assert_eq!(form.matrix().norm(), 0.0);
    assert!(delta.adjoint_matrix().norm() == 0.0);
    let cone = DirichletCone::new(md.state().clone(), ProjectionConfig::default());
    assert!(check_dirichlet(&form, &cone, 10, 2, &tol()).unwrap().passed());
}

#[test]
fn broken_conjugation_fails_the_conjugation_row() {
    let delta = eigenvector_inner(0, 1).unwrap();
    let broken = delta.target().with_corrupted_conjugation(0).unwrap();
    let bad = Derivation::new(broken.clone(), delta.matrix().clone(), "broken").unwrap();
    let rep = check_derivation(&bad, 10, 3, &tol()).unwrap();
    assert!(!rep.get("conjugation_intertwining").unwrap().pass);
    let axioms = check_bimodule_axioms(&broken, 10, 3, &tol()).unwrap();
    assert!(!axioms.passed());
}

#[test]
fn direct_sums_of_bimodules_pass() {
    let md = diagonal_m2();
    let gns = TomitaBimodule::gns(&md);
    let sum = gns.direct_sum(&gns.doubled(4f64.ln())).unwrap();
    let rep = check_bimodule_axioms(&sum, 20, 4, &tol()).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
}

#[test]
fn doubled_bimodule_at_zero_weight_on_trace_has_identity_generator() {
    let md = ModularData::new(FaithfulState::<f64>::tracial(MatrixAlgebra::full(2).unwrap()));
    let h = TomitaBimodule::gns(&md).doubled(0.0);
    assert!((h.generator() - CMat::identity(8, 8)).norm() < 1e-12);
    let j = h.jmap();
    let mut rng = seeded(5);
    for _ in 0..50 {
        let v = tomita_core::rng::gaussian_matrix::<f64>(&mut rng, 8, 1)
            .column(0)
            .into_owned();
        assert!((h.apply_j(&h.apply_j(&v)) - &v).norm() < 1e-12);
    }
    assert!((j * j - CMat::identity(8, 8)).norm() < 1e-12);
}

#[test]
fn inner_derivation_norm_bound() {
    let md = diagonal_m2();
    let base = TomitaBimodule::gns(&md);
    for (r, c) in [(0, 1), (1, 0), (0, 0)] {
        let a = md.algebra();
        let xi = a.coords(&a.basis::<f64>(a.unit_index(r, c).unwrap()));
        let omega = ([0.8f64, 0.2][r] / [0.8f64, 0.2][c]).ln();
        let delta = inner_derivation(&base, &xi, omega).unwrap();
        let ops = bounded_ops(&base, &xi);
        let jops = bounded_ops(&base, &base.apply_j(&xi));
        let bound = ops.left_bound + ops.right_bound + jops.left_bound + jops.right_bound;
        let norm = op_norm(delta.matrix());
        assert!(norm <= bound * (1.0 + 1e-12), "({r},{c}): {norm} > {bound}");
    }
}

#[test]
fn eigen_decomposition_uses_three_ratios_on_m2() {
    let md = diagonal_m2();
    let xi = md.algebra().random_element::<f64>(&mut seeded(6));
    let parts = md.decompose(&xi);
    let mut ratios: Vec<f64> = parts
        .iter()
        .filter(|(_, p)| p.norm() > 1e-12)
        .map(|(l, _)| l.exp())
        .collect();
    ratios.sort_by(f64::total_cmp);
    assert_eq!(ratios.len(), 3);
    for (got, want) in ratios.iter().zip([0.25, 1.0, 4.0]) {
        assert!((got - want).abs() < 1e-10);
    }
    let delta = gns_inner_derivation(&md, &xi).unwrap();
    let rep = check_derivation(&delta, 20, 7, &tol()).unwrap();
    assert!(rep.get("product_rule_sampled").unwrap().residual <= 1e-9);
}

#[test]
fn centralizer_vector_has_single_component() {
    let md = diagonal_m2();
    let mut x = md.algebra().zero::<f64>();
    x[(0, 0)] = tomita_core::linalg::real(0.3);
    x[(1, 1)] = tomita_core::linalg::real(-1.1);
    let parts = md.decompose(&md.state().gns_embed(&x).unwrap());
    let live: Vec<_> = parts.iter().filter(|(_, p)| p.norm() > 1e-12).collect();
    assert_eq!(live.len(), 1);
    assert!(live[0].0.abs() < 1e-12);
}

#[test]
fn tracial_commutator_form_matches_double_commutator() {
    let md = ModularData::new(FaithfulState::<f64>::tracial(MatrixAlgebra::full(2).unwrap()));
    let a = md.algebra().clone();
    let v = hermitian_part(&a.random_element::<f64>(&mut seeded(8)));
    let delta = gns_inner_derivation(&md, &md.state().gns_embed(&v).unwrap()).unwrap();
    let form = build_form(&delta);
    let ad = a.superoperator(|y: &CMat<f64>| &v * y - y * &v);
    let oracle = (&ad * &ad).scale(2.0);
    assert!((form.matrix() - &oracle).norm() <= 1e-12 * oracle.norm());
    for t in T_GRID {
        let direct = expm(&oracle.scale(-t));
        assert!((form.semigroup(t).unwrap() - direct).norm() < 1e-10, "t={t}");
    }
}

#[test]
fn energy_is_norm_of_derivation() {
    for (name, delta) in reference_suite().unwrap() {
        let form = build_form(&delta);
        let mut rng = seeded(9);
        let a = delta.modular().algebra();
        for _ in 0..5 {
            let x = a.random_element::<f64>(&mut rng);
            let lx = delta.modular().state().gns_embed(&x).unwrap();
            let e = form.energy_gns(&lx);
            let direct = delta.apply_gns(&lx).norm_squared();
            assert!((e - direct).abs() <= 1e-12 * (1.0 + direct), "{name}");
        }
        let one = delta.modular().state().cyclic_vector();
        assert!(form.energy_gns(&one).abs() < 1e-12, "{name}");
    }
}

#[test]
fn semigroup_spectral_mapping_and_law() {
    let md = ModularData::new(FaithfulState::<f64>::tracial(MatrixAlgebra::new(&[1, 1]).unwrap()));
    let mut gen = CMat::zeros(2, 2);
    gen[(1, 1)] = tomita_core::linalg::real(1.0);
    let form = FormGenerator::from_matrix(md, gen, "two-level").unwrap();
    let t1 = form.semigroup(1.0).unwrap();
    assert!((t1[(0, 0)].re - 1.0).abs() < 1e-15 && (t1[(1, 1)].re - (-1f64).exp()).abs() < 1e-15);
    assert!((form.semigroup(0.0).unwrap() - CMat::identity(2, 2)).norm() == 0.0);
}

#[test]
fn synthetic_non_modular_generator_fails() {
    let md = diagonal_m2();
    let a = md.algebra();
    let v = a.random_hermitian::<f64>(&mut seeded(10));
    let lv = md.state().left_action(&v);
    let gen = lv.adjoint() * &lv;
    let form = FormGenerator::from_matrix(md, gen, "left-multiplier").unwrap();
    assert!(!check_modular(&form, 10, 1, &tol()).unwrap().passed());
}

#[test]
fn killing_the_unit_is_not_markov() {
    let md = diagonal_m2();
    let form = FormGenerator::from_matrix(md.clone(), CMat::identity(4, 4), "identity").unwrap();
    let snaps = form.snapshots(&T_GRID).unwrap();
    let (_, class) = check_markov(md.algebra(), &snaps, &tol());
    assert_ne!(class, MarkovClass::Conservative);
}

#[test]
fn semigroup_at_zero_is_exactly_symmetric_and_unital() {
    let form = build_form(&random_eigen_inner(&[2], 1).unwrap());
    let snaps = form.snapshots(&[0.0]).unwrap();
    let rep = check_gns_symmetric(form.modular(), &snaps, 10, 1, &tol()).unwrap();
    assert!(rep.get("gns_symmetry").unwrap().residual < 1e-12);
    let (m, class) = check_markov(form.algebra(), &snaps, &tol());
    assert_eq!(class, MarkovClass::Conservative);
    assert!(m.get("unitality_defect").unwrap().residual < 1e-12);
}

#[test]
fn conjugated_semigroup_breaks_symmetry() {
    let form = build_form(&random_eigen_inner(&[2], 1).unwrap());
    let md = form.modular();
    let a = md.algebra();
    let h = a.random_hermitian::<f64>(&mut seeded(11));
    let u = expm(&h.scale(1.3).map(|z| z * num_complex::Complex::new(0.0, 1.0)));
    let ad = a.superoperator(|x: &CMat<f64>| &u * x * u.adjoint());
    let mut snaps = form.snapshots(&[0.5]).unwrap();
    snaps[0].on_algebra = &ad * &snaps[0].on_algebra * ad.adjoint();
    let rep = check_gns_symmetric(md, &snaps, 10, 2, &tol()).unwrap();
    assert!(!rep.get("gns_symmetry").unwrap().pass);
}

#[test]
fn complete_dirichlet_pipelines_agree_on_cocycles() {
    let delta = group_cocycle("cyclic:3", "rotation").unwrap();
    let form = build_form(&delta);
    let r = check_completely_dirichlet(&form, &ProjectionConfig::default(), 3, 15, 1, &tol()).unwrap();
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    assert_eq!(r.labels["complete_dirichlet_verdict"], r.labels["choi_verdict"]);
}

#[test]
fn non_eigenvector_is_reported_with_residual() {
    let md = diagonal_m2();
    let base = TomitaBimodule::gns(&md);
    let xi = md
        .algebra()
        .coords(&md.algebra().random_element::<f64>(&mut seeded(12)));
    match inner_derivation(&base, &xi, 0.0) {
        Err(Error::Eigenvector { residual }) => assert!(residual > 1e-3),
        other => panic!("expected eigenvector error, got {other:?}"),
    }
}

fn cone_member(state: &FaithfulState<f64>, seed: u64) -> CMat<f64> {
    let a = state.algebra();
    let h = a.random_hermitian::<f64>(&mut seeded(seed));
    let x = a.spectral_map(&h, |v| 1.0 / (1.0 + (-4.0 * v).exp()));
    state.quarter() * x * state.quarter()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn prop_semigroup_properties(k in 0usize..10, seed in any::<u64>(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let (_, delta) = reference_suite().unwrap().swap_remove(k);
        let form = build_form(&delta);
        let md = form.modular();
        let ts = form.semigroup(s).unwrap();
        let tt = form.semigroup(t).unwrap();
        let tst = form.semigroup(s + t).unwrap();
        prop_assert!((&tst - &ts * &tt).norm() <= 1e-10);
        let j = md.j_matrix();
        prop_assert!((j * conj_mat(&tt) * j - &tt).norm() <= 1e-10);
        prop_assert!(op_norm(&tt) <= 1.0 + 1e-12);
        prop_assert!((&tt - tt.adjoint()).norm() <= 1e-12);

        let p = form.algebra_map(&tt);
        let a = md.algebra();
        let one = a.apply(&p, &a.identity::<f64>());
        prop_assert!((one - a.identity::<f64>()).norm() <= 1e-10);

        let cone = DirichletCone::new(md.state().clone(), ProjectionConfig::default());
        let xi = cone_member(md.state(), seed);
        let moved = a.from_coords(&(&tt * a.coords(&xi)));
        let proj = cone.project(&hermitian_part(&moved)).unwrap();
        prop_assert!((proj.point - &moved).norm() <= 1e-7);
    }

    #[test]
    fn prop_energy_is_flow_invariant(k in 0usize..10, seed in any::<u64>(), t in -4.0f64..4.0) {
        let (_, delta) = reference_suite().unwrap().swap_remove(k);
        let form = build_form(&delta);
        let md = form.modular();
        let xi = md.algebra().random_element::<f64>(&mut seeded(seed));
        let moved = md.flow(tomita_core::linalg::real(t), &xi).unwrap();
        let (e0, e1) = (form.energy_gns(&xi), form.energy_gns(&moved));
        prop_assert!((e0 - e1).abs() <= 1e-9 * (1.0 + e0));
    }

    #[test]
    fn prop_projection_solver_converges(shape in 0usize..3, seed in any::<u64>(), scale in 0.1f64..3.0) {
        let blocks: &[usize] = [&[2][..], &[3][..], &[1, 2][..]][shape];
        let a = MatrixAlgebra::new(blocks).unwrap();
        let state = FaithfulState::<f64>::random(a.clone(), &mut seeded(seed), 0.3);
        let cone = DirichletCone::new(state.clone(), ProjectionConfig::default());
        let xi = a.random_hermitian::<f64>(&mut seeded(seed ^ 1)).scale(scale);
        let proj = cone.project(&xi).unwrap();
        prop_assert!(proj.monotone);
        prop_assert!(proj.kkt_residual <= 1e-7);
        let fixed = cone.project(&proj.point).unwrap();
        prop_assert!((fixed.point - &proj.point).norm() <= 1e-8);
    }

    #[test]
    fn prop_tracial_projection_is_clipping(n in 2usize..4, seed in any::<u64>(), scale in 0.1f64..4.0) {
        let a = MatrixAlgebra::full(n).unwrap();
        let state = FaithfulState::<f64>::tracial(a.clone());
        let cone = DirichletCone::new(state, ProjectionConfig::default());
        let xi = a.random_hermitian::<f64>(&mut seeded(seed)).scale(scale);
        let r = (n as f64).sqrt();
        let oracle = a.spectral_map(&xi.scale(r), |v| v.clamp(0.0, 1.0)).unscale(r);
        prop_assert!((cone.project(&xi).unwrap().point - oracle).norm() <= 1e-8);
    }
}

#[test]
fn saturated_unit_projects_to_half_power() {
    let md = diagonal_m2();
    let cone = DirichletCone::new(md.state().clone(), ProjectionConfig::default());
    let half = md.state().sqrt().clone();
    let p = cone.project(&half.scale(2.0)).unwrap();
    assert!((p.point - &half).norm() < 1e-8);
    let fixed = cone.project(&half).unwrap();
    assert!((fixed.point - &half).norm() < 1e-12);
}
