//! The generic core instantiated at single precision.

use tomita_core::algebra::{FaithfulState, MatrixAlgebra};
use tomita_core::checkers::{choi, unitality_defect};
use tomita_core::derivation::{check_derivation, gns_inner_derivation};
use tomita_core::dirichlet::build_form;
use tomita_core::linalg::CMat;
use tomita_core::modular::ModularData;
use tomita_core::rng::seeded;
use tomita_core::Tolerances;

#[test]
fn single_precision_pipeline() {
    let a = MatrixAlgebra::full(2).unwrap();
    let md = ModularData::new(FaithfulState::<f32>::diagonal(a, &[0.8, 0.2]).unwrap());
    let xi = md.algebra().random_element::<f32>(&mut seeded(1));
    let delta = gns_inner_derivation(&md, &xi).unwrap();
    let tol = Tolerances::default().scaled(1e4);
    let rep = check_derivation(&delta, 10, 2, &tol).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());

    let form = build_form(&delta);
    let d = md.algebra().dim();
    let t0 = form.semigroup(0.0).unwrap();
    assert!((t0 - CMat::<f32>::identity(d, d)).norm() < 1e-5);
    for t in [0.1f32, 1.0] {
        let p = form.algebra_map(&form.semigroup(t).unwrap());
        assert!(choi(md.algebra(), &p).min_eigenvalue >= -1e-5, "t={t}");
        assert!(unitality_defect(md.algebra(), &p) < 1e-4, "t={t}");
    }
}
