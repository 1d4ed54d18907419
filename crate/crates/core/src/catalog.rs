//! Reference instances shared by the test suites and the command line.

use crate::algebra::{FaithfulState, MatrixAlgebra};
use crate::bimodule::TomitaBimodule;
use crate::crossed::{extend_derivation, ActionSpec, CrossedProduct};
use crate::derivation::{gns_inner_derivation, inner_derivation, Derivation};
use crate::dirichlet::{build_form, FormGenerator};
use crate::error::Result;
use crate::group::{cocycle_derivation, sample_cocycle, GroupAlgebra, GroupSpec, OrthogonalRep};
use crate::linalg::{hermitian_part, real, CMat, CVec};
use crate::modular::ModularData;
use crate::rng::seeded;

/// Seed used for every randomly drawn catalog instance.
pub const CATALOG_SEED: u64 = 0x7017_a5ee;

pub fn diagonal_m2() -> ModularData<f64> {
    let a = MatrixAlgebra::full(2).expect("M2");
    ModularData::new(FaithfulState::diagonal(a, &[0.8, 0.2]).expect("faithful"))
}

fn random_state(blocks: &[usize], stream: u64) -> ModularData<f64> {
    let a = MatrixAlgebra::new(blocks).expect("valid blocks");
    ModularData::new(FaithfulState::random(a, &mut seeded(CATALOG_SEED ^ stream), 0.2))
}

fn unit_vector(md: &ModularData<f64>, row: usize, col: usize) -> CVec<f64> {
    let a = md.algebra();
    a.coords(&a.basis::<f64>(a.unit_index(row, col).expect("unit")))
}

/// Inner derivation of the modular eigenvector `Λ(E_row,col)` on `diag(0.8, 0.2)`.
pub fn eigenvector_inner(row: usize, col: usize) -> Result<Derivation<f64>> {
    let md = diagonal_m2();
    let rho = [0.8f64, 0.2];
    let omega = (rho[row] / rho[col]).ln();
    let base = TomitaBimodule::gns(&md);
    inner_derivation(&base, &unit_vector(&md, row, col), omega)
}

/// Eigen-decomposed inner derivation of a random vector over a random state.
pub fn random_eigen_inner(blocks: &[usize], stream: u64) -> Result<Derivation<f64>> {
    let md = random_state(blocks, stream);
    let xi = md
        .algebra()
        .random_element::<f64>(&mut seeded(CATALOG_SEED ^ stream ^ 0xFF));
    gns_inner_derivation(&md, &xi)
}

/// Commutator derivation of a self-adjoint `v` on tracial `M_n`.
pub fn tracial_commutator(n: usize, stream: u64) -> Result<Derivation<f64>> {
    let a = MatrixAlgebra::full(n)?;
    let md = ModularData::new(FaithfulState::tracial(a));
    let v = hermitian_part(&md.algebra().random_element::<f64>(&mut seeded(CATALOG_SEED ^ stream)));
    gns_inner_derivation(&md, &md.state().gns_embed(&v)?)
}

/// Cocycle derivation for a named group and representation preset.
pub fn group_cocycle(group: &str, rep: &str) -> Result<Derivation<f64>> {
    let g = GroupSpec::preset(group)?;
    let r = OrthogonalRep::<f64>::preset(&g, rep)?;
    let ga = GroupAlgebra::new(g.clone())?;
    let b = sample_cocycle(&g, &r, &mut seeded(CATALOG_SEED));
    cocycle_derivation(&ga, &r, &b)
}

/// The ten derivations whose forms must pass every certification.
pub fn reference_suite() -> Result<Vec<(String, Derivation<f64>)>> {
    Ok(vec![
        ("inner_eigen_m2_upper".into(), eigenvector_inner(0, 1)?),
        ("inner_eigen_m2_lower".into(), eigenvector_inner(1, 0)?),
        ("eigen_inner_m2".into(), random_eigen_inner(&[2], 1)?),
        ("eigen_inner_m3".into(), random_eigen_inner(&[3], 2)?),
        ("eigen_inner_c_m2".into(), random_eigen_inner(&[1, 2], 3)?),
        ("tracial_commutator_m2".into(), tracial_commutator(2, 4)?),
        ("tracial_commutator_m3".into(), tracial_commutator(3, 5)?),
        ("cocycle_z2".into(), group_cocycle("cyclic:2", "sign")?),
        ("cocycle_z3".into(), group_cocycle("cyclic:3", "rotation")?),
        ("cocycle_s3".into(), group_cocycle("sym:3", "standard")?),
    ])
}

/// `Z_2 ⋊ M_2` by the modular flow of `diag(0.8, 0.2)` discretized at half period.
pub fn crossed_m2() -> Result<CrossedProduct<f64>> {
    CrossedProduct::build(&diagonal_m2(), 2, ActionSpec::ModularDiscretized)
}

/// A random inner derivation on `diag(0.8, 0.2)` and its crossed extension.
pub fn crossed_inner() -> Result<(Derivation<f64>, CrossedProduct<f64>, Derivation<f64>)> {
    let md = diagonal_m2();
    let xi = md.algebra().random_element::<f64>(&mut seeded(CATALOG_SEED ^ 0xC7));
    let delta = gns_inner_derivation(&md, &xi)?;
    let cp = crossed_m2()?;
    let ext = extend_derivation(&delta, &cp)?;
    Ok((delta, cp, ext))
}

fn diag_element(a: &MatrixAlgebra, values: &[f64]) -> CMat<f64> {
    let mut x = a.zero::<f64>();
    for (i, &v) in values.iter().enumerate() {
        x[(i, i)] = real(v);
    }
    x
}

/// Named form with a positive invertible weight `x`.
pub type WeightTriple = (String, FormGenerator<f64>, CMat<f64>);

/// Valid `(form, weight)` pairs for the change-of-weight harness.
pub fn weight_triples() -> Result<Vec<WeightTriple>> {
    let mut out = Vec::new();

    let md = diagonal_m2();
    out.push((
        "unit_weight".into(),
        build_form(&random_eigen_inner_on(&md, 0x11)?),
        md.algebra().identity(),
    ));

    let tracial = ModularData::new(FaithfulState::tracial(MatrixAlgebra::full(2)?));
    let v = hermitian_part(
        &tracial
            .algebra()
            .random_element::<f64>(&mut seeded(CATALOG_SEED ^ 0x12)),
    );
    let form = build_form(&gns_inner_derivation(&tracial, &tracial.state().gns_embed(&v)?)?);
    let x = tracial.algebra().spectral_map(&v, |t| t.exp());
    out.push(("tracial_function_of_v".into(), form, x));

    let cm2 = random_state(&[1, 2], 0x13);
    let form = build_form(&random_eigen_inner_on(&cm2, 0x13)?);
    let x = diag_element(cm2.algebra(), &[3.0, 0.5, 0.5]);
    out.push(("central_weight".into(), form, x));

    let a = md.algebra().clone();
    let xi = md.state().gns_embed(&diag_element(&a, &[1.0, -0.5]))?;
    let form = build_form(&gns_inner_derivation(&md, &xi)?);
    out.push(("diagonal_weight".into(), form, diag_element(&a, &[2.0, 0.7])));

    let (_, cp, ext) = crossed_inner()?;
    let lambda = cp.wedderburn().to_block(&cp.shift(1));
    let x = cp.algebra().identity::<f64>() + lambda.scale(0.5);
    out.push(("crossed_group_weight".into(), build_form(&ext), x));
    Ok(out)
}

fn random_eigen_inner_on(md: &ModularData<f64>, stream: u64) -> Result<Derivation<f64>> {
    let xi = md.algebra().random_element::<f64>(&mut seeded(CATALOG_SEED ^ stream));
    gns_inner_derivation(md, &xi)
}
