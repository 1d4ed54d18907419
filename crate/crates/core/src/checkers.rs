//! Independent checks on semigroups of maps of the algebra: Choi positivity,
//! unitality, and symmetry with respect to the state.

use crate::algebra::MatrixAlgebra;
use crate::error::Result;
use crate::linalg::{hermitian_part, lit, real, to_f64, CMat, HermitianEigen};
use crate::modular::ModularData;
use crate::report::{CertificationReport, Tolerances};
use crate::rng::{derive_seed, seeded, uniform};
use crate::Real;

/// Semigroup at time `t`, on the GNS space and on the algebra (coordinates).
#[derive(Clone, Debug)]
pub struct SemigroupSnapshot<T: Real> {
    pub t: f64,
    pub gns: CMat<T>,
    pub on_algebra: CMat<T>,
}

#[derive(Clone, Debug)]
pub struct ChoiMatrix<T: Real> {
    /// `(1/N) Σ_k E_k ⊗ Φ(E_k)` over the matrix units of the algebra.
    pub matrix: CMat<T>,
    pub min_eigenvalue: f64,
    pub hermiticity_defect: f64,
}

/// Normalized Choi matrix of a map given in unit coordinates.
///
/// Matrix units of distinct summands act on orthogonal subspaces of the
/// first tensor factor, so positivity is equivalent to complete positivity
/// on the direct sum.
pub fn choi<T: Real>(algebra: &MatrixAlgebra, map: &CMat<T>) -> ChoiMatrix<T> {
    let n = algebra.size();
    let mut c = CMat::zeros(n * n, n * n);
    for k in 0..algebra.dim() {
        let u = algebra.units()[k];
        let img = algebra.from_coords(&map.column(k).into_owned());
        c.view_mut((u.row * n, u.col * n), (n, n)).copy_from(&img);
    }
    let c = c.unscale(lit(n as f64));
    let hermiticity_defect = to_f64((&c - c.adjoint()).norm());
    let min_eigenvalue = to_f64(HermitianEigen::new(&c).min());
    ChoiMatrix {
        matrix: c,
        min_eigenvalue,
        hermiticity_defect,
    }
}

/// `max(0, λ_max(Φ(1)) − 1)`.
pub fn unit_excess<T: Real>(algebra: &MatrixAlgebra, map: &CMat<T>) -> f64 {
    let y = algebra.apply(map, &algebra.identity());
    (to_f64(algebra.eigh(&hermitian_part(&y)).max()) - 1.0).max(0.0)
}

/// `‖Φ(1) − 1‖_F`.
pub fn unitality_defect<T: Real>(algebra: &MatrixAlgebra, map: &CMat<T>) -> f64 {
    let y = algebra.apply(map, &algebra.identity());
    to_f64((y - algebra.identity::<T>()).norm())
}

/// Largest `|φ(P(x)^* y) − φ(x^* P(y))|` over unit pairs.
pub fn gns_symmetry_residual<T: Real>(modular: &ModularData<T>, map: &CMat<T>, samples: usize, seed: u64) -> f64 {
    let a = modular.algebra();
    let s = modular.state();
    let mut rng = seeded(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = a.random_element::<T>(&mut rng);
        let y = a.random_element::<T>(&mut rng);
        let (x, y) = (x.unscale(x.norm()), y.unscale(y.norm()));
        let lhs = s.inner(&a.apply(map, &x), &y);
        let rhs = s.inner(&x, &a.apply(map, &y));
        worst = worst.max(to_f64(crate::linalg::cabs(lhs - rhs)));
    }
    worst
}

/// GNS symmetry, `φ∘P ≤ φ` on positives, and commutation with `Δ^{is}`.
pub fn check_gns_symmetric<T: Real>(
    modular: &ModularData<T>,
    snapshots: &[SemigroupSnapshot<T>],
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let a = modular.algebra();
    let s = modular.state();
    let mut rep = CertificationReport::new("gns-symmetry", seed, tol);
    let (mut sym, mut contr, mut comm) = (0.0f64, 0.0f64, 0.0f64);
    let mut rng = seeded(derive_seed(seed, 0x65));
    for (i, snap) in snapshots.iter().enumerate() {
        sym = sym.max(gns_symmetry_residual(
            modular,
            &snap.on_algebra,
            samples,
            derive_seed(seed, i as u64),
        ));
        for _ in 0..samples {
            let x = a.random_element::<T>(&mut rng);
            let x = x.unscale(x.norm());
            let pos = x.adjoint() * &x;
            let before = to_f64(s.expect(&pos).re);
            let after = to_f64(s.expect(&a.apply(&snap.on_algebra, &pos)).re);
            contr = contr.max(after - before);
        }
        let t: T = uniform(&mut rng, -std::f64::consts::PI, std::f64::consts::PI);
        let u = modular.flow_matrix(real(t))?;
        let c = &snap.gns * &u - &u * &snap.gns;
        comm = comm.max(to_f64(c.norm()));
    }
    rep.bound("gns_symmetry", sym, tol.semigroup);
    rep.bound("state_contraction", contr.max(0.0), tol.semigroup);
    rep.bound("modular_commutation", comm, tol.modular);
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkovClass {
    Conservative,
    SubMarkov,
    Fail,
}

impl MarkovClass {
    pub fn as_str(self) -> &'static str {
        match self {
            MarkovClass::Conservative => "conservative",
            MarkovClass::SubMarkov => "sub_markov",
            MarkovClass::Fail => "fail",
        }
    }
}

/// Complete positivity and (sub-)unitality on every snapshot.
pub fn check_markov<T: Real>(
    algebra: &MatrixAlgebra,
    snapshots: &[SemigroupSnapshot<T>],
    tol: &Tolerances,
) -> (CertificationReport, MarkovClass) {
    let mut rep = CertificationReport::new("markov", 0, tol);
    let (mut min_choi, mut excess, mut defect, mut herm) = (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
    for snap in snapshots {
        let c = choi(algebra, &snap.on_algebra);
        min_choi = min_choi.min(c.min_eigenvalue);
        herm = herm.max(c.hermiticity_defect);
        excess = excess.max(unit_excess(algebra, &snap.on_algebra));
        defect = defect.max(unitality_defect(algebra, &snap.on_algebra));
    }
    let cp = min_choi >= -tol.choi && herm <= tol.check;
    let sub = excess <= tol.semigroup;
    let class = if !cp || !sub {
        MarkovClass::Fail
    } else if defect <= tol.semigroup {
        MarkovClass::Conservative
    } else {
        MarkovClass::SubMarkov
    };
    rep.record("choi_positivity", (-min_choi).max(0.0), min_choi, cp);
    rep.bound("sub_unitality", excess, tol.semigroup);
    rep.record("unitality_defect", defect, tol.semigroup - defect, true);
    rep.label("markov_class", class.as_str());
    (rep, class)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_map_has_psd_choi() {
        let a = MatrixAlgebra::new(&[1, 2]).unwrap();
        let id = CMat::<f64>::identity(a.dim(), a.dim());
        let c = choi(&a, &id);
        assert!(c.min_eigenvalue > -1e-14);
        assert!(c.hermiticity_defect < 1e-14);
        assert_eq!(unitality_defect(&a, &id), 0.0);
    }

    #[test]
    fn transpose_has_negative_choi() {
        let a = MatrixAlgebra::full(2).unwrap();
        let t = a.superoperator(|x: &CMat<f64>| x.transpose());
        // Choi of the transpose is the swap divided by 2.
        assert!((choi(&a, &t).min_eigenvalue + 0.5).abs() < 1e-14);
    }
}
