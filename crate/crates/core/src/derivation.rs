//! Symmetric derivations from the Tomita algebra into Tomita bimodules.
//!
//! A derivation is stored as its `m×D` matrix from GNS coordinates to the
//! carrier of the target bimodule.

use num_complex::Complex;

use crate::algebra::GnsVector;
use crate::bimodule::{random_unit, TomitaBimodule};
use crate::error::{Error, Result};
use crate::linalg::{conj_mat, op_norm, real, to_f64, CMat, CVec};
use crate::modular::ModularData;
use crate::report::{CertificationReport, Tolerances};
use crate::rng::{derive_seed, seeded, uniform};
use crate::Real;

/// Relative eigen-residual accepted for the vector of an inner derivation.
pub const EIGENVECTOR_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Derivation<T: Real> {
    target: TomitaBimodule<T>,
    matrix: CMat<T>,
    label: String,
}

impl<T: Real> Derivation<T> {
    pub fn new(target: TomitaBimodule<T>, matrix: CMat<T>, label: impl Into<String>) -> Result<Self> {
        let d = target.algebra().dim();
        if matrix.nrows() != target.dim() || matrix.ncols() != d {
            return Err(Error::Dimension(format!(
                "derivation matrix must be {}x{d}, got {}x{}",
                target.dim(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            target,
            matrix,
            label: label.into(),
        })
    }

    pub fn zero(target: TomitaBimodule<T>) -> Self {
        let (m, d) = (target.dim(), target.algebra().dim());
        Self {
            target,
            matrix: CMat::zeros(m, d),
            label: "zero".into(),
        }
    }

    pub fn target(&self) -> &TomitaBimodule<T> {
        &self.target
    }

    pub fn modular(&self) -> &ModularData<T> {
        self.target.modular()
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, a: &CVec<T>) -> CVec<T> {
        &self.matrix * a
    }

    pub fn apply_gns(&self, a: &GnsVector<T>) -> CVec<T> {
        self.apply(&self.target.algebra().coords(a))
    }

    /// Matrix of the adjoint `δ*` (the GNS basis is orthonormal).
    pub fn adjoint_matrix(&self) -> CMat<T> {
        self.matrix.adjoint()
    }

    /// `δ₁ ⊕ δ₂` into the direct sum of the targets.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        let target = self.target.direct_sum(&other.target)?;
        let d = self.matrix.ncols();
        let mut matrix = CMat::zeros(target.dim(), d);
        matrix.view_mut((0, 0), self.matrix.shape()).copy_from(&self.matrix);
        matrix
            .view_mut((self.matrix.nrows(), 0), other.matrix.shape())
            .copy_from(&other.matrix);
        Ok(Self {
            target,
            matrix,
            label: format!("{}+{}", self.label, other.label),
        })
    }
}

/// `δ(a) = i(ξa − aξ, (𝒥ξ)a − a(𝒥ξ))` into `H ⊕ H` doubled with parameter `ω`,
/// where `ξ` is an eigenvector of the generator of `base` with eigenvalue `e^ω`.
pub fn inner_derivation<T: Real>(base: &TomitaBimodule<T>, xi: &CVec<T>, omega: T) -> Result<Derivation<T>> {
    if xi.len() != base.dim() {
        return Err(Error::Dimension(format!(
            "vector has length {}, carrier {}",
            xi.len(),
            base.dim()
        )));
    }
    let scale = to_f64(xi.norm()).max(f64::MIN_POSITIVE);
    let residual = to_f64((base.generator() * xi - xi.scale(omega.exp())).norm()) / scale;
    if residual > EIGENVECTOR_TOLERANCE {
        return Err(Error::Eigenvector { residual });
    }
    let target = base.doubled(omega);
    let jxi = base.apply_j(xi);
    let m = base.dim();
    let d = base.algebra().dim();
    let i = Complex::new(T::zero(), T::one());
    let mut matrix = CMat::zeros(2 * m, d);
    for k in 0..d {
        let top = base.tomita_right_unit(k) * xi - base.tomita_left_unit(k) * xi;
        let bottom = base.tomita_right_unit(k) * &jxi - base.tomita_left_unit(k) * &jxi;
        matrix.view_mut((0, k), (m, 1)).copy_from(&(top * i));
        matrix.view_mut((m, k), (m, 1)).copy_from(&(bottom * i));
    }
    Derivation::new(target, matrix, format!("inner({:.6})", to_f64(omega)))
}

/// Splits `ξ` along the spectral subspaces of the generator of `base` and sums
/// the inner derivations of the components.
pub fn eigen_inner_derivation<T: Real>(base: &TomitaBimodule<T>, xi: &CVec<T>) -> Result<Derivation<T>> {
    let eig = base.generator_eigen();
    let mut groups: Vec<(T, Vec<usize>)> = Vec::new();
    for (j, &v) in eig.values.iter().enumerate() {
        let w = v.ln();
        match groups.last_mut() {
            Some((anchor, idx)) if to_f64((w - *anchor).abs()) <= crate::modular::RATIO_TOLERANCE => idx.push(j),
            _ => groups.push((w, vec![j])),
        }
    }
    let mut acc: Option<Derivation<T>> = None;
    let cutoff = 1e-14 * to_f64(xi.norm()).max(1.0);
    for (w, idx) in groups {
        let mut part = CVec::zeros(xi.len());
        for &j in &idx {
            let v = eig.vectors.column(j);
            part += v * v.dotc(xi);
        }
        if to_f64(part.norm()) <= cutoff {
            continue;
        }
        let next = inner_derivation(base, &part, w)?;
        acc = Some(match acc {
            None => next,
            Some(prev) => prev.direct_sum(&next)?,
        });
    }
    Ok(acc.unwrap_or_else(|| Derivation::zero(base.doubled(T::zero()))))
}

/// Eigen-decomposed inner derivation of a GNS vector into copies of `L²(M, φ)`.
pub fn gns_inner_derivation<T: Real>(modular: &ModularData<T>, xi: &GnsVector<T>) -> Result<Derivation<T>> {
    let base = TomitaBimodule::gns(modular);
    eigen_inner_derivation(&base, &modular.algebra().coords(xi))
}

/// Verifies the Leibniz rule, `δ(1) = 0`, and intertwining of `J` and `U_z`.
pub fn check_derivation<T: Real>(
    delta: &Derivation<T>,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let h = delta.target();
    let md = h.modular();
    let a = md.algebra();
    let st = md.state();
    let d = a.dim();
    let f = |x: T| to_f64(x);
    let mut rep = CertificationReport::new(format!("{}@{}", delta.label(), h.fingerprint()), seed, tol);
    let dnorm = f(delta.matrix.norm()).max(1.0);

    let gns_unit = |k: usize| CVec::<T>::from_fn(d, |i, _| real(if i == k { T::one() } else { T::zero() }));
    let product = |x: &CVec<T>, y: &CVec<T>| a.coords(&md.product(&a.from_coords(x), &a.from_coords(y)));
    let leibniz = |x: &CVec<T>, y: &CVec<T>| {
        let lhs = delta.apply(&product(x, y));
        let rhs = h.tomita_left(x) * delta.apply(y) + h.tomita_right(y) * delta.apply(x);
        f((&lhs - rhs).norm()) / f(lhs.norm()).max(1.0)
    };
    let mut basis = 0.0f64;
    for k in 0..d {
        for l in 0..d {
            basis = basis.max(leibniz(&gns_unit(k), &gns_unit(l)));
        }
    }
    rep.bound("product_rule_basis", basis, tol.check);

    let mut rng = seeded(derive_seed(seed, 0xD1));
    let mut sampled = 0.0f64;
    for _ in 0..samples {
        let x = random_unit::<T>(&mut rng, d);
        let y = random_unit::<T>(&mut rng, d);
        sampled = sampled.max(leibniz(&x, &y));
    }
    rep.bound("product_rule_sampled", sampled, tol.check);

    let one = a.coords(&st.cyclic_vector());
    rep.bound("unit_annihilated", f(delta.apply(&one).norm()), tol.check);

    // Both sides are antilinear, so agreement on the real basis is exact.
    let jm = md.j_matrix();
    let lhs = &delta.matrix * jm;
    let rhs = h.jmap() * conj_mat(&delta.matrix);
    rep.bound("conjugation_intertwining", f((lhs - rhs).norm()) / dnorm, tol.check);

    let mut real_res = 0.0f64;
    for _ in 0..5 {
        let t: T = uniform(&mut rng, -std::f64::consts::PI, std::f64::consts::PI);
        let z = real(t);
        let lhs = &delta.matrix * md.flow_matrix(z)?;
        let rhs = h.flow(z)? * &delta.matrix;
        real_res = real_res.max(f((lhs - rhs).norm()) / dnorm);
    }
    rep.bound("flow_intertwining_real", real_res, tol.check);

    let mut imag_res = 0.0f64;
    for s in [T::one(), -T::one()] {
        let z = Complex::new(T::zero(), s);
        let lhs = &delta.matrix * md.flow_matrix(z)?;
        let rhs = h.flow(z)? * &delta.matrix;
        imag_res = imag_res.max(f((&lhs - rhs).norm()) / f(lhs.norm()).max(1.0));
    }
    rep.bound("flow_intertwining_imaginary", imag_res, tol.check);
    Ok(rep)
}

/// Multiplication operators attached to a vector of the bimodule:
/// `L(ξ): d ↦ ξ d` and `R(ξ): d ↦ d ξ` from the Tomita algebra into `H`.
#[derive(Clone, Debug)]
pub struct BoundedVectorOps<T: Real> {
    pub left_mult: CMat<T>,
    pub right_mult: CMat<T>,
    pub left_bound: T,
    pub right_bound: T,
}

pub fn bounded_ops<T: Real>(h: &TomitaBimodule<T>, xi: &CVec<T>) -> BoundedVectorOps<T> {
    let d = h.algebra().dim();
    let m = h.dim();
    let mut left_mult = CMat::zeros(m, d);
    let mut right_mult = CMat::zeros(m, d);
    for k in 0..d {
        left_mult.set_column(k, &(h.tomita_right_unit(k) * xi));
        right_mult.set_column(k, &(h.tomita_left_unit(k) * xi));
    }
    let left_bound = op_norm(&left_mult);
    let right_bound = op_norm(&right_mult);
    BoundedVectorOps {
        left_mult,
        right_mult,
        left_bound,
        right_bound,
    }
}

/// Checks `δ*(aξb) = a δ*(ξ) b − L(δ(a♯))*(ξb) − R(δ(b♭))*(aξ)` and the
/// resulting norm bound on random triples.
pub fn check_adjoint_identity<T: Real>(
    delta: &Derivation<T>,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let h = delta.target();
    let md = h.modular();
    let a = md.algebra();
    let st = md.state();
    let d = a.dim();
    let m = h.dim();
    let f = |x: T| to_f64(x);
    let adj = delta.adjoint_matrix();
    let mut rep = CertificationReport::new(format!("adjoint:{}", delta.label()), seed, tol);
    let mut rng = seeded(derive_seed(seed, 0xAD));
    let (mut worst, mut bound_excess) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let av = random_unit::<T>(&mut rng, d);
        let bv = random_unit::<T>(&mut rng, d);
        let xi = random_unit::<T>(&mut rng, m);
        let ag = a.from_coords(&av);
        let bg = a.from_coords(&bv);

        let lhs = &adj * h.act(&av, &xi, &bv);
        let mid = a.from_coords(&(&adj * &xi));
        let core = a.coords(&md.product(&md.product(&ag, &mid), &bg));
        let a_sharp = a.coords(&md.sharp(&ag));
        let b_flat = a.coords(&md.flat(&bg));
        let ops_a = bounded_ops(h, &delta.apply(&a_sharp));
        let ops_b = bounded_ops(h, &delta.apply(&b_flat));
        let xi_b = h.tomita_right(&bv) * &xi;
        let a_xi = h.tomita_left(&av) * &xi;
        let rhs = core - ops_a.left_mult.adjoint() * &xi_b - ops_b.right_mult.adjoint() * &a_xi;
        worst = worst.max(f((&lhs - rhs).norm()) / f(lhs.norm()).max(1.0));

        let la = op_norm(&st.gns_element(&ag));
        let rb = op_norm(&(st.inv_sqrt() * &bg));
        let bound =
            la * rb * (&adj * &xi).norm() + ops_a.left_bound * rb * xi.norm() + ops_b.right_bound * la * xi.norm();
        bound_excess = bound_excess.max((f(lhs.norm()) - f(bound)).max(0.0));
    }
    rep.bound("adjoint_identity", worst, tol.margin);
    rep.bound("adjoint_norm_bound", bound_excess, tol.margin);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FaithfulState, MatrixAlgebra};

    fn m2() -> ModularData<f64> {
        let a = MatrixAlgebra::full(2).unwrap();
        ModularData::new(FaithfulState::diagonal(a, &[0.8, 0.2]).unwrap())
    }

    #[test]
    fn inner_derivation_on_eigenvector_passes() {
        let md = m2();
        let base = TomitaBimodule::gns(&md);
        let a = md.algebra();
        let xi = a.coords(&a.basis::<f64>(1));
        let delta = inner_derivation(&base, &xi, 4f64.ln()).unwrap();
        let r = check_derivation(&delta, 20, 1, &Tolerances::default()).unwrap();
        assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn non_eigenvector_rejected() {
        let md = m2();
        let base = TomitaBimodule::gns(&md);
        let a = md.algebra();
        let xi = a.coords(&(a.basis::<f64>(1) + a.basis::<f64>(2)));
        let err = inner_derivation(&base, &xi, 4f64.ln()).unwrap_err();
        assert!(matches!(err, Error::Eigenvector { .. }));
    }

    #[test]
    fn eigen_inner_of_generic_vector_passes() {
        let md = m2();
        let mut rng = seeded(5);
        let xi = md.algebra().random_element::<f64>(&mut rng);
        let delta = gns_inner_derivation(&md, &xi).unwrap();
        let r = check_derivation(&delta, 20, 2, &Tolerances::default()).unwrap();
        assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
        let r = check_adjoint_identity(&delta, 20, 3, &Tolerances::default()).unwrap();
        assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
    }
}
