//! Modular operator, conjugation and flow of a faithful state, together with
//! the Tomita algebra operations on the GNS space.
//!
//! With `Λ(x) = xρ^{1/2}` the objects are explicit:
//! `Δξ = ρξρ^{-1}`, `Jξ = ξ^*`, `U_z ξ = ρ^{iz} ξ ρ^{-iz}`,
//! `a·b = aρ^{-1/2}b`, `a♯ = ρ^{-1/2}a^*ρ^{1/2}` and `a♭ = ρ^{1/2}a^*ρ^{-1/2}`.

use num_complex::Complex;

use crate::algebra::{FaithfulState, GnsVector, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{lit, real, to_f64, CMat, CVec};
use crate::Real;

/// Largest admissible `|Im z| · spread(log ρ)` before `ρ^{iz}` overflows.
pub const FLOW_EXPONENT_LIMIT: f64 = 700.0;

/// Relative tolerance used to merge eigenvalues of `Δ` into one eigenspace.
pub const RATIO_TOLERANCE: f64 = 1e-10;

/// One eigenspace of `Δ`: all `v_i v_j^*` with `λ_i/λ_j = e^{ω}`.
#[derive(Clone, Debug)]
pub struct ModularEigenspace<T: Real> {
    pub log_ratio: T,
    /// Orthonormal basis of GNS vectors.
    pub basis: Vec<GnsVector<T>>,
}

#[derive(Clone, Debug)]
pub struct ModularData<T: Real> {
    state: FaithfulState<T>,
    delta: CMat<T>,
    log_delta: CMat<T>,
    j_perm: CMat<T>,
    eigenspaces: Vec<ModularEigenspace<T>>,
}

impl<T: Real> ModularData<T> {
    pub fn new(state: FaithfulState<T>) -> Self {
        let a = state.algebra().clone();
        let rho = state.density().clone();
        let rho_inv = state.inv_sqrt() * state.inv_sqrt();
        let delta = a.superoperator(|xi| &rho * xi * &rho_inv);
        let log = state.log().clone();
        let log_delta = a.superoperator(|xi| &log * xi - xi * &log);
        let j_perm = a.adjoint_permutation();
        let eigenspaces = build_eigenspaces(&state);
        Self {
            state,
            delta,
            log_delta,
            j_perm,
            eigenspaces,
        }
    }

    pub fn state(&self) -> &FaithfulState<T> {
        &self.state
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        self.state.algebra()
    }

    /// Coordinate matrix of `Δ`.
    pub fn delta(&self) -> &CMat<T> {
        &self.delta
    }

    /// Coordinate matrix of `log Δ`.
    pub fn log_delta(&self) -> &CMat<T> {
        &self.log_delta
    }

    /// Permutation `P` with `J v = P conj(v)` in coordinates.
    pub fn j_matrix(&self) -> &CMat<T> {
        &self.j_perm
    }

    pub fn apply_j(&self, xi: &GnsVector<T>) -> GnsVector<T> {
        xi.adjoint()
    }

    pub fn apply_j_coords(&self, v: &CVec<T>) -> CVec<T> {
        &self.j_perm * crate::linalg::conj_vec(v)
    }

    fn guard(&self, z: Complex<T>) -> Result<()> {
        let spread = to_f64(self.state.log_spread());
        let e = to_f64(z.im).abs() * spread;
        if !e.is_finite() || e > FLOW_EXPONENT_LIMIT {
            return Err(Error::Range(format!(
                "|Im z|·spread(log ρ) = {e:e} exceeds {FLOW_EXPONENT_LIMIT}"
            )));
        }
        Ok(())
    }

    /// `U_z ξ = ρ^{iz} ξ ρ^{-iz}`.
    pub fn flow(&self, z: Complex<T>, xi: &GnsVector<T>) -> Result<GnsVector<T>> {
        self.guard(z)?;
        let iz = Complex::new(-z.im, z.re);
        Ok(self.state.power(iz) * xi * self.state.power(-iz))
    }

    /// Coordinate matrix of `U_z`.
    pub fn flow_matrix(&self, z: Complex<T>) -> Result<CMat<T>> {
        self.guard(z)?;
        let iz = Complex::new(-z.im, z.re);
        let l = self.state.power(iz);
        let r = self.state.power(-iz);
        Ok(self.algebra().superoperator(|xi| &l * xi * &r))
    }

    /// Modular automorphism `σ_z(x) = ρ^{iz} x ρ^{-iz}` on algebra elements.
    pub fn sigma(&self, z: Complex<T>, x: &CMat<T>) -> Result<CMat<T>> {
        self.flow(z, x)
    }

    /// `Δ^{1/2} ξ = ρ^{1/2} ξ ρ^{-1/2}`.
    pub fn delta_half(&self, xi: &GnsVector<T>) -> GnsVector<T> {
        self.state.sqrt() * xi * self.state.inv_sqrt()
    }

    /// `S = JΔ^{1/2}`.
    pub fn s_operator(&self, xi: &GnsVector<T>) -> GnsVector<T> {
        self.apply_j(&self.delta_half(xi))
    }

    /// Tomita product `a·b = Λ(Λ^{-1}(a) Λ^{-1}(b))`.
    pub fn product(&self, a: &GnsVector<T>, b: &GnsVector<T>) -> GnsVector<T> {
        a * self.state.inv_sqrt() * b
    }

    /// `a♯ = Λ(Λ^{-1}(a)^*)`.
    pub fn sharp(&self, a: &GnsVector<T>) -> GnsVector<T> {
        self.state.inv_sqrt() * a.adjoint() * self.state.sqrt()
    }

    /// `a♭ = U_{-i}(a♯)`.
    pub fn flat(&self, a: &GnsVector<T>) -> GnsVector<T> {
        self.state.sqrt() * a.adjoint() * self.state.inv_sqrt()
    }

    pub fn eigenspaces(&self) -> &[ModularEigenspace<T>] {
        &self.eigenspaces
    }

    /// Splits `ξ` into its components in the eigenspaces of `Δ`.
    pub fn decompose(&self, xi: &GnsVector<T>) -> Vec<(T, GnsVector<T>)> {
        self.eigenspaces
            .iter()
            .map(|space| {
                let mut part = self.algebra().zero::<T>();
                for e in &space.basis {
                    part += e * crate::linalg::hs_inner(e, xi);
                }
                (space.log_ratio, part)
            })
            .collect()
    }
}

fn build_eigenspaces<T: Real>(state: &FaithfulState<T>) -> Vec<ModularEigenspace<T>> {
    let a = state.algebra();
    let e = state.eigen();
    let mut entries: Vec<(f64, usize, usize)> = Vec::new();
    for b in 0..a.blocks().len() {
        let r = a.block_range(b);
        for i in r.clone() {
            for j in r.clone() {
                let w = to_f64(e.values[i].ln() - e.values[j].ln());
                entries.push((w, i, j));
            }
        }
    }
    entries.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<ModularEigenspace<T>> = Vec::new();
    let mut anchor = f64::NEG_INFINITY;
    for (w, i, j) in entries {
        let vi = e.vectors.column(i);
        let vj = e.vectors.column(j);
        let vec = vi * vj.adjoint();
        // |e^w - e^a| <= tol·max(e^w, e^a) is |w - a| <= tol to first order.
        let close = (w - anchor).abs() <= RATIO_TOLERANCE;
        if out.is_empty() || !close {
            anchor = w;
            out.push(ModularEigenspace {
                log_ratio: lit(w),
                basis: vec![vec],
            });
        } else {
            out.last_mut().expect("nonempty").basis.push(vec);
        }
    }
    out
}

/// `Δ^{s}` as a coordinate matrix for real `s`.
pub fn delta_power<T: Real>(state: &FaithfulState<T>, s: T) -> CMat<T> {
    let l = state.power(real(s));
    let r = state.power(real(-s));
    state.algebra().superoperator(|xi| &l * xi * &r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cplx, rel_diff};
    use crate::rng::seeded;

    fn sample() -> (ModularData<f64>, crate::rng::Rng) {
        let a = MatrixAlgebra::new(&[1, 2]).unwrap();
        let mut rng = seeded(11);
        let s = FaithfulState::random(a, &mut rng, 0.2);
        (ModularData::new(s), rng)
    }

    #[test]
    fn s_reproduces_sharp() {
        let (m, mut rng) = sample();
        let x = m.algebra().random_element::<f64>(&mut rng);
        let a = m.state().gns_embed(&x).unwrap();
        assert!(rel_diff(&m.s_operator(&a), &m.sharp(&a)) < 1e-12);
        let want = m.state().gns_embed(&x.adjoint()).unwrap();
        assert!(rel_diff(&m.sharp(&a), &want) < 1e-12);
    }

    #[test]
    fn flat_is_flow_of_sharp() {
        let (m, mut rng) = sample();
        let x = m.algebra().random_element::<f64>(&mut rng);
        let a = m.state().gns_embed(&x).unwrap();
        let via_flow = m.flow(cplx(0.0, -1.0), &m.sharp(&a)).unwrap();
        assert!(rel_diff(&m.flat(&a), &via_flow) < 1e-11);
    }

    #[test]
    fn eigenspaces_partition_the_space() {
        let (m, mut rng) = sample();
        let total: usize = m.eigenspaces().iter().map(|s| s.basis.len()).sum();
        assert_eq!(total, m.algebra().dim());
        let x = m.algebra().random_element::<f64>(&mut rng);
        let parts = m.decompose(&x);
        let sum = parts.iter().fold(m.algebra().zero::<f64>(), |acc, (_, p)| acc + p);
        assert!(rel_diff(&x, &sum) < 1e-12);
        for (w, p) in &parts {
            let lhs = m.algebra().apply(m.delta(), p);
            assert!(rel_diff(&lhs, &p.scale(w.exp())) < 1e-11);
        }
    }

    #[test]
    fn overflowing_flow_is_range_error() {
        let a = MatrixAlgebra::full(2).unwrap();
        let s = FaithfulState::<f64>::diagonal(a.clone(), &[0.9, 0.1]).unwrap();
        let m = ModularData::new(s);
        let err = m.flow(cplx(0.0, 1e4), &a.identity()).unwrap_err();
        assert!(matches!(err, Error::Range(_)));
    }
}
