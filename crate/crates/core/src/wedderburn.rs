//! Numerical Wedderburn decomposition of a unital *-subalgebra of `M_n`.
//!
//! Produces an isomorphism onto a block-diagonal [`MatrixAlgebra`] by
//! computing central projections, diagonal matrix units from a generic
//! Hermitian element of each summand, and off-diagonal units from a generic
//! element. The result is verified before it is returned.

use num_complex::Complex;

use crate::algebra::MatrixAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, hs_inner, identity, lit, nullspace, op_norm, to_f64, CMat, CVec, HermitianEigen};
use crate::rng::{derive_seed, gaussian, seeded, Rng};
use crate::Real;

const ATTEMPTS: u64 = 8;

#[derive(Clone, Debug)]
pub struct Wedderburn<T: Real> {
    algebra: MatrixAlgebra,
    /// Concrete image `F_k` of each block matrix unit.
    units: Vec<CMat<T>>,
    /// Multiplicity of every block in the concrete representation.
    multiplicity: Vec<usize>,
    concrete_size: usize,
}

impl<T: Real> Wedderburn<T> {
    /// The identity isomorphism of an algebra already in block form.
    pub fn trivial(algebra: &MatrixAlgebra) -> Self {
        let units = (0..algebra.dim()).map(|k| algebra.basis(k)).collect();
        Self {
            algebra: algebra.clone(),
            units,
            multiplicity: vec![1; algebra.blocks().len()],
            concrete_size: algebra.size(),
        }
    }

    /// Decomposes the *-algebra spanned by `generators` (which must contain the
    /// identity in its span and be closed under products and adjoints).
    pub fn decompose(generators: &[CMat<T>], seed: u64) -> Result<Self> {
        let n = generators
            .first()
            .map(|g| g.nrows())
            .ok_or_else(|| Error::Dimension("empty generating set".into()))?;
        let basis = orthonormal_span(generators);
        check_closure(&basis)?;
        let mut last = Error::Structure("decomposition did not run".into());
        for attempt in 0..ATTEMPTS {
            let mut rng = seeded(derive_seed(seed, attempt));
            match attempt_decompose(&basis, n, &mut rng) {
                Ok(w) => match w.verify(&basis) {
                    Ok(()) => return Ok(w),
                    Err(e) => last = e,
                },
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        &self.algebra
    }

    pub fn units(&self) -> &[CMat<T>] {
        &self.units
    }

    pub fn multiplicity(&self) -> &[usize] {
        &self.multiplicity
    }

    pub fn concrete_size(&self) -> usize {
        self.concrete_size
    }

    fn mult_of(&self, k: usize) -> f64 {
        self.multiplicity[self.algebra.units()[k].block] as f64
    }

    /// Block form of a concrete element.
    pub fn to_block(&self, x: &CMat<T>) -> CMat<T> {
        let coords = CVec::from_fn(self.algebra.dim(), |k, _| {
            hs_inner(&self.units[k], x).unscale(lit(self.mult_of(k)))
        });
        self.algebra.from_coords(&coords)
    }

    pub fn to_concrete(&self, x: &CMat<T>) -> CMat<T> {
        let c = self.algebra.coords(x);
        let mut out = CMat::zeros(self.concrete_size, self.concrete_size);
        for (k, f) in self.units.iter().enumerate() {
            out += f * c[k];
        }
        out
    }

    /// Isometric transport of concrete Hilbert-Schmidt vectors into block
    /// coordinates: `tr(F_k^* ξ)/√m_k`.
    pub fn gns_to_block(&self, xi: &CMat<T>) -> CVec<T> {
        CVec::from_fn(self.algebra.dim(), |k, _| {
            hs_inner(&self.units[k], xi).unscale(lit(self.mult_of(k).sqrt()))
        })
    }

    /// Density of the block state matching `tr(ρ_c ·)` on the concrete side.
    pub fn block_density(&self, rho_concrete: &CMat<T>) -> CMat<T> {
        let c = CVec::from_fn(self.algebra.dim(), |k, _| hs_inner(&self.units[k], rho_concrete));
        self.algebra.from_coords(&c)
    }

    fn verify(&self, basis: &[CMat<T>]) -> Result<()> {
        let tol = 1e-9;
        for x in basis {
            let back = self.to_concrete(&self.to_block(x));
            let err = to_f64((&back - x).norm());
            if err > tol {
                return Err(Error::Structure(format!(
                    "decomposition misses part of the span ({err:e})"
                )));
            }
        }
        let a = &self.algebra;
        for (k, uk) in a.units().iter().enumerate() {
            for (l, ul) in a.units().iter().enumerate() {
                let prod = &self.units[k] * &self.units[l];
                let want = if uk.col == ul.row {
                    self.units[a.unit_index(uk.row, ul.col).expect("same block")].clone()
                } else {
                    CMat::zeros(self.concrete_size, self.concrete_size)
                };
                let err = to_f64((prod - want).norm());
                if err > tol {
                    return Err(Error::Structure(format!("matrix unit relations fail ({err:e})")));
                }
            }
            let adj = &self.units[a.adjoint_index(k)] - self.units[k].adjoint();
            if to_f64(adj.norm()) > tol {
                return Err(Error::Structure("matrix units are not *-closed".into()));
            }
        }
        Ok(())
    }
}

fn orthonormal_span<T: Real>(gens: &[CMat<T>]) -> Vec<CMat<T>> {
    let n = gens[0].nrows();
    let mut out: Vec<CMat<T>> = Vec::new();
    for g in gens {
        let mut v = g.clone();
        for _ in 0..2 {
            for b in &out {
                let c = hs_inner(b, &v);
                v -= b * c;
            }
        }
        let norm = to_f64(v.norm());
        if norm > 1e-10 * to_f64(g.norm()).max(1.0) {
            out.push(v.unscale(lit(norm)));
        }
    }
    debug_assert!(out.iter().all(|b| b.nrows() == n));
    out
}

fn project_onto<T: Real>(basis: &[CMat<T>], x: &CMat<T>) -> CMat<T> {
    let mut p = CMat::zeros(x.nrows(), x.ncols());
    for b in basis {
        p += b * hs_inner(b, x);
    }
    p
}

fn check_closure<T: Real>(basis: &[CMat<T>]) -> Result<()> {
    for x in basis {
        let r = to_f64((x.adjoint() - project_onto(basis, &x.adjoint())).norm());
        if r > 1e-9 {
            return Err(Error::Structure(format!("span is not closed under adjoints ({r:e})")));
        }
        for y in basis {
            let xy = x * y;
            let r = to_f64((&xy - project_onto(basis, &xy)).norm());
            if r > 1e-9 {
                return Err(Error::Structure(format!("span is not closed under products ({r:e})")));
            }
        }
    }
    let id = identity::<T>(basis[0].nrows());
    if to_f64((&id - project_onto(basis, &id)).norm()) > 1e-9 {
        return Err(Error::Structure("span does not contain the identity".into()));
    }
    Ok(())
}

/// Groups sorted eigenvalues whose consecutive gaps are below `gap`.
fn clusters<T: Real>(values: &[(T, usize)], gap: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut prev: Option<f64> = None;
    for &(v, i) in values {
        let v = to_f64(v);
        match prev {
            Some(p) if v - p <= gap => out.last_mut().expect("open cluster").push(i),
            _ => out.push(vec![i]),
        }
        prev = Some(v);
    }
    out
}

fn spectral_projection<T: Real>(e: &HermitianEigen<T>, idx: &[usize]) -> CMat<T> {
    let n = e.vectors.nrows();
    let mut p = CMat::zeros(n, n);
    for &i in idx {
        let v = e.vectors.column(i);
        p += v * v.adjoint();
    }
    p
}

fn random_hermitian_in<T: Real>(basis: &[CMat<T>], rng: &mut Rng) -> CMat<T> {
    let n = basis[0].nrows();
    let mut h = CMat::zeros(n, n);
    for b in basis {
        let g1: T = gaussian(rng);
        let g2: T = gaussian(rng);
        h += hermitian_part(b).scale(g1);
        h += hermitian_part(&(b * Complex::new(T::zero(), -T::one()))).scale(g2);
    }
    h
}

fn attempt_decompose<T: Real>(basis: &[CMat<T>], n: usize, rng: &mut Rng) -> Result<Wedderburn<T>> {
    let dim = basis.len();
    // Center: coefficient vectors c with [Σ c_α B_α, B_β] = 0 for all β.
    let mut system = CMat::zeros(dim * n * n, dim);
    for (beta, bb) in basis.iter().enumerate() {
        for (alpha, ba) in basis.iter().enumerate() {
            let c = ba * bb - bb * ba;
            for (r, z) in c.iter().enumerate() {
                system[(beta * n * n + r, alpha)] = *z;
            }
        }
    }
    let center: Vec<CMat<T>> = nullspace(&system, 1e-9)
        .into_iter()
        .map(|c| {
            let mut z = CMat::zeros(n, n);
            for (alpha, b) in basis.iter().enumerate() {
                z += b * c[alpha];
            }
            z
        })
        .collect();
    let z = random_hermitian_in(&center, rng);
    let ez = HermitianEigen::new(&z);
    let scale = to_f64(op_norm(&z)).max(1.0);
    let sorted: Vec<(T, usize)> = ez.values.iter().copied().zip(0..n).collect();
    let central = clusters(&sorted, 1e-7 * scale);
    if central.len() != center.len() {
        return Err(Error::Structure(format!(
            "found {} central projections for a center of dimension {}",
            central.len(),
            center.len()
        )));
    }

    let mut blocks = Vec::new();
    let mut multiplicity = Vec::new();
    let mut block_units: Vec<Vec<CMat<T>>> = Vec::new();
    for idx in central {
        let p = spectral_projection(&ez, &idx);
        let compressed: Vec<CMat<T>> = basis.iter().map(|b| &p * b * &p).collect();
        let local = orthonormal_span(&compressed);
        let d = (local.len() as f64).sqrt().round() as usize;
        if d * d != local.len() || idx.len() % d != 0 {
            return Err(Error::Structure(format!(
                "summand of dimension {} is not a full matrix algebra",
                local.len()
            )));
        }
        let m = idx.len() / d;
        // Push the complement of p far away so its eigenvectors separate.
        let h = random_hermitian_in(&local, rng);
        let shift = to_f64(op_norm(&h)) * 10.0 + 10.0;
        let shifted = &h + (identity::<T>(n) - &p).scale(lit(shift));
        let eh = HermitianEigen::new(&shifted);
        let inside: Vec<(T, usize)> = (0..n)
            .filter(|&i| to_f64((&p * eh.vectors.column(i)).norm()) > 0.5)
            .map(|i| (eh.values[i], i))
            .collect();
        let hscale = to_f64(op_norm(&h)).max(1.0);
        let diag = clusters(&inside, 1e-7 * hscale);
        if diag.len() != d || diag.iter().any(|c| c.len() != m) {
            return Err(Error::Structure("generic element has degenerate spectrum".into()));
        }
        let q: Vec<CMat<T>> = diag.iter().map(|c| spectral_projection(&eh, c)).collect();
        let mut b = CMat::zeros(n, n);
        for l in &local {
            b += l * crate::rng::complex_gaussian::<T>(rng);
        }
        let mut col: Vec<CMat<T>> = Vec::with_capacity(d);
        for qk in &q {
            let e = qk * &b * &q[0];
            let s = op_norm(&e);
            if to_f64(s) < 1e-8 {
                return Err(Error::Structure("degenerate off-diagonal unit".into()));
            }
            col.push(e.unscale(s));
        }
        col[0] = q[0].clone();
        let mut units = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                units.push(&col[i] * col[j].adjoint());
            }
        }
        blocks.push(d);
        multiplicity.push(m);
        block_units.push(units);
    }
    let algebra = MatrixAlgebra::new(&blocks)?;
    let units = block_units.into_iter().flatten().collect();
    Ok(Wedderburn {
        algebra,
        units,
        multiplicity,
        concrete_size: n,
    })
}
