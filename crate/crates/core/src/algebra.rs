//! Block-diagonal matrix algebras and faithful states on them.

use std::ops::Range;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lit, real, to_f64, CMat, CVec, HermitianEigen};
use crate::rng::{complex_gaussian, gaussian, Rng};
use crate::Real;

/// Element of the algebra, stored as an ambient `N×N` block-diagonal matrix.
pub type AlgebraElement<T> = CMat<T>;
/// Vector of the GNS space `Λ(x) = x ρ^{1/2}`, stored as an ambient matrix.
pub type GnsVector<T> = CMat<T>;

/// Matrix unit `E_{row,col}` of one summand, in ambient indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixUnit {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

/// `⊕ M_{d_i}` embedded block-diagonally in `M_N`.
///
/// The canonical basis is the matrix units, blocks in declaration order and
/// row-major inside a block. Coordinates of elements and GNS vectors are taken
/// in this basis; it is orthonormal for the Hilbert-Schmidt inner product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct MatrixAlgebra {
    blocks: Vec<usize>,
    offsets: Vec<usize>,
    units: Vec<MatrixUnit>,
    index: Vec<Option<usize>>,
}

impl TryFrom<Vec<usize>> for MatrixAlgebra {
    type Error = Error;
    fn try_from(blocks: Vec<usize>) -> Result<Self> {
        MatrixAlgebra::new(&blocks)
    }
}

impl From<MatrixAlgebra> for Vec<usize> {
    fn from(a: MatrixAlgebra) -> Self {
        a.blocks
    }
}

impl MatrixAlgebra {
    pub fn new(blocks: &[usize]) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::Dimension(format!(
                "block sizes must be positive, got {blocks:?}"
            )));
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut acc = 0;
        for &d in blocks {
            offsets.push(acc);
            acc += d;
        }
        let size = acc;
        let mut units = Vec::new();
        let mut index = vec![None; size * size];
        for (b, (&d, &o)) in blocks.iter().zip(&offsets).enumerate() {
            for i in 0..d {
                for j in 0..d {
                    index[(o + i) * size + o + j] = Some(units.len());
                    units.push(MatrixUnit {
                        block: b,
                        row: o + i,
                        col: o + j,
                    });
                }
            }
        }
        Ok(Self {
            blocks: blocks.to_vec(),
            offsets,
            units,
            index,
        })
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// Linear dimension `D = Σ d_i²`.
    pub fn dim(&self) -> usize {
        self.units.len()
    }

    /// Ambient matrix size `N = Σ d_i`.
    pub fn size(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn units(&self) -> &[MatrixUnit] {
        &self.units
    }

    pub fn block_range(&self, b: usize) -> Range<usize> {
        self.offsets[b]..self.offsets[b] + self.blocks[b]
    }

    pub fn unit_index(&self, row: usize, col: usize) -> Option<usize> {
        self.index.get(row * self.size() + col).copied().flatten()
    }

    /// Index of `E_k^*`.
    pub fn adjoint_index(&self, k: usize) -> usize {
        let u = self.units[k];
        self.unit_index(u.col, u.row).expect("blocks are square")
    }

    /// True when every summand is one-dimensional.
    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|&d| d == 1)
    }

    pub fn identity<T: Real>(&self) -> CMat<T> {
        CMat::identity(self.size(), self.size())
    }

    pub fn zero<T: Real>(&self) -> CMat<T> {
        CMat::zeros(self.size(), self.size())
    }

    pub fn basis<T: Real>(&self, k: usize) -> CMat<T> {
        let u = self.units[k];
        let mut m = self.zero();
        m[(u.row, u.col)] = Complex::new(T::one(), T::zero());
        m
    }

    pub fn coords<T: Real>(&self, x: &CMat<T>) -> CVec<T> {
        CVec::from_iterator(self.dim(), self.units.iter().map(|u| x[(u.row, u.col)]))
    }

    pub fn from_coords<T: Real>(&self, v: &CVec<T>) -> CMat<T> {
        let mut m = self.zero();
        for (u, &c) in self.units.iter().zip(v.iter()) {
            m[(u.row, u.col)] = c;
        }
        m
    }

    /// Orthogonal projection of an ambient matrix onto the algebra.
    pub fn compress<T: Real>(&self, x: &CMat<T>) -> CMat<T> {
        self.from_coords(&self.coords(x))
    }

    /// Hilbert-Schmidt norm of the part of `x` outside the algebra.
    pub fn off_block_norm<T: Real>(&self, x: &CMat<T>) -> T {
        (x - self.compress(x)).norm()
    }

    pub fn check_shape<T: Real>(&self, x: &CMat<T>) -> Result<()> {
        if x.nrows() != self.size() || x.ncols() != self.size() {
            return Err(Error::Dimension(format!(
                "expected {n}x{n} matrix, got {}x{}",
                x.nrows(),
                x.ncols(),
                n = self.size()
            )));
        }
        Ok(())
    }

    /// Block-wise Hermitian eigendecomposition. Eigenvectors never mix summands.
    pub fn eigh<T: Real>(&self, x: &CMat<T>) -> HermitianEigen<T> {
        let n = self.size();
        let mut values = Vec::with_capacity(n);
        let mut vectors = CMat::zeros(n, n);
        for b in 0..self.blocks.len() {
            let r = self.block_range(b);
            let sub = x.view((r.start, r.start), (r.len(), r.len())).into_owned();
            let e = HermitianEigen::new(&sub);
            values.extend(e.values.iter().copied());
            vectors
                .view_mut((r.start, r.start), (r.len(), r.len()))
                .copy_from(&e.vectors);
        }
        HermitianEigen { values, vectors }
    }

    /// Block-wise functional calculus of a Hermitian element.
    pub fn spectral_map<T: Real>(&self, x: &CMat<T>, f: impl Fn(T) -> T) -> CMat<T> {
        self.eigh(x).map(|v| real(f(v)))
    }

    /// Matrix of a linear map on the algebra, in unit coordinates (`D×D`).
    pub fn superoperator<T: Real>(&self, f: impl Fn(&CMat<T>) -> CMat<T>) -> CMat<T> {
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for k in 0..d {
            let img = f(&self.basis(k));
            out.set_column(k, &self.coords(&img));
        }
        out
    }

    /// Applies a `D×D` coordinate matrix to an ambient element.
    pub fn apply<T: Real>(&self, op: &CMat<T>, x: &CMat<T>) -> CMat<T> {
        self.from_coords(&(op * self.coords(x)))
    }

    /// Coordinate matrix of `ξ ↦ ξ^*` composed with conjugation: `(Jξ)_k = conj(ξ_{k*})`.
    pub fn adjoint_permutation<T: Real>(&self) -> CMat<T> {
        let d = self.dim();
        let mut p = CMat::zeros(d, d);
        for k in 0..d {
            p[(k, self.adjoint_index(k))] = Complex::new(T::one(), T::zero());
        }
        p
    }

    /// The amplification `A ⊗ M_n`, ambient ordering `(i, k) ↦ i·n + k`.
    pub fn amplify(&self, n: usize) -> MatrixAlgebra {
        let blocks: Vec<usize> = self.blocks.iter().map(|&d| d * n).collect();
        MatrixAlgebra::new(&blocks).expect("positive blocks")
    }

    /// Orthonormal Hermitian basis: `E_ii`, `(E_ij+E_ji)/√2`, `i(E_ij−E_ji)/√2`.
    pub fn hermitian_basis<T: Real>(&self) -> Vec<CMat<T>> {
        let mut out = Vec::with_capacity(self.dim());
        let s: T = lit(std::f64::consts::FRAC_1_SQRT_2);
        for b in 0..self.blocks.len() {
            let r = self.block_range(b);
            for i in r.clone() {
                for j in r.clone() {
                    let mut m = self.zero::<T>();
                    if i == j {
                        m[(i, i)] = real(T::one());
                    } else if i < j {
                        m[(i, j)] = real(s);
                        m[(j, i)] = real(s);
                    } else {
                        m[(j, i)] = Complex::new(T::zero(), s);
                        m[(i, j)] = Complex::new(T::zero(), -s);
                    }
                    out.push(m);
                }
            }
        }
        out
    }

    pub fn random_element<T: Real>(&self, rng: &mut Rng) -> CMat<T> {
        let v = CVec::from_fn(self.dim(), |_, _| complex_gaussian(rng));
        self.from_coords(&v)
    }

    /// Hermitian element with i.i.d. standard Gaussian coordinates on the
    /// Hermitian basis, normalized to unit Hilbert-Schmidt norm.
    pub fn random_hermitian<T: Real>(&self, rng: &mut Rng) -> CMat<T> {
        let mut m = self.zero::<T>();
        for h in self.hermitian_basis::<T>() {
            let g: T = gaussian(rng);
            m += h.scale(g);
        }
        let n = m.norm();
        m.unscale(n)
    }

    /// Spectral projection onto the positive part of a random Hermitian element.
    pub fn random_projection<T: Real>(&self, rng: &mut Rng) -> CMat<T> {
        let h = self.random_hermitian::<T>(rng);
        self.spectral_map(&h, |v| if v > T::zero() { T::one() } else { T::zero() })
    }
}

/// Faithful state `φ(x) = tr(ρ x)` with its density cached in spectral form.
#[derive(Clone, Debug)]
pub struct FaithfulState<T: Real> {
    algebra: MatrixAlgebra,
    rho: CMat<T>,
    eigen: HermitianEigen<T>,
    sqrt: CMat<T>,
    inv_sqrt: CMat<T>,
    quarter: CMat<T>,
    inv_quarter: CMat<T>,
    log: CMat<T>,
}

/// Trace and hermiticity slack appropriate to the scalar precision.
pub fn identity_tolerance<T: Real>() -> f64 {
    (64.0 * to_f64(T::default_epsilon())).max(1e-12)
}

impl<T: Real> FaithfulState<T> {
    pub fn new(algebra: MatrixAlgebra, rho: CMat<T>) -> Result<Self> {
        algebra.check_shape(&rho)?;
        let tol = identity_tolerance::<T>();
        let off = to_f64(algebra.off_block_norm(&rho));
        if off > tol {
            return Err(Error::Structure(format!(
                "density has off-block entries of norm {off:e}"
            )));
        }
        let herm = to_f64((&rho - rho.adjoint()).norm());
        if herm > tol {
            return Err(Error::NotFaithful(format!(
                "density is not Hermitian (defect {herm:e})"
            )));
        }
        let tr = rho.trace();
        let tr_err = (to_f64(tr.re) - 1.0).abs() + to_f64(tr.im).abs();
        if tr_err > tol {
            return Err(Error::NotFaithful(format!("trace deviates from 1 by {tr_err:e}")));
        }
        let eigen = algebra.eigh(&rho);
        let min = to_f64(eigen.min());
        if min <= 1e-12 {
            return Err(Error::NotFaithful(format!(
                "minimal eigenvalue {min:e} is not positive"
            )));
        }
        let f = |p: f64| eigen.map(|v| real(v.powf(lit(p))));
        let sqrt = f(0.5);
        let inv_sqrt = f(-0.5);
        let quarter = f(0.25);
        let inv_quarter = f(-0.25);
        let log = eigen.map(|v| real(v.ln()));
        let rho = crate::linalg::hermitian_part(&rho);
        Ok(Self {
            algebra,
            rho,
            eigen,
            sqrt,
            inv_sqrt,
            quarter,
            inv_quarter,
            log,
        })
    }

    /// Normalized trace `I/N`.
    pub fn tracial(algebra: MatrixAlgebra) -> Self {
        let n = algebra.size();
        let rho = CMat::identity(n, n).scale(lit(1.0 / n as f64));
        Self::new(algebra, rho).expect("normalized trace is faithful")
    }

    /// Diagonal density with the given ambient diagonal.
    pub fn diagonal(algebra: MatrixAlgebra, diag: &[f64]) -> Result<Self> {
        if diag.len() != algebra.size() {
            return Err(Error::Dimension(format!(
                "expected {} diagonal entries, got {}",
                algebra.size(),
                diag.len()
            )));
        }
        let mut rho = algebra.zero::<T>();
        for (i, &d) in diag.iter().enumerate() {
            rho[(i, i)] = real(lit(d));
        }
        Self::new(algebra, rho)
    }

    /// Random faithful density: a normalized Wishart matrix blended with the
    /// trace so the spectrum stays away from zero.
    pub fn random(algebra: MatrixAlgebra, rng: &mut Rng, trace_weight: f64) -> Self {
        let n = algebra.size();
        let g = algebra.random_element::<T>(rng);
        let w = &g * g.adjoint();
        let w = w.unscale(w.trace().re);
        let id = CMat::identity(n, n).scale(lit(trace_weight / n as f64));
        let rho = w.scale(lit(1.0 - trace_weight)) + id;
        Self::new(algebra, rho).expect("blended density is faithful")
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        &self.algebra
    }

    pub fn density(&self) -> &CMat<T> {
        &self.rho
    }

    pub fn eigen(&self) -> &HermitianEigen<T> {
        &self.eigen
    }

    pub fn sqrt(&self) -> &CMat<T> {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &CMat<T> {
        &self.inv_sqrt
    }

    pub fn quarter(&self) -> &CMat<T> {
        &self.quarter
    }

    pub fn inv_quarter(&self) -> &CMat<T> {
        &self.inv_quarter
    }

    pub fn log(&self) -> &CMat<T> {
        &self.log
    }

    /// `ρ^z` for complex `z`.
    pub fn power(&self, z: Complex<T>) -> CMat<T> {
        self.eigen.map(|v| nalgebra::ComplexField::exp(real(v.ln()) * z))
    }

    /// `max log λ − min log λ` over the spectrum of the density.
    pub fn log_spread(&self) -> T {
        self.eigen.max().ln() - self.eigen.min().ln()
    }

    /// `φ` is a trace iff `ρ` is central, i.e. scalar on every block.
    pub fn is_tracial(&self) -> bool {
        (0..self.algebra.blocks().len()).all(|b| {
            let vals = &self.eigen.values[self.algebra.block_range(b)];
            let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| {
                (lo.min(to_f64(v)), hi.max(to_f64(v)))
            });
            hi - lo <= 1e-12
        })
    }

    pub fn expect(&self, x: &CMat<T>) -> Complex<T> {
        (&self.rho * x).trace()
    }

    /// `φ(x* y)`.
    pub fn inner(&self, x: &CMat<T>, y: &CMat<T>) -> Complex<T> {
        self.expect(&(x.adjoint() * y))
    }

    /// `Λ(x) = x ρ^{1/2}`.
    pub fn gns_embed(&self, x: &CMat<T>) -> Result<GnsVector<T>> {
        self.algebra.check_shape(x)?;
        Ok(x * &self.sqrt)
    }

    /// `Λ^{-1}(ξ) = ξ ρ^{-1/2}`.
    pub fn gns_element(&self, xi: &GnsVector<T>) -> CMat<T> {
        xi * &self.inv_sqrt
    }

    /// `Λ(1) = ρ^{1/2}`, the cyclic vector.
    pub fn cyclic_vector(&self) -> GnsVector<T> {
        self.sqrt.clone()
    }

    /// Coordinate matrix of left multiplication by `x` on the GNS space.
    pub fn left_action(&self, x: &CMat<T>) -> CMat<T> {
        self.algebra.superoperator(|xi| x * xi)
    }

    /// Coordinate matrix of right multiplication by `x`.
    pub fn right_action(&self, x: &CMat<T>) -> CMat<T> {
        self.algebra.superoperator(|xi| xi * x)
    }

    /// Byte encoding used to fingerprint instances.
    pub fn fingerprint_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for b in self.algebra.blocks() {
            out.extend_from_slice(&(*b as u64).to_le_bytes());
        }
        for z in self.rho.iter() {
            out.extend_from_slice(&to_f64(z.re).to_le_bytes());
            out.extend_from_slice(&to_f64(z.im).to_le_bytes());
        }
        out
    }
}
