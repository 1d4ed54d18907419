//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::Real;

pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

#[inline]
pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

#[inline]
pub fn real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Hilbert-Schmidt inner product `tr(a* b)`, conjugate-linear in `a`.
pub fn hs_inner<T: Real>(a: &CMat<T>, b: &CMat<T>) -> Complex<T> {
    a.dotc(b)
}

/// Modulus of a complex scalar.
#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

pub fn frob<T: Real>(a: &CMat<T>) -> T {
    a.norm()
}

pub fn vnorm<T: Real>(a: &CVec<T>) -> T {
    a.norm()
}

/// Largest singular value.
pub fn op_norm<T: Real>(a: &CMat<T>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    a.clone().singular_values().max()
}

pub fn commutator<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a * b - b * a
}

pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

pub fn hermitian_part<T: Real>(a: &CMat<T>) -> CMat<T> {
    (a + a.adjoint()).scale(lit(0.5))
}

pub fn conj_mat<T: Real>(a: &CMat<T>) -> CMat<T> {
    a.map(|z| z.conj())
}

pub fn conj_vec<T: Real>(a: &CVec<T>) -> CVec<T> {
    a.map(|z| z.conj())
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::identity(n, n)
}

/// `‖a - b‖_F / max(1, ‖a‖_F)`.
pub fn rel_diff<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    let scale = frob(a).max(T::one());
    (a - b).norm() / scale
}

/// Block-diagonal direct sum.
pub fn direct_sum<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMat<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// Decomposes the Hermitian part of `m`.
    pub fn new(m: &CMat<T>) -> Self {
        let n = m.nrows();
        if n == 0 {
            return Self {
                values: Vec::new(),
                vectors: CMat::zeros(0, 0),
            };
        }
        let eig = hermitian_part(m).symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[i]
                .partial_cmp(&eig.eigenvalues[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = CMat::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    /// Smallest eigenvalue. Block-wise decompositions are only sorted per block.
    pub fn min(&self) -> T {
        self.values
            .iter()
            .copied()
            .reduce(|a, b| a.min(b))
            .unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.values
            .iter()
            .copied()
            .reduce(|a, b| a.max(b))
            .unwrap_or_else(T::zero)
    }

    /// Functional calculus `V f(Λ) V*`.
    pub fn map(&self, f: impl Fn(T) -> Complex<T>) -> CMat<T> {
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let c = f(v);
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= c;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// Independent of any eigendecomposition, used to cross-check spectral routes.
pub fn expm<T: Real>(m: &CMat<T>) -> CMat<T> {
    let n = m.nrows();
    let norm = to_f64(frob(m));
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = m.scale(lit(0.5f64.powi(squarings as i32)));
    let mut term = identity::<T>(n);
    let mut sum = identity::<T>(n);
    for k in 1..=30 {
        term = (&term * &scaled).scale(lit(1.0 / k as f64));
        sum += &term;
        if to_f64(frob(&term)) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Orthonormal basis of the numerical kernel of `m`: right singular vectors
/// whose singular value is at most `tol * max(1, σ_max)`.
pub fn nullspace<T: Real>(m: &CMat<T>, tol: f64) -> Vec<CVec<T>> {
    let cols = m.ncols();
    if cols == 0 {
        return Vec::new();
    }
    // Pad wide systems so the thin SVD still returns a full right basis.
    let rows = m.nrows().max(cols);
    let mut padded = CMat::zeros(rows, cols);
    padded.view_mut((0, 0), m.shape()).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let scale = to_f64(svd.singular_values.max()).max(1.0);
    (0..cols)
        .filter(|&j| to_f64(svd.singular_values[j]) <= tol * scale)
        .map(|j| v_t.row(j).adjoint())
        .collect()
}
