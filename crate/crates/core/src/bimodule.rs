//! Tomita bimodules: Hilbert bimodules over the Tomita algebra with an
//! antiunitary involution and a positive one-parameter group.
//!
//! A bimodule is stored through its underlying correspondence: for each
//! matrix unit `E_k` of the algebra the matrices of `ξ ↦ E_k ξ` and
//! `ξ ↦ ξ E_k` on the carrier `ℂ^m`. Tomita actions are recovered as
//! `a ξ = Λ^{-1}(a) ξ` and `ξ b = ξ (ρ^{-1/2} b)`.

use num_complex::Complex;

use crate::algebra::MatrixAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{conj_mat, conj_vec, direct_sum, identity, lit, op_norm, real, to_f64, CMat, CVec, HermitianEigen};
use crate::modular::{ModularData, FLOW_EXPONENT_LIMIT};
use crate::report::{fingerprint, CertificationReport, Tolerances};
use crate::rng::{complex_gaussian, derive_seed, seeded, uniform, Rng};
use crate::Real;

#[derive(Clone, Debug)]
pub struct TomitaBimodule<T: Real> {
    modular: ModularData<T>,
    left: Vec<CMat<T>>,
    right: Vec<CMat<T>>,
    jmap: CMat<T>,
    generator: CMat<T>,
    gen_eigen: HermitianEigen<T>,
    tomita_left: Vec<CMat<T>>,
    tomita_right: Vec<CMat<T>>,
    label: String,
}

impl<T: Real> TomitaBimodule<T> {
    /// Assembles a bimodule from correspondence actions, the matrix `K` of the
    /// involution (`𝒥ξ = K conj(ξ)`) and the positive generator `A` (`𝒰_z = A^{iz}`).
    pub fn new(
        modular: ModularData<T>,
        left: Vec<CMat<T>>,
        right: Vec<CMat<T>>,
        jmap: CMat<T>,
        generator: CMat<T>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let d = modular.algebra().dim();
        let m = jmap.nrows();
        if left.len() != d || right.len() != d {
            return Err(Error::Dimension(format!("expected {d} action matrices per side")));
        }
        let square = |x: &CMat<T>| x.nrows() == m && x.ncols() == m;
        if !left.iter().chain(right.iter()).all(square) || !square(&jmap) || !square(&generator) {
            return Err(Error::Dimension(format!("all carrier operators must be {m}x{m}")));
        }
        let herm = to_f64((&generator - generator.adjoint()).norm());
        if herm > 1e-9 * to_f64(generator.norm()).max(1.0) {
            return Err(Error::Structure(format!(
                "generator is not self-adjoint (defect {herm:e})"
            )));
        }
        let gen_eigen = HermitianEigen::new(&generator);
        if to_f64(gen_eigen.min()) <= 1e-12 {
            return Err(Error::Structure(format!(
                "generator is not positive invertible (min eigenvalue {:e})",
                to_f64(gen_eigen.min())
            )));
        }
        let state = modular.state();
        let a = modular.algebra();
        let combine = |mats: &[CMat<T>], x: &CMat<T>| {
            let c = a.coords(x);
            let mut out = CMat::zeros(m, m);
            for (k, mk) in mats.iter().enumerate() {
                if c[k] != Complex::new(T::zero(), T::zero()) {
                    out += mk * c[k];
                }
            }
            out
        };
        let tomita_left = (0..d)
            .map(|k| combine(&left, &(a.basis(k) * state.inv_sqrt())))
            .collect();
        let tomita_right = (0..d)
            .map(|k| combine(&right, &(state.inv_sqrt() * a.basis::<T>(k))))
            .collect();
        Ok(Self {
            modular,
            left,
            right,
            jmap,
            generator,
            gen_eigen,
            tomita_left,
            tomita_right,
            label: label.into(),
        })
    }

    /// Builds a bimodule from its Tomita actions, given as linear maps from GNS
    /// coordinates to carrier operators.
    pub fn from_tomita_actions(
        modular: ModularData<T>,
        tomita_left: impl Fn(&CVec<T>) -> CMat<T>,
        tomita_right: impl Fn(&CVec<T>) -> CMat<T>,
        jmap: CMat<T>,
        generator: CMat<T>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let a = modular.algebra().clone();
        let s = modular.state().clone();
        let left = (0..a.dim())
            .map(|k| tomita_left(&a.coords(&(a.basis(k) * s.sqrt()))))
            .collect();
        let right = (0..a.dim())
            .map(|k| tomita_right(&a.coords(&(s.sqrt() * a.basis::<T>(k)))))
            .collect();
        Self::new(modular, left, right, jmap, generator, label)
    }

    /// The standard form `L²(M, φ)` with `𝒥 = J` and `𝒰 = Δ^{i·}`.
    pub fn gns(modular: &ModularData<T>) -> Self {
        let a = modular.algebra();
        let s = modular.state();
        let left = (0..a.dim()).map(|k| s.left_action(&a.basis(k))).collect();
        let right = (0..a.dim()).map(|k| s.right_action(&a.basis(k))).collect();
        Self::new(
            modular.clone(),
            left,
            right,
            modular.j_matrix().clone(),
            modular.delta().clone(),
            "gns",
        )
        .expect("standard form is a Tomita bimodule")
    }

    /// `H ⊕ H` with `𝒥(η, ζ) = (𝒥ζ, 𝒥η)` and generator `e^{-ω}A ⊕ e^{ω}A`.
    pub fn doubled(&self, omega: T) -> Self {
        let m = self.dim();
        let dup = |v: &[CMat<T>]| v.iter().map(|x| direct_sum(x, x)).collect::<Vec<_>>();
        let mut jmap = CMat::zeros(2 * m, 2 * m);
        jmap.view_mut((0, m), (m, m)).copy_from(&self.jmap);
        jmap.view_mut((m, 0), (m, m)).copy_from(&self.jmap);
        let generator = direct_sum(
            &self.generator.scale((-omega).exp()),
            &self.generator.scale(omega.exp()),
        );
        Self::new(
            self.modular.clone(),
            dup(&self.left),
            dup(&self.right),
            jmap,
            generator,
            format!("doubled({},{:.6})", self.label, to_f64(omega)),
        )
        .expect("doubling preserves the axioms")
    }

    /// Orthogonal direct sum of two bimodules over the same algebra and state.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.modular.algebra() != other.modular.algebra()
            || (self.modular.state().density() - other.modular.state().density()).norm() > lit(1e-14)
        {
            return Err(Error::Structure("direct sum needs a common algebra and state".into()));
        }
        let zip = |a: &[CMat<T>], b: &[CMat<T>]| a.iter().zip(b).map(|(x, y)| direct_sum(x, y)).collect::<Vec<_>>();
        Self::new(
            self.modular.clone(),
            zip(&self.left, &other.left),
            zip(&self.right, &other.right),
            direct_sum(&self.jmap, &other.jmap),
            direct_sum(&self.generator, &other.generator),
            format!("{}+{}", self.label, other.label),
        )
    }

    /// Copy with the sign of the involution flipped on one carrier basis vector.
    pub fn with_corrupted_conjugation(&self, index: usize) -> Result<Self> {
        if index >= self.dim() {
            return Err(Error::Dimension(format!("index {index} outside carrier")));
        }
        let mut jmap = self.jmap.clone();
        let mut col = jmap.column_mut(index);
        col.neg_mut();
        Self::new(
            self.modular.clone(),
            self.left.clone(),
            self.right.clone(),
            jmap,
            self.generator.clone(),
            format!("{}!j{index}", self.label),
        )
    }

    pub fn dim(&self) -> usize {
        self.jmap.nrows()
    }

    pub fn modular(&self) -> &ModularData<T> {
        &self.modular
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        self.modular.algebra()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn jmap(&self) -> &CMat<T> {
        &self.jmap
    }

    pub fn generator(&self) -> &CMat<T> {
        &self.generator
    }

    pub fn generator_eigen(&self) -> &HermitianEigen<T> {
        &self.gen_eigen
    }

    pub fn left_units(&self) -> &[CMat<T>] {
        &self.left
    }

    pub fn right_units(&self) -> &[CMat<T>] {
        &self.right
    }

    fn combine(mats: &[CMat<T>], c: &CVec<T>, m: usize) -> CMat<T> {
        let mut out = CMat::zeros(m, m);
        let zero = Complex::new(T::zero(), T::zero());
        for (k, mk) in mats.iter().enumerate() {
            if c[k] != zero {
                out += mk * c[k];
            }
        }
        out
    }

    /// Correspondence left action of an algebra element.
    pub fn left_of(&self, x: &CMat<T>) -> CMat<T> {
        Self::combine(&self.left, &self.algebra().coords(x), self.dim())
    }

    /// Correspondence right action of an algebra element.
    pub fn right_of(&self, x: &CMat<T>) -> CMat<T> {
        Self::combine(&self.right, &self.algebra().coords(x), self.dim())
    }

    /// Left action of a Tomita vector given in GNS coordinates.
    pub fn tomita_left(&self, a: &CVec<T>) -> CMat<T> {
        Self::combine(&self.tomita_left, a, self.dim())
    }

    /// Right action of a Tomita vector given in GNS coordinates.
    pub fn tomita_right(&self, b: &CVec<T>) -> CMat<T> {
        Self::combine(&self.tomita_right, b, self.dim())
    }

    /// Tomita left action of the `k`-th GNS basis vector.
    pub fn tomita_left_unit(&self, k: usize) -> &CMat<T> {
        &self.tomita_left[k]
    }

    pub fn tomita_right_unit(&self, k: usize) -> &CMat<T> {
        &self.tomita_right[k]
    }

    /// `a ξ b`.
    pub fn act(&self, a: &CVec<T>, xi: &CVec<T>, b: &CVec<T>) -> CVec<T> {
        self.tomita_left(a) * (self.tomita_right(b) * xi)
    }

    pub fn apply_j(&self, xi: &CVec<T>) -> CVec<T> {
        &self.jmap * conj_vec(xi)
    }

    /// `𝒰_z = A^{iz}`.
    pub fn flow(&self, z: Complex<T>) -> Result<CMat<T>> {
        let spread = to_f64(self.gen_eigen.max().ln() - self.gen_eigen.min().ln());
        let e = to_f64(z.im).abs() * spread;
        if !e.is_finite() || e > FLOW_EXPONENT_LIMIT {
            return Err(Error::Range(format!(
                "|Im z|·spread(log A) = {e:e} exceeds {FLOW_EXPONENT_LIMIT}"
            )));
        }
        let iz = Complex::new(-z.im, z.re);
        Ok(self.gen_eigen.map(|v| nalgebra::ComplexField::exp(real(v.ln()) * iz)))
    }

    pub fn fingerprint(&self) -> String {
        let mut bytes = self.modular.state().fingerprint_bytes();
        for z in self.generator.iter().chain(self.jmap.iter()) {
            bytes.extend_from_slice(&to_f64(z.re).to_le_bytes());
            bytes.extend_from_slice(&to_f64(z.im).to_le_bytes());
        }
        fingerprint(&self.label, &bytes)
    }
}

pub(crate) fn random_unit<T: Real>(rng: &mut Rng, n: usize) -> CVec<T> {
    let v = CVec::from_fn(n, |_, _| complex_gaussian::<T>(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Product `E_k E_l` of matrix units, as an optional unit index.
fn unit_product(a: &MatrixAlgebra, k: usize, l: usize) -> Option<usize> {
    let (uk, ul) = (a.units()[k], a.units()[l]);
    if uk.col == ul.row {
        a.unit_index(uk.row, ul.col)
    } else {
        None
    }
}

/// Verifies the Tomita bimodule axioms: representation properties, the
/// inner-product relation `⟨aξb, η⟩ = ⟨ξ, a♯ η b♭⟩`, covariance of `𝒰` and `𝒥`,
/// and the relations between `𝒥` and `𝒰`.
pub fn check_bimodule_axioms<T: Real>(
    h: &TomitaBimodule<T>,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let a = h.algebra();
    let md = h.modular();
    let st = md.state();
    let m = h.dim();
    let d = a.dim();
    let mut rep = CertificationReport::new(h.fingerprint(), seed, tol);
    let eye = identity::<T>(m);
    let f = |x: T| to_f64(x);

    // Representation properties on matrix units.
    let (mut lrep, mut rrep, mut comm) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..d {
        let ks = a.adjoint_index(k);
        lrep = lrep.max(f((&h.left[ks] - h.left[k].adjoint()).norm()));
        rrep = rrep.max(f((&h.right[ks] - h.right[k].adjoint()).norm()));
        for l in 0..d {
            let (lp, rp) = match unit_product(a, k, l) {
                Some(p) => (h.left[p].clone(), h.right[p].clone()),
                None => (CMat::zeros(m, m), CMat::zeros(m, m)),
            };
            lrep = lrep.max(f((&lp - &h.left[k] * &h.left[l]).norm()));
            rrep = rrep.max(f((&rp - &h.right[l] * &h.right[k]).norm()));
            comm = comm.max(f((&h.left[k] * &h.right[l] - &h.right[l] * &h.left[k]).norm()));
        }
    }
    lrep = lrep.max(f((h.left_of(&a.identity()) - &eye).norm()));
    rrep = rrep.max(f((h.right_of(&a.identity()) - &eye).norm()));
    rep.bound("left_representation", lrep, tol.check);
    rep.bound("right_antirepresentation", rrep, tol.check);
    rep.bound("bimodule_commutation", comm, tol.check);

    // Involution: antiunitary, involutive, reverses the flow generator.
    let k = &h.jmap;
    let unitary = f((k.adjoint() * k - &eye).norm());
    let involutive = f((k * conj_mat(k) - &eye).norm());
    rep.bound("conjugation_antiunitary", unitary, tol.check);
    rep.bound("conjugation_involutive", involutive, tol.check);
    let a_inv = h.gen_eigen.map(|v| real(v.recip()));
    let jaj = k * conj_mat(&h.generator) * conj_mat(k);
    rep.bound(
        "conjugation_inverts_generator",
        f(crate::linalg::rel_diff(&a_inv, &jaj)),
        tol.check,
    );
    let pos = f(h.gen_eigen.min());
    rep.record("generator_positive", (-pos).max(0.0), pos, pos > 1e-12);
    // Finite dimensional actions are automatically normal.
    rep.record("normality", 0.0, tol.check, true);

    let mut rng = seeded(derive_seed(seed, 0xB1));
    let (mut bound_v, mut inner_v, mut jcov, mut ucov, mut ucov_i, mut jflow) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let z_i = Complex::new(T::zero(), T::one());
    let flows_i = [
        (z_i, h.flow(z_i)?, md.flow_matrix(z_i)?),
        (-z_i, h.flow(-z_i)?, md.flow_matrix(-z_i)?),
    ];
    for _ in 0..samples {
        let av = random_unit::<T>(&mut rng, d);
        let bv = random_unit::<T>(&mut rng, d);
        let xi = random_unit::<T>(&mut rng, m);
        let eta = random_unit::<T>(&mut rng, m);
        let axb = h.act(&av, &xi, &bv);

        let x_a = st.gns_element(&a.from_coords(&av));
        let r_b = st.inv_sqrt() * a.from_coords(&bv);
        let bound = op_norm(&x_a) * op_norm(&r_b) * xi.norm();
        bound_v = bound_v.max((f(axb.norm()) - f(bound)).max(0.0));

        let a_sharp = a.coords(&md.sharp(&a.from_coords(&av)));
        let b_flat = a.coords(&md.flat(&a.from_coords(&bv)));
        let lhs = axb.dotc(&eta);
        let rhs = xi.dotc(&h.act(&a_sharp, &eta, &b_flat));
        inner_v = inner_v.max(f(crate::linalg::cabs(lhs - rhs)));

        let ja = md.apply_j_coords(&av);
        let jb = md.apply_j_coords(&bv);
        let lhs = h.apply_j(&axb);
        let rhs = h.act(&jb, &h.apply_j(&xi), &ja);
        jcov = jcov.max(f((lhs - rhs).norm()));

        let t: T = uniform(&mut rng, -std::f64::consts::PI, std::f64::consts::PI);
        let zt = real(t);
        let ut = h.flow(zt)?;
        let ut_alg = md.flow_matrix(zt)?;
        let lhs = &ut * &axb;
        let rhs = h.act(&(&ut_alg * &av), &(&ut * &xi), &(&ut_alg * &bv));
        ucov = ucov.max(f((lhs - rhs).norm()));
        jflow = jflow.max(f((h.apply_j(&(&ut * &xi)) - &ut * h.apply_j(&xi)).norm()));

        for (_, uz, uz_alg) in &flows_i {
            let lhs = uz * &axb;
            let rhs = h.act(&(uz_alg * &av), &(uz * &xi), &(uz_alg * &bv));
            let scale = f(lhs.norm()).max(1.0);
            ucov_i = ucov_i.max(f((lhs - rhs).norm()) / scale);
        }
    }
    rep.bound("action_norm_bound", bound_v, tol.check);
    rep.bound("inner_product_relation", inner_v, tol.check);
    rep.bound("conjugation_covariance", jcov, tol.check);
    rep.bound("flow_covariance_real", ucov, tol.check);
    rep.bound("flow_covariance_imaginary", ucov_i, tol.check);
    rep.bound("conjugation_commutes_with_flow", jflow, tol.check);
    Ok(rep)
}
