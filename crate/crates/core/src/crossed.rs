//! Crossed products of a finite-dimensional Tomita algebra by a finite cyclic
//! group `Z_N`, in two pictures.
//!
//! The *function picture* is the convolution structure on `Z_N → GNS`:
//! `(a∗b)(g) = Σ_h U_{-h}a(g−h)·b(h)`, `a♯(g) = U_{-g}(a(−g)♯)`.
//!
//! The *block picture* realizes the same algebra concretely on
//! `ℓ²(Z_N) ⊗ ℂ^n` through `π(x) = Σ_g |g⟩⟨g| ⊗ α_{-g}(x)` and the shifts
//! `λ_h`, decomposes it into blocks, and equips it with the dual state
//! `φ̃(Σ_g λ_g π(x_g)) = φ(x_0)`. The unitary `fmap` carries function
//! coordinates (fiber-major, `g·D + j`) to block GNS coordinates.

use num_complex::Complex;

use crate::algebra::{FaithfulState, GnsVector, MatrixAlgebra};
use crate::bimodule::{random_unit, TomitaBimodule};
use crate::derivation::Derivation;
use crate::error::{Error, Result};
use crate::linalg::{identity, kron, lit, real, rel_diff, to_f64, CMat, CVec, HermitianEigen};
use crate::modular::ModularData;
use crate::report::{CertificationReport, Tolerances};
use crate::rng::{derive_seed, seeded};
use crate::wedderburn::Wedderburn;
use crate::Real;

const DECOMPOSITION_SEED: u64 = 0x5EED_C205;
const ACTION_TOLERANCE: f64 = 1e-10;
const MAX_DENOMINATOR: u64 = 64;

/// How `Z_N` acts on the base algebra.
#[derive(Clone, Debug)]
pub enum ActionSpec<T: Real> {
    /// `α_g = σ_{gT/N}` where `T` is the period of the modular group.
    ModularDiscretized,
    /// `α_g = Ad(W^g)` for a unitary `W` on the ambient space.
    Explicit(CMat<T>),
}

#[derive(Clone, Debug, PartialEq)]
enum Lift {
    /// Generator lifted through `𝒰_{gτ}`.
    Modular {
        step: f64,
    },
    Explicit,
}

#[derive(Clone, Debug)]
pub struct CrossedProduct<T: Real> {
    base: ModularData<T>,
    order: usize,
    /// `W^g` for `g = 0..N`.
    powers: Vec<CMat<T>>,
    lift: Lift,
    wedderburn: Wedderburn<T>,
    modular: ModularData<T>,
    fmap: CMat<T>,
}

/// Period of the modular group of `state`: `2π/g` where `g` generates the
/// within-block log-ratios of the density. Tracial blocks give `2π`.
pub fn modular_period<T: Real>(state: &FaithfulState<T>) -> Result<f64> {
    let a = state.algebra();
    let mut gaps = Vec::new();
    for b in 0..a.blocks().len() {
        let r = a.block_range(b);
        let sub = state
            .density()
            .view((r.start, r.start), (r.len(), r.len()))
            .into_owned();
        let logs: Vec<f64> = HermitianEigen::new(&sub)
            .values
            .iter()
            .map(|&v| to_f64(v).ln())
            .collect();
        for i in 0..logs.len() {
            for j in 0..i {
                let g = (logs[i] - logs[j]).abs();
                if g > 1e-10 {
                    gaps.push(g);
                }
            }
        }
    }
    let Some(&g0) = gaps.iter().min_by(|x, y| x.total_cmp(y)) else {
        return Ok(2.0 * std::f64::consts::PI);
    };
    let mut denom = 1u64;
    for &g in &gaps {
        let ratio = g / g0;
        let q = (1..=MAX_DENOMINATOR)
            .find(|&q| {
                let x = ratio * q as f64;
                (x - x.round()).abs() <= 1e-8 * x
            })
            .ok_or_else(|| Error::Config(format!("log-ratios {g0:e} and {g:e} are not commensurate")))?;
        denom = lcm(denom, q);
        if denom > MAX_DENOMINATOR * MAX_DENOMINATOR {
            return Err(Error::Config("modular period exceeds the rational search range".into()));
        }
    }
    let base = g0 / denom as f64;
    for &g in &gaps {
        let x = g / base;
        if (x - x.round()).abs() > 1e-7 * x {
            return Err(Error::Config(format!("log-ratio {g:e} is not a multiple of {base:e}")));
        }
    }
    Ok(2.0 * std::f64::consts::PI / base)
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

fn unitary_power<T: Real>(w: &CMat<T>, k: usize) -> CMat<T> {
    let mut p = identity::<T>(w.nrows());
    for _ in 0..k {
        p = &p * w;
    }
    p
}

/// Checks that `W` implements a `φ`-preserving automorphism of order dividing `n`.
fn validate_action<T: Real>(state: &FaithfulState<T>, w: &CMat<T>, n: usize) -> Result<()> {
    let a = state.algebra();
    let size = a.size();
    if w.shape() != (size, size) {
        return Err(Error::Config(format!("action unitary must be {size}x{size}")));
    }
    let unit = to_f64((w.adjoint() * w - identity::<T>(size)).norm());
    if unit > ACTION_TOLERANCE {
        return Err(Error::Config(format!("action is not unitary (defect {unit:e})")));
    }
    let wn = unitary_power(w, n);
    for k in 0..a.dim() {
        let e = a.basis::<T>(k);
        let moved = w * &e * w.adjoint();
        let off = to_f64(a.off_block_norm(&moved));
        if off > ACTION_TOLERANCE {
            return Err(Error::Config(format!("action leaves the algebra (off-block {off:e})")));
        }
        let back = to_f64((&wn * &e * wn.adjoint() - &e).norm());
        if back > ACTION_TOLERANCE {
            return Err(Error::Config(format!(
                "action order does not divide {n} (defect {back:e})"
            )));
        }
    }
    let rho = state.density();
    let inv = to_f64((w * rho * w.adjoint() - rho).norm());
    if inv > ACTION_TOLERANCE {
        return Err(Error::Config(format!(
            "action does not preserve the state (defect {inv:e})"
        )));
    }
    Ok(())
}

impl<T: Real> CrossedProduct<T> {
    pub fn build(base: &ModularData<T>, order: usize, action: ActionSpec<T>) -> Result<Self> {
        if order == 0 {
            return Err(Error::Config("group order must be positive".into()));
        }
        let state = base.state();
        let (w, lift) = match action {
            ActionSpec::ModularDiscretized => {
                let step = modular_period(state)? / order as f64;
                let w = state.power(Complex::new(T::zero(), lit(step)));
                (w, Lift::Modular { step })
            }
            ActionSpec::Explicit(w) => (w, Lift::Explicit),
        };
        validate_action(state, &w, order)?;
        let powers: Vec<CMat<T>> = (0..order).map(|k| unitary_power(&w, k)).collect();
        let a = base.algebra();
        let n = a.size();
        let mut cp = Self {
            base: base.clone(),
            order,
            powers,
            lift,
            wedderburn: Wedderburn::trivial(a),
            modular: base.clone(),
            fmap: identity(a.dim()),
        };
        let wedderburn = if order == 1 {
            Wedderburn::trivial(a)
        } else {
            let mut gens = Vec::with_capacity(order * a.dim());
            for g in 0..order {
                for k in 0..a.dim() {
                    gens.push(cp.shift(g) * cp.pi(&a.basis(k)));
                }
            }
            Wedderburn::decompose(&gens, DECOMPOSITION_SEED)?
        };
        let rho_c = kron(&identity::<T>(order), state.density()).unscale(lit(order as f64));
        let rho_b = wedderburn.block_density(&rho_c);
        let modular = ModularData::new(FaithfulState::new(wedderburn.algebra().clone(), rho_b)?);
        let dd = a.dim();
        let mut fmap = CMat::zeros(order * dd, order * dd);
        let norm: T = lit((order as f64).sqrt());
        for g in 0..order {
            for j in 0..dd {
                let concrete = (cp.shift(g) * cp.pi(&a.basis(j))).unscale(norm);
                fmap.set_column(g * dd + j, &wedderburn.gns_to_block(&concrete));
            }
        }
        let defect = to_f64((fmap.adjoint() * &fmap - identity::<T>(order * dd)).norm());
        if defect > 1e-9 {
            return Err(Error::Structure(format!(
                "function picture is not isometric ({defect:e})"
            )));
        }
        debug_assert_eq!(wedderburn.concrete_size(), order * n);
        cp.wedderburn = wedderburn;
        cp.modular = modular;
        cp.fmap = fmap;
        Ok(cp)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> &ModularData<T> {
        &self.base
    }

    /// Modular data of the dual state on the block algebra.
    pub fn modular(&self) -> &ModularData<T> {
        &self.modular
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        self.modular.algebra()
    }

    pub fn wedderburn(&self) -> &Wedderburn<T> {
        &self.wedderburn
    }

    /// Unitary from function coordinates to block GNS coordinates.
    pub fn fmap(&self) -> &CMat<T> {
        &self.fmap
    }

    /// Flow time of the generator for a discretized modular action.
    pub fn step(&self) -> Option<f64> {
        match self.lift {
            Lift::Modular { step } => Some(step),
            Lift::Explicit => None,
        }
    }

    /// Implementing unitary `W^g` on the ambient space.
    pub fn unitary(&self, g: usize) -> &CMat<T> {
        &self.powers[g % self.order]
    }

    fn wrap(&self, g: isize) -> usize {
        g.rem_euclid(self.order as isize) as usize
    }

    /// `α_g` on algebra elements and GNS vectors alike.
    pub fn alpha(&self, g: isize, x: &CMat<T>) -> CMat<T> {
        let g = self.wrap(g);
        if g == 0 {
            return x.clone();
        }
        let w = &self.powers[g];
        w * x * w.adjoint()
    }

    /// `π(x) = Σ_g |g⟩⟨g| ⊗ α_{-g}(x)` on `ℓ²(Z_N) ⊗ ℂ^n`.
    pub fn pi(&self, x: &CMat<T>) -> CMat<T> {
        let n = self.base.algebra().size();
        let mut out = CMat::zeros(self.order * n, self.order * n);
        for g in 0..self.order {
            out.view_mut((g * n, g * n), (n, n))
                .copy_from(&self.alpha(-(g as isize), x));
        }
        out
    }

    /// Shift `λ_h ⊗ 1` on `ℓ²(Z_N) ⊗ ℂ^n`.
    pub fn shift(&self, h: usize) -> CMat<T> {
        let n = self.base.algebra().size();
        let mut out = CMat::zeros(self.order * n, self.order * n);
        for g in 0..self.order {
            let to = (g + h) % self.order;
            for i in 0..n {
                out[(to * n + i, g * n + i)] = real(T::one());
            }
        }
        out
    }

    fn fiber_dim(&self) -> usize {
        self.base.algebra().dim()
    }

    /// Fiber `g` of a function, as a GNS matrix of the base.
    pub fn fiber(&self, a: &CVec<T>, g: usize) -> GnsVector<T> {
        let d = self.fiber_dim();
        self.base.algebra().from_coords(&a.rows(g * d, d).into_owned())
    }

    /// Assembles a function from its fibers.
    pub fn function(&self, fibers: &[GnsVector<T>]) -> CVec<T> {
        let d = self.fiber_dim();
        let mut out = CVec::zeros(self.order * d);
        for (g, x) in fibers.iter().enumerate() {
            out.rows_mut(g * d, d).copy_from(&self.base.algebra().coords(x));
        }
        out
    }

    pub fn to_block(&self, a: &CVec<T>) -> CVec<T> {
        &self.fmap * a
    }

    pub fn to_function(&self, v: &CVec<T>) -> CVec<T> {
        self.fmap.adjoint() * v
    }

    /// `(a∗b)(g) = Σ_h U_{-h}a(g−h)·b(h)`.
    pub fn convolve(&self, a: &CVec<T>, b: &CVec<T>) -> CVec<T> {
        let n = self.order;
        let fa: Vec<_> = (0..n).map(|g| self.fiber(a, g)).collect();
        let fb: Vec<_> = (0..n).map(|g| self.fiber(b, g)).collect();
        let out: Vec<GnsVector<T>> = (0..n)
            .map(|g| {
                let mut acc = self.base.algebra().zero::<T>();
                for h in 0..n {
                    let moved = self.alpha(-(h as isize), &fa[(g + n - h) % n]);
                    acc += self.base.product(&moved, &fb[h]);
                }
                acc
            })
            .collect();
        self.function(&out)
    }

    /// `a♯(g) = U_{-g}(a(−g)♯)`.
    pub fn sharp(&self, a: &CVec<T>) -> CVec<T> {
        let n = self.order;
        let out: Vec<GnsVector<T>> = (0..n)
            .map(|g| self.alpha(-(g as isize), &self.base.sharp(&self.fiber(a, (n - g) % n))))
            .collect();
        self.function(&out)
    }

    /// `(U_z a)(g) = U_z a(g)`.
    pub fn flow(&self, z: Complex<T>, a: &CVec<T>) -> Result<CVec<T>> {
        let out = (0..self.order)
            .map(|g| self.base.flow(z, &self.fiber(a, g)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.function(&out))
    }

    /// Function `1_g ⊗ ξ`.
    pub fn delta_function(&self, g: usize, xi: &GnsVector<T>) -> CVec<T> {
        let mut fibers = vec![self.base.algebra().zero::<T>(); self.order];
        fibers[g % self.order] = xi.clone();
        self.function(&fibers)
    }

    /// Block GNS vector of the group element `λ_h ⊗ 1`.
    pub fn group_vector(&self, h: usize) -> CVec<T> {
        self.to_block(&self.delta_function(h, &self.base.state().cyclic_vector()))
    }

    /// Isometric embedding `ξ ↦ 1_0 ⊗ ξ` of the base GNS space.
    pub fn embed(&self, xi: &CVec<T>) -> CVec<T> {
        self.to_block(&self.delta_function(0, &self.base.algebra().from_coords(xi)))
    }

    /// Fibers `x_g` of a block algebra element `Σ_g λ_g π(x_g)`.
    pub fn element_fibers(&self, x: &CMat<T>) -> Vec<CMat<T>> {
        let n = self.base.algebra().size();
        let concrete = self.wedderburn.to_concrete(x);
        (0..self.order)
            .map(|g| {
                self.base
                    .algebra()
                    .compress(&concrete.view((g * n, 0), (n, n)).into_owned())
            })
            .collect()
    }

    /// Lift `𝒱_g` of the action to the carrier of `h`.
    fn carrier_lift(&self, h: &TomitaBimodule<T>) -> Result<Vec<CMat<T>>> {
        let m = h.dim();
        let lifts: Vec<CMat<T>> = match self.lift {
            Lift::Modular { step } => (0..self.order)
                .map(|g| {
                    if g == 0 {
                        Ok(identity(m))
                    } else {
                        h.flow(real(lit(step * g as f64)))
                    }
                })
                .collect::<Result<_>>()?,
            Lift::Explicit => {
                let a = self.base.algebra();
                let w = &self.powers[1 % self.order];
                if to_f64(a.off_block_norm(w)) > ACTION_TOLERANCE {
                    return Err(Error::Precondition(
                        "an outer action has no canonical lift to the bimodule".into(),
                    ));
                }
                (0..self.order)
                    .map(|g| {
                        if g == 0 {
                            identity(m)
                        } else {
                            let wg = &self.powers[g];
                            h.left_of(wg) * h.right_of(&wg.adjoint())
                        }
                    })
                    .collect()
            }
        };
        let full = match self.lift {
            Lift::Modular { step } if self.order > 1 => h.flow(real(lit(step * self.order as f64)))?,
            _ => &lifts[self.order - 1] * lifts.get(1).cloned().unwrap_or_else(|| identity(m)),
        };
        let defect = to_f64((full - identity::<T>(m)).norm());
        if self.order > 1 && defect > 1e-9 {
            return Err(Error::Precondition(format!(
                "bimodule flow is not periodic with the action (defect {defect:e})"
            )));
        }
        Ok(lifts)
    }
}

/// `C(Z_N; H)` with `(aξ)(g) = Σ_h U_{-h}a(g−h)ξ(h)`,
/// `(ξb)(g) = Σ_h 𝒰_{-h}ξ(g−h)b(h)`, `(𝒥̃ξ)(g) = 𝒰_{-g}𝒥ξ(−g)` and
/// `𝒰̃_z = 1 ⊗ 𝒰_z`.
pub fn extended_bimodule<T: Real>(cp: &CrossedProduct<T>, h: &TomitaBimodule<T>) -> Result<TomitaBimodule<T>> {
    if h.algebra() != cp.base.algebra() {
        return Err(Error::Dimension("bimodule lives over a different algebra".into()));
    }
    let lifts = cp.carrier_lift(h)?;
    let n = cp.order;
    let m = h.dim();
    let inv = |g: usize| (n - g) % n;
    let place = |out: &mut CMat<T>, r: usize, c: usize, x: &CMat<T>| {
        let mut v = out.view_mut((r * m, c * m), (m, m));
        v += x;
    };
    let blocks = cp.algebra().dim();
    let mut left = Vec::with_capacity(blocks);
    let mut right = Vec::with_capacity(blocks);
    for k in 0..blocks {
        let fibers = cp.element_fibers(&cp.algebra().basis(k));
        let mut l = CMat::zeros(n * m, n * m);
        let mut r = CMat::zeros(n * m, n * m);
        for g in 0..n {
            for hh in 0..n {
                let x = &fibers[(g + n - hh) % n];
                if x.iter().any(|z| *z != Complex::new(T::zero(), T::zero())) {
                    place(&mut l, g, hh, &h.left_of(&cp.alpha(-(hh as isize), x)));
                }
                let y = &fibers[hh];
                if y.iter().any(|z| *z != Complex::new(T::zero(), T::zero())) {
                    let ry = h.right_of(y);
                    let op = if hh == 0 { ry } else { ry * &lifts[inv(hh)] };
                    place(&mut r, g, (g + n - hh) % n, &op);
                }
            }
        }
        left.push(l);
        right.push(r);
    }
    let mut jmap = CMat::zeros(n * m, n * m);
    for g in 0..n {
        let block = if g == 0 {
            h.jmap().clone()
        } else {
            &lifts[inv(g)] * h.jmap()
        };
        place(&mut jmap, g, inv(g), &block);
    }
    let generator = kron(&identity::<T>(n), h.generator());
    TomitaBimodule::new(
        cp.modular.clone(),
        left,
        right,
        jmap,
        generator,
        format!("C(Z{n};{})", h.label()),
    )
}

/// `(1 ⊗ δ)(a)(g) = δ(a(g))` as a derivation into the extended bimodule.
pub fn extend_derivation<T: Real>(delta: &Derivation<T>, cp: &CrossedProduct<T>) -> Result<Derivation<T>> {
    twisted_extension(delta, cp, &vec![0.0; cp.order])
}

/// Extension with fiber `g` multiplied by `e^{iθ_g}`. Only the zero phases
/// give a derivation; other choices serve as negative controls.
pub fn twisted_extension<T: Real>(
    delta: &Derivation<T>,
    cp: &CrossedProduct<T>,
    phases: &[f64],
) -> Result<Derivation<T>> {
    if phases.len() != cp.order {
        return Err(Error::Dimension(format!("expected {} phases", cp.order)));
    }
    let h = delta.target();
    if cp.lift == Lift::Explicit && cp.order > 1 {
        equivariance_precondition(delta, cp)?;
    }
    let target = extended_bimodule(cp, h)?;
    let (m, d) = (h.dim(), cp.fiber_dim());
    let mut fiberwise = CMat::zeros(cp.order * m, cp.order * d);
    for (g, &theta) in phases.iter().enumerate() {
        let block = if theta == 0.0 {
            delta.matrix().clone()
        } else {
            delta.matrix() * Complex::new(lit::<T>(theta.cos()), lit(theta.sin()))
        };
        fiberwise.view_mut((g * m, g * d), (m, d)).copy_from(&block);
    }
    let matrix = if cp.order == 1 {
        fiberwise
    } else {
        fiberwise * cp.fmap.adjoint()
    };
    let twisted = phases.iter().any(|&p| p != 0.0);
    let label = if twisted {
        format!("twisted(1⊗{})", delta.label())
    } else {
        format!("1⊗{}", delta.label())
    };
    Derivation::new(target, matrix, label)
}

/// For explicit inner actions the derivation must intertwine `α` with its lift.
fn equivariance_precondition<T: Real>(delta: &Derivation<T>, cp: &CrossedProduct<T>) -> Result<()> {
    let h = delta.target();
    let lifts = cp.carrier_lift(h)?;
    let a = cp.base.algebra();
    let scale = to_f64(delta.matrix().norm()).max(1.0);
    for (g, lift) in lifts.iter().enumerate().skip(1) {
        let alpha = a.superoperator(|x: &CMat<T>| cp.alpha(g as isize, x));
        let res = to_f64((delta.matrix() * alpha - lift * delta.matrix()).norm()) / scale;
        if res > 1e-9 {
            return Err(Error::Precondition(format!(
                "derivation is not equivariant under the action (residual {res:e})"
            )));
        }
    }
    Ok(())
}

/// Agreement of the function picture with the block picture: associativity
/// and involution of `∗`, and transport of products, `♯` and the flow.
pub fn check_crossed_structure<T: Real>(
    cp: &CrossedProduct<T>,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let f = |x: T| to_f64(x);
    let md = &cp.modular;
    let alg = cp.algebra();
    let dim = cp.order * cp.fiber_dim();
    let mut rep = CertificationReport::new(format!("crossed(Z{})", cp.order), seed, tol);
    let mut rng = seeded(derive_seed(seed, 0xC7));
    let (mut assoc, mut invol, mut anti, mut prod, mut sharp, mut flow) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let block = |v: &CVec<T>| alg.from_coords(&cp.to_block(v));
    for _ in 0..samples {
        let a = random_unit::<T>(&mut rng, dim);
        let b = random_unit::<T>(&mut rng, dim);
        let c = random_unit::<T>(&mut rng, dim);
        let ab = cp.convolve(&a, &b);
        let lhs = cp.convolve(&ab, &c);
        let rhs = cp.convolve(&a, &cp.convolve(&b, &c));
        assoc = assoc.max(f((&lhs - &rhs).norm()) / f(lhs.norm()).max(1.0));
        let aa = cp.sharp(&cp.sharp(&a));
        invol = invol.max(f((&aa - &a).norm()));
        let lhs = cp.sharp(&ab);
        let rhs = cp.convolve(&cp.sharp(&b), &cp.sharp(&a));
        anti = anti.max(f((&lhs - &rhs).norm()) / f(lhs.norm()).max(1.0));
        let want = md.product(&block(&a), &block(&b));
        prod = prod.max(f(rel_diff(&block(&ab), &want)));
        sharp = sharp.max(f(rel_diff(&block(&cp.sharp(&a)), &md.sharp(&block(&a)))));
        let t: T = crate::rng::uniform(&mut rng, -std::f64::consts::PI, std::f64::consts::PI);
        let moved = block(&cp.flow(real(t), &a)?);
        flow = flow.max(f(rel_diff(&moved, &md.flow(real(t), &block(&a))?)));
    }
    rep.bound("convolution_associative", assoc, tol.check);
    rep.bound("sharp_involutive", invol, tol.check);
    rep.bound("sharp_antimultiplicative", anti, tol.check);
    rep.bound("product_transport", prod, tol.check);
    rep.bound("sharp_transport", sharp, tol.check);
    rep.bound("flow_transport", flow, tol.check);

    let cyclic = alg.coords(&md.state().cyclic_vector());
    rep.bound("dual_state_vector", f((cp.group_vector(0) - cyclic).norm()), tol.check);
    let mut central = 0.0f64;
    for h in 0..cp.order {
        let v = cp.group_vector(h);
        let x = alg.from_coords(&v);
        let moved = md.flow(real(lit(1.0)), &x)?;
        central = central.max(f((moved - &x).norm()));
        let elem = md.state().gns_element(&x);
        central = central.max(f((&elem * md.state().density() - md.state().density() * &elem).norm()));
    }
    rep.bound("group_in_centralizer", central, tol.check);
    Ok(rep)
}

/// `δ̃(xa) = xδ̃(a)` and `δ̃(ax) = δ̃(a)x` for `x` over the group basis
/// `λ_h ⊗ 1` and random `a`.
pub fn check_group_commutation<T: Real>(
    extended: &Derivation<T>,
    cp: &CrossedProduct<T>,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let f = |x: T| to_f64(x);
    let md = extended.modular();
    let h = extended.target();
    let alg = md.algebra();
    let mut rep = CertificationReport::new(extended.label().to_string(), seed, tol);
    let scale = f(crate::linalg::op_norm(extended.matrix())).max(1.0);
    let mut rng = seeded(derive_seed(seed, 0x41));
    let (mut left, mut right) = (0.0f64, 0.0f64);
    let xs: Vec<CVec<T>> = (0..cp.order).map(|g| cp.group_vector(g)).collect();
    for _ in 0..samples {
        let a = random_unit::<T>(&mut rng, alg.dim());
        let da = extended.apply(&a);
        let am = alg.from_coords(&a);
        for x in &xs {
            let xm = alg.from_coords(x);
            let xa = alg.coords(&md.product(&xm, &am));
            let lhs = extended.apply(&xa);
            left = left.max(f((lhs - h.tomita_left(x) * &da).norm()) / scale);
            let ax = alg.coords(&md.product(&am, &xm));
            let lhs = extended.apply(&ax);
            right = right.max(f((lhs - h.tomita_right(x) * &da).norm()) / scale);
        }
    }
    rep.bound("left_group_commutation", left, tol.check);
    rep.bound("right_group_commutation", right, tol.check);
    Ok(rep)
}
