//! Quadratic forms `E[ξ] = ‖δ(ξ)‖²`, their semigroups, and numerical tests of
//! the Dirichlet and complete Dirichlet properties against the symmetric cone.

use crate::algebra::{FaithfulState, GnsVector, MatrixAlgebra};
use crate::checkers::{self, SemigroupSnapshot};
use crate::derivation::Derivation;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_part, hs_inner, identity, kron, lit, real, rel_diff, to_f64, CMat, CVec, HermitianEigen,
};
use crate::modular::ModularData;
use crate::report::{CertificationReport, Tolerances};
use crate::rng::{derive_seed, seeded, uniform, Rng};
use crate::Real;

/// Default grid of times at which semigroups are inspected.
pub const T_GRID: [f64; 5] = [0.01, 0.1, 0.5, 1.0, 5.0];

/// Generator `A` of a closed form on the GNS space, as a `D×D` Hermitian matrix.
#[derive(Clone, Debug)]
pub struct FormGenerator<T: Real> {
    modular: ModularData<T>,
    matrix: CMat<T>,
    eigen: HermitianEigen<T>,
    label: String,
}

/// `E = δ*δ`.
pub fn build_form<T: Real>(delta: &Derivation<T>) -> FormGenerator<T> {
    let a = delta.adjoint_matrix() * delta.matrix();
    FormGenerator::from_matrix(delta.modular().clone(), a, format!("form({})", delta.label())).expect("δ*δ is positive")
}

impl<T: Real> FormGenerator<T> {
    pub fn from_matrix(modular: ModularData<T>, matrix: CMat<T>, label: impl Into<String>) -> Result<Self> {
        let d = modular.algebra().dim();
        if matrix.shape() != (d, d) {
            return Err(Error::Dimension(format!("generator must be {d}x{d}")));
        }
        let herm = to_f64(rel_diff(&matrix, &matrix.adjoint()));
        if herm > 1e-10 {
            return Err(Error::Structure(format!(
                "generator is not self-adjoint (defect {herm:e})"
            )));
        }
        let matrix = hermitian_part(&matrix);
        let eigen = HermitianEigen::new(&matrix);
        let scale = to_f64(eigen.max().abs()).max(1.0);
        if to_f64(eigen.min()) < -1e-10 * scale {
            return Err(Error::Structure(format!(
                "generator has negative eigenvalue {:e}",
                to_f64(eigen.min())
            )));
        }
        Ok(Self {
            modular,
            matrix,
            eigen,
            label: label.into(),
        })
    }

    pub fn modular(&self) -> &ModularData<T> {
        &self.modular
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        self.modular.algebra()
    }

    pub fn state(&self) -> &FaithfulState<T> {
        self.modular.state()
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    pub fn eigen(&self) -> &HermitianEigen<T> {
        &self.eigen
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `max(1, ‖A‖)`, the scale against which energies are compared.
    pub fn scale(&self) -> T {
        self.eigen.max().abs().max(T::one())
    }

    pub fn energy(&self, xi: &CVec<T>) -> T {
        xi.dotc(&(&self.matrix * xi)).re
    }

    pub fn energy_gns(&self, xi: &GnsVector<T>) -> T {
        self.energy(&self.algebra().coords(xi))
    }

    /// `T_t = e^{-tA}` on the GNS space.
    pub fn semigroup(&self, t: T) -> Result<CMat<T>> {
        if t.partial_cmp(&T::zero()).is_none_or(|o| o.is_lt()) {
            return Err(Error::Range(format!(
                "semigroup time must be nonnegative, got {}",
                to_f64(t)
            )));
        }
        Ok(self.eigen.map(|v| real((-(t * v)).exp())))
    }

    /// Markov map on the algebra induced through `x ↦ ρ^{1/4} x ρ^{1/4}`.
    pub fn algebra_map(&self, gns_map: &CMat<T>) -> CMat<T> {
        let a = self.algebra();
        let s = self.state();
        let emb = a.superoperator(|x| s.quarter() * x * s.quarter());
        let inv = a.superoperator(|x| s.inv_quarter() * x * s.inv_quarter());
        inv * gns_map * emb
    }

    pub fn snapshot(&self, t: T) -> Result<SemigroupSnapshot<T>> {
        let gns = self.semigroup(t)?;
        let on_algebra = self.algebra_map(&gns);
        Ok(SemigroupSnapshot {
            t: to_f64(t),
            gns,
            on_algebra,
        })
    }

    pub fn snapshots(&self, grid: &[f64]) -> Result<Vec<SemigroupSnapshot<T>>> {
        grid.iter().map(|&t| self.snapshot(lit(t))).collect()
    }

    /// `A ⊗ id` on `M ⊗ M_n` with the state `ρ ⊗ I/n`.
    pub fn amplify(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("amplification degree must be positive".into()));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let base = self.algebra();
        let amp = base.amplify(n);
        let rho = kron(self.state().density(), &identity::<T>(n).scale(lit(1.0 / n as f64)));
        let state = FaithfulState::new(amp.clone(), rho)?;
        // Amplified unit (i·n+k, j·n+l) corresponds to base unit (i, j) and E_kl.
        let split: Vec<(usize, usize, usize)> = amp
            .units()
            .iter()
            .map(|u| {
                let bu = base.unit_index(u.row / n, u.col / n).expect("unit of base");
                (bu, u.row % n, u.col % n)
            })
            .collect();
        let dd = amp.dim();
        let mut matrix = CMat::zeros(dd, dd);
        for (p, &(bp, kp, lp)) in split.iter().enumerate() {
            for (q, &(bq, kq, lq)) in split.iter().enumerate() {
                if kp == kq && lp == lq {
                    matrix[(p, q)] = self.matrix[(bp, bq)];
                }
            }
        }
        Self::from_matrix(ModularData::new(state), matrix, format!("{}⊗M{n}", self.label))
    }
}

/// Settings of the cone projection solver.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionConfig {
    /// Target bound on the distance of the iterate to the minimizer.
    pub tol: f64,
    pub max_iterations: usize,
    /// Nesterov acceleration with function-value restarts.
    pub accelerated: bool,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iterations: 50_000,
            accelerated: false,
        }
    }
}

impl ProjectionConfig {
    pub fn from_tolerances(tol: &Tolerances) -> Self {
        Self {
            tol: tol.projection,
            max_iterations: tol.max_iterations,
            accelerated: false,
        }
    }
}

/// Result of projecting onto the cone.
#[derive(Clone, Debug)]
pub struct Projection<T: Real> {
    pub point: GnsVector<T>,
    /// `x` with `point = ρ^{1/4} x ρ^{1/4}` and `0 ⪯ x ⪯ 1`.
    pub element: CMat<T>,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub monotone: bool,
    pub objective: f64,
}

/// `C = ρ^{1/4}{0 ⪯ x ⪯ 1}ρ^{1/4}`, the closed convex set whose projection
/// tests the Dirichlet property.
#[derive(Clone, Debug)]
pub struct DirichletCone<T: Real> {
    state: FaithfulState<T>,
    config: ProjectionConfig,
    lipschitz: T,
    condition: T,
}

impl<T: Real> DirichletCone<T> {
    pub fn new(state: FaithfulState<T>, config: ProjectionConfig) -> Self {
        let lipschitz = state.eigen().max() * lit(2.0);
        let condition = state.eigen().max() / state.eigen().min();
        Self {
            state,
            config,
            lipschitz,
            condition,
        }
    }

    pub fn state(&self) -> &FaithfulState<T> {
        &self.state
    }

    pub fn config(&self) -> &ProjectionConfig {
        &self.config
    }

    fn clip(&self, y: &CMat<T>) -> CMat<T> {
        let a = self.state.algebra();
        a.spectral_map(&hermitian_part(y), |v| v.max(T::zero()).min(T::one()))
    }

    fn objective(&self, xi: &CMat<T>, x: &CMat<T>) -> T {
        let q = self.state.quarter();
        let r = xi - q * x * q;
        r.norm_squared()
    }

    fn gradient(&self, xi: &CMat<T>, x: &CMat<T>) -> CMat<T> {
        let q = self.state.quarter();
        (q * (q * x * q - xi) * q).scale(lit(2.0))
    }

    /// Nearest point of the cone to a `J`-real GNS vector.
    pub fn project(&self, xi: &GnsVector<T>) -> Result<Projection<T>> {
        self.state.algebra().check_shape(xi)?;
        let skew = to_f64((xi - xi.adjoint()).norm());
        if skew > 1e-10 * to_f64(xi.norm()).max(1.0) {
            return Err(Error::Precondition(format!(
                "vector is not J-invariant (defect {skew:e})"
            )));
        }
        let xi = hermitian_part(xi);
        let qi = self.state.inv_quarter();
        let l = self.lipschitz;
        let step = T::one() / l;
        // Distance to the minimizer is at most 2κ times the last step.
        let stop = lit::<T>(self.config.tol) / (self.condition * lit(2.0));

        let mut x = self.clip(&(qi * &xi * qi));
        let mut y = x.clone();
        let mut t_k = T::one();
        let mut f_prev = self.objective(&xi, &x);
        let mut monotone = true;
        let mut last_change = f64::INFINITY;
        // Objective increases below this are rounding noise.
        let slack = lit::<T>(1e-12) * self.objective(&xi, &x).max(T::one());
        for it in 1..=self.config.max_iterations {
            let base = if self.config.accelerated { &y } else { &x };
            let next = self.clip(&(base - self.gradient(&xi, base).scale(step)));
            let f_next = self.objective(&xi, &next);
            let change = (&next - &x).norm();
            last_change = to_f64(change);
            if self.config.accelerated {
                if f_next > f_prev {
                    // Restart momentum and take a plain projected-gradient step.
                    t_k = T::one();
                    let plain = self.clip(&(&x - self.gradient(&xi, &x).scale(step)));
                    let f_plain = self.objective(&xi, &plain);
                    let change = (&plain - &x).norm();
                    last_change = to_f64(change);
                    if f_plain > f_prev + slack {
                        monotone = false;
                    }
                    x = plain;
                    y = x.clone();
                    f_prev = f_plain;
                    if change <= stop {
                        return Ok(self.finish(&xi, x, it, monotone));
                    }
                    continue;
                }
                let t_next = (T::one() + (T::one() + t_k * t_k * lit(4.0)).sqrt()) / lit(2.0);
                y = &next + (&next - &x).scale((t_k - T::one()) / t_next);
                t_k = t_next;
            } else if f_next > f_prev + slack {
                monotone = false;
            }
            x = next;
            f_prev = f_next;
            if change <= stop {
                return Ok(self.finish(&xi, x, it, monotone));
            }
        }
        Err(Error::Convergence {
            iterations: self.config.max_iterations,
            last_change,
        })
    }

    fn finish(&self, xi: &CMat<T>, x: CMat<T>, iterations: usize, monotone: bool) -> Projection<T> {
        let q = self.state.quarter();
        let l = self.lipschitz;
        let g = self.gradient(xi, &x);
        let mapped = self.clip(&(&x - g.unscale(l)));
        let kkt = to_f64((&x - mapped).norm() * l);
        let objective = to_f64(self.objective(xi, &x));
        Projection {
            point: q * &x * q,
            element: x,
            iterations,
            kkt_residual: kkt,
            monotone,
            objective,
        }
    }
}

/// Kinds of probe vectors used by the sampled Dirichlet test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Probe {
    Gaussian,
    Boundary,
    Flow,
}

fn probe_kind(s: usize) -> Probe {
    match s % 3 {
        0 => Probe::Gaussian,
        1 => Probe::Boundary,
        _ => Probe::Flow,
    }
}

/// Moves from a boundary point `p` along its outward normal `n` by the step
/// that minimizes `E[p + εn]`, which exposes any negative `Re E(p, n)`.
fn normal_probe<T: Real>(form: &FormGenerator<T>, p: &CMat<T>, n: &CMat<T>) -> CMat<T> {
    let a = form.algebra();
    let (pv, nv) = (a.coords(p), a.coords(n));
    let e_nn = form.energy(&nv);
    let e_pn = pv.dotc(&(form.matrix() * &nv)).re;
    let eps = if to_f64(e_nn) > 1e-14 && e_pn < T::zero() {
        -e_pn / e_nn
    } else {
        T::one()
    };
    p + n.scale(eps)
}

fn draw_probe<T: Real>(
    form: &FormGenerator<T>,
    cone: &DirichletCone<T>,
    kind: Probe,
    rng: &mut Rng,
) -> Result<CMat<T>> {
    let a = form.algebra();
    let s = form.state();
    Ok(match kind {
        Probe::Gaussian => a.random_hermitian(rng),
        Probe::Boundary => {
            let scale: T = uniform(rng, 0.5, 4.0);
            let g = a.random_hermitian::<T>(rng).scale(scale);
            let p = cone.project(&g)?.point;
            normal_probe(form, &p, &(g - &p))
        }
        Probe::Flow => {
            let proj = a.random_projection::<T>(rng);
            let eta = s.quarter() * proj * s.quarter();
            let sv: T = uniform(rng, 0.05, 1.0);
            let step = sv / form.scale();
            let u = hermitian_part(&(&eta - a.apply(form.matrix(), &eta).scale(step)));
            let p = cone.project(&u)?.point;
            normal_probe(form, &p, &(u - &p))
        }
    })
}

/// Sampled Dirichlet test: `E∘J = E` and `E[P_C ξ] ≤ E[ξ]`.
///
/// The margin of one sample is `(E[ξ] − E[P_C ξ]) / max(1, ‖A‖)`; the check
/// fails when some margin falls below `−tol.margin`.
pub fn check_dirichlet<T: Real>(
    form: &FormGenerator<T>,
    cone: &DirichletCone<T>,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let md = form.modular();
    let f = |x: T| to_f64(x);
    let mut rep = CertificationReport::new(form.label().to_string(), seed, tol);
    let p = md.j_matrix();
    let swapped = p * form.matrix() * p;
    let conj = crate::linalg::conj_mat(form.matrix());
    rep.bound("conjugation_invariance", f(rel_diff(&conj, &swapped)), tol.check);

    let mut rng = seeded(derive_seed(seed, 0xC0));
    let scale = f(form.scale());
    let mut worst = f64::INFINITY;
    let mut failures = 0usize;
    for s in 0..samples {
        let xi = match draw_probe(form, cone, probe_kind(s), &mut rng) {
            Ok(x) => x,
            Err(Error::Convergence { .. }) => {
                failures += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        match cone.project(&xi) {
            Ok(proj) => {
                let margin = (f(form.energy_gns(&xi)) - f(form.energy_gns(&proj.point))) / scale;
                worst = worst.min(margin);
            }
            Err(Error::Convergence { .. }) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    if !worst.is_finite() {
        worst = 0.0;
    }
    let violation = (-worst).max(0.0);
    rep.record("dirichlet_margin", violation, worst, violation <= tol.margin);
    rep.record(
        "projection_convergence",
        failures as f64,
        -(failures as f64),
        failures == 0,
    );
    Ok(rep)
}

/// Runs the sampled Dirichlet test on every amplification `M ⊗ M_n`,
/// `n = 1..=n_max`, and cross-checks the verdict against complete positivity
/// and sub-unitality of the semigroup on the time grid.
pub fn check_completely_dirichlet<T: Real>(
    form: &FormGenerator<T>,
    config: &ProjectionConfig,
    n_max: usize,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let mut rep = CertificationReport::new(form.label().to_string(), seed, tol);
    let mut cd = true;
    for n in 1..=n_max {
        let amp = form.amplify(n)?;
        let cone = DirichletCone::new(amp.state().clone(), config.clone());
        let level = check_dirichlet(&amp, &cone, samples, derive_seed(seed, n as u64), tol)?;
        cd &= level.passed();
        rep.absorb(&format!("level{n}"), level);
    }
    let snaps = form.snapshots(&T_GRID)?;
    let mut min_choi = f64::INFINITY;
    let mut excess = 0.0f64;
    for snap in &snaps {
        min_choi = min_choi.min(checkers::choi(form.algebra(), &snap.on_algebra).min_eigenvalue);
        excess = excess.max(checkers::unit_excess(form.algebra(), &snap.on_algebra));
    }
    let cp = min_choi >= -tol.choi && excess <= tol.semigroup;
    rep.record("choi_route", (-min_choi).max(0.0).max(excess), min_choi, cp);
    rep.record("pipeline_agreement", if cd == cp { 0.0 } else { 1.0 }, 0.0, cd == cp);
    rep.label("complete_dirichlet_verdict", if cd { "pass" } else { "fail" });
    rep.label("choi_verdict", if cp { "pass" } else { "fail" });
    Ok(rep)
}

/// Commutation of the generator with `log Δ` and invariance of the energy
/// under the modular group.
pub fn check_modular<T: Real>(
    form: &FormGenerator<T>,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let md = form.modular();
    let f = |x: T| to_f64(x);
    let mut rep = CertificationReport::new(form.label().to_string(), seed, tol);
    let comm = crate::linalg::commutator(form.matrix(), md.log_delta());
    rep.bound("modular_commutation", f(comm.norm() / form.scale()), tol.modular);
    let mut rng = seeded(derive_seed(seed, 0x40));
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let xi = md.algebra().random_element::<T>(&mut rng);
        let xi = xi.unscale(xi.norm());
        let t: T = uniform(&mut rng, -std::f64::consts::PI, std::f64::consts::PI);
        let moved = md.flow(real(t), &xi)?;
        let diff = f(form.energy_gns(&moved) - form.energy_gns(&xi)).abs() / f(form.scale());
        worst = worst.max(diff);
    }
    rep.bound("flow_invariance", worst, tol.modular);
    Ok(rep)
}

/// Energy `E[T_t ξ]` along a semigroup orbit.
pub fn energy_along<T: Real>(form: &FormGenerator<T>, xi: &CVec<T>, t: T) -> Result<T> {
    Ok(form.energy(&(form.semigroup(t)? * xi)))
}

/// Inner product of two GNS vectors, for convenience in harnesses.
pub fn gns_inner<T: Real>(x: &GnsVector<T>, y: &GnsVector<T>) -> T {
    hs_inner(x, y).re
}
