//! Harnesses for the two working parts of the reduction to the tracial case:
//! changing the reference weight by a centralizer density, and approximating
//! a form through an increasing tower of expected subalgebras.

use crate::algebra::{FaithfulState, MatrixAlgebra};
use crate::dirichlet::{
    check_completely_dirichlet, check_dirichlet, check_modular, DirichletCone, FormGenerator, ProjectionConfig, T_GRID,
};
use crate::error::{Error, Result};
use crate::linalg::{commutator, lit, op_norm, real, to_f64, CMat};
use crate::modular::ModularData;
use crate::report::{CertificationReport, Tolerances};
use crate::rng::derive_seed;
use crate::Real;

/// Centralizer residual accepted for a change-of-weight density.
pub const CENTRALIZER_TOLERANCE: f64 = 1e-10;
/// Relative residual accepted for `[A, L_x] = 0`.
pub const FORM_COMMUTATION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct HarnessOptions {
    pub samples: usize,
    /// Highest amplification checked; `1` runs the plain Dirichlet test.
    pub levels: usize,
    pub projection: ProjectionConfig,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            samples: 100,
            levels: 1,
            projection: ProjectionConfig::default(),
        }
    }
}

fn dirichlet_rows<T: Real>(
    rep: &mut CertificationReport,
    prefix: &str,
    form: &FormGenerator<T>,
    opts: &HarnessOptions,
    seed: u64,
    tol: &Tolerances,
) -> Result<bool> {
    let d = if opts.levels > 1 {
        check_completely_dirichlet(form, &opts.projection, opts.levels, opts.samples, seed, tol)?
    } else {
        let cone = DirichletCone::new(form.state().clone(), opts.projection.clone());
        check_dirichlet(form, &cone, opts.samples, seed, tol)?
    };
    let m = check_modular(form, opts.samples.min(50), derive_seed(seed, 1), tol)?;
    let ok = d.passed() && m.passed();
    rep.absorb(prefix, d);
    rep.absorb(prefix, m);
    Ok(ok)
}

/// Re-certifies `form` against `ψ = φ(x^{1/2}·x^{1/2})`, normalized to a state.
///
/// Requires `x` positive invertible in the centralizer of `φ` and commuting
/// with the form generator; otherwise returns [`Error::Precondition`].
pub fn change_weight_harness<T: Real>(
    form: &FormGenerator<T>,
    x: &CMat<T>,
    opts: &HarnessOptions,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let alg = form.algebra();
    let state = form.state();
    alg.check_shape(x)?;
    if to_f64(alg.off_block_norm(x)) > CENTRALIZER_TOLERANCE {
        return Err(Error::Precondition("weight density is not in the algebra".into()));
    }
    let herm = to_f64((x - x.adjoint()).norm());
    if herm > CENTRALIZER_TOLERANCE * to_f64(x.norm()).max(1.0) {
        return Err(Error::Precondition(format!(
            "weight density is not self-adjoint ({herm:e})"
        )));
    }
    let eig = alg.eigh(&crate::linalg::hermitian_part(x));
    if to_f64(eig.min()) <= 1e-12 {
        return Err(Error::Precondition(format!(
            "weight density is not positive invertible (min eigenvalue {:e})",
            to_f64(eig.min())
        )));
    }
    let xnorm = to_f64(eig.max());
    let central = to_f64(commutator(x, state.density()).norm()) / xnorm;
    if central > CENTRALIZER_TOLERANCE {
        return Err(Error::Precondition(format!(
            "weight density is not in the centralizer ({central:e})"
        )));
    }
    let lx = alg.superoperator(|xi: &CMat<T>| x * xi);
    let comm = to_f64(commutator(form.matrix(), &lx).norm() / form.scale()) / xnorm;
    if comm > FORM_COMMUTATION_TOLERANCE {
        return Err(Error::Precondition(format!(
            "weight density does not commute with the form ({comm:e})"
        )));
    }

    let mut rep = CertificationReport::new(format!("change-weight({})", form.label()), seed, tol);
    rep.bound("centralizer", central, CENTRALIZER_TOLERANCE);
    rep.bound("form_commutation", comm, FORM_COMMUTATION_TOLERANCE);
    let hyp = dirichlet_rows(&mut rep, "phi", form, opts, derive_seed(seed, 1), tol)?;

    let half = alg.spectral_map(x, |v| v.sqrt());
    let rho = &half * state.density() * &half;
    let tr = rho.trace().re;
    let psi = FaithfulState::new(alg.clone(), rho.unscale(tr))?;
    let moved = FormGenerator::from_matrix(
        ModularData::new(psi),
        form.matrix().clone(),
        format!("{}@psi", form.label()),
    )?;
    let concl = dirichlet_rows(&mut rep, "psi", &moved, opts, derive_seed(seed, 2), tol)?;
    rep.label("hypotheses", if hyp { "pass" } else { "fail" });
    rep.label("conclusion", if concl { "pass" } else { "fail" });
    Ok(rep)
}

/// A level of a tower: a partition of the ambient indices. The level is the
/// block-diagonal subalgebra with one full matrix block per part.
pub type Partition = Vec<Vec<usize>>;

struct Level<T: Real> {
    parts: Partition,
    /// `P_n` on GNS coordinates.
    projection: CMat<T>,
    /// Isometry from the GNS coordinates of the level into the full space.
    embedding: CMat<T>,
    algebra: MatrixAlgebra,
    density: CMat<T>,
}

fn block_partition(alg: &MatrixAlgebra) -> Partition {
    (0..alg.blocks().len()).map(|b| alg.block_range(b).collect()).collect()
}

fn normalize(p: &Partition) -> Partition {
    let mut q: Partition = p
        .iter()
        .map(|part| {
            let mut s = part.clone();
            s.sort_unstable();
            s
        })
        .collect();
    q.sort();
    q
}

fn validate_partition(alg: &MatrixAlgebra, parts: &Partition) -> Result<()> {
    let n = alg.size();
    let mut seen = vec![false; n];
    for part in parts {
        if part.is_empty() {
            return Err(Error::Config("tower level has an empty part".into()));
        }
        let block = alg.units()[alg
            .unit_index(part[0], part[0])
            .ok_or_else(|| Error::Config(format!("index {} outside the algebra", part[0])))?]
        .block;
        for &i in part {
            if i >= n || seen[i] {
                return Err(Error::Config(format!("index {i} repeated or outside 0..{n}")));
            }
            seen[i] = true;
            if alg.unit_index(part[0], i).map(|k| alg.units()[k].block) != Some(block) {
                return Err(Error::Config("tower level does not refine the algebra's blocks".into()));
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Config("tower level does not cover every index".into()));
    }
    Ok(())
}

fn refines(fine: &Partition, coarse: &Partition) -> bool {
    fine.iter()
        .all(|p| coarse.iter().any(|q| p.iter().all(|i| q.contains(i))))
}

fn build_level<T: Real>(state: &FaithfulState<T>, parts: Partition) -> Result<Level<T>> {
    let alg = state.algebra();
    let rho = state.density();
    let mut pinched = alg.zero::<T>();
    for part in &parts {
        for &i in part {
            for &j in part {
                pinched[(i, j)] = rho[(i, j)];
            }
        }
    }
    let off = to_f64((&pinched - rho).norm());
    if off > CENTRALIZER_TOLERANCE {
        return Err(Error::Config(format!(
            "conditional expectation does not preserve the state ({off:e})"
        )));
    }
    let sizes: Vec<usize> = parts.iter().map(|p| p.len()).collect();
    let sub = MatrixAlgebra::new(&sizes)?;
    let mut embedding = CMat::zeros(alg.dim(), sub.dim());
    let mut density = sub.zero::<T>();
    for (k, u) in sub.units().iter().enumerate() {
        let offset = sub.block_range(u.block).start;
        let part = &parts[u.block];
        let (i, j) = (part[u.row - offset], part[u.col - offset]);
        let full = alg.unit_index(i, j).expect("part lies in one block");
        embedding[(full, k)] = real(T::one());
        density[(u.row, u.col)] = rho[(i, j)];
    }
    let projection = &embedding * embedding.adjoint();
    Ok(Level {
        parts,
        projection,
        embedding,
        algebra: sub,
        density,
    })
}

/// Certifies the approximation argument on a tower of block subalgebras.
///
/// Levels must increase (each partition refines the next). The algebra itself
/// is appended as the final level when missing. Hypotheses: the restricted
/// forms are Dirichlet on each level and `E∘P_n ≤ E`. Conclusion: `E` is
/// Dirichlet. Also reports `‖[T_t, P_n]‖` on the time grid.
pub fn approximation_harness<T: Real>(
    form: &FormGenerator<T>,
    tower: &[Partition],
    opts: &HarnessOptions,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let alg = form.algebra();
    let state = form.state();
    let mut levels: Vec<Partition> = tower.iter().map(normalize).collect();
    let top = normalize(&block_partition(alg));
    if levels.last() != Some(&top) {
        levels.push(top);
    }
    for p in &levels {
        validate_partition(alg, p)?;
    }
    for w in levels.windows(2) {
        if !refines(&w[0], &w[1]) {
            return Err(Error::Config("tower levels are not increasing".into()));
        }
    }
    let built = levels
        .into_iter()
        .map(|p| build_level(state, p))
        .collect::<Result<Vec<Level<T>>>>()?;

    let mut rep = CertificationReport::new(format!("approximation({})", form.label()), seed, tol);
    let scale = to_f64(form.scale());
    let a = form.matrix();
    let semigroups = T_GRID
        .iter()
        .map(|&t| form.semigroup(lit(t)))
        .collect::<Result<Vec<_>>>()?;
    let mut hyp = true;
    for (i, level) in built.iter().enumerate() {
        let prefix = format!("level{i}");
        let p = &level.projection;
        let modular = to_f64(commutator(p, form.modular().log_delta()).norm());
        rep.bound(format!("{prefix}.expectation_modular"), modular, tol.modular);

        let restricted = level.embedding.adjoint() * a * &level.embedding;
        let sub_state = FaithfulState::new(level.algebra.clone(), level.density.clone())?;
        let sub_form = FormGenerator::from_matrix(
            ModularData::new(sub_state),
            crate::linalg::hermitian_part(&restricted),
            format!("{}|{:?}", form.label(), level.parts),
        )?;
        let cone = DirichletCone::new(sub_form.state().clone(), opts.projection.clone());
        let d = check_dirichlet(&sub_form, &cone, opts.samples, derive_seed(seed, i as u64), tol)?;
        hyp &= d.passed();
        rep.absorb(&format!("{prefix}.restricted"), d);

        let gap = a - p * a * p;
        let min = to_f64(crate::linalg::HermitianEigen::new(&crate::linalg::hermitian_part(&gap)).min()) / scale;
        let dominated = min >= -tol.margin;
        hyp &= dominated;
        rep.record(format!("{prefix}.form_domination"), (-min).max(0.0), min, dominated);

        let comm = semigroups
            .iter()
            .map(|tt| to_f64(op_norm(&commutator(tt, p))))
            .fold(0.0f64, f64::max);
        rep.bound(format!("{prefix}.semigroup_commutation"), comm, tol.check);
    }
    let cone = DirichletCone::new(state.clone(), opts.projection.clone());
    let conclusion = check_dirichlet(form, &cone, opts.samples, derive_seed(seed, 0xFF), tol)?;
    let concl = conclusion.passed();
    rep.absorb("conclusion", conclusion);
    rep.label("hypotheses", if hyp { "pass" } else { "fail" });
    rep.label("conclusion", if concl { "pass" } else { "fail" });
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::gns_inner_derivation;
    use crate::dirichlet::build_form;

    fn diag_form(rho: &[f64], xi: &[f64]) -> FormGenerator<f64> {
        let a = MatrixAlgebra::full(rho.len()).unwrap();
        let md = ModularData::new(FaithfulState::diagonal(a.clone(), rho).unwrap());
        let mut v = a.zero::<f64>();
        for (i, &x) in xi.iter().enumerate() {
            v[(i, i)] = real(x);
        }
        build_form(&gns_inner_derivation(&md, &v).unwrap())
    }

    #[test]
    fn unit_weight_reproduces_verdicts() {
        let form = diag_form(&[0.8, 0.2], &[1.0, -0.5]);
        let opts = HarnessOptions {
            samples: 20,
            ..Default::default()
        };
        let x = CMat::identity(2, 2);
        let r = change_weight_harness(&form, &x, &opts, 1, &Tolerances::default()).unwrap();
        assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
        let phi = r.get("phi.dirichlet_margin").unwrap();
        let psi = r.get("psi.dirichlet_margin").unwrap();
        assert!((phi.margin - psi.margin).abs() < 1e-12);
    }

    #[test]
    fn non_commuting_weight_rejected() {
        let form = diag_form(&[0.5, 0.5], &[1.0, -1.0]);
        let mut x = CMat::<f64>::identity(2, 2);
        x[(0, 1)] = real(0.5);
        x[(1, 0)] = real(0.5);
        let err = change_weight_harness(&form, &x, &HarnessOptions::default(), 1, &Tolerances::default());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn diagonal_tower_passes() {
        let form = diag_form(&[0.8, 0.2], &[1.0, -0.5]);
        let opts = HarnessOptions {
            samples: 20,
            ..Default::default()
        };
        let tower = vec![vec![vec![0], vec![1]]];
        let r = approximation_harness(&form, &tower, &opts, 2, &Tolerances::default()).unwrap();
        assert!(r.passed(), "{:#?}", r.failures().collect::<Vec<_>>());
        assert!(r.get("level0.semigroup_commutation").unwrap().residual <= 1e-9);
    }

    #[test]
    fn non_preserving_expectation_is_config_error() {
        let a = MatrixAlgebra::full(2).unwrap();
        let mut rho = CMat::<f64>::identity(2, 2).scale(0.5);
        rho[(0, 1)] = real(0.1);
        rho[(1, 0)] = real(0.1);
        let md = ModularData::new(FaithfulState::new(a, rho).unwrap());
        let form = FormGenerator::from_matrix(md, CMat::identity(4, 4), "id").unwrap();
        let tower = vec![vec![vec![0], vec![1]]];
        let err = approximation_harness(&form, &tower, &HarnessOptions::default(), 1, &Tolerances::default());
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
