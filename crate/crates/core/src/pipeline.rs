//! End-to-end certification: a derivation is checked against the bimodule
//! and derivation axioms, then its form is run through every Dirichlet,
//! symmetry and Markov test.

use crate::bimodule::check_bimodule_axioms;
use crate::checkers::{check_gns_symmetric, check_markov, unitality_defect, MarkovClass};
use crate::derivation::{check_adjoint_identity, check_derivation, Derivation};
use crate::dirichlet::{
    build_form, check_completely_dirichlet, check_dirichlet, check_modular, DirichletCone, FormGenerator,
    ProjectionConfig, T_GRID,
};
use crate::error::Result;
use crate::report::{CertificationReport, Tolerances};
use crate::rng::derive_seed;
use crate::Real;

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    /// Probes of the plain Dirichlet test.
    pub samples: usize,
    /// Probes per amplification level.
    pub amplified_samples: usize,
    /// Largest amplification `n` of the complete Dirichlet test.
    pub levels: usize,
    pub t_grid: Vec<f64>,
    pub projection: ProjectionConfig,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            samples: 200,
            amplified_samples: 40,
            levels: 3,
            t_grid: T_GRID.to_vec(),
            projection: ProjectionConfig::default(),
        }
    }
}

/// Axioms of the target bimodule and of `δ`, the adjoint identity, then
/// [`certify_form`] on `δ*δ`.
pub fn certify_derivation<T: Real>(
    delta: &Derivation<T>,
    opts: &CertifyOptions,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let mut rep = CertificationReport::new(delta.label().to_string(), seed, tol);
    let probes = opts.samples.clamp(1, 50);
    rep.absorb(
        "bimodule",
        check_bimodule_axioms(delta.target(), probes, derive_seed(seed, 1), tol)?,
    );
    rep.absorb(
        "derivation",
        check_derivation(delta, probes, derive_seed(seed, 2), tol)?,
    );
    rep.absorb(
        "adjoint",
        check_adjoint_identity(delta, opts.samples.clamp(1, 100), derive_seed(seed, 3), tol)?,
    );
    let form = build_form(delta);
    let inner = certify_form(&form, opts, derive_seed(seed, 4), tol)?;
    rep.absorb("", inner);
    Ok(rep)
}

/// Modularity, the Dirichlet and complete Dirichlet tests, GNS symmetry and
/// the Markov property of the semigroup on `opts.t_grid`.
pub fn certify_form<T: Real>(
    form: &FormGenerator<T>,
    opts: &CertifyOptions,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let mut rep = CertificationReport::new(form.label().to_string(), seed, tol);
    rep.absorb(
        "modular",
        check_modular(form, opts.samples.clamp(1, 50), derive_seed(seed, 1), tol)?,
    );
    let cone = DirichletCone::new(form.state().clone(), opts.projection.clone());
    rep.absorb(
        "dirichlet",
        check_dirichlet(form, &cone, opts.samples, derive_seed(seed, 2), tol)?,
    );
    if opts.levels >= 2 {
        let cd = check_completely_dirichlet(
            form,
            &opts.projection,
            opts.levels,
            opts.amplified_samples,
            derive_seed(seed, 3),
            tol,
        )?;
        rep.absorb("complete", cd);
    }
    let snaps = form.snapshots(&opts.t_grid)?;
    let gns = check_gns_symmetric(
        form.modular(),
        &snaps,
        opts.samples.clamp(1, 20),
        derive_seed(seed, 4),
        tol,
    )?;
    rep.absorb("gns", gns);
    let (markov, class) = check_markov(form.algebra(), &snaps, tol);
    rep.absorb("markov", markov);
    let defect = snaps
        .iter()
        .map(|s| unitality_defect(form.algebra(), &s.on_algebra))
        .fold(0.0, f64::max);
    rep.bound("unitality", defect, tol.semigroup);
    rep.label("markov_class", class.as_str());
    rep.label(
        "verdict",
        if rep.passed() && class == MarkovClass::Conservative {
            "pass"
        } else {
            "fail"
        },
    );
    Ok(rep)
}
