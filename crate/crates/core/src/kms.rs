//! KMS commutator forms on `M_n`:
//! `E(ρ^{1/4}xρ^{1/4}) = Σ_j tr|ρ^{1/4}[v_j, x]ρ^{1/4}|²`.
//!
//! Such forms are always KMS-symmetric but need not commute with the modular
//! group, and need not generate completely positive semigroups. This module
//! classifies instances and searches for violations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{FaithfulState, MatrixAlgebra};
use crate::checkers::{choi, unit_excess};
use crate::dirichlet::{check_dirichlet, check_modular, DirichletCone, FormGenerator, ProjectionConfig, T_GRID};
use crate::error::{Error, Result};
use crate::io::{matrix_to_rows, rows_to_matrix, MatrixRows};
use crate::linalg::{commutator, expm, hermitian_part, hs_inner, lit, op_norm, to_f64, CMat};
use crate::modular::ModularData;
use crate::report::{CertificationReport, Tolerances};
use crate::rng::{derive_seed, gaussian_matrix, seeded, Rng};
use crate::Real;

/// Hermiticity defect accepted for the `v_j`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Relative agreement required between the generator and the trace formula.
pub const TRACE_FORMULA_TOLERANCE: f64 = 1e-10;
/// Smallest density eigenvalue accepted from the Wishart sampler.
pub const MIN_DENSITY_EIGENVALUE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct KmsInstance<T: Real> {
    modular: ModularData<T>,
    vs: Vec<CMat<T>>,
}

impl<T: Real> KmsInstance<T> {
    pub fn new(rho: CMat<T>, vs: Vec<CMat<T>>) -> Result<Self> {
        let n = rho.nrows();
        let alg = MatrixAlgebra::full(n)?;
        for (j, v) in vs.iter().enumerate() {
            if v.shape() != (n, n) {
                return Err(Error::Dimension(format!("v_{j} must be {n}x{n}")));
            }
            let defect = to_f64((v - v.adjoint()).norm());
            if defect > HERMITIAN_TOLERANCE * to_f64(v.norm()).max(1.0) {
                return Err(Error::Precondition(format!(
                    "v_{j} is not self-adjoint (defect {defect:e})"
                )));
            }
        }
        let state = FaithfulState::new(alg, rho)?;
        Ok(Self {
            modular: ModularData::new(state),
            vs: vs.iter().map(hermitian_part).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.modular.algebra().size()
    }

    pub fn modular(&self) -> &ModularData<T> {
        &self.modular
    }

    pub fn density(&self) -> &CMat<T> {
        self.modular.state().density()
    }

    pub fn operators(&self) -> &[CMat<T>] {
        &self.vs
    }

    /// `K_j ξ = ρ^{1/4}[v_j, ρ^{-1/4}ξρ^{-1/4}]ρ^{1/4}` on GNS coordinates.
    pub fn kms_operators(&self) -> Vec<CMat<T>> {
        let s = self.modular.state();
        let alg = self.modular.algebra();
        self.vs
            .iter()
            .map(|v| {
                alg.superoperator(|xi: &CMat<T>| {
                    let x = s.inv_quarter() * xi * s.inv_quarter();
                    s.quarter() * commutator(v, &x) * s.quarter()
                })
            })
            .collect()
    }

    /// `A = Σ_j K_j^* K_j`.
    pub fn generator(&self) -> CMat<T> {
        let d = self.modular.algebra().dim();
        self.kms_operators()
            .iter()
            .fold(CMat::zeros(d, d), |acc, k| acc + k.adjoint() * k)
    }

    /// Polarized trace formula `Σ_j tr((ρ^{1/4}[v_j,x]ρ^{1/4})^* ρ^{1/4}[v_j,y]ρ^{1/4})`.
    pub fn trace_form(&self, x: &CMat<T>, y: &CMat<T>) -> num_complex::Complex<T> {
        let q = self.modular.state().quarter();
        self.vs
            .iter()
            .fold(num_complex::Complex::new(T::zero(), T::zero()), |acc, v| {
                let cx = q * commutator(v, x) * q;
                let cy = q * commutator(v, y) * q;
                acc + hs_inner(&cx, &cy)
            })
    }

    /// Generator assembled entrywise from the trace formula, independent of
    /// the superoperator route.
    pub fn generator_from_trace(&self) -> CMat<T> {
        let s = self.modular.state();
        let alg = self.modular.algebra();
        let xs: Vec<CMat<T>> = (0..alg.dim())
            .map(|k| s.inv_quarter() * alg.basis::<T>(k) * s.inv_quarter())
            .collect();
        CMat::from_fn(alg.dim(), alg.dim(), |k, l| self.trace_form(&xs[k], &xs[l]))
    }

    pub fn to_record(&self) -> KmsRecord {
        KmsRecord {
            n: self.dim(),
            rho: matrix_to_rows(self.density()),
            v: self.vs.iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn from_record(record: &KmsRecord) -> Result<Self> {
        let rho = rows_to_matrix(&record.rho)?;
        if rho.shape() != (record.n, record.n) {
            return Err(Error::Config(format!("rho must be {0}x{0}", record.n)));
        }
        let vs = record.v.iter().map(rows_to_matrix).collect::<Result<Vec<_>>>()?;
        Self::new(rho, vs)
    }
}

/// Serializable form of an instance, for replaying search results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmsRecord {
    pub n: usize,
    pub rho: MatrixRows,
    pub v: Vec<MatrixRows>,
}

pub fn build_kms_form<T: Real>(instance: &KmsInstance<T>) -> FormGenerator<T> {
    FormGenerator::from_matrix(instance.modular.clone(), hermitian_part(&instance.generator()), "kms")
        .expect("sum of squares is positive")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KmsLabel {
    GnsAligned,
    KmsOnlyPass,
    Violating,
}

impl KmsLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            KmsLabel::GnsAligned => "gns_aligned",
            KmsLabel::KmsOnlyPass => "kms_only_pass",
            KmsLabel::Violating => "violating",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub samples: usize,
    pub tolerances: Tolerances,
    pub projection: ProjectionConfig,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        let tolerances = Tolerances::default();
        Self {
            samples: 40,
            projection: ProjectionConfig::from_tolerances(&tolerances),
            tolerances,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub label: KmsLabel,
    pub min_choi: f64,
    /// Worst normalized Dirichlet margin over the probes.
    pub dirichlet_margin: f64,
    /// `max(0, −min_choi) / ‖A‖`.
    pub magnitude: f64,
    pub report: CertificationReport,
}

fn min_choi_on_grid<T: Real>(form: &FormGenerator<T>, gns_maps: &[CMat<T>]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut excess = 0.0f64;
    for m in gns_maps {
        let on_alg = form.algebra_map(m);
        min = min.min(choi(form.algebra(), &on_alg).min_eigenvalue);
        excess = excess.max(unit_excess(form.algebra(), &on_alg));
    }
    (min, excess)
}

/// Runs the trace-formula cross-check, modularity, the Dirichlet test and the
/// Choi test of the semigroup on the time grid, then labels the instance.
///
/// The instance is `gns_aligned` when its generator commutes with `log Δ`,
/// and `violating` when the semigroup fails complete positivity or the form
/// fails the Dirichlet test.
pub fn classify_instance<T: Real>(
    instance: &KmsInstance<T>,
    opts: &ClassifyOptions,
    seed: u64,
) -> Result<Classification> {
    let tol = &opts.tolerances;
    let form = build_kms_form(instance);
    let mut rep = CertificationReport::new("kms", seed, tol);
    let scale = to_f64(form.scale());
    let formula = to_f64((instance.generator_from_trace() - form.matrix()).norm()) / scale;
    rep.bound("trace_formula", formula, TRACE_FORMULA_TOLERANCE);

    let modular = check_modular(&form, opts.samples.min(20), derive_seed(seed, 1), tol)?;
    let aligned = modular.get("modular_commutation").is_some_and(|c| c.pass);
    rep.absorb("modular", modular);

    let cone = DirichletCone::new(form.state().clone(), opts.projection.clone());
    let dir = check_dirichlet(&form, &cone, opts.samples, derive_seed(seed, 2), tol)?;
    let dirichlet_margin = dir.get("dirichlet_margin").map_or(0.0, |c| c.margin);
    let dirichlet_ok = dir.passed();
    rep.absorb("dirichlet", dir);

    let maps = T_GRID
        .iter()
        .map(|&t| form.semigroup(lit(t)))
        .collect::<Result<Vec<_>>>()?;
    let (min_choi, excess) = min_choi_on_grid(&form, &maps);
    let cp = min_choi >= -tol.choi && excess <= tol.semigroup;
    rep.record("choi_positivity", (-min_choi).max(0.0), min_choi, min_choi >= -tol.choi);
    rep.bound("sub_unitality", excess, tol.semigroup);

    let norm = to_f64(op_norm(form.matrix()));
    let magnitude = if norm > 0.0 { (-min_choi).max(0.0) / norm } else { 0.0 };
    let label = if !cp || !dirichlet_ok {
        KmsLabel::Violating
    } else if aligned {
        KmsLabel::GnsAligned
    } else {
        KmsLabel::KmsOnlyPass
    };
    rep.label("kms_label", label.as_str());
    Ok(Classification {
        label,
        min_choi,
        dirichlet_margin,
        magnitude,
        report: rep,
    })
}

/// Outcome of re-checking a violation at 10× tighter tolerances, with the
/// generator rebuilt from the trace formula and the semigroup from a Taylor
/// exponential.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reverification {
    pub min_choi: f64,
    pub threshold: f64,
    pub survives: bool,
}

pub fn reverify_violation<T: Real>(instance: &KmsInstance<T>, tol: &Tolerances) -> Result<Reverification> {
    let tight = tol.scaled(0.1);
    let gen = hermitian_part(&instance.generator_from_trace());
    let form = FormGenerator::from_matrix(instance.modular.clone(), gen.clone(), "kms-trace")?;
    let maps: Vec<CMat<T>> = T_GRID.iter().map(|&t| expm(&gen.scale(lit(-t)))).collect();
    let (min_choi, excess) = min_choi_on_grid(&form, &maps);
    let survives = min_choi < -tight.choi || excess > tight.semigroup;
    Ok(Reverification {
        min_choi,
        threshold: tight.choi,
        survives,
    })
}

/// Distribution of the density in a search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityLaw {
    /// `GG^*/tr` with `G` an `n×2n` complex Gaussian matrix, redrawn while
    /// the smallest eigenvalue is below [`MIN_DENSITY_EIGENVALUE`].
    Wishart,
    Tracial,
}

fn sample_density<T: Real>(n: usize, law: DensityLaw, rng: &mut Rng) -> CMat<T> {
    match law {
        DensityLaw::Tracial => CMat::identity(n, n).scale(lit(1.0 / n as f64)),
        DensityLaw::Wishart => loop {
            let g = gaussian_matrix::<T>(rng, n, 2 * n);
            let w = &g * g.adjoint();
            let w = hermitian_part(&w.unscale(w.trace().re));
            if to_f64(crate::linalg::HermitianEigen::new(&w).min()) >= MIN_DENSITY_EIGENVALUE {
                return w;
            }
        },
    }
}

/// `(G + G^*)/2` with `G` complex Gaussian.
fn sample_hermitian<T: Real>(n: usize, rng: &mut Rng) -> CMat<T> {
    hermitian_part(&gaussian_matrix::<T>(rng, n, n))
}

/// Draws trial `trial` of a search seeded with `seed`.
pub fn sample_instance<T: Real>(n: usize, k: usize, law: DensityLaw, seed: u64, trial: u64) -> Result<KmsInstance<T>> {
    let mut rng = seeded(derive_seed(seed, trial));
    let rho = sample_density::<T>(n, law, &mut rng);
    let vs = (0..k).map(|_| sample_hermitian(n, &mut rng)).collect();
    KmsInstance::new(rho, vs)
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRow {
    pub trial: u64,
    pub label: KmsLabel,
    pub min_choi_eig: f64,
    pub dirichlet_margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub trial: u64,
    pub magnitude: f64,
    pub min_choi_eig: f64,
    pub reverification: Reverification,
    pub instance: KmsRecord,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SearchStats {
    pub trials: u64,
    pub gns_aligned: u64,
    pub kms_only_pass: u64,
    pub violating: u64,
    pub reverified: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub rows: Vec<TrialRow>,
    /// Sorted by decreasing magnitude, then trial index.
    pub violations: Vec<Violation>,
    pub stats: SearchStats,
}

/// Classifies `trials` sampled instances in parallel. Trial `i` uses the seed
/// `derive_seed(seed, i)`, so results do not depend on scheduling.
pub fn random_search<T: Real>(
    n: usize,
    k: usize,
    trials: u64,
    seed: u64,
    law: DensityLaw,
    opts: &ClassifyOptions,
) -> Result<SearchResult> {
    if n < 2 {
        return Err(Error::Config(format!("search dimension must be at least 2, got {n}")));
    }
    let outcomes: Vec<Result<(TrialRow, Option<Violation>)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let inst = sample_instance::<T>(n, k, law, seed, trial)?;
            let c = classify_instance(&inst, opts, derive_seed(seed ^ 0xC1A5, trial))?;
            let row = TrialRow {
                trial,
                label: c.label,
                min_choi_eig: c.min_choi,
                dirichlet_margin: c.dirichlet_margin,
            };
            let violation = if c.label == KmsLabel::Violating {
                Some(Violation {
                    trial,
                    magnitude: c.magnitude,
                    min_choi_eig: c.min_choi,
                    reverification: reverify_violation(&inst, &opts.tolerances)?,
                    instance: inst.to_record(),
                })
            } else {
                None
            };
            Ok((row, violation))
        })
        .collect();
    let mut stats = SearchStats {
        trials,
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(trials as usize);
    let mut violations = Vec::new();
    for o in outcomes {
        let (row, v) = o?;
        match row.label {
            KmsLabel::GnsAligned => stats.gns_aligned += 1,
            KmsLabel::KmsOnlyPass => stats.kms_only_pass += 1,
            KmsLabel::Violating => stats.violating += 1,
        }
        if let Some(v) = v {
            stats.reverified += v.reverification.survives as u64;
            violations.push(v);
        }
        rows.push(row);
    }
    violations.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude).then(a.trial.cmp(&b.trial)));
    Ok(SearchResult {
        rows,
        violations,
        stats,
    })
}
