//! Run configuration: JSON schema and instance construction.
//!
//! Complex matrices are row-major rows of `[re, im]` pairs. GNS vectors are
//! given as the ambient matrix `ξ`, so `Λ(x)` is written as `x ρ^{1/2}`.

use std::path::PathBuf;

use serde::Deserialize;
use tomita_core::algebra::{FaithfulState, MatrixAlgebra};
use tomita_core::bimodule::TomitaBimodule;
use tomita_core::crossed::{extend_derivation, ActionSpec, CrossedProduct};
use tomita_core::derivation::{gns_inner_derivation, inner_derivation, Derivation};
use tomita_core::dirichlet::{build_form, FormGenerator, ProjectionConfig, T_GRID};
use tomita_core::group::{cocycle_derivation, sample_cocycle, Cocycle, GroupAlgebra, GroupSpec, OrthogonalRep};
use tomita_core::io::{rows_to_matrix, MatrixRows};
use tomita_core::kms::{build_kms_form, KmsInstance, KmsRecord};
use tomita_core::linalg::CVec;
use tomita_core::modular::ModularData;
use tomita_core::pipeline::CertifyOptions;
use tomita_core::rng::{derive_seed, seeded};
use tomita_core::{Error, Result, Tolerances};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub algebra: Option<AlgebraSpec>,
    #[serde(default)]
    pub state: Option<StateSpec>,
    pub derivation: DerivationSpec,
    /// Flips the sign of the target involution on one carrier basis vector.
    #[serde(default)]
    pub corrupt_conjugation: Option<usize>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub samples: SampleCounts,
    #[serde(default)]
    pub xi0: Option<MatrixRows>,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub blocks: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Tracial,
    Diagonal(Vec<f64>),
    Rho(MatrixRows),
    Random { trace_weight: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DerivationSpec {
    /// Inner derivation of a modular eigenvector with eigenvalue `e^omega`.
    Inner { xi: MatrixRows, omega: f64 },
    /// Inner derivation split along the modular eigenspaces; a random `ξ`
    /// is drawn from the seed when omitted.
    EigenInner {
        #[serde(default)]
        xi: Option<MatrixRows>,
    },
    /// Cocycle derivation on a group algebra. `values` lists `b(g)` for every
    /// group element; a random coboundary-free cocycle is drawn when omitted.
    Cocycle {
        group: String,
        rep: String,
        #[serde(default)]
        values: Option<Vec<Vec<f64>>>,
    },
    /// Commutator form `Σ_j tr|ρ^{1/4}[v_j, x]ρ^{1/4}|²`.
    Kms { rho: MatrixRows, v: Vec<MatrixRows> },
    /// Extension of a base derivation to the crossed product by `Z_order`.
    Crossed {
        order: usize,
        action: ActionChoice,
        base: Box<DerivationSpec>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionChoice {
    Modular,
    Explicit(MatrixRows),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub identity: Option<f64>,
    pub check: Option<f64>,
    pub modular: Option<f64>,
    pub margin: Option<f64>,
    pub choi: Option<f64>,
    pub semigroup: Option<f64>,
    pub projection: Option<f64>,
    pub max_iterations: Option<usize>,
}

impl ToleranceOverrides {
    pub fn resolve(&self) -> Result<Tolerances> {
        let d = Tolerances::default();
        let t = Tolerances {
            identity: self.identity.unwrap_or(d.identity),
            check: self.check.unwrap_or(d.check),
            modular: self.modular.unwrap_or(d.modular),
            margin: self.margin.unwrap_or(d.margin),
            choi: self.choi.unwrap_or(d.choi),
            semigroup: self.semigroup.unwrap_or(d.semigroup),
            projection: self.projection.unwrap_or(d.projection),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
        };
        let values = [
            t.identity,
            t.check,
            t.modular,
            t.margin,
            t.choi,
            t.semigroup,
            t.projection,
        ];
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) || t.max_iterations == 0 {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(t)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleCounts {
    pub dirichlet: usize,
    pub amplified: usize,
    pub levels: usize,
}

impl Default for SampleCounts {
    fn default() -> Self {
        let d = CertifyOptions::default();
        Self {
            dirichlet: d.samples,
            amplified: d.amplified_samples,
            levels: d.levels,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// What a configuration builds: a derivation to certify in full, or a bare
/// form when no derivation is available.
pub enum Instance {
    Derivation(Derivation<f64>),
    Form(FormGenerator<f64>),
}

impl Instance {
    pub fn form(&self) -> FormGenerator<f64> {
        match self {
            Instance::Derivation(d) => build_form(d),
            Instance::Form(f) => f.clone(),
        }
    }

    pub fn modular(&self) -> &ModularData<f64> {
        match self {
            Instance::Derivation(d) => d.modular(),
            Instance::Form(f) => f.modular(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// The run seed; `cli` overrides the file. A missing seed is an error.
    pub fn seed(&self, cli: Option<u64>) -> Result<u64> {
        cli.or(self.seed)
            .ok_or_else(|| Error::Config("a seed is required".into()))
    }

    pub fn tolerances(&self, scale: Option<f64>) -> Result<Tolerances> {
        let t = self.tolerances.resolve()?;
        match scale {
            Some(f) if f.is_finite() && f > 0.0 => Ok(t.scaled(f)),
            Some(f) => Err(Error::Config(format!("--tol must be positive, got {f}"))),
            None => Ok(t),
        }
    }

    pub fn t_grid(&self) -> Result<Vec<f64>> {
        let grid = self.t_grid.clone().unwrap_or_else(|| T_GRID.to_vec());
        if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config("t_grid entries must be nonnegative".into()));
        }
        Ok(grid)
    }

    pub fn certify_options(&self, tol: &Tolerances) -> Result<CertifyOptions> {
        let s = &self.samples;
        if s.dirichlet == 0 {
            return Err(Error::Config("samples.dirichlet must be positive".into()));
        }
        Ok(CertifyOptions {
            samples: s.dirichlet,
            amplified_samples: s.amplified,
            levels: s.levels,
            t_grid: self.t_grid()?,
            projection: ProjectionConfig::from_tolerances(tol),
        })
    }

    fn base_state(&self, seed: u64) -> Result<ModularData<f64>> {
        let algebra = match &self.algebra {
            Some(a) => MatrixAlgebra::new(&a.blocks)?,
            None => return Err(Error::Config("this derivation needs an algebra".into())),
        };
        let state = match &self.state {
            None | Some(StateSpec::Tracial) => FaithfulState::tracial(algebra),
            Some(StateSpec::Diagonal(d)) => FaithfulState::diagonal(algebra, d)?,
            Some(StateSpec::Rho(rows)) => FaithfulState::new(algebra, rows_to_matrix(rows)?)?,
            Some(StateSpec::Random { trace_weight }) => {
                if !(0.0..=1.0).contains(trace_weight) || *trace_weight == 0.0 {
                    return Err(Error::Config("trace_weight must lie in (0, 1]".into()));
                }
                FaithfulState::random(algebra, &mut seeded(derive_seed(seed, 0x57)), *trace_weight)
            }
        };
        Ok(ModularData::new(state))
    }

    pub fn build(&self, seed: u64) -> Result<Instance> {
        let inst = build_spec(self, &self.derivation, seed)?;
        match (inst, self.corrupt_conjugation) {
            (inst, None) => Ok(inst),
            (Instance::Derivation(d), Some(k)) => {
                let target = d.target().with_corrupted_conjugation(k)?;
                let label = format!("{}!j{k}", d.label());
                Ok(Instance::Derivation(Derivation::new(
                    target,
                    d.matrix().clone(),
                    label,
                )?))
            }
            (Instance::Form(_), Some(_)) => Err(Error::Config(
                "corrupt_conjugation needs a derivation with a bimodule target".into(),
            )),
        }
    }

    /// `ξ₀` for energy traces: the configured vector or a seeded random one.
    pub fn xi0(&self, md: &ModularData<f64>, seed: u64) -> Result<CVec<f64>> {
        let a = md.algebra();
        match &self.xi0 {
            Some(rows) => {
                let x = rows_to_matrix(rows)?;
                a.check_shape(&x)?;
                Ok(a.coords(&x))
            }
            None => Ok(a.coords(&a.random_element::<f64>(&mut seeded(derive_seed(seed, 0x5E))))),
        }
    }
}

fn gns_vector(md: &ModularData<f64>, rows: &MatrixRows) -> Result<CVec<f64>> {
    let x = rows_to_matrix(rows)?;
    md.algebra().check_shape(&x)?;
    if md.algebra().off_block_norm(&x) > 1e-12 {
        return Err(Error::Config("vector has entries outside the algebra blocks".into()));
    }
    Ok(md.algebra().coords(&x))
}

fn build_spec(cfg: &RunConfig, spec: &DerivationSpec, seed: u64) -> Result<Instance> {
    match spec {
        DerivationSpec::Inner { xi, omega } => {
            let md = cfg.base_state(seed)?;
            let v = gns_vector(&md, xi)?;
            Ok(Instance::Derivation(inner_derivation(
                &TomitaBimodule::gns(&md),
                &v,
                *omega,
            )?))
        }
        DerivationSpec::EigenInner { xi } => {
            let md = cfg.base_state(seed)?;
            let x = match xi {
                Some(rows) => md.algebra().from_coords(&gns_vector(&md, rows)?),
                None => md.algebra().random_element::<f64>(&mut seeded(derive_seed(seed, 0x1E))),
            };
            Ok(Instance::Derivation(gns_inner_derivation(&md, &x)?))
        }
        DerivationSpec::Cocycle { group, rep, values } => {
            let g = GroupSpec::preset(group)?;
            let r = OrthogonalRep::<f64>::preset(&g, rep)?;
            let ga = GroupAlgebra::new(g.clone())?;
            let b = match values {
                Some(vals) => {
                    if vals.len() != g.order() || vals.iter().any(|v| v.len() != r.dim()) {
                        return Err(Error::Config(format!(
                            "cocycle needs {} vectors of length {}",
                            g.order(),
                            r.dim()
                        )));
                    }
                    Cocycle {
                        values: vals.iter().map(|v| nalgebra::DVector::from_column_slice(v)).collect(),
                    }
                }
                None => sample_cocycle(&g, &r, &mut seeded(derive_seed(seed, 0xC0))),
            };
            Ok(Instance::Derivation(cocycle_derivation(&ga, &r, &b)?))
        }
        DerivationSpec::Kms { rho, v } => {
            let n = rho.len();
            let record = KmsRecord {
                n,
                rho: rho.clone(),
                v: v.clone(),
            };
            Ok(Instance::Form(build_kms_form(&KmsInstance::from_record(&record)?)))
        }
        DerivationSpec::Crossed { order, action, base } => {
            let delta = match build_spec(cfg, base, seed)? {
                Instance::Derivation(d) => d,
                Instance::Form(_) => return Err(Error::Config("crossed extension needs a derivation as base".into())),
            };
            let action = match action {
                ActionChoice::Modular => ActionSpec::ModularDiscretized,
                ActionChoice::Explicit(rows) => ActionSpec::Explicit(rows_to_matrix(rows)?),
            };
            let cp = CrossedProduct::build(delta.modular(), *order, action)?;
            Ok(Instance::Derivation(extend_derivation(&delta, &cp)?))
        }
    }
}
