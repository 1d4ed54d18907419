//! Finite-dimensional Tomita-Takesaki theory, symmetric derivations into
//! Tomita bimodules, and numerical certification of completely Dirichlet
//! forms and KMS-symmetric Markov semigroups.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`). The aliases at the
//! crate root fix the scalar to `f64`, which is what the documented tolerances
//! assume.

pub mod algebra;
pub mod bimodule;
pub mod catalog;
pub mod checkers;
pub mod crossed;
pub mod derivation;
pub mod dirichlet;
pub mod error;
pub mod group;
pub mod io;
pub mod kms;
pub mod linalg;
pub mod modular;
pub mod pipeline;
pub mod reduction;
pub mod report;
pub mod rng;
pub mod wedderburn;

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Scalar field for every numeric routine.
pub trait Real: RealField + Copy + ToPrimitive + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

pub use error::{Error, Result};
pub use report::{CertificationReport, Check, Tolerances};

pub type MatrixAlgebra = algebra::MatrixAlgebra;
pub type FaithfulState = algebra::FaithfulState<f64>;
pub type ModularData = modular::ModularData<f64>;
pub type Matrix = linalg::CMat<f64>;
pub type Vector = linalg::CVec<f64>;
pub type TomitaBimodule = bimodule::TomitaBimodule<f64>;
pub type Derivation = derivation::Derivation<f64>;
pub type FormGenerator = dirichlet::FormGenerator<f64>;
pub type DirichletCone = dirichlet::DirichletCone<f64>;
pub type GroupAlgebra = group::GroupAlgebra<f64>;
pub type CrossedProduct = crossed::CrossedProduct<f64>;
pub type KmsInstance = kms::KmsInstance<f64>;
