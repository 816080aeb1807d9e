//! Numerical certification of the generator characterizations of positive
//! one-parameter semigroups on the matrix algebra M(n, C).
//!
//! The crate represents linear maps on M(n, C) as n² × n² superoperators,
//! builds semigroups, resolvents and their approximations from a generator,
//! and evaluates the equivalent positivity conditions with signed margins.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod duality;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod runner;
pub mod semigroup;
pub mod superop;

pub use criteria::{
    ConditionId, ConditionResult, ContractionEquivalenceReport, EquivalenceReport, ProbeSet, RunConfig,
    UnitalContractionReport, Verdict,
};
pub use duality::{DensityMatrix, KossakowskiReport};
pub use error::{Error, Result};
pub use instances::{Family, InstanceRecipe};
pub use linalg::{CMatrix, ElementClass, SpectralData, DEFAULT_TOL};
pub use semigroup::{GeneratorSpec, SemigroupHandle};
pub use superop::{ConeStatus, ConeVerdict, ContractionStatus, ContractionVerdict, SearchBudget, Superoperator};

pub use num_complex::Complex64 as C64;
