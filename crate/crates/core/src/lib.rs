//! Limit theorems for randomly indexed sums of independent, non-identically
//! distributed summands.
//!
//! The crate covers the whole pipeline: summand and index laws, the double
//! array scheme with its normalizers, exact characteristic functions and gap
//! functionals, random Lindeberg/Lyapunov conditions, normal variance-mean
//! mixture limits, distances between distributions, and a scenario harness
//! that ties them into convergence reports.

pub mod cf_engine;
pub mod conditions;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod index_laws;
pub mod metrics;
pub mod nvm;
pub mod numeric;
pub mod quad;
pub mod rng;
pub mod scheme;

pub use cf_engine::{coherency_gap, lemma1_gap, LimitLaw, StandardNormal, SupReport};
pub use conditions::{ConditionReport, Method};
pub use distributions::{SummandFamily, SummandShape};
pub use error::{Error, Result};
pub use index_laws::{IndexLaw, WeightedSupport};
pub use metrics::{levy, EmpiricalDistribution, EvaluableCdf};
pub use nvm::{MixingLaw, NVMixture};
pub use scheme::{DoubleArrayScheme, IndexRule, Mode, ParamRule, Row, RowParam, VariancePattern};
