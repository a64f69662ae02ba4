//! Upper-confidence least-squares exploration workbench.
//!
//! - [`linalg`]: incremental dense linear algebra (EMA statistics,
//!   approximate inverses, Sherman–Morrison, conjugate gradient).
//! - [`features`]: tile coding into sparse binary state-action features.
//! - [`envs`]: Sparse Mountain Car, Puddle World, River Swim, One-State.
//! - [`agents`]: UCLS and its baselines behind a common [`agents::Agent`] contract.
//! - [`harness`]: seeded experiment runner, aggregation, sweeps and CSV output.

pub mod agents;
pub mod envs;
mod error;
pub mod features;
pub mod harness;
pub mod linalg;

pub use error::{Error, Result};
