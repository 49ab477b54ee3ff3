//! Isometric roundness invariants of finite-dimensional normed spaces and
//! finite metric spaces.
//!
//! * [`spaces`]: the norms (`ℓ^p`, `ℓ^p(ℓ^q)`, Schatten, Orlicz/Luxemburg,
//!   the racetrack space and its dual, numerical planar duals).
//! * [`moduli`]: search-based estimates of `ν_X(p)`, `mr(X)`, `mc(X)`,
//!   `ρ_X(t)`, `δ_X(ε)`, Clarkson ratios and related checks.
//! * [`metric`]: roundness of finite metric spaces and maximal generalised
//!   roundness.
//! * [`orlicz`]: Orlicz functions and their hypothesis checks.
//! * [`specfile`]: the text format for space descriptions.

pub mod error;
pub mod linalg;
pub mod metric;
pub mod moduli;
pub mod orlicz;
mod quad;
pub mod search;
pub mod spaces;
pub mod specfile;

pub use error::{Error, MetricError, Result};
pub use metric::{FiniteMetricSpace, MgrResult, MgrScan, RootSource};
pub use moduli::{Bracket, Coroundness, ModulusSample};
pub use orlicz::{OrliczFunction, OrliczSpec};
pub use search::SearchBudget;
pub use spaces::{Matrix, Space, SpaceSpec, Vector};
