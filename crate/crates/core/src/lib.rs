//! Symbolic calculus of balance systems on (partial) jet bundles.
//!
//! The crate models flux/source constitutive data as mappings into form
//! bundles, derives the associated divergence-form PDE system, tests local
//! variationality (Lepage/Helmholtz), checks infinitesimal symmetries, and
//! emits Noether, energy-momentum, gauge and entropy-type balance laws, each
//! with a machine-checked certificate expressing the law as an explicit
//! combination of the original balance residuals.

pub mod balance;
pub mod catalog;
pub mod constitutive;
pub mod context;
pub mod coords;
pub mod error;
pub mod expr;
pub mod forms;
pub mod jet;
pub mod secondary;
pub mod symmetry;

pub use context::{Ctx, JetContext, Metric};
pub use coords::{FiberCoord, MultiIndex, VarRef};
pub use error::{Error, Result};
pub use expr::{parse_expr, Bindings, Equality, Expr};
