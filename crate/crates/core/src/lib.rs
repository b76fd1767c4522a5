//! Hessian-free unconstrained optimization built on interpolation models of
//! Hessian-vector products.
//!
//! The crate provides two ways of turning a handful of function values and
//! Hessian-vector products into second-order information without ever forming
//! the true Hessian:
//!
//! * [`hessian_model`] recovers a symmetric model Hessian `H` from quadratic
//!   interpolation conditions enriched with a single Hessian-vector product,
//!   either exactly (square system), as a least-change update, or restricted
//!   to a known sparsity pattern.
//! * [`newton_model`] skips the Hessian entirely and recovers a model Newton
//!   direction `d` from products `z = ∇²f(x)(y − x)`, reusing stale products
//!   across iterations through a gradient-difference correction.
//!
//! Both recoveries are embedded in cubic line-search solvers ([`drivers`]) and
//! benchmarked against a truncated-Newton baseline ([`cg`], [`bench`]) on a
//! suite of analytic test problems ([`problems`]) with Dolan–Moré performance
//! profiles. All randomness flows through seeded streams ([`rng`]), so every
//! run is reproducible.

pub mod bench;
pub mod cg;
pub mod drivers;
pub mod error;
pub mod hessian_model;
pub mod linalg;
pub mod linesearch;
pub mod newton_model;
pub mod problems;
pub mod rng;
pub mod sampling;
pub mod types;

pub use error::Error;
pub use types::{Matrix, Vector};
