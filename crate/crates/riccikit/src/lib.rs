//! Generalized Ricci curvature of weighted Riemannian manifolds and
//! numerical verification of the weighted Poincare, Brascamp-Lieb and
//! log-Sobolev inequalities it implies.

pub mod convex_geometry;
pub mod error;
pub mod fields;
pub mod inequality_catalog;
pub mod linalg;
pub mod metric_families;
pub mod quadrature;
pub mod rng;
pub mod tensor_core;
pub mod tolerances;
pub mod transport_legendre;
pub mod verification_engine;

pub use error::{Error, Result};
