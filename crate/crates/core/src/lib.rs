//! Geodesic k-fields, polysymplectic structure and the correspondence
//! between forces and second-order k-vector fields on pseudo-Riemannian
//! manifolds.
//!
//! Everything is computed in a single chart. Derivatives come from
//! truncated polynomial algebras ([`jets`]); finite differences appear
//! only where a differential equation has to be checked against sampled
//! data.

pub mod array;
pub mod bundles;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod exprlang;
pub mod geometry;
pub mod jets;
pub mod solve;
pub mod variational;

pub use error::{Error, Result};
