//! Truncated polynomial algebras ℝ_k^ℓ (ℓ = 1, 2) and the jet prolongations
//! built on them.
//!
//! Every derivative in this crate is read off from jet coefficients: a
//! smooth function evaluated at `x + ε` returns its Taylor data up to the
//! truncation order, with no step size and no cancellation error. Jets nest
//! (`TruncatedPolynomial<TruncatedPolynomial<f64>>`), which is how second
//! derivatives of metric components are obtained when a first-order
//! quantity such as a Christoffel symbol has to be differentiated again.

mod func;
mod poly;
mod prolong;
mod tensor;

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::Result;

pub use func::{lift_function, Func};
pub use poly::{jet_mul, MultiIndex, TruncatedPolynomial};
pub use prolong::{iterated_prolong, prolong1, prolong2, IteratedVelocity, ParamMap};
pub use tensor::{mu_embed, TensorJet};

/// A number system over which expressions, metrics and forces can be
/// evaluated: plain reals, truncated polynomials (possibly nested) and
/// tensor jets.
///
/// The operator impls panic when the operands have different shapes (for
/// example different generator counts). Shapes are fixed by the caller
/// that seeds an evaluation, so a mismatch is a programming error; use
/// [`jet_mul`] for a checked product.
pub trait Scalar:
    Clone + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// A constant with the same shape as `self`.
    fn constant_like(&self, c: f64) -> Self;

    /// Real part (the constant term, recursively).
    fn value(&self) -> f64;

    fn scale(&self, c: f64) -> Self;

    /// Division. Fails when the divisor's constant term is zero.
    fn try_div(&self, rhs: &Self) -> Result<Self>;

    /// Applies a whitelisted smooth function.
    fn lift(&self, f: Func) -> Result<Self>;

    fn zero_like(&self) -> Self {
        self.constant_like(0.0)
    }
}

impl Scalar for f64 {
    fn constant_like(&self, c: f64) -> Self {
        c
    }

    fn value(&self) -> f64 {
        *self
    }

    fn scale(&self, c: f64) -> Self {
        self * c
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if *rhs == 0.0 {
            return Err(crate::Error::domain("division by zero"));
        }
        Ok(self / rhs)
    }

    fn lift(&self, f: Func) -> Result<Self> {
        f.apply_real(*self)
    }
}
