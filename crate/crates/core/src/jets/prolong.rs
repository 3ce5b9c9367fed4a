use nalgebra::DMatrix;

use super::{Scalar, TensorJet, TruncatedPolynomial};
use crate::array::Tensor3;
use crate::bundles::{K2Velocity, KVelocity};
use crate::error::{Error, Result};

/// A parameterized map γ: 𝒰 ⊂ ℝᵏ → ℝⁿ that can be evaluated in any
/// [`Scalar`] number system.
pub trait ParamMap {
    /// Number of parameters k.
    fn params(&self) -> usize;

    fn eval<S: Scalar>(&self, t: &[S]) -> Result<Vec<S>>;
}

fn check_params<G: ParamMap>(gamma: &G, t: &[f64]) -> Result<()> {
    if t.len() != gamma.params() || t.is_empty() {
        return Err(Error::dim(format!(
            "parameter point has {} entries, map expects {}",
            t.len(),
            gamma.params()
        )));
    }
    Ok(())
}

/// First prolongation γ¹(t): evaluates γ at `tᵅ + εᵅ` in ℝ_k^1.
pub fn prolong1<G: ParamMap>(gamma: &G, t: &[f64]) -> Result<KVelocity> {
    check_params(gamma, t)?;
    let k = t.len();
    let args = t
        .iter()
        .enumerate()
        .map(|(a, &ta)| TruncatedPolynomial::variable(k, 1, ta, a))
        .collect::<Result<Vec<_>>>()?;
    let out = gamma.eval(&args)?;
    let q: Vec<f64> = out.iter().map(|j| *j.constant_term()).collect();
    let qdot = DMatrix::from_fn(out.len(), k, |i, a| *out[i].linear(a));
    KVelocity::new(q, qdot)
}

/// Second prolongation γ²(t): evaluates γ at `tᵅ + εᵅ` in ℝ_k^2.
///
/// `q̈ᵢ_αβ` is the Hessian entry ∂²qⁱ/∂tᵅ∂tᵝ. In terms of stored monomial
/// coefficients this is `2·c_αα` on the diagonal and `c_αβ` off it.
pub fn prolong2<G: ParamMap>(gamma: &G, t: &[f64]) -> Result<K2Velocity> {
    check_params(gamma, t)?;
    let k = t.len();
    let args = t
        .iter()
        .enumerate()
        .map(|(a, &ta)| TruncatedPolynomial::variable(k, 2, ta, a))
        .collect::<Result<Vec<_>>>()?;
    let out = gamma.eval(&args)?;
    let n = out.len();
    let q: Vec<f64> = out.iter().map(|j| *j.constant_term()).collect();
    let qdot = DMatrix::from_fn(n, k, |i, a| *out[i].linear(a));
    let qddot = Tensor3::from_fn(n, k, |i, a, b| {
        let c = *out[i].quadratic(a, b).expect("order 2");
        if a == b {
            2.0 * c
        } else {
            c
        }
    });
    K2Velocity::new(KVelocity::new(q, qdot)?, qddot)
}

/// A point of the iterated bundle (Q_k^1)_k^1 in coordinates
/// `(qⁱ, (qⁱ)_α, q̇ⁱ_β, (q̇ⁱ_β)_α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratedVelocity {
    pub q: Vec<f64>,
    /// `(qⁱ)_α`: coefficient of εᵅ ⊗ 1.
    pub outer: DMatrix<f64>,
    /// `q̇ⁱ_β`: coefficient of 1 ⊗ εᵝ.
    pub inner: DMatrix<f64>,
    /// `(q̇ⁱ_β)_α`: coefficient of εᵅ ⊗ εᵝ, stored at `(i, α, β)`.
    pub mixed: Tensor3,
}

/// Evaluates γ at `tᵅ + εᵅ⊗1 + 1⊗εᵅ` in ℝ_k^1 ⊗ ℝ_k^1.
pub fn iterated_prolong<G: ParamMap>(gamma: &G, t: &[f64]) -> Result<IteratedVelocity> {
    check_params(gamma, t)?;
    let k = t.len();
    let args: Vec<TensorJet> = t
        .iter()
        .enumerate()
        .map(|(a, &ta)| TensorJet::diagonal_variable(k, ta, a))
        .collect();
    let out = gamma.eval(&args)?;
    let n = out.len();
    Ok(IteratedVelocity {
        q: out.iter().map(|j| j.get(0, 0)).collect(),
        outer: DMatrix::from_fn(n, k, |i, a| out[i].get(a + 1, 0)),
        inner: DMatrix::from_fn(n, k, |i, b| out[i].get(0, b + 1)),
        mixed: Tensor3::from_fn(n, k, |i, a, b| out[i].get(a + 1, b + 1)),
    })
}
