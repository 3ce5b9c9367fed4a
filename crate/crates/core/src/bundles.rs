//! Velocity and covelocity bundles Q_k^1, Q_k^2, (Q_k^1)*, the metric
//! isomorphism between them, and the tautological forms θ and dθ.
//!
//! Index conventions: `qdot[(i, α)] = q̇ⁱ_α`, `p[(i, α)] = pᵢ^α`. Greek indices
//! are raised and lowered with the Euclidean metric of ℝᵏ, so `q̇^{iα}` and
//! `q̇ⁱ_α` are the same number.

use nalgebra::{DMatrix, DVector};

use crate::array::Tensor3;
use crate::error::{Error, Result};
use crate::geometry::MetricField;
use crate::jets::IteratedVelocity;

fn all_finite<'a>(xs: impl IntoIterator<Item = &'a f64>) -> bool {
    xs.into_iter().all(|x| x.is_finite())
}

/// A (k,1)-velocity: a point q and k tangent vectors X_α = q̇ⁱ_α ∂/∂qⁱ.
#[derive(Debug, Clone, PartialEq)]
pub struct KVelocity {
    q: Vec<f64>,
    qdot: DMatrix<f64>,
}

impl KVelocity {
    pub fn new(q: Vec<f64>, qdot: DMatrix<f64>) -> Result<Self> {
        if q.is_empty() || qdot.nrows() != q.len() || qdot.ncols() == 0 {
            return Err(Error::dim(format!(
                "k-velocity needs an n-vector and an n×k matrix with n, k ≥ 1 (got {} and {}×{})",
                q.len(),
                qdot.nrows(),
                qdot.ncols()
            )));
        }
        if !all_finite(&q) || !all_finite(qdot.iter()) {
            return Err(Error::domain("non-finite k-velocity entry"));
        }
        Ok(Self { q, qdot })
    }

    pub fn zero(q: Vec<f64>, k: usize) -> Result<Self> {
        let n = q.len();
        Self::new(q, DMatrix::zeros(n, k))
    }

    /// Builds from the flat coordinate vector `(q¹..qⁿ, q̇¹_1..q̇¹_k, …, q̇ⁿ_k)`.
    pub fn from_coords(n: usize, k: usize, coords: &[f64]) -> Result<Self> {
        if coords.len() != n + n * k {
            return Err(Error::dim("coordinate vector length differs from n + n·k"));
        }
        Self::new(coords[..n].to_vec(), DMatrix::from_row_slice(n, k, &coords[n..]))
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn qdot(&self) -> &DMatrix<f64> {
        &self.qdot
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn k(&self) -> usize {
        self.qdot.ncols()
    }

    /// X_α as an n-vector.
    pub fn column(&self, alpha: usize) -> Vec<f64> {
        self.qdot.column(alpha).iter().copied().collect()
    }

    /// Flat coordinates `(qⁱ, q̇ⁱ_α)` with q̇ row-major (index `n + i·k + α`).
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.q.clone();
        for i in 0..self.n() {
            for a in 0..self.k() {
                c.push(self.qdot[(i, a)]);
            }
        }
        c
    }

    /// Reorders the k slots: slot α of the result is slot `perm[α]` of self.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k() {
            return Err(Error::dim("permutation length differs from k"));
        }
        let qdot = DMatrix::from_fn(self.n(), self.k(), |i, a| self.qdot[(i, perm[a])]);
        Self::new(self.q.clone(), qdot)
    }
}

/// A (k,2)-velocity `(qⁱ, q̇ⁱ_α, q̈ⁱ_αβ)` with q̈ symmetric in (α, β).
#[derive(Debug, Clone, PartialEq)]
pub struct K2Velocity {
    base: KVelocity,
    qddot: Tensor3,
}

impl K2Velocity {
    pub fn new(base: KVelocity, qddot: Tensor3) -> Result<Self> {
        if qddot.n() != base.n() || qddot.k() != base.k() {
            return Err(Error::dim("second-order array shape differs from the base k-velocity"));
        }
        if !all_finite(qddot.as_slice()) {
            return Err(Error::domain("non-finite second-order entry"));
        }
        let tol = 1e-12 * qddot.max_abs().max(1.0);
        if qddot.asymmetry() > tol {
            return Err(Error::pre("q̈ must be symmetric in (α, β)"));
        }
        Ok(Self { base, qddot })
    }

    pub fn base(&self) -> &KVelocity {
        &self.base
    }

    pub fn qddot(&self) -> &Tensor3 {
        &self.qddot
    }

    /// The projection Q_k^2 → Q_k^1.
    pub fn project(&self) -> KVelocity {
        self.base.clone()
    }

    /// The canonical immersion Q_k^2 ⊂ (Q_k^1)_k^1:
    /// `(qⁱ)_α = q̇ⁱ_α`, `(q̇ⁱ_β)_α = q̈ⁱ_αβ`.
    pub fn immerse(&self) -> IteratedVelocity {
        IteratedVelocity {
            q: self.base.q.clone(),
            outer: self.base.qdot.clone(),
            inner: self.base.qdot.clone(),
            mixed: self.qddot.clone(),
        }
    }
}

/// A (k,1)-covelocity σ = pᵢ^α dqⁱ ⊗ e_α.
#[derive(Debug, Clone, PartialEq)]
pub struct Covelocity {
    q: Vec<f64>,
    p: DMatrix<f64>,
}

impl Covelocity {
    pub fn new(q: Vec<f64>, p: DMatrix<f64>) -> Result<Self> {
        if q.is_empty() || p.nrows() != q.len() || p.ncols() == 0 {
            return Err(Error::dim("covelocity needs an n-vector and an n×k matrix"));
        }
        if !all_finite(&q) || !all_finite(p.iter()) {
            return Err(Error::domain("non-finite covelocity entry"));
        }
        Ok(Self { q, p })
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn k(&self) -> usize {
        self.p.ncols()
    }
}

/// A tangent vector to (Q_k^1)* at `base`, in coordinates `(δqⁱ, δpᵢ^α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleTangent {
    base: Covelocity,
    dq: DVector<f64>,
    dp: DMatrix<f64>,
}

impl BundleTangent {
    pub fn new(base: Covelocity, dq: DVector<f64>, dp: DMatrix<f64>) -> Result<Self> {
        if dq.len() != base.n() || dp.shape() != base.p.shape() {
            return Err(Error::dim("tangent components do not match the base covelocity"));
        }
        if !all_finite(dq.iter()) || !all_finite(dp.iter()) {
            return Err(Error::domain("non-finite tangent component"));
        }
        Ok(Self { base, dq, dp })
    }

    /// Converts a tangent `(δq, δq̇)` to Q_k^1 at `x` into covelocity
    /// coordinates through the differential of `pᵢ^β = g_ij q̇ʲ_β`:
    /// `δpᵢ^β = ∂_h g_ij q̇ʲ_β δqʰ + g_ij δq̇ʲ_β`.
    pub fn from_velocity(
        g: &MetricField,
        x: &KVelocity,
        dq: &[f64],
        dqdot: &DMatrix<f64>,
    ) -> Result<Self> {
        let n = x.n();
        let k = x.k();
        if dq.len() != n || dqdot.shape() != (n, k) {
            return Err(Error::dim("velocity tangent components do not match the base"));
        }
        let (gm, dg) = g.metric_jet(x.q())?;
        let base = Covelocity::new(x.q().to_vec(), gmat(&gm, n) * x.qdot())?;
        let mut dp = DMatrix::zeros(n, k);
        for i in 0..n {
            for b in 0..k {
                let mut s = 0.0;
                for j in 0..n {
                    s += gm[i * n + j] * dqdot[(j, b)];
                    for h in 0..n {
                        s += dg[(i * n + j) * n + h] * x.qdot()[(j, b)] * dq[h];
                    }
                }
                dp[(i, b)] = s;
            }
        }
        Self::new(base, DVector::from_column_slice(dq), dp)
    }

    pub fn base(&self) -> &Covelocity {
        &self.base
    }

    pub fn dq(&self) -> &DVector<f64> {
        &self.dq
    }

    pub fn dp(&self) -> &DMatrix<f64> {
        &self.dp
    }
}

fn gmat(flat: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, flat)
}

/// An element `a^β_α` of End ℝᵏ, stored with the output index as row:
/// `m[(β, α)]` is the image component β of e_α.
#[derive(Debug, Clone, PartialEq)]
pub struct EndMatrix(pub DMatrix<f64>);

impl EndMatrix {
    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// `pᵢ^α = g_ij q̇ʲ_α`.
pub fn metric_iso(g: &MetricField, x: &KVelocity) -> Result<Covelocity> {
    let m = g.eval(x.q())?;
    Covelocity::new(x.q().to_vec(), &m.g * x.qdot())
}

/// `q̇ⁱ_α = gⁱʲ pⱼ^α`.
pub fn inverse_iso(g: &MetricField, sigma: &Covelocity) -> Result<KVelocity> {
    let m = g.eval(sigma.q())?;
    KVelocity::new(sigma.q().to_vec(), &m.inv * sigma.p())
}

fn same_base(a: &[f64], b: &[f64]) -> Result<()> {
    if a != b {
        return Err(Error::BaseMismatch);
    }
    Ok(())
}

/// ι_X σ: λ ↦ σ(X(λ)), with entries `Σᵢ pᵢ^α q̇ⁱ_β` at row α, column β.
pub fn interior_coupling(x: &KVelocity, sigma: &Covelocity) -> Result<EndMatrix> {
    same_base(x.q(), sigma.q())?;
    if x.k() != sigma.k() {
        return Err(Error::dim("k differs between velocity and covelocity"));
    }
    Ok(EndMatrix(sigma.p().transpose() * x.qdot()))
}

/// ⟨σ, X⟩ = tr ι_X σ = Σ pᵢ^α q̇ⁱ_α.
pub fn pairing(sigma: &Covelocity, x: &KVelocity) -> Result<f64> {
    Ok(interior_coupling(x, sigma)?.trace())
}

/// θ^α(D) = Σᵢ pᵢ^α δqⁱ. Independent of δp.
pub fn liouville_eval(sigma: &Covelocity, d: &BundleTangent) -> Result<Vec<f64>> {
    if d.base() != sigma {
        return Err(Error::BaseMismatch);
    }
    Ok((sigma.p().transpose() * d.dq()).iter().copied().collect())
}

/// dθ^α(D₁, D₂) = Σᵢ (δ₁pᵢ^α δ₂qⁱ − δ₂pᵢ^α δ₁qⁱ).
pub fn polysymplectic_eval(
    sigma: &Covelocity,
    d1: &BundleTangent,
    d2: &BundleTangent,
) -> Result<Vec<f64>> {
    if d1.base() != sigma || d2.base() != sigma {
        return Err(Error::BaseMismatch);
    }
    let a = d1.dp().transpose() * d2.dq();
    let b = d2.dp().transpose() * d1.dq();
    Ok((a - b).iter().copied().collect())
}
