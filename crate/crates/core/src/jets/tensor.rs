use std::ops::{Add, Mul, Neg, Sub};

use super::{Func, Scalar, TruncatedPolynomial};
use crate::error::{Error, Result};

/// Element of ℝ_k^1 ⊗ ℝ_k^1.
///
/// Basis `u ⊗ w` with `u, w ∈ {1, ε¹, …, εᵏ}`; slot `(a, b)` holds the
/// coefficient of `u_a ⊗ w_b` where index 0 stands for 1 and index α+1 for
/// εᵅ. Products multiply factorwise and truncate each factor at degree 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorJet {
    k: usize,
    coeffs: Vec<f64>,
}

impl TensorJet {
    pub fn zero(k: usize) -> Self {
        Self { k, coeffs: vec![0.0; (k + 1) * (k + 1)] }
    }

    pub fn constant(k: usize, c: f64) -> Self {
        let mut t = Self::zero(k);
        t.coeffs[0] = c;
        t
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Coefficient of `u_a ⊗ w_b` (0 = unit, α+1 = εᵅ).
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.coeffs[a * (self.k + 1) + b]
    }

    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        let k = self.k;
        self.coeffs[a * (k + 1) + b] = v;
    }

    /// `value + εᵅ ⊗ 1 + 1 ⊗ εᵅ`, the image of `value + εᵅ` under μ.
    pub fn diagonal_variable(k: usize, value: f64, alpha: usize) -> Self {
        let mut t = Self::constant(k, value);
        t.set(alpha + 1, 0, 1.0);
        t.set(0, alpha + 1, 1.0);
        t
    }

    fn product(&self, rhs: &Self) -> Self {
        let k = self.k;
        let d = k + 1;
        let mut out = Self::zero(k);
        // u_a u_c is nonzero only when at least one of a, c is the unit.
        for a1 in 0..d {
            for b1 in 0..d {
                let x = self.coeffs[a1 * d + b1];
                if x == 0.0 {
                    continue;
                }
                for a2 in 0..d {
                    if a1 != 0 && a2 != 0 {
                        continue;
                    }
                    for b2 in 0..d {
                        if b1 != 0 && b2 != 0 {
                            continue;
                        }
                        let a = a1 + a2;
                        let b = b1 + b2;
                        out.coeffs[a * d + b] += x * rhs.coeffs[a2 * d + b2];
                    }
                }
            }
        }
        out
    }

    fn assert_shape(&self, other: &Self) {
        assert_eq!(self.k, other.k, "tensor jet generator count mismatch");
    }
}

/// The algebra morphism μ: ℝ_k^2 → ℝ_k^1 ⊗ ℝ_k^1, εᵅ ↦ εᵅ⊗1 + 1⊗εᵅ.
///
/// On monomials: `μ(εᵅεᵝ) = εᵅ⊗εᵝ + εᵝ⊗εᵅ` (and `2 εᵅ⊗εᵅ` on the diagonal);
/// all other terms of the expanded product vanish in ℝ_k^1.
pub fn mu_embed(s: &TruncatedPolynomial) -> Result<TensorJet> {
    if s.order() != 2 {
        return Err(Error::dim("μ is defined on ℝ_k^2 only"));
    }
    let k = s.k();
    let mut t = TensorJet::constant(k, *s.constant_term());
    for a in 0..k {
        let c = *s.linear(a);
        t.set(a + 1, 0, c);
        t.set(0, a + 1, c);
    }
    for a in 0..k {
        for b in a..k {
            let c = *s.quadratic(a, b).expect("order 2");
            if a == b {
                t.set(a + 1, a + 1, 2.0 * c);
            } else {
                t.set(a + 1, b + 1, c);
                t.set(b + 1, a + 1, c);
            }
        }
    }
    Ok(t)
}

impl Add for TensorJet {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.assert_shape(&rhs);
        self.coeffs.iter_mut().zip(rhs.coeffs).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for TensorJet {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.assert_shape(&rhs);
        self.coeffs.iter_mut().zip(rhs.coeffs).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Mul for TensorJet {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.assert_shape(&rhs);
        self.product(&rhs)
    }
}

impl Neg for TensorJet {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.coeffs.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

impl Scalar for TensorJet {
    fn constant_like(&self, c: f64) -> Self {
        TensorJet::constant(self.k, c)
    }

    fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn scale(&self, c: f64) -> Self {
        let mut t = self.clone();
        t.coeffs.iter_mut().for_each(|x| *x *= c);
        t
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.value() == 0.0 {
            return Err(Error::domain("division by a tensor jet with zero constant term"));
        }
        let mut q = self.product(&rhs.lift(Func::Recip)?);
        q.coeffs[0] = self.coeffs[0] / rhs.coeffs[0];
        Ok(q)
    }

    fn lift(&self, f: Func) -> Result<Self> {
        // Every element without constant term cubes to zero, so the
        // second-order Taylor polynomial is exact here as well.
        let (f0, f1, f2) = f.derivatives(&self.coeffs[0])?;
        let mut bar = self.clone();
        bar.coeffs[0] = 0.0;
        let sq = bar.product(&bar);
        let mut out = bar.scale(f1) + sq.scale(0.5 * f2);
        out.coeffs[0] = f0;
        Ok(out)
    }
}
