use std::ops::{Add, Mul, Neg, Sub};

use super::{Func, Scalar};
use crate::error::{Error, Result};

/// Exponent vector of a monomial (ε¹)^a₁ ⋯ (εᵏ)^aₖ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exponents: Vec<u32>,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self { exponents }
    }

    pub fn zero(k: usize) -> Self {
        Self { exponents: vec![0; k] }
    }

    /// The index of the generator εᵅ (0-based `alpha`).
    pub fn unit(k: usize, alpha: usize) -> Self {
        let mut e = vec![0; k];
        e[alpha] = 1;
        Self { exponents: e }
    }

    /// The index of εᵅεᵝ.
    pub fn pair(k: usize, alpha: usize, beta: usize) -> Self {
        let mut e = vec![0; k];
        e[alpha] += 1;
        e[beta] += 1;
        Self { exponents: e }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    /// All indices of degree ≤ `order`, in storage order: the constant, then
    /// ε¹..εᵏ, then εᵅεᵝ for α ≤ β lexicographically.
    pub fn enumerate(k: usize, order: usize) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(k)];
        out.extend((0..k).map(|a| MultiIndex::unit(k, a)));
        if order >= 2 {
            for a in 0..k {
                for b in a..k {
                    out.push(MultiIndex::pair(k, a, b));
                }
            }
        }
        out
    }
}

/// Element of ℝ_k^ℓ = ℝ[ε¹,…,εᵏ]/(ε¹,…,εᵏ)^{ℓ+1} for ℓ ∈ {1, 2}.
///
/// Coefficients are stored densely in the order of
/// [`MultiIndex::enumerate`]. A stored quadratic coefficient is the
/// coefficient of the monomial itself: for `f(t + ε)` the slot of εᵅεᵝ holds
/// `∂²f/∂tᵅ∂tᵝ` when α < β and `½ ∂²f/∂(tᵅ)²` when α = β.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPolynomial<T = f64> {
    k: usize,
    order: usize,
    coeffs: Vec<T>,
}

pub(crate) fn storage_len(k: usize, order: usize) -> usize {
    match order {
        1 => 1 + k,
        _ => 1 + k + k * (k + 1) / 2,
    }
}

fn pair_slot(k: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    // pairs (r, s) with r < a occupy a(2k − a + 1)/2 slots
    1 + k + a * (2 * k - a + 1) / 2 + (b - a)
}

fn check_shape(k: usize, order: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::dim("a truncated polynomial needs at least one generator"));
    }
    if order != 1 && order != 2 {
        return Err(Error::dim(format!("truncation order {order} not supported (only 1 and 2)")));
    }
    Ok(())
}

impl<T: Scalar> TruncatedPolynomial<T> {
    pub fn new(k: usize, order: usize, coeffs: Vec<T>) -> Result<Self> {
        check_shape(k, order)?;
        let len = storage_len(k, order);
        if coeffs.len() != len {
            return Err(Error::dim(format!(
                "expected {len} coefficients for k={k}, ℓ={order}, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { k, order, coeffs })
    }

    pub fn constant(k: usize, order: usize, c: T) -> Result<Self> {
        check_shape(k, order)?;
        let zero = c.zero_like();
        let mut coeffs = vec![zero; storage_len(k, order)];
        coeffs[0] = c;
        Ok(Self { k, order, coeffs })
    }

    /// `value + εᵅ`.
    pub fn variable(k: usize, order: usize, value: T, alpha: usize) -> Result<Self> {
        if alpha >= k {
            return Err(Error::dim(format!("generator index {alpha} out of range for k={k}")));
        }
        let one = value.constant_like(1.0);
        let mut out = Self::constant(k, order, value)?;
        out.coeffs[1 + alpha] = one;
        Ok(out)
    }

    /// `value + Σ_α dir[α]·εᵅ`.
    pub fn seeded(k: usize, order: usize, value: T, dir: &[T]) -> Result<Self> {
        if dir.len() != k {
            return Err(Error::dim("seed direction length differs from k"));
        }
        let mut out = Self::constant(k, order, value)?;
        for (a, d) in dir.iter().enumerate() {
            out.coeffs[1 + a] = d.clone();
        }
        Ok(out)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn constant_term(&self) -> &T {
        &self.coeffs[0]
    }

    /// Coefficient of εᵅ.
    pub fn linear(&self, alpha: usize) -> &T {
        &self.coeffs[1 + alpha]
    }

    /// Coefficient of the monomial εᵅεᵝ (`None` for ℓ = 1).
    pub fn quadratic(&self, alpha: usize, beta: usize) -> Option<&T> {
        (self.order == 2).then(|| &self.coeffs[pair_slot(self.k, alpha, beta)])
    }

    /// Coefficient of an arbitrary monomial; zero above the truncation order.
    pub fn coeff(&self, idx: &MultiIndex) -> Result<T> {
        if idx.exponents().len() != self.k {
            return Err(Error::dim("multi-index length differs from k"));
        }
        let nz: Vec<(usize, u32)> = idx
            .exponents()
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, e)| e > 0)
            .collect();
        let zero = self.coeffs[0].zero_like();
        Ok(match idx.degree() {
            0 => self.coeffs[0].clone(),
            1 => self.coeffs[1 + nz[0].0].clone(),
            2 if self.order == 2 => {
                let (a, b) = if nz.len() == 1 { (nz[0].0, nz[0].0) } else { (nz[0].0, nz[1].0) };
                self.coeffs[pair_slot(self.k, a, b)].clone()
            }
            _ => zero,
        })
    }

    /// Whether the two operands live in the same algebra.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.k == other.k && self.order == other.order
    }

    fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Self { k: self.k, order: self.order, coeffs: self.coeffs.iter().map(f).collect() }
    }

    fn assert_shape(&self, other: &Self) {
        assert!(
            self.same_shape(other),
            "truncated polynomial shape mismatch: (k={}, ℓ={}) vs (k={}, ℓ={})",
            self.k,
            self.order,
            other.k,
            other.order
        );
    }

    fn product(&self, rhs: &Self) -> Self {
        let k = self.k;
        let a = &self.coeffs;
        let b = &rhs.coeffs;
        let mut c: Vec<T> = Vec::with_capacity(a.len());
        c.push(a[0].clone() * b[0].clone());
        for i in 1..=k {
            c.push(a[0].clone() * b[i].clone() + a[i].clone() * b[0].clone());
        }
        if self.order == 2 {
            for p in 0..k {
                for q in p..k {
                    let s = pair_slot(k, p, q);
                    let cross = if p == q {
                        a[1 + p].clone() * b[1 + p].clone()
                    } else {
                        a[1 + p].clone() * b[1 + q].clone() + a[1 + q].clone() * b[1 + p].clone()
                    };
                    c.push(a[0].clone() * b[s].clone() + a[s].clone() * b[0].clone() + cross);
                }
            }
        }
        Self { k, order: self.order, coeffs: c }
    }

    /// `f0 + f1·ā + ½f2·ā²` where ā is `self` without its constant term.
    fn compose(&self, f0: T, f1: T, f2: T) -> Self {
        let mut bar = self.clone();
        bar.coeffs[0] = bar.coeffs[0].zero_like();
        let mut out = bar.map(|c| f1.clone() * c.clone());
        if self.order == 2 {
            let sq = bar.product(&bar);
            let half = f2.scale(0.5);
            for (o, s) in out.coeffs.iter_mut().zip(sq.coeffs) {
                *o = o.clone() + half.clone() * s;
            }
        }
        out.coeffs[0] = f0;
        out
    }
}

/// Product in ℝ_k^ℓ with shape checking.
pub fn jet_mul<T: Scalar>(
    a: &TruncatedPolynomial<T>,
    b: &TruncatedPolynomial<T>,
) -> Result<TruncatedPolynomial<T>> {
    if !a.same_shape(b) {
        return Err(Error::dim(format!(
            "cannot multiply elements of ℝ_{}^{} and ℝ_{}^{}",
            a.k, a.order, b.k, b.order
        )));
    }
    Ok(a.product(b))
}

impl<T: Scalar> Add for TruncatedPolynomial<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.assert_shape(&rhs);
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a = a.clone() + b;
        }
        self
    }
}

impl<T: Scalar> Sub for TruncatedPolynomial<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.assert_shape(&rhs);
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a = a.clone() - b;
        }
        self
    }
}

impl<T: Scalar> Mul for TruncatedPolynomial<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.assert_shape(&rhs);
        self.product(&rhs)
    }
}

impl<T: Scalar> Neg for TruncatedPolynomial<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|c| -c.clone())
    }
}

impl<T: Scalar> Scalar for TruncatedPolynomial<T> {
    fn constant_like(&self, c: f64) -> Self {
        let zero = self.coeffs[0].zero_like();
        let mut coeffs = vec![zero; self.coeffs.len()];
        coeffs[0] = self.coeffs[0].constant_like(c);
        Self { k: self.k, order: self.order, coeffs }
    }

    fn value(&self) -> f64 {
        self.coeffs[0].value()
    }

    fn scale(&self, c: f64) -> Self {
        self.map(|x| x.scale(c))
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if !self.same_shape(rhs) {
            return Err(Error::dim("division of truncated polynomials of different shape"));
        }
        if rhs.value() == 0.0 {
            return Err(Error::domain("division by a jet with zero constant term"));
        }
        let mut q = self.product(&rhs.lift(Func::Recip)?);
        // Constant term straight from the base division so that it matches
        // real evaluation bit for bit.
        q.coeffs[0] = self.coeffs[0].try_div(&rhs.coeffs[0])?;
        Ok(q)
    }

    fn lift(&self, f: Func) -> Result<Self> {
        let (f0, f1, f2) = f.derivatives(&self.coeffs[0])?;
        Ok(self.compose(f0, f1, f2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(k: usize, order: usize, c: &[f64]) -> TruncatedPolynomial {
        TruncatedPolynomial::new(k, order, c.to_vec()).unwrap()
    }

    #[test]
    fn storage_layout() {
        assert_eq!(storage_len(3, 1), 4);
        assert_eq!(storage_len(3, 2), 10);
        let k = 3;
        let idx = MultiIndex::enumerate(k, 2);
        for (slot, m) in idx.iter().enumerate().skip(1 + k) {
            let nz: Vec<usize> = (0..k).flat_map(|a| std::iter::repeat(a).take(m.exponents()[a] as usize)).collect();
            assert_eq!(pair_slot(k, nz[0], nz[1]), slot);
            assert_eq!(pair_slot(k, nz[1], nz[0]), slot);
        }
    }

    #[test]
    fn first_order_product_drops_cross_term() {
        // (1+ε¹)(1+ε²) in ℝ_2^1
        let a = poly(2, 1, &[1.0, 1.0, 0.0]);
        let b = poly(2, 1, &[1.0, 0.0, 1.0]);
        assert_eq!(jet_mul(&a, &b).unwrap().coeffs(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn second_order_binomial() {
        // (ε¹+ε²)² = (ε¹)² + 2ε¹ε² + (ε²)²; slots: 1, ε¹, ε², ε¹ε¹, ε¹ε², ε²ε²
        let a = poly(2, 2, &[0.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        let sq = jet_mul(&a, &a).unwrap();
        assert_eq!(sq.coeffs(), &[0.0, 0.0, 0.0, 1.0, 2.0, 1.0]);
    }

    #[test]
    fn single_generator_convolution() {
        let (a, b, c, d, e) = (2.0, 3.0, 5.0, 7.0, 11.0);
        let x = poly(1, 2, &[a, b, 0.0]);
        let y = poly(1, 2, &[c, d, e]);
        let z = jet_mul(&x, &y).unwrap();
        assert_eq!(z.coeffs(), &[a * c, a * d + b * c, a * e + b * d]);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = poly(2, 1, &[1.0, 0.0, 0.0]);
        let b = poly(2, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(jet_mul(&a, &b), Err(Error::Dimension(_))));
        let c = poly(3, 1, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(jet_mul(&a, &c), Err(Error::Dimension(_))));
    }

    #[test]
    fn unsupported_order_rejected() {
        assert!(TruncatedPolynomial::<f64>::constant(2, 3, 1.0).is_err());
        assert!(TruncatedPolynomial::<f64>::constant(0, 1, 1.0).is_err());
    }

    #[test]
    fn lifted_functions() {
        let t = 0.7_f64;
        let s = TruncatedPolynomial::variable(1, 1, t, 0).unwrap().lift(Func::Sin).unwrap();
        assert_eq!(s.coeffs(), &[t.sin(), t.cos()]);

        let x = poly(2, 2, &[0.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        let e = x.lift(Func::Exp).unwrap();
        assert_eq!(e.coeffs(), &[1.0, 1.0, 1.0, 0.5, 1.0, 0.5]);

        let r = poly(1, 2, &[1.0, 1.0, 0.0]).lift(Func::Recip).unwrap();
        assert_eq!(r.coeffs(), &[1.0, -1.0, 1.0]);
    }

    #[test]
    fn lift_domain_errors() {
        let x = poly(1, 1, &[0.0, 1.0]);
        assert!(matches!(x.lift(Func::Log), Err(Error::Domain(_))));
        assert!(matches!(x.lift(Func::Sqrt), Err(Error::Domain(_))));
        assert!(matches!(x.lift(Func::Recip), Err(Error::Domain(_))));
        assert!(matches!(x.lift(Func::Powi(-2)), Err(Error::Domain(_))));
        assert!(x.lift(Func::Powi(2)).is_ok());
        let one = x.constant_like(1.0);
        assert!(matches!(one.try_div(&x), Err(Error::Domain(_))));
    }

    #[test]
    fn nested_jets_give_second_derivatives() {
        // f(x) = x³ at x = 2, via an outer jet over an inner jet: the mixed
        // coefficient is f''(2) = 12.
        let inner = TruncatedPolynomial::variable(1, 1, 2.0, 0).unwrap();
        let outer = TruncatedPolynomial::variable(1, 1, inner, 0).unwrap();
        let y = outer.lift(Func::Powi(3)).unwrap();
        assert_eq!(y.constant_term().coeffs(), &[8.0, 12.0]);
        assert_eq!(y.linear(0).coeffs(), &[12.0, 12.0]);
    }

    #[test]
    fn coeff_above_order_is_zero() {
        let a = poly(2, 1, &[1.0, 2.0, 3.0]);
        assert_eq!(a.coeff(&MultiIndex::pair(2, 0, 1)).unwrap(), 0.0);
        assert_eq!(a.coeff(&MultiIndex::unit(2, 1)).unwrap(), 3.0);
        assert!(a.quadratic(0, 1).is_none());
    }
}
