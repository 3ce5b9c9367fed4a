//! Dense `n × k × k` arrays for second-order data (q̈, SOPDE coefficients,
//! force components).

use std::ops::Sub;

use crate::error::{Error, Result};

/// Entry `(i, α, β)` of an `n × k × k` array, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize, k: usize) -> Self {
        Self { n, k, data: vec![0.0; n * k * k] }
    }

    pub fn from_vec(n: usize, k: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * k * k {
            return Err(Error::dim(format!("expected {} entries for {n}×{k}×{k}, got {}", n * k * k, data.len())));
        }
        Ok(Self { n, k, data })
    }

    pub fn from_fn(n: usize, k: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n, k);
        for i in 0..n {
            for a in 0..k {
                for b in 0..k {
                    t.set(i, a, b, f(i, a, b));
                }
            }
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn index(&self, i: usize, a: usize, b: usize) -> usize {
        (i * self.k + a) * self.k + b
    }

    #[inline]
    pub fn get(&self, i: usize, a: usize, b: usize) -> f64 {
        self.data[self.index(i, a, b)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, a: usize, b: usize, v: f64) {
        let idx = self.index(i, a, b);
        self.data[idx] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Largest |T(i,α,β) − T(i,β,α)|.
    pub fn asymmetry(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.n {
            for a in 0..self.k {
                for b in a + 1..self.k {
                    m = m.max((self.get(i, a, b) - self.get(i, b, a)).abs());
                }
            }
        }
        m
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, k: self.k, data: self.data.iter().map(|x| x * c).collect() }
    }
}

impl Sub for &Tensor3 {
    type Output = Tensor3;
    fn sub(self, rhs: &Tensor3) -> Tensor3 {
        assert_eq!((self.n, self.k), (rhs.n, rhs.k), "Tensor3 shape mismatch");
        Tensor3 {
            n: self.n,
            k: self.k,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}
