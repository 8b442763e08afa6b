use std::ops::{Add, Deref, DerefMut, Mul, Neg, Sub};

use crate::error::{DcError, Result};

/// Dense real vector.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    /// Wraps `data`, rejecting empty input and non-finite entries.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(DcError::BadDims("empty vector".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(DcError::NonFinite("vector"));
        }
        Ok(Self { data })
    }

    /// Wraps `data` without validation.
    pub fn from_vec(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn from_slice(data: &[f64]) -> Self {
        Self { data: data.to_vec() }
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: vec![0.0; n] }
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Self { data: vec![value; n] }
    }

    /// The `i`-th standard basis vector of length `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.data[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.data, other)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    pub fn norm1(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &[f64]) {
        debug_assert_eq!(self.data.len(), x.len());
        for (s, xi) in self.data.iter_mut().zip(x) {
            *s += a * xi;
        }
    }

    pub fn scale_mut(&mut self, a: f64) {
        for s in &mut self.data {
            *s *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { data: self.data.iter().map(|v| a * v).collect() }
    }

    /// Euclidean distance to `other`.
    pub fn dist(&self, other: &[f64]) -> f64 {
        debug_assert_eq!(self.data.len(), other.len());
        self.data.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(DcError::DimensionMismatch { expected: n, got: self.dim() })
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.data
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Self { data }
    }
}

impl FromIterator<f64> for Vector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Self { data: iter.into_iter().collect() }
    }
}

impl<'a> Add<&'a Vector> for &'a Vector {
    type Output = Vector;
    fn add(self, rhs: &'a Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect()
    }
}

impl<'a> Sub<&'a Vector> for &'a Vector {
    type Output = Vector;
    fn sub(self, rhs: &'a Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect()
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, rhs: f64) -> Vector {
        self.scaled(rhs)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scaled(-1.0)
    }
}
