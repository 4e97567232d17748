use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::Scalar;

/// Dense coordinate vector with a fixed length of at least one.
///
/// Entries are checked for finiteness on construction; arithmetic results are
/// re-checked only at module boundaries via [`Vector::ensure_finite`].
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<T> {
    values: Vec<T>,
}

impl<T: Scalar> Vector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension { expected: 1, got: 0 });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("entry {pos} is {}", values[pos])));
        }
        Ok(Self { values })
    }

    pub fn from_slice(values: &[T]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    /// Builds from `f64` values, converting to the target scalar.
    pub fn from_f64(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| T::of(v)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self::filled(dim, T::zero())
    }

    pub fn filled(dim: usize, value: T) -> Self {
        assert!(dim >= 1, "vector dimension must be at least 1");
        Self { values: vec![value; dim] }
    }

    /// Wraps values produced by library arithmetic without re-checking them.
    pub(crate) fn from_raw(values: Vec<T>) -> Self {
        debug_assert!(!values.is_empty());
        Self { values }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.values.iter()
    }

    pub fn iter_mut(&mut self) -> std::slice::IterMut<'_, T> {
        self.values.iter_mut()
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.values.clone()
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.as_f64()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Boundary check used by oracles and the harness.
    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(pos) => Err(Error::NonFinite(format!("{what}[{pos}] = {}", self.values[pos]))),
        }
    }

    pub fn check_dim(&self, other: &Self) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::Dimension { expected: self.len(), got: other.len() })
        }
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        Self::from_raw(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Coordinate-wise combination; panics on length mismatch.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.len(), other.len(), "zip_map length mismatch");
        Self::from_raw(self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn hadamard(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: T, other: &Self) {
        assert_eq!(self.len(), other.len(), "axpy length mismatch");
        for (s, &o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        dot(self, other)
    }

    pub fn norm_sq(&self) -> T {
        self.values.iter().map(|&v| v * v).sum()
    }

    pub fn norm_l2(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn norm_l1(&self) -> T {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_linf(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Sup-norm distance.
    pub fn dist_linf(&self, other: &Self) -> T {
        assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Unit coordinate vector.
    pub fn basis(dim: usize, j: usize) -> Self {
        let mut e = Self::zeros(dim);
        e.values[j] = T::one();
        e
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

impl<T> IndexMut<usize> for Vector<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.values[i]
    }
}

impl<'a, T> IntoIterator for &'a Vector<T> {
    type Item = &'a T;
    type IntoIter = std::slice::Iter<'a, T>;
    fn into_iter(self) -> Self::IntoIter {
        self.values.iter()
    }
}

/// Inner product.
pub fn dot<T: Scalar>(u: &Vector<T>, v: &Vector<T>) -> Result<T> {
    u.check_dim(v)?;
    Ok(u.values.iter().zip(&v.values).map(|(&a, &b)| a * b).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms<T> {
    pub l1: T,
    pub l2_sq: T,
    pub linf: T,
}

pub fn norms<T: Scalar>(u: &Vector<T>) -> Norms<T> {
    Norms { l1: u.norm_l1(), l2_sq: u.norm_sq(), linf: u.norm_linf() }
}
