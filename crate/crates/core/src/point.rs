//! Dense real vectors.

use std::fmt;
use std::ops::Index;

use crate::error::{check_dim, Error, Result};

/// A dense vector in R^n with finite coordinates.
///
/// Iterates, atoms and gradients all share this type. Constructors reject
/// NaN and infinite coordinates; the arithmetic helpers assume finite
/// inputs and matching dimensions (checked where a caller can get it wrong).
#[derive(Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("point must have dim >= 1".into()));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "coordinate {i} is not finite ({})",
                coords[i]
            )));
        }
        Ok(Point(coords))
    }

    /// Builds a point without the finiteness check. Internal arithmetic only.
    pub(crate) fn from_vec(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    /// The i-th coordinate direction scaled by `scale`.
    pub fn basis(dim: usize, i: usize, scale: f64) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = scale;
        Point(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn checked_dot(&self, other: &Point) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.dot(other))
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, alpha: f64) -> Point {
        Point(self.0.iter().map(|a| alpha * a).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Point) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += alpha * b;
        }
    }

    /// The convex combination `(1 - eta) * self + eta * d`.
    ///
    /// Evaluated coordinate-wise so that `eta == 0` returns `self` and
    /// `eta == 1` returns `d` bit for bit.
    pub fn toward(&self, d: &Point, eta: f64) -> Point {
        let keep = 1.0 - eta;
        Point(
            self.0
                .iter()
                .zip(&d.0)
                .map(|(w, d)| keep * w + eta * d)
                .collect(),
        )
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point{:?}", self.0)
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
        assert!(Point::new(vec![f64::INFINITY]).is_err());
        assert!(Point::new(vec![]).is_err());
        assert!(Point::new(vec![0.0, -2.5]).is_ok());
    }

    #[test]
    fn toward_endpoints_are_exact() {
        let w = Point::new(vec![0.1, 0.7]).unwrap();
        let d = Point::new(vec![-3.0f64.sqrt() / 2.0, -0.5]).unwrap();
        assert_eq!(w.toward(&d, 0.0), w);
        assert_eq!(w.toward(&d, 1.0), d);
    }

    #[test]
    fn checked_dot_reports_mismatch() {
        let a = Point::zeros(2);
        let b = Point::zeros(3);
        assert!(matches!(
            a.checked_dot(&b),
            Err(Error::DimensionMismatch { expected: 2, actual: 3 })
        ));
    }
}
