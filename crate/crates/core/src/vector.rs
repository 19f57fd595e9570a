use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense vector with nonnegative, finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct NonNegVector {
    coords: Vec<f64>,
}

impl NonNegVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("vector must have dimension >= 1".into()));
        }
        check_coords(&coords)?;
        Ok(Self { coords })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { coords: vec![0.0; dim] }
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
        Self { coords }
    }

    /// The indicator of the first `k` coordinates.
    pub fn ones_prefix(dim: usize, k: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[..k.min(dim)].iter_mut().for_each(|c| *c = 1.0);
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        assert!(alpha >= 0.0, "scaling factor must be nonnegative");
        Self { coords: self.coords.iter().map(|c| c * alpha).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() }
    }
}

impl TryFrom<Vec<f64>> for NonNegVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<NonNegVector> for Vec<f64> {
    fn from(v: NonNegVector) -> Self {
        v.coords
    }
}

pub(crate) fn check_coords(coords: &[f64]) -> Result<()> {
    for (index, &value) in coords.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if value < 0.0 {
            return Err(Error::NegativeCoordinate { index, value });
        }
    }
    Ok(())
}

pub(crate) fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
