//! Mixed-radix registers of qubits, qutrits and higher-dimensional carriers.
//!
//! The leftmost carrier is the most significant digit, so `|C2,C1,T⟩ = |1,0,1⟩`
//! on dims `[2,2,3]` is basis index `1*6 + 0*3 + 1 = 7`.

use crate::error::{Error, Result};
use crate::linalg::{CVec, ONE, ZERO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegisterShape {
    dims: Vec<usize>,
}

impl RegisterShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("no carriers".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidShape(format!("carrier dimension {d} < 2")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidShape("total dimension overflows".into()))?;
        if total > 1 << 16 {
            return Err(Error::InvalidShape(format!("total dimension {total} too large")));
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n]).expect("qubit register")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, carrier: usize) -> usize {
        self.dims[carrier]
    }

    pub fn carriers(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    /// Place value of each carrier in the flat index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} digits for {} carriers",
                digits.len(),
                self.dims.len()
            )));
        }
        let mut index = 0;
        for (&d, &dim) in digits.iter().zip(&self.dims) {
            if d >= dim {
                return Err(Error::ShapeMismatch(format!("digit {d} out of range {dim}")));
            }
            index = index * dim + d;
        }
        Ok(index)
    }

    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            digits[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        digits
    }

    /// Returns a copy with one carrier's dimension replaced.
    pub fn with_dim(&self, carrier: usize, dim: usize) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims[carrier] = dim;
        Self::new(dims)
    }

    /// Indices of basis states whose every carrier sits in `{0,1}`, in
    /// ascending order (this is the qubit-subspace ordering).
    pub fn qubit_subspace(&self) -> Vec<usize> {
        (0..self.total_dim())
            .filter(|&i| self.digits_of(i).iter().all(|&d| d < 2))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    shape: RegisterShape,
    amplitudes: CVec,
}

pub const NORM_TOL: f64 = 1e-9;

impl StateVector {
    pub fn new(shape: RegisterShape, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != shape.total_dim() {
            return Err(Error::DimensionMismatch(amplitudes.len(), shape.total_dim()));
        }
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!("state norm² {norm} ≠ 1")));
        }
        Ok(Self { shape, amplitudes })
    }

    /// Builds a possibly unnormalized vector; only heralding code should need this.
    pub fn unnormalized(shape: RegisterShape, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != shape.total_dim() {
            return Err(Error::DimensionMismatch(amplitudes.len(), shape.total_dim()));
        }
        Ok(Self { shape, amplitudes })
    }

    pub fn basis(shape: RegisterShape, digits: &[usize]) -> Result<Self> {
        let index = shape.index_of(digits)?;
        let mut amplitudes = CVec::from_element(shape.total_dim(), ZERO);
        amplitudes[index] = ONE;
        Ok(Self { shape, amplitudes })
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<Complex64> {
        Ok(self.amplitudes[self.shape.index_of(digits)?])
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_squared() - 1.0).abs() <= NORM_TOL
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut CVec {
        &mut self.amplitudes
    }
}
