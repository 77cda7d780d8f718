//! Validated density matrices.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};

pub const DENSITY_TOL: f64 = 1e-9;

/// Hermitian, positive semidefinite, unit trace, each within [`DENSITY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
}

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        check_density(&matrix)?;
        Ok(Self { matrix })
    }

    pub fn from_pure(v: &CVec) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("state norm {n}")));
        }
        Ok(Self { matrix: linalg::outer(v) })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: linalg::identity(dim).scale(1.0 / dim as f64) }
    }

    /// Closest density matrix in Frobenius norm.
    pub fn projected(m: &CMat) -> Self {
        Self { matrix: linalg::project_to_density(m) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(&self.matrix * &self.matrix)).re
    }

    /// Row-major `[re, im]` pairs.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        to_pairs(&self.matrix)
    }
}

pub fn to_pairs(m: &CMat) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

pub fn from_pairs(dim: usize, pairs: &[[f64; 2]]) -> Result<CMat> {
    if pairs.len() != dim * dim {
        return Err(Error::DimensionMismatch(pairs.len(), dim * dim));
    }
    let entries: Vec<_> = pairs.iter().map(|[re, im]| linalg::c(*re, *im)).collect();
    Ok(CMat::from_row_slice(dim, dim, &entries))
}

pub fn check_density(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidDensity(format!("shape {}x{}", m.nrows(), m.ncols())));
    }
    let h = linalg::hermiticity_deviation(m);
    if h > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("not Hermitian (deviation {h:e})")));
    }
    let tr = linalg::trace(m).re;
    if (tr - 1.0).abs() > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!("trace {tr}")));
    }
    check_psd(m)
}

pub fn check_psd(m: &CMat) -> Result<()> {
    let (vals, _) = linalg::hermitian_eigen(m);
    if let Some(&low) = vals.first() {
        if low < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {low:e}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(DensityMatrix::new(linalg::identity(2).scale(0.5)).is_ok());
        assert!(DensityMatrix::new(linalg::identity(2)).is_err());
        let neg = linalg::diag(&[linalg::r(1.5), linalg::r(-0.5)]);
        assert!(DensityMatrix::new(neg).is_err());
        let m = DensityMatrix::maximally_mixed(4);
        assert!((m.purity() - 0.25).abs() < 1e-15);
        let back = from_pairs(4, &m.to_pairs()).unwrap();
        assert_eq!(&back, m.matrix());
    }
}
