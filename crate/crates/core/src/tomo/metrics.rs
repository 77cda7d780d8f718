//! Fidelity, entropy, entanglement and truth-table figures of merit.

use super::records::{CountRecord, MeasurementSetting, Projector};
use crate::density::{check_psd, DENSITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Eigenvalues below this (relative to the largest) are rounding noise and
/// are zeroed before square roots, where they would otherwise be amplified
/// to ~1e-8.
const SQRT_FLOOR: f64 = 1e-13;

fn clean_sqrt(m: &CMat) -> CMat {
    let (vals, _) = linalg::hermitian_eigen(m);
    let top = vals.last().copied().unwrap_or(0.0).max(1.0);
    linalg::hermitian_map(m, |v| if v <= SQRT_FLOOR * top { 0.0 } else { v.sqrt() })
}

fn nuclear_norm(m: &CMat) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`, computed as `‖√ρ √σ‖₁²`.
pub fn fidelity(rho: &CMat, sigma: &CMat) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch(rho.nrows(), sigma.nrows()));
    }
    for m in [rho, sigma] {
        let h = linalg::hermiticity_deviation(m);
        if h > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {h:e})")));
        }
        check_psd(m)?;
    }
    Ok(nuclear_norm(&(clean_sqrt(rho) * clean_sqrt(sigma))).powi(2))
}

/// `d(1 − Tr ρ²)/(d − 1)`.
pub fn linear_entropy(rho: &CMat) -> Result<f64> {
    let d = rho.nrows();
    if d < 2 {
        return Err(Error::InvalidParameter("linear entropy needs d ≥ 2".into()));
    }
    let p = linalg::trace(&(rho * rho)).re;
    Ok(d as f64 * (1.0 - p) / (d as f64 - 1.0))
}

/// Squared concurrence. The λᵢ are the singular values of `√ρ √ρ̃` with
/// `ρ̃ = (Y⊗Y) ρ* (Y⊗Y)`, which equal the square roots of the eigenvalues
/// of `ρ ρ̃`.
pub fn tangle(rho: &CMat) -> Result<f64> {
    if rho.shape() != (4, 4) {
        return Err(Error::DimensionMismatch(rho.nrows(), 4));
    }
    let yy = linalg::kron(&linalg::pauli_y(), &linalg::pauli_y());
    let s = clean_sqrt(rho);
    let s_tilde = &yy * s.conjugate() * &yy;
    let mut l: Vec<f64> = (s * s_tilde).svd(false, false).singular_values.iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    let c = (l[0] - l[1] - l[2] - l[3]).max(0.0);
    Ok(c * c)
}

/// `½(1 + (P_ideal − P_flip)/(P_ideal + P_flip))`.
pub fn flipping_contrast(p_ideal: f64, p_flip: f64) -> Result<f64> {
    let s = p_ideal + p_flip;
    if s.is_nan() || s <= 0.0 {
        return Err(Error::InvalidParameter("both probabilities are zero".into()));
    }
    Ok(0.5 * (1.0 + (p_ideal - p_flip) / s))
}

/// Row-stochastic table of `P(output | input)`, basis states ordered with the
/// leftmost qubit most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    qubits: usize,
    rows: Vec<Vec<f64>>,
}

impl TruthTable {
    /// Normalizes each row; rejects negative entries and empty rows.
    pub fn new(qubits: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = 1usize << qubits;
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(rows.len(), d));
        }
        let mut out = Vec::with_capacity(d);
        for (i, r) in rows.into_iter().enumerate() {
            if r.iter().any(|&p| p.is_nan() || p < 0.0) {
                return Err(Error::InvalidParameter(format!("row {i} has a negative or NaN entry")));
            }
            let s: f64 = r.iter().sum();
            if s.is_nan() || s <= 0.0 {
                return Err(Error::InvalidParameter(format!("row {i} is empty")));
            }
            out.push(r.into_iter().map(|p| p / s).collect());
        }
        Ok(Self { qubits, rows: out })
    }

    /// `|U_{out,in}|²`.
    pub fn of_unitary(u: &CMat) -> Result<Self> {
        let d = u.nrows();
        if !d.is_power_of_two() || u.ncols() != d {
            return Err(Error::InvalidParameter(format!("{}x{} is not a qubit operator", d, u.ncols())));
        }
        let rows = (0..d).map(|i| (0..d).map(|o| u[(o, i)].norm_sqr()).collect()).collect();
        Self::new(d.trailing_zeros() as usize, rows)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.rows[input][output]
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.rows[i][j])
    }

    /// Most likely output for each input.
    pub fn argmax_outputs(&self) -> Vec<usize> {
        self.rows
            .iter()
            .map(|r| r.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(i, _)| i))
            .collect()
    }

    /// Contrast for a control setting, averaged over both target inputs. The
    /// target is the last qubit; `ideal` supplies the expected output.
    pub fn flipping_contrast(&self, ideal: &TruthTable, controls: usize) -> Result<f64> {
        if ideal.dim() != self.dim() {
            return Err(Error::DimensionMismatch(ideal.dim(), self.dim()));
        }
        let expect = ideal.argmax_outputs();
        let mut acc = 0.0;
        for t in 0..2 {
            let input = controls * 2 + t;
            let o = expect[input];
            acc += flipping_contrast(self.get(input, o), self.get(input, o ^ 1))?;
        }
        Ok(acc / 2.0)
    }
}

/// Builds a table by querying `runner` for each basis input's output distribution.
pub fn truth_table(mut runner: impl FnMut(usize) -> Result<Vec<f64>>, qubits: usize) -> Result<TruthTable> {
    let rows = (0..1usize << qubits).map(&mut runner).collect::<Result<Vec<_>>>()?;
    TruthTable::new(qubits, rows)
}

/// Table from Z-basis records whose preparations are H/V letters.
pub fn truth_table_from_records(records: &[CountRecord], qubits: usize) -> Result<TruthTable> {
    let d = 1usize << qubits;
    let mut rows = vec![vec![0.0; d]; d];
    let index = |ps: &[Projector]| -> Result<usize> {
        ps.iter().try_fold(0usize, |acc, p| match p {
            Projector::H => Ok(acc * 2),
            Projector::V => Ok(acc * 2 + 1),
            _ => Err(Error::Schema("truth tables use H/V letters only".into())),
        })
    };
    for r in records {
        let prep = r.prep()?.ok_or_else(|| Error::Schema("truth-table record without preparation".into()))?;
        let MeasurementSetting(out) = r.setting()?;
        if prep.len() != qubits || out.len() != qubits {
            return Err(Error::Schema(format!("record '{}' is not {qubits}-qubit", r.setting_id)));
        }
        rows[index(&prep)?][index(&out)?] += r.counts as f64;
    }
    for (i, row) in rows.iter().enumerate() {
        if row.iter().sum::<f64>() == 0.0 {
            return Err(Error::MissingSettings(format!("no counts for input {i}")));
        }
    }
    TruthTable::new(qubits, rows)
}

/// Mean probability of the ideal output: `Tr(M_exp M_idealᵀ)/d` with rows as inputs.
pub fn inquisition(m_exp: &TruthTable, m_ideal: &TruthTable) -> Result<f64> {
    if m_exp.dim() != m_ideal.dim() {
        return Err(Error::DimensionMismatch(m_exp.dim(), m_ideal.dim()));
    }
    let d = m_exp.dim();
    let s: f64 = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| m_exp.get(i, j) * m_ideal.get(i, j)).sum();
    Ok(s / d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{r, CVec};

    fn bell() -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        linalg::outer(&CVec::from_vec(vec![linalg::ZERO, r(s), r(s), linalg::ZERO]))
    }

    #[test]
    fn fidelity_is_symmetric_on_mixed_pairs() {
        let a = linalg::diag(&[r(0.7), r(0.2), r(0.1), r(0.0)]);
        let b = bell().scale(0.6) + linalg::identity(4).scale(0.1);
        let f1 = fidelity(&a, &b).unwrap();
        let f2 = fidelity(&b, &a).unwrap();
        assert!((f1 - f2).abs() < 1e-9);
    }

    #[test]
    fn table_normalizes_rows() {
        let t = TruthTable::new(1, vec![vec![2.0, 2.0], vec![0.0, 5.0]]).unwrap();
        assert_eq!(t.rows(), &[vec![0.5, 0.5], vec![0.0, 1.0]]);
        assert!(TruthTable::new(1, vec![vec![0.0, 0.0], vec![1.0, 0.0]]).is_err());
    }
}
