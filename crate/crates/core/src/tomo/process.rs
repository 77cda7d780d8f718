//! Process tomography in the Pauli basis.

use super::metrics::fidelity;
use super::records::{group_by_prep, CountRecord, Projector};
use super::state::state_tomography;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Default informationally complete single-qubit preparations.
pub const DEFAULT_PREPARATIONS: [Projector; 4] = [Projector::H, Projector::V, Projector::D, Projector::R];

/// `{H,V,D,R}^{⊗k}`, leftmost qubit slowest.
pub fn default_preparations(qubits: usize) -> Vec<Vec<Projector>> {
    let mut out = vec![Vec::new()];
    for _ in 0..qubits {
        out = out
            .into_iter()
            .flat_map(|p: Vec<Projector>| {
                DEFAULT_PREPARATIONS.into_iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn preparation_state(prep: &[Projector]) -> CMat {
    let v = prep.iter().fold(linalg::CVec::from_element(1, linalg::ONE), |acc, p| acc.kronecker(&p.vector()));
    linalg::outer(&v)
}

/// `χ` with `E(ρ) = Σ χ_mn P_m ρ P_n†` over unnormalized Paulis, so a
/// trace-preserving map has `Tr χ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    pub qubits: usize,
    pub chi: CMat,
    /// `max|Σ χ_mn P_n†P_m − I|` of the linear-inversion estimate, before
    /// projection onto the physical set.
    pub trace_preservation_residual: f64,
}

impl ProcessMatrix {
    pub fn fidelity_to(&self, ideal: &CMat) -> Result<f64> {
        fidelity(&self.chi, ideal)
    }

    /// Reconstructed map applied to `rho`.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let paulis = linalg::pauli_basis(self.qubits);
        let mut out = CMat::zeros(rho.nrows(), rho.ncols());
        for (m, pm) in paulis.iter().enumerate() {
            for (n, pn) in paulis.iter().enumerate() {
                let c = self.chi[(m, n)];
                if c.norm() > 0.0 {
                    out += (pm * rho * pn.adjoint()).map(|x| x * c);
                }
            }
        }
        out
    }
}

/// `χ` of a unitary: `u_m = Tr(P_m U)/d`, `χ = u u†`.
pub fn chi_of_unitary(u: &CMat) -> CMat {
    let d = u.nrows();
    let qubits = d.trailing_zeros() as usize;
    let coeffs: Vec<_> = linalg::pauli_basis(qubits)
        .iter()
        .map(|p| linalg::trace(&(p.adjoint() * u)) / d as f64)
        .collect();
    let v = linalg::CVec::from_vec(coeffs);
    linalg::outer(&v)
}

/// Linear inversion from (input, output) density pairs, then projection to
/// the PSD, unit-trace cone. Outputs of heralded processes must already be
/// renormalized.
pub fn process_tomography(pairs: &[(CMat, CMat)]) -> Result<ProcessMatrix> {
    let d = pairs.first().ok_or(Error::SingularPreparations)?.0.nrows();
    let qubits = d.trailing_zeros() as usize;
    let d2 = d * d;
    let vec_of = |m: &CMat| -> linalg::CVec { linalg::CVec::from_column_slice(m.as_slice()) };
    let mut rin = CMat::zeros(d2, pairs.len());
    let mut rout = CMat::zeros(d2, pairs.len());
    for (j, (a, b)) in pairs.iter().enumerate() {
        if a.nrows() != d || b.nrows() != d {
            return Err(Error::DimensionMismatch(a.nrows().max(b.nrows()), d));
        }
        rin.set_column(j, &vec_of(a));
        rout.set_column(j, &vec_of(b));
    }
    let svd = rin.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if svd.singular_values.len() < d2 || smin < 1e-10 * smax {
        return Err(Error::SingularPreparations);
    }
    let pinv = svd.pseudo_inverse(1e-12 * smax).map_err(|_| Error::SingularPreparations)?;
    // Superoperator on column-stacked vectors.
    let lambda = rout * pinv;

    let paulis = linalg::pauli_basis(qubits);
    let mut chi = CMat::zeros(d2, d2);
    for (m, pm) in paulis.iter().enumerate() {
        for (n, pn) in paulis.iter().enumerate() {
            // vec(P_m X P_n†) = (conj(P_n) ⊗ P_m) vec(X); these have Hilbert-Schmidt norm² d².
            let b = linalg::kron(&pn.conjugate(), pm);
            chi[(m, n)] = linalg::trace(&(b.adjoint() * &lambda)) / (d2 as f64);
        }
    }
    let mut tp = CMat::zeros(d, d);
    for (m, pm) in paulis.iter().enumerate() {
        for (n, pn) in paulis.iter().enumerate() {
            tp += (pn.adjoint() * pm).map(|x| x * chi[(m, n)]);
        }
    }
    let residual = linalg::max_abs_diff(&tp, &linalg::identity(d));
    Ok(ProcessMatrix { qubits, chi: linalg::project_to_density(&chi), trace_preservation_residual: residual })
}

/// Per-preparation state tomography followed by [`process_tomography`].
pub fn process_tomography_from_records(records: &[CountRecord]) -> Result<ProcessMatrix> {
    let mut pairs = Vec::new();
    for (key, group) in group_by_prep(records)? {
        let prep = group[0]
            .prep()?
            .ok_or_else(|| Error::Schema(format!("process record '{key}' has no preparation")))?;
        let out = state_tomography(&group)?;
        pairs.push((preparation_state(&prep), out.into_matrix()));
    }
    process_tomography(&pairs)
}
