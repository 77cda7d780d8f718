//! Constrained least-squares state tomography.

use super::records::{CountRecord, MeasurementSetting};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use nalgebra::DMatrix;
use std::collections::{BTreeMap, BTreeSet};

const MAX_ITERATIONS: usize = 20_000;
const STEP_TOL: f64 = 1e-14;

/// Observed frequency of each projector, normalized within its outcome group.
pub fn frequencies(records: &[CountRecord]) -> Result<Vec<(MeasurementSetting, f64)>> {
    let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
    for r in records {
        r.validate()?;
        *totals.entry(r.setting_id.as_str()).or_default() += r.counts;
    }
    if totals.values().all(|&t| t == 0) {
        return Err(Error::NoCounts);
    }
    let mut out = Vec::new();
    for r in records {
        let t = totals[r.setting_id.as_str()];
        if t > 0 {
            out.push((r.setting()?, r.counts as f64 / t as f64));
        }
    }
    Ok(out)
}

/// Minimizes `Σ (Tr(Πₛρ) − fₛ)²` over density matrices by projected gradient
/// descent, started from the projected linear-inversion estimate. Records must
/// share one preparation and cover all `6^k` projectors.
pub fn state_tomography(records: &[CountRecord]) -> Result<DensityMatrix> {
    let first = records.first().ok_or(Error::NoCounts)?;
    let qubits = first.setting()?.qubits();
    let prep = first.prep_key()?;
    if records.iter().any(|r| r.prep_key().ok() != Some(prep)) {
        return Err(Error::Schema("state tomography records mix preparations".into()));
    }
    let present: BTreeSet<MeasurementSetting> = records.iter().map(|r| r.setting()).collect::<Result<_>>()?;
    let missing: Vec<String> = MeasurementSetting::all(qubits)
        .into_iter()
        .filter(|s| !present.contains(s))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingSettings(missing.join(",")));
    }
    let data = frequencies(records)?;
    if data.iter().any(|(s, _)| s.qubits() != qubits) {
        return Err(Error::Schema("records disagree on qubit count".into()));
    }
    least_squares(qubits, &data)
}

/// Real design matrix over the orthonormal Hermitian basis `Pₖ/√d`.
fn design(qubits: usize, data: &[(MeasurementSetting, f64)]) -> (Vec<CMat>, DMatrix<f64>) {
    let d = (1usize << qubits) as f64;
    let basis: Vec<CMat> = linalg::pauli_basis(qubits).into_iter().map(|p| p.scale(1.0 / d.sqrt())).collect();
    let a = DMatrix::from_fn(data.len(), basis.len(), |s, k| {
        let pi = data[s].0.projector();
        linalg::trace(&(&pi * &basis[k])).re
    });
    (basis, a)
}

pub fn least_squares(qubits: usize, data: &[(MeasurementSetting, f64)]) -> Result<DensityMatrix> {
    let (basis, a) = design(qubits, data);
    let f = DMatrix::from_fn(data.len(), 1, |s, _| data[s].1);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let coeffs = svd
        .solve(&f, 1e-12 * smax)
        .map_err(|e| Error::InvalidParameter(format!("least squares: {e}")))?;
    let dim = 1usize << qubits;
    let mut rho = CMat::zeros(dim, dim);
    for (k, b) in basis.iter().enumerate() {
        rho += b.scale(coeffs[(k, 0)]);
    }
    let mut rho = linalg::project_to_density(&rho);

    let projectors: Vec<CMat> = data.iter().map(|(s, _)| s.projector()).collect();
    let step = 1.0 / (2.0 * smax * smax);
    for _ in 0..MAX_ITERATIONS {
        let mut grad = CMat::zeros(dim, dim);
        for (pi, (_, fs)) in projectors.iter().zip(data) {
            let res = linalg::trace(&(pi * &rho)).re - fs;
            grad += pi.scale(2.0 * res);
        }
        let next = linalg::project_to_density(&(&rho - grad.scale(step)));
        let moved = (&next - &rho).norm();
        rho = next;
        if moved < STEP_TOL {
            break;
        }
    }
    DensityMatrix::new(rho)
}

/// Expected frequencies for `rho`, in the same order as [`MeasurementSetting::all`].
pub fn ideal_frequencies(rho: &CMat, qubits: usize) -> Vec<(MeasurementSetting, f64)> {
    MeasurementSetting::all(qubits)
        .into_iter()
        .map(|s| {
            let p = s.probability(rho);
            (s, p)
        })
        .collect()
}
