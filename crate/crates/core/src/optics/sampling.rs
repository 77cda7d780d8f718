//! Synthetic count data from heralded experiments.

use super::experiment::OpticalExperiment;
use super::layouts::toffoli_target;
use super::source::SourceConfig;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::tomo::metrics::TruthTable;
use crate::tomo::records::{sample_records, Basis, CountRecord, Projector};
use rayon::prelude::*;

/// Heralded output for a product preparation, renormalized, with its herald probability.
pub fn heralded_state(exp: &OpticalExperiment, source: &SourceConfig, prep: &[Projector]) -> Result<(CMat, f64)> {
    let vectors: Vec<_> = prep.iter().map(|p| p.vector()).collect();
    let out = exp.heralded_output(source, &vectors)?;
    let p = out.herald_probability();
    let rho = out.normalized().ok_or_else(|| Error::InvalidParameter(format!("preparation {prep:?} is never heralded")))?;
    Ok((rho, p))
}

/// Poisson counts for every preparation and basis setting. `shots` is the
/// number of heralded events per setting, so counts have mean `shots · p`
/// with `p` the outcome probability given a herald.
pub fn sample_counts(
    exp: &OpticalExperiment,
    source: &SourceConfig,
    preps: &[Vec<Projector>],
    bases: &[Vec<Basis>],
    shots: u64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    let states = preps
        .par_iter()
        .map(|p| heralded_state(exp, source, p).map(|(rho, _)| (Some(p.clone()), rho)))
        .collect::<Result<Vec<_>>>()?;
    sample_records(&states, bases, shots, seed)
}

/// H/V preparations of every logical basis input, leftmost qubit slowest.
pub fn basis_inputs(qubits: usize) -> Vec<Vec<Projector>> {
    (0..1usize << qubits)
        .map(|j| {
            (0..qubits)
                .map(|q| if (j >> (qubits - 1 - q)) & 1 == 1 { Projector::V } else { Projector::H })
                .collect()
        })
        .collect()
}

/// Noise-free truth table: the Z-basis output distribution of each heralded basis input.
pub fn exact_truth_table(exp: &OpticalExperiment, source: &SourceConfig) -> Result<TruthTable> {
    let inputs = basis_inputs(exp.qubits());
    let rows = inputs
        .par_iter()
        .map(|p| heralded_state(exp, source, p).map(|(rho, _)| (0..rho.nrows()).map(|k| rho[(k, k)].re.max(0.0)).collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    TruthTable::new(exp.qubits(), rows)
}

/// Flipping contrasts of the Toffoli layout for controls `00, 01, 10, 11`.
pub fn toffoli_contrasts(exp: &OpticalExperiment, source: &SourceConfig) -> Result<[f64; 4]> {
    let table = exact_truth_table(exp, source)?;
    let ideal = TruthTable::of_unitary(&toffoli_target())?;
    let mut out = [0.0; 4];
    for (c, slot) in out.iter_mut().enumerate() {
        *slot = table.flipping_contrast(&ideal, c)?;
    }
    Ok(out)
}
