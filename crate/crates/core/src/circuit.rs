//! Ordered gate lists and their evaluation.

use crate::error::{Error, Result};
use crate::gate::PlacedGate;
use crate::linalg::{self, CMat, CVec, ZERO};
use crate::register::{RegisterShape, StateVector, NORM_TOL};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    shape: RegisterShape,
    gates: Vec<PlacedGate>,
}

impl Circuit {
    pub fn new(shape: RegisterShape) -> Self {
        Self { shape, gates: Vec::new() }
    }

    pub fn from_gates(shape: RegisterShape, gates: Vec<PlacedGate>) -> Result<Self> {
        let mut c = Self::new(shape);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, g: PlacedGate) -> Result<&mut Self> {
        g.validate(&self.shape)?;
        self.gates.push(g);
        Ok(self)
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = PlacedGate>) -> Result<&mut Self> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn gates(&self) -> &[PlacedGate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// `self` followed in time by `other`.
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape.dims(),
                other.shape.dims()
            )));
        }
        let mut out = self.clone();
        out.gates.extend(other.gates.iter().cloned());
        Ok(out)
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_multi_carrier()).count()
    }

    pub fn single_carrier_gate_count(&self) -> usize {
        self.gates.len() - self.two_qubit_gate_count()
    }

    pub fn cost(&self) -> CostReport {
        CostReport {
            two_qubit_gate_count: self.two_qubit_gate_count(),
            single_carrier_gate_count: self.single_carrier_gate_count(),
            max_carrier_dimension: self.shape.max_dim(),
            ancilla_count: 0,
        }
    }

    /// Full-space unitary; the first gate in the list acts first.
    pub fn unitary(&self) -> Result<CMat> {
        let n = self.shape.total_dim();
        let mut u = linalg::identity(n);
        for g in &self.gates {
            u = left_multiply(g, &self.shape, &u)?;
        }
        Ok(u)
    }
}

fn left_multiply(g: &PlacedGate, shape: &RegisterShape, m: &CMat) -> Result<CMat> {
    let entries = g.embedded_entries(shape)?;
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for (row, col, v) in entries {
        for k in 0..m.ncols() {
            let x = m[(col, k)];
            if x != ZERO {
                out[(row, k)] += v * x;
            }
        }
    }
    Ok(out)
}

pub fn unitary_of(c: &Circuit) -> Result<CMat> {
    c.unitary()
}

pub fn apply_gate(g: &PlacedGate, s: &StateVector) -> Result<StateVector> {
    let entries = g.embedded_entries(s.shape())?;
    let mut amps = CVec::from_element(s.shape().total_dim(), ZERO);
    for (row, col, v) in entries {
        amps[row] += v * s.amplitudes()[col];
    }
    let mut out = s.clone();
    *out.amplitudes_mut() = amps;
    Ok(out)
}

pub fn apply(c: &Circuit, s: &StateVector) -> Result<StateVector> {
    if c.shape() != s.shape() {
        return Err(Error::ShapeMismatch(format!(
            "circuit {:?} vs state {:?}",
            c.shape().dims(),
            s.shape().dims()
        )));
    }
    let before = s.norm_squared();
    let mut out = s.clone();
    for g in c.gates() {
        out = apply_gate(g, &out)?;
    }
    debug_assert!((out.norm_squared() - before).abs() <= NORM_TOL);
    Ok(out)
}

/// True when `u = c·v` for some unit scalar `c`, with `c` fixed by the
/// largest-magnitude entry of `v`.
pub fn equal_up_to_global_phase(u: &CMat, v: &CMat, tol: f64) -> Result<bool> {
    if u.shape() != v.shape() {
        return Err(Error::DimensionMismatch(u.nrows(), v.nrows()));
    }
    let (idx, largest) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, x)| (i, *x))
        .unwrap_or((0, ZERO));
    if largest.norm() == 0.0 {
        return Ok(u.iter().all(|x| x.norm() <= tol));
    }
    let ratio = u.as_slice()[idx] / largest;
    if ratio.norm() == 0.0 {
        return Ok(false);
    }
    let phase = ratio / ratio.norm();
    Ok(linalg::max_abs_diff(u, &v.map(|x| x * phase)) <= tol)
}

/// Per-carrier phases and a global phase with `(⊗ Z_φ)·U = g·V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalPhases {
    /// `Z_φ` angle for each carrier, leftmost first, in `(-π, π]`.
    pub phases: Vec<f64>,
    pub global_phase: f64,
}

pub const LOCAL_PHASE_TOL: f64 = 1e-9;

fn wrap(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a > std::f64::consts::PI {
        a - TAU
    } else {
        a
    }
}

fn max_off_diagonal(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Solves for local `Z_φ` phases relating two diagonal multi-qubit unitaries.
/// Returns `Ok(None)` when no product of local phases relates them.
pub fn local_phase_equivalence(u: &CMat, v: &CMat) -> Result<Option<LocalPhases>> {
    if u.shape() != v.shape() || !u.is_square() {
        return Err(Error::DimensionMismatch(u.nrows(), v.nrows()));
    }
    let n = u.nrows();
    if !n.is_power_of_two() {
        return Err(Error::InvalidShape(format!("dimension {n} is not a qubit register")));
    }
    for m in [u, v] {
        let off = max_off_diagonal(m);
        if off > LOCAL_PHASE_TOL {
            return Err(Error::NotDiagonal(off));
        }
    }
    let qubits = n.trailing_zeros() as usize;
    let mut delta = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = (u[(k, k)], v[(k, k)]);
        if (a.norm() - b.norm()).abs() > LOCAL_PHASE_TOL || a.norm() == 0.0 {
            return Ok(None);
        }
        delta.push((b / a).arg());
    }
    let global = delta[0];
    let phases: Vec<f64> = (0..qubits)
        .map(|q| wrap(delta[1 << (qubits - 1 - q)] - global))
        .collect();
    for (k, &dk) in delta.iter().enumerate() {
        let predicted: f64 = (0..qubits)
            .filter(|q| (k >> (qubits - 1 - q)) & 1 == 1)
            .map(|q| phases[q])
            .sum();
        if wrap(dk - global - predicted).abs() > 1e-8 {
            return Ok(None);
        }
    }
    Ok(Some(LocalPhases { phases, global_phase: wrap(global) }))
}

/// Applies the local phase correction `(⊗ Z_φ)` to a diagonal unitary.
pub fn apply_local_phases(u: &CMat, lp: &LocalPhases) -> CMat {
    let n = u.nrows();
    let qubits = lp.phases.len();
    let mut out = u.clone();
    for k in 0..n {
        let angle: f64 = (0..qubits)
            .filter(|q| (k >> (qubits - 1 - q)) & 1 == 1)
            .map(|q| lp.phases[q])
            .sum();
        for j in 0..n {
            out[(k, j)] *= Complex64::from_polar(1.0, angle);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub two_qubit_gate_count: usize,
    pub single_carrier_gate_count: usize,
    pub max_carrier_dimension: usize,
    pub ancilla_count: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{cx, cz, GateMatrix};
    use crate::linalg::{diag, expi, ONE};
    use proptest::prelude::*;

    #[test]
    fn empty_circuit_is_identity() {
        let shape = RegisterShape::new(vec![3, 2]).unwrap();
        let c = Circuit::new(shape.clone());
        let s = StateVector::basis(shape, &[2, 1]).unwrap();
        assert_eq!(apply(&c, &s).unwrap(), s);
        assert!(linalg::max_abs_diff(&c.unitary().unwrap(), &linalg::identity(6)) == 0.0);
    }

    #[test]
    fn level_swap_is_an_involution() {
        let shape = RegisterShape::new(vec![3]).unwrap();
        let c = Circuit::from_gates(
            shape,
            vec![PlacedGate::swap(0, 0, 2), PlacedGate::swap(0, 0, 2)],
        )
        .unwrap();
        assert!(linalg::max_abs_diff(&c.unitary().unwrap(), &linalg::identity(3)) < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let c = Circuit::new(RegisterShape::qubits(2));
        let s = StateVector::basis(RegisterShape::qubits(3), &[0, 0, 0]).unwrap();
        assert!(matches!(apply(&c, &s), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn global_phase_comparison() {
        let u = cz(0, 1);
        let u = crate::gate::embed_gate(&u, &RegisterShape::qubits(2)).unwrap();
        let v = u.map(|x| x * expi(std::f64::consts::PI / 7.0));
        assert!(equal_up_to_global_phase(&u, &v, 1e-12).unwrap());
        let x = linalg::pauli_x();
        assert!(!equal_up_to_global_phase(&linalg::identity(2), &x, 1e-9).unwrap());
        assert!(equal_up_to_global_phase(&linalg::identity(2), &linalg::identity(3), 1e-9).is_err());
    }

    #[test]
    fn local_phases_relate_shifted_phase_to_controlled_phase() {
        let theta = 0.7;
        let u = diag(&[ONE, expi(theta), ONE, ONE]);
        let v = diag(&[ONE, ONE, ONE, expi(-theta)]);
        let lp = local_phase_equivalence(&u, &v).unwrap().unwrap();
        assert!(lp.phases[0].abs() < 1e-12);
        assert!((lp.phases[1] + theta).abs() < 1e-12);
        assert!(lp.global_phase.abs() < 1e-12);
        assert!(linalg::max_abs_diff(&apply_local_phases(&u, &lp), &v) < 1e-12);
    }

    #[test]
    fn local_phases_trivial_and_impossible() {
        let u = diag(&[ONE, ONE, ONE, -ONE]);
        let lp = local_phase_equivalence(&u, &u).unwrap().unwrap();
        assert!(lp.phases.iter().all(|p| p.abs() < 1e-12));
        assert!(local_phase_equivalence(&u, &linalg::identity(4)).unwrap().is_none());
        assert!(matches!(
            local_phase_equivalence(&linalg::hadamard(), &linalg::identity(2)),
            Err(Error::NotDiagonal(_))
        ));
    }

    fn arb_gate(dims: Vec<usize>) -> impl Strategy<Value = PlacedGate> {
        let n = dims.len();
        let dims2 = dims.clone();
        prop_oneof![
            (0..n, 0usize..5, 0usize..5).prop_filter_map("levels", move |(q, a, b)| {
                let d = dims2[q];
                (a < d && b < d && a != b).then(|| PlacedGate::swap(q, a, b))
            }),
            (0..n, -3.0f64..3.0).prop_map(|(q, t)| PlacedGate::single(GateMatrix::phase(t), q)),
            (0..n).prop_map(|q| PlacedGate::single(GateMatrix::h(), q)),
            (0..n, 0..n, 0usize..2).prop_filter_map("distinct", |(a, b, v)| {
                (a != b).then(|| {
                    PlacedGate::controlled(GateMatrix::x(), crate::gate::Control::new(a, v), b)
                })
            }),
        ]
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        prop::collection::vec(2usize..=5, 2..4).prop_flat_map(|dims| {
            let shape = RegisterShape::new(dims.clone()).unwrap();
            prop::collection::vec(arb_gate(dims), 0..=20)
                .prop_map(move |gates| Circuit::from_gates(shape.clone(), gates).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn random_circuits_are_unitary(c in arb_circuit()) {
            let u = c.unitary().unwrap();
            prop_assert!(linalg::unitarity_deviation(&u) <= 1e-9);
        }

        #[test]
        fn composition_multiplies_in_time_order(a in arb_circuit()) {
            let shape = a.shape().clone();
            let mut b = Circuit::new(shape.clone());
            b.push(PlacedGate::single(GateMatrix::h(), 0)).unwrap();
            if shape.carriers() > 1 {
                b.push(cx(0, 1)).unwrap();
            }
            let ab = a.then(&b).unwrap().unitary().unwrap();
            let expect = b.unitary().unwrap() * a.unitary().unwrap();
            prop_assert!(linalg::max_abs_diff(&ab, &expect) <= 1e-9);
        }

        #[test]
        fn shelved_targets_are_fixed(c in arb_circuit()) {
            for g in c.gates() {
                if let PlacedGate::Matrix { targets, .. } = g {
                    let u = crate::gate::embed_gate(g, c.shape()).unwrap();
                    for i in 0..c.shape().total_dim() {
                        let digits = c.shape().digits_of(i);
                        if targets.iter().any(|&t| digits[t] >= 2) {
                            for row in 0..u.nrows() {
                                let expect = if row == i { 1.0 } else { 0.0 };
                                prop_assert_eq!(u[(row, i)], num_complex::Complex64::new(expect, 0.0));
                            }
                        }
                    }
                }
            }
        }
    }
}
