//! Shortcut circuits that shelve target information in levels `≥ 2`, their
//! qubit-only counterparts, and dense ideal-gate oracles.
//!
//! Register layout for every builder here is `(C_n, …, C_1, T)`: controls
//! leftmost (most significant), target last. [`FirePattern`] bits are listed
//! `C_1` first.
//!
//! Control senses follow one rule: the conjugating `CX(C_i → T)` fires at
//! `1 − p_i` and the central gate fires at `p_n`. With that rule every
//! construction triggers exactly on its fire pattern.

use crate::circuit::{apply, Circuit, CostReport};
use crate::error::{Error, Result};
use crate::gate::{cx, Control, GateMatrix, PlacedGate};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::register::{RegisterShape, StateVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FirePattern(Vec<usize>);

impl FirePattern {
    /// Bits for `C_1, …, C_n`.
    pub fn new(bits: Vec<usize>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!("fire bit {b} not in {{0,1}}")));
        }
        Ok(Self(bits))
    }

    /// Parses a bit string written `C_1` first, e.g. `"011"`.
    pub fn parse(text: &str) -> Result<Self> {
        let bits = text
            .chars()
            .map(|c| c.to_digit(2).map(|d| d as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidParameter(format!("fire pattern '{text}' is not a bit string")))?;
        Self::new(bits)
    }

    pub fn all_ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Every pattern of length `n`, `C_1` varying fastest.
    pub fn enumerate(n: usize) -> impl Iterator<Item = FirePattern> {
        (0..1usize << n).map(move |m| FirePattern((0..n).map(|i| (m >> i) & 1).collect()))
    }

    pub fn bits(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bit of control `C_i` (1-based).
    pub fn bit(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    /// Control digits in register order `C_n … C_1`.
    pub fn register_digits(&self) -> Vec<usize> {
        self.0.iter().rev().copied().collect()
    }
}

impl std::fmt::Display for FirePattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Shelf level used by the `i`-th conjugating layer (1-based): `X_a` swaps
/// 0↔2, later layers take a fresh level each.
fn shelf_swap(carrier: usize, i: usize, first_free: usize) -> PlacedGate {
    PlacedGate::swap(carrier, 0, first_free + i - 1)
}

fn shelving_prefix(n_layers: usize, p: &FirePattern, n: usize) -> Vec<PlacedGate> {
    let target = n;
    let mut prefix = Vec::with_capacity(2 * n_layers);
    for i in 1..=n_layers {
        prefix.push(shelf_swap(target, i, 2));
        prefix.push(PlacedGate::controlled(
            GateMatrix::x(),
            Control::new(n - i, 1 - p.bit(i)),
            target,
        ));
    }
    prefix
}

fn sandwich(shape: RegisterShape, prefix: Vec<PlacedGate>, center: Vec<PlacedGate>) -> Result<Circuit> {
    let mut c = Circuit::new(shape);
    c.extend(prefix.iter().cloned())?;
    c.extend(center)?;
    c.extend(prefix.into_iter().rev())?;
    Ok(c)
}

/// Toffoli-sign on `(C_2, C_1, T)` with a qutrit target: −1 exactly on `|1,0,1⟩`.
pub fn build_ts() -> Circuit {
    build_n_toffoli_sign(2, &FirePattern(vec![0, 1])).expect("n = 2 is valid")
}

/// Controlled-`Z_θ` on `(C_1, T)`, phase `e^{iθ}` exactly on `|fire, 1⟩`.
pub fn build_cu_theta(theta: f64, fire: usize) -> Result<Circuit> {
    build_cn_z_theta(1, theta, &FirePattern::new(vec![fire])?)
}

/// `n`-control Toffoli-sign with an `(n+1)`-level target and `2n − 1` two-qubit gates.
pub fn build_n_toffoli_sign(n: usize, p: &FirePattern) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n-Toffoli needs n ≥ 2, got {n}")));
    }
    check_pattern(n, p)?;
    let mut dims = vec![2; n];
    dims.push(n + 1);
    let center = PlacedGate::controlled(GateMatrix::z(), Control::new(0, p.bit(n)), n);
    sandwich(RegisterShape::new(dims)?, shelving_prefix(n - 1, p, n), vec![center])
}

/// `C^n Z_θ` with an `(n+2)`-level target and `2n` two-qubit gates.
pub fn build_cn_z_theta(n: usize, theta: f64, p: &FirePattern) -> Result<Circuit> {
    build_cn_z_theta_with(n, theta, p, false)
}

/// As [`build_cn_z_theta`]; with `central_two_qubit` the centre is a
/// `CZ_θ(C_n → T)`, giving an `(n+1)`-level target and `2n − 1` two-qubit gates.
pub fn build_cn_z_theta_with(
    n: usize,
    theta: f64,
    p: &FirePattern,
    central_two_qubit: bool,
) -> Result<Circuit> {
    if n < 1 {
        return Err(Error::InvalidParameter("C^n Z_θ needs n ≥ 1".into()));
    }
    check_pattern(n, p)?;
    let (layers, center, target_dim) = if central_two_qubit {
        let g = PlacedGate::controlled(GateMatrix::phase(theta), Control::new(0, p.bit(n)), n);
        (n - 1, g, n + 1)
    } else {
        (n, PlacedGate::single(GateMatrix::phase(theta), n), n + 2)
    };
    let mut dims = vec![2; n];
    dims.push(target_dim.max(2));
    sandwich(RegisterShape::new(dims)?, shelving_prefix(layers, p, n), vec![center])
}

fn check_pattern(n: usize, p: &FirePattern) -> Result<()> {
    if p.len() != n {
        return Err(Error::InvalidParameter(format!(
            "fire pattern has {} bits for {n} controls",
            p.len()
        )));
    }
    Ok(())
}

/// `U = e^{iα} · V · Z_θ · V†`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition2x2 {
    pub v: CMat,
    pub theta: f64,
    pub alpha: f64,
}

impl SpectralDecomposition2x2 {
    pub fn reconstruct(&self) -> CMat {
        let z = linalg::diag(&[ONE, linalg::expi(self.theta)]);
        (&self.v * z * self.v.adjoint()).map(|x| x * linalg::expi(self.alpha))
    }
}

fn unit_eigenvector(u: &CMat, lambda: Complex64) -> Option<nalgebra::DVector<Complex64>> {
    let candidates = [
        [u[(0, 1)], lambda - u[(0, 0)]],
        [lambda - u[(1, 1)], u[(1, 0)]],
    ];
    let best = candidates
        .iter()
        .max_by(|a, b| (a[0].norm() + a[1].norm()).total_cmp(&(b[0].norm() + b[1].norm())))?;
    let norm = (best[0].norm_sqr() + best[1].norm_sqr()).sqrt();
    if norm < 1e-12 {
        return None;
    }
    let mut v = nalgebra::DVector::from_row_slice(&[best[0] / norm, best[1] / norm]);
    let pivot = if v[0].norm() > 1e-12 { v[0] } else { v[1] };
    let phase = pivot.conj() / pivot.norm();
    v *= phase;
    Some(v)
}

pub fn spectral_decompose_2x2(u: &CMat) -> Result<SpectralDecomposition2x2> {
    if u.shape() != (2, 2) {
        return Err(Error::DimensionMismatch(u.nrows(), 2));
    }
    let dev = linalg::unitarity_deviation(u);
    if dev > 1e-9 {
        return Err(Error::NotUnitary(dev));
    }
    let tr = u[(0, 0)] + u[(1, 1)];
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let disc = (tr * tr - det * 4.0).sqrt();
    let mut lambdas = [(tr + disc) / 2.0, (tr - disc) / 2.0];
    // Smaller argument in [0, 2π) first, so an eigenvalue of 1 gives α = 0.
    let angle = |z: &Complex64| {
        let a = z.arg().rem_euclid(TAU);
        if TAU - a < 1e-12 { 0.0 } else { a }
    };
    lambdas.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
    let alpha = angle(&lambdas[0]);
    let theta = (lambdas[1] / lambdas[0]).arg().rem_euclid(TAU);
    let v = if (lambdas[0] - lambdas[1]).norm() < 1e-9 {
        linalg::identity(2)
    } else {
        let v0 = unit_eigenvector(u, lambdas[0]).expect("distinct eigenvalues");
        let v1 = match unit_eigenvector(u, lambdas[1]) {
            Some(v1) if (v0.adjoint() * &v1)[(0, 0)].norm() < 1e-9 => v1,
            _ => nalgebra::DVector::from_row_slice(&[-v0[1].conj(), v0[0].conj()]),
        };
        let mut v = CMat::zeros(2, 2);
        v.set_column(0, &v0);
        v.set_column(1, &v1);
        v
    };
    let theta = if (lambdas[0] - lambdas[1]).norm() < 1e-9 { 0.0 } else { theta };
    let d = SpectralDecomposition2x2 { v, theta, alpha };
    let residual = linalg::max_abs_diff(&d.reconstruct(), u);
    if residual > 1e-9 {
        return Err(Error::InvalidParameter(format!("decomposition residual {residual:e}")));
    }
    Ok(d)
}

/// `C^n(e^{−iα} U)` on its fire pattern; `α` is returned so the residual
/// controlled phase is never dropped silently.
pub fn build_cn_u(n: usize, u: &CMat, p: &FirePattern) -> Result<(Circuit, f64)> {
    let d = spectral_decompose_2x2(u)?;
    let core = build_cn_z_theta(n, d.theta, p)?;
    let v = GateMatrix::custom(d.v.clone())?;
    let mut c = Circuit::new(core.shape().clone());
    c.push(PlacedGate::single(v.adjoint(), n))?;
    c.extend(core.gates().iter().cloned())?;
    c.push(PlacedGate::single(v, n))?;
    Ok((c, d.alpha))
}

/// Adds `n` controls `D_1 … D_n` to a circuit whose action is conditioned on
/// its carrier 0 (`C_1`) being 1. The new carriers are prepended, `C_1` gains
/// `n` fresh shelf levels, and exactly `2n` two-qubit gates are added.
pub fn add_controls(inner: &Circuit, n: usize, q: &FirePattern) -> Result<Circuit> {
    add_controls_at(inner, 0, n, q)
}

/// As [`add_controls`] with `C_1` at an arbitrary carrier. Shelf levels start
/// at `C_1`'s current dimension, so repeated calls compose.
pub fn add_controls_at(inner: &Circuit, c1: usize, n: usize, q: &FirePattern) -> Result<Circuit> {
    check_pattern(n, q)?;
    if c1 >= inner.shape().carriers() {
        return Err(Error::InvalidParameter(format!("carrier {c1} out of range")));
    }
    if n == 0 {
        return Ok(inner.clone());
    }
    let first_free = inner.shape().dim(c1);
    let mut wide_dims = inner.shape().dims().to_vec();
    wide_dims[c1] = first_free + n;
    let wide = Circuit::from_gates(RegisterShape::new(wide_dims)?, inner.gates().to_vec())?;
    if !fires_only_on_level_one(&wide, c1, first_free)? {
        return Err(Error::UnsupportedInner(
            "inner acts when C_1 is not 1; rewrite it to fire on C_1 = 1".into(),
        ));
    }
    let mut dims = vec![2; n];
    dims.extend_from_slice(inner.shape().dims());
    dims[n + c1] = first_free + n;
    let target = n + c1;
    let mut prefix = Vec::with_capacity(2 * n);
    for i in 1..=n {
        prefix.push(shelf_swap(target, i, first_free));
        prefix.push(PlacedGate::controlled(
            GateMatrix::x(),
            Control::new(n - i, 1 - q.bit(i)),
            target,
        ));
    }
    let body: Vec<PlacedGate> = inner.gates().iter().map(|g| g.remapped(|k| k + n)).collect();
    sandwich(RegisterShape::new(dims)?, prefix, body)
}

/// Inputs that can reach the inner circuit with its controls unmet must be
/// fixed points: `C_1` at 0 or at a fresh level `≥ first_free`, every other
/// carrier in `{0,1}`.
fn fires_only_on_level_one(c: &Circuit, c1: usize, first_free: usize) -> Result<bool> {
    let shape = c.shape();
    for j in 0..shape.total_dim() {
        let digits = shape.digits_of(j);
        let reachable = (digits[c1] == 0 || digits[c1] >= first_free)
            && digits.iter().enumerate().all(|(k, &d)| k == c1 || d < 2);
        if !reachable {
            continue;
        }
        let out = apply(c, &StateVector::basis(shape.clone(), &digits)?)?;
        if (out.amplitudes()[j] - ONE).norm() > 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Toffoli flipping `T` exactly when `(C_2, C_1) = flip_pattern`, built from
/// [`build_ts`] with Hadamards on `T` and `X` on controls.
pub fn toffoli_from_ts(flip_pattern: (usize, usize)) -> Result<Circuit> {
    let (f2, f1) = flip_pattern;
    if f2 > 1 || f1 > 1 {
        return Err(Error::InvalidParameter(format!("flip pattern {flip_pattern:?}")));
    }
    let ts = build_ts();
    let mut outer = Vec::new();
    if f2 == 0 {
        outer.push(PlacedGate::single(GateMatrix::x(), 0));
    }
    if f1 == 1 {
        outer.push(PlacedGate::single(GateMatrix::x(), 1));
    }
    outer.push(PlacedGate::single(GateMatrix::h(), 2));
    sandwich(ts.shape().clone(), outer, ts.gates().to_vec())
}

/// Textbook qubit-only Toffoli on `(C_2, C_1, T)`: six CNOTs with H, T and T†.
pub fn textbook_toffoli_6cnot() -> Circuit {
    let (a, b, t) = (0, 1, 2);
    let single = |g: GateMatrix, q| PlacedGate::single(g, q);
    Circuit::from_gates(
        RegisterShape::qubits(3),
        vec![
            single(GateMatrix::h(), t),
            cx(b, t),
            single(GateMatrix::tdg(), t),
            cx(a, t),
            single(GateMatrix::t(), t),
            cx(b, t),
            single(GateMatrix::tdg(), t),
            cx(a, t),
            single(GateMatrix::t(), b),
            single(GateMatrix::t(), t),
            single(GateMatrix::h(), t),
            cx(a, b),
            single(GateMatrix::t(), a),
            single(GateMatrix::tdg(), b),
            cx(a, b),
        ],
    )
    .expect("valid qubit circuit")
}

/// Dense ideal: `gate` on the trailing target qubits iff `C_i = p_i` for all
/// controls. Layout `(C_n, …, C_1, targets…)`.
pub fn ideal_multi_controlled(n: usize, gate: &CMat, p: &FirePattern) -> Result<CMat> {
    check_pattern(n, p)?;
    let k = gate.nrows();
    if !gate.is_square() || !k.is_power_of_two() || k < 2 {
        return Err(Error::InvalidParameter("gate must be 2^k square".into()));
    }
    let blocks = 1usize << n;
    let fire_block = p
        .register_digits()
        .iter()
        .fold(0usize, |acc, &b| acc * 2 + b);
    let mut u = linalg::identity(blocks * k);
    u.view_mut((fire_block * k, fire_block * k), (k, k)).copy_from(gate);
    Ok(u)
}

/// Lifts a unitary on the qubit subspace (every carrier in `{0,1}`) to the full
/// shape, acting as the identity on every basis state with a shelf level.
/// Shortcut circuits only match this on the qubit block; use
/// [`restrict_to_qubits`] to compare them.
pub fn embed_qubit_unitary(ideal: &CMat, shape: &RegisterShape) -> Result<CMat> {
    let sub = shape.qubit_subspace();
    if ideal.nrows() != sub.len() {
        return Err(Error::DimensionMismatch(ideal.nrows(), sub.len()));
    }
    let total = shape.total_dim();
    let mut u = linalg::identity(total);
    for &i in &sub {
        u[(i, i)] = ZERO;
    }
    for (a, &i) in sub.iter().enumerate() {
        for (b, &j) in sub.iter().enumerate() {
            u[(i, j)] = ideal[(a, b)];
        }
    }
    Ok(u)
}

/// Restricts a full-space unitary to the qubit subspace.
pub fn restrict_to_qubits(u: &CMat, shape: &RegisterShape) -> CMat {
    let sub = shape.qubit_subspace();
    CMat::from_fn(sub.len(), sub.len(), |a, b| u[(sub[a], sub[b])])
}

/// `C¹(U_k)` on `(C_1, T_1 … T_k)` firing on `C_1 = 1`: phase `θ` on `T_1`
/// and `X` on every further target. Returns the circuit and `U_k`.
pub fn controlled_fixture(k: usize, theta: f64) -> Result<(Circuit, CMat)> {
    if k == 0 {
        return Err(Error::InvalidParameter("fixture needs at least one target".into()));
    }
    let mut gates = vec![PlacedGate::controlled(GateMatrix::phase(theta), Control::on(0), 1)];
    let mut factors = vec![phase_gate(theta)];
    for t in 2..=k {
        gates.push(cx(0, t));
        factors.push(linalg::pauli_x());
    }
    let c = Circuit::from_gates(RegisterShape::qubits(k + 1), gates)?;
    Ok((c, linalg::kron_all(&factors)))
}

/// Oracle for [`add_controls`] applied to a `C_1 = 1` inner gate `u`: the
/// layout `(D_n, …, D_1, C_1, targets)` is an `(n+1)`-control gate with
/// pattern `(1, q_1, …, q_n)`.
pub fn added_controls_oracle(u: &CMat, q: &FirePattern) -> Result<CMat> {
    let mut bits = vec![1];
    bits.extend_from_slice(q.bits());
    ideal_multi_controlled(q.len() + 1, u, &FirePattern::new(bits)?)
}

/// Comparison of a shortcut circuit with its qubit-level oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    /// `max|U_qubit − ideal|` over the qubit block.
    pub qubit_block: f64,
    /// Largest probability any qubit input loses to shelf levels.
    pub leakage: f64,
    /// `max|U − I|` over shelf-level inputs. Informational only: shelf
    /// inputs may pick up signs, and they never occur from qubit inputs.
    pub shelf_block: f64,
}

impl OracleCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.qubit_block <= tol && self.leakage <= tol
    }
}

pub fn check_against_oracle(c: &Circuit, ideal: &CMat) -> Result<OracleCheck> {
    let shape = c.shape();
    let u = c.unitary()?;
    let sub = shape.qubit_subspace();
    if ideal.nrows() != sub.len() {
        return Err(Error::DimensionMismatch(ideal.nrows(), sub.len()));
    }
    let qubit_block = linalg::max_abs_diff(&restrict_to_qubits(&u, shape), ideal);
    let leakage = sub
        .iter()
        .map(|&j| (1.0 - sub.iter().map(|&i| u[(i, j)].norm_sqr()).sum::<f64>()).abs())
        .fold(0.0, f64::max);
    let in_sub: std::collections::BTreeSet<usize> = sub.iter().copied().collect();
    let mut shelf_block: f64 = 0.0;
    for j in (0..shape.total_dim()).filter(|j| !in_sub.contains(j)) {
        for i in 0..shape.total_dim() {
            let e = if i == j { ONE } else { ZERO };
            shelf_block = shelf_block.max((u[(i, j)] - e).norm());
        }
    }
    Ok(OracleCheck { qubit_block, leakage, shelf_block })
}

/// Diagonal sign/phase gate on the target: `diag(1, e^{iθ})`.
pub fn phase_gate(theta: f64) -> CMat {
    linalg::diag(&[ONE, linalg::expi(theta)])
}

pub fn z_gate() -> CMat {
    phase_gate(PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QubitOnlyKind {
    /// `n`-control Toffoli.
    NT,
    /// `n`-control unitary.
    CnU,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitOnlyCost {
    pub kind: QubitOnlyKind,
    pub n: usize,
    pub report: CostReport,
    pub formula: String,
    pub note: String,
}

pub const FIVE_CONTROL_COMPARISON: &str =
    "both require 50 two-qubit gates plus 4 ancilla qubits";

/// Gate cost of the best known qubit-only decompositions with `n − 1` ancillas.
pub fn qubit_only_cost(kind: QubitOnlyKind, n: usize) -> Result<QubitOnlyCost> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("qubit-only cost needs n ≥ 2, got {n}")));
    }
    let (gates, formula) = match kind {
        QubitOnlyKind::NT => (12 * n - 11, "12n-11"),
        QubitOnlyKind::CnU => (12 * n - 10, "12n-10"),
    };
    let note = if n == 5 {
        format!("published five-control comparison: \"{FIVE_CONTROL_COMPARISON}\"")
    } else {
        String::new()
    };
    Ok(QubitOnlyCost {
        kind,
        n,
        report: CostReport {
            two_qubit_gate_count: gates,
            single_carrier_gate_count: 0,
            max_carrier_dimension: 2,
            ancilla_count: n - 1,
        },
        formula: formula.into(),
        note,
    })
}
