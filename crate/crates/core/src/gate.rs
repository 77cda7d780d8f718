//! Gates with level-embedding semantics.
//!
//! A gate matrix acts on the `{0,1}` levels of its target carriers and is the
//! identity on any basis state where a target (or a control) sits in a level
//! `≥ 2`. A [`LevelSwap`] permutes two levels of one carrier.

use crate::error::{Error, Result};
use crate::linalg::{self, c, expi, CMat, ONE, ZERO};
use crate::register::RegisterShape;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_4;

pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    /// `diag(1, e^{iθ})`.
    Phase(f64),
    Custom(CMat),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    kind: GateKind,
    matrix: CMat,
}

impl GateMatrix {
    pub fn new(kind: GateKind) -> Result<Self> {
        let matrix = match &kind {
            GateKind::H => linalg::hadamard(),
            GateKind::X => linalg::pauli_x(),
            GateKind::Y => linalg::pauli_y(),
            GateKind::Z => linalg::pauli_z(),
            GateKind::S => linalg::diag(&[ONE, c(0.0, 1.0)]),
            GateKind::Sdg => linalg::diag(&[ONE, c(0.0, -1.0)]),
            GateKind::T => linalg::diag(&[ONE, expi(FRAC_PI_4)]),
            GateKind::Tdg => linalg::diag(&[ONE, expi(-FRAC_PI_4)]),
            GateKind::Phase(theta) => linalg::diag(&[ONE, expi(*theta)]),
            GateKind::Custom(m) => {
                let n = m.nrows();
                if !m.is_square() || n < 2 || !n.is_power_of_two() {
                    return Err(Error::InvalidPlacement(format!(
                        "gate matrix must be 2^k square, got {}x{}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                let dev = linalg::unitarity_deviation(m);
                if dev > UNITARY_TOL {
                    return Err(Error::NotUnitary(dev));
                }
                m.clone()
            }
        };
        Ok(Self { kind, matrix })
    }

    pub fn custom(m: CMat) -> Result<Self> {
        Self::new(GateKind::Custom(m))
    }

    pub fn h() -> Self {
        Self::new(GateKind::H).unwrap()
    }
    pub fn x() -> Self {
        Self::new(GateKind::X).unwrap()
    }
    pub fn z() -> Self {
        Self::new(GateKind::Z).unwrap()
    }
    pub fn phase(theta: f64) -> Self {
        Self::new(GateKind::Phase(theta)).unwrap()
    }
    pub fn t() -> Self {
        Self::new(GateKind::T).unwrap()
    }
    pub fn tdg() -> Self {
        Self::new(GateKind::Tdg).unwrap()
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn arity(&self) -> usize {
        self.matrix.nrows().trailing_zeros() as usize
    }

    pub fn adjoint(&self) -> Self {
        let kind = match &self.kind {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            GateKind::Phase(t) => GateKind::Phase(-t),
            GateKind::Custom(m) => GateKind::Custom(m.adjoint()),
            k => k.clone(),
        };
        Self::new(kind).expect("adjoint of a unitary is unitary")
    }

    pub fn label(&self) -> String {
        match &self.kind {
            GateKind::H => "H".into(),
            GateKind::X => "X".into(),
            GateKind::Y => "Y".into(),
            GateKind::Z => "Z".into(),
            GateKind::S => "S".into(),
            GateKind::Sdg => "SDG".into(),
            GateKind::T => "T".into(),
            GateKind::Tdg => "TDG".into(),
            GateKind::Phase(_) => "ZTHETA".into(),
            GateKind::Custom(_) => "U".into(),
        }
    }
}

/// Exchanges levels `a` and `b` of one carrier (the `X_a`, `X_b` shelving gates).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelSwap {
    pub carrier: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Control {
    pub carrier: usize,
    /// Fires when the control carrier equals this value (0 = anti-control).
    pub value: usize,
}

impl Control {
    pub fn on(carrier: usize) -> Self {
        Self { carrier, value: 1 }
    }
    pub fn new(carrier: usize, value: usize) -> Self {
        Self { carrier, value }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlacedGate {
    Matrix {
        gate: GateMatrix,
        targets: Vec<usize>,
        controls: Vec<Control>,
    },
    Swap(LevelSwap),
}

impl PlacedGate {
    pub fn single(gate: GateMatrix, target: usize) -> Self {
        PlacedGate::Matrix { gate, targets: vec![target], controls: vec![] }
    }

    pub fn controlled(gate: GateMatrix, control: Control, target: usize) -> Self {
        PlacedGate::Matrix { gate, targets: vec![target], controls: vec![control] }
    }

    pub fn swap(carrier: usize, a: usize, b: usize) -> Self {
        PlacedGate::Swap(LevelSwap { carrier, a, b })
    }

    /// All carriers the gate touches, controls first.
    pub fn carriers(&self) -> Vec<usize> {
        match self {
            PlacedGate::Matrix { targets, controls, .. } => controls
                .iter()
                .map(|c| c.carrier)
                .chain(targets.iter().copied())
                .collect(),
            PlacedGate::Swap(s) => vec![s.carrier],
        }
    }

    pub fn is_multi_carrier(&self) -> bool {
        self.carriers().len() >= 2
    }

    /// Same gate with every carrier index passed through `f`.
    pub fn remapped(&self, f: impl Fn(usize) -> usize) -> Self {
        match self {
            PlacedGate::Matrix { gate, targets, controls } => PlacedGate::Matrix {
                gate: gate.clone(),
                targets: targets.iter().map(|&t| f(t)).collect(),
                controls: controls
                    .iter()
                    .map(|c| Control::new(f(c.carrier), c.value))
                    .collect(),
            },
            PlacedGate::Swap(s) => PlacedGate::Swap(LevelSwap { carrier: f(s.carrier), ..*s }),
        }
    }

    pub fn validate(&self, shape: &RegisterShape) -> Result<()> {
        let n = shape.carriers();
        match self {
            PlacedGate::Swap(s) => {
                if s.carrier >= n {
                    return Err(Error::InvalidPlacement(format!("carrier {} out of range", s.carrier)));
                }
                let d = shape.dim(s.carrier);
                if s.a == s.b || s.a >= d || s.b >= d {
                    return Err(Error::InvalidPlacement(format!(
                        "level swap ({},{}) invalid for dimension {d}",
                        s.a, s.b
                    )));
                }
            }
            PlacedGate::Matrix { gate, targets, controls } => {
                if targets.len() != gate.arity() {
                    return Err(Error::InvalidPlacement(format!(
                        "{} targets for arity-{} gate",
                        targets.len(),
                        gate.arity()
                    )));
                }
                let all = self.carriers();
                for (k, &q) in all.iter().enumerate() {
                    if q >= n {
                        return Err(Error::InvalidPlacement(format!("carrier {q} out of range")));
                    }
                    if all[..k].contains(&q) {
                        return Err(Error::InvalidPlacement(format!("carrier {q} used twice")));
                    }
                }
                if let Some(c) = controls.iter().find(|c| c.value > 1) {
                    return Err(Error::InvalidPlacement(format!(
                        "control value {} not in {{0,1}}",
                        c.value
                    )));
                }
                let dev = linalg::unitarity_deviation(gate.matrix());
                if dev > UNITARY_TOL {
                    return Err(Error::NotUnitary(dev));
                }
            }
        }
        Ok(())
    }

    /// Sparse form of the embedded unitary as `(row, col, value)` triples.
    /// Every column appears at least once.
    pub fn embedded_entries(&self, shape: &RegisterShape) -> Result<Vec<(usize, usize, Complex64)>> {
        self.validate(shape)?;
        let strides = shape.strides();
        let total = shape.total_dim();
        let mut out = Vec::with_capacity(total);
        match self {
            PlacedGate::Swap(s) => {
                let stride = strides[s.carrier];
                for col in 0..total {
                    let digit = (col / stride) % shape.dim(s.carrier);
                    let row = if digit == s.a {
                        col - s.a * stride + s.b * stride
                    } else if digit == s.b {
                        col - s.b * stride + s.a * stride
                    } else {
                        col
                    };
                    out.push((row, col, ONE));
                }
            }
            PlacedGate::Matrix { gate, targets, controls } => {
                let m = gate.matrix();
                let k = targets.len();
                for col in 0..total {
                    let digit = |q: usize| (col / strides[q]) % shape.dim(q);
                    let fires = controls.iter().all(|c| digit(c.carrier) == c.value)
                        && targets.iter().all(|&t| digit(t) < 2);
                    if !fires {
                        out.push((col, col, ONE));
                        continue;
                    }
                    let mut local_in = 0;
                    let mut base = col;
                    for &t in targets {
                        let d = digit(t);
                        local_in = local_in * 2 + d;
                        base -= d * strides[t];
                    }
                    for local_out in 0..(1 << k) {
                        let v = m[(local_out, local_in)];
                        if v == ZERO {
                            continue;
                        }
                        let mut row = base;
                        for (pos, &t) in targets.iter().enumerate() {
                            let bit = (local_out >> (k - 1 - pos)) & 1;
                            row += bit * strides[t];
                        }
                        out.push((row, col, v));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Dense full-space unitary of a placed gate.
pub fn embed_gate(g: &PlacedGate, shape: &RegisterShape) -> Result<CMat> {
    let n = shape.total_dim();
    let mut u = CMat::zeros(n, n);
    for (row, col, v) in g.embedded_entries(shape)? {
        u[(row, col)] += v;
    }
    Ok(u)
}

/// Standard two-qubit CX/CZ helpers.
pub fn cx(control: usize, target: usize) -> PlacedGate {
    PlacedGate::controlled(GateMatrix::x(), Control::on(control), target)
}

pub fn cz(control: usize, target: usize) -> PlacedGate {
    PlacedGate::controlled(GateMatrix::z(), Control::on(control), target)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn cz_on_qutrit_control_is_identity_at_level_two() {
        let shape = RegisterShape::new(vec![3, 2]).unwrap();
        let u = embed_gate(&cz(0, 1), &shape).unwrap();
        let expect = linalg::diag(&[ONE, ONE, ONE, -ONE, ONE, ONE]);
        assert!(max_abs_diff(&u, &expect) < 1e-15);
    }

    #[test]
    fn level_swap_exchanges_zero_and_two() {
        let shape = RegisterShape::new(vec![3]).unwrap();
        let u = embed_gate(&PlacedGate::swap(0, 0, 2), &shape).unwrap();
        let expect = linalg::from_rows(3, &[ZERO, ZERO, ONE, ZERO, ONE, ZERO, ONE, ZERO, ZERO]);
        assert!(max_abs_diff(&u, &expect) < 1e-15);
    }

    #[test]
    fn anti_controlled_x_flips_on_zero() {
        let shape = RegisterShape::qubits(2);
        let g = PlacedGate::controlled(GateMatrix::x(), Control::new(0, 0), 1);
        let u = embed_gate(&g, &shape).unwrap();
        let expect = linalg::from_rows(
            4,
            &[
                ZERO, ONE, ZERO, ZERO, //
                ONE, ZERO, ZERO, ZERO, //
                ZERO, ZERO, ONE, ZERO, //
                ZERO, ZERO, ZERO, ONE,
            ],
        );
        assert!(max_abs_diff(&u, &expect) < 1e-15);
    }

    #[test]
    fn shelved_target_is_untouched() {
        let shape = RegisterShape::new(vec![2, 4]).unwrap();
        let u = embed_gate(&cx(0, 1), &shape).unwrap();
        for digits in [[1, 2], [1, 3], [0, 2]] {
            let i = shape.index_of(&digits).unwrap();
            for row in 0..u.nrows() {
                let expect = if row == i { ONE } else { ZERO };
                assert_eq!(u[(row, i)], expect);
            }
        }
    }

    #[test]
    fn invalid_placements_are_rejected() {
        let shape = RegisterShape::new(vec![2, 3]).unwrap();
        assert!(PlacedGate::swap(1, 1, 1).validate(&shape).is_err());
        assert!(PlacedGate::swap(0, 0, 2).validate(&shape).is_err());
        assert!(cx(0, 0).validate(&shape).is_err());
        assert!(cx(0, 2).validate(&shape).is_err());
        let bad = PlacedGate::controlled(GateMatrix::x(), Control::new(0, 2), 1);
        assert!(bad.validate(&shape).is_err());
        let m = linalg::from_rows(2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(GateMatrix::custom(m), Err(Error::NotUnitary(_))));
    }
}
