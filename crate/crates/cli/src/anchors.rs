//! Published experimental values, shown next to simulated results for
//! comparison only. They depend on laboratory imperfections this simulator
//! does not model and are never used as test oracles.

use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Anchor {
    pub value: f64,
    pub uncertainty: f64,
}

const fn a(value: f64, uncertainty: f64) -> Anchor {
    Anchor { value, uncertainty }
}

pub const TOFFOLI_INQUISITION: Anchor = a(0.81, 0.03);

/// Flipping contrast per control setting `C_2 C_1` at full pump power.
pub const TOFFOLI_CONTRASTS: [(&str, Anchor); 4] =
    [("00", a(0.99, 0.01)), ("01", a(0.95, 0.02)), ("10", a(0.80, 0.02)), ("11", a(0.73, 0.05))];

/// Contrast of control setting `11` at a quarter of the pump power.
pub const TOFFOLI_CONTRAST_11_QUARTER_POWER: Anchor = a(0.83, 0.04);

/// `(fidelity, linear entropy, tangle)` of the two-qubit outputs of the
/// Toffoli used as an entangler, keyed by run label suffix.
pub const ENTANGLER_STATES: [(&str, [Anchor; 3]); 4] = [
    ("a_on", [a(0.90, 0.04), a(0.21, 0.08), a(0.68, 0.10)]),
    ("a_off", [a(0.75, 0.06), a(0.47, 0.10), a(0.04, 0.06)]),
    ("b_on", [a(0.81, 0.02), a(0.39, 0.05), a(0.53, 0.07)]),
    ("b_off", [a(0.80, 0.03), a(0.40, 0.05), a(0.01, 0.01)]),
];

/// `(θ, name, process fidelity, mean linear entropy)` of the controlled-phase gates.
pub const CONTROLLED_PHASE_GATES: [(f64, &str, Anchor, Anchor); 4] = [
    (std::f64::consts::FRAC_PI_4, "CT", a(0.982, 0.003), a(0.036, 0.004)),
    (std::f64::consts::FRAC_PI_2, "CJ", a(0.977, 0.004), a(0.047, 0.004)),
    (3.0 * std::f64::consts::FRAC_PI_4, "CL", a(0.940, 0.006), a(0.091, 0.005)),
    (std::f64::consts::PI, "CZ", a(0.956, 0.003), a(0.086, 0.006)),
];
