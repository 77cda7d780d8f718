//! Named gates and reference states accepted on the command line.

use anyhow::{anyhow, bail, Result};
use qsl_core::linalg::{self, CMat, CVec};
use qsl_core::optics::toffoli_target;
use qsl_core::shortcut::phase_gate;
use qsl_core::tomo::MeasurementSetting;

fn angle(spec: &str, arg: &str) -> Result<f64> {
    arg.parse().map_err(|_| anyhow!("'{spec}': '{arg}' is not an angle"))
}

/// `x y z h s t`, `phase:θ` or `ry:θ`.
pub fn single_qubit_gate(spec: &str) -> Result<CMat> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match (name, arg) {
        ("x", "") => linalg::pauli_x(),
        ("y", "") => linalg::pauli_y(),
        ("z", "") => linalg::pauli_z(),
        ("h", "") => linalg::hadamard(),
        ("s", "") => phase_gate(std::f64::consts::FRAC_PI_2),
        ("t", "") => phase_gate(std::f64::consts::FRAC_PI_4),
        ("phase", a) => phase_gate(angle(spec, a)?),
        ("ry", a) => {
            let t = angle(spec, a)? / 2.0;
            linalg::from_rows(2, &[linalg::r(t.cos()), linalg::r(-t.sin()), linalg::r(t.sin()), linalg::r(t.cos())])
        }
        _ => bail!("unknown gate '{spec}'"),
    })
}

/// Reference processes: `cz`, `cu:θ` (phase on `|0,1⟩`, as the CU layout
/// heralds), `toffoli`, `identity:k`.
pub fn process(spec: &str) -> Result<CMat> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match (name, arg) {
        ("cz", "") => linalg::diag(&[linalg::ONE, linalg::ONE, linalg::ONE, -linalg::ONE]),
        ("cu", a) => linalg::diag(&[linalg::ONE, linalg::expi(angle(spec, a)?), linalg::ONE, linalg::ONE]),
        ("toffoli", "") => toffoli_target(),
        ("identity", k) => {
            let k: u32 = k.parse().map_err(|_| anyhow!("'{spec}': qubit count expected"))?;
            linalg::identity(1 << k)
        }
        _ => bail!("unknown process '{spec}'"),
    })
}

/// Reference states: `psi+ psi- phi+ phi-` or one projector letter per qubit
/// (`DH`). `psi±` is `(|01⟩ ± |10⟩)/√2`, `phi±` is `(|00⟩ ± |11⟩)/√2`.
pub fn state(spec: &str) -> Result<CMat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = |a: [f64; 4]| CVec::from_iterator(4, a.iter().map(|&x| linalg::r(x * s)));
    let v = match spec {
        "psi+" => bell([0.0, 1.0, 1.0, 0.0]),
        "psi-" => bell([0.0, 1.0, -1.0, 0.0]),
        "phi+" => bell([1.0, 0.0, 0.0, 1.0]),
        "phi-" => bell([1.0, 0.0, 0.0, -1.0]),
        letters => MeasurementSetting::parse(letters).map_err(|_| anyhow!("unknown state '{spec}'"))?.state(),
    };
    Ok(linalg::outer(&v))
}
