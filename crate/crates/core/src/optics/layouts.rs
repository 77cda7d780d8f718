//! Heralded gate layouts built from PPBS interference, and loss balancing.

use super::experiment::{Count, Detector, Element, HeraldPattern, OpticalExperiment};
use super::file::parse_experiment;
use super::fock::{Pol, DEFAULT_CUTOFF};
use super::source::{Pass, SourceConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use serde::{Deserialize, Serialize};

/// PPBS intensity transmissions.
pub const PPBS_T_H: f64 = 1.0;
pub const PPBS_T_V: f64 = 1.0 / 3.0;

fn ppbs(a: usize, b: usize) -> Element {
    Element::Splitter { a, b, t_h: PPBS_T_H, t_v: PPBS_T_V }
}

fn att(mode: usize, pol: Pol, amplitude: f64) -> Element {
    Element::Attenuator { mode, pol, amplitude }
}

fn plate(mode: usize, matrix: CMat) -> Element {
    Element::Waveplate { mode, matrix }
}

fn exactly_one(modes: &[usize]) -> Vec<Detector> {
    modes.iter().map(|&mode| Detector { mode, count: Count::Exactly(1) }).collect()
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Two photons meeting at one PPBS with H attenuators on both outputs.
pub fn ppbs_cz_layout() -> OpticalExperiment {
    let (c, t) = (0, 1);
    OpticalExperiment {
        name: "cz".into(),
        modes: names(&["c", "t"]),
        passes: vec![Pass { signal: c, idler: t }],
        inputs: vec![c, t],
        outputs: vec![c, t],
        elements: vec![ppbs(c, t), att(c, Pol::H, 1.0 / 3f64.sqrt()), att(t, Pol::H, 1.0 / 3f64.sqrt())],
        herald: HeraldPattern { detectors: exactly_one(&[c, t]) },
        loss_slots: vec![1, 2],
        prebias: None,
        cutoff: DEFAULT_CUTOFF,
    }
}

/// `T` is split by polarization onto a bottom rail (H) and a top rail (V); the
/// top rail meets `C_1` in a CZ, passes `Z_θ`, and is projected back onto a
/// single polarization before recombining with the bottom rail.
///
/// Heralded map `diag(1, e^{iθ}, 1, 1)/√18` on `(C_1, T)`. With `prebias` the
/// `C_1` H attenuator (L1) is removed and its factor moved onto the input.
pub fn cu_layout(theta: f64, prebias: bool) -> OpticalExperiment {
    let (c1, t, b, o) = (0, 1, 2, 3);
    let l1 = if prebias { 1.0 } else { 1.0 / 3f64.sqrt() };
    let elements = vec![
        Element::Swap { pairs: vec![((t, Pol::H), (b, Pol::H))] },
        plate(t, linalg::hadamard()),
        ppbs(c1, t),
        att(c1, Pol::H, l1),
        att(t, Pol::H, 1.0 / 3f64.sqrt()),
        plate(t, linalg::hadamard()),
        plate(t, linalg::diag(&[linalg::ONE, linalg::expi(theta)])),
        Element::Project { mode: t, onto: [linalg::r(1.0), linalg::r(1.0)], exit: Pol::V },
        att(b, Pol::H, 1.0 / 6f64.sqrt()),
        Element::Swap { pairs: vec![((b, Pol::H), (o, Pol::H)), ((t, Pol::V), (o, Pol::V))] },
    ];
    OpticalExperiment {
        name: "cu".into(),
        modes: names(&["c1", "t", "b", "o"]),
        passes: vec![Pass { signal: c1, idler: t }],
        inputs: vec![c1, t],
        outputs: vec![c1, o],
        elements,
        herald: HeraldPattern { detectors: exactly_one(&[c1, o]) },
        loss_slots: if prebias { vec![4, 8] } else { vec![3, 4, 8] },
        prebias: prebias.then(|| vec![[1.0 / 3f64.sqrt(), 1.0], [1.0, 1.0]]),
        cutoff: DEFAULT_CUTOFF,
    }
}

/// Free choices in the Toffoli core: which control meets the top rail first,
/// whether the inter-stage plate sends D to V (default) or to H, and the sign
/// of the final projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToffoliVariant {
    pub c2_first: bool,
    pub d_to_h: bool,
    pub negative_projection: bool,
}

impl Default for ToffoliVariant {
    fn default() -> Self {
        Self { c2_first: false, d_to_h: false, negative_projection: true }
    }
}

impl ToffoliVariant {
    pub fn all() -> Vec<ToffoliVariant> {
        (0..8)
            .map(|m| ToffoliVariant { c2_first: m & 4 != 0, d_to_h: m & 2 != 0, negative_projection: m & 1 != 0 })
            .collect()
    }

    /// Control pattern `(C_2, C_1)` at which the core applies its sign to `T = 1`.
    ///
    /// The top rail reaches the second PPBS in V exactly when the first control
    /// is H (or V with `d_to_h`); the sign then sits on the second control
    /// being H under a negative projection and V otherwise.
    pub fn sign_pattern(&self) -> (usize, usize) {
        let first = usize::from(self.d_to_h);
        let second = usize::from(!self.negative_projection);
        if self.c2_first {
            (first, second)
        } else {
            (second, first)
        }
    }
}

/// Three-photon Toffoli core with loss slots L1 to L3 fully open:
/// `(C_1, T)` from the first pass, `(C_2, trigger)` from the second. The top rail is rotated so a single PPBS stage leaves it
/// in D or A depending on the first control, then mapped to V or H so the
/// second stage only acts when the first control is H. Hadamards on `T`, and
/// an `X` on a control when needed, turn the sign core into a Toffoli
/// flipping on `(C_2, C_1) = (0, 0)`.
///
/// Balancing drives the slots to `1/√3` on each control's H output and
/// `1/(2√2)` on the bottom rail.
pub fn toffoli_unbalanced(variant: ToffoliVariant) -> OpticalExperiment {
    let (c2, c1, t, b, o, trig) = (0, 1, 2, 3, 4, 5);
    let (first, second) = if variant.c2_first { (c2, c1) } else { (c1, c2) };
    let s3 = 3f64.sqrt();
    let h = 0.5f64;
    let rot = linalg::from_rows(2, &[linalg::r(s3 * h), linalg::r(h), linalg::r(-h), linalg::r(s3 * h)]);
    let w1 = {
        let s = 0.5f64.sqrt();
        if variant.d_to_h {
            linalg::from_rows(2, &[linalg::r(s), linalg::r(s), linalg::r(s), linalg::r(-s)])
        } else {
            linalg::from_rows(2, &[linalg::r(s), linalg::r(-s), linalg::r(s), linalg::r(s)])
        }
    };
    let phi_v = if variant.negative_projection { -s3 * h } else { s3 * h };
    // Controls whose physical sign pattern bit is 1 need an X to fire on 0.
    let (p2, p1) = variant.sign_pattern();
    let mut pre = vec![plate(t, linalg::hadamard())];
    let mut post = Vec::new();
    for (mode, bit) in [(c2, p2), (c1, p1)] {
        if bit == 1 {
            pre.push(plate(mode, linalg::pauli_x()));
            post.push(plate(mode, linalg::pauli_x()));
        }
    }
    post.push(plate(o, linalg::hadamard()));
    let mut elements = pre;
    let core_start = elements.len();
    elements.extend([
        Element::Swap { pairs: vec![((t, Pol::H), (b, Pol::H))] },
        plate(t, rot),
        ppbs(first, t),
        att(first, Pol::H, 1.0),
        plate(t, w1),
        ppbs(second, t),
        att(second, Pol::H, 1.0),
        Element::Project { mode: t, onto: [linalg::r(h), linalg::r(phi_v)], exit: Pol::V },
        att(b, Pol::H, 1.0),
        Element::Swap { pairs: vec![((b, Pol::H), (o, Pol::H)), ((t, Pol::V), (o, Pol::V))] },
    ]);
    elements.extend(post);
    let mut detectors = exactly_one(&[c2, c1, o]);
    detectors.push(Detector { mode: trig, count: Count::AtLeast(1) });
    OpticalExperiment {
        name: "toffoli".into(),
        modes: names(&["c2", "c1", "t", "b", "o", "trig"]),
        passes: vec![Pass { signal: c1, idler: t }, Pass { signal: c2, idler: trig }],
        inputs: vec![c2, c1, t],
        outputs: vec![c2, c1, o],
        elements,
        herald: HeraldPattern { detectors },
        loss_slots: vec![core_start + 3, core_start + 6, core_start + 8],
        prebias: None,
        cutoff: DEFAULT_CUTOFF,
    }
}

/// Toffoli target on `(C_2, C_1, T)`: flip `T` iff both controls are 0.
pub fn toffoli_target() -> CMat {
    let mut u = linalg::identity(8);
    u.swap_columns(0, 1);
    u
}

/// A variant with its loss slots solved by [`balance_attenuations`].
pub fn toffoli_layout_with(variant: ToffoliVariant) -> Result<OpticalExperiment> {
    Ok(balance_attenuations(&toffoli_unbalanced(variant), &toffoli_target())?.experiment)
}

/// Solved default layout, committed so runs do not depend on the search.
pub const TOFFOLI_FIXTURE: &str = include_str!("../../fixtures/toffoli_balanced.qslx");

pub fn toffoli_layout() -> OpticalExperiment {
    parse_experiment(TOFFOLI_FIXTURE).expect("committed fixture parses")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceResult {
    pub amplitudes: Vec<f64>,
    pub success: f64,
    /// Relative deviation of `|K|` from proportionality to `|U|`.
    pub residual: f64,
    pub experiment: OpticalExperiment,
}

/// `‖|K| − s|U|‖_F / (s‖U‖_F)` with the least-squares scale `s`.
pub fn proportionality_residual(k: &CMat, u: &CMat) -> f64 {
    let ka = k.map(|x| x.norm());
    let ua = u.map(|x| x.norm());
    let s = ka.dot(&ua) / ua.dot(&ua);
    if s <= 0.0 {
        return f64::INFINITY;
    }
    (ka - ua.scale(s)).norm() / (s * ua.norm())
}

const PENALTY: f64 = 10.0;

fn objective(exp: &OpticalExperiment, target: &CMat, amps: &[f64]) -> (f64, f64, f64) {
    let e = exp.with_slot_amplitudes(amps);
    match e.heralded_map(&SourceConfig::ideal()) {
        Ok(m) => {
            let res = match m.matrix() {
                Ok(k) => proportionality_residual(k, target),
                Err(_) => f64::INFINITY,
            };
            (m.success - PENALTY * res, m.success, res)
        }
        Err(_) => (f64::NEG_INFINITY, 0.0, f64::INFINITY),
    }
}

fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (a + b);
    // Endpoints are common optima (fully open slots).
    [mid, lo, hi].into_iter().max_by(|x, y| f(*x).total_cmp(&f(*y))).expect("non-empty")
}

/// Coordinate descent over slot amplitudes in `[0,1]` maximizing the worst-case
/// success minus a penalty on non-proportionality. Starts fully open and is
/// deterministic. Always returns the best layout found.
pub fn balance_search(exp: &OpticalExperiment, target: &CMat) -> Result<BalanceResult> {
    exp.validate()?;
    let mut amps = vec![1.0; exp.loss_slots.len()];
    let mut best = objective(exp, target, &amps).0;
    for _sweep in 0..200 {
        let before = best;
        for i in 0..amps.len() {
            let f = |x: f64| {
                let mut a = amps.clone();
                a[i] = x;
                objective(exp, target, &a).0
            };
            let x = golden_max(f, 0.0, 1.0, 1e-11);
            let v = f(x);
            if v > best {
                best = v;
                amps[i] = x;
            }
        }
        if best - before < 1e-14 {
            break;
        }
    }
    let (_, success, residual) = objective(exp, target, &amps);
    Ok(BalanceResult { experiment: exp.with_slot_amplitudes(&amps), amplitudes: amps, success, residual })
}

/// As [`balance_search`], failing when proportionality is not reached within 1e-6.
pub fn balance_attenuations(exp: &OpticalExperiment, target: &CMat) -> Result<BalanceResult> {
    let r = balance_search(exp, target)?;
    if r.residual > 1e-6 {
        return Err(Error::BalanceFailed { residual: r.residual, success: r.success });
    }
    Ok(r)
}
