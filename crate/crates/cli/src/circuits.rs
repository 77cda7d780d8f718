//! `qsl circuits`: shortcut constructions, their costs and oracle checks.

use crate::output::{ensure_dir, joined, write_json, write_text};
use crate::{specs, Globals, Outcome};
use anyhow::{bail, Result};
use clap::ValueEnum;
use qsl_core::circuit_text::write_circuit;
use qsl_core::linalg::{self, CMat};
use qsl_core::shortcut::{self, FirePattern, OracleCheck, QubitOnlyCost, QubitOnlyKind};
use qsl_core::Circuit;
use serde::Serialize;
use std::f64::consts::PI;

pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Toffoli-sign on (C_2, C_1, T), −1 on |1,0,1⟩.
    Ts,
    /// Toffoli built from the Toffoli-sign.
    Toffoli,
    /// n-control Toffoli-sign.
    Ntoffoli,
    /// n-control phase gate.
    Cnz,
    /// n-control arbitrary single-qubit gate.
    Cnu,
    /// Qubit-only six-CNOT Toffoli.
    Textbook6,
    /// Controls added to a C¹(U_k) fixture.
    Addcontrols,
}

#[derive(clap::Args)]
pub struct Args {
    kind: Kind,
    /// Number of controls (added controls for `addcontrols`).
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Fire pattern written C_1 first; all ones when omitted.
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long, default_value_t = PI)]
    theta: f64,
    /// Target gate for `cnu`: x y z h s t, phase:θ or ry:θ.
    #[arg(long, default_value = "x")]
    gate: String,
    /// Target qubits of the `addcontrols` fixture.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Compare with the ideal gate and exit 1 on mismatch.
    #[arg(long)]
    verify: bool,
    /// Output file stem; defaults to the kind.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Serialize)]
struct Verification {
    passed: bool,
    tolerance: f64,
    /// Largest deviation used for the verdict.
    max_deviation: f64,
    #[serde(flatten)]
    check: Option<OracleCheck>,
}

#[derive(Serialize)]
struct CostDocument {
    schema_version: u32,
    kind: Kind,
    label: String,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pattern: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gate: Option<String>,
    /// Global phase `α` factored out of the `cnu` target gate.
    #[serde(skip_serializing_if = "Option::is_none")]
    global_phase: Option<f64>,
    dims: Vec<usize>,
    two_qubit_gates: usize,
    single_carrier_gates: usize,
    max_carrier_dimension: usize,
    ancillas: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    qubit_only: Option<QubitOnlyCost>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<Verification>,
}

enum Oracle {
    /// Qubit block must match; shelf behaviour is reported.
    Shortcut(CMat),
    /// Qubit-only circuit, equal up to a global phase.
    GlobalPhase(CMat),
}

struct Built {
    circuit: Circuit,
    oracle: Oracle,
    n: usize,
    pattern: Option<FirePattern>,
    theta: Option<f64>,
    gate: Option<String>,
    global_phase: Option<f64>,
    qubit_only: Option<(QubitOnlyKind, usize)>,
}

fn pattern(args: &Args, n: usize) -> Result<FirePattern> {
    let p = match &args.pattern {
        Some(text) => FirePattern::parse(text)?,
        None => FirePattern::all_ones(n),
    };
    if p.len() != n {
        bail!("pattern '{p}' has {} bits, expected {n}", p.len());
    }
    Ok(p)
}

fn build(args: &Args) -> Result<Built> {
    let n = args.n;
    let plain = |circuit, oracle, n, pattern| Built {
        circuit,
        oracle,
        n,
        pattern,
        theta: None,
        gate: None,
        global_phase: None,
        qubit_only: Some((QubitOnlyKind::NT, n)),
    };
    Ok(match args.kind {
        Kind::Ts => {
            let p = FirePattern::new(vec![0, 1])?;
            let ideal = shortcut::ideal_multi_controlled(2, &shortcut::z_gate(), &p)?;
            plain(shortcut::build_ts(), Oracle::Shortcut(ideal), 2, Some(p))
        }
        Kind::Toffoli => {
            let p = pattern(args, 2)?;
            let c = shortcut::toffoli_from_ts((p.bit(2), p.bit(1)))?;
            let ideal = shortcut::ideal_multi_controlled(2, &linalg::pauli_x(), &p)?;
            plain(c, Oracle::Shortcut(ideal), 2, Some(p))
        }
        Kind::Ntoffoli => {
            let p = pattern(args, n)?;
            let c = shortcut::build_n_toffoli_sign(n, &p)?;
            let ideal = shortcut::ideal_multi_controlled(n, &shortcut::z_gate(), &p)?;
            plain(c, Oracle::Shortcut(ideal), n, Some(p))
        }
        Kind::Cnz => {
            let p = pattern(args, n)?;
            let c = shortcut::build_cn_z_theta(n, args.theta, &p)?;
            let ideal = shortcut::ideal_multi_controlled(n, &shortcut::phase_gate(args.theta), &p)?;
            Built {
                theta: Some(args.theta),
                qubit_only: (n >= 2).then_some((QubitOnlyKind::CnU, n)),
                ..plain(c, Oracle::Shortcut(ideal), n, Some(p))
            }
        }
        Kind::Cnu => {
            let p = pattern(args, n)?;
            let u = specs::single_qubit_gate(&args.gate)?;
            let (c, alpha) = shortcut::build_cn_u(n, &u, &p)?;
            let shifted = u.map(|x| x * linalg::expi(-alpha));
            let ideal = shortcut::ideal_multi_controlled(n, &shifted, &p)?;
            Built {
                gate: Some(args.gate.clone()),
                global_phase: Some(alpha),
                qubit_only: (n >= 2).then_some((QubitOnlyKind::CnU, n)),
                ..plain(c, Oracle::Shortcut(ideal), n, Some(p))
            }
        }
        Kind::Textbook6 => {
            let ideal = shortcut::ideal_multi_controlled(2, &linalg::pauli_x(), &FirePattern::all_ones(2))?;
            plain(shortcut::textbook_toffoli_6cnot(), Oracle::GlobalPhase(ideal), 2, None)
        }
        Kind::Addcontrols => {
            let q = pattern(args, n)?;
            let (inner, uk) = shortcut::controlled_fixture(args.k, args.theta)?;
            let c = shortcut::add_controls(&inner, n, &q)?;
            let ideal = shortcut::added_controls_oracle(&uk, &q)?;
            Built { theta: Some(args.theta), qubit_only: None, ..plain(c, Oracle::Shortcut(ideal), n, Some(q)) }
        }
    })
}

/// `max|U − e^{iφ} V|` with `φ` aligning the two traces.
fn global_phase_deviation(u: &CMat, v: &CMat) -> f64 {
    let overlap = linalg::trace(&(v.adjoint() * u));
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { linalg::ONE };
    linalg::max_abs_diff(u, &v.map(|x| x * phase))
}

fn verify(b: &Built) -> Result<Verification> {
    Ok(match &b.oracle {
        Oracle::Shortcut(ideal) => {
            let check = shortcut::check_against_oracle(&b.circuit, ideal)?;
            Verification {
                passed: check.passes(TOLERANCE),
                tolerance: TOLERANCE,
                max_deviation: check.qubit_block.max(check.leakage),
                check: Some(check),
            }
        }
        Oracle::GlobalPhase(ideal) => {
            let dev = global_phase_deviation(&b.circuit.unitary()?, ideal);
            Verification { passed: dev <= TOLERANCE, tolerance: TOLERANCE, max_deviation: dev, check: None }
        }
    })
}

pub fn run(args: &Args, g: &Globals) -> Result<Outcome> {
    let built = build(args)?;
    let cost = built.circuit.cost();
    let verification = if args.verify { Some(verify(&built)?) } else { None };
    let label = args.label.clone().unwrap_or_else(|| format!("{:?}", args.kind).to_lowercase());
    let doc = CostDocument {
        schema_version: 1,
        kind: args.kind,
        label: label.clone(),
        n: built.n,
        pattern: built.pattern.as_ref().map(|p| p.to_string()),
        theta: built.theta,
        gate: built.gate.clone(),
        global_phase: built.global_phase,
        dims: built.circuit.shape().dims().to_vec(),
        two_qubit_gates: cost.two_qubit_gate_count,
        single_carrier_gates: cost.single_carrier_gate_count,
        max_carrier_dimension: cost.max_carrier_dimension,
        ancillas: cost.ancilla_count,
        qubit_only: built.qubit_only.map(|(k, n)| shortcut::qubit_only_cost(k, n)).transpose()?,
        verification,
    };
    println!("{label}: dims={:?} two_qubit_gates={}", doc.dims, doc.two_qubit_gates);
    if let Some(out) = &g.out {
        ensure_dir(out)?;
        write_text(&joined(out, &format!("{label}.circuit")), &write_circuit(&built.circuit))?;
        write_json(&joined(out, &format!("{label}.cost.json")), &doc)?;
    }
    Ok(match &doc.verification {
        Some(v) => {
            println!("{} max_deviation={:e}", if v.passed { "PASS" } else { "FAIL" }, v.max_deviation);
            if let Some(c) = &v.check {
                println!("shelf_block_deviation={:e} (informational)", c.shelf_block);
            }
            if v.passed { Outcome::Success } else { Outcome::VerificationFailed }
        }
        None => Outcome::Success,
    })
}
