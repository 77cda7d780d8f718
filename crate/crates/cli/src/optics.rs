//! `qsl optics`: heralded layouts, their ideal maps and sampled counts.

use crate::output::{ensure_dir, joined, write_json, write_text};
use crate::{specs, Globals, Outcome};
use anyhow::{bail, Context, Result};
use qsl_core::linalg::{self, CMat};
use qsl_core::optics::{
    balance_attenuations, basis_inputs, cu_layout, heralded_state, ppbs_cz_layout, toffoli_layout, toffoli_target,
    toffoli_unbalanced, write_experiment, OpticalExperiment, SourceConfig, ToffoliVariant,
};
use qsl_core::tomo::{
    chi_of_unitary, default_preparations, inquisition, preparation_state, process_tomography, sample_records,
    write_records, Basis, Projector, ReportKind, TruthTable,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(clap::Args)]
pub struct Args {
    /// `cz`, `cu`, `cu:θ` or `toffoli`.
    layout: String,
    /// Phase of the `cu` layout.
    #[arg(long)]
    theta: Option<f64>,
    /// Pump power relative to full power; ε = ε_full·√power.
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    /// Label overlap ξ between photons of different passes.
    #[arg(long, default_value_t = 0.92)]
    xi: f64,
    /// Pair amplitude at full power. Zero gives the single-pair limit.
    #[arg(long, default_value_t = 0.3)]
    eps_full: f64,
    /// Heralded events per measurement setting; zero skips sampling.
    #[arg(long, default_value_t = 0)]
    shots: u64,
    /// Replace the C_1 attenuator of `cu` by a biased input.
    #[arg(long)]
    prebias: bool,
    /// Re-solve the Toffoli loss slots instead of using the committed solution.
    #[arg(long)]
    rebalance: bool,
    /// Output file stem; defaults to the layout name.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceSummary {
    pub eps_full: f64,
    pub power: f64,
    pub pair_amplitude: f64,
    pub mode_overlap: f64,
    pub truncation: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdealSummary {
    /// Reference process the heralded map is compared against.
    pub reference: String,
    pub success: f64,
    pub success_per_input: Vec<f64>,
    pub process_fidelity: f64,
}

/// One sampled counts file and how to interpret it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountsEntry {
    pub file: String,
    pub kind: ReportKind,
    pub label: String,
    /// Reference state (`state`) or process (`process`, `truthtable`).
    pub reference: String,
    /// Preparation letters, register order.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub preparation: Option<String>,
    /// Qubits kept in the reduced state, register order.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kept_qubits: Option<Vec<usize>>,
    pub herald_probability: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpticsReport {
    pub schema_version: u32,
    pub layout: String,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theta: Option<f64>,
    pub prebias: bool,
    pub slot_amplitudes: Vec<f64>,
    pub source: SourceSummary,
    pub ideal: IdealSummary,
    /// Mean herald probability over logical basis inputs at this source.
    pub herald_probability: f64,
    /// Fidelity of the exact noisy process with the reference (two-qubit layouts).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub process_fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truth_table: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inquisition: Option<f64>,
    /// Exact flipping contrast per control setting `C_2 C_1`.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub contrasts: BTreeMap<String, f64>,
    pub shots: u64,
    pub counts: Vec<CountsEntry>,
}

impl OpticsReport {
    pub fn conditions(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("eps_full".to_string(), self.source.eps_full),
            ("power".to_string(), self.source.power),
            ("xi".to_string(), self.source.mode_overlap),
        ])
    }
}

enum Layout {
    Cz,
    Cu(f64),
    Toffoli,
}

fn parse_layout(args: &Args) -> Result<Layout> {
    let (name, arg) = args.layout.split_once(':').unwrap_or((&args.layout, ""));
    let layout = match (name, arg) {
        ("cz", "") => Layout::Cz,
        ("cu", "") => Layout::Cu(args.theta.context("cu needs --theta or cu:θ")?),
        ("cu", a) => Layout::Cu(a.parse().with_context(|| format!("'{a}' is not an angle"))?),
        ("toffoli", "") => Layout::Toffoli,
        _ => bail!("unknown layout '{}'; expected cz, cu, cu:θ or toffoli", args.layout),
    };
    if args.prebias && !matches!(layout, Layout::Cu(_)) {
        bail!("--prebias applies to the cu layout only");
    }
    if args.rebalance && !matches!(layout, Layout::Toffoli) {
        bail!("--rebalance applies to the toffoli layout only");
    }
    Ok(layout)
}

/// Toffoli runs that test the gate as an entangler: one control in `D`, the
/// other fixed, output reduced to the superposed control and the target.
/// `(label, preparation (C_2, C_1, T), kept qubits, reference state)`.
const ENTANGLER_RUNS: [(&str, [Projector; 3], [usize; 2], &str); 4] = [
    ("a_on", [Projector::H, Projector::D, Projector::H], [1, 2], "psi+"),
    ("a_off", [Projector::V, Projector::D, Projector::H], [1, 2], "DH"),
    ("b_on", [Projector::D, Projector::H, Projector::H], [0, 2], "psi+"),
    ("b_off", [Projector::D, Projector::V, Projector::H], [0, 2], "DH"),
];

fn write_counts(path: &Path, records: &[qsl_core::tomo::CountRecord]) -> Result<()> {
    let mut buf = Vec::new();
    write_records(&mut buf, records)?;
    write_text(path, std::str::from_utf8(&buf)?)
}

fn letters(ps: &[Projector]) -> String {
    ps.iter().map(|p| p.letter()).collect()
}

pub fn run(args: &Args, g: &Globals) -> Result<Outcome> {
    let layout = parse_layout(args)?;
    let out = g.out()?;
    let seed = if args.shots > 0 { Some(g.seed_for("sampling (--shots > 0)")?) } else { None };
    let source = SourceConfig::at_power(args.eps_full, args.power, args.xi)?;
    let (name, exp, reference, ideal): (&str, OpticalExperiment, String, CMat) = match layout {
        Layout::Cz => ("cz", ppbs_cz_layout(), "cz".into(), specs::process("cz")?),
        Layout::Cu(t) => ("cu", cu_layout(t, args.prebias), format!("cu:{t}"), specs::process(&format!("cu:{t}"))?),
        Layout::Toffoli => {
            let exp = if args.rebalance {
                balance_attenuations(&toffoli_unbalanced(ToffoliVariant::default()), &toffoli_target())?.experiment
            } else {
                toffoli_layout()
            };
            ("toffoli", exp, "toffoli".into(), toffoli_target())
        }
    };
    let label = args.label.clone().unwrap_or_else(|| name.to_string());
    let map = exp.heralded_map(&SourceConfig::ideal())?;
    let ideal_summary = IdealSummary {
        reference: reference.clone(),
        success: map.success,
        success_per_input: map.success_per_input.clone(),
        process_fidelity: map.process_fidelity(&ideal),
    };

    let qubits = exp.qubits();
    let basis: Vec<(Vec<Projector>, CMat, f64)> = basis_inputs(qubits)
        .into_iter()
        .map(|p| heralded_state(&exp, &source, &p).map(|(rho, h)| (p, rho, h)))
        .collect::<qsl_core::Result<_>>()?;
    let herald_probability = basis.iter().map(|b| b.2).sum::<f64>() / basis.len() as f64;

    ensure_dir(out)?;
    let mut counts = Vec::new();
    let mut report = OpticsReport {
        schema_version: SCHEMA_VERSION,
        layout: name.into(),
        label: label.clone(),
        theta: if let Layout::Cu(t) = layout { Some(t) } else { None },
        prebias: args.prebias,
        slot_amplitudes: exp.slot_amplitudes(),
        source: SourceSummary {
            eps_full: args.eps_full,
            power: args.power,
            pair_amplitude: source.pair_amplitude,
            mode_overlap: source.mode_overlap,
            truncation: source.truncation,
        },
        ideal: ideal_summary,
        herald_probability,
        process_fidelity: None,
        truth_table: None,
        inquisition: None,
        contrasts: BTreeMap::new(),
        shots: args.shots,
        counts: Vec::new(),
    };

    if qubits == 2 {
        let preps = default_preparations(2);
        let states: Vec<(Option<Vec<Projector>>, CMat, f64)> = preps
            .iter()
            .map(|p| heralded_state(&exp, &source, p).map(|(rho, h)| (Some(p.clone()), rho, h)))
            .collect::<qsl_core::Result<_>>()?;
        let pairs: Vec<(CMat, CMat)> =
            preps.iter().zip(&states).map(|(p, s)| (preparation_state(p), s.1.clone())).collect();
        report.process_fidelity = Some(process_tomography(&pairs)?.fidelity_to(&chi_of_unitary(&ideal))?);
        if let Some(seed) = seed {
            let file = format!("{label}.process.csv");
            let labelled: Vec<_> = states.iter().map(|s| (s.0.clone(), s.1.clone())).collect();
            let records = sample_records(&labelled, &Basis::all_settings(2), args.shots, seed)?;
            write_counts(&joined(out, &file), &records)?;
            counts.push(CountsEntry {
                file,
                kind: ReportKind::Process,
                label: label.clone(),
                reference: reference.clone(),
                preparation: None,
                kept_qubits: None,
                herald_probability: states.iter().map(|s| s.2).sum::<f64>() / states.len() as f64,
                seed,
            });
        }
    } else {
        let rows: Vec<Vec<f64>> =
            basis.iter().map(|(_, rho, _)| (0..rho.nrows()).map(|k| rho[(k, k)].re.max(0.0)).collect()).collect();
        let table = TruthTable::new(qubits, rows)?;
        let ideal_table = TruthTable::of_unitary(&ideal)?;
        report.inquisition = Some(inquisition(&table, &ideal_table)?);
        for c in 0..1usize << (qubits - 1) {
            let key = format!("{c:0w$b}", w = qubits - 1);
            report.contrasts.insert(key, table.flipping_contrast(&ideal_table, c)?);
        }
        report.truth_table = Some(table.rows().to_vec());
        if let Some(seed) = seed {
            let file = format!("{label}.truthtable.csv");
            let labelled: Vec<_> = basis.iter().map(|(p, rho, _)| (Some(p.clone()), rho.clone())).collect();
            let records = sample_records(&labelled, &[vec![Basis::Z; qubits]], args.shots, seed)?;
            write_counts(&joined(out, &file), &records)?;
            counts.push(CountsEntry {
                file,
                kind: ReportKind::Truthtable,
                label: label.clone(),
                reference: reference.clone(),
                preparation: None,
                kept_qubits: None,
                herald_probability,
                seed,
            });
            for (k, (run, prep, keep, target)) in ENTANGLER_RUNS.iter().enumerate() {
                let (rho, h) = heralded_state(&exp, &source, prep)?;
                let reduced = linalg::partial_trace_qubits(&rho, qubits, keep);
                let run_seed = seed.wrapping_add(1 + k as u64);
                let records =
                    sample_records(&[(Some(prep.to_vec()), reduced)], &Basis::all_settings(2), args.shots, run_seed)?;
                let file = format!("{label}.{run}.csv");
                write_counts(&joined(out, &file), &records)?;
                counts.push(CountsEntry {
                    file,
                    kind: ReportKind::State,
                    label: format!("{label}.{run}"),
                    reference: (*target).into(),
                    preparation: Some(letters(prep)),
                    kept_qubits: Some(keep.to_vec()),
                    herald_probability: h,
                    seed: run_seed,
                });
            }
        }
    }
    report.counts = counts;

    write_text(&joined(out, &format!("{label}.qslx")), &write_experiment(&exp))?;
    write_json(&joined(out, &format!("{label}.optics.json")), &report)?;
    println!(
        "{label}: ideal success={} ideal process_fidelity={} herald_probability={}",
        report.ideal.success, report.ideal.process_fidelity, report.herald_probability
    );
    for (k, v) in &report.contrasts {
        println!("contrast {k} = {v}");
    }
    Ok(Outcome::Success)
}
