//! `qsl tomo`: reconstructions with Monte-Carlo error bars.

use crate::optics::{CountsEntry, OpticsReport};
use crate::output::{ensure_dir, file_name, read_json, write_json};
use crate::{specs, Globals, Outcome};
use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use qsl_core::linalg::CMat;
use qsl_core::tomo::{
    chi_of_unitary, fidelity, group_by_prep, inquisition, linear_entropy, monte_carlo_errors,
    preparation_state, process_tomography, read_records, state_tomography, tangle, truth_table_from_records,
    CountRecord, ReportKind, TomoReport, TruthTable,
};
use std::fs::File;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    State,
    Process,
    Truthtable,
}

impl Mode {
    fn kind(self) -> ReportKind {
        match self {
            Mode::State => ReportKind::State,
            Mode::Process => ReportKind::Process,
            Mode::Truthtable => ReportKind::Truthtable,
        }
    }
}

#[derive(clap::Args)]
pub struct Args {
    mode: Mode,
    /// Count records (`# qsl-counts 1` CSV).
    #[arg(long)]
    counts: PathBuf,
    /// Optics run description; supplies label, reference and conditions for
    /// the counts file it lists.
    #[arg(long)]
    optics: Option<PathBuf>,
    /// Reference state (state mode) or process (process and truthtable modes).
    #[arg(long)]
    reference: Option<String>,
    #[arg(long)]
    label: Option<String>,
    /// Monte-Carlo resamples for error bars; zero skips them.
    #[arg(long, default_value_t = 50)]
    samples: usize,
}

/// Named quantities computed by one estimator, in a fixed order.
type Estimate = Vec<(String, f64)>;
type Estimator = Box<dyn Fn(&[CountRecord]) -> Result<Estimate> + Sync>;

fn state_estimate(records: &[CountRecord], reference: Option<&CMat>) -> Result<(CMat, Estimate)> {
    let rho = state_tomography(records)?.into_matrix();
    let mut q = Vec::new();
    if let Some(r) = reference {
        q.push(("fidelity".to_string(), fidelity(&rho, r)?));
    }
    q.push(("linear_entropy".to_string(), linear_entropy(&rho)?));
    if rho.nrows() == 4 {
        q.push(("tangle".to_string(), tangle(&rho)?));
    }
    Ok((rho, q))
}

fn process_estimate(records: &[CountRecord], ideal_chi: Option<&CMat>) -> Result<(CMat, Estimate)> {
    let mut pairs = Vec::new();
    let mut entropy = 0.0;
    for (key, group) in group_by_prep(records)? {
        let prep = group[0].prep()?.with_context(|| format!("records '{key}' have no preparation"))?;
        let out = state_tomography(&group)?.into_matrix();
        entropy += linear_entropy(&out)?;
        pairs.push((preparation_state(&prep), out));
    }
    let n = pairs.len() as f64;
    let pm = process_tomography(&pairs)?;
    let mut q = Vec::new();
    if let Some(chi) = ideal_chi {
        q.push(("fidelity".to_string(), pm.fidelity_to(chi)?));
    }
    q.push(("linear_entropy".to_string(), entropy / n));
    Ok((pm.chi, q))
}

fn table_estimate(records: &[CountRecord], qubits: usize, ideal: Option<&TruthTable>) -> Result<(TruthTable, Estimate)> {
    let table = truth_table_from_records(records, qubits)?;
    let mut q = Vec::new();
    for (i, row) in table.rows().iter().enumerate() {
        for (o, p) in row.iter().enumerate() {
            q.push((format!("p[{i}][{o}]"), *p));
        }
    }
    if let Some(ideal) = ideal {
        q.push(("inquisition".to_string(), inquisition(&table, ideal)?));
        for c in 0..1usize << (qubits - 1) {
            q.push((format!("contrast:{c:0w$b}", w = qubits - 1), table.flipping_contrast(ideal, c)?));
        }
    }
    Ok((table, q))
}

fn values(e: &Estimate) -> Vec<f64> {
    e.iter().map(|(_, v)| *v).collect()
}

fn lookup(entries: &[CountsEntry], file: &str, kind: ReportKind) -> Result<CountsEntry> {
    entries
        .iter()
        .find(|e| e.file == file)
        .cloned()
        .with_context(|| format!("optics report does not list '{file}'"))
        .and_then(|e| {
            if e.kind != kind {
                bail!("'{file}' holds {:?} counts, not {:?}", e.kind, kind);
            }
            Ok(e)
        })
}

pub fn run(args: &Args, g: &Globals) -> Result<Outcome> {
    let out = g.out()?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    let records = read_records(File::open(&args.counts).with_context(|| format!("opening {}", args.counts.display()))?)
        .with_context(|| format!("reading {}", args.counts.display()))?;
    let first = records.first().context("counts file has no records")?;
    let qubits = first.setting()?.qubits();

    let mut report_label = args.label.clone();
    let mut reference = args.reference.clone();
    let mut success = None;
    let mut conditions = Default::default();
    if let Some(path) = &args.optics {
        let meta: OpticsReport = read_json(path)?;
        if meta.schema_version != crate::optics::SCHEMA_VERSION {
            bail!("{}: unsupported schema_version {}", path.display(), meta.schema_version);
        }
        let entry = lookup(&meta.counts, &file_name(&args.counts), args.mode.kind())?;
        report_label = report_label.or(Some(entry.label.clone()));
        reference = reference.or(Some(entry.reference.clone()));
        success = Some(entry.herald_probability);
        conditions = meta.conditions();
    }

    let seed = if args.samples > 0 { g.seed_for("Monte-Carlo error bars (--samples > 0)")? } else { 0 };
    let dim = 1usize << qubits;
    let mut report = TomoReport::new(args.mode.kind(), dim, seed, args.samples);
    report.label = report_label;
    report.reference = reference.clone();
    report.success_probability = success;
    report.conditions = conditions;

    let estimate: Estimator = match args.mode {
        Mode::State => {
            let r = reference.as_deref().map(specs::state).transpose()?;
            if let Some(r) = &r {
                if r.nrows() != dim {
                    bail!("reference '{}' is not a {}-qubit state", reference.as_deref().unwrap_or(""), qubits);
                }
            }
            let (rho, q) = state_estimate(&records, r.as_ref())?;
            report = report.with_rho(&rho);
            fill(&mut report, &q);
            Box::new(move |rs| state_estimate(rs, r.as_ref()).map(|(_, q)| q))
        }
        Mode::Process => {
            let chi = reference.as_deref().map(specs::process).transpose()?.map(|u| chi_of_unitary(&u));
            let (chi_est, q) = process_estimate(&records, chi.as_ref())?;
            report = report.with_chi(&chi_est);
            fill(&mut report, &q);
            Box::new(move |rs| process_estimate(rs, chi.as_ref()).map(|(_, q)| q))
        }
        Mode::Truthtable => {
            let ideal = reference
                .as_deref()
                .map(|r| specs::process(r).and_then(|u| Ok(TruthTable::of_unitary(&u)?)))
                .transpose()?;
            let (table, q) = table_estimate(&records, qubits, ideal.as_ref())?;
            report.truth_table = Some(table.rows().to_vec());
            fill(&mut report, &q);
            Box::new(move |rs| table_estimate(rs, qubits, ideal.as_ref()).map(|(_, q)| q))
        }
    };

    if args.samples > 0 {
        let names: Vec<String> = estimate(&records)?.into_iter().map(|(n, _)| n).collect();
        let summary = monte_carlo_errors(
            &records,
            |rs| estimate(rs).map(|q| values(&q)).map_err(|e| qsl_core::Error::InvalidParameter(e.to_string())),
            args.samples,
            seed,
        )?;
        let mut table_std = vec![vec![0.0; dim]; dim];
        for (name, std) in names.iter().zip(&summary.std) {
            if let Some((i, o)) = parse_entry(name) {
                table_std[i][o] = *std;
            } else {
                report.error_bars.insert(name.clone(), *std);
            }
        }
        if report.truth_table.is_some() {
            report.truth_table_std = Some(table_std);
        }
        if summary.failures > 0 {
            report.error_bars.insert("failure_fraction".into(), summary.failure_fraction);
        }
    }

    write_json(out, &report)?;
    for key in ["fidelity", "linear_entropy", "tangle", "inquisition"] {
        let v = match key {
            "fidelity" => report.fidelity,
            "linear_entropy" => report.linear_entropy,
            "tangle" => report.tangle,
            _ => report.inquisition,
        };
        if let Some(v) = v {
            match report.error_bars.get(key) {
                Some(s) => println!("{key} = {v} ± {s}"),
                None => println!("{key} = {v}"),
            }
        }
    }
    Ok(Outcome::Success)
}

fn parse_entry(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix("p[")?;
    let (i, rest) = rest.split_once("][")?;
    let o = rest.strip_suffix(']')?;
    Some((i.parse().ok()?, o.parse().ok()?))
}

fn fill(report: &mut TomoReport, q: &Estimate) {
    for (name, v) in q {
        match name.as_str() {
            "fidelity" => report.fidelity = Some(*v),
            "linear_entropy" => report.linear_entropy = Some(*v),
            "tangle" => report.tangle = Some(*v),
            "inquisition" => report.inquisition = Some(*v),
            other => {
                if let Some(c) = other.strip_prefix("contrast:") {
                    report.contrasts.insert(c.to_string(), *v);
                }
            }
        }
    }
}
