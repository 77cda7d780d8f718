//! `qsl report`: tomography reports gathered into comparison tables.

use crate::anchors::{self, Anchor};
use crate::output::{ensure_dir, file_name, joined, read_json, write_json, write_text};
use crate::{specs, Globals, Outcome};
use anyhow::{bail, Result};
use clap::ValueEnum;
use qsl_core::tomo::{linear_entropy, tangle, ReportKind, TomoReport, SCHEMA_VERSION};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Document {
    /// Toffoli truth tables: inquisition and flipping contrasts.
    TruthTable,
    /// Two-qubit output states: fidelity, linear entropy, tangle.
    States,
    /// Gate process tomography: process fidelity, mean linear entropy.
    Gates,
}

impl Document {
    const ALL: [Document; 3] = [Document::TruthTable, Document::States, Document::Gates];

    fn kind(self) -> ReportKind {
        match self {
            Document::TruthTable => ReportKind::Truthtable,
            Document::States => ReportKind::State,
            Document::Gates => ReportKind::Process,
        }
    }

    fn stem(self) -> &'static str {
        match self {
            Document::TruthTable => "truth_table",
            Document::States => "states",
            Document::Gates => "gates",
        }
    }

    fn description(self) -> &'static str {
        match self {
            Document::TruthTable => "Toffoli truth tables with inquisition and flipping contrast per control setting",
            Document::States => "Two-qubit output states: fidelity with the ideal, linear entropy, tangle",
            Document::Gates => "Controlled-phase gates: process fidelity and mean output linear entropy",
        }
    }
}

#[derive(clap::Args)]
pub struct Args {
    /// Tomography reports written by `qsl tomo`.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Documents to write; defaults to every document with inputs.
    #[arg(long, value_delimiter = ',')]
    only: Vec<Document>,
}

const PUBLISHED_NOTE: &str = "published_* columns are published experimental anchors for side-by-side \
comparison; they include laboratory effects outside this simulation and are not expected to match";

#[derive(Debug, Serialize)]
struct Row {
    label: String,
    source: String,
    quantity: String,
    value: f64,
    std: Option<f64>,
    ideal: Option<f64>,
    published_as: Option<String>,
    published_value: Option<f64>,
    published_uncertainty: Option<f64>,
}

#[derive(Debug, Serialize)]
struct TableEntry {
    label: String,
    source: String,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    conditions: BTreeMap<String, f64>,
    truth_table: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth_table_std: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize)]
struct ReportDocument {
    schema_version: u32,
    document: String,
    description: String,
    note: String,
    rows: Vec<Row>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    tables: Vec<TableEntry>,
}

struct Input {
    source: String,
    report: TomoReport,
}

impl Input {
    fn label(&self) -> String {
        self.report.label.clone().unwrap_or_else(|| self.source.trim_end_matches(".json").to_string())
    }

    fn row(&self, quantity: &str, value: f64, ideal: Option<f64>, published: Option<(String, Anchor)>) -> Row {
        Row {
            label: self.label(),
            source: self.source.clone(),
            quantity: quantity.into(),
            value,
            std: self.report.error_bars.get(quantity).copied(),
            // Closed-form ideals computed numerically carry ~1e-16 residue.
            ideal: ideal.map(|v| if (v - v.round()).abs() < 1e-12 { v.round() } else { v }),
            published_as: published.as_ref().map(|p| p.0.clone()),
            published_value: published.as_ref().map(|p| p.1.value),
            published_uncertainty: published.as_ref().map(|p| p.1.uncertainty),
        }
    }
}

fn truth_table_rows(input: &Input, rows: &mut Vec<Row>, tables: &mut Vec<TableEntry>) {
    let r = &input.report;
    let toffoli = r.reference.as_deref() == Some("toffoli");
    if let Some(v) = r.inquisition {
        let anchor = toffoli.then(|| ("inquisition".to_string(), anchors::TOFFOLI_INQUISITION));
        rows.push(input.row("inquisition", v, Some(1.0), anchor));
    }
    let quarter = r.conditions.get("power").is_some_and(|p| (p - 0.25).abs() < 1e-12);
    for (key, v) in &r.contrasts {
        let anchor = if !toffoli {
            None
        } else if key == "11" && quarter {
            Some(("contrast 11, quarter power".to_string(), anchors::TOFFOLI_CONTRAST_11_QUARTER_POWER))
        } else {
            anchors::TOFFOLI_CONTRASTS.iter().find(|(k, _)| k == key).map(|(k, a)| (format!("contrast {k}"), *a))
        };
        let mut row = input.row(&format!("contrast:{key}"), *v, Some(1.0), anchor);
        row.std = r.error_bars.get(&format!("contrast:{key}")).copied();
        rows.push(row);
    }
    if let Some(table) = &r.truth_table {
        tables.push(TableEntry {
            label: input.label(),
            source: input.source.clone(),
            conditions: r.conditions.clone(),
            truth_table: table.clone(),
            truth_table_std: r.truth_table_std.clone(),
        });
    }
}

fn state_rows(input: &Input, rows: &mut Vec<Row>) -> Result<()> {
    let r = &input.report;
    let label = input.label();
    let published = anchors::ENTANGLER_STATES.iter().find(|(suffix, _)| label.ends_with(suffix));
    let target = r.reference.as_deref().map(specs::state).transpose()?;
    let ideal_entropy = target.as_ref().map(linear_entropy).transpose()?;
    let ideal_tangle = target.as_ref().filter(|t| t.nrows() == 4).map(tangle).transpose()?;
    let quantities = [
        ("fidelity", r.fidelity, target.as_ref().map(|_| 1.0)),
        ("linear_entropy", r.linear_entropy, ideal_entropy),
        ("tangle", r.tangle, ideal_tangle),
    ];
    for (k, (name, value, ideal)) in quantities.into_iter().enumerate() {
        if let Some(v) = value {
            let anchor = published.map(|(suffix, a)| (format!("{suffix} {name}"), a[k]));
            rows.push(input.row(name, v, ideal, anchor));
        }
    }
    Ok(())
}

fn gate_anchor(reference: &str) -> Option<(&'static str, Anchor, Anchor)> {
    let theta = match reference.split_once(':') {
        Some(("cu", t)) => t.parse::<f64>().ok()?,
        _ if reference == "cz" => std::f64::consts::PI,
        _ => return None,
    };
    anchors::CONTROLLED_PHASE_GATES
        .iter()
        // Angles typed on the command line are rounded.
        .find(|(t, ..)| (t - theta).abs() < 1e-3)
        .map(|(_, name, f, s)| (*name, *f, *s))
}

fn gate_rows(input: &Input, rows: &mut Vec<Row>) {
    let r = &input.report;
    let anchor = r.reference.as_deref().and_then(gate_anchor);
    if let Some(v) = r.fidelity {
        rows.push(input.row("fidelity", v, Some(1.0), anchor.map(|(n, f, _)| (format!("{n} fidelity"), f))));
    }
    if let Some(v) = r.linear_entropy {
        rows.push(input.row("linear_entropy", v, Some(0.0), anchor.map(|(n, _, s)| (format!("{n} linear_entropy"), s))));
    }
}

fn write_csv(path: &std::path::Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    write_text(path, std::str::from_utf8(&w.into_inner()?)?)
}

pub fn run(args: &Args, g: &Globals) -> Result<Outcome> {
    let out = g.out()?;
    let mut inputs = Vec::new();
    for path in &args.inputs {
        let report: TomoReport = read_json(path)?;
        if report.schema_version != SCHEMA_VERSION {
            bail!("{}: unsupported schema_version {}", path.display(), report.schema_version);
        }
        inputs.push(Input { source: file_name(path), report });
    }
    let wanted: Vec<Document> = if args.only.is_empty() {
        Document::ALL.into_iter().filter(|d| inputs.iter().any(|i| i.report.kind == d.kind())).collect()
    } else {
        args.only.clone()
    };
    ensure_dir(out)?;
    for doc in wanted {
        let chosen: Vec<&Input> = inputs.iter().filter(|i| i.report.kind == doc.kind()).collect();
        if chosen.is_empty() {
            bail!("no {:?} reports among the inputs for the {} document", doc.kind(), doc.stem());
        }
        let mut rows = Vec::new();
        let mut tables = Vec::new();
        for input in chosen {
            match doc {
                Document::TruthTable => truth_table_rows(input, &mut rows, &mut tables),
                Document::States => state_rows(input, &mut rows)?,
                Document::Gates => gate_rows(input, &mut rows),
            }
        }
        let document = ReportDocument {
            schema_version: SCHEMA_VERSION,
            document: doc.stem().into(),
            description: doc.description().into(),
            note: PUBLISHED_NOTE.into(),
            rows,
            tables,
        };
        write_json(&joined(out, &format!("{}.json", doc.stem())), &document)?;
        write_csv(&joined(out, &format!("{}.csv", doc.stem())), &document.rows)?;
        println!("{}: {} rows", doc.stem(), document.rows.len());
    }
    Ok(Outcome::Success)
}
