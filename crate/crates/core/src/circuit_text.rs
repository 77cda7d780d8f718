//! Line-oriented circuit files.
//!
//! ```text
//! # comment
//! dims=[2,2,3]
//! SWAP targets=[2] params=[0,2]
//! X targets=[2] controls=[(1,1)]
//! Z targets=[2] controls=[(0,1)]
//! ZTHETA targets=[1] params=[0.7853981633974483]
//! U targets=[0] params=[re00,im00,re01,im01,...]
//! ```
//!
//! Gate names: `H X Y Z S SDG T TDG` (no params), `ZTHETA` (one angle),
//! `U` (row-major real/imaginary pairs of a `2^k × 2^k` unitary), and `SWAP`
//! (the two exchanged levels). Controls are `(carrier,value)` pairs with
//! value 0 or 1. Floats are written in shortest round-trip form, so
//! `parse(write(c)) == c`.

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::gate::{Control, GateKind, GateMatrix, PlacedGate};
use crate::linalg::{c, CMat};
use crate::register::RegisterShape;
use std::fmt::Write as _;

pub fn write_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dims={}", list(circuit.shape().dims().iter()));
    for g in circuit.gates() {
        match g {
            PlacedGate::Swap(s) => {
                let _ = writeln!(out, "SWAP targets=[{}] params=[{},{}]", s.carrier, s.a, s.b);
            }
            PlacedGate::Matrix { gate, targets, controls } => {
                let mut line = format!("{} targets={}", gate.label(), list(targets.iter()));
                if !controls.is_empty() {
                    let cs: Vec<String> = controls
                        .iter()
                        .map(|c| format!("({},{})", c.carrier, c.value))
                        .collect();
                    let _ = write!(line, " controls=[{}]", cs.join(","));
                }
                match gate.kind() {
                    GateKind::Phase(t) => {
                        let _ = write!(line, " params=[{t}]");
                    }
                    GateKind::Custom(m) => {
                        let mut ps = Vec::new();
                        for i in 0..m.nrows() {
                            for j in 0..m.ncols() {
                                ps.push(m[(i, j)].re);
                                ps.push(m[(i, j)].im);
                            }
                        }
                        let _ = write!(line, " params={}", list(ps.iter()));
                    }
                    _ => {}
                }
                out.push_str(&line);
                out.push('\n');
            }
        }
    }
    out
}

fn list<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    let parts: Vec<String> = items.map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: lineno, msg };
        if let Some(rest) = line.strip_prefix("dims=") {
            if circuit.is_some() {
                return Err(err("duplicate dims line".into()));
            }
            let dims = parse_list::<usize>(rest).map_err(err)?;
            circuit = Some(Circuit::new(RegisterShape::new(dims)?));
            continue;
        }
        let c = circuit.as_mut().ok_or_else(|| err("gate before dims line".into()))?;
        let gate = parse_gate(line).map_err(err)?;
        c.push(gate).map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
    }
    circuit.ok_or(Error::Parse { line: 0, msg: "missing dims line".into() })
}

fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| format!("expected [..], got {s:?}"))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| format!("bad value {x:?}")))
        .collect()
}

fn parse_controls(s: &str) -> std::result::Result<Vec<Control>, String> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| format!("expected [..], got {s:?}"))?;
    let mut out = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let open = rest.strip_prefix('(').ok_or_else(|| format!("expected '(' in {rest:?}"))?;
        let close = open.find(')').ok_or("unclosed control pair")?;
        let pair: Vec<usize> = open[..close]
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|_| format!("bad control {x:?}")))
            .collect::<std::result::Result<_, _>>()?;
        if pair.len() != 2 {
            return Err(format!("control pair needs two entries: {pair:?}"));
        }
        out.push(Control::new(pair[0], pair[1]));
        rest = open[close + 1..].trim_start().trim_start_matches(',').trim_start();
    }
    Ok(out)
}

fn parse_gate(line: &str) -> std::result::Result<PlacedGate, String> {
    let (name, fields) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let mut targets = None;
    let mut controls = Vec::new();
    let mut params: Vec<f64> = Vec::new();
    for field in split_fields(fields) {
        let (key, value) = field.split_once('=').ok_or_else(|| format!("bad field {field:?}"))?;
        match key {
            "targets" => targets = Some(parse_list::<usize>(value)?),
            "controls" => controls = parse_controls(value)?,
            "params" => params = parse_list::<f64>(value)?,
            other => return Err(format!("unknown field {other:?}")),
        }
    }
    let targets = targets.ok_or("missing targets")?;
    let need = |n: usize| -> std::result::Result<(), String> {
        if params.len() == n {
            Ok(())
        } else {
            Err(format!("{name} expects {n} params, got {}", params.len()))
        }
    };
    let kind = match name {
        "SWAP" => {
            need(2)?;
            if targets.len() != 1 || !controls.is_empty() {
                return Err("SWAP takes one target and no controls".into());
            }
            let level = |x: f64| -> std::result::Result<usize, String> {
                if x >= 0.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(format!("bad level {x}"))
                }
            };
            return Ok(PlacedGate::swap(targets[0], level(params[0])?, level(params[1])?));
        }
        "H" => GateKind::H,
        "X" => GateKind::X,
        "Y" => GateKind::Y,
        "Z" => GateKind::Z,
        "S" => GateKind::S,
        "SDG" => GateKind::Sdg,
        "T" => GateKind::T,
        "TDG" => GateKind::Tdg,
        "ZTHETA" => {
            need(1)?;
            GateKind::Phase(params[0])
        }
        "U" => {
            let n = 1usize << targets.len();
            need(2 * n * n)?;
            let entries: Vec<_> = params.chunks(2).map(|p| c(p[0], p[1])).collect();
            GateKind::Custom(CMat::from_row_slice(n, n, &entries))
        }
        other => return Err(format!("unknown gate {other:?}")),
    };
    if !matches!(name, "ZTHETA" | "U") && !params.is_empty() {
        return Err(format!("{name} takes no params"));
    }
    let gate = GateMatrix::new(kind).map_err(|e| e.to_string())?;
    Ok(PlacedGate::Matrix { gate, targets, controls })
}

/// Splits `a=[..] b=[(..),(..)]` on whitespace outside brackets.
fn split_fields(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = None;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            _ => {}
        }
        if ch.is_whitespace() && depth == 0 {
            if let Some(st) = start.take() {
                out.push(&s[st..i]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push(&s[st..]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{cx, cz};
    use proptest::prelude::*;

    fn sample() -> Circuit {
        let shape = RegisterShape::new(vec![2, 2, 3]).unwrap();
        Circuit::from_gates(
            shape,
            vec![
                PlacedGate::swap(2, 0, 2),
                cx(1, 2),
                cz(0, 2),
                PlacedGate::controlled(GateMatrix::phase(0.1), Control::new(1, 0), 2),
                PlacedGate::single(GateMatrix::custom(crate::linalg::hadamard()).unwrap(), 0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn writes_expected_lines() {
        let text = write_circuit(&sample());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "dims=[2,2,3]");
        assert_eq!(lines[1], "SWAP targets=[2] params=[0,2]");
        assert_eq!(lines[2], "X targets=[2] controls=[(1,1)]");
        assert_eq!(lines[4], "ZTHETA targets=[2] controls=[(1,0)] params=[0.1]");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_circuit("dims=[2,2]\nX targets=[5]\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(parse_circuit("X targets=[0]").is_err());
        assert!(parse_circuit("dims=[2]\nFOO targets=[0]").is_err());
        assert!(parse_circuit("dims=[2]\nZTHETA targets=[0]").is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let c = parse_circuit("# shelving test\n\ndims=[3]\nSWAP targets=[0] params=[0,2]\n").unwrap();
        assert_eq!(c.len(), 1);
    }

    proptest! {
        #[test]
        fn roundtrip_with_random_angles(t in -10.0f64..10.0, v in 0usize..2) {
            let shape = RegisterShape::new(vec![2, 4]).unwrap();
            let c = Circuit::from_gates(shape, vec![
                PlacedGate::swap(1, 0, 3),
                PlacedGate::controlled(GateMatrix::phase(t), Control::new(0, v), 1),
                PlacedGate::single(GateMatrix::custom(crate::linalg::diag(&[
                    crate::linalg::expi(t), crate::linalg::expi(-t / 3.0)])).unwrap(), 0),
            ]).unwrap();
            prop_assert_eq!(parse_circuit(&write_circuit(&c)).unwrap(), c);
        }
    }

    #[test]
    fn roundtrip_sample() {
        let c = sample();
        assert_eq!(parse_circuit(&write_circuit(&c)).unwrap(), c);
    }
}
