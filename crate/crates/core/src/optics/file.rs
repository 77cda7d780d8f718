//! Versioned text format for optical experiments.
//!
//! ```text
//! qsl-experiment 1
//! name = cz
//! modes = c t
//! pass = c t
//! inputs = c t
//! outputs = c t
//! herald = c:=1 t:=1
//! cutoff = 6
//! prebias = 0.5773502691896258,1 1,1
//! [elements]
//! splitter c t 1 0.3333333333333333
//! attenuator c H 0.5773502691896258 slot
//! waveplate t 0.7071067811865476,0 0.7071067811865476,0 0.7071067811865476,0 -0.7071067811865476,0
//! project t 1,0 1,0 V
//! swap t.H b.H t.V o.V
//! ```
//!
//! Header keys may appear in any order; `pass` repeats. Complex numbers are
//! `re,im`; waveplate matrices are row-major. Herald counts are `:=k`
//! (exactly) or `:>=k` (at least). `slot` marks an attenuator that balancing
//! may adjust. Floats use shortest round-trip formatting, so parsing what was
//! written gives back the same experiment.

use super::experiment::{Count, Detector, Element, HeraldPattern, OpticalExperiment};
use super::fock::{Pol, DEFAULT_CUTOFF};
use super::source::Pass;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use num_complex::Complex64;
use std::fmt::Write as _;

pub const FORMAT_HEADER: &str = "qsl-experiment";
pub const FORMAT_VERSION: u32 = 1;

fn pol_str(p: Pol) -> &'static str {
    match p {
        Pol::H => "H",
        Pol::V => "V",
    }
}

fn cplx(z: Complex64) -> String {
    format!("{},{}", z.re, z.im)
}

pub fn write_experiment(e: &OpticalExperiment) -> String {
    let m = |i: usize| e.modes[i].as_str();
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_HEADER} {FORMAT_VERSION}");
    let _ = writeln!(out, "name = {}", e.name);
    let _ = writeln!(out, "modes = {}", e.modes.join(" "));
    for p in &e.passes {
        let _ = writeln!(out, "pass = {} {}", m(p.signal), m(p.idler));
    }
    let join = |v: &[usize]| v.iter().map(|&i| m(i)).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "inputs = {}", join(&e.inputs));
    let _ = writeln!(out, "outputs = {}", join(&e.outputs));
    let herald: Vec<String> = e
        .herald
        .detectors
        .iter()
        .map(|d| match d.count {
            Count::Exactly(k) => format!("{}:={k}", m(d.mode)),
            Count::AtLeast(k) => format!("{}:>={k}", m(d.mode)),
        })
        .collect();
    let _ = writeln!(out, "herald = {}", herald.join(" "));
    let _ = writeln!(out, "cutoff = {}", e.cutoff);
    if let Some(pb) = &e.prebias {
        let parts: Vec<String> = pb.iter().map(|[h, v]| format!("{h},{v}")).collect();
        let _ = writeln!(out, "prebias = {}", parts.join(" "));
    }
    out.push_str("[elements]\n");
    for (i, el) in e.elements.iter().enumerate() {
        let line = match el {
            Element::Waveplate { mode, matrix } => {
                let entries: Vec<String> = (0..2)
                    .flat_map(|r| (0..2).map(move |c| (r, c)))
                    .map(|(r, c)| cplx(matrix[(r, c)]))
                    .collect();
                format!("waveplate {} {}", m(*mode), entries.join(" "))
            }
            Element::Splitter { a, b, t_h, t_v } => format!("splitter {} {} {t_h} {t_v}", m(*a), m(*b)),
            Element::Attenuator { mode, pol, amplitude } => {
                let slot = if e.loss_slots.contains(&i) { " slot" } else { "" };
                format!("attenuator {} {} {amplitude}{slot}", m(*mode), pol_str(*pol))
            }
            Element::Project { mode, onto, exit } => {
                format!("project {} {} {} {}", m(*mode), cplx(onto[0]), cplx(onto[1]), pol_str(*exit))
            }
            Element::Swap { pairs } => {
                let parts: Vec<String> = pairs
                    .iter()
                    .map(|&((a, pa), (b, pb))| format!("{}.{} {}.{}", m(a), pol_str(pa), m(b), pol_str(pb)))
                    .collect();
                format!("swap {}", parts.join(" "))
            }
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

struct Ctx<'a> {
    line: usize,
    modes: &'a [String],
}

impl Ctx<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    fn mode(&self, name: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m == name)
            .ok_or_else(|| self.err(format!("unknown mode '{name}'")))
    }

    fn float(&self, s: &str) -> Result<f64> {
        s.parse::<f64>().map_err(|_| self.err(format!("bad number '{s}'")))
    }

    fn complex(&self, s: &str) -> Result<Complex64> {
        let (re, im) = s.split_once(',').ok_or_else(|| self.err(format!("expected re,im in '{s}'")))?;
        Ok(linalg::c(self.float(re)?, self.float(im)?))
    }

    fn pol(&self, s: &str) -> Result<Pol> {
        match s {
            "H" => Ok(Pol::H),
            "V" => Ok(Pol::V),
            _ => Err(self.err(format!("bad polarization '{s}'"))),
        }
    }

    fn mode_pol(&self, s: &str) -> Result<(usize, Pol)> {
        let (m, p) = s.rsplit_once('.').ok_or_else(|| self.err(format!("expected mode.pol in '{s}'")))?;
        Ok((self.mode(m)?, self.pol(p)?))
    }
}

pub fn parse_experiment(text: &str) -> Result<OpticalExperiment> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (n, head) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty file".into() })?;
    match head.split_whitespace().collect::<Vec<_>>().as_slice() {
        [h, v] if *h == FORMAT_HEADER => {
            if v.parse::<u32>().ok() != Some(FORMAT_VERSION) {
                return Err(Error::Schema(format!("unsupported experiment format version '{v}'")));
            }
        }
        _ => return Err(Error::Parse { line: n, msg: format!("expected '{FORMAT_HEADER} {FORMAT_VERSION}'") }),
    }

    let mut header: Vec<(usize, String, String)> = Vec::new();
    let mut body: Vec<(usize, &str)> = Vec::new();
    let mut in_body = false;
    for (n, l) in lines {
        if in_body {
            body.push((n, l));
        } else if l == "[elements]" {
            in_body = true;
        } else {
            let (k, v) = l.split_once('=').ok_or(Error::Parse { line: n, msg: "expected key = value".into() })?;
            header.push((n, k.trim().to_string(), v.trim().to_string()));
        }
    }

    let modes: Vec<String> = header
        .iter()
        .find(|(_, k, _)| k == "modes")
        .ok_or(Error::Parse { line: 0, msg: "missing 'modes'".into() })?
        .2
        .split_whitespace()
        .map(str::to_string)
        .collect();

    let mut name = None;
    let mut passes = Vec::new();
    let mut inputs = None;
    let mut outputs = None;
    let mut herald = None;
    let mut cutoff = DEFAULT_CUTOFF;
    let mut prebias = None;
    for (line, k, v) in &header {
        let cx = Ctx { line: *line, modes: &modes };
        let list = |v: &str| v.split_whitespace().map(|m| cx.mode(m)).collect::<Result<Vec<_>>>();
        match k.as_str() {
            "modes" => {}
            "name" => name = Some(v.clone()),
            "pass" => match list(v)?.as_slice() {
                [s, i] => passes.push(Pass { signal: *s, idler: *i }),
                _ => return Err(cx.err("pass takes two modes")),
            },
            "inputs" => inputs = Some(list(v)?),
            "outputs" => outputs = Some(list(v)?),
            "herald" => {
                let mut ds = Vec::new();
                for item in v.split_whitespace() {
                    let (m, c) = item.split_once(':').ok_or_else(|| cx.err(format!("bad detector '{item}'")))?;
                    let count = if let Some(k) = c.strip_prefix(">=") {
                        Count::AtLeast(k.parse().map_err(|_| cx.err(format!("bad count '{c}'")))?)
                    } else if let Some(k) = c.strip_prefix('=') {
                        Count::Exactly(k.parse().map_err(|_| cx.err(format!("bad count '{c}'")))?)
                    } else {
                        return Err(cx.err(format!("bad count '{c}'")));
                    };
                    ds.push(Detector { mode: cx.mode(m)?, count });
                }
                herald = Some(HeraldPattern { detectors: ds });
            }
            "cutoff" => cutoff = v.parse().map_err(|_| cx.err(format!("bad cutoff '{v}'")))?,
            "prebias" => {
                let mut pb = Vec::new();
                for item in v.split_whitespace() {
                    let (h, vv) = item.split_once(',').ok_or_else(|| cx.err(format!("bad prebias '{item}'")))?;
                    pb.push([cx.float(h)?, cx.float(vv)?]);
                }
                prebias = Some(pb);
            }
            other => return Err(cx.err(format!("unknown key '{other}'"))),
        }
    }

    let mut elements = Vec::new();
    let mut loss_slots = Vec::new();
    for (line, l) in body {
        let cx = Ctx { line, modes: &modes };
        let tok: Vec<&str> = l.split_whitespace().collect();
        let el = match tok.as_slice() {
            ["waveplate", m, a, b, c, d] => {
                let entries = [cx.complex(a)?, cx.complex(b)?, cx.complex(c)?, cx.complex(d)?];
                Element::Waveplate { mode: cx.mode(m)?, matrix: CMat::from_row_slice(2, 2, &entries) }
            }
            ["splitter", a, b, th, tv] => {
                Element::Splitter { a: cx.mode(a)?, b: cx.mode(b)?, t_h: cx.float(th)?, t_v: cx.float(tv)? }
            }
            ["attenuator", m, p, amp, rest @ ..] => {
                match rest {
                    [] => {}
                    ["slot"] => loss_slots.push(elements.len()),
                    _ => return Err(cx.err("trailing tokens after attenuator")),
                }
                Element::Attenuator { mode: cx.mode(m)?, pol: cx.pol(p)?, amplitude: cx.float(amp)? }
            }
            ["project", m, a, b, exit] => {
                Element::Project { mode: cx.mode(m)?, onto: [cx.complex(a)?, cx.complex(b)?], exit: cx.pol(exit)? }
            }
            ["swap", rest @ ..] if !rest.is_empty() && rest.len() % 2 == 0 => {
                let pairs = rest
                    .chunks(2)
                    .map(|p| Ok((cx.mode_pol(p[0])?, cx.mode_pol(p[1])?)))
                    .collect::<Result<Vec<_>>>()?;
                Element::Swap { pairs }
            }
            _ => return Err(cx.err(format!("unrecognized element '{l}'"))),
        };
        elements.push(el);
    }

    let missing = |k: &str| Error::Parse { line: 0, msg: format!("missing '{k}'") };
    let e = OpticalExperiment {
        name: name.ok_or_else(|| missing("name"))?,
        modes,
        passes,
        inputs: inputs.ok_or_else(|| missing("inputs"))?,
        outputs: outputs.ok_or_else(|| missing("outputs"))?,
        elements,
        herald: herald.ok_or_else(|| missing("herald"))?,
        loss_slots,
        prebias,
        cutoff,
    };
    e.validate()?;
    Ok(e)
}
