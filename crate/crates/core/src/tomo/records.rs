//! Measurement settings, count records and their CSV form.
//!
//! A record's `setting_id` is `"{prep}|{bases}"`: the per-qubit preparation
//! letters (or `-` when there is none) and the per-qubit measurement bases,
//! e.g. `HD|ZX`. Records sharing a `setting_id` form one outcome group, and
//! frequencies are normalized within it. `projector_spec` holds one projector
//! letter per qubit, leftmost qubit first.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

pub const COUNTS_SCHEMA: &str = "# qsl-counts 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Projector {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Projector {
    pub const ALL: [Projector; 6] = [Projector::H, Projector::V, Projector::D, Projector::A, Projector::R, Projector::L];

    pub fn letter(self) -> char {
        match self {
            Projector::H => 'H',
            Projector::V => 'V',
            Projector::D => 'D',
            Projector::A => 'A',
            Projector::R => 'R',
            Projector::L => 'L',
        }
    }

    pub fn from_letter(c: char) -> Option<Projector> {
        Projector::ALL.into_iter().find(|p| p.letter() == c)
    }

    /// Polarization state with H = |0⟩, V = |1⟩.
    pub fn vector(self) -> CVec {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            Projector::H => (linalg::ONE, linalg::ZERO),
            Projector::V => (linalg::ZERO, linalg::ONE),
            Projector::D => (linalg::r(s), linalg::r(s)),
            Projector::A => (linalg::r(s), linalg::r(-s)),
            Projector::R => (linalg::r(s), linalg::c(0.0, s)),
            Projector::L => (linalg::r(s), linalg::c(0.0, -s)),
        };
        CVec::from_vec(vec![a, b])
    }

    pub fn basis(self) -> Basis {
        match self {
            Projector::H | Projector::V => Basis::Z,
            Projector::D | Projector::A => Basis::X,
            Projector::R | Projector::L => Basis::Y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    pub fn letter(self) -> char {
        match self {
            Basis::Z => 'Z',
            Basis::X => 'X',
            Basis::Y => 'Y',
        }
    }

    pub fn from_letter(c: char) -> Option<Basis> {
        Basis::ALL.into_iter().find(|b| b.letter() == c)
    }

    pub fn outcomes(self) -> [Projector; 2] {
        match self {
            Basis::Z => [Projector::H, Projector::V],
            Basis::X => [Projector::D, Projector::A],
            Basis::Y => [Projector::R, Projector::L],
        }
    }

    /// Every per-qubit basis choice, leftmost qubit slowest.
    pub fn all_settings(qubits: usize) -> Vec<Vec<Basis>> {
        let mut out = vec![Vec::new()];
        for _ in 0..qubits {
            out = out
                .into_iter()
                .flat_map(|p| {
                    Basis::ALL.into_iter().map(move |b| {
                        let mut q = p.clone();
                        q.push(b);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

/// Product projector, one letter per qubit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MeasurementSetting(pub Vec<Projector>);

impl MeasurementSetting {
    pub fn parse(spec: &str) -> Result<Self> {
        spec.chars()
            .map(|c| Projector::from_letter(c).ok_or_else(|| Error::Schema(format!("bad projector letter '{c}'"))))
            .collect::<Result<Vec<_>>>()
            .and_then(|v| {
                if v.is_empty() {
                    Err(Error::Schema("empty projector spec".into()))
                } else {
                    Ok(MeasurementSetting(v))
                }
            })
    }

    /// All `6^k` product projectors, leftmost qubit slowest.
    pub fn all(qubits: usize) -> Vec<MeasurementSetting> {
        let mut out = vec![Vec::new()];
        for _ in 0..qubits {
            out = out
                .into_iter()
                .flat_map(|p: Vec<Projector>| {
                    Projector::ALL.into_iter().map(move |x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        out.into_iter().map(MeasurementSetting).collect()
    }

    pub fn qubits(&self) -> usize {
        self.0.len()
    }

    pub fn state(&self) -> CVec {
        let mut v = CVec::from_element(1, linalg::ONE);
        for p in &self.0 {
            v = v.kronecker(&p.vector());
        }
        v
    }

    pub fn projector(&self) -> CMat {
        linalg::outer(&self.state())
    }

    pub fn probability(&self, rho: &CMat) -> f64 {
        let v = self.state();
        (v.adjoint() * rho * &v)[(0, 0)].re
    }

    pub fn bases(&self) -> Vec<Basis> {
        self.0.iter().map(|p| p.basis()).collect()
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

pub fn letters(ps: &[Projector]) -> String {
    ps.iter().map(|p| p.letter()).collect()
}

pub fn bases_letters(bs: &[Basis]) -> String {
    bs.iter().map(|b| b.letter()).collect()
}

pub fn setting_id(prep: Option<&[Projector]>, bases: &[Basis]) -> String {
    let prep = prep.map_or_else(|| "-".to_string(), letters);
    format!("{prep}|{}", bases_letters(bases))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting_id: String,
    pub projector_spec: String,
    pub shots: u64,
    pub counts: u64,
}

impl CountRecord {
    pub fn setting(&self) -> Result<MeasurementSetting> {
        MeasurementSetting::parse(&self.projector_spec)
    }

    /// Preparation letters, `None` for `-`.
    pub fn prep(&self) -> Result<Option<Vec<Projector>>> {
        let (prep, _) = self.split_id()?;
        if prep == "-" {
            return Ok(None);
        }
        MeasurementSetting::parse(prep).map(|s| Some(s.0))
    }

    pub fn prep_key(&self) -> Result<&str> {
        self.split_id().map(|(p, _)| p)
    }

    fn split_id(&self) -> Result<(&str, &str)> {
        self.setting_id
            .split_once('|')
            .ok_or_else(|| Error::Schema(format!("setting_id '{}' lacks '|'", self.setting_id)))
    }

    /// Checks that the projector matches the bases named in the setting id.
    pub fn validate(&self) -> Result<()> {
        let (_, bases) = self.split_id()?;
        let s = self.setting()?;
        let named: Option<Vec<Basis>> = bases.chars().map(Basis::from_letter).collect();
        match named {
            Some(b) if b == s.bases() => Ok(()),
            _ => Err(Error::Schema(format!(
                "projector '{}' does not belong to setting '{}'",
                self.projector_spec, self.setting_id
            ))),
        }
    }
}

pub fn write_records<W: Write>(mut w: W, records: &[CountRecord]) -> Result<()> {
    writeln!(w, "{COUNTS_SCHEMA}")?;
    let mut cw = csv::Writer::from_writer(w);
    for r in records {
        cw.serialize(r)?;
    }
    cw.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<CountRecord>> {
    let mut text = String::new();
    let mut r = r;
    r.read_to_string(&mut text)?;
    let mut lines = text.splitn(2, '\n');
    let head = lines.next().unwrap_or("").trim_end();
    if head != COUNTS_SCHEMA {
        return Err(Error::Schema(format!("expected '{COUNTS_SCHEMA}', found '{head}'")));
    }
    let body = lines.next().unwrap_or("");
    let mut rd = csv::Reader::from_reader(body.as_bytes());
    let mut out = Vec::new();
    for rec in rd.deserialize() {
        let rec: CountRecord = rec?;
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}

/// Records grouped by preparation key, in key order.
pub fn group_by_prep(records: &[CountRecord]) -> Result<BTreeMap<String, Vec<CountRecord>>> {
    let mut out: BTreeMap<String, Vec<CountRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.prep_key()?.to_string()).or_default().push(r.clone());
    }
    Ok(out)
}

/// Poisson counts with mean `shots · p` for every outcome of every basis
/// setting, one labelled state at a time. Record `k` draws from its own
/// ChaCha stream `k` under `seed`, so output does not depend on scheduling.
pub fn sample_records(
    states: &[(Option<Vec<Projector>>, CMat)],
    bases: &[Vec<Basis>],
    shots: u64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be positive".into()));
    }
    let mut out = Vec::new();
    for (prep, rho) in states {
        for b in bases {
            let id = setting_id(prep.as_deref(), b);
            let outcomes: Vec<Vec<Projector>> = b.iter().fold(vec![Vec::new()], |acc, basis| {
                acc.into_iter()
                    .flat_map(|p| {
                        basis.outcomes().into_iter().map(move |x| {
                            let mut q = p.clone();
                            q.push(x);
                            q
                        })
                    })
                    .collect()
            });
            for o in outcomes {
                let setting = MeasurementSetting(o);
                let p = setting.probability(rho).clamp(0.0, 1.0);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(out.len() as u64);
                let counts = poisson(&mut rng, shots as f64 * p)?;
                out.push(CountRecord { setting_id: id.clone(), projector_spec: setting.to_string(), shots, counts });
            }
        }
    }
    Ok(out)
}

pub(crate) fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| Error::InvalidParameter(format!("Poisson mean {mean}: {e}")))?;
    Ok(d.sample(rng) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projectors_are_unit_and_paired() {
        for b in Basis::ALL {
            let [p, q] = b.outcomes();
            let overlap = (p.vector().adjoint() * q.vector())[(0, 0)].norm();
            assert!(overlap < 1e-15);
            assert!((p.vector().norm() - 1.0).abs() < 1e-15);
        }
        assert_eq!(MeasurementSetting::all(2).len(), 36);
        assert_eq!(Basis::all_settings(2).len(), 9);
    }

    #[test]
    fn csv_round_trip() {
        let rho = linalg::outer(&MeasurementSetting(vec![Projector::H, Projector::D]).state());
        let recs = sample_records(&[(None, rho)], &Basis::all_settings(2), 100, 7).unwrap();
        assert_eq!(recs.len(), 36);
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(COUNTS_SCHEMA));
        assert!(text.contains("setting_id,projector_spec,shots,counts"));
        assert_eq!(read_records(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn certain_outcome_counts_match_shots_on_average() {
        let rho = linalg::outer(&Projector::H.vector());
        let mut total = 0u64;
        let n = 200;
        for seed in 0..n {
            let recs = sample_records(&[(None, rho.clone())], &[vec![Basis::Z]], 1000, seed).unwrap();
            assert_eq!(recs[1].counts, 0);
            total += recs[0].counts;
        }
        let mean = total as f64 / n as f64;
        // Standard error of the mean is √1000/√200 ≈ 2.2.
        assert!((mean - 1000.0).abs() < 10.0, "{mean}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let rho = linalg::identity(2).scale(0.5);
        let a = sample_records(&[(None, rho.clone())], &[vec![Basis::X]], 500, 3).unwrap();
        let b = sample_records(&[(None, rho)], &[vec![Basis::X]], 500, 3).unwrap();
        assert_eq!(a, b);
    }
}
