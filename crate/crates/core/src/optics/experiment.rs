//! Experiment descriptions, propagation, heralding and logical decoding.

use super::fock::{self, apply_linear_layer, FockState, LinearLayer, ModeIndex, ModeSpace, Pol};
use super::source::{single_pairs, spdc_state, Pass, SourceConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use num_complex::Complex64;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    /// Polarization unitary or filter; columns are the images of H and V.
    Waveplate { mode: usize, matrix: CMat },
    /// Intensity transmissions per polarization; PBS is `(1, 0)`.
    Splitter { a: usize, b: usize, t_h: f64, t_v: f64 },
    Attenuator { mode: usize, pol: Pol, amplitude: f64 },
    /// Keeps the component along `onto` and re-emits it in `exit`.
    Project { mode: usize, onto: [Complex64; 2], exit: Pol },
    /// Exchanges pairs of modes.
    Swap { pairs: Vec<((usize, Pol), (usize, Pol))> },
}

impl Element {
    pub fn layer(&self) -> Result<LinearLayer> {
        match self {
            Element::Waveplate { mode, matrix } => fock::waveplate(*mode, matrix),
            Element::Splitter { a, b, t_h, t_v } => fock::beamsplitter(*a, *b, *t_h, *t_v),
            Element::Attenuator { mode, pol, amplitude } => fock::attenuator(*mode, *pol, *amplitude),
            Element::Project { mode, onto, exit } => {
                let n = (onto[0].norm_sqr() + onto[1].norm_sqr()).sqrt();
                if n < 1e-12 {
                    return Err(Error::InvalidParameter("projection onto the zero vector".into()));
                }
                let mut m = CMat::zeros(2, 2);
                for j in 0..2 {
                    m[(exit.index(), j)] = onto[j].conj() / n;
                }
                fock::waveplate(*mode, &m)
            }
            Element::Swap { pairs } => {
                let mut modes = Vec::new();
                for &(x, y) in pairs {
                    modes.push(x);
                    modes.push(y);
                }
                let n = modes.len();
                let mut m = CMat::zeros(n, n);
                for k in 0..pairs.len() {
                    m[(2 * k + 1, 2 * k)] = linalg::ONE;
                    m[(2 * k, 2 * k + 1)] = linalg::ONE;
                }
                LinearLayer::new(modes, m)
            }
        }
    }

    pub fn spatial_modes(&self) -> Vec<usize> {
        match self {
            Element::Waveplate { mode, .. } | Element::Attenuator { mode, .. } | Element::Project { mode, .. } => {
                vec![*mode]
            }
            Element::Splitter { a, b, .. } => vec![*a, *b],
            Element::Swap { pairs } => pairs.iter().flat_map(|&((a, _), (b, _))| [a, b]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Count {
    Exactly(usize),
    AtLeast(usize),
}

impl Count {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Count::Exactly(k) => n == k,
            Count::AtLeast(k) => n >= k,
        }
    }
}

/// Detector on a spatial mode, blind to polarization and label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Detector {
    pub mode: usize,
    pub count: Count,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeraldPattern {
    pub detectors: Vec<Detector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpticalExperiment {
    pub name: String,
    pub modes: Vec<String>,
    pub passes: Vec<Pass>,
    /// Input spatial mode of each logical qubit.
    pub inputs: Vec<usize>,
    /// Output spatial mode of each logical qubit; H = 0, V = 1.
    pub outputs: Vec<usize>,
    pub elements: Vec<Element>,
    pub herald: HeraldPattern,
    /// Element indices of attenuators that balancing may adjust.
    pub loss_slots: Vec<usize>,
    /// Per-qubit amplitude factors applied to prepared inputs before renormalizing.
    pub prebias: Option<Vec<[f64; 2]>>,
    pub cutoff: usize,
}

/// Heralded output on the logical outputs: unnormalized, `Tr ρ` is the herald probability.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedOutput {
    pub rho: CMat,
}

impl HeraldedOutput {
    pub fn herald_probability(&self) -> f64 {
        linalg::trace(&self.rho).re
    }

    pub fn normalized(&self) -> Option<CMat> {
        let p = self.herald_probability();
        (p > 0.0).then(|| self.rho.map(|x| x / p))
    }
}

/// Heralded logical map for single-pair sources.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedMap {
    /// One Kraus operator per orthogonal environment outcome (sinks, labels,
    /// unheralded modes), including any pre-bias on the inputs.
    pub kraus: Vec<CMat>,
    pub success_per_input: Vec<f64>,
    pub success: f64,
}

impl HeraldedMap {
    pub fn dim(&self) -> usize {
        self.kraus.first().map_or(0, |k| k.ncols())
    }

    /// The map as a single matrix; errors when labels or sinks leave several
    /// Kraus operators.
    pub fn matrix(&self) -> Result<&CMat> {
        match self.kraus.as_slice() {
            [k] => Ok(k),
            _ => Err(Error::InvalidParameter(format!("map has {} Kraus operators", self.kraus.len()))),
        }
    }

    /// Entanglement fidelity of the normalized map with unitary `u`:
    /// `Σ_e |Tr(U†K_e)|² / (d · Tr Σ_e K_e†K_e)`.
    pub fn process_fidelity(&self, u: &CMat) -> f64 {
        let d = u.nrows() as f64;
        let overlap: f64 = self.kraus.iter().map(|k| linalg::trace(&(u.adjoint() * k)).norm_sqr()).sum();
        let weight: f64 = self.kraus.iter().map(|k| linalg::trace(&(k.adjoint() * k)).re).sum();
        overlap / (d * weight)
    }
}

/// Unitary whose first column is `v`.
fn preparation_unitary(v: &CVec) -> CMat {
    let (a, b) = (v[0], v[1]);
    linalg::from_rows(2, &[a, -b.conj(), b, a.conj()])
}

impl OpticalExperiment {
    pub fn qubits(&self) -> usize {
        self.inputs.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.modes.len();
        let check = |m: usize| {
            if m < n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("mode {m} not declared")))
            }
        };
        for p in &self.passes {
            check(p.signal)?;
            check(p.idler)?;
        }
        for &m in self.inputs.iter().chain(&self.outputs) {
            check(m)?;
        }
        for d in &self.herald.detectors {
            check(d.mode)?;
        }
        for e in &self.elements {
            for m in e.spatial_modes() {
                check(m)?;
            }
            e.layer()?;
        }
        if self.inputs.len() != self.outputs.len() {
            return Err(Error::InvalidParameter("inputs and outputs differ in number".into()));
        }
        for &o in &self.outputs {
            let heralded = self.herald.detectors.iter().any(|d| d.mode == o && d.count == Count::Exactly(1));
            if !heralded {
                return Err(Error::InvalidParameter(format!(
                    "output mode {} must be heralded with exactly one photon",
                    self.modes[o]
                )));
            }
        }
        let mut outs = self.outputs.clone();
        outs.sort();
        outs.dedup();
        if outs.len() != self.outputs.len() {
            return Err(Error::InvalidParameter("encoding is not injective".into()));
        }
        for &s in &self.loss_slots {
            if !matches!(self.elements.get(s), Some(Element::Attenuator { .. })) {
                return Err(Error::InvalidParameter(format!("loss slot {s} is not an attenuator")));
            }
        }
        if let Some(pb) = &self.prebias {
            if pb.len() != self.qubits() {
                return Err(Error::InvalidParameter("one pre-bias pair per qubit".into()));
            }
        }
        Ok(())
    }

    pub fn mode_id(&self, name: &str) -> Option<usize> {
        self.modes.iter().position(|m| m == name)
    }

    pub fn slot_amplitudes(&self) -> Vec<f64> {
        self.loss_slots
            .iter()
            .map(|&s| match self.elements[s] {
                Element::Attenuator { amplitude, .. } => amplitude,
                _ => unreachable!("validated"),
            })
            .collect()
    }

    pub fn with_slot_amplitudes(&self, amps: &[f64]) -> OpticalExperiment {
        let mut e = self.clone();
        for (&s, &a) in self.loss_slots.iter().zip(amps) {
            if let Element::Attenuator { amplitude, .. } = &mut e.elements[s] {
                *amplitude = a;
            }
        }
        e
    }

    /// Propagates a product preparation (one polarization vector per qubit).
    pub fn propagate(&self, source: &SourceConfig, prep: &[CVec]) -> Result<FockState> {
        if prep.len() != self.qubits() {
            return Err(Error::DimensionMismatch(prep.len(), self.qubits()));
        }
        let space = ModeSpace::new(self.modes.len(), source.labels())?;
        let mut st = if source.is_single_pair() {
            single_pairs(source, &self.passes, space, self.cutoff)?
        } else {
            spdc_state(source, &self.passes, space, self.cutoff)?
        };
        let base = self.elements.len() as u16;
        for (k, v) in prep.iter().enumerate() {
            let mut v = v.clone();
            if let Some(pb) = &self.prebias {
                v[0] *= pb[k][0];
                v[1] *= pb[k][1];
            }
            let n = v.norm();
            if n < 1e-12 {
                return Err(Error::InvalidParameter(format!("qubit {k} preparation is zero")));
            }
            let u = preparation_unitary(&(v / linalg::r(n)));
            st = apply_linear_layer(&fock::waveplate(self.inputs[k], &u)?, &st, base + k as u16)?;
        }
        for (i, e) in self.elements.iter().enumerate() {
            st = apply_linear_layer(&e.layer()?, &st, i as u16)?;
        }
        Ok(st)
    }

    /// Heralded terms grouped by environment: each group is a vector over logical outputs.
    fn decode(&self, st: &FockState) -> BTreeMap<(Vec<u32>, Vec<u8>), CVec> {
        let space = st.space();
        let dim = 1usize << self.outputs.len();
        let mut groups: BTreeMap<(Vec<u32>, Vec<u8>), CVec> = BTreeMap::new();
        let count_in = |occ: &[u8], s: usize| -> usize {
            (0..space.labels())
                .flat_map(|l| [Pol::H, Pol::V].map(|p| (l, p)))
                .map(|(label, pol)| occ[space.index(ModeIndex { spatial: s, pol, label })] as usize)
                .sum()
        };
        'terms: for ((sinks, occ), &amp) in st.terms() {
            for d in &self.herald.detectors {
                if !d.count.accepts(count_in(occ, d.mode)) {
                    continue 'terms;
                }
            }
            let mut env = occ.clone();
            let mut index = 0;
            for &o in &self.outputs {
                let mut bit = 0;
                for label in 0..space.labels() {
                    let v = space.index(ModeIndex { spatial: o, pol: Pol::V, label });
                    if occ[v] == 1 {
                        bit = 1;
                        env[v] = 0;
                        env[space.index(ModeIndex { spatial: o, pol: Pol::H, label })] = 1;
                    }
                }
                index = index * 2 + bit;
            }
            groups
                .entry((sinks.clone(), env))
                .or_insert_with(|| CVec::zeros(dim))[index] += amp;
        }
        groups
    }

    pub fn heralded_output(&self, source: &SourceConfig, prep: &[CVec]) -> Result<HeraldedOutput> {
        let st = self.propagate(source, prep)?;
        let dim = 1usize << self.outputs.len();
        let mut rho = CMat::zeros(dim, dim);
        for v in self.decode(&st).values() {
            rho += v * v.adjoint();
        }
        Ok(HeraldedOutput { rho })
    }

    /// Kraus decomposition over logical basis inputs. Multi-pair emission makes
    /// the heralded output nonlinear in the input, so ε must be zero.
    pub fn heralded_map(&self, source: &SourceConfig) -> Result<HeraldedMap> {
        if !source.is_single_pair() {
            return Err(Error::InvalidParameter(
                "multi-pair emission makes the heralded map input-dependent; use heralded_output".into(),
            ));
        }
        let k = self.qubits();
        let dim = 1usize << k;
        let mut per_env: BTreeMap<(Vec<u32>, Vec<u8>), CMat> = BTreeMap::new();
        let mut success_per_input = Vec::with_capacity(dim);
        for j in 0..dim {
            let prep = basis_preparation(k, j);
            let st = self.propagate(source, &prep)?;
            let groups = self.decode(&st);
            let p: f64 = groups.values().map(|v| v.norm_squared()).sum();
            if p <= 1e-300 {
                return Err(Error::ZeroHerald(j));
            }
            success_per_input.push(p);
            for (key, v) in groups {
                per_env.entry(key).or_insert_with(|| CMat::zeros(dim, dim)).set_column(j, &v);
            }
        }
        let mut kraus: Vec<CMat> = per_env.into_values().collect();
        if let Some(pb) = &self.prebias {
            let factors: Vec<f64> = (0..dim)
                .map(|j| (0..k).map(|q| pb[q][(j >> (k - 1 - q)) & 1]).product())
                .collect();
            let top = factors.iter().cloned().fold(0.0, f64::max);
            for m in &mut kraus {
                for (j, f) in factors.iter().enumerate() {
                    let mut col = m.column_mut(j);
                    col *= linalg::r(f / top);
                }
            }
        }
        let success = success_per_input.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(HeraldedMap { kraus, success_per_input, success })
    }
}

/// Basis index `j` (qubit 0 most significant) as per-qubit polarization vectors.
pub fn basis_preparation(qubits: usize, j: usize) -> Vec<CVec> {
    (0..qubits)
        .map(|q| {
            let bit = (j >> (qubits - 1 - q)) & 1;
            let mut v = CVec::zeros(2);
            v[bit] = linalg::ONE;
            v
        })
        .collect()
}


