//! Fock-space bookkeeping: modes, multi-photon states and linear layers.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ZERO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Amplitudes below this are dropped.
pub const AMPLITUDE_TOL: f64 = 1e-12;
pub const DEFAULT_CUTOFF: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub fn index(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }

    pub fn from_index(i: usize) -> Pol {
        if i == 0 {
            Pol::H
        } else {
            Pol::V
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub spatial: usize,
    pub pol: Pol,
    /// Orthogonal temporal-spectral sector.
    pub label: usize,
}

/// Flat index `((spatial · 2) + pol) · labels + label`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeSpace {
    spatial: usize,
    labels: usize,
}

impl ModeSpace {
    pub fn new(spatial: usize, labels: usize) -> Result<Self> {
        if spatial == 0 || labels == 0 {
            return Err(Error::InvalidParameter("mode space needs ≥ 1 spatial mode and label".into()));
        }
        Ok(Self { spatial, labels })
    }

    pub fn spatial(&self) -> usize {
        self.spatial
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn len(&self) -> usize {
        self.spatial * 2 * self.labels
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, m: ModeIndex) -> usize {
        debug_assert!(m.spatial < self.spatial && m.label < self.labels);
        (m.spatial * 2 + m.pol.index()) * self.labels + m.label
    }

    pub fn mode(&self, flat: usize) -> ModeIndex {
        let label = flat % self.labels;
        let sp = flat / self.labels;
        ModeIndex { spatial: sp / 2, pol: Pol::from_index(sp % 2), label }
    }
}

/// Photons lost to sink modes, as a sorted multiset of sink ids. Different keys
/// are orthogonal and never interfere again.
pub type SinkKey = Vec<u32>;
pub type Occupation = Vec<u8>;

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    space: ModeSpace,
    cutoff: usize,
    terms: BTreeMap<(SinkKey, Occupation), Complex64>,
}

impl FockState {
    pub fn vacuum(space: ModeSpace, cutoff: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((Vec::new(), vec![0; space.len()]), linalg::ONE);
        Self { space, cutoff, terms }
    }

    pub fn space(&self) -> ModeSpace {
        self.space
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn terms(&self) -> &BTreeMap<(SinkKey, Occupation), Complex64> {
        &self.terms
    }

    pub fn norm_squared(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitude(&self, occupation: &[u8]) -> Complex64 {
        self.terms
            .get(&(Vec::new(), occupation.to_vec()))
            .copied()
            .unwrap_or(ZERO)
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.terms.values_mut() {
            *a *= s;
        }
    }

    /// Adds `other`'s amplitudes into `self`.
    pub fn accumulate(&mut self, other: &FockState) {
        for (k, &a) in &other.terms {
            *self.terms.entry(k.clone()).or_insert(ZERO) += a;
        }
        self.terms.retain(|_, a| a.norm() > AMPLITUDE_TOL);
    }

    /// Applies `Σ_k c_k · Π a†` for the monomials `(c_k, modes_k)`. Terms
    /// beyond the cutoff are dropped when `truncate` is set and are an error
    /// otherwise.
    pub fn create(&self, poly: &[(Complex64, Vec<usize>)], truncate: bool) -> Result<FockState> {
        let mut out: BTreeMap<(SinkKey, Occupation), Complex64> = BTreeMap::new();
        for ((sinks, occ), &amp) in &self.terms {
            for (coef, modes) in poly {
                let mut o = occ.clone();
                let mut a = amp * coef;
                for &m in modes {
                    o[m] += 1;
                    a *= (o[m] as f64).sqrt();
                }
                let n: usize = o.iter().map(|&x| x as usize).sum::<usize>() + sinks.len();
                if n > self.cutoff {
                    if truncate {
                        continue;
                    }
                    return Err(Error::CutoffOverflow { found: n, cutoff: self.cutoff });
                }
                *out.entry((sinks.clone(), o)).or_insert(ZERO) += a;
            }
        }
        out.retain(|_, a| a.norm() > AMPLITUDE_TOL);
        Ok(FockState { space: self.space, cutoff: self.cutoff, terms: out })
    }

    /// Photon number of the largest term, sinks included.
    pub fn max_photons(&self) -> usize {
        self.terms
            .keys()
            .map(|(s, o)| s.len() + o.iter().map(|&x| x as usize).sum::<usize>())
            .max()
            .unwrap_or(0)
    }
}

/// Mode transformation on creation operators of `(spatial, pol)` modes,
/// applied identically in every label sector. Column `j` is the image of the
/// creation operator of `modes[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearLayer {
    modes: Vec<(usize, Pol)>,
    matrix: CMat,
}

impl LinearLayer {
    pub fn new(modes: Vec<(usize, Pol)>, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != modes.len() || matrix.ncols() != modes.len() {
            return Err(Error::DimensionMismatch(matrix.nrows(), modes.len()));
        }
        let mut sorted = modes.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != modes.len() {
            return Err(Error::InvalidParameter("layer lists a mode twice".into()));
        }
        let sv = matrix.clone().singular_values();
        if let Some(&s) = sv.iter().find(|&&s| s > 1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("layer gain {s} exceeds 1")));
        }
        Ok(Self { modes, matrix })
    }

    pub fn modes(&self) -> &[(usize, Pol)] {
        &self.modes
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn is_lossless(&self) -> bool {
        linalg::unitarity_deviation(&self.matrix) < 1e-12
    }

    /// Coupling to sink modes: `B = sqrt(I − M†M)`, so `[M; B]` is an isometry.
    pub fn sink_coupling(&self) -> CMat {
        let n = self.modes.len();
        let gram = linalg::identity(n) - self.matrix.adjoint() * &self.matrix;
        linalg::psd_sqrt(&gram)
    }
}

#[derive(Clone, Copy)]
enum Dest {
    Mode(usize),
    Sink(u32),
}

/// Rewrites creation operators through `layer`. Lost photons go to sink modes
/// tagged with `layer_id`, so every application must use a distinct id.
pub fn apply_linear_layer(layer: &LinearLayer, state: &FockState, layer_id: u16) -> Result<FockState> {
    let space = state.space;
    let labels = space.labels();
    for &(s, _) in &layer.modes {
        if s >= space.spatial() {
            return Err(Error::InvalidParameter(format!("layer mode {s} outside the mode space")));
        }
    }
    let b = if layer.is_lossless() { None } else { Some(layer.sink_coupling()) };
    let dim = layer.modes.len();
    // Per flat input mode: the list of destinations with coefficients.
    let mut routes: BTreeMap<usize, Vec<(Dest, Complex64)>> = BTreeMap::new();
    for (j, &(s, p)) in layer.modes.iter().enumerate() {
        for label in 0..labels {
            let from = space.index(ModeIndex { spatial: s, pol: p, label });
            let mut dests = Vec::new();
            for (k, &(s2, p2)) in layer.modes.iter().enumerate() {
                let c = layer.matrix[(k, j)];
                if c.norm() > AMPLITUDE_TOL {
                    dests.push((Dest::Mode(space.index(ModeIndex { spatial: s2, pol: p2, label })), c));
                }
            }
            if let Some(b) = &b {
                for k in 0..dim {
                    let c = b[(k, j)];
                    if c.norm() > AMPLITUDE_TOL {
                        let id = ((layer_id as u32) << 16) | (k * labels + label) as u32;
                        dests.push((Dest::Sink(id), c));
                    }
                }
            }
            routes.insert(from, dests);
        }
    }

    let mut out: BTreeMap<(SinkKey, Occupation), Complex64> = BTreeMap::new();
    for ((sinks, occ), &amp) in &state.terms {
        let mut rest = occ.clone();
        let mut photons = Vec::new();
        let mut norm_in = 1.0;
        for &m in routes.keys() {
            let n = occ[m];
            for _ in 0..n {
                photons.push(m);
            }
            norm_in *= factorial(n as usize);
            rest[m] = 0;
        }
        // Branches: (added mode photons, added sinks) → coefficient.
        let mut branches: BTreeMap<(Vec<usize>, Vec<u32>), Complex64> = BTreeMap::new();
        branches.insert((Vec::new(), Vec::new()), amp / norm_in.sqrt());
        for m in photons {
            let mut next = BTreeMap::new();
            for ((modes, sk), c) in branches {
                for &(d, coef) in &routes[&m] {
                    let mut modes = modes.clone();
                    let mut sk = sk.clone();
                    match d {
                        Dest::Mode(k) => insert_sorted(&mut modes, k),
                        Dest::Sink(id) => insert_sorted(&mut sk, id),
                    }
                    *next.entry((modes, sk)).or_insert(ZERO) += c * coef;
                }
            }
            next.retain(|_, c: &mut Complex64| c.norm() > AMPLITUDE_TOL * 1e-3);
            branches = next;
        }
        for ((modes, new_sinks), c) in branches {
            let mut o = rest.clone();
            for &k in &modes {
                o[k] += 1;
            }
            let mut f = 1.0;
            for (_, run) in runs(&modes) {
                f *= factorial(run);
            }
            for (_, run) in runs(&new_sinks) {
                f *= factorial(run);
            }
            let mut key = sinks.clone();
            for id in new_sinks {
                insert_sorted(&mut key, id);
            }
            *out.entry((key, o)).or_insert(ZERO) += c * f.sqrt();
        }
    }
    out.retain(|_, a| a.norm() > AMPLITUDE_TOL);
    Ok(FockState { space, cutoff: state.cutoff, terms: out })
}

fn insert_sorted<T: Ord + Copy>(v: &mut Vec<T>, x: T) {
    let pos = v.partition_point(|&y| y <= x);
    v.insert(pos, x);
}

fn runs<T: PartialEq + Copy>(v: &[T]) -> Vec<(T, usize)> {
    let mut out: Vec<(T, usize)> = Vec::new();
    for &x in v {
        match out.last_mut() {
            Some((y, n)) if *y == x => *n += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Beamsplitter between spatial modes `a` and `b` with intensity transmissions
/// `t_h`, `t_v`: `a† → t·a† + r·b†`, `b† → t·b† − r·a†` per polarization.
pub fn beamsplitter(a: usize, b: usize, t_h: f64, t_v: f64) -> Result<LinearLayer> {
    if !(0.0..=1.0).contains(&t_h) || !(0.0..=1.0).contains(&t_v) {
        return Err(Error::InvalidParameter("transmission outside [0,1]".into()));
    }
    let modes = vec![(a, Pol::H), (a, Pol::V), (b, Pol::H), (b, Pol::V)];
    let mut m = CMat::zeros(4, 4);
    for (p, t2) in [(0, t_h), (1, t_v)] {
        let (t, r) = (t2.sqrt(), (1.0 - t2).sqrt());
        m[(p, p)] = linalg::r(t);
        m[(2 + p, p)] = linalg::r(r);
        m[(2 + p, 2 + p)] = linalg::r(t);
        m[(p, 2 + p)] = linalg::r(-r);
    }
    LinearLayer::new(modes, m)
}

/// Polarization unitary (or filter) on one spatial mode; columns are the images of H and V.
pub fn waveplate(mode: usize, u: &CMat) -> Result<LinearLayer> {
    LinearLayer::new(vec![(mode, Pol::H), (mode, Pol::V)], u.clone())
}

pub fn attenuator(mode: usize, pol: Pol, amplitude: f64) -> Result<LinearLayer> {
    if !(0.0..=1.0).contains(&amplitude) {
        return Err(Error::InvalidParameter(format!("attenuation {amplitude} outside [0,1]")));
    }
    LinearLayer::new(vec![(mode, pol)], linalg::diag(&[linalg::r(amplitude)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_mode_state(space: ModeSpace, a: ModeIndex, b: ModeIndex) -> FockState {
        FockState::vacuum(space, 6)
            .create(&[(linalg::ONE, vec![space.index(a), space.index(b)])], false)
            .unwrap()
    }

    #[test]
    fn mode_index_round_trip() {
        let s = ModeSpace::new(3, 2).unwrap();
        for f in 0..s.len() {
            assert_eq!(s.index(s.mode(f)), f);
        }
    }

    #[test]
    fn identity_layer_is_trivial() {
        let s = ModeSpace::new(2, 1).unwrap();
        let a = ModeIndex { spatial: 0, pol: Pol::V, label: 0 };
        let b = ModeIndex { spatial: 1, pol: Pol::H, label: 0 };
        let st = two_mode_state(s, a, b);
        let l = beamsplitter(0, 1, 1.0, 1.0).unwrap();
        assert_eq!(apply_linear_layer(&l, &st, 0).unwrap(), st);
    }

    #[test]
    fn balanced_splitter_bunches_photons() {
        let s = ModeSpace::new(2, 1).unwrap();
        let a = ModeIndex { spatial: 0, pol: Pol::H, label: 0 };
        let b = ModeIndex { spatial: 1, pol: Pol::H, label: 0 };
        let out = apply_linear_layer(&beamsplitter(0, 1, 0.5, 0.5).unwrap(), &two_mode_state(s, a, b), 0)
            .unwrap();
        assert_eq!(out.terms().len(), 2);
        let mut two_a = vec![0; 4];
        two_a[s.index(a)] = 2;
        let mut two_b = vec![0; 4];
        two_b[s.index(b)] = 2;
        assert!((out.amplitude(&two_a) - linalg::r(-(0.5f64).sqrt())).norm() < 1e-12);
        assert!((out.amplitude(&two_b) - linalg::r((0.5f64).sqrt())).norm() < 1e-12);
    }

    #[test]
    fn attenuator_scales_norm() {
        let s = ModeSpace::new(1, 1).unwrap();
        let st = FockState::vacuum(s, 6).create(&[(linalg::ONE, vec![0])], false).unwrap();
        let out = apply_linear_layer(&attenuator(0, Pol::H, 1.0 / 3f64.sqrt()).unwrap(), &st, 0).unwrap();
        let kept: f64 = out.terms().iter().filter(|((k, _), _)| k.is_empty()).map(|(_, a)| a.norm_sqr()).sum();
        assert!((kept - 1.0 / 3.0).abs() < 1e-12);
        assert!((out.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gain_is_rejected() {
        assert!(LinearLayer::new(vec![(0, Pol::H)], linalg::diag(&[linalg::r(1.5)])).is_err());
        assert!(attenuator(0, Pol::H, 1.2).is_err());
    }

    #[test]
    fn cutoff_is_enforced() {
        let s = ModeSpace::new(1, 1).unwrap();
        let v = FockState::vacuum(s, 1);
        assert!(matches!(
            v.create(&[(linalg::ONE, vec![0, 0])], false),
            Err(Error::CutoffOverflow { found: 2, cutoff: 1 })
        ));
        let t = v.create(&[(linalg::ONE, vec![0, 0])], true).unwrap();
        assert_eq!(t.norm_squared(), 0.0);
    }
}
