//! Photon-pair sources and two-photon interference.

use super::fock::{apply_linear_layer, beamsplitter, FockState, ModeIndex, ModeSpace, Pol};
use crate::error::{Error, Result};
use crate::linalg;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    /// ε per pass; ε² is proportional to pump power. Zero selects the
    /// single-pair limit in experiments.
    pub pair_amplitude: f64,
    /// ξ: squared label overlap between photons of different passes.
    pub mode_overlap: f64,
    /// Maximum pairs per pass.
    pub truncation: usize,
}

impl SourceConfig {
    pub fn new(pair_amplitude: f64, mode_overlap: f64, truncation: usize) -> Result<Self> {
        if pair_amplitude.is_nan() || pair_amplitude < 0.0 {
            return Err(Error::InvalidParameter(format!("ε = {pair_amplitude} must be ≥ 0")));
        }
        if !(0.0..=1.0).contains(&mode_overlap) {
            return Err(Error::InvalidParameter(format!("ξ = {mode_overlap} outside [0,1]")));
        }
        if truncation == 0 {
            return Err(Error::InvalidParameter("truncation must be ≥ 1".into()));
        }
        Ok(Self { pair_amplitude, mode_overlap, truncation })
    }

    /// Single pairs, indistinguishable photons.
    pub fn ideal() -> Self {
        Self { pair_amplitude: 0.0, mode_overlap: 1.0, truncation: 2 }
    }

    /// `ε = ε_full · √power` with power relative to full pump power.
    pub fn at_power(eps_full: f64, power: f64, mode_overlap: f64) -> Result<Self> {
        if power.is_nan() || power < 0.0 {
            return Err(Error::InvalidParameter(format!("power {power} must be ≥ 0")));
        }
        Self::new(eps_full * power.sqrt(), mode_overlap, 2)
    }

    pub fn is_single_pair(&self) -> bool {
        self.pair_amplitude == 0.0
    }

    /// Labels needed to represent this source.
    pub fn labels(&self) -> usize {
        if self.mode_overlap < 1.0 {
            2
        } else {
            1
        }
    }

    /// Label amplitudes of a photon from pass `k`. Pass 0 defines label 0.
    pub fn label_amplitudes(&self, pass: usize) -> Vec<f64> {
        match (pass, self.labels()) {
            (_, 1) => vec![1.0],
            (0, _) => vec![1.0, 0.0],
            _ => vec![self.mode_overlap.sqrt(), (1.0 - self.mode_overlap).sqrt()],
        }
    }
}

/// One down-conversion pass emitting H-polarized pairs into two spatial modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pass {
    pub signal: usize,
    pub idler: usize,
}

fn pair_operator(cfg: &SourceConfig, space: ModeSpace, pass: usize, p: Pass) -> Vec<(Complex64, Vec<usize>)> {
    let w = cfg.label_amplitudes(pass);
    let mut poly = Vec::new();
    for (la, &wa) in w.iter().enumerate() {
        for (lb, &wb) in w.iter().enumerate() {
            if wa * wb == 0.0 {
                continue;
            }
            let a = space.index(ModeIndex { spatial: p.signal, pol: Pol::H, label: la });
            let b = space.index(ModeIndex { spatial: p.idler, pol: Pol::H, label: lb });
            poly.push((linalg::r(wa * wb), vec![a, b]));
        }
    }
    poly
}

/// Exactly one pair per pass: the leading post-selected term as ε → 0.
pub fn single_pairs(cfg: &SourceConfig, passes: &[Pass], space: ModeSpace, cutoff: usize) -> Result<FockState> {
    let mut st = FockState::vacuum(space, cutoff);
    for (k, &p) in passes.iter().enumerate() {
        st = st.create(&pair_operator(cfg, space, k, p), false)?;
    }
    Ok(st)
}

/// `⊗_passes Σ_{n ≤ truncation} εⁿ |n,n⟩`, each pass normalized. Terms above
/// the photon cutoff are dropped, so the weight lost is `1 − ‖ψ‖²`.
pub fn spdc_state(cfg: &SourceConfig, passes: &[Pass], space: ModeSpace, cutoff: usize) -> Result<FockState> {
    if 2 > cutoff && cfg.pair_amplitude > 0.0 && !passes.is_empty() {
        return Err(Error::CutoffOverflow { found: 2, cutoff });
    }
    let eps = cfg.pair_amplitude;
    let norm: f64 = (0..=cfg.truncation).map(|n| eps.powi(2 * n as i32)).sum::<f64>().sqrt();
    let mut st = FockState::vacuum(space, cutoff);
    for (k, &p) in passes.iter().enumerate() {
        let op = pair_operator(cfg, space, k, p);
        let mut acc = st.clone();
        let mut cur = st.clone();
        for n in 1..=cfg.truncation {
            if eps == 0.0 {
                break;
            }
            cur = cur.create(&op, true)?;
            cur.scale(eps / n as f64);
            acc.accumulate(&cur);
        }
        acc.scale(1.0 / norm);
        st = acc;
    }
    Ok(st)
}

/// Probability of exactly `n` pairs in pass `pass`, read off the photon count
/// in its signal mode.
pub fn pair_number_probability(state: &FockState, p: Pass, n: usize) -> f64 {
    let space = state.space();
    state
        .terms()
        .iter()
        .filter(|((_, occ), _)| {
            let count: usize = (0..space.labels())
                .flat_map(|l| [Pol::H, Pol::V].map(|pol| (l, pol)))
                .map(|(label, pol)| occ[space.index(ModeIndex { spatial: p.signal, pol, label })] as usize)
                .sum();
            count == n
        })
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Closed-form coincidence `ξ(T−R)² + (1−ξ)(T²+R²)` and visibility relative
/// to fully distinguishable photons.
pub fn hom_coincidence(reflectivity: f64, overlap: f64) -> Result<(f64, f64)> {
    check_hom(reflectivity, overlap)?;
    let (r, t) = (reflectivity, 1.0 - reflectivity);
    let classical = t * t + r * r;
    let c = overlap * (t - r).powi(2) + (1.0 - overlap) * classical;
    Ok((c, (classical - c) / classical))
}

/// The same quantities from a Fock simulation of two V photons on a
/// beamsplitter with V reflectivity `R`.
pub fn hom_coincidence_fock(reflectivity: f64, overlap: f64) -> Result<(f64, f64)> {
    check_hom(reflectivity, overlap)?;
    let coincidence = |xi: f64| -> Result<f64> {
        let space = ModeSpace::new(2, 2)?;
        let a = space.index(ModeIndex { spatial: 0, pol: Pol::V, label: 0 });
        let mut poly = Vec::new();
        for (label, w) in [(0, xi.sqrt()), (1, (1.0 - xi).sqrt())] {
            if w > 0.0 {
                let b = space.index(ModeIndex { spatial: 1, pol: Pol::V, label });
                poly.push((linalg::r(w), vec![a, b]));
            }
        }
        let st = FockState::vacuum(space, 2).create(&poly, false)?;
        let out = apply_linear_layer(&beamsplitter(0, 1, 1.0, 1.0 - reflectivity)?, &st, 0)?;
        Ok(out
            .terms()
            .iter()
            .filter(|((_, occ), _)| {
                let in_mode = |s: usize| -> u8 {
                    (0..2)
                        .flat_map(|l| [Pol::H, Pol::V].map(|p| (l, p)))
                        .map(|(label, pol)| occ[space.index(ModeIndex { spatial: s, pol, label })])
                        .sum()
                };
                in_mode(0) == 1 && in_mode(1) == 1
            })
            .map(|(_, a)| a.norm_sqr())
            .sum())
    };
    let c = coincidence(overlap)?;
    let classical = coincidence(0.0)?;
    let v = if classical > 0.0 { (classical - c) / classical } else { 0.0 };
    Ok((c, v))
}

fn check_hom(r: f64, xi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) || !(0.0..=1.0).contains(&xi) {
        return Err(Error::InvalidParameter(format!("R = {r}, ξ = {xi} must lie in [0,1]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hom_examples() {
        let (c, v) = hom_coincidence(0.5, 1.0).unwrap();
        assert!(c.abs() < 1e-15 && (v - 1.0).abs() < 1e-15);
        let (_, v) = hom_coincidence(1.0 / 3.0, 1.0).unwrap();
        assert!((v - 0.8).abs() < 1e-12);
        let (_, v) = hom_coincidence(1.0 / 3.0, 0.0).unwrap();
        assert!(v.abs() < 1e-15);
        assert!(hom_coincidence(1.5, 0.5).is_err());
    }

    #[test]
    fn fock_agrees_with_formula() {
        for r in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.9] {
            for xi in [0.0, 0.3, 0.92, 1.0] {
                let (a, _) = hom_coincidence(r, xi).unwrap();
                let (b, _) = hom_coincidence_fock(r, xi).unwrap();
                assert!((a - b).abs() < 1e-12, "R={r} ξ={xi}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_amplitude_is_vacuum() {
        let cfg = SourceConfig::new(0.0, 1.0, 2).unwrap();
        let space = ModeSpace::new(2, 1).unwrap();
        let st = spdc_state(&cfg, &[Pass { signal: 0, idler: 1 }], space, 6).unwrap();
        assert_eq!(st.terms().len(), 1);
        assert!((st.amplitude(&[0, 0, 0, 0]) - linalg::ONE).norm() < 1e-15);
    }

    #[test]
    fn double_to_single_ratio_is_eps_squared() {
        let p = Pass { signal: 0, idler: 1 };
        for eps in [0.05, 0.1, 0.2] {
            let cfg = SourceConfig::new(eps, 0.9, 2).unwrap();
            let space = ModeSpace::new(2, cfg.labels()).unwrap();
            let st = spdc_state(&cfg, &[p], space, 6).unwrap();
            let ratio = pair_number_probability(&st, p, 2) / pair_number_probability(&st, p, 1);
            assert!((ratio - eps * eps).abs() < 1e-12);
            assert!((st.norm_squared() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_overlap_uses_one_label() {
        assert_eq!(SourceConfig::new(0.1, 1.0, 2).unwrap().labels(), 1);
        assert_eq!(SourceConfig::new(0.1, 0.5, 2).unwrap().label_amplitudes(0), vec![1.0, 0.0]);
    }
}
