//! Poisson resampling error bars.

use super::records::{poisson, CountRecord};
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub mean: Vec<f64>,
    /// One sample standard deviation per quantity.
    pub std: Vec<f64>,
    pub n_samples: usize,
    pub failures: usize,
    pub failure_fraction: f64,
    pub seed: u64,
}

/// Resamples every count as `Poisson(count)` and re-runs `estimator`.
/// Sample `i` uses ChaCha stream `i` under `seed` and results are reduced in
/// sample order, so the summary is independent of thread scheduling.
/// Failed resamples are skipped and counted.
pub fn monte_carlo_errors<F>(records: &[CountRecord], estimator: F, n_samples: usize, seed: u64) -> Result<MonteCarloSummary>
where
    F: Fn(&[CountRecord]) -> Result<Vec<f64>> + Sync,
{
    if n_samples < 2 {
        return Err(Error::InvalidParameter("n_samples must be ≥ 2".into()));
    }
    let results: Vec<Option<Vec<f64>>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let resampled: Result<Vec<CountRecord>> = records
                .iter()
                .map(|r| Ok(CountRecord { counts: poisson(&mut rng, r.counts as f64)?, ..r.clone() }))
                .collect();
            resampled.and_then(|rs| estimator(&rs)).ok()
        })
        .collect();
    let ok: Vec<&Vec<f64>> = results.iter().flatten().collect();
    let failures = n_samples - ok.len();
    if ok.len() < 2 {
        return Err(Error::InvalidParameter(format!("{failures} of {n_samples} resamples failed")));
    }
    let k = ok[0].len();
    if ok.iter().any(|v| v.len() != k) {
        return Err(Error::InvalidParameter("estimator output length varies".into()));
    }
    let n = ok.len() as f64;
    let mean: Vec<f64> = (0..k).map(|q| ok.iter().map(|v| v[q]).sum::<f64>() / n).collect();
    let std = (0..k)
        .map(|q| (ok.iter().map(|v| (v[q] - mean[q]).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
        .collect();
    Ok(MonteCarloSummary {
        mean,
        std,
        n_samples,
        failures,
        failure_fraction: failures as f64 / n_samples as f64,
        seed,
    })
}
