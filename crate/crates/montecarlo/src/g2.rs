//! Intensity correlation of a simulated thermal stream.

use serde::{Deserialize, Serialize};

use demonlab_core::SourceSpec;

use crate::config::StreamModel;
use crate::error::{McError, Result};
use crate::stream::{chunk_rng, derive_seed, SlotSource, SourceSampler, CHUNK_SLOTS};

/// Smallest stream the estimator accepts.
pub const MIN_G2_SLOTS: u64 = 100_000;

const G2_TAG: u64 = 0x6732;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Point {
    pub tau: u32,
    pub g2: f64,
}

/// `In_A` photon numbers of a `slots`-long stream.
pub fn photon_stream(
    spec: &SourceSpec<f64>,
    slots: u64,
    seed: u64,
    stream: StreamModel,
) -> Result<Vec<u32>> {
    let sampler = SourceSampler::new(spec)?;
    let run_seed = derive_seed(seed, G2_TAG);
    let mut out = Vec::with_capacity(slots as usize);
    let mut start = 0;
    while start < slots {
        let len = (slots - start).min(CHUNK_SLOTS) as usize;
        let mut rng = chunk_rng(run_seed, start / CHUNK_SLOTS);
        let source = SlotSource::new(&sampler, stream, seed, start, len);
        out.extend((0..len).map(|i| source.draw(i, &mut rng).0));
        start += len as u64;
    }
    Ok(out)
}

/// `g²(0) = ⟨n(n−1)⟩/⟨n⟩²` and `g²(τ) = ⟨n_t n_{t+τ}⟩/⟨n⟩²` on one arm.
pub fn g2_of(counts: &[u32], tau_grid: &[u32]) -> Result<Vec<G2Point>> {
    let len = counts.len();
    let mean = counts.iter().map(|&n| n as f64).sum::<f64>() / len as f64;
    if !(mean > 0.0) {
        return Err(McError::Degenerate("the stream carries no photons"));
    }
    tau_grid
        .iter()
        .map(|&tau| {
            let lag = tau as usize;
            if lag >= len {
                return Err(McError::Config(format!("τ = {tau} exceeds the stream length")));
            }
            let moment = if lag == 0 {
                counts.iter().map(|&n| n as f64 * (n as f64 - 1.0)).sum::<f64>() / len as f64
            } else {
                counts
                    .iter()
                    .zip(&counts[lag..])
                    .map(|(&a, &b)| a as f64 * b as f64)
                    .sum::<f64>()
                    / (len - lag) as f64
            };
            Ok(G2Point { tau, g2: moment / (mean * mean) })
        })
        .collect()
}

pub fn estimate_g2(
    spec: &SourceSpec<f64>,
    slots: u64,
    seed: u64,
    stream: StreamModel,
    tau_grid: &[u32],
) -> Result<Vec<G2Point>> {
    if !spec.kind().is_thermal() {
        return Err(McError::Config("g² is estimated for thermal sources only".into()));
    }
    if slots < MIN_G2_SLOTS {
        return Err(McError::Config(format!("g² needs at least {MIN_G2_SLOTS} slots")));
    }
    g2_of(&photon_stream(spec, slots, seed, stream)?, tau_grid)
}

/// `1 + exp(−π (τ/τ_c)²)`.
pub fn gaussian_g2(tau: f64, tau_c: f64) -> f64 {
    1.0 + (-std::f64::consts::PI * (tau / tau_c).powi(2)).exp()
}

/// Least-squares coherence time of the Gaussian model, by golden-section search.
pub fn fit_coherence_time(points: &[G2Point]) -> Result<f64> {
    if points.len() < 2 {
        return Err(McError::Degenerate("need at least two points to fit"));
    }
    let cost = |tc: f64| {
        points
            .iter()
            .map(|p| (p.g2 - gaussian_g2(p.tau as f64, tc)).powi(2))
            .sum::<f64>()
    };
    let span = points.iter().map(|p| p.tau).max().unwrap_or(1).max(1) as f64;
    let (mut lo, mut hi) = (1e-3, 4.0 * span);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    while hi - lo > 1e-9 * span {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = cost(x2);
        }
    }
    Ok(0.5 * (lo + hi))
}
