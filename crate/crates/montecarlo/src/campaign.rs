//! Bar, cross and feed-forward runs combined into one demon-power estimate.

use serde::{Deserialize, Serialize};

use demonlab_core::analytics::{construct_delta_n_measured, Measured};
use demonlab_core::Normalization;

use crate::config::{RunConfig, RunMode};
use crate::error::{McError, Result};
use crate::run::{run, RunResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMeasurement {
    pub normalization: Normalization,
    /// `(ΔN_FF − ΔN_cross) / rate`, per slot.
    pub value: f64,
    pub stderr: f64,
    /// Incident singles per arm (`N`) or surviving pairs (`C`) per slot.
    pub rate: f64,
    pub bar_unbalanced: bool,
    pub bar: RunResult,
    pub cross: RunResult,
    pub feed_forward: RunResult,
}

fn measured(r: &RunResult) -> Measured<f64> {
    Measured { value: r.delta_n as f64, stderr: r.stderr_delta_n }
}

/// Runs all three modes from `base` (its mode is ignored) and normalizes the
/// demon's imbalance by the feed-forward run's ground-truth incident rate.
pub fn measure_power(base: &RunConfig, norm: Normalization) -> Result<PowerMeasurement> {
    let plain = RunConfig { policy: None, dead_window_slots: 0, ..base.clone() };
    let bar = run(&plain.with_mode(RunMode::Bar))?;
    let cross = run(&plain.with_mode(RunMode::Cross))?;
    let feed_forward = run(&base.with_mode(RunMode::FeedForward))?;
    let gamma = base.slots as f64;
    let rate = match norm {
        Normalization::Singles => feed_forward.photons_in_a as f64 / gamma,
        Normalization::Pairs => feed_forward.surviving_pairs as f64 / gamma,
    };
    if !(rate > 0.0) {
        return Err(McError::Degenerate("no incident photons in the feed-forward run"));
    }
    let est = construct_delta_n_measured(measured(&bar), measured(&cross), measured(&feed_forward));
    Ok(PowerMeasurement {
        normalization: norm,
        value: est.value / gamma / rate,
        stderr: est.stderr / gamma / rate,
        rate,
        bar_unbalanced: est.bar_unbalanced,
        bar,
        cross,
        feed_forward,
    })
}
