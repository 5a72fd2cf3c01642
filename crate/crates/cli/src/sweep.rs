use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use demonlab_core::analytics::{closed_form_power, PowerModel};
use demonlab_core::{mutual_information, Reflection, DEFAULT_CUTOFF};
use demonlab_mc::stream::derive_seed;
use demonlab_mc::{measure_power, RunConfig, RunMode};

use crate::config::{SeriesSpec, SweepConfig};
use crate::error::HarnessError;

/// Cutoff for thermal information tables; pair sources are exact at 4.
const THERMAL_INFO_CUTOFF: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub source: String,
    pub normalization: String,
    pub r2: f64,
    pub analytic: Option<f64>,
    pub mc: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub mutual_info_bits: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFailure {
    pub series: usize,
    pub r2: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub rows: Vec<ReportRow>,
    /// Per row: `|mc − analytic| ≤ 3 σ` when both engines ran.
    pub agreement: Vec<Option<bool>>,
    pub failures: Vec<RowFailure>,
}

impl SweepOutcome {
    pub fn all_agree(&self) -> bool {
        self.agreement.iter().all(|a| a.unwrap_or(true))
    }
}

fn row_seed(master: u64, series: usize, point: usize) -> u64 {
    derive_seed(master, ((series as u64) << 32) | point as u64)
}

fn evaluate(
    cfg: &SweepConfig,
    idx: usize,
    s: &SeriesSpec,
    point: usize,
    r2: f64,
) -> Result<(ReportRow, Option<bool>), HarnessError> {
    let r = Reflection::from_reflectivity(r2)?;
    let analytic = if cfg.engine.analytic() {
        let model = PowerModel::for_source(&s.source, s.eps2);
        Some(closed_form_power(&model, s.normalization, r)?)
    } else {
        None
    };
    let mc = if cfg.engine.monte_carlo() {
        let run = RunConfig::new(
            s.source,
            r,
            s.eps2,
            cfg.mc.slots,
            row_seed(cfg.mc.seed, idx, point),
            RunMode::FeedForward,
        );
        Some(measure_power(&run, s.normalization)?)
    } else {
        None
    };
    let mutual_info_bits = if s.information {
        let cutoff = if s.source.kind().is_thermal() { THERMAL_INFO_CUTOFF } else { DEFAULT_CUTOFF };
        Some(mutual_information(&s.source, r, s.eps2, cutoff)?.mutual_info)
    } else {
        None
    };
    let agreement = match (analytic, &mc) {
        (Some(a), Some(m)) => Some((m.value - a).abs() <= 3.0 * m.stderr),
        _ => None,
    };
    Ok((
        ReportRow {
            source: s.source.kind().label().to_string(),
            normalization: s.normalization.label().to_string(),
            r2,
            analytic,
            mc: mc.as_ref().map(|m| m.value),
            mc_stderr: mc.as_ref().map(|m| m.stderr),
            mutual_info_bits,
        },
        agreement,
    ))
}

/// Rows for every (series, r²) in config order. A failing point is recorded
/// in `failures` and leaves no row.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome, HarnessError> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize, f64)> = cfg
        .series
        .iter()
        .enumerate()
        .flat_map(|(i, _)| cfg.r2_grid.iter().enumerate().map(move |(j, &r2)| (i, j, r2)))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(i, j, r2)| (i, r2, evaluate(cfg, i, &cfg.series[i], j, r2)))
        .collect();
    let mut out = SweepOutcome::default();
    for (series, r2, res) in results {
        match res {
            Ok((row, flag)) => {
                out.rows.push(row);
                out.agreement.push(flag);
            }
            Err(e) => {
                log::warn!("series {series} at r² = {r2}: {e}");
                out.failures.push(RowFailure { series, r2, message: e.to_string() });
            }
        }
    }
    Ok(out)
}
