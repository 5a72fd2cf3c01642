use crate::config::{RunConfig, RunMode};
use crate::error::{McError, Result};
use crate::run::{run, RunResult};
use crate::stream::derive_seed;

/// Lowest trim tried: a tenfold imbalance is the most we correct.
pub const MIN_TRIM: f64 = 0.1;
/// Width of the final bisection bracket.
pub const TRIM_RESOLUTION: f64 = 1e-3;
const MAX_ITERATIONS: usize = 64;
const CONFIRM_TAG: u64 = 0x636f_6e66;

fn balanced(r: &RunResult) -> bool {
    (r.delta_n as f64).abs() <= 3.0 * r.stderr_delta_n
}

/// Per-arm trims that null the bar-mode imbalance, by bisection on the
/// brighter arm's trim. The result is checked by a bar run with a fresh seed.
pub fn calibrate_balance(config: &RunConfig) -> Result<(f64, f64)> {
    if config.mode != RunMode::Bar {
        return Err(McError::Config("calibration runs in bar mode".into()));
    }
    let base = RunConfig { arm_trim: (1.0, 1.0), ..config.clone() };
    let first = run(&base)?;
    if balanced(&first) {
        return Ok((1.0, 1.0));
    }
    let a_brighter = first.delta_n > 0;
    let trims = |t: f64| if a_brighter { (t, 1.0) } else { (1.0, t) };
    // signed so that positive means the trimmed arm is still brighter
    let excess = |t: f64| -> Result<f64> {
        let r = run(&RunConfig { arm_trim: trims(t), ..base.clone() })?;
        Ok(if a_brighter { r.delta_n as f64 } else { -(r.delta_n as f64) })
    };
    if excess(MIN_TRIM)? > 0.0 {
        return Err(McError::Calibration(format!(
            "imbalance beyond the trim range (trim {MIN_TRIM} still leaves the arm brighter)"
        )));
    }
    let (mut lo, mut hi) = (MIN_TRIM, 1.0);
    let mut iterations = 0;
    while hi - lo > TRIM_RESOLUTION {
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(McError::Calibration("bisection did not converge".into()));
        }
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let trim = trims(0.5 * (lo + hi));
    let check = run(&RunConfig {
        arm_trim: trim,
        seed: derive_seed(config.seed, CONFIRM_TAG),
        ..base
    })?;
    if !balanced(&check) {
        return Err(McError::Calibration(format!(
            "confirming bar run left ΔN = {} ± {:.1}",
            check.delta_n, check.stderr_delta_n
        )));
    }
    Ok(trim)
}
