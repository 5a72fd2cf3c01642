//! The `check` suite: oracle comparisons, closed forms and Monte Carlo
//! consistency, each reported as one named pass/fail line.

use serde::Serialize;

use demonlab_core::analytics::{closed_form_power, PowerModel};
use demonlab_core::information::mutual_information;
use demonlab_core::oracle::{
    compare, enumerate, source_weights, symbolic_delta, table_mutual_information, EXACT_TOL,
    FORMULA_TOL,
};
use demonlab_core::protocol::{propagate, Policy, SwitchState};
use demonlab_core::scalar::binomial;
use demonlab_core::{make_source, Efficiency, Normalization, Reflection, Source};
use demonlab_mc::{measure_power, run, RunConfig, RunMode};

use crate::config::DEFAULT_SEED;

/// Signature of the closed-form power, replaceable for fault injection.
pub type ClosedForm =
    fn(&PowerModel<f64>, Normalization, Reflection) -> demonlab_core::Result<f64>;

pub const FULL_SLOTS: u64 = 1_000_000;
pub const QUICK_SLOTS: u64 = 100_000;

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    /// `QUICK_SLOTS` instead of `FULL_SLOTS`, with 4σ instead of 3σ bounds.
    pub quick: bool,
    pub seed: u64,
    pub closed_form: ClosedForm,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { quick: false, seed: DEFAULT_SEED, closed_form: closed_form_power }
    }
}

impl CheckOptions {
    pub fn slots(&self) -> u64 {
        if self.quick { QUICK_SLOTS } else { FULL_SLOTS }
    }

    pub fn sigmas(&self) -> f64 {
        if self.quick { 4.0 } else { 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub results: Vec<CheckResult>,
}

impl CheckSummary {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.pass)
    }
}

fn grid() -> Vec<f64> {
    (0..=5).map(|i| i as f64 * 0.1).collect()
}

fn sources() -> Vec<Source> {
    vec![
        Source::uncorrelated(0.05).expect("n̄"),
        Source::split_thermal(0.05).expect("n̄"),
        Source::correlated(0.1).expect("s"),
        Source::anti_correlated(0.1, 0.87).expect("s, v²"),
    ]
}

fn efficiencies() -> [Efficiency; 2] {
    [Efficiency::lossless(), Efficiency::new(0.14).expect("ε²")]
}

type Outcome = Result<(bool, String), String>;

fn record(results: &mut Vec<CheckResult>, name: impl Into<String>, outcome: Outcome) {
    let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    results.push(CheckResult { name: name.into(), pass, detail });
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn oracle_entrywise(spec: &Source) -> Outcome {
    let source = make_source(spec, 4).map_err(|e| e.to_string())?;
    let mut max = 0.0f64;
    for r2 in grid() {
        let r = Reflection::from_reflectivity(r2).map_err(|e| e.to_string())?;
        for eps in efficiencies() {
            let policy = Policy::canonical(spec.kind());
            let report = enumerate(spec, r, eps, &policy, 4).map_err(|e| e.to_string())?;
            let out = propagate(&source, r, eps, &policy).map_err(|e| e.to_string())?;
            let cmp = compare(&report, &out, EXACT_TOL).map_err(|e| e.to_string())?;
            max = max.max(cmp.max_discrepancy);
        }
    }
    Ok((max <= EXACT_TOL, format!("max discrepancy {max:.2e}")))
}

fn oracle_symbolic(spec: &Source, cutoff: u32) -> Outcome {
    let mut max = 0.0f64;
    for r2 in grid() {
        let r = Reflection::from_reflectivity(r2).map_err(|e| e.to_string())?;
        for eps in efficiencies() {
            let report = enumerate(spec, r, eps, &Policy::canonical(spec.kind()), cutoff)
                .map_err(|e| e.to_string())?;
            max = max.max((report.delta - symbolic_delta(spec, r, eps)).abs());
        }
    }
    Ok((max <= FORMULA_TOL, format!("max |ΔP − symbolic| {max:.2e}")))
}

/// Incident singles per arm and surviving pairs, from the oracle's own weights.
fn oracle_rates(spec: &Source, eps2: f64) -> Result<(f64, f64), String> {
    let (weights, _) = source_weights(spec, 8).map_err(|e| e.to_string())?;
    let mut singles = 0.0;
    let mut pairs = 0.0;
    for ((a, b), w) in weights {
        singles += w * a as f64 * eps2;
        let n = a + b;
        let fewer: f64 = (0..=1u32)
            .filter(|&k| k <= n)
            .map(|k| binomial::<f64>(n, k) * eps2.powi(k as i32) * (1.0 - eps2).powi((n - k) as i32))
            .sum();
        pairs += w * (1.0 - fewer);
    }
    Ok((singles, pairs))
}

fn closed_form_vs_oracle(spec: &Source, norm: Normalization, tol: f64, f: ClosedForm) -> Outcome {
    let mut max = 0.0f64;
    for eps in efficiencies() {
        let model = PowerModel::for_source(spec, eps);
        let (singles, pairs) = oracle_rates(spec, eps.value())?;
        let rate = match norm {
            Normalization::Singles => singles,
            Normalization::Pairs => pairs,
        };
        for r2 in grid() {
            let r = Reflection::from_reflectivity(r2).map_err(|e| e.to_string())?;
            let report = enumerate(spec, r, eps, &Policy::canonical(spec.kind()), 8)
                .map_err(|e| e.to_string())?;
            let closed = f(&model, norm, r).map_err(|e| e.to_string())?;
            max = max.max((report.delta / rate - closed).abs());
        }
    }
    Ok((max <= tol, format!("max |oracle − closed form| {max:.2e} (tol {tol:.0e})")))
}

fn information_vs_oracle(spec: &Source) -> Outcome {
    let post = spec.with_drop_vacuum(!spec.kind().is_thermal());
    let mut diffs = Vec::new();
    for r2 in grid() {
        let r = Reflection::from_reflectivity(r2).map_err(|e| e.to_string())?;
        for eps in efficiencies() {
            let report = enumerate(&post, r, eps, &Policy::constant(SwitchState::Bar), 4)
                .map_err(|e| e.to_string())?;
            let module = mutual_information(spec, r, eps, 4).map_err(|e| e.to_string())?;
            diffs.push((table_mutual_information(&report) - module.mutual_info).abs());
        }
    }
    let max = worst(diffs);
    Ok((max <= 1e-10, format!("max |ΔI| {max:.2e} bits")))
}

fn mc_power(
    opts: &CheckOptions,
    spec: Source,
    r2: f64,
    eps2: f64,
    norm: Normalization,
) -> Outcome {
    let r = Reflection::from_reflectivity(r2).map_err(|e| e.to_string())?;
    let eps = Efficiency::new(eps2).map_err(|e| e.to_string())?;
    let cfg = RunConfig::new(spec, r, eps, opts.slots(), opts.seed, RunMode::FeedForward);
    let m = measure_power(&cfg, norm).map_err(|e| e.to_string())?;
    let target = (opts.closed_form)(&PowerModel::for_source(&spec, eps), norm, r)
        .map_err(|e| e.to_string())?;
    let k = opts.sigmas();
    Ok((
        (m.value - target).abs() <= k * m.stderr,
        format!("MC {:.5} ± {:.5} vs {target:.5} ({k}σ)", m.value, m.stderr),
    ))
}

fn mc_split_null(opts: &CheckOptions) -> Outcome {
    let spec = Source::split_thermal(0.05).map_err(|e| e.to_string())?;
    let r = Reflection::from_reflectivity(0.5).map_err(|e| e.to_string())?;
    let cfg = RunConfig::new(spec, r, Efficiency::lossless(), opts.slots(), opts.seed, RunMode::FeedForward);
    let res = run(&cfg).map_err(|e| e.to_string())?;
    let k = opts.sigmas();
    Ok((
        (res.delta_n as f64).abs() <= k * res.stderr_delta_n,
        format!("ΔN_FF = {} ± {:.1} ({k}σ)", res.delta_n, res.stderr_delta_n),
    ))
}

fn split_closed_form(f: ClosedForm) -> Outcome {
    let spec = Source::split_thermal(0.05).map_err(|e| e.to_string())?;
    let model = PowerModel::for_source(&spec, Efficiency::lossless());
    let mut max = 0.0f64;
    for i in 0..=20 {
        let r = Reflection::from_reflectivity(i as f64 * 0.025).map_err(|e| e.to_string())?;
        max = max.max(f(&model, Normalization::Singles, r).map_err(|e| e.to_string())?.abs());
    }
    Ok((max <= 1e-12, format!("max |ΔN/N| {max:.2e}")))
}

/// Runs every machine-checkable property. Never panics; failures and errors
/// are reported per check.
pub fn run_checks(opts: &CheckOptions) -> CheckSummary {
    let mut results = Vec::new();
    let all = sources();
    for spec in &all {
        record(&mut results, format!("oracle-entrywise/{}", spec.kind()), oracle_entrywise(spec));
    }
    let symbolic: Vec<(Source, u32)> = vec![
        (Source::uncorrelated(0.005).expect("n̄"), 4),
        (Source::uncorrelated(0.05).expect("n̄"), 8),
        (all[1], 4),
        (all[2], 4),
        (all[3], 4),
    ];
    for (spec, cutoff) in &symbolic {
        record(&mut results, format!("oracle-symbolic/{}@{cutoff}", spec.kind()), oracle_symbolic(spec, *cutoff));
    }
    for (spec, norm) in [
        (all[2], Normalization::Singles),
        (all[2], Normalization::Pairs),
        (all[3], Normalization::Singles),
        (all[3], Normalization::Pairs),
    ] {
        record(
            &mut results,
            format!("closed-form-vs-oracle/{}/{norm}", spec.kind()),
            closed_form_vs_oracle(&spec, norm, FORMULA_TOL, opts.closed_form),
        );
    }
    let weak = Source::uncorrelated(0.001).expect("n̄");
    record(
        &mut results,
        "closed-form-vs-oracle/uncorrelated/singles (first order)",
        closed_form_vs_oracle(&weak, Normalization::Singles, 5.0 * 0.001f64.powi(2), opts.closed_form),
    );
    record(&mut results, "closed-form/split-thermal-null", split_closed_form(opts.closed_form));
    for spec in &all {
        record(&mut results, format!("information-vs-oracle/{}", spec.kind()), information_vs_oracle(spec));
    }
    record(
        &mut results,
        "mc/correlated-pairs-peak",
        mc_power(opts, all[2], 0.5, 1.0, Normalization::Pairs),
    );
    record(
        &mut results,
        "mc/anti-correlated-singles",
        mc_power(opts, all[3], 0.3, 1.0, Normalization::Singles),
    );
    record(&mut results, "mc/split-thermal-null", mc_split_null(opts));
    CheckSummary { results }
}
