use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use demonlab_core::analytics::{closed_form_power, PowerModel};
use demonlab_harness::config::{env_seed, load, McConfig, SweepConfig};
use demonlab_harness::report::{render, Format};
use demonlab_harness::sweep::ReportRow;
use demonlab_harness::{presets, run_checks, run_sweep, CheckOptions, Engine, HarnessError};
use demonlab_mc::{estimate_g2, fit_coherence_time, measure_power, run, RunConfig, RunMode, StreamModel};

#[derive(Parser)]
#[command(name = "demonlab", version, about = "Photonic Maxwell's demon simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named parameter set, e.g. fig4b or fig4b-correlated.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the configured seed (and DEMONLAB_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, json or svg.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Demon power against r² for every series of a preset or config.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// analytic, monte_carlo or both.
        #[arg(long)]
        engine: Option<String>,
        /// Monte Carlo slots per run.
        #[arg(long)]
        slots: Option<u64>,
    },
    /// One Monte Carlo campaign (bar, cross and feed-forward runs).
    Mc {
        #[command(flatten)]
        common: Common,
        /// Reflectivity for a preset campaign.
        #[arg(long, default_value_t = 0.5)]
        r2: f64,
        #[arg(long, default_value_t = 1_000_000)]
        slots: u64,
    },
    /// Mutual information against r².
    Info {
        #[command(flatten)]
        common: Common,
    },
    /// Oracle, closed-form and Monte Carlo consistency checks.
    Check {
        /// 10^5 slots per Monte Carlo check with 4σ bounds.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// g²(τ) of a simulated thermal stream.
    G2 {
        #[arg(long, default_value_t = 1.0)]
        nbar: f64,
        /// Gaussian-memory stream with this coherence time (slots).
        #[arg(long)]
        tau_c: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        slots: u64,
        #[arg(long, default_value_t = 24)]
        max_tau: u32,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
}

fn seed_override(flag: Option<u64>) -> Result<Option<u64>, HarnessError> {
    Ok(match flag {
        Some(s) => Some(s),
        None => env_seed()?,
    })
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| HarnessError::Write {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| HarnessError::Write { path: "stdout".into(), message: e.to_string() }),
    }
}

fn sweep_config(common: &Common) -> Result<SweepConfig, HarnessError> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), None) => load(path)?,
        (None, Some(name)) => presets::sweep_config(name)?,
        (None, None) => return Err(HarnessError::Config("give --config or --preset".into())),
        (Some(_), Some(_)) => return Err(HarnessError::Config("--config and --preset are exclusive".into())),
    };
    if let Some(seed) = seed_override(common.seed)? {
        cfg.mc.seed = seed;
    }
    Ok(cfg)
}

fn parse_engine(s: &str) -> Result<Engine, HarnessError> {
    demonlab_harness::config::parse(&format!("\"{}\"", s.replace('-', "_")))
        .map_err(|_| HarnessError::Config(format!("unknown engine `{s}`")))
}

fn emit_rows(cfg: &SweepConfig, rows: &[ReportRow], common: &Common) -> Result<(), HarnessError> {
    let format: Format = common.format.parse()?;
    write_out(common.out.as_deref(), &render(rows, format)?)?;
    for (path, format) in [
        (&cfg.outputs.csv, Format::Csv),
        (&cfg.outputs.json, Format::Json),
        (&cfg.outputs.svg, Format::Svg),
    ] {
        if let Some(path) = path {
            demonlab_harness::emit_report(rows, format, path)?;
        }
    }
    Ok(())
}

fn sweep(common: Common, engine: Option<String>, slots: Option<u64>, info: bool) -> Result<ExitCode, HarnessError> {
    common.format.parse::<Format>()?;
    let mut cfg = sweep_config(&common)?;
    if let Some(e) = engine {
        cfg.engine = parse_engine(&e)?;
    }
    if let Some(s) = slots {
        cfg.mc.slots = s;
    }
    if info {
        cfg.series.iter_mut().for_each(|s| s.information = true);
    }
    let outcome = run_sweep(&cfg)?;
    for f in &outcome.failures {
        log::error!("series {} at r² = {}: {}", f.series, f.r2, f.message);
    }
    for (row, flag) in outcome.rows.iter().zip(&outcome.agreement) {
        if *flag == Some(false) {
            log::warn!("{} {} r² = {}: Monte Carlo disagrees with the closed form beyond 3σ", row.source, row.normalization, row.r2);
        }
    }
    emit_rows(&cfg, &outcome.rows, &common)?;
    Ok(if outcome.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn mc(common: Common, r2: f64, slots: u64) -> Result<ExitCode, HarnessError> {
    let format: Format = common.format.parse()?;
    let seed = seed_override(common.seed)?;
    let (mut run_cfg, norm) = match (&common.config, &common.preset) {
        (Some(path), None) => {
            let c: McConfig = load(path)?;
            c.validate()?;
            (c.run, c.normalization)
        }
        (None, Some(name)) => {
            let s = presets::single(name)
                .ok_or_else(|| HarnessError::UnknownPreset(format!("{name} (mc takes a single-series preset)")))?;
            let r = demonlab_core::Reflection::from_reflectivity(r2)?;
            let cfg = RunConfig::new(s.source, r, s.eps2, slots, demonlab_harness::config::DEFAULT_SEED, RunMode::FeedForward);
            (cfg, Some(s.normalization))
        }
        _ => return Err(HarnessError::Config("give exactly one of --config or --preset".into())),
    };
    if let Some(s) = seed {
        run_cfg.seed = s;
    }
    let text = match norm {
        Some(norm) => {
            let m = measure_power(&run_cfg, norm)?;
            match format {
                Format::Json => pretty(&m),
                Format::Csv | Format::Svg => {
                    let model = PowerModel::for_source(&run_cfg.spec, run_cfg.eps2);
                    let row = ReportRow {
                        source: run_cfg.spec.kind().label().into(),
                        normalization: norm.label().into(),
                        r2: run_cfg.r.reflectivity(),
                        analytic: closed_form_power(&model, norm, run_cfg.r).ok(),
                        mc: Some(m.value),
                        mc_stderr: Some(m.stderr),
                        mutual_info_bits: None,
                    };
                    render(&[row], format)?
                }
            }
        }
        None => {
            let res = run(&run_cfg)?;
            match format {
                Format::Json => pretty(&res),
                _ => format!(
                    "mode,slots,n_a,n_b,coincidences,delta_n,stderr_delta_n,lost_to_dead_window\n{:?},{},{},{},{},{},{},{}\n",
                    res.mode, res.slots, res.n_a, res.n_b, res.coincidences, res.delta_n, res.stderr_delta_n, res.lost_to_dead_window
                ),
            }
        }
    };
    write_out(common.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn check(quick: bool, seed: Option<u64>) -> Result<ExitCode, HarnessError> {
    let mut opts = CheckOptions { quick, ..Default::default() };
    if let Some(s) = seed_override(seed)? {
        opts.seed = s;
    }
    let summary = run_checks(&opts);
    for r in &summary.results {
        println!("{} {:<58} {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    let failed = summary.failures().count();
    println!("{} checks, {failed} failed", summary.results.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[allow(clippy::too_many_arguments)]
fn g2(
    nbar: f64,
    tau_c: Option<f64>,
    slots: u64,
    max_tau: u32,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: String,
) -> Result<ExitCode, HarnessError> {
    let format: Format = format.parse()?;
    let seed = seed_override(seed)?.unwrap_or(demonlab_harness::config::DEFAULT_SEED);
    let spec = demonlab_core::Source::uncorrelated(nbar)?;
    let stream = match tau_c {
        Some(tau_c) => StreamModel::GaussianMemory { tau_c },
        None => StreamModel::Iid,
    };
    let grid: Vec<u32> = (0..=max_tau).collect();
    let points = estimate_g2(&spec, slots, seed, stream, &grid)?;
    let fitted = match tau_c {
        Some(_) => Some(fit_coherence_time(&points)?),
        None => None,
    };
    let text = match format {
        Format::Json => pretty(&serde_json::json!({ "points": points, "fitted_tau_c": fitted })),
        Format::Csv => {
            let mut s = String::from("tau,g2\n");
            for p in &points {
                s.push_str(&format!("{},{}\n", p.tau, p.g2));
            }
            s
        }
        Format::Svg => return Err(HarnessError::UnknownFormat("svg (g2 writes csv or json)".into())),
    };
    if let Some(tc) = fitted {
        log::info!("fitted τ_c = {tc:.3} slots");
    }
    write_out(out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep { common, engine, slots } => sweep(common, engine, slots, false),
        Command::Info { common } => sweep(common, None, None, true),
        Command::Mc { common, r2, slots } => mc(common, r2, slots),
        Command::Check { quick, seed } => check(quick, seed),
        Command::G2 { nbar, tau_c, slots, max_tau, seed, out, format } => {
            g2(nbar, tau_c, slots, max_tau, seed, out, format)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("demonlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
