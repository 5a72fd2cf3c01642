//! Named parameter sets of the power and information figures.
//!
//! All share `n̄ = 0.05`, `ε² = 0.14`, `v² = 0.87` and a pair source with
//! `s = 0.1` (`s² = 0.01`). Thermal series use `ε² = 1`: their `n̄` is the
//! fitted detected mean, and a lossy thermal beam is again thermal. The
//! `fig5b` bundle is the ideal case: pairs counted by coincidences, i.e. no
//! coupling loss.

use demonlab_core::{Efficiency, Normalization, Source};

use crate::config::{SeriesSpec, SweepConfig};
use crate::error::HarnessError;

pub const NBAR: f64 = 0.05;
pub const EPS2: f64 = 0.14;
pub const V2: f64 = 0.87;
pub const SQUEEZING: f64 = 0.1;

pub const BUNDLES: [&str; 4] = ["fig4a", "fig4b", "fig5a", "fig5b"];

fn series(source: Source, normalization: Normalization, eps2: f64, information: bool) -> SeriesSpec {
    SeriesSpec {
        source,
        normalization,
        eps2: Efficiency::new(eps2).expect("preset efficiency"),
        information,
    }
}

fn uncorrelated() -> Source {
    Source::uncorrelated(NBAR).expect("preset n̄")
}

fn split() -> Source {
    Source::split_thermal(NBAR).expect("preset n̄")
}

fn correlated() -> Source {
    Source::correlated(SQUEEZING).expect("preset s")
}

fn anti() -> Source {
    Source::anti_correlated(SQUEEZING, V2).expect("preset v²")
}

/// The series of a bundle, in legend order.
pub fn bundle(name: &str) -> Option<Vec<SeriesSpec>> {
    use Normalization::{Pairs, Singles};
    Some(match name {
        "fig4a" => vec![
            series(uncorrelated(), Singles, 1.0, false),
            series(split(), Singles, 1.0, false),
            series(correlated(), Singles, EPS2, false),
            series(anti(), Singles, EPS2, false),
        ],
        "fig4b" => vec![
            series(uncorrelated(), Singles, 1.0, false),
            series(correlated(), Pairs, EPS2, false),
            series(anti(), Pairs, EPS2, false),
        ],
        "fig5a" | "fig5b" => {
            let eps2 = if name == "fig5a" { EPS2 } else { 1.0 };
            vec![
                series(uncorrelated(), Singles, 1.0, true),
                series(split(), Singles, 1.0, true),
                series(correlated(), Pairs, eps2, true),
                series(anti(), Pairs, eps2, true),
            ]
        }
        _ => return None,
    })
}

/// `fig4b-correlated` and similar: one series of a bundle, by source label.
pub fn single(name: &str) -> Option<SeriesSpec> {
    let (bundle_name, kind) = name.split_once('-')?;
    bundle(bundle_name)?
        .into_iter()
        .find(|s| s.source.kind().label() == kind || short_label(s) == kind)
}

fn short_label(s: &SeriesSpec) -> &'static str {
    match s.source.kind().label() {
        "split_thermal" => "split",
        "anti_correlated" => "anticorrelated",
        other => other,
    }
}

/// Every accepted preset name.
pub fn names() -> Vec<String> {
    let mut out: Vec<String> = BUNDLES.iter().map(|s| s.to_string()).collect();
    for b in BUNDLES {
        for s in bundle(b).unwrap_or_default() {
            out.push(format!("{b}-{}", short_label(&s)));
        }
    }
    out
}

pub fn sweep_config(name: &str) -> Result<SweepConfig, HarnessError> {
    bundle(name)
        .or_else(|| single(name).map(|s| vec![s]))
        .map(SweepConfig::new)
        .ok_or_else(|| HarnessError::UnknownPreset(name.to_string()))
}
