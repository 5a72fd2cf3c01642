//! Closed-form demon power in the low-photon regime and the calibrated
//! construction of the imbalance from bar / cross / feed-forward runs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::JointOccupationDistribution;
use crate::params::{CouplingEfficiency, MeanPhotonNumber, ReflectionAmplitude, Visibility};
use crate::protocol::{detector_probs, propagate, tap, DemonDetectors, Policy};
use crate::scalar::Real;
use crate::sources::{make_source, SourceKind, SourceSpec, IN_A};

/// What the imbalance is divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Per incident photon, `ΔN / N`.
    Singles,
    /// Per incident photon pair, `ΔN / C`.
    Pairs,
}

impl Normalization {
    pub fn label(self) -> &'static str {
        match self {
            Normalization::Singles => "singles",
            Normalization::Pairs => "pairs",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Parameters entering the closed form of each source kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PowerModel<T: Real> {
    Uncorrelated {
        nbar: MeanPhotonNumber<T>,
    },
    SplitThermal,
    Correlated {
        eps2: CouplingEfficiency<T>,
    },
    AntiCorrelated {
        eps2: CouplingEfficiency<T>,
        v2: Visibility<T>,
    },
}

impl<T: Real> PowerModel<T> {
    pub fn kind(&self) -> SourceKind {
        match self {
            PowerModel::Uncorrelated { .. } => SourceKind::Uncorrelated,
            PowerModel::SplitThermal => SourceKind::SplitThermal,
            PowerModel::Correlated { .. } => SourceKind::Correlated,
            PowerModel::AntiCorrelated { .. } => SourceKind::AntiCorrelated,
        }
    }

    /// Closed-form model matching a source seen through coupling efficiency `eps2`.
    ///
    /// The thermal closed forms carry no loss term: thinning a thermal beam
    /// only rescales its mean, so the model sees `n̄ ε²`.
    pub fn for_source(spec: &SourceSpec<T>, eps2: CouplingEfficiency<T>) -> Self {
        match *spec {
            SourceSpec::Uncorrelated { nbar } => PowerModel::Uncorrelated {
                nbar: MeanPhotonNumber::new(nbar.value() * eps2.value())
                    .expect("thinning keeps n̄ in range"),
            },
            SourceSpec::SplitThermal { .. } => PowerModel::SplitThermal,
            SourceSpec::Correlated { .. } => PowerModel::Correlated { eps2 },
            SourceSpec::AntiCorrelated { visibility, .. } => PowerModel::AntiCorrelated {
                eps2,
                v2: visibility,
            },
        }
    }
}

/// Demon power `ΔN/N` or `ΔN/C` as a function of the tap amplitude.
///
/// All curves share the `R²(1 − R²)` profile:
///
/// | kind            | singles                    | pairs              |
/// |-----------------|----------------------------|--------------------|
/// | uncorrelated    | `2n̄/(1−n̄)² · R²(1−R²)`     | n/a                |
/// | split thermal   | `0`                        | n/a                |
/// | correlated      | `2ε² · R²(1−R²)`           | `2 · R²(1−R²)`      |
/// | anti-correlated | `2ε²(2v²−1) · R²(1−R²)`    | `2(2v²−1) · R²(1−R²)` |
pub fn closed_form_power<T: Real>(
    model: &PowerModel<T>,
    norm: Normalization,
    r: ReflectionAmplitude<T>,
) -> Result<T> {
    let two = T::lit(2.0);
    let profile = r.reflectivity() * r.transmissivity();
    let kind = model.kind();
    match (model, norm) {
        (PowerModel::Uncorrelated { .. } | PowerModel::SplitThermal, Normalization::Pairs) => {
            Err(Error::UnsupportedNormalization("pairs", kind.label()))
        }
        (PowerModel::Uncorrelated { nbar }, Normalization::Singles) => {
            let n = nbar.value();
            if n >= T::one() {
                return Err(Error::OutOfRange {
                    name: "nbar",
                    value: n.to_f64_lossy(),
                    range: "[0, 1)",
                });
            }
            let gap = T::one() - n;
            Ok(two * n / (gap * gap) * profile)
        }
        (PowerModel::SplitThermal, Normalization::Singles) => Ok(T::zero()),
        (PowerModel::Correlated { eps2 }, Normalization::Singles) => {
            Ok(two * eps2.value() * profile)
        }
        (PowerModel::Correlated { .. }, Normalization::Pairs) => Ok(two * profile),
        (PowerModel::AntiCorrelated { eps2, v2 }, Normalization::Singles) => {
            Ok(two * eps2.value() * v2.contrast() * profile)
        }
        (PowerModel::AntiCorrelated { v2, .. }, Normalization::Pairs) => {
            Ok(two * v2.contrast() * profile)
        }
    }
}

/// Samples of one closed-form curve over a reflectivity grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve<T: Real> {
    pub kind: SourceKind,
    pub normalization: Normalization,
    pub model: PowerModel<T>,
    /// `(r², value)` pairs in grid order.
    pub samples: Vec<(T, T)>,
}

pub fn power_curve<T: Real>(
    model: &PowerModel<T>,
    norm: Normalization,
    reflectivities: &[T],
) -> Result<PowerCurve<T>> {
    let samples = reflectivities
        .iter()
        .map(|&r2| {
            let r = ReflectionAmplitude::from_reflectivity(r2)?;
            Ok((r2, closed_form_power(model, norm, r)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerCurve {
        kind: model.kind(),
        normalization: norm,
        model: *model,
        samples,
    })
}

/// Imbalance attributable to the demon: `ΔN_FF − ΔN_cross`.
pub fn construct_delta_n<T: Real>(bar: T, cross: T, ff: T) -> T {
    let _ = bar;
    ff - cross
}

/// A measured imbalance with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured<T> {
    pub value: T,
    pub stderr: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaNEstimate<T> {
    pub value: T,
    pub stderr: T,
    /// `|ΔN_bar|` exceeded three standard errors: the arms were not balanced.
    pub bar_unbalanced: bool,
}

/// [`construct_delta_n`] with error propagation and the bar-calibration check.
pub fn construct_delta_n_measured<T: Real>(
    bar: Measured<T>,
    cross: Measured<T>,
    ff: Measured<T>,
) -> DeltaNEstimate<T> {
    DeltaNEstimate {
        value: construct_delta_n(bar.value, cross.value, ff.value),
        stderr: (cross.stderr * cross.stderr + ff.stderr * ff.stderr).sqrt(),
        bar_unbalanced: bar.value.abs() > T::lit(3.0) * bar.stderr,
    }
}

/// Location and value of the largest-magnitude point of a power curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakPower<T> {
    /// `None` when the curve vanishes identically.
    pub reflectivity: Option<T>,
    pub value: T,
}

/// Maximizes `|power|` over `r² ∈ [0, 1]` by golden-section search.
pub fn peak_power<T: Real>(model: &PowerModel<T>, norm: Normalization) -> Result<PeakPower<T>> {
    let eval = |r2: T| -> Result<T> {
        closed_form_power(model, norm, ReflectionAmplitude::from_reflectivity(r2)?)
    };
    let probe = eval(T::lit(0.5))?;
    let grid_max = (1..10)
        .map(|i| eval(T::lit(i as f64 / 10.0)).map(|v| v.abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(probe.abs(), T::max);
    if grid_max == T::zero() {
        return Ok(PeakPower {
            reflectivity: None,
            value: T::zero(),
        });
    }
    let phi = T::lit(0.618_033_988_749_894_8);
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(x1)?.abs();
    let mut f2 = eval(x2)?.abs();
    let tol = T::epsilon().sqrt();
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2)?.abs();
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1)?.abs();
        }
    }
    let arg = (lo + hi) / T::lit(2.0);
    Ok(PeakPower {
        reflectivity: Some(arg),
        value: eval(arg)?,
    })
}

/// Ratio of peak powers of two curves, e.g. pairs-normalized correlated power
/// over singles-normalized uncorrelated power.
pub fn peak_ratio<T: Real>(
    numerator: (&PowerModel<T>, Normalization),
    denominator: (&PowerModel<T>, Normalization),
) -> Result<T> {
    let num = peak_power(numerator.0, numerator.1)?;
    let den = peak_power(denominator.0, denominator.1)?;
    if den.value == T::zero() {
        return Err(Error::Degenerate("denominator curve vanishes"));
    }
    Ok(num.value / den.value)
}

/// Photons and pairs entering the taps after loss, per repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentRates<T> {
    /// Mean photon number entering the `A` tap.
    pub singles: T,
    /// Probability that at least two photons survive loss in total.
    pub pairs: T,
}

pub fn incident_rates<T: Real>(
    source: &JointOccupationDistribution<T>,
    eps2: CouplingEfficiency<T>,
) -> Result<IncidentRates<T>> {
    let singles = source.mean_occupation(IN_A)? * eps2.value();
    let r0 = ReflectionAmplitude::new(T::zero())?;
    let tapped = tap(source, r0, eps2, DemonDetectors::default())?;
    let pairs = tapped
        .iter()
        .filter(|(t, _)| t[0] + t[1] + t[2] + t[3] >= 2)
        .map(|(_, p)| p)
        .sum();
    Ok(IncidentRates { singles, pairs })
}

/// Demon power computed from the exact truncated pipeline rather than the
/// closed form: `(P_A − P_B)` over the incident singles or pairs.
pub fn pipeline_power<T: Real>(
    spec: &SourceSpec<T>,
    eps2: CouplingEfficiency<T>,
    r: ReflectionAmplitude<T>,
    norm: Normalization,
    cutoff: u32,
) -> Result<T> {
    let source = make_source(spec, cutoff)?;
    let outcome = propagate(&source, r, eps2, &Policy::canonical(spec.kind()))?;
    let (pa, pb) = detector_probs(&outcome);
    let rates = incident_rates(&source, eps2)?;
    let denom = match norm {
        Normalization::Singles => rates.singles,
        Normalization::Pairs if spec.kind().is_thermal() => {
            return Err(Error::UnsupportedNormalization("pairs", spec.kind().label()))
        }
        Normalization::Pairs => rates.pairs,
    };
    if !(denom > T::zero()) {
        return Err(Error::Degenerate("no incident photons"));
    }
    Ok((pa - pb) / denom)
}
