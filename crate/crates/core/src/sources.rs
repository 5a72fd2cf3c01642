//! The four input baths on modes `In_A`, `In_B`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{beamsplitter_split, JointOccupationDistribution};
use crate::params::{MeanPhotonNumber, ReflectionAmplitude, SqueezingParameter, Visibility};
use crate::scalar::Real;

pub const IN_A: &str = "In_A";
pub const IN_B: &str = "In_B";

/// Lost mass tolerated when a single-mode marginal statistic is requested.
pub const MARGINAL_TRUNCATION_BOUND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    /// Two independent thermal beams.
    Uncorrelated,
    /// One thermal beam divided on a balanced beamsplitter.
    SplitThermal,
    /// Cross-mode photon pairs (two-mode squeezed vacuum, two-photon truncation).
    Correlated,
    /// Two-photon N00N state with imperfect bunching.
    AntiCorrelated,
}

impl SourceKind {
    pub const ALL: [SourceKind; 4] = [
        SourceKind::Uncorrelated,
        SourceKind::SplitThermal,
        SourceKind::Correlated,
        SourceKind::AntiCorrelated,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SourceKind::Uncorrelated => "uncorrelated",
            SourceKind::SplitThermal => "split_thermal",
            SourceKind::Correlated => "correlated",
            SourceKind::AntiCorrelated => "anti_correlated",
        }
    }

    /// Thermal kinds are parametrized by `n̄`, pair kinds by squeezing.
    pub fn is_thermal(self) -> bool {
        matches!(self, SourceKind::Uncorrelated | SourceKind::SplitThermal)
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A bath type together with exactly the parameters it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSourceSpec", into = "RawSourceSpec")]
pub enum SourceSpec<T: Real> {
    Uncorrelated {
        nbar: MeanPhotonNumber<T>,
    },
    /// `nbar` is the mean photon number of each output mode, not of the
    /// beam before splitting.
    SplitThermal {
        nbar: MeanPhotonNumber<T>,
    },
    Correlated {
        squeezing: SqueezingParameter<T>,
        drop_vacuum: bool,
    },
    AntiCorrelated {
        squeezing: SqueezingParameter<T>,
        visibility: Visibility<T>,
        drop_vacuum: bool,
        /// Adds the `(|1,0⟩ + |0,1⟩)` mixture that a full N00N ladder would carry.
        single_photon_component: bool,
    },
}

impl<T: Real> SourceSpec<T> {
    pub fn uncorrelated(nbar: T) -> Result<Self> {
        Ok(Self::Uncorrelated {
            nbar: MeanPhotonNumber::new(nbar)?,
        })
    }

    pub fn split_thermal(nbar: T) -> Result<Self> {
        Ok(Self::SplitThermal {
            nbar: MeanPhotonNumber::new(nbar)?,
        })
    }

    pub fn correlated(s: T) -> Result<Self> {
        Ok(Self::Correlated {
            squeezing: SqueezingParameter::new(s)?,
            drop_vacuum: false,
        })
    }

    pub fn anti_correlated(s: T, v2: T) -> Result<Self> {
        Ok(Self::AntiCorrelated {
            squeezing: SqueezingParameter::new(s)?,
            visibility: Visibility::new(v2)?,
            drop_vacuum: false,
            single_photon_component: false,
        })
    }

    pub fn kind(&self) -> SourceKind {
        match self {
            Self::Uncorrelated { .. } => SourceKind::Uncorrelated,
            Self::SplitThermal { .. } => SourceKind::SplitThermal,
            Self::Correlated { .. } => SourceKind::Correlated,
            Self::AntiCorrelated { .. } => SourceKind::AntiCorrelated,
        }
    }

    /// Same source with vacuum post-selection switched on or off. Thermal
    /// kinds are returned unchanged.
    pub fn with_drop_vacuum(mut self, on: bool) -> Self {
        match &mut self {
            Self::Correlated { drop_vacuum, .. } | Self::AntiCorrelated { drop_vacuum, .. } => {
                *drop_vacuum = on
            }
            _ => {}
        }
        self
    }

    pub fn drops_vacuum(&self) -> bool {
        match self {
            Self::Correlated { drop_vacuum, .. } | Self::AntiCorrelated { drop_vacuum, .. } => {
                *drop_vacuum
            }
            _ => false,
        }
    }

    /// Anti-correlated source with the one-photon component toggled.
    pub fn with_single_photon_component(mut self, on: bool) -> Self {
        if let Self::AntiCorrelated {
            single_photon_component,
            ..
        } = &mut self
        {
            *single_photon_component = on;
        }
        self
    }

    /// Probability of the photon-pair terms in the truncated pair sources,
    /// `s² / (1 + s²)` before any vacuum post-selection.
    pub fn pair_probability(&self) -> Option<T> {
        match self {
            Self::Correlated { squeezing, .. } | Self::AntiCorrelated { squeezing, .. } => {
                let s2 = squeezing.pair_weight();
                Some(s2 / (T::one() + s2))
            }
            _ => None,
        }
    }
}

/// Builds the joint distribution over `(In_A, In_B)` for a source.
pub fn make_source<T: Real>(
    spec: &SourceSpec<T>,
    cutoff: u32,
) -> Result<JointOccupationDistribution<T>> {
    let modes = [IN_A, IN_B];
    let dist = match *spec {
        SourceSpec::Uncorrelated { nbar } => {
            let a = JointOccupationDistribution::thermal(IN_A, nbar, cutoff);
            let b = JointOccupationDistribution::thermal(IN_B, nbar, cutoff);
            a.product(&b, cutoff)?
        }
        SourceSpec::SplitThermal { nbar } => {
            let total = MeanPhotonNumber::new(T::lit(2.0) * nbar.value())?;
            let beam = JointOccupationDistribution::thermal(IN_A, total, cutoff);
            let half = ReflectionAmplitude::from_reflectivity(T::lit(0.5))?;
            beamsplitter_split(&beam, IN_A, half, IN_B)?
        }
        SourceSpec::Correlated { squeezing, .. } => {
            let s2 = squeezing.pair_weight();
            JointOccupationDistribution::from_weights(
                &modes,
                cutoff,
                [(vec![0, 0], T::one()), (vec![1, 1], s2)],
            )?
        }
        SourceSpec::AntiCorrelated {
            squeezing,
            visibility,
            single_photon_component,
            ..
        } => {
            let s2 = squeezing.pair_weight();
            let v2 = visibility.value();
            let half = T::lit(0.5);
            let pairs = [
                (vec![2, 0], s2 * v2 * half),
                (vec![0, 2], s2 * v2 * half),
                (vec![1, 1], s2 * (T::one() - v2)),
            ];
            if single_photon_component {
                // The one-photon mixture takes its probability from vacuum so
                // the pair terms keep the weight they have without it.
                if s2 > T::one() {
                    return Err(Error::InconsistentSource(
                        "single-photon component requires s² ≤ 1".into(),
                    ));
                }
                let norm = T::one() + s2;
                let single = s2 / norm;
                let mut entries = vec![
                    (vec![0, 0], (T::one() - s2) / norm),
                    (vec![1, 0], single * half),
                    (vec![0, 1], single * half),
                ];
                entries.extend(pairs.into_iter().map(|(t, w)| (t, w / norm)));
                JointOccupationDistribution::from_entries(&modes, cutoff, entries)?
            } else {
                let mut entries = vec![(vec![0, 0], T::one())];
                entries.extend(pairs);
                JointOccupationDistribution::from_weights(&modes, cutoff, entries)?
            }
        }
    };
    if spec.drops_vacuum() {
        dist.condition(|t| t.iter().any(|&n| n > 0))
    } else {
        Ok(dist)
    }
}

/// Zero-delay second-order coherence of the `In_A` marginal.
pub fn marginal_g2_zero<T: Real>(spec: &SourceSpec<T>, cutoff: u32) -> Result<T> {
    let dist = make_source(spec, cutoff)?;
    let lost = dist.lost_mass().to_f64_lossy();
    if lost >= MARGINAL_TRUNCATION_BOUND {
        return Err(Error::Truncation {
            lost,
            bound: MARGINAL_TRUNCATION_BOUND,
        });
    }
    dist.marginal(&[IN_A])?.g2_zero(IN_A)
}

/// Flat, serializable form of [`SourceSpec`] used in configuration files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSourceSpec {
    pub kind: Option<SourceKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop_vacuum: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_photon_component: Option<bool>,
}

impl<T: Real> TryFrom<RawSourceSpec> for SourceSpec<T> {
    type Error = Error;

    fn try_from(raw: RawSourceSpec) -> Result<Self> {
        let kind = raw
            .kind
            .ok_or_else(|| Error::InconsistentSource("missing `kind`".into()))?;
        let forbid = |present: bool, field: &str| {
            if present {
                Err(Error::InconsistentSource(format!(
                    "`{field}` is not a parameter of {kind} sources"
                )))
            } else {
                Ok(())
            }
        };
        let require = |value: Option<f64>, field: &str| {
            value.ok_or_else(|| {
                Error::InconsistentSource(format!("{kind} sources require `{field}`"))
            })
        };
        if kind.is_thermal() {
            forbid(raw.s.is_some(), "s")?;
            forbid(raw.v2.is_some(), "v2")?;
            forbid(raw.drop_vacuum.is_some(), "drop_vacuum")?;
            forbid(raw.single_photon_component.is_some(), "single_photon_component")?;
            let nbar = MeanPhotonNumber::new(T::lit(require(raw.nbar, "nbar")?))?;
            Ok(match kind {
                SourceKind::Uncorrelated => Self::Uncorrelated { nbar },
                _ => Self::SplitThermal { nbar },
            })
        } else {
            forbid(raw.nbar.is_some(), "nbar")?;
            let squeezing = SqueezingParameter::new(T::lit(require(raw.s, "s")?))?;
            let drop_vacuum = raw.drop_vacuum.unwrap_or(false);
            if kind == SourceKind::Correlated {
                forbid(raw.v2.is_some(), "v2")?;
                forbid(raw.single_photon_component.is_some(), "single_photon_component")?;
                Ok(Self::Correlated {
                    squeezing,
                    drop_vacuum,
                })
            } else {
                Ok(Self::AntiCorrelated {
                    squeezing,
                    visibility: Visibility::new(T::lit(require(raw.v2, "v2")?))?,
                    drop_vacuum,
                    single_photon_component: raw.single_photon_component.unwrap_or(false),
                })
            }
        }
    }
}

impl<T: Real> From<SourceSpec<T>> for RawSourceSpec {
    fn from(spec: SourceSpec<T>) -> Self {
        let mut raw = RawSourceSpec {
            kind: Some(spec.kind()),
            ..Default::default()
        };
        match spec {
            SourceSpec::Uncorrelated { nbar } | SourceSpec::SplitThermal { nbar } => {
                raw.nbar = Some(nbar.into());
            }
            SourceSpec::Correlated {
                squeezing,
                drop_vacuum,
            } => {
                raw.s = Some(squeezing.into());
                raw.drop_vacuum = Some(drop_vacuum);
            }
            SourceSpec::AntiCorrelated {
                squeezing,
                visibility,
                drop_vacuum,
                single_photon_component,
            } => {
                raw.s = Some(squeezing.into());
                raw.v2 = Some(visibility.into());
                raw.drop_vacuum = Some(drop_vacuum);
                raw.single_photon_component = Some(single_photon_component);
            }
        }
        raw
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{thermal_pmf, DEFAULT_CUTOFF};

    #[test]
    fn correlated_pair_only_after_postselection() {
        let spec = SourceSpec::correlated(1e-6_f64).unwrap().with_drop_vacuum(true);
        let d = make_source(&spec, DEFAULT_CUTOFF).unwrap();
        assert!((d.probability(&[1, 1]) - 1.0).abs() < 1e-15);
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn perfect_noon_after_postselection() {
        let spec = SourceSpec::anti_correlated(0.1_f64, 1.0)
            .unwrap()
            .with_drop_vacuum(true);
        let d = make_source(&spec, DEFAULT_CUTOFF).unwrap();
        assert!((d.probability(&[2, 0]) - 0.5).abs() < 1e-15);
        assert!((d.probability(&[0, 2]) - 0.5).abs() < 1e-15);
        assert_eq!(d.probability(&[1, 1]), 0.0);
    }

    #[test]
    fn split_thermal_marginals_are_thermal() {
        let nbar = 0.05_f64;
        let spec = SourceSpec::split_thermal(nbar).unwrap();
        let d = make_source(&spec, 30).unwrap();
        let n = MeanPhotonNumber::new(nbar).unwrap();
        for mode in [IN_A, IN_B] {
            let m = d.marginal(&[mode]).unwrap();
            for k in 0..10 {
                assert!((m.probability(&[k]) - thermal_pmf(n, k)).abs() < 1e-12, "{mode} {k}");
            }
        }
    }

    #[test]
    fn all_sources_normalized_and_symmetric() {
        let specs = [
            SourceSpec::uncorrelated(0.05_f64).unwrap(),
            SourceSpec::split_thermal(0.05).unwrap(),
            SourceSpec::correlated(0.1).unwrap(),
            SourceSpec::anti_correlated(0.1, 0.87).unwrap(),
            SourceSpec::anti_correlated(0.1, 0.87)
                .unwrap()
                .with_single_photon_component(true),
        ];
        for spec in specs {
            let d = make_source(&spec, DEFAULT_CUTOFF).unwrap();
            d.check_normalized().unwrap();
            for (t, p) in d.iter() {
                assert!((d.probability(&[t[1], t[0]]) - p).abs() < 1e-15, "{spec:?}");
            }
        }
    }

    #[test]
    fn noon_has_no_cross_coincidence_at_full_visibility() {
        let d = make_source(&SourceSpec::anti_correlated(0.3_f64, 1.0).unwrap(), 4).unwrap();
        assert_eq!(d.probability(&[1, 1]), 0.0);
    }

    #[test]
    fn correlated_marginal_matches_thermal_on_retained_terms() {
        // two-photon truncation: only P(0) and P(1) are kept, and they agree
        // with the thermal distribution of n̄ = sinh²(s) to O(s⁴)
        let s = 0.05_f64;
        let spec = SourceSpec::correlated(s).unwrap();
        let m = make_source(&spec, 4).unwrap().marginal(&[IN_B]).unwrap();
        let nbar = SqueezingParameter::new(s).unwrap().mean_photon_number();
        for k in 0..2 {
            assert!((m.probability(&[k]) - thermal_pmf(nbar, k)).abs() < 2.0 * s.powi(4));
        }
    }

    #[test]
    fn g2_of_thermal_marginals() {
        for nbar in [0.001_f64, 0.02, 0.05] {
            let u = marginal_g2_zero(&SourceSpec::uncorrelated(nbar).unwrap(), 20).unwrap();
            assert!((u - 2.0).abs() < 1e-6);
            let s = marginal_g2_zero(&SourceSpec::split_thermal(nbar).unwrap(), 24).unwrap();
            assert!((s - 2.0).abs() < 1e-6);
        }
        let short = marginal_g2_zero(&SourceSpec::uncorrelated(0.05_f64).unwrap(), 4);
        assert!(matches!(short, Err(Error::Truncation { .. })));
    }

    #[test]
    fn single_photon_component_keeps_pair_weight() {
        let base = SourceSpec::anti_correlated(0.2_f64, 0.87).unwrap();
        let with = base.with_single_photon_component(true);
        let a = make_source(&base, 4).unwrap();
        let b = make_source(&with, 4).unwrap();
        for t in [[2, 0], [0, 2], [1, 1]] {
            assert!((a.probability(&t) - b.probability(&t)).abs() < 1e-15);
        }
        assert!(b.probability(&[1, 0]) > 0.0);
    }

    #[test]
    fn raw_spec_validation() {
        let ok: SourceSpec<f64> =
            serde_json::from_str(r#"{"kind":"anti_correlated","s":0.1,"v2":0.87}"#).unwrap();
        assert_eq!(ok.kind(), SourceKind::AntiCorrelated);
        for bad in [
            r#"{"kind":"uncorrelated","nbar":0.05,"v2":0.87}"#,
            r#"{"kind":"correlated","nbar":0.05}"#,
            r#"{"kind":"correlated","s":0.1,"v2":0.5}"#,
            r#"{"kind":"anti_correlated","s":0.1}"#,
            r#"{"kind":"split_thermal"}"#,
            r#"{"nbar":0.1}"#,
            r#"{"kind":"uncorrelated","nbar":-1}"#,
        ] {
            assert!(serde_json::from_str::<SourceSpec<f64>>(bad).is_err(), "{bad}");
        }
        let json = serde_json::to_string(&ok).unwrap();
        let back: SourceSpec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ok);
    }
}
