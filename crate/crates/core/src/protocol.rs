//! The demon: loss, tap beamsplitters, click detection and the feed-forward
//! switch, assembled into exact output distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{beamsplitter_split, loss_channel, loss_channel_retaining, JointOccupationDistribution};
use crate::params::{CouplingEfficiency, ReflectionAmplitude};
use crate::scalar::Real;
use crate::sources::{SourceKind, IN_A, IN_B};

pub const MODE_A: &str = "A";
pub const MODE_B: &str = "B";
pub const D_A: &str = "D_A";
pub const D_B: &str = "D_B";
pub const DEM_A: &str = "Dem_A";
pub const DEM_B: &str = "Dem_B";
pub const L_A: &str = "l_A";
pub const L_B: &str = "l_B";

/// Mode order of a tapped state before the switch acts.
pub const PRE_SWITCH_MODES: [&str; 6] = [MODE_A, MODE_B, DEM_A, DEM_B, L_A, L_B];
/// Mode order of a [`DemonOutcome`].
pub const OUTCOME_MODES: [&str; 6] = [D_A, D_B, DEM_A, DEM_B, L_A, L_B];

/// Which demon detectors fired. A click means at least one photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClickPattern {
    pub dem_a: bool,
    pub dem_b: bool,
}

impl ClickPattern {
    pub const ALL: [ClickPattern; 4] = [
        ClickPattern::new(false, false),
        ClickPattern::new(true, true),
        ClickPattern::new(true, false),
        ClickPattern::new(false, true),
    ];

    pub const fn new(dem_a: bool, dem_b: bool) -> Self {
        Self { dem_a, dem_b }
    }

    pub fn from_counts(dem_a: u32, dem_b: u32) -> Self {
        Self::new(dem_a > 0, dem_b > 0)
    }

    fn index(self) -> usize {
        (self.dem_a as usize) << 1 | self.dem_b as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchState {
    /// `A → D_A`, `B → D_B`.
    Bar,
    /// `A → D_B`, `B → D_A`.
    Cross,
}

/// Total map from click pattern to switch setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Policy {
    // indexed by `ClickPattern::index`: (0,0), (0,1), (1,0), (1,1)
    table: [SwitchState; 4],
}

impl Policy {
    pub fn constant(state: SwitchState) -> Self {
        Self { table: [state; 4] }
    }

    /// Policy that only switches to cross on the given pattern.
    pub fn cross_on(pattern: ClickPattern) -> Self {
        let mut table = [SwitchState::Bar; 4];
        table[pattern.index()] = SwitchState::Cross;
        Self { table }
    }

    /// Swap when only `Dem_B` clicks: thermal bunching and N00N pairs.
    pub fn bunching() -> Self {
        Self::cross_on(ClickPattern::new(false, true))
    }

    /// Swap when only `Dem_A` clicks: cross-mode pairs.
    pub fn pairing() -> Self {
        Self::cross_on(ClickPattern::new(true, false))
    }

    pub fn canonical(kind: SourceKind) -> Self {
        match kind {
            SourceKind::Correlated => Self::pairing(),
            _ => Self::bunching(),
        }
    }

    pub fn switch_for(&self, clicks: ClickPattern) -> SwitchState {
        self.table[clicks.index()]
    }

    pub fn set(&mut self, clicks: ClickPattern, state: SwitchState) {
        self.table[clicks.index()] = state;
    }

    /// Exchanges the `(1,0)` and `(0,1)` rows.
    pub fn mirrored(&self) -> Self {
        let mut out = *self;
        out.table.swap(1, 2);
        out
    }
}

/// Output distribution over `(D_A, D_B, Dem_A, Dem_B, l_A, l_B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemonOutcome<T: Real> {
    pub dist: JointOccupationDistribution<T>,
}

/// Optional detector model for the demon's own detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemonDetectors<T: Real> {
    /// Per-detector efficiency of `Dem_A`, `Dem_B`, applied as thinning
    /// before clicks are evaluated.
    pub efficiency: (CouplingEfficiency<T>, CouplingEfficiency<T>),
}

impl<T: Real> Default for DemonDetectors<T> {
    fn default() -> Self {
        Self {
            efficiency: (CouplingEfficiency::lossless(), CouplingEfficiency::lossless()),
        }
    }
}

/// Applies loss (keeping `l_A`, `l_B`) then the tap beamsplitters to a
/// source on `(In_A, In_B)`. The result is over [`PRE_SWITCH_MODES`].
pub fn tap<T: Real>(
    source: &JointOccupationDistribution<T>,
    r: ReflectionAmplitude<T>,
    eps2: CouplingEfficiency<T>,
    detectors: DemonDetectors<T>,
) -> Result<JointOccupationDistribution<T>> {
    if source.modes() != [IN_A, IN_B] {
        return Err(Error::ModeMismatch {
            expected: vec![IN_A.into(), IN_B.into()],
            found: source.modes().to_vec(),
        });
    }
    let d = loss_channel_retaining(source, IN_A, eps2, L_A)?;
    let d = loss_channel_retaining(&d, IN_B, eps2, L_B)?;
    let d = beamsplitter_split(&d, IN_A, r, DEM_A)?;
    let d = beamsplitter_split(&d, IN_B, r, DEM_B)?;
    let (eff_a, eff_b) = detectors.efficiency;
    let d = if eff_a.value() < T::one() {
        loss_channel(&d, DEM_A, eff_a)?
    } else {
        d
    };
    let d = if eff_b.value() < T::one() {
        loss_channel(&d, DEM_B, eff_b)?
    } else {
        d
    };
    d.reorder(
        &[IN_A, IN_B, DEM_A, DEM_B, L_A, L_B],
        &PRE_SWITCH_MODES,
    )
}

/// Routes `A`/`B` to `D_A`/`D_B` according to the policy evaluated on each
/// tuple's demon clicks.
pub fn apply_policy<T: Real>(
    tapped: &JointOccupationDistribution<T>,
    policy: &Policy,
) -> Result<DemonOutcome<T>> {
    if tapped.modes() != PRE_SWITCH_MODES {
        return Err(Error::ModeMismatch {
            expected: PRE_SWITCH_MODES.iter().map(|s| s.to_string()).collect(),
            found: tapped.modes().to_vec(),
        });
    }
    let dist = tapped.map_tuples(&OUTCOME_MODES, |t| {
        let mut out = t.to_vec();
        if policy.switch_for(ClickPattern::from_counts(t[2], t[3])) == SwitchState::Cross {
            out.swap(0, 1);
        }
        out
    })?;
    Ok(DemonOutcome { dist })
}

/// Full pipeline: loss, taps, clicks and the conditional swap.
pub fn propagate<T: Real>(
    source: &JointOccupationDistribution<T>,
    r: ReflectionAmplitude<T>,
    eps2: CouplingEfficiency<T>,
    policy: &Policy,
) -> Result<DemonOutcome<T>> {
    propagate_with(source, r, eps2, policy, DemonDetectors::default())
}

pub fn propagate_with<T: Real>(
    source: &JointOccupationDistribution<T>,
    r: ReflectionAmplitude<T>,
    eps2: CouplingEfficiency<T>,
    policy: &Policy,
    detectors: DemonDetectors<T>,
) -> Result<DemonOutcome<T>> {
    let tapped = tap(source, r, eps2, detectors)?;
    apply_policy(&tapped, policy)
}

/// Click probabilities `(P_A, P_B)` of the output detectors.
pub fn detector_probs<T: Real>(outcome: &DemonOutcome<T>) -> (T, T) {
    outcome.dist.iter().fold((T::zero(), T::zero()), |(pa, pb), (t, p)| {
        (
            if t[0] > 0 { pa + p } else { pa },
            if t[1] > 0 { pb + p } else { pb },
        )
    })
}

/// Expected imbalance `Γ (P_A − P_B)` after `gamma` repetitions.
pub fn delta_n<T: Real>(p_a: T, p_b: T, gamma: T) -> T {
    gamma * (p_a - p_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{joint_detection_pmf, DEFAULT_CUTOFF};
    use crate::params::MeanPhotonNumber;
    use crate::sources::{make_source, SourceSpec};

    fn refl(r2: f64) -> ReflectionAmplitude<f64> {
        ReflectionAmplitude::from_reflectivity(r2).unwrap()
    }

    fn eps(e: f64) -> CouplingEfficiency<f64> {
        CouplingEfficiency::new(e).unwrap()
    }

    #[test]
    fn canonical_tables() {
        let t1 = Policy::canonical(SourceKind::Uncorrelated);
        let t2 = Policy::canonical(SourceKind::Correlated);
        assert_eq!(t1.switch_for(ClickPattern::new(false, true)), SwitchState::Cross);
        assert_eq!(t1.switch_for(ClickPattern::new(true, false)), SwitchState::Bar);
        assert_eq!(t2.switch_for(ClickPattern::new(true, false)), SwitchState::Cross);
        assert_eq!(t2.switch_for(ClickPattern::new(false, true)), SwitchState::Bar);
        for kind in SourceKind::ALL {
            let p = Policy::canonical(kind);
            assert_eq!(p.switch_for(ClickPattern::new(true, true)), SwitchState::Bar);
            assert_eq!(p.switch_for(ClickPattern::new(false, false)), SwitchState::Bar);
        }
        assert_eq!(Policy::canonical(SourceKind::SplitThermal), t1);
        assert_eq!(Policy::canonical(SourceKind::AntiCorrelated), t1);
        assert_eq!(t1.mirrored(), t2);
    }

    #[test]
    fn vacuum_stays_vacuum() {
        let vac = JointOccupationDistribution::<f64>::vacuum(&[IN_A, IN_B], 4).unwrap();
        for policy in [Policy::bunching(), Policy::pairing()] {
            let out = propagate(&vac, refl(0.3), eps(0.5), &policy).unwrap();
            assert_eq!(out.dist.len(), 1);
            assert_eq!(out.dist.probability(&[0; 6]), 1.0);
            assert_eq!(out.dist.modes(), OUTCOME_MODES);
        }
    }

    #[test]
    fn correlated_pair_routing() {
        let spec = SourceSpec::correlated(0.1_f64).unwrap().with_drop_vacuum(true);
        let src = make_source(&spec, DEFAULT_CUTOFF).unwrap();
        let out = propagate(&src, refl(0.5), eps(1.0), &Policy::pairing()).unwrap();
        // Dem_A fired, its twin was transmitted in B and swapped into D_A
        assert!((out.dist.probability(&[1, 0, 1, 0, 0, 0]) - 0.25).abs() < 1e-15);
        let (pa, pb) = detector_probs(&out);
        assert!((pa - pb - 2.0 * 0.5 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn all_bar_is_symmetric() {
        let src = make_source(&SourceSpec::uncorrelated(0.05_f64).unwrap(), 4).unwrap();
        let out =
            propagate(&src, refl(0.3), eps(1.0), &Policy::constant(SwitchState::Bar)).unwrap();
        let (pa, pb) = detector_probs(&out);
        assert!((pa - pb).abs() < 1e-15);
    }

    #[test]
    fn uncorrelated_difference_matches_low_photon_expression() {
        // P_A − P_B = 2(P(0,0)P(1,1) − P(0,1)P(1,0)) up to three-photon terms
        let nbar = MeanPhotonNumber::new(0.05_f64).unwrap();
        let src = make_source(&SourceSpec::Uncorrelated { nbar }, 4).unwrap();
        let out = propagate(&src, refl(0.5), eps(1.0), &Policy::bunching()).unwrap();
        let (pa, pb) = detector_probs(&out);
        let p = |m, n| joint_detection_pmf(nbar, refl(0.5), m, n);
        let expected = 2.0 * (p(0, 0) * p(1, 1) - p(0, 1) * p(1, 0));
        assert!((pa - pb - expected).abs() < 0.05_f64.powi(3));
    }

    #[test]
    fn split_thermal_is_powerless() {
        let src = make_source(&SourceSpec::split_thermal(0.05_f64).unwrap(), 4).unwrap();
        for r2 in [0.0, 0.1, 0.25, 0.5, 0.8] {
            for policy in [Policy::bunching(), Policy::pairing()] {
                let out = propagate(&src, refl(r2), eps(0.6), &policy).unwrap();
                let (pa, pb) = detector_probs(&out);
                assert!((pa - pb).abs() < 1e-12, "r2 {r2}");
            }
        }
    }

    #[test]
    fn delta_n_arithmetic() {
        assert_eq!(delta_n(0.2_f64, 0.2, 1e6), 0.0);
        assert!((delta_n(0.3_f64, 0.1, 10.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_foreign_modes() {
        let d = JointOccupationDistribution::<f64>::vacuum(&["x", "y"], 4).unwrap();
        assert!(matches!(
            propagate(&d, refl(0.5), eps(1.0), &Policy::bunching()),
            Err(Error::ModeMismatch { .. })
        ));
    }

    #[test]
    fn demon_detector_efficiency_thins_clicks() {
        let spec = SourceSpec::correlated(0.1_f64).unwrap().with_drop_vacuum(true);
        let src = make_source(&spec, 4).unwrap();
        let det = DemonDetectors {
            efficiency: (eps(0.5), eps(1.0)),
        };
        let out = propagate_with(&src, refl(0.5), eps(1.0), &Policy::pairing(), det).unwrap();
        out.dist.check_normalized().unwrap();
        let (pa, pb) = detector_probs(&out);
        let ideal = propagate(&src, refl(0.5), eps(1.0), &Policy::pairing()).unwrap();
        let (ia, ib) = detector_probs(&ideal);
        assert!(pa - pb < ia - ib);
    }
}
