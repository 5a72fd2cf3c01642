//! Mutual information between the demon's click pattern and the photon
//! numbers left in the two arms, in bits.
//!
//! Clicks are binary (at least one photon at a demon detector). The photon
//! numbers are those remaining in `A` and `B` after loss and the taps, which is
//! what the switch then routes to the output detectors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::JointOccupationDistribution;
use crate::params::{CouplingEfficiency, ReflectionAmplitude};
use crate::protocol::{ClickPattern, DEM_A, DEM_B, MODE_A, MODE_B};
use crate::scalar::{factorial, powu, Real};
use crate::sources::{make_source, SourceSpec};

/// Probability that of `n` photons entering a lossy tap, `m` are reflected to
/// the demon detector and `k` continue in the arm.
pub fn tap_outcome_pmf<T: Real>(
    m: u32,
    k: u32,
    n: u32,
    r: ReflectionAmplitude<T>,
    eps2: CouplingEfficiency<T>,
) -> Result<T> {
    if m + k > n {
        return Err(Error::CountOrder { m: m + k, n });
    }
    let e = eps2.value();
    let lost = n - m - k;
    let multinomial = factorial::<T>(n) / (factorial::<T>(m) * factorial::<T>(k) * factorial::<T>(lost));
    Ok(multinomial
        * powu(e * r.reflectivity(), m)
        * powu(e * r.transmissivity(), k)
        * powu(T::one() - e, lost))
}

/// `p(m | n)`: probability that `m` of `n` incident photons reach the demon
/// detector of one arm.
pub fn conditional_click_pmf<T: Real>(
    m: u32,
    n: u32,
    r: ReflectionAmplitude<T>,
    eps2: CouplingEfficiency<T>,
) -> Result<T> {
    if m > n {
        return Err(Error::CountOrder { m, n });
    }
    (0..=n - m).map(|k| tap_outcome_pmf(m, k, n, r, eps2)).sum()
}

/// One cell of the joint click / photon-number table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointEntry<T> {
    pub clicks: ClickPattern,
    pub n_a: u32,
    pub n_b: u32,
    pub probability: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoResult<T> {
    pub mutual_info: T,
    pub click_entropy: T,
    pub photon_entropy: T,
    pub joint: Vec<JointEntry<T>>,
}

type Key = (ClickPattern, u32, u32);

fn entropy<T: Real>(probs: impl Iterator<Item = T>, total: T) -> T {
    probs
        .filter(|p| *p > T::zero())
        .map(|p| {
            let q = p / total;
            -q * q.log2()
        })
        .sum()
}

fn summarize<T: Real>(table: BTreeMap<Key, T>) -> InfoResult<T> {
    let total: T = table.values().copied().sum();
    let mut joint: Vec<JointEntry<T>> = table
        .iter()
        .filter(|(_, p)| **p > T::zero())
        .map(|(&(clicks, n_a, n_b), &probability)| JointEntry {
            clicks,
            n_a,
            n_b,
            probability,
        })
        .collect();
    if !(total > T::zero()) {
        joint.clear();
        return InfoResult {
            mutual_info: T::zero(),
            click_entropy: T::zero(),
            photon_entropy: T::zero(),
            joint,
        };
    }
    let mut clicks: BTreeMap<ClickPattern, T> = BTreeMap::new();
    let mut counts: BTreeMap<(u32, u32), T> = BTreeMap::new();
    for e in &joint {
        *clicks.entry(e.clicks).or_insert_with(T::zero) += e.probability;
        *counts.entry((e.n_a, e.n_b)).or_insert_with(T::zero) += e.probability;
    }
    let h_click = entropy(clicks.values().copied(), total);
    let h_count = entropy(counts.values().copied(), total);
    let h_joint = entropy(joint.iter().map(|e| e.probability), total);
    InfoResult {
        mutual_info: (h_click + h_count - h_joint).max(T::zero()),
        click_entropy: h_click,
        photon_entropy: h_count,
        joint,
    }
}

/// Mutual information for a source seen through loss `eps2` and taps `r`.
///
/// Pair sources are post-selected on a non-vacuum emission. The table is
/// normalized over the retained (non-truncated) mass.
pub fn mutual_information<T: Real>(
    spec: &SourceSpec<T>,
    r: ReflectionAmplitude<T>,
    eps2: CouplingEfficiency<T>,
    cutoff: u32,
) -> Result<InfoResult<T>> {
    let spec = spec.with_drop_vacuum(!spec.kind().is_thermal());
    let source = make_source(&spec, cutoff)?;
    let mut table: BTreeMap<Key, T> = BTreeMap::new();
    for (t, p) in source.iter() {
        let (in_a, in_b) = (t[0], t[1]);
        for ma in 0..=in_a {
            for ka in 0..=in_a - ma {
                let pa = tap_outcome_pmf(ma, ka, in_a, r, eps2)?;
                if pa == T::zero() {
                    continue;
                }
                for mb in 0..=in_b {
                    for kb in 0..=in_b - mb {
                        let pb = tap_outcome_pmf(mb, kb, in_b, r, eps2)?;
                        let key = (ClickPattern::from_counts(ma, mb), ka, kb);
                        *table.entry(key).or_insert_with(T::zero) += p * pa * pb;
                    }
                }
            }
        }
    }
    Ok(summarize(table))
}

/// Mutual information read off a distribution that carries the demon
/// detectors and the two arm modes under the given labels.
pub fn mutual_information_of<T: Real>(
    dist: &JointOccupationDistribution<T>,
    demon_modes: [&str; 2],
    arm_modes: [&str; 2],
) -> Result<InfoResult<T>> {
    let da = dist.mode_index(demon_modes[0])?;
    let db = dist.mode_index(demon_modes[1])?;
    let a = dist.mode_index(arm_modes[0])?;
    let b = dist.mode_index(arm_modes[1])?;
    let mut table: BTreeMap<Key, T> = BTreeMap::new();
    for (t, p) in dist.iter() {
        let key = (ClickPattern::from_counts(t[da], t[db]), t[a], t[b]);
        *table.entry(key).or_insert_with(T::zero) += p;
    }
    Ok(summarize(table))
}

/// From a tapped distribution over the pre-switch modes.
pub fn mutual_information_pre_switch<T: Real>(
    tapped: &JointOccupationDistribution<T>,
) -> Result<InfoResult<T>> {
    mutual_information_of(tapped, [DEM_A, DEM_B], [MODE_A, MODE_B])
}
