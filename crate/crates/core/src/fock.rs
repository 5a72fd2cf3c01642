//! Truncated, diagonal multi-mode Fock distributions and the two channels
//! (binomial beamsplitter split and loss thinning) every state is built from.
//!
//! Only the diagonal of the density matrix is tracked: a state is a classical
//! mixture over occupation tuples. Modes are never re-interfered after being
//! split, so no coherence bookkeeping is required.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{CouplingEfficiency, MeanPhotonNumber, ReflectionAmplitude};
use crate::scalar::{binomial, powu, Real};

/// Default total-photon cutoff for truncated states.
pub const DEFAULT_CUTOFF: u32 = 4;

/// Tolerance used for normalization checks in the scalar type.
pub fn norm_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

/// Probability mass over occupation tuples of an ordered set of modes.
///
/// Every tuple holds at most `cutoff` photons in total. Mass that a
/// construction had to truncate is kept in `lost_mass` rather than dropped, so
/// `total_mass() + lost_mass()` stays at one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointOccupationDistribution<T: Real> {
    modes: Vec<String>,
    #[serde(with = "entry_list")]
    entries: BTreeMap<Vec<u32>, T>,
    cutoff: u32,
    lost_mass: T,
}

impl<T: Real> JointOccupationDistribution<T> {
    /// All modes empty with certainty.
    pub fn vacuum<S: AsRef<str>>(modes: &[S], cutoff: u32) -> Result<Self> {
        let modes = owned_labels(modes)?;
        let mut entries = BTreeMap::new();
        entries.insert(vec![0; modes.len()], T::one());
        Ok(Self {
            modes,
            entries,
            cutoff,
            lost_mass: T::zero(),
        })
    }

    /// Builds a distribution from explicit probabilities.
    ///
    /// Duplicate tuples are summed. A deficit below one is recorded as
    /// `lost_mass` unless it is within rounding tolerance; an excess is an error.
    pub fn from_entries<S, I>(modes: &[S], cutoff: u32, entries: I) -> Result<Self>
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (Vec<u32>, T)>,
    {
        let modes = owned_labels(modes)?;
        let mut map: BTreeMap<Vec<u32>, T> = BTreeMap::new();
        for (tuple, p) in entries {
            validate_tuple(&tuple, modes.len(), cutoff)?;
            if !(p >= T::zero()) || !p.is_finite() {
                return Err(Error::NegativeProbability {
                    tuple,
                    value: p.to_f64_lossy(),
                });
            }
            if p > T::zero() {
                let slot = map.entry(tuple).or_insert_with(T::zero);
                *slot = *slot + p;
            }
        }
        let total: T = map.values().copied().sum();
        if total > T::one() + norm_tolerance::<T>() {
            return Err(Error::NotNormalized {
                total: total.to_f64_lossy(),
            });
        }
        let deficit = T::one() - total;
        Ok(Self {
            modes,
            entries: map,
            cutoff,
            lost_mass: if deficit > norm_tolerance::<T>() {
                deficit
            } else {
                T::zero()
            },
        })
    }

    /// Builds a distribution from non-negative relative weights, normalized to one.
    pub fn from_weights<S, I>(modes: &[S], cutoff: u32, weights: I) -> Result<Self>
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (Vec<u32>, T)>,
    {
        let weights: Vec<_> = weights.into_iter().collect();
        let total: T = weights.iter().map(|(_, w)| *w).sum();
        if !(total > T::zero()) {
            return Err(Error::Degenerate("all weights are zero"));
        }
        let mut dist = Self::from_entries(
            modes,
            cutoff,
            weights.into_iter().map(|(t, w)| (t, w / total)),
        )?;
        // normalized by construction; any deficit is rounding
        dist.lost_mass = T::zero();
        Ok(dist)
    }

    /// Single-mode thermal state truncated at `cutoff`; the tail is `lost_mass`.
    pub fn thermal(label: &str, nbar: MeanPhotonNumber<T>, cutoff: u32) -> Self {
        let entries: BTreeMap<Vec<u32>, T> = (0..=cutoff)
            .map(|n| (vec![n], thermal_pmf(nbar, n)))
            .filter(|(_, p)| *p > T::zero())
            .collect();
        let n = nbar.value();
        let ratio = n / (T::one() + n);
        Self {
            modes: vec![label.to_string()],
            entries,
            cutoff,
            lost_mass: powu(ratio, cutoff + 1),
        }
    }

    pub fn modes(&self) -> &[String] {
        &self.modes
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn lost_mass(&self) -> T {
        self.lost_mass
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mode_index(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m == label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn probability(&self, tuple: &[u32]) -> T {
        self.entries.get(tuple).copied().unwrap_or_else(T::zero)
    }

    /// Entries in lexicographic tuple order.
    pub fn iter(&self) -> impl Iterator<Item = (&[u32], T)> + '_ {
        self.entries.iter().map(|(t, p)| (t.as_slice(), *p))
    }

    /// Sum of the stored entries, excluding `lost_mass`.
    pub fn total_mass(&self) -> T {
        self.entries.values().copied().sum()
    }

    /// Checks that stored mass plus truncated mass is one.
    pub fn check_normalized(&self) -> Result<()> {
        let total = self.total_mass() + self.lost_mass;
        if (total - T::one()).abs() <= norm_tolerance::<T>() {
            Ok(())
        } else {
            Err(Error::NotNormalized {
                total: total.to_f64_lossy(),
            })
        }
    }

    /// Rewrites every tuple through `map`, merging collisions.
    ///
    /// `map` must conserve the total photon number of the tuple or reduce it.
    pub fn map_tuples<S, F>(&self, modes: &[S], mut map: F) -> Result<Self>
    where
        S: AsRef<str>,
        F: FnMut(&[u32]) -> Vec<u32>,
    {
        let modes = owned_labels(modes)?;
        let mut entries: BTreeMap<Vec<u32>, T> = BTreeMap::new();
        for (tuple, p) in &self.entries {
            let image = map(tuple);
            validate_tuple(&image, modes.len(), self.cutoff)?;
            let slot = entries.entry(image).or_insert_with(T::zero);
            *slot = *slot + *p;
        }
        Ok(Self {
            modes,
            entries,
            cutoff: self.cutoff,
            lost_mass: self.lost_mass,
        })
    }

    /// Reorders (or renames) modes: `order[i]` is the existing label placed at
    /// position `i`, and `labels[i]` its new name.
    pub fn reorder<S: AsRef<str>>(&self, order: &[S], labels: &[S]) -> Result<Self> {
        if order.len() != self.modes.len() || labels.len() != order.len() {
            return Err(Error::ModeMismatch {
                expected: self.modes.clone(),
                found: order.iter().map(|s| s.as_ref().to_string()).collect(),
            });
        }
        let idx = order
            .iter()
            .map(|l| self.mode_index(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.map_tuples(labels, |t| idx.iter().map(|&i| t[i]).collect())
    }

    /// Marginal distribution over the listed modes, in the listed order.
    pub fn marginal<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let idx = keep
            .iter()
            .map(|l| self.mode_index(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.map_tuples(keep, |t| idx.iter().map(|&i| t[i]).collect())
    }

    /// Traces out a single mode.
    pub fn trace_out(&self, label: &str) -> Result<Self> {
        let drop = self.mode_index(label)?;
        let keep: Vec<&str> = self
            .modes
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != drop)
            .map(|(_, m)| m.as_str())
            .collect();
        self.marginal(&keep)
    }

    /// Tensor product with an independent distribution over disjoint modes.
    ///
    /// Products whose total photon number exceeds `cutoff` are moved to
    /// `lost_mass`.
    pub fn product(&self, other: &Self, cutoff: u32) -> Result<Self> {
        let mut modes = self.modes.clone();
        for m in &other.modes {
            if modes.contains(m) {
                return Err(Error::DuplicateMode(m.clone()));
            }
            modes.push(m.clone());
        }
        let mut entries = BTreeMap::new();
        for (a, pa) in &self.entries {
            for (b, pb) in &other.entries {
                let total: u32 = a.iter().chain(b.iter()).sum();
                if total <= cutoff {
                    let tuple: Vec<u32> = a.iter().chain(b.iter()).copied().collect();
                    entries.insert(tuple, *pa * *pb);
                }
            }
        }
        let kept: T = entries.values().copied().sum();
        Ok(Self {
            modes,
            entries,
            cutoff,
            lost_mass: (T::one() - kept).max(T::zero()),
        })
    }

    /// Post-selects on tuples satisfying `keep` and renormalizes.
    ///
    /// Truncated mass is assumed to belong to the kept events and scales along.
    pub fn condition<F>(&self, mut keep: F) -> Result<Self>
    where
        F: FnMut(&[u32]) -> bool,
    {
        let entries: BTreeMap<Vec<u32>, T> = self
            .entries
            .iter()
            .filter(|(t, _)| keep(t))
            .map(|(t, p)| (t.clone(), *p))
            .collect();
        let kept: T = entries.values().copied().sum::<T>() + self.lost_mass;
        if !(kept > T::zero()) {
            return Err(Error::Degenerate("post-selection keeps no mass"));
        }
        Ok(Self {
            modes: self.modes.clone(),
            entries: entries.into_iter().map(|(t, p)| (t, p / kept)).collect(),
            cutoff: self.cutoff,
            lost_mass: self.lost_mass / kept,
        })
    }

    /// Expected photon number in a mode.
    pub fn mean_occupation(&self, label: &str) -> Result<T> {
        let i = self.mode_index(label)?;
        Ok(self.iter().map(|(t, p)| p * T::count(t[i])).sum())
    }

    /// Zero-delay second-order coherence `⟨n(n−1)⟩ / ⟨n⟩²` of one mode.
    pub fn g2_zero(&self, label: &str) -> Result<T> {
        let i = self.mode_index(label)?;
        let mean: T = self.iter().map(|(t, p)| p * T::count(t[i])).sum();
        if !(mean > T::zero()) {
            return Err(Error::Degenerate("mode has zero mean occupation"));
        }
        let factorial: T = self
            .iter()
            .map(|(t, p)| {
                let n = T::count(t[i]);
                p * n * (n - T::one()).max(T::zero())
            })
            .sum();
        Ok(factorial / (mean * mean))
    }

    /// Largest entrywise absolute difference to a distribution over the same modes.
    pub fn max_abs_difference(&self, other: &Self) -> Result<T> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch {
                expected: self.modes.clone(),
                found: other.modes.clone(),
            });
        }
        let mut worst = T::zero();
        for (t, p) in &self.entries {
            worst = worst.max((*p - other.probability(t)).abs());
        }
        for (t, q) in &other.entries {
            if !self.entries.contains_key(t) {
                worst = worst.max(q.abs());
            }
        }
        Ok(worst)
    }
}

fn owned_labels<S: AsRef<str>>(modes: &[S]) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::with_capacity(modes.len());
    for m in modes {
        let m = m.as_ref();
        if out.iter().any(|x| x == m) {
            return Err(Error::DuplicateMode(m.to_string()));
        }
        out.push(m.to_string());
    }
    Ok(out)
}

fn validate_tuple(tuple: &[u32], modes: usize, cutoff: u32) -> Result<()> {
    if tuple.len() != modes || tuple.iter().sum::<u32>() > cutoff {
        return Err(Error::MalformedTuple {
            tuple: tuple.to_vec(),
            modes,
            cutoff,
        });
    }
    Ok(())
}

/// Bose–Einstein photon-number distribution `n̄ⁿ / (1 + n̄)ⁿ⁺¹`.
pub fn thermal_pmf<T: Real>(nbar: MeanPhotonNumber<T>, n: u32) -> T {
    let nbar = nbar.value();
    let denom = T::one() + nbar;
    powu(nbar / denom, n) / denom
}

/// Probability of `m` photons transmitted and `n` reflected when a thermal
/// state of mean `n̄` meets a beamsplitter of reflection amplitude `r`.
pub fn joint_detection_pmf<T: Real>(
    nbar: MeanPhotonNumber<T>,
    r: ReflectionAmplitude<T>,
    m: u32,
    n: u32,
) -> T {
    let total = n + m;
    let nb = nbar.value();
    binomial::<T>(total, n) * powu(nb, total) / powu(T::one() + nb, total + 1)
        * powu(r.reflectivity(), n)
        * powu(r.transmissivity(), m)
}

/// Splits every photon of `mode` independently: kept with probability `keep`,
/// moved to the appended mode `new_mode` with probability `divert`.
fn binomial_split<T: Real>(
    dist: &JointOccupationDistribution<T>,
    mode: &str,
    keep: T,
    divert: T,
    new_mode: &str,
) -> Result<JointOccupationDistribution<T>> {
    let i = dist.mode_index(mode)?;
    if dist.modes.iter().any(|m| m == new_mode) {
        return Err(Error::DuplicateMode(new_mode.to_string()));
    }
    let mut modes = dist.modes.clone();
    modes.push(new_mode.to_string());
    let mut entries: BTreeMap<Vec<u32>, T> = BTreeMap::new();
    for (tuple, p) in &dist.entries {
        let n = tuple[i];
        for k in 0..=n {
            let w = binomial::<T>(n, k) * powu(keep, k) * powu(divert, n - k);
            if w == T::zero() {
                continue;
            }
            let mut image = tuple.clone();
            image[i] = k;
            image.push(n - k);
            let slot = entries.entry(image).or_insert_with(T::zero);
            *slot = *slot + *p * w;
        }
    }
    Ok(JointOccupationDistribution {
        modes,
        entries,
        cutoff: dist.cutoff,
        lost_mass: dist.lost_mass,
    })
}

/// Sends `mode` through a beamsplitter of amplitude `r` with vacuum in the
/// other port. Transmitted photons stay in `mode`; reflected photons land in
/// the new mode `new_mode`, appended last.
pub fn beamsplitter_split<T: Real>(
    dist: &JointOccupationDistribution<T>,
    mode: &str,
    r: ReflectionAmplitude<T>,
    new_mode: &str,
) -> Result<JointOccupationDistribution<T>> {
    binomial_split(dist, mode, r.transmissivity(), r.reflectivity(), new_mode)
}

/// Binomial thinning of `mode`: each photon survives with probability `ε²`.
/// The lost photons are traced out.
pub fn loss_channel<T: Real>(
    dist: &JointOccupationDistribution<T>,
    mode: &str,
    eps2: CouplingEfficiency<T>,
) -> Result<JointOccupationDistribution<T>> {
    const SCRATCH: &str = "\u{0}loss";
    let extended = loss_channel_retaining(dist, mode, eps2, SCRATCH)?;
    extended.trace_out(SCRATCH)
}

/// Loss channel that keeps the lost photons in an appended mode `loss_mode`.
pub fn loss_channel_retaining<T: Real>(
    dist: &JointOccupationDistribution<T>,
    mode: &str,
    eps2: CouplingEfficiency<T>,
    loss_mode: &str,
) -> Result<JointOccupationDistribution<T>> {
    binomial_split(dist, mode, eps2.value(), T::one() - eps2.value(), loss_mode)
}

mod entry_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry<T> {
        occupation: Vec<u32>,
        probability: T,
    }

    pub fn serialize<S, T>(map: &BTreeMap<Vec<u32>, T>, s: S) -> Result<S::Ok, S::Error>
    where
        S: Serializer,
        T: Real + Serialize,
    {
        s.collect_seq(map.iter().map(|(t, p)| Entry {
            occupation: t.clone(),
            probability: *p,
        }))
    }

    pub fn deserialize<'de, D, T>(d: D) -> Result<BTreeMap<Vec<u32>, T>, D::Error>
    where
        D: Deserializer<'de>,
        T: Real + Deserialize<'de>,
    {
        let list: Vec<Entry<T>> = Vec::deserialize(d)?;
        Ok(list
            .into_iter()
            .map(|e| (e.occupation, e.probability))
            .collect())
    }
}
