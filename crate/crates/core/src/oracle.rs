//! Brute-force reference: every photon independently is lost, reflected to
//! the demon or transmitted, and every such path is enumerated.
//!
//! Nothing here goes through the distribution algebra of [`crate::fock`] or
//! the pipeline of [`crate::protocol`]; the source weights are rebuilt from
//! scratch too.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{CouplingEfficiency, ReflectionAmplitude};
use crate::protocol::{ClickPattern, DemonOutcome, Policy, SwitchState, OUTCOME_MODES};
use crate::scalar::Real;
use crate::sources::SourceSpec;

/// Largest number of photon paths [`enumerate`] will visit.
pub const PATH_BOUND: u64 = 1_000_000;

/// Default tolerance for exact-algebra comparisons.
pub const EXACT_TOL: f64 = 1e-12;
/// Default tolerance for comparisons against closed-form expressions.
pub const FORMULA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEntry<T> {
    pub occupation: [u32; 6],
    pub probability: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport<T> {
    pub modes: Vec<String>,
    pub cutoff: u32,
    /// Sorted by occupation.
    pub table: Vec<OracleEntry<T>>,
    pub p_a: T,
    pub p_b: T,
    pub delta: T,
    /// Source probability dropped by truncation; the table sums to one minus this.
    pub truncation_bound: T,
    pub paths: u64,
    /// Filled in by [`OracleReport::with_discrepancy`].
    pub max_abs_discrepancy: Option<T>,
}

impl<T: Real> OracleReport<T> {
    pub fn with_discrepancy(mut self, cmp: &Comparison<T>) -> Self {
        self.max_abs_discrepancy = Some(cmp.max_discrepancy);
        self
    }

    pub fn probability(&self, occupation: &[u32; 6]) -> T {
        self.table
            .binary_search_by(|e| e.occupation.cmp(occupation))
            .map(|i| self.table[i].probability)
            .unwrap_or_else(|_| T::zero())
    }

    pub fn total(&self) -> T {
        self.table.iter().map(|e| e.probability).sum()
    }
}

fn thermal<T: Real>(nbar: T, n: u32) -> T {
    let mut p = T::one() / (T::one() + nbar);
    for _ in 0..n {
        p = p * nbar / (T::one() + nbar);
    }
    p
}

fn choose<T: Real>(n: u32, k: u32) -> T {
    (0..k).fold(T::one(), |acc, i| acc * T::count(n - i) / T::count(i + 1))
}

/// Source weights over `(In_A, In_B)` and the probability truncated away.
pub fn source_weights<T: Real>(spec: &SourceSpec<T>, cutoff: u32) -> Result<(Vec<((u32, u32), T)>, T)> {
    let half = T::lit(0.5);
    let mut w: Vec<((u32, u32), T)> = Vec::new();
    match *spec {
        SourceSpec::Uncorrelated { nbar } => {
            let n = nbar.value();
            for a in 0..=cutoff {
                for b in 0..=cutoff - a {
                    w.push(((a, b), thermal(n, a) * thermal(n, b)));
                }
            }
        }
        SourceSpec::SplitThermal { nbar } => {
            let n = T::lit(2.0) * nbar.value();
            for total in 0..=cutoff {
                for a in 0..=total {
                    let split = choose::<T>(total, a) * half.powi(total as i32);
                    w.push(((a, total - a), thermal(n, total) * split));
                }
            }
        }
        SourceSpec::Correlated { squeezing, .. } => {
            let s2 = squeezing.value() * squeezing.value();
            let z = T::one() + s2;
            w.push(((0, 0), T::one() / z));
            w.push(((1, 1), s2 / z));
        }
        SourceSpec::AntiCorrelated {
            squeezing,
            visibility,
            single_photon_component,
            ..
        } => {
            let s2 = squeezing.value() * squeezing.value();
            let v2 = visibility.value();
            let z = T::one() + s2;
            if single_photon_component {
                w.push(((0, 0), (T::one() - s2) / z));
                w.push(((1, 0), half * s2 / z));
                w.push(((0, 1), half * s2 / z));
            } else {
                w.push(((0, 0), T::one() / z));
            }
            w.push(((2, 0), half * s2 * v2 / z));
            w.push(((0, 2), half * s2 * v2 / z));
            w.push(((1, 1), s2 * (T::one() - v2) / z));
        }
    }
    if let Some(((a, b), _)) = w.iter().find(|((a, b), _)| a + b > cutoff) {
        return Err(Error::InconsistentSource(format!(
            "source emits {} photons, above cutoff {cutoff}",
            a + b
        )));
    }
    w.retain(|(_, p)| *p > T::zero());
    let kept: T = w.iter().map(|(_, p)| *p).sum();
    let mut lost = if spec.kind().is_thermal() {
        (T::one() - kept).max(T::zero())
    } else {
        T::zero()
    };
    if spec.drops_vacuum() {
        w.retain(|(t, _)| *t != (0, 0));
        let z = w.iter().map(|(_, p)| *p).sum::<T>() + lost;
        if !(z > T::zero()) {
            return Err(Error::Degenerate("post-selection keeps no mass"));
        }
        for (_, p) in &mut w {
            *p = *p / z;
        }
        lost = lost / z;
    }
    Ok((w, lost))
}

/// Fates of `n` photons, each lost, reflected or transmitted.
/// Yields `(reflected, transmitted, lost, probability)` once per path.
fn photon_paths<T: Real>(n: u32, reflect: T, transmit: T, lose: T) -> Vec<(u32, u32, u32, T)> {
    let mut out = Vec::with_capacity(3usize.pow(n));
    for code in 0..3u32.pow(n) {
        let (mut c, mut refl, mut trans, mut lost, mut p) = (code, 0, 0, 0, T::one());
        for _ in 0..n {
            match c % 3 {
                0 => {
                    lost += 1;
                    p = p * lose;
                }
                1 => {
                    refl += 1;
                    p = p * reflect;
                }
                _ => {
                    trans += 1;
                    p = p * transmit;
                }
            }
            c /= 3;
        }
        out.push((refl, trans, lost, p));
    }
    out
}

/// Exact outcome table over `(D_A, D_B, Dem_A, Dem_B, l_A, l_B)`.
pub fn enumerate<T: Real>(
    spec: &SourceSpec<T>,
    r: ReflectionAmplitude<T>,
    eps2: CouplingEfficiency<T>,
    policy: &Policy,
    cutoff: u32,
) -> Result<OracleReport<T>> {
    let (weights, lost) = source_weights(spec, cutoff)?;
    let paths: u64 = weights.iter().map(|((a, b), _)| 3u64.pow(a + b)).sum();
    if paths > PATH_BOUND {
        return Err(Error::PathExplosion {
            paths,
            bound: PATH_BOUND,
        });
    }
    let e = eps2.value();
    let amp = r.amplitude();
    let reflect = e * amp * amp;
    let transmit = e * (T::one() - amp * amp);
    let lose = T::one() - e;

    let mut table: BTreeMap<[u32; 6], T> = BTreeMap::new();
    for &((na, nb), w) in &weights {
        let arm_a = photon_paths(na, reflect, transmit, lose);
        let arm_b = photon_paths(nb, reflect, transmit, lose);
        for &(ra, ta, la, pa) in &arm_a {
            for &(rb, tb, lb, pb) in &arm_b {
                let clicks = ClickPattern::new(ra > 0, rb > 0);
                let (da, db) = match policy.switch_for(clicks) {
                    SwitchState::Bar => (ta, tb),
                    SwitchState::Cross => (tb, ta),
                };
                *table.entry([da, db, ra, rb, la, lb]).or_insert_with(T::zero) += w * pa * pb;
            }
        }
    }

    let mut p_a = T::zero();
    let mut p_b = T::zero();
    for (occ, p) in &table {
        if occ[0] > 0 {
            p_a = p_a + *p;
        }
        if occ[1] > 0 {
            p_b = p_b + *p;
        }
    }
    Ok(OracleReport {
        modes: OUTCOME_MODES.iter().map(|s| s.to_string()).collect(),
        cutoff,
        table: table
            .into_iter()
            .map(|(occupation, probability)| OracleEntry {
                occupation,
                probability,
            })
            .collect(),
        p_a,
        p_b,
        delta: p_a - p_b,
        truncation_bound: lost,
        paths,
        max_abs_discrepancy: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison<T> {
    pub pass: bool,
    pub max_discrepancy: T,
}

/// Entrywise comparison of a pipeline outcome against the oracle table.
pub fn compare<T: Real>(
    report: &OracleReport<T>,
    candidate: &DemonOutcome<T>,
    tol: T,
) -> Result<Comparison<T>> {
    if candidate.dist.modes() != report.modes.as_slice() {
        return Err(Error::ModeMismatch {
            expected: report.modes.clone(),
            found: candidate.dist.modes().to_vec(),
        });
    }
    if candidate.dist.cutoff() != report.cutoff {
        return Err(Error::CutoffMismatch(report.cutoff, candidate.dist.cutoff()));
    }
    let mut worst = T::zero();
    for e in &report.table {
        let d = (candidate.dist.probability(&e.occupation) - e.probability).abs();
        worst = worst.max(d);
    }
    for (t, p) in candidate.dist.iter() {
        let Ok(occ) = <[u32; 6]>::try_from(t) else {
            return Err(Error::MalformedTuple {
                tuple: t.to_vec(),
                modes: 6,
                cutoff: report.cutoff,
            });
        };
        if report.probability(&occ) == T::zero() {
            worst = worst.max(p.abs());
        }
    }
    Ok(Comparison {
        pass: worst <= tol,
        max_discrepancy: worst,
    })
}

/// `P_A − P_B` for an untruncated uncorrelated thermal source of mean `nbar`
/// per arm (before loss) under the bunching policy.
///
/// With `Q(x, y)` the probability that an arm sends `x` (binary) photons on
/// and `y` (binary) to its demon, the imbalance is
/// `2 (Q(0,0) Q(1,1) − Q(0,1) Q(1,0))`.
pub fn thermal_delta<T: Real>(nbar: T, r: ReflectionAmplitude<T>, eps2: CouplingEfficiency<T>) -> T {
    let n = nbar * eps2.value();
    let r2 = r.reflectivity();
    let q00 = T::one() / (T::one() + n);
    // no reflected photon: thermal of mean n R² is empty
    let q_no_refl = T::one() / (T::one() + n * r2);
    let q_no_trans = T::one() / (T::one() + n * (T::one() - r2));
    let q10 = q_no_refl - q00;
    let q01 = q_no_trans - q00;
    let q11 = T::one() - q00 - q10 - q01;
    T::lit(2.0) * (q00 * q11 - q01 * q10)
}

/// Lowest-order version of [`thermal_delta`] using only the one-photon terms
/// `P(m, n)` with `m, n ≤ 1` of the split thermal distribution.
pub fn thermal_delta_low_photon<T: Real>(nbar: T, r: ReflectionAmplitude<T>) -> T {
    let r2 = r.reflectivity();
    let t2 = T::one() - r2;
    let z = T::one() + nbar;
    let p = |m: u32, k: u32| -> T {
        let total = m + k;
        choose::<T>(total, m) * nbar.powi(total as i32) / z.powi(total as i32 + 1)
            * t2.powi(m as i32)
            * r2.powi(k as i32)
    };
    T::lit(2.0) * (p(0, 0) * p(1, 1) - p(0, 1) * p(1, 0))
}

/// Closed-form `P_A − P_B` of each source under its canonical policy.
pub fn symbolic_delta<T: Real>(
    spec: &SourceSpec<T>,
    r: ReflectionAmplitude<T>,
    eps2: CouplingEfficiency<T>,
) -> T {
    let two = T::lit(2.0);
    let profile = r.reflectivity() * (T::one() - r.reflectivity());
    let e4 = eps2.value() * eps2.value();
    let pair = |s: T| {
        if spec.drops_vacuum() {
            T::one()
        } else {
            let s2 = s * s;
            s2 / (T::one() + s2)
        }
    };
    match *spec {
        SourceSpec::Uncorrelated { nbar } => thermal_delta(nbar.value(), r, eps2),
        SourceSpec::SplitThermal { .. } => T::zero(),
        SourceSpec::Correlated { squeezing, .. } => pair(squeezing.value()) * two * e4 * profile,
        SourceSpec::AntiCorrelated {
            squeezing,
            visibility,
            ..
        } => {
            let v2 = visibility.value();
            pair(squeezing.value()) * two * e4 * (two * v2 - T::one()) * profile
        }
    }
}

/// Mutual information in bits between the demon clicks and the photon numbers
/// in the two output arms, from an oracle table.
pub fn table_mutual_information<T: Real>(report: &OracleReport<T>) -> T {
    let total = report.total();
    if !(total > T::zero()) {
        return T::zero();
    }
    let mut px: BTreeMap<(bool, bool), T> = BTreeMap::new();
    let mut py: BTreeMap<(u32, u32), T> = BTreeMap::new();
    let mut pxy: BTreeMap<((bool, bool), (u32, u32)), T> = BTreeMap::new();
    for e in &report.table {
        let x = (e.occupation[2] > 0, e.occupation[3] > 0);
        let y = (e.occupation[0], e.occupation[1]);
        let p = e.probability / total;
        *px.entry(x).or_insert_with(T::zero) += p;
        *py.entry(y).or_insert_with(T::zero) += p;
        *pxy.entry((x, y)).or_insert_with(T::zero) += p;
    }
    pxy.iter()
        .filter(|(_, p)| **p > T::zero())
        .map(|((x, y), p)| *p * (*p / (px[x] * py[y])).log2())
        .sum()
}
