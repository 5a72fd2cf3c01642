use serde::{Deserialize, Serialize};

use demonlab_core::protocol::Policy;
use demonlab_core::{CouplingEfficiency, ReflectionAmplitude, SourceSpec};

use crate::error::{McError, Result};

/// Switch operation during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Switch fixed to bar: used to balance the arms.
    Bar,
    /// Switch fixed to cross: measures the accidental imbalance.
    Cross,
    /// Switch set every slot from the demon's clicks.
    FeedForward,
}

/// How photon numbers are correlated between slots.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum StreamModel {
    /// Independent Bose-Einstein draws every slot.
    #[default]
    Iid,
    /// Thermal light with a Gaussian field autocorrelation, giving
    /// `g²(τ) = 1 + exp(−π (τ/τ_c)²)` with `τ` and `τ_c` in slots.
    GaussianMemory { tau_c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spec: SourceSpec<f64>,
    #[serde(rename = "r2", with = "reflectivity")]
    pub r: ReflectionAmplitude<f64>,
    pub eps2: CouplingEfficiency<f64>,
    /// Number of repetitions `Γ`.
    pub slots: u64,
    pub seed: u64,
    pub mode: RunMode,
    /// Feed-forward table; the canonical one for the source when absent.
    #[serde(default)]
    pub policy: Option<Policy>,
    /// Per-arm attenuation applied for balancing.
    #[serde(default = "unit_pair")]
    pub arm_trim: (f64, f64),
    /// Intrinsic per-arm transmission, e.g. an unequal fiber coupling.
    #[serde(default = "unit_pair")]
    pub arm_transmission: (f64, f64),
    /// Slots after a trigger during which the switch ignores the demon.
    #[serde(default)]
    pub dead_window_slots: u32,
    #[serde(default)]
    pub stream: StreamModel,
}

fn unit_pair() -> (f64, f64) {
    (1.0, 1.0)
}

impl RunConfig {
    pub fn new(
        spec: SourceSpec<f64>,
        r: ReflectionAmplitude<f64>,
        eps2: CouplingEfficiency<f64>,
        slots: u64,
        seed: u64,
        mode: RunMode,
    ) -> Self {
        Self {
            spec,
            r,
            eps2,
            slots,
            seed,
            mode,
            policy: None,
            arm_trim: unit_pair(),
            arm_transmission: unit_pair(),
            dead_window_slots: 0,
            stream: StreamModel::Iid,
        }
    }

    pub fn with_mode(&self, mode: RunMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn effective_policy(&self) -> Policy {
        self.policy
            .unwrap_or_else(|| Policy::canonical(self.spec.kind()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots == 0 {
            return Err(McError::Config("slots must be at least 1".into()));
        }
        for (name, (a, b)) in [
            ("arm_trim", self.arm_trim),
            ("arm_transmission", self.arm_transmission),
        ] {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return Err(McError::Config(format!("{name} entries must lie in [0, 1]")));
            }
        }
        if self.policy.is_some() && self.mode != RunMode::FeedForward {
            return Err(McError::Config(
                "a policy only applies to feed-forward runs".into(),
            ));
        }
        if let StreamModel::GaussianMemory { tau_c } = self.stream {
            if !self.spec.kind().is_thermal() {
                return Err(McError::Config(
                    "the Gaussian-memory stream is only defined for thermal sources".into(),
                ));
            }
            if !(tau_c.is_finite() && tau_c > 0.0) {
                return Err(McError::Config("tau_c must be positive".into()));
            }
        }
        if self.dead_window_slots > 0 && self.mode != RunMode::FeedForward {
            return Err(McError::Config(
                "a dead window only applies to feed-forward runs".into(),
            ));
        }
        Ok(())
    }
}

mod reflectivity {
    use demonlab_core::ReflectionAmplitude;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &ReflectionAmplitude<f64>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(r.reflectivity())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ReflectionAmplitude<f64>, D::Error> {
        let r2 = f64::deserialize(d)?;
        ReflectionAmplitude::from_reflectivity(r2).map_err(serde::de::Error::custom)
    }
}
