//! Validated physical parameters.
//!
//! Every parameter is a thin newtype over the scalar. Construction checks the
//! range once so the rest of the crate can take the value at face value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Above this mean photon number the two-photon truncations stop being a good
/// description of a thermal bath.
pub const LOW_PHOTON_VALIDITY: f64 = 0.2;

fn check_unit<T: Real>(name: &'static str, value: T) -> Result<T> {
    if value.is_finite() && value >= T::zero() && value <= T::one() {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value: value.to_f64_lossy(),
            range: "[0, 1]",
        })
    }
}

fn check_non_negative<T: Real>(name: &'static str, value: T) -> Result<T> {
    if value.is_finite() && value >= T::zero() {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value: value.to_f64_lossy(),
            range: "[0, inf)",
        })
    }
}

macro_rules! scalar_serde {
    ($ty:ident) => {
        impl<T: Real> TryFrom<f64> for $ty<T> {
            type Error = Error;
            fn try_from(value: f64) -> Result<Self> {
                Self::new(T::lit(value))
            }
        }

        impl<T: Real> From<$ty<T>> for f64 {
            fn from(value: $ty<T>) -> f64 {
                value.0.to_f64_lossy()
            }
        }
    };
}

/// Mean photon number per coherence-time mode, `n̄ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MeanPhotonNumber<T: Real>(T);

impl<T: Real> MeanPhotonNumber<T> {
    pub fn new(nbar: T) -> Result<Self> {
        let nbar = check_non_negative("nbar", nbar)?;
        let this = Self(nbar);
        if this.exceeds_low_photon_regime() {
            log::warn!(
                "mean photon number {nbar} is above {LOW_PHOTON_VALIDITY}; \
                 low-photon truncations lose accuracy"
            );
        }
        Ok(this)
    }

    pub fn value(self) -> T {
        self.0
    }

    /// True when `n̄` is beyond the regime where the two-photon truncations hold.
    pub fn exceeds_low_photon_regime(self) -> bool {
        self.0 > T::lit(LOW_PHOTON_VALIDITY)
    }
}

scalar_serde!(MeanPhotonNumber);

/// Beamsplitter reflection amplitude `r ∈ [0, 1]`; the reflectivity is `r²`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ReflectionAmplitude<T: Real>(T);

impl<T: Real> ReflectionAmplitude<T> {
    pub fn new(r: T) -> Result<Self> {
        check_unit("r", r).map(Self)
    }

    /// Builds the amplitude from a reflectivity `r² ∈ [0, 1]`.
    pub fn from_reflectivity(r2: T) -> Result<Self> {
        check_unit("r2", r2).map(|r2| Self(r2.sqrt()))
    }

    pub fn amplitude(self) -> T {
        self.0
    }

    pub fn reflectivity(self) -> T {
        self.0 * self.0
    }

    pub fn transmissivity(self) -> T {
        T::one() - self.reflectivity()
    }
}

scalar_serde!(ReflectionAmplitude);

/// Probability `ε²` that a photon survives the loss channel.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct CouplingEfficiency<T: Real>(T);

impl<T: Real> CouplingEfficiency<T> {
    pub fn new(eps2: T) -> Result<Self> {
        check_unit("eps2", eps2).map(Self)
    }

    pub fn lossless() -> Self {
        Self(T::one())
    }

    pub fn value(self) -> T {
        self.0
    }
}

scalar_serde!(CouplingEfficiency);

/// Probability `v²` that a photon pair bunches into a two-photon N00N state.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Visibility<T: Real>(T);

impl<T: Real> Visibility<T> {
    pub fn new(v2: T) -> Result<Self> {
        check_unit("v2", v2).map(Self)
    }

    pub fn value(self) -> T {
        self.0
    }

    /// Contrast factor `2v² − 1` by which anti-correlated power is scaled.
    pub fn contrast(self) -> T {
        T::lit(2.0) * self.0 - T::one()
    }
}

scalar_serde!(Visibility);

/// Two-mode squeezing parameter `s ≥ 0`, with `sinh²(s) = n̄` per mode.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SqueezingParameter<T: Real>(T);

impl<T: Real> SqueezingParameter<T> {
    pub fn new(s: T) -> Result<Self> {
        check_non_negative("s", s).map(Self)
    }

    /// Squeezing that produces the given per-mode mean photon number.
    pub fn from_mean_photon_number(nbar: MeanPhotonNumber<T>) -> Self {
        Self(nbar.value().sqrt().asinh())
    }

    /// Squeezing whose pair weight `s²` equals `s2`.
    pub fn from_pair_weight(s2: T) -> Result<Self> {
        check_non_negative("s2", s2).map(|s2| Self(s2.sqrt()))
    }

    pub fn value(self) -> T {
        self.0
    }

    /// Relative weight `s²` of the photon-pair term against vacuum.
    pub fn pair_weight(self) -> T {
        self.0 * self.0
    }

    pub fn mean_photon_number(self) -> MeanPhotonNumber<T> {
        let sh = self.0.sinh();
        MeanPhotonNumber(sh * sh)
    }
}

scalar_serde!(SqueezingParameter);
