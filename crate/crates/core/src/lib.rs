//! Diagonal Fock-space model of a photonic Maxwell's demon.
//!
//! States are classical mixtures over photon-number tuples
//! ([`JointOccupationDistribution`]). Sources feed a lossy tap on each arm;
//! the demon reads click patterns at its two detectors and sets a bar/cross
//! switch. Closed forms for the resulting imbalance live in [`analytics`],
//! the click/photon-number mutual information in [`information`], and an
//! independent path enumeration in [`oracle`].
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod analytics;
pub mod error;
pub mod fock;
pub mod information;
pub mod oracle;
pub mod params;
pub mod protocol;
pub mod scalar;
pub mod sources;

pub use analytics::{
    closed_form_power, construct_delta_n, peak_power, pipeline_power, power_curve, Normalization,
    PowerModel,
};
pub use error::{Error, Result};
pub use fock::{
    beamsplitter_split, joint_detection_pmf, loss_channel, thermal_pmf, JointOccupationDistribution,
    DEFAULT_CUTOFF,
};
pub use information::{conditional_click_pmf, mutual_information};
pub use params::{
    CouplingEfficiency, MeanPhotonNumber, ReflectionAmplitude, SqueezingParameter, Visibility,
};
pub use protocol::{detector_probs, propagate, ClickPattern, Policy, SwitchState};
pub use scalar::Real;
pub use sources::{make_source, SourceKind, SourceSpec};

pub type Distribution = JointOccupationDistribution<f64>;
pub type Source = SourceSpec<f64>;
pub type Outcome = protocol::DemonOutcome<f64>;
pub type Curve = analytics::PowerCurve<f64>;
pub type Info = information::InfoResult<f64>;
pub type Report = oracle::OracleReport<f64>;
pub type Reflection = ReflectionAmplitude<f64>;
pub type Efficiency = CouplingEfficiency<f64>;
