//! Slot-level Monte Carlo of the demon experiment.
//!
//! Each slot is one coherence time. The source emits `(n_A, n_B)`, every
//! photon survives coupling loss and arm trims or not, reflects to the demon
//! or stays in its arm, and the switch routes the arms to the output
//! detectors. Runs are split into chunks of [`CHUNK_SLOTS`] slots, each with
//! its own ChaCha8 stream (`set_stream(chunk)`) under a seed derived from the
//! master seed and the run mode, so results do not depend on thread count.

pub mod calibrate;
pub mod campaign;
pub mod config;
pub mod error;
pub mod g2;
pub mod run;
pub mod stream;

pub use calibrate::calibrate_balance;
pub use campaign::{measure_power, PowerMeasurement};
pub use config::{RunConfig, RunMode, StreamModel};
pub use error::{McError, Result};
pub use g2::{estimate_g2, fit_coherence_time, G2Point};
pub use run::{run, sample_slots, RunResult, StreamSample};
pub use stream::CHUNK_SLOTS;
