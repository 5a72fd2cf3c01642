//! Harness around the demon model: sweeps over the tap reflectivity,
//! Monte Carlo campaigns, the check suite and CSV/JSON/SVG reports.

pub mod checks;
pub mod config;
pub mod error;
pub mod presets;
pub mod report;
pub mod sweep;

pub use checks::{run_checks, CheckOptions, CheckSummary};
pub use config::{Engine, McConfig, McSettings, SeriesSpec, SweepConfig};
pub use error::HarnessError;
pub use report::{emit_report, Format};
pub use sweep::{run_sweep, ReportRow, SweepOutcome};
