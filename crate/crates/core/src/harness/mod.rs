//! Scenario configuration, bound sweeps, verification suites and file output.

pub mod config;
pub mod simulate;
pub mod sweep;
pub mod verify;

pub use config::{ConfigSource, MeasurementChoice, ScenarioConfig};
pub use simulate::{simulate, simulate_records, RunReport};
pub use sweep::{parse_csv, run_sweep, to_csv, to_svg, BoundRow, PlotAxis, SweepConfig};
pub use verify::{run_suite, Check, Suite, SuiteReport, SUITES};

use serde::Serialize;

use crate::error::Result;

/// Pretty JSON with a trailing newline. Floats use the shortest text that
/// parses back to the same value, so output is byte-stable.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| crate::Error::Io(e.into()))?;
    s.push('\n');
    Ok(s)
}
