//! Device-to-standard-cell characterization for FDSOI MIV-transistors.
//!
//! The crate is organised as a pipeline:
//!
//! * [`model`]: reduced-order FDSOI compact model (drain current, gate
//!   capacitance and charge, small-signal conductances).
//! * [`curves`]: I-V / C-V curve containers, the curve CSV format, a synthetic
//!   reference-device generator and the region error metric.
//! * [`extraction`]: bounded Nelder-Mead and the three-stage parameter
//!   extraction flow.
//! * [`layout`]: rectangle footprints of the four transistor variants and
//!   two-layer cell area metrics.
//! * [`circuit`]: MNA netlists, Newton DC operating point, trapezoidal
//!   transient analysis and delay/power measurement.
//! * [`stdcells`]: the 14-cell library, parasitic insertion, stimulus plans and
//!   the PPA harness.

pub mod circuit;
pub mod curves;
pub mod error;
pub mod extraction;
pub mod fixtures;
pub mod layout;
pub mod model;
pub mod stdcells;
mod types;

pub use error::{Error, Result};
pub use types::{Polarity, Variant};

/// Supply voltage used by every sweep and simulation.
pub const VDD: f64 = 1.0;

/// Version tag of the on-disk formats written by this crate.
pub const FORMAT_VERSION: &str = "v1";
