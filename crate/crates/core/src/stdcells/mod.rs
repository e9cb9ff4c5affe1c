//! The 14-cell static CMOS library, cell netlists with parasitics, the
//! per-pin stimulus plan and the PPA harness.
//!
//! Cells are two-layer: n-type devices (pull-down networks) on the top layer
//! built in the variant under test, p-type devices (pull-up networks) on the
//! bottom layer always built as traditional devices.

mod cells;
mod netlist;
mod ppa;
mod stimulus;

pub use cells::{CellSpec, Network, Stage, CELL_NAMES};
pub use netlist::{build_cell_netlist, input_source, miv_count, nodes, ModelSet, ParasiticPolicy};
pub use ppa::{run_ppa, Diagnostic, PpaEntry, PpaReport, VariantPpaSummary};
pub use stimulus::{stimulus_plan, SimSettings, StimulusSegment};
