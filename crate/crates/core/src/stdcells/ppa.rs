use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cells::CellSpec;
use super::netlist::{build_cell_netlist, ModelSet, ParasiticPolicy};
use super::stimulus::{stimulus_plan, SimSettings, StimulusSegment};
use crate::circuit::{measure, transient, Arc};
use crate::error::{Error, Result};
use crate::layout::{library_area_summary, ProcessParams};
use crate::types::Variant;

/// Simulated and layout metrics of one cell in one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpaEntry {
    pub cell: String,
    pub variant: Variant,
    /// Mean over all arcs of the stimulus plan.
    pub delay_s: f64,
    pub t_plh_s: f64,
    pub t_phl_s: f64,
    /// Mean supply power over all segments.
    pub power_w: f64,
    pub cell_area_nm2: f64,
    pub substrate_area_nm2: f64,
    pub arcs: usize,
    /// Worst transient charge-conservation residual over the segments.
    pub charge_error: f64,
}

/// A (cell, variant) pair that produced no entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub cell: String,
    pub variant: Variant,
    pub message: String,
}

/// Per-variant averages. Deltas are relative to the traditional variant
/// and are `None` when it was not simulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantPpaSummary {
    pub variant: Variant,
    pub cells: usize,
    pub mean_delay_s: f64,
    pub mean_power_w: f64,
    pub mean_cell_area_nm2: f64,
    pub mean_substrate_area_nm2: f64,
    /// Mean per-cell `(x / x_traditional - 1) * 100`; negative is faster.
    pub delay_delta_pct: Option<f64>,
    pub power_delta_pct: Option<f64>,
    /// Mean per-cell area reduction; positive is smaller.
    pub area_reduction_pct: f64,
    pub substrate_reduction_pct: f64,
    pub max_substrate_reduction_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpaReport {
    pub settings: SimSettings,
    pub policy: ParasiticPolicy,
    pub entries: Vec<PpaEntry>,
    pub variants: Vec<VariantPpaSummary>,
    pub diagnostics: Vec<Diagnostic>,
}

impl PpaReport {
    pub fn entry(&self, cell: &str, variant: Variant) -> Option<&PpaEntry> {
        self.entries.iter().find(|e| e.cell == cell && e.variant == variant)
    }

    pub fn variant(&self, variant: Variant) -> Option<&VariantPpaSummary> {
        self.variants.iter().find(|v| v.variant == variant)
    }

    /// `cell,variant,delay_s,power_W,cell_area_nm2,substrate_area_nm2`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell,variant,delay_s,power_W,cell_area_nm2,substrate_area_nm2\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{:e},{:e},{},{}",
                e.cell, e.variant, e.delay_s, e.power_w, e.cell_area_nm2, e.substrate_area_nm2
            );
        }
        out
    }
}

struct SegmentResult {
    arcs: Vec<Arc>,
    power: f64,
    charge_error: f64,
}

fn simulate_segment(
    cell: &CellSpec,
    variant: Variant,
    seg: &StimulusSegment,
    models: &ModelSet,
    policy: &ParasiticPolicy,
    s: &SimSettings,
) -> Result<SegmentResult> {
    let (n, p) = models.cell_devices(variant)?;
    let drive = seg.waveforms(cell, s)?;
    let net = build_cell_netlist(cell, n, p, policy, &drive, s.vdd)?;
    let res = transient(&net, s.window, s.dt)?;
    let m = measure(&res, &seg.pin, &cell.output, s.vdd)?;
    if m.arcs.len() != seg.arcs() {
        return Err(Error::NoCrossing {
            node: format!("{} (pin {}: {} of {} arcs)", cell.output, seg.pin, m.arcs.len(), seg.arcs()),
        });
    }
    for a in &m.arcs {
        if a.output_rising != (a.input_rising == seg.non_inverting) {
            return Err(Error::Numeric(format!(
                "pin {}: output moved against the expected direction",
                seg.pin
            )));
        }
    }
    Ok(SegmentResult {
        arcs: m.arcs,
        power: m.power,
        charge_error: res.charge_error,
    })
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = v.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Simulate every (cell, variant) over its stimulus plan and join the
/// layout areas. Simulations run on the rayon pool; a failing pair lands in
/// `diagnostics` and the rest proceed.
pub fn run_ppa(
    cells: &[CellSpec],
    variants: &[Variant],
    models: &ModelSet,
    policy: &ParasiticPolicy,
    settings: &SimSettings,
    process: &ProcessParams,
) -> Result<PpaReport> {
    settings.validate()?;
    policy.validate()?;
    if cells.is_empty() || variants.is_empty() {
        return Err(Error::Precondition("PPA needs at least one cell and one variant".into()));
    }
    let mut variants = variants.to_vec();
    variants.sort();
    variants.dedup();
    for &v in &variants {
        models.cell_devices(v)?;
    }
    let area = library_area_summary(cells, process)?;

    let plans: Vec<Vec<StimulusSegment>> = cells.iter().map(stimulus_plan).collect();
    let jobs: Vec<(usize, Variant, usize)> = cells
        .iter()
        .enumerate()
        .flat_map(|(c, _)| {
            let plans = &plans;
            variants
                .iter()
                .flat_map(move |&v| (0..plans[c].len()).map(move |s| (c, v, s)))
        })
        .collect();
    let results: Vec<Result<SegmentResult>> = jobs
        .par_iter()
        .map(|&(c, v, s)| simulate_segment(&cells[c], v, &plans[c][s], models, policy, settings))
        .collect();

    let mut entries = Vec::new();
    let mut diagnostics = Vec::new();
    let mut it = results.into_iter();
    for (c, cell) in cells.iter().enumerate() {
        for &variant in &variants {
            let segs: Vec<Result<SegmentResult>> = it.by_ref().take(plans[c].len()).collect();
            let failure = segs
                .iter()
                .zip(&plans[c])
                .find_map(|(r, seg)| r.as_ref().err().map(|e| format!("pin {}: {e}", seg.pin)));
            if let Some(message) = failure {
                log::warn!("{} {variant}: {message}", cell.name);
                diagnostics.push(Diagnostic {
                    cell: cell.name.to_string(),
                    variant,
                    message,
                });
                continue;
            }
            let segs: Vec<SegmentResult> = segs.into_iter().map(|r| r.expect("checked")).collect();
            let arcs: Vec<&Arc> = segs.iter().flat_map(|s| &s.arcs).collect();
            let a = area.entry(cell.name, variant).expect("area for every cell and variant");
            let entry = PpaEntry {
                cell: cell.name.to_string(),
                variant,
                delay_s: mean(arcs.iter().map(|a| a.delay)),
                t_plh_s: mean(arcs.iter().filter(|a| a.output_rising).map(|a| a.delay)),
                t_phl_s: mean(arcs.iter().filter(|a| !a.output_rising).map(|a| a.delay)),
                power_w: mean(segs.iter().map(|s| s.power)),
                cell_area_nm2: a.cell_area_nm2,
                substrate_area_nm2: a.substrate_nm2,
                arcs: arcs.len(),
                charge_error: segs.iter().map(|s| s.charge_error).fold(0.0, f64::max),
            };
            log::debug!(
                "{} {variant}: delay {:.3e} s, power {:.3e} W",
                entry.cell,
                entry.delay_s,
                entry.power_w
            );
            entries.push(entry);
        }
    }

    let summaries = variants
        .iter()
        .map(|&v| {
            let mine: Vec<&PpaEntry> = entries.iter().filter(|e| e.variant == v).collect();
            let delta = |f: &dyn Fn(&PpaEntry) -> f64| -> Option<f64> {
                let pairs: Vec<f64> = mine
                    .iter()
                    .filter_map(|e| {
                        entries
                            .iter()
                            .find(|b| b.variant == Variant::Traditional && b.cell == e.cell)
                            .map(|b| (f(e) / f(b) - 1.0) * 100.0)
                    })
                    .collect();
                (!pairs.is_empty()).then(|| mean(pairs))
            };
            let va = area.variant(v).expect("area summary for every variant");
            VariantPpaSummary {
                variant: v,
                cells: mine.len(),
                mean_delay_s: mean(mine.iter().map(|e| e.delay_s)),
                mean_power_w: mean(mine.iter().map(|e| e.power_w)),
                mean_cell_area_nm2: mean(mine.iter().map(|e| e.cell_area_nm2)),
                mean_substrate_area_nm2: mean(mine.iter().map(|e| e.substrate_area_nm2)),
                delay_delta_pct: delta(&|e| e.delay_s),
                power_delta_pct: delta(&|e| e.power_w),
                area_reduction_pct: va.mean_reduction_pct,
                substrate_reduction_pct: va.mean_substrate_reduction_pct,
                max_substrate_reduction_pct: va.max_substrate_reduction_pct,
            }
        })
        .collect();

    Ok(PpaReport {
        settings: *settings,
        policy: *policy,
        entries,
        variants: summaries,
        diagnostics,
    })
}
