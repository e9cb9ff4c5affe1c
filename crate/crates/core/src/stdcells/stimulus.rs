use serde::{Deserialize, Serialize};

use super::cells::CellSpec;
use crate::circuit::Waveform;
use crate::error::{Error, Result};

/// Timing of the per-pin stimulus segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub dt: f64,
    /// Length of one segment (one simulation).
    pub window: f64,
    /// Start of the rising input edge.
    pub first_edge: f64,
    /// Start of the falling edge relative to the rising one.
    pub edge_gap: f64,
    /// 0-100% ramp time of each edge.
    pub edge_time: f64,
    pub vdd: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            dt: 1e-12,
            window: 4e-9,
            first_edge: 1e-9,
            edge_gap: 2e-9,
            edge_time: 10e-12,
            vdd: crate::VDD,
        }
    }
}

impl SimSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.dt) && ok(self.window) && ok(self.edge_gap) && ok(self.edge_time) && ok(self.vdd)) {
            return Err(Error::Precondition("simulation settings must be positive".into()));
        }
        if !(self.first_edge >= 0.0 && self.first_edge + self.edge_gap + self.edge_time < self.window) {
            return Err(Error::Precondition(format!(
                "both edges must fit in the {:e} s window",
                self.window
            )));
        }
        if self.edge_time >= self.edge_gap {
            return Err(Error::Precondition("edge time must be shorter than the edge gap".into()));
        }
        Ok(())
    }
}

/// One simulation: `pin` toggles up then down, the other inputs hold values
/// that make the output follow it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusSegment {
    pub pin: String,
    /// Constant values of the other inputs, in `inputs` order.
    pub side_inputs: Vec<(String, bool)>,
    /// Output goes the same way as the pin.
    pub non_inverting: bool,
}

impl StimulusSegment {
    /// Source waveform per input, in `cell.inputs` order.
    pub fn waveforms(&self, cell: &CellSpec, s: &SimSettings) -> Result<Vec<Waveform>> {
        let (t0, t1) = (s.first_edge, s.first_edge + s.edge_gap);
        cell.inputs
            .iter()
            .map(|name| {
                if *name == self.pin {
                    let mut pts = vec![
                        (t0, 0.0),
                        (t0 + s.edge_time, s.vdd),
                        (t1, s.vdd),
                        (t1 + s.edge_time, 0.0),
                    ];
                    if t0 > 0.0 {
                        pts.insert(0, (0.0, 0.0));
                    }
                    Waveform::pwl(pts)
                } else {
                    let v = self
                        .side_inputs
                        .iter()
                        .find(|(n, _)| n == name)
                        .map(|(_, v)| *v)
                        .ok_or_else(|| Error::Precondition(format!("no value for input {name}")))?;
                    Ok(Waveform::Dc(if v { s.vdd } else { 0.0 }))
                }
            })
            .collect()
    }

    /// Input-to-output arcs the segment produces (one per edge).
    pub fn arcs(&self) -> usize {
        2
    }
}

/// One segment per input pin. Side inputs take the first assignment, in
/// binary counting order, under which the output depends on the pin.
pub fn stimulus_plan(cell: &CellSpec) -> Vec<StimulusSegment> {
    let k = cell.inputs.len();
    let mut plan = Vec::with_capacity(k);
    for (i, pin) in cell.inputs.iter().enumerate() {
        let found = (0..1usize << (k - 1)).find_map(|m| {
            let others: Vec<bool> = (0..k - 1).map(|j| m >> (k - 2 - j) & 1 == 1).collect();
            let with = |v: bool| {
                let mut x = others.clone();
                x.insert(i, v);
                x
            };
            let (lo, hi) = (cell.evaluate(&with(false)), cell.evaluate(&with(true)));
            (lo != hi).then_some((others, hi))
        });
        // every library cell depends on all of its inputs
        let (others, hi) = found.expect("input is observable");
        let side_inputs = cell
            .inputs
            .iter()
            .filter(|n| *n != pin)
            .cloned()
            .zip(others)
            .collect();
        plan.push(StimulusSegment {
            pin: pin.clone(),
            side_inputs,
            non_inverting: hi,
        });
    }
    plan
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_counts() {
        let inv = CellSpec::by_name("INV1X1").unwrap();
        assert_eq!(stimulus_plan(&inv).iter().map(|s| s.arcs()).sum::<usize>(), 2);
        let nand3 = CellSpec::by_name("NAND3X1").unwrap();
        let plan = stimulus_plan(&nand3);
        assert_eq!(plan.iter().map(|s| s.arcs()).sum::<usize>(), 6);
        for s in &plan {
            assert!(s.side_inputs.iter().all(|(_, v)| *v), "NAND side inputs are non-controlling 1s");
            assert!(!s.non_inverting);
        }
    }

    #[test]
    fn mux_select_uses_complementary_data() {
        let mux = CellSpec::by_name("MUX2X1").unwrap();
        let plan = stimulus_plan(&mux);
        let sel = plan.iter().find(|s| s.pin == "S").unwrap();
        assert_ne!(sel.side_inputs[0].1, sel.side_inputs[1].1);
    }

    #[test]
    fn segments_sensitize_every_pin() {
        for cell in CellSpec::library() {
            for seg in stimulus_plan(&cell) {
                let assign = |v: bool| -> Vec<bool> {
                    cell.inputs
                        .iter()
                        .map(|n| {
                            if *n == seg.pin {
                                v
                            } else {
                                seg.side_inputs.iter().find(|(m, _)| m == n).unwrap().1
                            }
                        })
                        .collect()
                };
                assert_ne!(cell.evaluate(&assign(false)), cell.evaluate(&assign(true)), "{}", cell.name);
            }
        }
    }

    #[test]
    fn waveform_edges() {
        let nand = CellSpec::by_name("NAND2X1").unwrap();
        let s = SimSettings::default();
        s.validate().unwrap();
        let w = stimulus_plan(&nand)[0].waveforms(&nand, &s).unwrap();
        assert_eq!(w[0].value(0.5e-9), 0.0);
        assert_eq!(w[0].value(2e-9), 1.0);
        assert!((w[0].value(1.005e-9) - 0.5).abs() < 1e-9);
        assert_eq!(w[0].value(3.5e-9), 0.0);
        assert_eq!(w[1], Waveform::Dc(1.0));
        let bad = SimSettings { window: 2e-9, ..s };
        assert!(bad.validate().is_err());
    }
}
