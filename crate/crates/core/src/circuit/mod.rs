//! Netlists, Newton DC operating point, fixed-step transient analysis and
//! delay/power measurement.

mod netlist;
mod parse;
mod solver;

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use solver::{Mna, Rule};

pub use netlist::{Element, ElementKind, Netlist, Transistor, Waveform, GROUND};
pub use parse::{parse_netlist, parse_value, read_netlist, TranSpec};
pub use solver::{NewtonOptions, GMIN_FLOOR};

/// Node voltages and source currents of a DC solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcSolution {
    pub node_names: Vec<String>,
    /// Indexed like `node_names`; ground (index 0) is 0 V.
    pub voltages: Vec<f64>,
    /// `(source name, branch current)`; the branch current flows from the
    /// positive terminal through the source to the negative one.
    pub source_currents: Vec<(String, f64)>,
}

impl DcSolution {
    pub fn voltage(&self, node: &str) -> Option<f64> {
        let i = if matches!(node, "0" | "gnd" | "GND") {
            0
        } else {
            self.node_names.iter().position(|n| n == node)?
        };
        Some(self.voltages[i])
    }
}

fn unpack(net: &Netlist, mna: &Mna<'_>, x: &DVector<f64>) -> DcSolution {
    let voltages = (0..mna.node_count()).map(|n| mna.v(x, n)).collect();
    let source_currents = net
        .sources()
        .iter()
        .enumerate()
        .map(|(k, &e)| (net.elements()[e].name.clone(), mna.source_current(x, k)))
        .collect();
    DcSolution {
        node_names: net.node_names().to_vec(),
        voltages,
        source_currents,
    }
}

/// DC operating point with sources at their t = 0 values.
pub fn dc_operating_point(net: &Netlist) -> Result<DcSolution> {
    dc_operating_point_with(net, &NewtonOptions::default())
}

pub fn dc_operating_point_with(net: &Netlist, opts: &NewtonOptions) -> Result<DcSolution> {
    let mna = Mna::new(net, *opts)?;
    let x = mna.dc(0.0)?;
    Ok(unpack(net, &mna, &x))
}

/// Residual and Jacobian of the static (resistive) MNA equations at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stamped {
    pub dim: usize,
    /// Non-ground node voltages first, then one branch current per source.
    pub residual: Vec<f64>,
    /// Row-major `dim x dim`.
    pub jacobian: Vec<f64>,
}

impl Stamped {
    pub fn jacobian(&self, row: usize, col: usize) -> f64 {
        self.jacobian[row * self.dim + col]
    }
}

/// Assemble the static MNA system at unknown vector `x` and time `t`.
/// Exposed for stamp verification against finite differences.
pub fn assemble_static(net: &Netlist, x: &[f64], t: f64) -> Result<Stamped> {
    let mna = Mna::new(net, NewtonOptions::default())?;
    let dim = mna.dim();
    if x.len() != dim {
        return Err(Error::Precondition(format!("expected {dim} unknowns, got {}", x.len())));
    }
    let xv = DVector::from_column_slice(x);
    let mut f = DVector::zeros(dim);
    let mut jac = nalgebra::DMatrix::zeros(dim, dim);
    mna.stamp_static(&xv, t, 1.0, 0.0, &mut f, &mut jac)?;
    Ok(Stamped {
        dim,
        residual: f.iter().copied().collect(),
        jacobian: jac.transpose().iter().copied().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransientResult {
    pub time: Vec<f64>,
    /// Non-ground node names, in the order of `voltages`.
    pub node_names: Vec<String>,
    pub voltages: Vec<Vec<f64>>,
    /// Current delivered by the supply source (positive when sourcing).
    pub supply_current: Vec<f64>,
    /// Supply voltage waveform sampled on `time` (0 if there is no supply).
    pub supply_voltage: Vec<f64>,
    /// Accumulated per-step mismatch between the change in stored charge and
    /// the charge delivered through ground-connected resistive elements and
    /// sources, relative to the gross delivered charge.
    pub charge_error: f64,
    /// Steps that needed dt/2 or dt/4 sub-steps.
    pub refined_steps: usize,
}

impl TransientResult {
    pub fn waveform(&self, node: &str) -> Option<&[f64]> {
        self.node_names
            .iter()
            .position(|n| n == node)
            .map(|i| self.voltages[i].as_slice())
    }

    /// `time_s,<node>,...` with one row per time point.
    pub fn to_csv(&self, nodes: &[&str]) -> Result<String> {
        let cols = nodes
            .iter()
            .map(|n| {
                self.waveform(n).ok_or(Error::UnknownName {
                    what: "node",
                    name: n.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = String::from("time_s");
        for n in nodes {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (k, t) in self.time.iter().enumerate() {
            let _ = write!(out, "{t:e}");
            for c in &cols {
                let _ = write!(out, ",{:e}", c[k]);
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Fixed-step transient from the DC point at t = 0 up to `t_stop`.
///
/// Trapezoidal rule on charges, backward Euler for the very first step. A
/// step whose Newton iteration fails is retried as two steps of `dt/2`, then
/// four of `dt/4`; only the nominal grid points are recorded.
pub fn transient(net: &Netlist, t_stop: f64, dt: f64) -> Result<TransientResult> {
    transient_with(net, t_stop, dt, &NewtonOptions::default())
}

pub fn transient_with(net: &Netlist, t_stop: f64, dt: f64, opts: &NewtonOptions) -> Result<TransientResult> {
    if !(dt.is_finite() && dt > 0.0 && t_stop.is_finite() && t_stop > 0.0) {
        return Err(Error::Precondition(format!(
            "transient needs dt > 0 and t_stop > 0, got dt = {dt}, t_stop = {t_stop}"
        )));
    }
    let mna = Mna::new(net, *opts)?;
    let supply = net
        .supply_index()
        .and_then(|e| mna.source_position(e).map(|k| (e, k)));
    let supply_v = |t: f64| match supply.map(|(e, _)| &net.elements()[e].kind) {
        Some(ElementKind::VSource { wave, .. }) => wave.value(t),
        _ => 0.0,
    };

    let mut x = mna.dc(0.0)?;
    let mut state = mna.charge_state(&x)?;
    let steps = ((t_stop / dt).round() as usize).max(1);
    let n_nodes = mna.node_count();

    let mut time = Vec::with_capacity(steps + 1);
    let mut voltages = vec![Vec::with_capacity(steps + 1); n_nodes - 1];
    let mut supply_current = Vec::with_capacity(steps + 1);
    let mut supply_voltage = Vec::with_capacity(steps + 1);
    let mut record = |t: f64, x: &DVector<f64>| {
        time.push(t);
        for (node, col) in voltages.iter_mut().enumerate() {
            col.push(mna.v(x, node + 1));
        }
        supply_current.push(supply.map_or(0.0, |(_, k)| -mna.source_current(x, k)));
        supply_voltage.push(supply_v(t));
    };
    record(0.0, &x);

    let (mut inflow, mut gross) = mna.ground_inflow(&x)?;
    let mut mismatch = 0.0;
    let mut throughput = 0.0;
    let mut first = true;
    let mut refined_steps = 0;

    for k in 1..=steps {
        let t0 = (k - 1) as f64 * dt;
        let mut committed = None;
        let mut last_residual = f64::INFINITY;
        for sub in [1usize, 2, 4] {
            let h = dt / sub as f64;
            let (mut xs, mut st) = (x.clone(), state.clone());
            let mut acct = (inflow, gross, 0.0, 0.0);
            let mut sub_first = first;
            let mut ok = true;
            for j in 1..=sub {
                let t = if j == sub { k as f64 * dt } else { t0 + j as f64 * h };
                let rule = if sub_first { Rule::BackwardEuler } else { Rule::Trapezoidal };
                match mna.step(&xs, &st, t, h, rule) {
                    Ok((xn, sn)) => {
                        let (in_n, gr_n) = mna.ground_inflow(&xn)?;
                        let dq = mna.node_charge(&sn) - mna.node_charge(&st);
                        let (q_ext, q_gross) = match rule {
                            Rule::BackwardEuler => (h * in_n, h * gr_n),
                            Rule::Trapezoidal => (0.5 * h * (acct.0 + in_n), 0.5 * h * (acct.1 + gr_n)),
                        };
                        acct = (in_n, gr_n, acct.2 + (dq - q_ext).abs(), acct.3 + q_gross);
                        xs = xn;
                        st = sn;
                        sub_first = false;
                    }
                    Err(r) => {
                        last_residual = r;
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                if sub > 1 {
                    refined_steps += 1;
                }
                committed = Some((xs, st, acct));
                break;
            }
        }
        let Some((xn, sn, acct)) = committed else {
            return Err(Error::Convergence {
                analysis: format!("transient step at t = {:e} s", k as f64 * dt),
                residual: last_residual,
            });
        };
        x = xn;
        state = sn;
        inflow = acct.0;
        gross = acct.1;
        mismatch += acct.2;
        throughput += acct.3;
        first = false;
        record(k as f64 * dt, &x);
    }

    Ok(TransientResult {
        time,
        node_names: net.node_names()[1..].to_vec(),
        voltages,
        supply_current,
        supply_voltage,
        charge_error: if throughput > 0.0 { mismatch / throughput } else { 0.0 },
        refined_steps,
    })
}

/// One input-to-output transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub input_rising: bool,
    pub output_rising: bool,
    pub delay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    /// Mean delay of arcs with a rising output.
    pub t_plh: Option<f64>,
    /// Mean delay of arcs with a falling output.
    pub t_phl: Option<f64>,
    /// Mean over all arcs.
    pub delay: f64,
    /// `(1/T) * integral of vdd * i_vdd dt` over the whole window.
    pub power: f64,
    pub arcs: Vec<Arc>,
}

/// Times where `v` crosses `level`, linearly interpolated, with direction.
pub fn crossings(time: &[f64], v: &[f64], level: f64) -> Vec<(f64, bool)> {
    let mut out = Vec::new();
    for k in 1..v.len().min(time.len()) {
        let (a, b) = (v[k - 1] - level, v[k] - level);
        let rising = a < 0.0 && b >= 0.0;
        let falling = a > 0.0 && b <= 0.0;
        if rising || falling {
            let frac = a / (a - b);
            out.push((time[k - 1] + frac * (time[k] - time[k - 1]), rising));
        }
    }
    out
}

/// Delays between 50% crossings of `in_node` and the first subsequent
/// crossing of `out_node`, plus average supply power.
pub fn measure(result: &TransientResult, in_node: &str, out_node: &str, vdd: f64) -> Result<Measurement> {
    let get = |n: &str| {
        result.waveform(n).ok_or(Error::UnknownName {
            what: "node",
            name: n.to_string(),
        })
    };
    let (vin, vout) = (get(in_node)?, get(out_node)?);
    let level = 0.5 * vdd;
    let cin = crossings(&result.time, vin, level);
    if cin.is_empty() {
        return Err(Error::NoCrossing { node: in_node.into() });
    }
    let cout = crossings(&result.time, vout, level);
    let mut arcs = Vec::new();
    for (i, &(t_in, in_rising)) in cin.iter().enumerate() {
        let next_in = cin.get(i + 1).map_or(f64::INFINITY, |c| c.0);
        if let Some(&(t_out, out_rising)) = cout.iter().find(|c| c.0 >= t_in && c.0 < next_in) {
            arcs.push(Arc {
                input_rising: in_rising,
                output_rising: out_rising,
                delay: t_out - t_in,
            });
        }
    }
    if arcs.is_empty() {
        return Err(Error::NoCrossing { node: out_node.into() });
    }
    let mean = |sel: &dyn Fn(&Arc) -> bool| {
        let d: Vec<f64> = arcs.iter().filter(|a| sel(a)).map(|a| a.delay).collect();
        (!d.is_empty()).then(|| d.iter().sum::<f64>() / d.len() as f64)
    };
    let t_plh = mean(&|a| a.output_rising);
    let t_phl = mean(&|a| !a.output_rising);
    let delay = mean(&|_| true).expect("non-empty");
    Ok(Measurement {
        t_plh,
        t_phl,
        delay,
        power: average_power(result),
        arcs,
    })
}

/// `(1/T) * integral of v_supply * i_supply dt`, trapezoidal.
pub fn average_power(result: &TransientResult) -> f64 {
    let t = &result.time;
    if t.len() < 2 {
        return 0.0;
    }
    let p: Vec<f64> = result
        .supply_voltage
        .iter()
        .zip(&result.supply_current)
        .map(|(v, i)| v * i)
        .collect();
    let energy: f64 = (1..t.len()).map(|k| 0.5 * (p[k] + p[k - 1]) * (t[k] - t[k - 1])).sum();
    energy / (t[t.len() - 1] - t[0])
}
