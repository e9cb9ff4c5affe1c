//! Modified nodal analysis in residual form.
//!
//! Unknowns are the non-ground node voltages followed by one branch current
//! per voltage source. Each Newton iteration assembles the residual `F(x)`
//! (currents leaving every node, source branch equations) and its Jacobian,
//! then solves `J dx = -F` with a dense LU.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::netlist::{ElementKind, Netlist, Transistor, GROUND};
use crate::error::{Error, Result};
use crate::model::{evaluate, gate_capacitance, gate_charge, BiasPoint};

/// Conductance from every node to ground, always present. Keeps nodes that
/// are only reached through gates or capacitors from making `J` singular.
pub const GMIN_FLOOR: f64 = 1e-12;
/// Newton update limit per node voltage (V).
const MAX_DV: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Convergence needs the last voltage update below this (V).
    pub vtol: f64,
    /// ...and every residual entry below this (A, or V on source rows).
    pub itol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iterations: 100,
            vtol: 1e-6,
            itol: 1e-9,
        }
    }
}

/// Integration rule for one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rule {
    BackwardEuler,
    Trapezoidal,
}

/// Two-terminal charge element: fixed capacitor or transistor gate charge
/// (gate to source).
#[derive(Debug, Clone, Copy)]
enum ChargeKind {
    Linear(f64),
    Gate(usize),
}

#[derive(Debug, Clone, Copy)]
struct ChargeElement {
    a: usize,
    b: usize,
    kind: ChargeKind,
}

/// Charge state carried between time steps.
#[derive(Debug, Clone)]
pub(crate) struct ChargeState {
    q: Vec<f64>,
    i: Vec<f64>,
}

pub(crate) struct Mna<'a> {
    net: &'a Netlist,
    /// Element index of every voltage source, in unknown order.
    sources: Vec<usize>,
    transistors: Vec<&'a Transistor>,
    charges: Vec<ChargeElement>,
    nodes: usize,
    pub(crate) opts: NewtonOptions,
}

/// Row/column of a node in the unknown vector.
#[inline]
fn row(node: usize) -> Option<usize> {
    node.checked_sub(1)
}

impl<'a> Mna<'a> {
    pub fn new(net: &'a Netlist, opts: NewtonOptions) -> Result<Self> {
        net.validate()?;
        let sources = net.sources();
        let mut transistors = Vec::new();
        let mut charges = Vec::new();
        for e in net.elements() {
            match &e.kind {
                ElementKind::Capacitor { a, b, farads } => charges.push(ChargeElement {
                    a: *a,
                    b: *b,
                    kind: ChargeKind::Linear(*farads),
                }),
                ElementKind::Transistor(t) => {
                    charges.push(ChargeElement {
                        a: t.g,
                        b: t.s,
                        kind: ChargeKind::Gate(transistors.len()),
                    });
                    transistors.push(t.as_ref());
                }
                _ => {}
            }
        }
        Ok(Mna {
            net,
            sources,
            transistors,
            charges,
            nodes: net.node_count(),
            opts,
        })
    }

    pub fn dim(&self) -> usize {
        self.nodes - 1 + self.sources.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    /// Voltage of `node` in the unknown vector.
    #[inline]
    pub fn v(&self, x: &DVector<f64>, node: usize) -> f64 {
        row(node).map_or(0.0, |r| x[r])
    }

    /// Branch current of the `k`-th source.
    pub fn source_current(&self, x: &DVector<f64>, k: usize) -> f64 {
        x[self.nodes - 1 + k]
    }

    pub fn source_position(&self, element: usize) -> Option<usize> {
        self.sources.iter().position(|&s| s == element)
    }

    /// Resistive part: resistors, transistor channel currents, sources, the
    /// permanent gmin floor and an optional extra gmin.
    pub fn stamp_static(
        &self,
        x: &DVector<f64>,
        t: f64,
        source_scale: f64,
        gmin: f64,
        f: &mut DVector<f64>,
        jac: &mut DMatrix<f64>,
    ) -> Result<()> {
        let g_node = GMIN_FLOOR + gmin;
        for r in 0..self.nodes - 1 {
            f[r] += g_node * x[r];
            jac[(r, r)] += g_node;
        }
        let mut k = 0;
        for e in self.net.elements() {
            match &e.kind {
                ElementKind::Resistor { a, b, ohms } => {
                    let g = 1.0 / ohms;
                    let i = g * (self.v(x, *a) - self.v(x, *b));
                    stamp_pair(f, jac, *a, *b, i, &[(*a, g), (*b, -g)]);
                }
                ElementKind::Transistor(tr) => {
                    let (vd, vg, vs) = (self.v(x, tr.d), self.v(x, tr.g), self.v(x, tr.s));
                    let ev = evaluate(&tr.params, &tr.consts, BiasPoint::new(vg - vs, vd - vs))?;
                    stamp_pair(
                        f,
                        jac,
                        tr.d,
                        tr.s,
                        ev.id,
                        &[(tr.d, ev.gds), (tr.g, ev.gm), (tr.s, -ev.gm - ev.gds)],
                    );
                }
                ElementKind::VSource { p, n, wave } => {
                    let br = self.nodes - 1 + k;
                    let i = x[br];
                    if let Some(rp) = row(*p) {
                        f[rp] += i;
                        jac[(rp, br)] += 1.0;
                        jac[(br, rp)] += 1.0;
                    }
                    if let Some(rn) = row(*n) {
                        f[rn] -= i;
                        jac[(rn, br)] -= 1.0;
                        jac[(br, rn)] -= 1.0;
                    }
                    f[br] += self.v(x, *p) - self.v(x, *n) - source_scale * wave.value(t);
                    k += 1;
                }
                ElementKind::Capacitor { .. } => {}
            }
        }
        Ok(())
    }

    fn charge_of(&self, c: &ChargeElement, v: f64) -> Result<(f64, f64)> {
        Ok(match c.kind {
            ChargeKind::Linear(cap) => (cap * v, cap),
            ChargeKind::Gate(k) => {
                let tr = self.transistors[k];
                (
                    gate_charge(&tr.params, &tr.consts, v)?,
                    gate_capacitance(&tr.params, &tr.consts, v)?,
                )
            }
        })
    }

    /// Charge state at a solution, with all element currents zero (DC).
    pub fn charge_state(&self, x: &DVector<f64>) -> Result<ChargeState> {
        let mut q = Vec::with_capacity(self.charges.len());
        for c in &self.charges {
            q.push(self.charge_of(c, self.v(x, c.a) - self.v(x, c.b))?.0);
        }
        Ok(ChargeState {
            i: vec![0.0; q.len()],
            q,
        })
    }

    /// Companion-model currents of the charge elements for a step of `h`
    /// from `prev`. Returns the new state at `x`.
    fn stamp_charges(
        &self,
        x: &DVector<f64>,
        h: f64,
        rule: Rule,
        prev: &ChargeState,
        f: &mut DVector<f64>,
        jac: &mut DMatrix<f64>,
    ) -> Result<ChargeState> {
        let mut next = ChargeState {
            q: Vec::with_capacity(self.charges.len()),
            i: Vec::with_capacity(self.charges.len()),
        };
        let k_rule = match rule {
            Rule::BackwardEuler => 1.0 / h,
            Rule::Trapezoidal => 2.0 / h,
        };
        for (k, c) in self.charges.iter().enumerate() {
            let (q, cap) = self.charge_of(c, self.v(x, c.a) - self.v(x, c.b))?;
            let i = match rule {
                Rule::BackwardEuler => (q - prev.q[k]) / h,
                Rule::Trapezoidal => 2.0 * (q - prev.q[k]) / h - prev.i[k],
            };
            let g = k_rule * cap;
            stamp_pair(f, jac, c.a, c.b, i, &[(c.a, g), (c.b, -g)]);
            next.q.push(q);
            next.i.push(i);
        }
        Ok(next)
    }

    /// Net current flowing from ground into the circuit through resistive
    /// elements and sources, and the sum of magnitudes of those currents.
    pub fn ground_inflow(&self, x: &DVector<f64>) -> Result<(f64, f64)> {
        let (mut net, mut gross) = (0.0, 0.0);
        let mut add = |i: f64| {
            net += i;
            gross += i.abs();
        };
        for node in 1..self.nodes {
            add(-GMIN_FLOOR * self.v(x, node));
        }
        let mut k = 0;
        for e in self.net.elements() {
            match &e.kind {
                ElementKind::Resistor { a, b, ohms } => {
                    let i = (self.v(x, *a) - self.v(x, *b)) / ohms;
                    if *b == GROUND && *a != GROUND {
                        add(-i);
                    } else if *a == GROUND && *b != GROUND {
                        add(i);
                    }
                }
                ElementKind::Transistor(tr) => {
                    let (vd, vg, vs) = (self.v(x, tr.d), self.v(x, tr.g), self.v(x, tr.s));
                    let id = crate::model::drain_current(&tr.params, &tr.consts, BiasPoint::new(vg - vs, vd - vs))?;
                    // id flows from d to s inside the device
                    if tr.s == GROUND && tr.d != GROUND {
                        add(-id);
                    } else if tr.d == GROUND && tr.s != GROUND {
                        add(id);
                    }
                }
                ElementKind::VSource { p, n, .. } => {
                    let i = self.source_current(x, k);
                    if *n == GROUND && *p != GROUND {
                        add(-i);
                    } else if *p == GROUND && *n != GROUND {
                        add(i);
                    }
                    k += 1;
                }
                ElementKind::Capacitor { .. } => {}
            }
        }
        Ok((net, gross))
    }

    /// Charge held on the non-ground side of every charge element.
    pub fn node_charge(&self, state: &ChargeState) -> f64 {
        self.charges
            .iter()
            .zip(&state.q)
            .map(|(c, q)| {
                let mut s = 0.0;
                if c.a != GROUND {
                    s += q;
                }
                if c.b != GROUND {
                    s -= q;
                }
                s
            })
            .sum()
    }

    /// Damped Newton from `x0`. `assemble` fills the residual and Jacobian
    /// at a point and may return auxiliary data kept for the final point.
    fn newton<T>(
        &self,
        x0: &DVector<f64>,
        mut assemble: impl FnMut(&DVector<f64>, &mut DVector<f64>, &mut DMatrix<f64>) -> Result<T>,
    ) -> std::result::Result<(DVector<f64>, T), f64> {
        let n = self.dim();
        let nv = self.nodes - 1;
        let mut x = x0.clone();
        let mut f = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, n);
        let mut last_dv = f64::INFINITY;
        let mut residual = f64::INFINITY;
        for _ in 0..=self.opts.max_iterations {
            f.fill(0.0);
            jac.fill(0.0);
            let aux = match assemble(&x, &mut f, &mut jac) {
                Ok(a) => a,
                Err(_) => return Err(residual),
            };
            residual = f.amax();
            if !residual.is_finite() {
                return Err(residual);
            }
            if residual < self.opts.itol && last_dv < self.opts.vtol {
                return Ok((x, aux));
            }
            let Some(dx) = jac.clone().lu().solve(&(-&f)) else {
                return Err(residual);
            };
            let mut max_dv: f64 = 0.0;
            for r in 0..n {
                let mut d = dx[r];
                if r < nv {
                    d = d.clamp(-MAX_DV, MAX_DV);
                    max_dv = max_dv.max(d.abs());
                }
                x[r] += d;
            }
            if nv == 0 {
                max_dv = 0.0;
            }
            last_dv = max_dv;
        }
        Err(residual)
    }

    /// Operating point at time `t` with sources scaled by `scale`.
    pub fn solve_static(
        &self,
        x0: &DVector<f64>,
        t: f64,
        scale: f64,
        gmin: f64,
    ) -> std::result::Result<DVector<f64>, f64> {
        self.newton(x0, |x, f, j| self.stamp_static(x, t, scale, gmin, f, j))
            .map(|(x, _)| x)
    }

    /// DC solution at `t` with gmin- and source-stepping fallbacks.
    pub fn dc(&self, t: f64) -> Result<DVector<f64>> {
        let zero = DVector::zeros(self.dim());
        if let Ok(x) = self.solve_static(&zero, t, 1.0, 0.0) {
            return Ok(x);
        }
        log::debug!("plain Newton failed, trying gmin stepping");
        let mut x = zero.clone();
        let mut ok = true;
        for k in 3..=12 {
            match self.solve_static(&x, t, 1.0, 10f64.powi(-k)) {
                Ok(next) => x = next,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            if let Ok(x) = self.solve_static(&x, t, 1.0, 0.0) {
                return Ok(x);
            }
        }
        log::debug!("gmin stepping failed, trying source stepping");
        let mut x = zero;
        for k in 1..=10 {
            x = self
                .solve_static(&x, t, k as f64 / 10.0, 0.0)
                .map_err(|residual| Error::Convergence {
                    analysis: "dc operating point".into(),
                    residual,
                })?;
        }
        Ok(x)
    }

    /// One time step of `h` ending at `t`.
    pub fn step(
        &self,
        x_prev: &DVector<f64>,
        prev: &ChargeState,
        t: f64,
        h: f64,
        rule: Rule,
    ) -> std::result::Result<(DVector<f64>, ChargeState), f64> {
        self.newton(x_prev, |x, f, j| {
            self.stamp_static(x, t, 1.0, 0.0, f, j)?;
            self.stamp_charges(x, h, rule, prev, f, j)
        })
    }
}

/// Stamp a current `i` leaving node `a` and entering node `b`, with
/// derivatives `di/dv_node` given in `grads`.
#[inline]
fn stamp_pair(f: &mut DVector<f64>, jac: &mut DMatrix<f64>, a: usize, b: usize, i: f64, grads: &[(usize, f64)]) {
    if let Some(ra) = row(a) {
        f[ra] += i;
        for &(node, g) in grads {
            if let Some(c) = row(node) {
                jac[(ra, c)] += g;
            }
        }
    }
    if let Some(rb) = row(b) {
        f[rb] -= i;
        for &(node, g) in grads {
            if let Some(c) = row(node) {
                jac[(rb, c)] -= g;
            }
        }
    }
}
