use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelConstants, ModelParams};

/// Index of the ground node.
pub const GROUND: usize = 0;

/// Independent source value over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Waveform {
    Dc(f64),
    /// `(time, value)` corners, strictly increasing in time. Held constant
    /// before the first and after the last corner.
    Pwl(Vec<(f64, f64)>),
}

impl Waveform {
    pub fn pwl(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("PWL source needs at least one point".into()));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Precondition("PWL source has non-finite points".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Precondition("PWL times must be strictly increasing".into()));
        }
        Ok(Waveform::Pwl(points))
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Waveform::Dc(v) => *v,
            Waveform::Pwl(pts) => {
                let (first, last) = (pts[0], pts[pts.len() - 1]);
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let k = pts.partition_point(|p| p.0 <= t);
                let (t0, v0) = pts[k - 1];
                let (t1, v1) = pts[k];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transistor {
    pub d: usize,
    pub g: usize,
    pub s: usize,
    pub params: ModelParams,
    pub consts: ModelConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ElementKind {
    Resistor { a: usize, b: usize, ohms: f64 },
    Capacitor { a: usize, b: usize, farads: f64 },
    Transistor(Box<Transistor>),
    /// Branch current flows from `p` through the source into `n`.
    VSource { p: usize, n: usize, wave: Waveform },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub name: String,
    pub kind: ElementKind,
}

impl Element {
    pub fn terminals(&self) -> Vec<usize> {
        match &self.kind {
            ElementKind::Resistor { a, b, .. } | ElementKind::Capacitor { a, b, .. } => vec![*a, *b],
            ElementKind::Transistor(t) => vec![t.d, t.g, t.s],
            ElementKind::VSource { p, n, .. } => vec![*p, *n],
        }
    }
}

/// Circuit graph. Node 0 is ground; `0`, `gnd` and `GND` all name it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    nodes: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    elements: Vec<Element>,
    supply: Option<String>,
}

impl Default for Netlist {
    fn default() -> Self {
        Self::new()
    }
}

fn is_ground(name: &str) -> bool {
    matches!(name, "0" | "gnd" | "GND")
}

impl Netlist {
    pub fn new() -> Self {
        let mut index = HashMap::new();
        index.insert("0".to_string(), GROUND);
        Netlist {
            nodes: vec!["0".to_string()],
            index,
            elements: Vec::new(),
            supply: None,
        }
    }

    /// Index of `name`, creating the node on first use.
    pub fn node(&mut self, name: &str) -> usize {
        if is_ground(name) {
            return GROUND;
        }
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        if is_ground(name) {
            Some(GROUND)
        } else {
            self.index.get(name).copied()
        }
    }

    pub fn node_name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    /// All node names, ground first.
    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    fn push(&mut self, name: &str, kind: ElementKind) -> Result<()> {
        if self.elements.iter().any(|e| e.name == name) {
            return Err(Error::Precondition(format!("duplicate element name `{name}`")));
        }
        self.elements.push(Element {
            name: name.to_string(),
            kind,
        });
        Ok(())
    }

    pub fn add_resistor(&mut self, name: &str, a: &str, b: &str, ohms: f64) -> Result<()> {
        if !(ohms.is_finite() && ohms > 0.0) {
            return Err(Error::Precondition(format!("resistor {name}: value {ohms} must be > 0")));
        }
        let (a, b) = (self.node(a), self.node(b));
        self.push(name, ElementKind::Resistor { a, b, ohms })
    }

    pub fn add_capacitor(&mut self, name: &str, a: &str, b: &str, farads: f64) -> Result<()> {
        if !(farads.is_finite() && farads > 0.0) {
            return Err(Error::Precondition(format!("capacitor {name}: value {farads} must be > 0")));
        }
        let (a, b) = (self.node(a), self.node(b));
        self.push(name, ElementKind::Capacitor { a, b, farads })
    }

    pub fn add_transistor(
        &mut self,
        name: &str,
        d: &str,
        g: &str,
        s: &str,
        params: ModelParams,
        consts: ModelConstants,
    ) -> Result<()> {
        params.validate()?;
        consts.validate()?;
        let (d, g, s) = (self.node(d), self.node(g), self.node(s));
        self.push(
            name,
            ElementKind::Transistor(Box::new(Transistor {
                d,
                g,
                s,
                params,
                consts,
            })),
        )
    }

    pub fn add_vsource(&mut self, name: &str, p: &str, n: &str, wave: Waveform) -> Result<()> {
        if let Waveform::Dc(v) = wave {
            if !v.is_finite() {
                return Err(Error::Domain { what: "source value", value: v });
            }
        }
        let (p, n) = (self.node(p), self.node(n));
        self.push(name, ElementKind::VSource { p, n, wave })
    }

    /// Names the voltage source whose current is reported as the supply
    /// current. Defaults to a source called `VDD` (any case), else the first
    /// source.
    pub fn set_supply(&mut self, name: &str) -> Result<()> {
        match self.element(name) {
            Some(Element {
                kind: ElementKind::VSource { .. },
                ..
            }) => {
                self.supply = Some(name.to_string());
                Ok(())
            }
            _ => Err(Error::UnknownName {
                what: "voltage source",
                name: name.to_string(),
            }),
        }
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name == name)
    }

    /// Positions of the voltage sources in element order; their branch
    /// currents follow the node voltages in the MNA unknown vector.
    pub(crate) fn sources(&self) -> Vec<usize> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, e)| matches!(e.kind, ElementKind::VSource { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    /// Element index of the supply source.
    pub(crate) fn supply_index(&self) -> Option<usize> {
        let srcs = self.sources();
        if let Some(name) = &self.supply {
            return srcs.into_iter().find(|&i| &self.elements[i].name == name);
        }
        srcs.iter()
            .copied()
            .find(|&i| self.elements[i].name.eq_ignore_ascii_case("VDD"))
            .or(srcs.first().copied())
    }

    /// At least one source, and every node connected to ground through the
    /// element graph.
    pub fn validate(&self) -> Result<()> {
        if self.sources().is_empty() {
            return Err(Error::Precondition("netlist has no voltage source".into()));
        }
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for e in &self.elements {
            let t = e.terminals();
            for &a in &t {
                for &b in &t {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![GROUND];
        seen[GROUND] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Precondition(format!(
                "node `{}` is not connected to ground",
                self.nodes[i]
            )));
        }
        Ok(())
    }

    /// Rebuild the name index after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.nodes.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
    }
}
