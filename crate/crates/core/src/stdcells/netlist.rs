use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cells::{CellSpec, Network};
use crate::circuit::{Netlist, Waveform};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::model::{read_model_file, ModelCard};
use crate::types::{Polarity, Variant};

/// Lumped parasitics inserted around the transistors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParasiticPolicy {
    /// Series resistance of one inter-layer via.
    pub r_miv: f64,
    /// Series resistance of one same-layer internal net.
    pub r_interconnect: f64,
    pub r_vdd: f64,
    pub r_gnd: f64,
    /// Output load to ground.
    pub c_load: f64,
}

impl Default for ParasiticPolicy {
    fn default() -> Self {
        ParasiticPolicy {
            r_miv: 7.0,
            r_interconnect: 3.0,
            r_vdd: 5.0,
            r_gnd: 5.0,
            c_load: 1e-15,
        }
    }
}

impl ParasiticPolicy {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r_miv", self.r_miv),
            ("r_interconnect", self.r_interconnect),
            ("r_vdd", self.r_vdd),
            ("r_gnd", self.r_gnd),
            ("c_load", self.c_load),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Precondition(format!("parasitic {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Model cards keyed by (variant, polarity).
#[derive(Debug, Clone, Default)]
pub struct ModelSet {
    cards: BTreeMap<(Variant, Polarity), ModelCard>,
}

impl ModelSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The eight reference fixtures.
    pub fn fixtures() -> Self {
        let mut set = ModelSet::new();
        for (v, p) in fixtures::combinations() {
            set.insert(v, fixtures::card(v, p));
        }
        set
    }

    /// Every `<variant>_<polarity>.model` present in `dir`.
    pub fn read_dir(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "model directory not found"),
            ));
        }
        let mut set = ModelSet::new();
        for (v, p) in fixtures::combinations() {
            let path = dir.join(format!("{}.model", fixtures::device_stem(v, p)));
            if path.is_file() {
                let card = read_model_file(&path)?;
                if card.params.polarity != p {
                    return Err(Error::Precondition(format!(
                        "{} holds a {}-type model",
                        path.display(),
                        card.params.polarity
                    )));
                }
                set.insert(v, card);
            }
        }
        Ok(set)
    }

    pub fn insert(&mut self, variant: Variant, card: ModelCard) {
        self.cards.insert((variant, card.params.polarity), card);
    }

    pub fn get(&self, variant: Variant, polarity: Polarity) -> Result<&ModelCard> {
        self.cards.get(&(variant, polarity)).ok_or_else(|| {
            Error::Precondition(format!(
                "missing parameter set for {}",
                fixtures::device_stem(variant, polarity)
            ))
        })
    }

    /// Devices of one cell built in `variant`: the variant's n-type model on
    /// the top layer, the traditional p-type model on the bottom layer.
    pub fn cell_devices(&self, variant: Variant) -> Result<(&ModelCard, &ModelCard)> {
        Ok((self.get(variant, Polarity::N)?, self.get(Variant::Traditional, Polarity::P)?))
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }
}

/// Node names used by [`build_cell_netlist`].
pub mod nodes {
    /// Cell-side supply rail, behind the VDD lead resistance.
    pub const VDD: &str = "vdd";
    /// Supply source terminal.
    pub const VDD_SOURCE: &str = "vdd_src";
    /// Cell-side ground rail, behind the ground lead resistance.
    pub const VSS: &str = "vss";

    /// Bottom-layer end of a net that crosses layers.
    pub fn bottom(net: &str) -> String {
        format!("{net}_b")
    }

    /// Top-layer drain node of an internal net, before its interconnect.
    pub fn driver(net: &str) -> String {
        format!("{net}_d")
    }
}

/// Name of the voltage source driving input `pin`.
pub fn input_source(pin: &str) -> String {
    format!("V{pin}")
}

struct Builder<'a> {
    net: Netlist,
    n: &'a ModelCard,
    p: &'a ModelCard,
    counter: usize,
}

impl Builder<'_> {
    fn fresh(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("{prefix}{}", self.counter)
    }

    /// Devices of `network` between `hi` (output side) and `lo` (rail side).
    fn place(&mut self, network: &Network, pol: Polarity, hi: &str, lo: &str, gate_node: &dyn Fn(&str) -> String) -> Result<()> {
        match network {
            Network::Gate(g) => {
                let card = match pol {
                    Polarity::N => self.n,
                    Polarity::P => self.p,
                };
                let name = self.fresh(if pol == Polarity::N { "MN" } else { "MP" });
                self.net
                    .add_transistor(&name, hi, &gate_node(g), lo, card.params.clone(), card.consts.clone())
            }
            Network::Parallel(v) => v.iter().try_for_each(|b| self.place(b, pol, hi, lo, gate_node)),
            Network::Series(v) => {
                let mut top = hi.to_string();
                for (i, b) in v.iter().enumerate() {
                    let bottom = if i + 1 == v.len() {
                        lo.to_string()
                    } else {
                        self.fresh(if pol == Polarity::N { "sn" } else { "sp" })
                    };
                    self.place(b, pol, &top, &bottom, gate_node)?;
                    top = bottom;
                }
                Ok(())
            }
        }
    }
}

/// Transistor-level netlist of `cell` with parasitics and one voltage source
/// per input pin (`drive` in `cell.inputs` order) plus the `VDD` supply.
///
/// n-type devices sit on the top layer, p-type devices on the bottom layer,
/// and all pins are top-layer nets. Every net with devices on both layers
/// gets one `r_miv` resistor between its top node and its bottom node
/// ([`nodes::bottom`]); every internal stage output gets one
/// `r_interconnect` resistor between the top-layer driving drains
/// ([`nodes::driver`]) and the rest of the net. Series-stack nodes are
/// shared diffusion and carry no resistor.
pub fn build_cell_netlist(
    cell: &CellSpec,
    n: &ModelCard,
    p: &ModelCard,
    policy: &ParasiticPolicy,
    drive: &[Waveform],
    vdd: f64,
) -> Result<Netlist> {
    policy.validate()?;
    if n.params.polarity != Polarity::N || p.params.polarity != Polarity::P {
        return Err(Error::Precondition("cell needs an n-type and a p-type model".into()));
    }
    if drive.len() != cell.inputs.len() {
        return Err(Error::Precondition(format!(
            "{} has {} inputs, got {} drive waveforms",
            cell.name,
            cell.inputs.len(),
            drive.len()
        )));
    }
    let mut b = Builder {
        net: Netlist::new(),
        n,
        p,
        counter: 0,
    };
    b.net.add_vsource("VDD", nodes::VDD_SOURCE, "0", Waveform::Dc(vdd))?;
    b.net.add_resistor("RVDD", nodes::VDD_SOURCE, nodes::VDD, policy.r_vdd)?;
    b.net.add_resistor("RGND", nodes::VSS, "0", policy.r_gnd)?;
    for (pin, w) in cell.inputs.iter().zip(drive) {
        b.net.add_vsource(&input_source(pin), pin, "0", w.clone())?;
    }

    for stage in &cell.stages {
        let internal = stage.output != cell.output;
        let top_drain = if internal {
            nodes::driver(&stage.output)
        } else {
            stage.output.clone()
        };
        b.place(&stage.pull_down, Polarity::N, &top_drain, nodes::VSS, &|g| g.to_string())?;
        b.place(&stage.pull_up(), Polarity::P, &nodes::bottom(&stage.output), nodes::VDD, &|g| {
            nodes::bottom(g)
        })?;
        if internal {
            b.net.add_resistor(
                &format!("RINT_{}", stage.output),
                &top_drain,
                &stage.output,
                policy.r_interconnect,
            )?;
        }
    }

    for net in crossing_nets(cell) {
        b.net
            .add_resistor(&format!("RMIV_{net}"), &net, &nodes::bottom(&net), policy.r_miv)?;
    }
    b.net.add_capacitor("CLOAD", &cell.output, "0", policy.c_load)?;
    b.net.set_supply("VDD")?;
    b.net.validate()?;
    Ok(b.net)
}

/// Signals that touch devices on both layers: every gate signal of the
/// pull-up networks and every stage output (driven from both layers).
fn crossing_nets(cell: &CellSpec) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for stage in &cell.stages {
        out.insert(stage.output.clone());
        for g in stage.pull_up().gates() {
            out.insert(g.to_string());
        }
    }
    out
}

/// Number of inter-layer vias in the cell netlist.
pub fn miv_count(cell: &CellSpec) -> usize {
    crossing_nets(cell).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ElementKind;

    fn inv() -> Netlist {
        let cell = CellSpec::by_name("INV1X1").unwrap();
        let m = ModelSet::fixtures();
        let (n, p) = m.cell_devices(Variant::Ch2).unwrap();
        build_cell_netlist(&cell, n, p, &ParasiticPolicy::default(), &[Waveform::Dc(0.0)], 1.0).unwrap()
    }

    #[test]
    fn inverter_structure() {
        let net = inv();
        let count = |f: &dyn Fn(&ElementKind) -> bool| net.elements().iter().filter(|e| f(&e.kind)).count();
        assert_eq!(count(&|k| matches!(k, ElementKind::Transistor(_))), 2);
        assert_eq!(count(&|k| matches!(k, ElementKind::Resistor { ohms, .. } if *ohms == 7.0)), 2);
        let y = net.node_index("Y").unwrap();
        let on_output = net
            .elements()
            .iter()
            .filter(|e| matches!(e.kind, ElementKind::Resistor { a, b, ohms } if ohms == 7.0 && (a == y || b == y)))
            .count();
        assert_eq!(on_output, 1);
        assert_eq!(count(&|k| matches!(k, ElementKind::Resistor { ohms, .. } if *ohms == 3.0)), 0);
    }

    #[test]
    fn missing_models() {
        let mut m = ModelSet::new();
        m.insert(Variant::Ch1, fixtures::card(Variant::Ch1, Polarity::N));
        assert!(matches!(m.cell_devices(Variant::Ch1), Err(Error::Precondition(_))));
        m.insert(Variant::Traditional, fixtures::card(Variant::Traditional, Polarity::P));
        assert!(m.cell_devices(Variant::Ch1).is_ok());
    }

    #[test]
    fn rejects_bad_policy_and_drive() {
        let cell = CellSpec::by_name("NAND2X1").unwrap();
        let m = ModelSet::fixtures();
        let (n, p) = m.cell_devices(Variant::Traditional).unwrap();
        let two = vec![Waveform::Dc(0.0); 2];
        let bad = ParasiticPolicy {
            r_miv: 0.0,
            ..Default::default()
        };
        assert!(build_cell_netlist(&cell, n, p, &bad, &two, 1.0).is_err());
        assert!(build_cell_netlist(&cell, n, p, &ParasiticPolicy::default(), &[Waveform::Dc(0.0)], 1.0).is_err());
        assert!(build_cell_netlist(&cell, p, n, &ParasiticPolicy::default(), &two, 1.0).is_err());
    }
}
