use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Series/parallel switch network. Leaves name the signal on the gate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Network {
    Gate(String),
    Series(Vec<Network>),
    Parallel(Vec<Network>),
}

impl Network {
    fn gate(name: &str) -> Self {
        Network::Gate(name.to_string())
    }

    fn series(names: &[&str]) -> Self {
        Network::Series(names.iter().map(|n| Network::gate(n)).collect())
    }

    fn parallel(names: &[&str]) -> Self {
        Network::Parallel(names.iter().map(|n| Network::gate(n)).collect())
    }

    /// Series and parallel swapped: the complementary pull-up of a pull-down.
    pub fn dual(&self) -> Network {
        match self {
            Network::Gate(g) => Network::Gate(g.clone()),
            Network::Series(v) => Network::Parallel(v.iter().map(Network::dual).collect()),
            Network::Parallel(v) => Network::Series(v.iter().map(Network::dual).collect()),
        }
    }

    pub fn device_count(&self) -> usize {
        match self {
            Network::Gate(_) => 1,
            Network::Series(v) | Network::Parallel(v) => v.iter().map(Network::device_count).sum(),
        }
    }

    /// Whether the network conducts when a gate signal is `on(name)`.
    pub fn conducts(&self, on: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Network::Gate(g) => on(g),
            Network::Series(v) => v.iter().all(|n| n.conducts(on)),
            Network::Parallel(v) => v.iter().any(|n| n.conducts(on)),
        }
    }

    pub fn gates(&self) -> Vec<&str> {
        match self {
            Network::Gate(g) => vec![g.as_str()],
            Network::Series(v) | Network::Parallel(v) => v.iter().flat_map(Network::gates).collect(),
        }
    }
}

/// One static CMOS stage: `output = NOT(pull_down)`, with the pull-up the
/// dual of `pull_down`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub output: String,
    pub pull_down: Network,
}

impl Stage {
    fn new(output: &str, pull_down: Network) -> Self {
        Stage {
            output: output.to_string(),
            pull_down,
        }
    }

    fn inv(output: &str, input: &str) -> Self {
        Stage::new(output, Network::gate(input))
    }

    pub fn pull_up(&self) -> Network {
        self.pull_down.dual()
    }
}

#[derive(Clone, Serialize)]
pub struct CellSpec {
    pub name: &'static str,
    pub inputs: Vec<String>,
    pub output: String,
    /// Stages in evaluation order; internal stage outputs feed later stages.
    pub stages: Vec<Stage>,
    #[serde(skip)]
    logic: fn(&[bool]) -> bool,
}

impl fmt::Debug for CellSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CellSpec")
            .field("name", &self.name)
            .field("inputs", &self.inputs)
            .field("output", &self.output)
            .field("stages", &self.stages)
            .finish()
    }
}

impl PartialEq for CellSpec {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

/// Names of the library cells in report order.
pub const CELL_NAMES: [&str; 14] = [
    "AND2X1", "AND3X1", "AOI2X1", "INV1X1", "MUX2X1", "NAND2X1", "NAND3X1", "NOR2X1", "NOR3X1", "OAI2X1", "OR2X1",
    "OR3X1", "XNOR2X1", "XOR2X1",
];

impl CellSpec {
    fn new(name: &'static str, inputs: &[&str], stages: Vec<Stage>, logic: fn(&[bool]) -> bool) -> Self {
        let output = stages.last().expect("at least one stage").output.clone();
        CellSpec {
            name,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            output,
            stages,
            logic,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        let upper = name.trim().to_ascii_uppercase();
        let cell = match upper.as_str() {
            "INV1X1" => CellSpec::new("INV1X1", &["A"], vec![Stage::inv("Y", "A")], |x| !x[0]),
            "NAND2X1" => CellSpec::new(
                "NAND2X1",
                &["A", "B"],
                vec![Stage::new("Y", Network::series(&["A", "B"]))],
                |x| !(x[0] && x[1]),
            ),
            "NAND3X1" => CellSpec::new(
                "NAND3X1",
                &["A", "B", "C"],
                vec![Stage::new("Y", Network::series(&["A", "B", "C"]))],
                |x| !(x[0] && x[1] && x[2]),
            ),
            "NOR2X1" => CellSpec::new(
                "NOR2X1",
                &["A", "B"],
                vec![Stage::new("Y", Network::parallel(&["A", "B"]))],
                |x| !(x[0] || x[1]),
            ),
            "NOR3X1" => CellSpec::new(
                "NOR3X1",
                &["A", "B", "C"],
                vec![Stage::new("Y", Network::parallel(&["A", "B", "C"]))],
                |x| !(x[0] || x[1] || x[2]),
            ),
            "AND2X1" => CellSpec::new(
                "AND2X1",
                &["A", "B"],
                vec![Stage::new("n1", Network::series(&["A", "B"])), Stage::inv("Y", "n1")],
                |x| x[0] && x[1],
            ),
            "AND3X1" => CellSpec::new(
                "AND3X1",
                &["A", "B", "C"],
                vec![Stage::new("n1", Network::series(&["A", "B", "C"])), Stage::inv("Y", "n1")],
                |x| x[0] && x[1] && x[2],
            ),
            "OR2X1" => CellSpec::new(
                "OR2X1",
                &["A", "B"],
                vec![Stage::new("n1", Network::parallel(&["A", "B"])), Stage::inv("Y", "n1")],
                |x| x[0] || x[1],
            ),
            "OR3X1" => CellSpec::new(
                "OR3X1",
                &["A", "B", "C"],
                vec![Stage::new("n1", Network::parallel(&["A", "B", "C"])), Stage::inv("Y", "n1")],
                |x| x[0] || x[1] || x[2],
            ),
            // Y = !(A*B + C)
            "AOI2X1" => CellSpec::new(
                "AOI2X1",
                &["A", "B", "C"],
                vec![Stage::new(
                    "Y",
                    Network::Parallel(vec![Network::series(&["A", "B"]), Network::gate("C")]),
                )],
                |x| !((x[0] && x[1]) || x[2]),
            ),
            // Y = !((A + B)*C)
            "OAI2X1" => CellSpec::new(
                "OAI2X1",
                &["A", "B", "C"],
                vec![Stage::new(
                    "Y",
                    Network::Series(vec![Network::parallel(&["A", "B"]), Network::gate("C")]),
                )],
                |x| !((x[0] || x[1]) && x[2]),
            ),
            // Y = !(A*B + An*Bn)
            "XOR2X1" => CellSpec::new(
                "XOR2X1",
                &["A", "B"],
                vec![
                    Stage::inv("An", "A"),
                    Stage::inv("Bn", "B"),
                    Stage::new(
                        "Y",
                        Network::Parallel(vec![Network::series(&["A", "B"]), Network::series(&["An", "Bn"])]),
                    ),
                ],
                |x| x[0] ^ x[1],
            ),
            // Y = !(A*Bn + An*B)
            "XNOR2X1" => CellSpec::new(
                "XNOR2X1",
                &["A", "B"],
                vec![
                    Stage::inv("An", "A"),
                    Stage::inv("Bn", "B"),
                    Stage::new(
                        "Y",
                        Network::Parallel(vec![Network::series(&["A", "Bn"]), Network::series(&["An", "B"])]),
                    ),
                ],
                |x| !(x[0] ^ x[1]),
            ),
            // Y = !(S*An + Sn*Bn): A when S = 1, B when S = 0
            "MUX2X1" => CellSpec::new(
                "MUX2X1",
                &["A", "B", "S"],
                vec![
                    Stage::inv("An", "A"),
                    Stage::inv("Bn", "B"),
                    Stage::inv("Sn", "S"),
                    Stage::new(
                        "Y",
                        Network::Parallel(vec![Network::series(&["S", "An"]), Network::series(&["Sn", "Bn"])]),
                    ),
                ],
                |x| if x[2] { x[0] } else { x[1] },
            ),
            _ => {
                return Err(Error::UnknownName {
                    what: "cell",
                    name: name.trim().to_string(),
                })
            }
        };
        Ok(cell)
    }

    pub fn library() -> Vec<CellSpec> {
        CELL_NAMES
            .iter()
            .map(|n| CellSpec::by_name(n).expect("library cell"))
            .collect()
    }

    /// Expected output for one input assignment (in `inputs` order).
    pub fn evaluate(&self, inputs: &[bool]) -> bool {
        (self.logic)(inputs)
    }

    /// Output computed from the switch networks stage by stage; used to
    /// check the topology against [`CellSpec::evaluate`].
    pub fn evaluate_topology(&self, inputs: &[bool]) -> bool {
        let mut values: Vec<(String, bool)> = self.inputs.iter().cloned().zip(inputs.iter().copied()).collect();
        for stage in &self.stages {
            let lookup = |n: &str| values.iter().find(|(k, _)| k == n).map(|(_, v)| *v).expect("defined signal");
            let down = stage.pull_down.conducts(&lookup);
            let up = stage.pull_up().conducts(&|n: &str| !lookup(n));
            debug_assert_ne!(down, up, "static CMOS stage must drive exactly one rail");
            values.push((stage.output.clone(), up));
        }
        values.last().expect("stages").1
    }

    pub fn n_devices(&self) -> usize {
        self.stages.iter().map(|s| s.pull_down.device_count()).sum()
    }

    pub fn p_devices(&self) -> usize {
        self.stages.iter().map(|s| s.pull_up().device_count()).sum()
    }

    /// Internal nets: stage outputs other than the cell output.
    pub fn internal_signals(&self) -> impl Iterator<Item = &str> {
        self.stages
            .iter()
            .map(|s| s.output.as_str())
            .filter(move |o| *o != self.output)
    }

    /// All `2^k` input assignments in binary counting order, first input
    /// as the most significant bit.
    pub fn input_corners(&self) -> Vec<Vec<bool>> {
        let k = self.inputs.len();
        (0..1usize << k)
            .map(|m| (0..k).map(|i| m >> (k - 1 - i) & 1 == 1).collect())
            .collect()
    }
}
