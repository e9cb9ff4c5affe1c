use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Carrier type of a transistor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    N,
    P,
}

impl Polarity {
    pub const ALL: [Polarity; 2] = [Polarity::N, Polarity::P];

    /// +1 for n-type, -1 for p-type. Terminal voltages and currents of a
    /// p-type device are the n-type core mirrored through this sign.
    pub fn sign(self) -> f64 {
        match self {
            Polarity::N => 1.0,
            Polarity::P => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::N => "n",
            Polarity::P => "p",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "n" | "nmos" => Ok(Polarity::N),
            "p" | "pmos" => Ok(Polarity::P),
            other => Err(Error::UnknownName {
                what: "polarity",
                name: other.to_string(),
            }),
        }
    }
}

/// Transistor construction: the planar 2D device or an MIV-transistor with
/// one, two or four channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Traditional,
    Ch1,
    Ch2,
    Ch4,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Traditional, Variant::Ch1, Variant::Ch2, Variant::Ch4];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Traditional => "traditional",
            Variant::Ch1 => "ch1",
            Variant::Ch2 => "ch2",
            Variant::Ch4 => "ch4",
        }
    }

    pub fn is_miv(self) -> bool {
        !matches!(self, Variant::Traditional)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "traditional" | "2d" => Ok(Variant::Traditional),
            "ch1" | "1-ch" => Ok(Variant::Ch1),
            "ch2" | "2-ch" => Ok(Variant::Ch2),
            "ch4" | "4-ch" => Ok(Variant::Ch4),
            other => Err(Error::UnknownName {
                what: "variant",
                name: other.to_string(),
            }),
        }
    }
}
