//! Device characteristic curves (IDVG, IDVD, CV) and the data that
//! extraction fits against.

mod io;
mod metric;
mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{drain_current, gate_capacitance, BiasPoint, ModelConstants, ModelParams};
use crate::types::{Polarity, Variant};

pub use io::{format_curves, parse_curves, read_curves, write_curves, CURVES_HEADER};
pub use metric::{region_error, SUBTHRESHOLD_CURRENT};
pub use synth::{canonical_sweep, generate_synthetic, SWEEP_STEP};

/// Drain bias of the low-drain transfer curve (magnitude, V).
pub const VDS_LOW: f64 = 0.05;
/// Drain bias of the high-drain transfer curve (magnitude, V).
pub const VDS_HIGH: f64 = 1.0;
/// Gate biases of the output-curve family (magnitude, V).
pub const IDVD_VGS: [f64; 4] = [0.4, 0.6, 0.8, 1.0];
/// Minimum number of samples per curve.
pub const MIN_SAMPLES: usize = 10;

const BIAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CurveKind {
    #[serde(rename = "IDVG_LOW")]
    IdvgLow,
    #[serde(rename = "IDVG_HIGH")]
    IdvgHigh,
    #[serde(rename = "IDVD")]
    Idvd,
    #[serde(rename = "CV")]
    Cv,
}

impl CurveKind {
    pub const ALL: [CurveKind; 4] = [CurveKind::IdvgLow, CurveKind::IdvgHigh, CurveKind::Idvd, CurveKind::Cv];

    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::IdvgLow => "IDVG_LOW",
            CurveKind::IdvgHigh => "IDVG_HIGH",
            CurveKind::Idvd => "IDVD",
            CurveKind::Cv => "CV",
        }
    }

    pub fn is_transfer(self) -> bool {
        matches!(self, CurveKind::IdvgLow | CurveKind::IdvgHigh)
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        CurveKind::ALL
            .into_iter()
            .find(|k| k.as_str() == up)
            .ok_or(Error::UnknownName {
                what: "curve kind",
                name: s.trim().to_string(),
            })
    }
}

/// One sampled characteristic.
///
/// `fixed_bias` is the drain voltage for transfer curves, the gate voltage
/// for output curves and 0 for C-V. Voltages are physical terminal
/// voltages, so p-type curves carry negative biases and currents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceCurve {
    pub kind: CurveKind,
    pub polarity: Polarity,
    pub fixed_bias: f64,
    pub sweep: Vec<f64>,
    pub values: Vec<f64>,
}

impl DeviceCurve {
    pub fn new(kind: CurveKind, polarity: Polarity, fixed_bias: f64, sweep: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let c = DeviceCurve {
            kind,
            polarity,
            fixed_bias,
            sweep,
            values,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.sweep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sweep.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sweep.iter().copied().zip(self.values.iter().copied())
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.len() != self.values.len() {
            return Err(Error::Precondition(format!(
                "{} curve has {} sweep points but {} values",
                self.kind,
                self.sweep.len(),
                self.values.len()
            )));
        }
        if self.sweep.len() < MIN_SAMPLES {
            return Err(Error::Precondition(format!(
                "{} curve has {} samples, need at least {MIN_SAMPLES}",
                self.kind,
                self.sweep.len()
            )));
        }
        if let Some(i) = self.sweep.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition(format!(
                "{} sweep not strictly increasing at sample {}",
                self.kind,
                i + 1
            )));
        }
        if self.sweep.iter().chain(&self.values).any(|v| !v.is_finite()) || !self.fixed_bias.is_finite() {
            return Err(Error::Precondition(format!("{} curve contains non-finite data", self.kind)));
        }
        check_bias(self.kind, self.polarity, self.fixed_bias)
    }

    /// Same grid and bias, values taken from the compact model.
    pub fn model_curve(&self, params: &ModelParams, consts: &ModelConstants) -> Result<DeviceCurve> {
        let values = self
            .sweep
            .iter()
            .map(|&x| eval_point(self.kind, self.fixed_bias, x, params, consts))
            .collect::<Result<Vec<_>>>()?;
        Ok(DeviceCurve {
            values,
            ..self.clone()
        })
    }
}

pub(crate) fn eval_point(
    kind: CurveKind,
    fixed_bias: f64,
    x: f64,
    params: &ModelParams,
    consts: &ModelConstants,
) -> Result<f64> {
    match kind {
        CurveKind::IdvgLow | CurveKind::IdvgHigh => drain_current(params, consts, BiasPoint::new(x, fixed_bias)),
        CurveKind::Idvd => drain_current(params, consts, BiasPoint::new(fixed_bias, x)),
        CurveKind::Cv => gate_capacitance(params, consts, x),
    }
}

fn check_bias(kind: CurveKind, polarity: Polarity, bias: f64) -> Result<()> {
    let s = polarity.sign();
    let ok = match kind {
        CurveKind::IdvgLow => (bias - s * VDS_LOW).abs() < BIAS_TOL,
        CurveKind::IdvgHigh => (bias - s * VDS_HIGH).abs() < BIAS_TOL,
        CurveKind::Idvd => IDVD_VGS.iter().any(|v| (bias - s * v).abs() < BIAS_TOL),
        CurveKind::Cv => bias.abs() < BIAS_TOL,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "fixed bias {bias} V is not valid for a {polarity}-type {kind} curve"
        )))
    }
}

/// The complete characterization of one device: one IDVG_LOW, one
/// IDVG_HIGH, four IDVD (one per gate bias) and one CV curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationSet {
    pub variant: Variant,
    pub polarity: Polarity,
    curves: Vec<DeviceCurve>,
}

impl CharacterizationSet {
    /// Validates completeness and puts the curves into canonical order.
    pub fn new(variant: Variant, polarity: Polarity, mut curves: Vec<DeviceCurve>) -> Result<Self> {
        for c in &curves {
            c.validate()?;
            if c.polarity != polarity {
                return Err(Error::Precondition(format!(
                    "{} curve is {}-type in a {polarity}-type set",
                    c.kind, c.polarity
                )));
            }
        }
        for kind in [CurveKind::IdvgLow, CurveKind::IdvgHigh, CurveKind::Cv] {
            let n = curves.iter().filter(|c| c.kind == kind).count();
            if n != 1 {
                return Err(Error::Precondition(format!("expected exactly one {kind} curve, found {n}")));
            }
        }
        for vgs in IDVD_VGS {
            let n = curves
                .iter()
                .filter(|c| c.kind == CurveKind::Idvd && (c.fixed_bias.abs() - vgs).abs() < BIAS_TOL)
                .count();
            if n != 1 {
                return Err(Error::Precondition(format!(
                    "expected exactly one IDVD curve at |vgs| = {vgs} V, found {n}"
                )));
            }
        }
        if curves.len() != 7 {
            return Err(Error::Precondition(format!("expected 7 curves, found {}", curves.len())));
        }
        curves.sort_by(|a, b| {
            a.kind
                .cmp(&b.kind)
                .then(a.fixed_bias.abs().total_cmp(&b.fixed_bias.abs()))
        });
        Ok(CharacterizationSet {
            variant,
            polarity,
            curves,
        })
    }

    /// Curves in canonical order.
    pub fn curves(&self) -> &[DeviceCurve] {
        &self.curves
    }

    /// The single curve of a kind. For IDVD this is the first (lowest |vgs|)
    /// curve; use [`CharacterizationSet::of_kind`] for the family.
    pub fn curve(&self, kind: CurveKind) -> &DeviceCurve {
        self.of_kind(kind).next().expect("set is complete")
    }

    pub fn of_kind(&self, kind: CurveKind) -> impl Iterator<Item = &DeviceCurve> {
        self.curves.iter().filter(move |c| c.kind == kind)
    }
}
