//! Reduced-order FDSOI compact model.
//!
//! Parameters reuse the level-70 (BSIMSOI4) names, but the equations are a
//! compact surrogate in which every parameter has exactly one functional
//! role. The n-type core, with `phit` the thermal voltage at 25 °C:
//!
//! ```text
//! n        = max(1, 1 + CDSC + CDSCD*vds)
//! Vth      = VTH0 - DVT0*exp(-DVT1*L/Lt)*Vbi - |ETAB|*vds      Lt = 20 nm, Vbi = 0.8 V
//! Vgsteff  = n*phit*softplus((vgs - Vth)/(n*phit))
//! mu_eff   = U0 / (1 + UA*e + UB*e^2 + UD*e^UCS)               e = Vgsteff / 1 V
//! F(u)     = softplus(u/2)^2
//! I0       = 2*n*mu_eff*Cox*(W/L)*phit^2 * (F(uf) - F(ur))
//! ksat     = mu_eff/(2*VSAT*L)
//! Vdsat    = 2*(Vgsteff/n) / (1 + sqrt(1 + 2*ksat*Vgsteff/n))
//! Id       = I0 / (1 + ksat*smin(vds, Vdsat))
//! Id      *= 1 + PVAG*Vgsteff*smax(vds - Vgsteff, 0)
//! ```
//!
//! `smin`/`smax` are log-sum-exp smoothings with a 10 mV sharpness, so the
//! current is C¹ everywhere. Negative `vds` is handled by source/drain
//! exchange, and a p-type device is the n-type core with all terminal
//! voltages and the current negated.
//!
//! The gate capacitance is a logistic C-V step:
//!
//! ```text
//! Cg(vg) = W*L*Cox*sigma((vg - VTH0 - DELVT)/(MOIN*phit))
//!        + W*(CGSO + CGDO) + CF
//!        + W*(CGSL + CGDL)*(1 - sigma(vg/CKAPPA))
//! ```
//!
//! CDSC, CDSCD and ETAB are dimensionless (V/V) coefficients here, not
//! BSIM's per-area body-effect quantities.

pub(crate) mod dual;
mod file;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::types::Polarity;
use dual::{logistic, softplus, Dual};

pub use file::{read_model_file, write_model_file, ModelCard};

/// Thermal voltage at TNOM = 25 °C.
pub const PHI_T: f64 = 0.025852;
/// Permittivity of SiO2 (F/m).
pub const EPS_OX: f64 = 3.453e-11;
/// Characteristic length of the short-channel Vth roll-off term.
pub const L_T: f64 = 20e-9;
/// Built-in potential used by the Vth roll-off term.
pub const V_BI: f64 = 0.8;
/// Sharpness of the smoothed min/max used around vdsat.
pub const SMOOTHING: f64 = 0.01;

/// Process constants and model-selector flags held fixed during extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub tsi: f64,
    pub tox: f64,
    pub tbox: f64,
    pub l: f64,
    pub w: f64,
    pub tnom: f64,
    pub level: i32,
    pub soimod: i32,
    pub mobmod: i32,
    pub capmod: i32,
    pub igcmod: i32,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants {
            tsi: 7e-9,
            tox: 1e-9,
            tbox: 100e-9,
            l: 48e-9,
            w: 192e-9,
            tnom: 25.0,
            level: 70,
            soimod: 2,
            mobmod: 4,
            capmod: 3,
            igcmod: 0,
        }
    }
}

impl ModelConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("TSI", self.tsi),
            ("TOX", self.tox),
            ("TBOX", self.tbox),
            ("L", self.l),
            ("W", self.w),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !self.tnom.is_finite() {
            return Err(Error::param("TNOM", "must be finite"));
        }
        if self.igcmod != 0 {
            return Err(Error::param("IGCMOD", "gate tunneling current is not modelled; must be 0"));
        }
        Ok(())
    }

    /// Oxide capacitance per unit area (F/m²).
    pub fn cox(&self) -> f64 {
        EPS_OX / self.tox
    }
}

/// Names of the extractable model parameters, in canonical file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ParamName {
    Vth0,
    Delvt,
    U0,
    Ua,
    Ub,
    Ud,
    Ucs,
    Cdsc,
    Cdscd,
    Dvt0,
    Dvt1,
    Etab,
    Vsat,
    Pvag,
    Ckappa,
    Cf,
    Cgso,
    Cgdo,
    Cgsl,
    Cgdl,
    Moin,
}

impl ParamName {
    pub const ALL: [ParamName; 21] = [
        ParamName::Vth0,
        ParamName::Delvt,
        ParamName::U0,
        ParamName::Ua,
        ParamName::Ub,
        ParamName::Ud,
        ParamName::Ucs,
        ParamName::Cdsc,
        ParamName::Cdscd,
        ParamName::Dvt0,
        ParamName::Dvt1,
        ParamName::Etab,
        ParamName::Vsat,
        ParamName::Pvag,
        ParamName::Ckappa,
        ParamName::Cf,
        ParamName::Cgso,
        ParamName::Cgdo,
        ParamName::Cgsl,
        ParamName::Cgdl,
        ParamName::Moin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::Vth0 => "VTH0",
            ParamName::Delvt => "DELVT",
            ParamName::U0 => "U0",
            ParamName::Ua => "UA",
            ParamName::Ub => "UB",
            ParamName::Ud => "UD",
            ParamName::Ucs => "UCS",
            ParamName::Cdsc => "CDSC",
            ParamName::Cdscd => "CDSCD",
            ParamName::Dvt0 => "DVT0",
            ParamName::Dvt1 => "DVT1",
            ParamName::Etab => "ETAB",
            ParamName::Vsat => "VSAT",
            ParamName::Pvag => "PVAG",
            ParamName::Ckappa => "CKAPPA",
            ParamName::Cf => "CF",
            ParamName::Cgso => "CGSO",
            ParamName::Cgdo => "CGDO",
            ParamName::Cgsl => "CGSL",
            ParamName::Cgdl => "CGDL",
            ParamName::Moin => "MOIN",
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        ParamName::ALL
            .into_iter()
            .find(|p| p.as_str() == upper)
            .ok_or(Error::UnknownName {
                what: "model parameter",
                name: s.trim().to_string(),
            })
    }
}

/// One compact-model parameter vector for one device variant and polarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub vth0: f64,
    pub delvt: f64,
    pub u0: f64,
    pub ua: f64,
    pub ub: f64,
    pub ud: f64,
    pub ucs: f64,
    pub cdsc: f64,
    pub cdscd: f64,
    pub dvt0: f64,
    pub dvt1: f64,
    pub etab: f64,
    pub vsat: f64,
    pub pvag: f64,
    pub ckappa: f64,
    pub cf: f64,
    pub cgso: f64,
    pub cgdo: f64,
    pub cgsl: f64,
    pub cgdl: f64,
    pub moin: f64,
    pub polarity: Polarity,
}

impl ModelParams {
    /// All-zero vector; only useful as a base to fill via [`ModelParams::set`].
    pub(crate) fn zeroed(polarity: Polarity) -> Self {
        ModelParams {
            vth0: 0.0,
            delvt: 0.0,
            u0: 0.0,
            ua: 0.0,
            ub: 0.0,
            ud: 0.0,
            ucs: 0.0,
            cdsc: 0.0,
            cdscd: 0.0,
            dvt0: 0.0,
            dvt1: 0.0,
            etab: 0.0,
            vsat: 0.0,
            pvag: 0.0,
            ckappa: 0.0,
            cf: 0.0,
            cgso: 0.0,
            cgdo: 0.0,
            cgsl: 0.0,
            cgdl: 0.0,
            moin: 0.0,
            polarity,
        }
    }

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::Vth0 => self.vth0,
            ParamName::Delvt => self.delvt,
            ParamName::U0 => self.u0,
            ParamName::Ua => self.ua,
            ParamName::Ub => self.ub,
            ParamName::Ud => self.ud,
            ParamName::Ucs => self.ucs,
            ParamName::Cdsc => self.cdsc,
            ParamName::Cdscd => self.cdscd,
            ParamName::Dvt0 => self.dvt0,
            ParamName::Dvt1 => self.dvt1,
            ParamName::Etab => self.etab,
            ParamName::Vsat => self.vsat,
            ParamName::Pvag => self.pvag,
            ParamName::Ckappa => self.ckappa,
            ParamName::Cf => self.cf,
            ParamName::Cgso => self.cgso,
            ParamName::Cgdo => self.cgdo,
            ParamName::Cgsl => self.cgsl,
            ParamName::Cgdl => self.cgdl,
            ParamName::Moin => self.moin,
        }
    }

    pub fn set(&mut self, name: ParamName, value: f64) {
        let slot = match name {
            ParamName::Vth0 => &mut self.vth0,
            ParamName::Delvt => &mut self.delvt,
            ParamName::U0 => &mut self.u0,
            ParamName::Ua => &mut self.ua,
            ParamName::Ub => &mut self.ub,
            ParamName::Ud => &mut self.ud,
            ParamName::Ucs => &mut self.ucs,
            ParamName::Cdsc => &mut self.cdsc,
            ParamName::Cdscd => &mut self.cdscd,
            ParamName::Dvt0 => &mut self.dvt0,
            ParamName::Dvt1 => &mut self.dvt1,
            ParamName::Etab => &mut self.etab,
            ParamName::Vsat => &mut self.vsat,
            ParamName::Pvag => &mut self.pvag,
            ParamName::Ckappa => &mut self.ckappa,
            ParamName::Cf => &mut self.cf,
            ParamName::Cgso => &mut self.cgso,
            ParamName::Cgdo => &mut self.cgdo,
            ParamName::Cgsl => &mut self.cgsl,
            ParamName::Cgdl => &mut self.cgdl,
            ParamName::Moin => &mut self.moin,
        };
        *slot = value;
    }

    /// Parameter/value pairs in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (ParamName, f64)> + '_ {
        ParamName::ALL.into_iter().map(|p| (p, self.get(p)))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.entries() {
            if !v.is_finite() {
                return Err(Error::param(name.as_str(), format!("non-finite value {v}")));
            }
        }
        let positive = [
            (ParamName::U0, self.u0),
            (ParamName::Vsat, self.vsat),
            (ParamName::Ckappa, self.ckappa),
            (ParamName::Moin, self.moin),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(Error::param(name.as_str(), format!("must be > 0, got {v}")));
            }
        }
        let non_negative = [
            (ParamName::Ucs, self.ucs),
            (ParamName::Cf, self.cf),
            (ParamName::Cgso, self.cgso),
            (ParamName::Cgdo, self.cgdo),
            (ParamName::Cgsl, self.cgsl),
            (ParamName::Cgdl, self.cgdl),
        ];
        for (name, v) in non_negative {
            if v < 0.0 {
                return Err(Error::param(name.as_str(), format!("must be >= 0, got {v}")));
            }
        }
        // n = 1 + CDSC + CDSCD*vds is linear in vds, so checking both ends of
        // [0, 1] V covers the interval.
        if self.cdsc < 0.0 || self.cdsc + self.cdscd < 0.0 {
            return Err(Error::param(
                "CDSC",
                format!(
                    "slope factor drops below 1 on vds in [0, 1] V (CDSC={}, CDSCD={})",
                    self.cdsc, self.cdscd
                ),
            ));
        }
        Ok(())
    }
}

/// Terminal biases relative to the source. The body is tied to the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasPoint {
    pub vgs: f64,
    pub vds: f64,
}

impl BiasPoint {
    pub fn new(vgs: f64, vds: f64) -> Self {
        BiasPoint { vgs, vds }
    }
}

/// Drain current and its partial derivatives at one bias point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceEval {
    pub id: f64,
    pub gm: f64,
    pub gds: f64,
}

/// Full large/small-signal evaluation. `id` is the current flowing into the
/// drain terminal.
pub fn evaluate(params: &ModelParams, consts: &ModelConstants, bias: BiasPoint) -> Result<DeviceEval> {
    check_finite("vgs", bias.vgs)?;
    check_finite("vds", bias.vds)?;
    params.validate()?;
    consts.validate()?;
    let s = params.polarity.sign();
    // Mirror into the n-type frame: vgs' = s*vgs, vds' = s*vds, I = s*I'.
    let vgs = Dual::var(s * bias.vgs, [s, 0.0]);
    let vds = Dual::var(s * bias.vds, [0.0, s]);
    let core = if vds.v >= 0.0 {
        core_current(params, consts, vgs, vds)?
    } else {
        -core_current(params, consts, vgs - vds, -vds)?
    };
    let id = core * s;
    Ok(DeviceEval {
        id: id.v,
        gm: id.d[0],
        gds: id.d[1],
    })
}

fn core_current(p: &ModelParams, c: &ModelConstants, vgs: Dual, vds: Dual) -> Result<Dual> {
    let n = (vds * p.cdscd + (1.0 + p.cdsc)).max_const(1.0);
    let nphi = n * PHI_T;
    let roll_off = p.dvt0 * (-p.dvt1 * c.l / L_T).exp() * V_BI;
    let vth = (vds * -p.etab.abs()) + (p.vth0 - roll_off);
    let x = (vgs - vth) / nphi;
    let vgsteff = nphi * x.softplus();

    let e = vgsteff;
    let mut denom = e * p.ua + e * e * p.ub + 1.0;
    if p.ud != 0.0 {
        denom = denom + e.powf(p.ucs) * p.ud;
    }
    if !(denom.v > 0.0) {
        return Err(Error::param(
            "UA",
            format!("mobility degradation denominator is {} (must be > 0)", denom.v),
        ));
    }
    let mu = Dual::constant(p.u0) / denom;

    let ekv = |u: Dual| {
        let sp = (u * 0.5).softplus();
        sp * sp
    };
    let i_f = ekv(x);
    let i_r = ekv((vgs - vth - n * vds) / nphi);
    let i0 = n * mu * (i_f - i_r) * (2.0 * c.cox() * (c.w / c.l) * PHI_T * PHI_T);

    // Drain voltage at which I0/(1 + ksat*vds) peaks for the quadratic
    // strong-inversion current; clamping there keeps Id nondecreasing in vds.
    let ksat = mu / (2.0 * p.vsat * c.l);
    let v_n = vgsteff / n;
    let vdsat = v_n * 2.0 / ((ksat * v_n * 2.0 + 1.0).sqrt() + 1.0);
    // smin(a, b) = a - s*softplus((a - b)/s)
    let vd_eff = vds - ((vds - vdsat) / SMOOTHING).softplus() * SMOOTHING;
    let id = i0 / (vd_eff * ksat + 1.0);

    let excess = ((vds - vgsteff) / SMOOTHING).softplus() * SMOOTHING;
    Ok(id * (vgsteff * excess * p.pvag + 1.0))
}

/// Current into the drain terminal (A).
pub fn drain_current(params: &ModelParams, consts: &ModelConstants, bias: BiasPoint) -> Result<f64> {
    evaluate(params, consts, bias).map(|e| e.id)
}

/// Current into the source terminal (A). With no gate current this is
/// exactly `-drain_current`.
pub fn source_current(params: &ModelParams, consts: &ModelConstants, bias: BiasPoint) -> Result<f64> {
    drain_current(params, consts, bias).map(|id| -id)
}

/// Transconductance and output conductance `(gm, gds)` in siemens.
pub fn conductances(params: &ModelParams, consts: &ModelConstants, bias: BiasPoint) -> Result<(f64, f64)> {
    evaluate(params, consts, bias).map(|e| (e.gm, e.gds))
}

/// Gate capacitance (F) at gate-source voltage `vg`.
pub fn gate_capacitance(params: &ModelParams, consts: &ModelConstants, vg: f64) -> Result<f64> {
    check_finite("vg", vg)?;
    params.validate()?;
    consts.validate()?;
    let vg = params.polarity.sign() * vg;
    let p = params;
    let intrinsic = consts.w * consts.l * consts.cox()
        * logistic((vg - p.vth0 - p.delvt) / (p.moin * PHI_T));
    let low_bias = consts.w * (p.cgsl + p.cgdl) * (1.0 - logistic(vg / p.ckappa));
    Ok(intrinsic + fixed_capacitance(p, consts) + low_bias)
}

/// Gate charge Q(vg) = integral of [`gate_capacitance`] from 0 to `vg`, in
/// closed form.
pub fn gate_charge(params: &ModelParams, consts: &ModelConstants, vg: f64) -> Result<f64> {
    check_finite("vg", vg)?;
    params.validate()?;
    consts.validate()?;
    let s = params.polarity.sign();
    // Q_p(v) = -Q_n(-v) because C_p(v) = C_n(-v).
    let v = s * vg;
    let p = params;
    let cox_area = consts.w * consts.l * consts.cox();
    let mid = p.vth0 + p.delvt;
    let width = p.moin * PHI_T;
    let intrinsic = cox_area * width * (softplus((v - mid) / width) - softplus(-mid / width));
    let k = p.ckappa;
    let low_bias =
        consts.w * (p.cgsl + p.cgdl) * (v - k * (softplus(v / k) - std::f64::consts::LN_2));
    let q = intrinsic + fixed_capacitance(p, consts) * v + low_bias;
    Ok(s * q)
}

fn fixed_capacitance(p: &ModelParams, c: &ModelConstants) -> f64 {
    c.w * (p.cgso + p.cgdo) + p.cf
}

/// Strong-inversion asymptote of the gate capacitance.
pub fn gate_capacitance_asymptote(params: &ModelParams, consts: &ModelConstants) -> f64 {
    consts.w * consts.l * consts.cox() + fixed_capacitance(params, consts)
}
