//! Flat `NAME value` model files.
//!
//! ```text
//! * miv-cellkit model v1
//! LEVEL 70
//! TOX 1e-9
//! POLARITY n
//! VTH0 3e-1
//! ...
//! ```
//!
//! Names are case-insensitive. Lines starting with `*` or `#` are comments.
//! Constants missing from the file take their default process values; every
//! extractable parameter must be present.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{ModelConstants, ModelParams, ParamName};
use crate::error::{Error, Result};
use crate::types::Polarity;

/// A model file: parameter vector plus the constants it was extracted with.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCard {
    pub params: ModelParams,
    pub consts: ModelConstants,
}

impl ModelCard {
    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut consts = ModelConstants::default();
        let mut polarity = Polarity::N;
        let mut values: BTreeMap<ParamName, f64> = BTreeMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('*') || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default().to_ascii_uppercase();
            let value = parts
                .next()
                .ok_or_else(|| Error::parse(context, lineno, format!("missing value for {key}")))?;
            if parts.next().is_some() {
                return Err(Error::parse(context, lineno, "expected `NAME value`"));
            }
            if key == "POLARITY" {
                polarity = value
                    .parse()
                    .map_err(|_| Error::parse(context, lineno, format!("bad polarity `{value}`")))?;
                continue;
            }
            let num: f64 = value
                .parse()
                .map_err(|_| Error::parse(context, lineno, format!("bad number `{value}` for {key}")))?;
            let int = || -> Result<i32> {
                if num.fract() == 0.0 && num.abs() < 1e6 {
                    Ok(num as i32)
                } else {
                    Err(Error::parse(context, lineno, format!("{key} must be an integer flag")))
                }
            };
            match key.as_str() {
                "TSI" => consts.tsi = num,
                "TOX" => consts.tox = num,
                "TBOX" => consts.tbox = num,
                "L" => consts.l = num,
                "W" => consts.w = num,
                "TNOM" => consts.tnom = num,
                "LEVEL" => consts.level = int()?,
                "SOIMOD" => consts.soimod = int()?,
                "MOBMOD" => consts.mobmod = int()?,
                "CAPMOD" => consts.capmod = int()?,
                "IGCMOD" => consts.igcmod = int()?,
                _ => {
                    let name: ParamName = key
                        .parse()
                        .map_err(|_| Error::parse(context, lineno, format!("unknown key `{key}`")))?;
                    if values.insert(name, num).is_some() {
                        return Err(Error::parse(context, lineno, format!("duplicate key `{key}`")));
                    }
                }
            }
        }

        let missing: Vec<&str> = ParamName::ALL
            .iter()
            .filter(|p| !values.contains_key(p))
            .map(|p| p.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(Error::parse(
                context,
                text.lines().count(),
                format!("missing parameters: {}", missing.join(", ")),
            ));
        }
        let get = |p: ParamName| values[&p];
        let params = ModelParams {
            vth0: get(ParamName::Vth0),
            delvt: get(ParamName::Delvt),
            u0: get(ParamName::U0),
            ua: get(ParamName::Ua),
            ub: get(ParamName::Ub),
            ud: get(ParamName::Ud),
            ucs: get(ParamName::Ucs),
            cdsc: get(ParamName::Cdsc),
            cdscd: get(ParamName::Cdscd),
            dvt0: get(ParamName::Dvt0),
            dvt1: get(ParamName::Dvt1),
            etab: get(ParamName::Etab),
            vsat: get(ParamName::Vsat),
            pvag: get(ParamName::Pvag),
            ckappa: get(ParamName::Ckappa),
            cf: get(ParamName::Cf),
            cgso: get(ParamName::Cgso),
            cgdo: get(ParamName::Cgdo),
            cgsl: get(ParamName::Cgsl),
            cgdl: get(ParamName::Cgdl),
            moin: get(ParamName::Moin),
            polarity,
        };
        Ok(ModelCard { params, consts })
    }

    /// Canonical text form.
    pub fn to_text(&self) -> String {
        let c = &self.consts;
        let mut out = String::from("* miv-cellkit model v1\n");
        for (k, v) in [
            ("LEVEL", c.level),
            ("SOIMOD", c.soimod),
            ("MOBMOD", c.mobmod),
            ("CAPMOD", c.capmod),
            ("IGCMOD", c.igcmod),
        ] {
            let _ = writeln!(out, "{k} {v}");
        }
        for (k, v) in [
            ("TSI", c.tsi),
            ("TOX", c.tox),
            ("TBOX", c.tbox),
            ("L", c.l),
            ("W", c.w),
            ("TNOM", c.tnom),
        ] {
            let _ = writeln!(out, "{k} {v:e}");
        }
        let _ = writeln!(out, "POLARITY {}", self.params.polarity);
        for (name, v) in self.params.entries() {
            let _ = writeln!(out, "{name} {v:e}");
        }
        out
    }
}

pub fn read_model_file(path: impl AsRef<Path>) -> Result<ModelCard> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelCard::parse(&text, &path.display().to_string())
}

pub fn write_model_file(path: impl AsRef<Path>, card: &ModelCard) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, card.to_text()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::Variant;

    fn card() -> ModelCard {
        ModelCard {
            params: fixtures::true_params(Variant::Ch2, Polarity::P),
            consts: ModelConstants::default(),
        }
    }

    #[test]
    fn text_round_trip() {
        let c = card();
        let back = ModelCard::parse(&c.to_text(), "mem").unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), c.to_text());
    }

    #[test]
    fn names_are_case_insensitive() {
        let text = card().to_text().to_lowercase();
        let back = ModelCard::parse(&text, "mem").unwrap();
        assert_eq!(back.params, card().params);
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let mut text = card().to_text();
        text.push_str("K1 0.5\n");
        let err = ModelCard::parse(&text, "m.model").unwrap_err().to_string();
        assert!(err.contains("unknown key `K1`"), "{err}");
        assert!(err.starts_with("m.model:"), "{err}");
    }

    #[test]
    fn missing_parameter_rejected() {
        let text: String = card()
            .to_text()
            .lines()
            .filter(|l| !l.starts_with("VSAT"))
            .map(|l| format!("{l}\n"))
            .collect();
        let err = ModelCard::parse(&text, "m").unwrap_err().to_string();
        assert!(err.contains("VSAT"), "{err}");
    }
}
