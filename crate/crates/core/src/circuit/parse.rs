//! Line-oriented netlist text:
//!
//! ```text
//! * comment
//! R1   a b 1k
//! C1   b 0 1p
//! M1   d g s model=nfet.model polarity=n
//! Vdd  vdd 0 DC 1.0
//! Vin  in 0 PWL(0 0 1n 0 1.01n 1)
//! .tran 1p 4n
//! ```
//!
//! Values accept SPICE scale suffixes (`f p n u m k meg g t`, any case) and
//! trailing unit letters. `model=builtin:<variant>_<n|p>` refers to a shipped
//! fixture instead of a file; other model paths are relative to the netlist.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::netlist::{Netlist, Waveform};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::model::{read_model_file, ModelCard};
use crate::types::{Polarity, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranSpec {
    pub dt: f64,
    pub t_stop: f64,
}

/// Number with an optional SPICE scale suffix.
pub fn parse_value(s: &str) -> Option<f64> {
    let s = s.trim();
    let split = s
        .char_indices()
        .find(|&(i, c)| {
            c.is_ascii_alphabetic() && !((c == 'e' || c == 'E') && exponent_follows(&s[i + 1..]))
        })
        .map_or(s.len(), |(i, _)| i);
    let (num, suffix) = s.split_at(split);
    let base: f64 = num.parse().ok()?;
    let lower = suffix.to_ascii_lowercase();
    let scale = if lower.starts_with("meg") {
        1e6
    } else {
        match lower.chars().next() {
            None => 1.0,
            Some('f') => 1e-15,
            Some('p') => 1e-12,
            Some('n') => 1e-9,
            Some('u') => 1e-6,
            Some('m') => 1e-3,
            Some('k') => 1e3,
            Some('g') => 1e9,
            Some('t') => 1e12,
            // bare unit such as "V", "s", "F", "ohm"
            Some(_) => 1.0,
        }
    };
    let v = base * scale;
    v.is_finite().then_some(v)
}

fn exponent_follows(rest: &str) -> bool {
    let rest = rest.strip_prefix(['+', '-']).unwrap_or(rest);
    rest.chars().next().is_some_and(|c| c.is_ascii_digit())
}

fn load_model(spec: &str, base: Option<&Path>, ctx: &str, line: usize) -> Result<ModelCard> {
    if let Some(stem) = spec.strip_prefix("builtin:") {
        let (v, p) = stem
            .rsplit_once('_')
            .ok_or_else(|| Error::parse(ctx, line, format!("builtin model `{stem}` is not <variant>_<n|p>")))?;
        let variant: Variant = v.parse().map_err(|e: Error| Error::parse(ctx, line, e.to_string()))?;
        let polarity: Polarity = p.parse().map_err(|e: Error| Error::parse(ctx, line, e.to_string()))?;
        return Ok(fixtures::card(variant, polarity));
    }
    let path: PathBuf = match base {
        Some(dir) => dir.join(spec),
        None => PathBuf::from(spec),
    };
    read_model_file(&path)
}

/// Parse netlist text. `base_dir` resolves relative model paths.
pub fn parse_netlist(text: &str, ctx: &str, base_dir: Option<&Path>) -> Result<(Netlist, Option<TranSpec>)> {
    let mut net = Netlist::new();
    let mut tran = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('*').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::parse(ctx, line_no, m);
        let fields: Vec<&str> = line.split_whitespace().collect();
        let value = |s: &str| parse_value(s).ok_or_else(|| err(format!("invalid value `{s}`")));
        let lower = fields[0].to_ascii_lowercase();
        if lower == ".end" {
            break;
        }
        if lower == ".tran" {
            if fields.len() != 3 {
                return Err(err("expected `.tran dt tstop`".into()));
            }
            tran = Some(TranSpec {
                dt: value(fields[1])?,
                t_stop: value(fields[2])?,
            });
            continue;
        }
        let name = fields[0];
        let wrap = |e: Error| match e {
            e @ Error::Parse { .. } => e,
            e => err(e.to_string()),
        };
        match lower.chars().next() {
            Some('r') | Some('c') => {
                if fields.len() != 4 {
                    return Err(err(format!("expected `{name} n1 n2 value`")));
                }
                let v = value(fields[3])?;
                if lower.starts_with('r') {
                    net.add_resistor(name, fields[1], fields[2], v).map_err(wrap)?;
                } else {
                    net.add_capacitor(name, fields[1], fields[2], v).map_err(wrap)?;
                }
            }
            Some('m') => {
                if fields.len() < 5 {
                    return Err(err(format!("expected `{name} d g s model=<file> polarity=<n|p>`")));
                }
                let mut model = None;
                let mut polarity = None;
                for kv in &fields[4..] {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| err(format!("expected key=value, got `{kv}`")))?;
                    match k.to_ascii_lowercase().as_str() {
                        "model" => model = Some(v),
                        "polarity" => {
                            polarity = Some(v.parse::<Polarity>().map_err(|e| err(e.to_string()))?);
                        }
                        other => return Err(err(format!("unknown transistor option `{other}`"))),
                    }
                }
                let model = model.ok_or_else(|| err("missing model=".into()))?;
                let card = load_model(model, base_dir, ctx, line_no).map_err(wrap)?;
                if let Some(p) = polarity {
                    if p != card.params.polarity {
                        return Err(err(format!(
                            "polarity={p} but model `{model}` is {}-type",
                            card.params.polarity
                        )));
                    }
                }
                net.add_transistor(name, fields[1], fields[2], fields[3], card.params, card.consts)
                    .map_err(wrap)?;
            }
            Some('v') => {
                if fields.len() < 4 {
                    return Err(err(format!("expected `{name} n+ n- DC v | PWL(...)`")));
                }
                let rest = fields[3..].join(" ");
                let wave = if fields[3].eq_ignore_ascii_case("dc") {
                    if fields.len() != 5 {
                        return Err(err("expected `DC <value>`".into()));
                    }
                    Waveform::Dc(value(fields[4])?)
                } else if rest.to_ascii_lowercase().starts_with("pwl") {
                    let inner = rest[3..].trim();
                    let inner = inner
                        .strip_prefix('(')
                        .and_then(|s| s.strip_suffix(')'))
                        .ok_or_else(|| err("PWL points must be in parentheses".into()))?;
                    let nums = inner
                        .split(|c: char| c.is_whitespace() || c == ',')
                        .filter(|s| !s.is_empty())
                        .map(value)
                        .collect::<Result<Vec<f64>>>()?;
                    if nums.len() < 2 || nums.len() % 2 != 0 {
                        return Err(err("PWL needs time/value pairs".into()));
                    }
                    let pts = nums.chunks(2).map(|c| (c[0], c[1])).collect();
                    Waveform::pwl(pts).map_err(wrap)?
                } else if fields.len() == 4 {
                    Waveform::Dc(value(fields[3])?)
                } else {
                    return Err(err(format!("unsupported source specification `{rest}`")));
                };
                net.add_vsource(name, fields[1], fields[2], wave).map_err(wrap)?;
            }
            _ => return Err(err(format!("unknown element `{name}`"))),
        }
    }
    Ok((net, tran))
}

pub fn read_netlist(path: impl AsRef<Path>) -> Result<(Netlist, Option<TranSpec>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_netlist(&text, &path.display().to_string(), path.parent())
}
