//! Curve CSV format.
//!
//! ```text
//! # miv-cellkit curves v1
//! # variant=ch4
//! CURVE,IDVG_LOW,n,5e-2
//! 0e0,1.234e-10
//! ...
//! ```
//!
//! Numbers are written in Rust's shortest round-trip scientific notation, so
//! read followed by write reproduces a canonical file byte for byte. The
//! `# variant=` comment is optional on input; when absent the variant is
//! taken from a `<variant>_<polarity>` file stem.

use std::fmt::Write as _;
use std::path::Path;

use super::{CharacterizationSet, CurveKind, DeviceCurve};
use crate::error::{Error, Result};
use crate::types::{Polarity, Variant};

pub const CURVES_HEADER: &str = "# miv-cellkit curves v1";

pub fn format_curves(set: &CharacterizationSet) -> String {
    let mut out = String::new();
    out.push_str(CURVES_HEADER);
    out.push('\n');
    let _ = writeln!(out, "# variant={}", set.variant);
    for c in set.curves() {
        let _ = writeln!(out, "CURVE,{},{},{:e}", c.kind, c.polarity, c.fixed_bias);
        for (x, y) in c.samples() {
            let _ = writeln!(out, "{x:e},{y:e}");
        }
    }
    out
}

struct Pending {
    kind: CurveKind,
    polarity: Polarity,
    bias: f64,
    line: usize,
    sweep: Vec<f64>,
    values: Vec<f64>,
}

impl Pending {
    fn finish(self, ctx: &str) -> Result<DeviceCurve> {
        let line = self.line;
        DeviceCurve::new(self.kind, self.polarity, self.bias, self.sweep, self.values)
            .map_err(|e| Error::parse(ctx, line, e.to_string()))
    }
}

/// Parse curve CSV text. `fallback_variant` is used when the file has no
/// `# variant=` line.
pub fn parse_curves(text: &str, ctx: &str, fallback_variant: Option<Variant>) -> Result<CharacterizationSet> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)));
    match lines.next() {
        Some((_, h)) if h == CURVES_HEADER => {}
        Some((n, h)) => {
            return Err(Error::parse(ctx, n, format!("expected header `{CURVES_HEADER}`, found `{h}`")))
        }
        None => return Err(Error::parse(ctx, 1, "empty file")),
    }

    let mut variant = None;
    let mut curves = Vec::new();
    let mut current: Option<Pending> = None;
    let mut last_line = 1;

    for (n, line) in lines {
        last_line = n;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("variant=") {
                variant = Some(v.parse::<Variant>().map_err(|e| Error::parse(ctx, n, e.to_string()))?);
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields[0].eq_ignore_ascii_case("CURVE") {
            if fields.len() != 4 {
                return Err(Error::parse(ctx, n, "expected `CURVE,<kind>,<polarity>,<fixed_bias_V>`"));
            }
            if let Some(p) = current.take() {
                curves.push(p.finish(ctx)?);
            }
            let kind = fields[1].parse().map_err(|e: Error| Error::parse(ctx, n, e.to_string()))?;
            let polarity = fields[2].parse().map_err(|e: Error| Error::parse(ctx, n, e.to_string()))?;
            let bias = parse_num(fields[3], ctx, n)?;
            current = Some(Pending {
                kind,
                polarity,
                bias,
                line: n,
                sweep: Vec::new(),
                values: Vec::new(),
            });
            continue;
        }
        let Some(p) = current.as_mut() else {
            return Err(Error::parse(ctx, n, "sample line before any CURVE line"));
        };
        if fields.len() != 2 {
            return Err(Error::parse(ctx, n, "expected `<sweep_V>,<value>`"));
        }
        let x = parse_num(fields[0], ctx, n)?;
        let y = parse_num(fields[1], ctx, n)?;
        if let Some(&prev) = p.sweep.last() {
            if !(x > prev) {
                return Err(Error::parse(ctx, n, format!("sweep value {x} does not increase (previous {prev})")));
            }
        }
        p.sweep.push(x);
        p.values.push(y);
    }
    if let Some(p) = current.take() {
        curves.push(p.finish(ctx)?);
    }

    let variant = variant
        .or(fallback_variant)
        .ok_or_else(|| Error::parse(ctx, last_line, "no `# variant=` line and no variant given"))?;
    let polarity = curves
        .first()
        .map(|c| c.polarity)
        .ok_or_else(|| Error::parse(ctx, last_line, "no curves"))?;
    CharacterizationSet::new(variant, polarity, curves).map_err(|e| Error::parse(ctx, last_line, e.to_string()))
}

fn parse_num(s: &str, ctx: &str, line: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(ctx, line, format!("bad number `{s}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::parse(ctx, line, format!("non-finite number `{s}`")))
    }
}

pub fn read_curves(path: impl AsRef<Path>) -> Result<CharacterizationSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let fallback = path
        .file_stem()
        .and_then(|s| s.to_str())
        .and_then(|s| s.split('_').next())
        .and_then(|v| v.parse().ok());
    parse_curves(&text, &path.display().to_string(), fallback)
}

pub fn write_curves(set: &CharacterizationSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_curves(set)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::generate_synthetic;
    use crate::fixtures;

    fn text() -> String {
        let set = generate_synthetic(
            &fixtures::true_params(Variant::Ch4, Polarity::P),
            &fixtures::constants(),
            Variant::Ch4,
            0.01,
            3,
        )
        .unwrap();
        format_curves(&set)
    }

    #[test]
    fn valid_file_has_seven_curves() {
        let set = parse_curves(&text(), "t", None).unwrap();
        assert_eq!(set.curves().len(), 7);
        assert_eq!(set.variant, Variant::Ch4);
        assert_eq!(set.polarity, Polarity::P);
    }

    #[test]
    fn duplicate_sweep_point_is_error_with_line() {
        let t = text();
        let mut lines: Vec<&str> = t.lines().collect();
        // line 4 is the first sample of the first curve; repeat it
        lines.insert(4, lines[3]);
        let bad = lines.join("\n");
        let err = parse_curves(&bad, "f.csv", None).unwrap_err().to_string();
        assert!(err.starts_with("f.csv:5:"), "{err}");
    }

    #[test]
    fn malformed_header_names_line_one() {
        let t = text().replacen("v1", "v2", 1);
        let err = parse_curves(&t, "f.csv", None).unwrap_err().to_string();
        assert!(err.starts_with("f.csv:1:"), "{err}");
    }

    #[test]
    fn missing_kind_is_error() {
        let t = text();
        let cut = t.find("CURVE,CV").unwrap();
        let err = parse_curves(&t[..cut], "f.csv", None).unwrap_err().to_string();
        assert!(err.contains("CV"), "{err}");
    }

    #[test]
    fn variant_falls_back_to_argument() {
        let t: String = text().lines().filter(|l| !l.starts_with("# variant")).map(|l| format!("{l}\n")).collect();
        assert!(parse_curves(&t, "f", None).is_err());
        let s = parse_curves(&t, "f", Some(Variant::Ch1)).unwrap();
        assert_eq!(s.variant, Variant::Ch1);
    }

    #[test]
    fn shuffled_curves_canonicalize() {
        let t = text();
        let set = parse_curves(&t, "f", None).unwrap();
        // Emit curves in reverse order, with plain decimals.
        let mut shuffled = String::from("# miv-cellkit curves v1\n# variant=ch4\n");
        for c in set.curves().iter().rev() {
            shuffled.push_str(&format!("CURVE,{},{},{}\n", c.kind, c.polarity, c.fixed_bias));
            for (x, y) in c.samples() {
                shuffled.push_str(&format!("{x},{y}\n"));
            }
        }
        let back = parse_curves(&shuffled, "f", None).unwrap();
        assert_eq!(format_curves(&back), t);
    }
}
