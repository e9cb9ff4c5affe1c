use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures::DEFAULT_BOUNDS;
use crate::model::{ModelParams, ParamName};
use crate::types::Polarity;

/// Box constraint and starting value for one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
    pub initial: f64,
}

impl Bound {
    pub fn new(lower: f64, upper: f64, initial: f64) -> Result<Self> {
        let b = Bound { lower, upper, initial };
        b.check("bound")?;
        Ok(b)
    }

    fn check(&self, name: &str) -> Result<()> {
        if ![self.lower, self.upper, self.initial].iter().all(|v| v.is_finite()) {
            return Err(Error::param(name, "bounds must be finite"));
        }
        if !(self.lower < self.upper) {
            return Err(Error::param(
                name,
                format!("lower bound {} is not below upper bound {}", self.lower, self.upper),
            ));
        }
        if !(self.lower..=self.upper).contains(&self.initial) {
            return Err(Error::param(
                name,
                format!("initial value {} outside [{}, {}]", self.initial, self.lower, self.upper),
            ));
        }
        Ok(())
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.lower..=self.upper).contains(&v)
    }
}

/// Bounds for every model parameter.
///
/// Text form, one parameter per line, `*` or `#` starting a comment:
///
/// ```text
/// NAME lower upper initial
/// VTH0 0.1   0.6   0.4
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    entries: BTreeMap<ParamName, Bound>,
}

impl ParamBounds {
    pub fn new(entries: BTreeMap<ParamName, Bound>) -> Result<Self> {
        for (name, b) in &entries {
            b.check(name.as_str())?;
        }
        for name in ParamName::ALL {
            if !entries.contains_key(&name) {
                return Err(Error::param(name.as_str(), "no bounds given"));
            }
        }
        Ok(ParamBounds { entries })
    }

    /// The bounds shipped in `data/default.bounds`.
    pub fn default_bounds() -> Self {
        Self::parse(DEFAULT_BOUNDS, "default.bounds").expect("shipped bounds are valid")
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split(['*', '#']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::parse(
                    context,
                    line_no,
                    format!("expected `NAME lower upper initial`, got {} fields", fields.len()),
                ));
            }
            let name: ParamName = fields[0]
                .parse()
                .map_err(|_| Error::parse(context, line_no, format!("unknown parameter `{}`", fields[0])))?;
            let mut nums = [0.0; 3];
            for (slot, f) in nums.iter_mut().zip(&fields[1..]) {
                *slot = f
                    .parse()
                    .map_err(|_| Error::parse(context, line_no, format!("invalid number `{f}`")))?;
            }
            let b = Bound {
                lower: nums[0],
                upper: nums[1],
                initial: nums[2],
            };
            b.check(name.as_str())
                .map_err(|e| Error::parse(context, line_no, e.to_string()))?;
            if entries.insert(name, b).is_some() {
                return Err(Error::parse(context, line_no, format!("duplicate parameter {name}")));
            }
        }
        Self::new(entries).map_err(|e| Error::parse(context, 0, e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("* miv-cellkit bounds v1\n* NAME lower upper initial\n");
        for (name, b) in &self.entries {
            out.push_str(&format!("{:<6} {:e} {:e} {:e}\n", name.as_str(), b.lower, b.upper, b.initial));
        }
        out
    }

    pub fn get(&self, name: ParamName) -> Bound {
        self.entries[&name]
    }

    pub fn set(&mut self, name: ParamName, bound: Bound) -> Result<()> {
        bound.check(name.as_str())?;
        self.entries.insert(name, bound);
        Ok(())
    }

    /// Parameter vector made of the initial values.
    pub fn initial_params(&self, polarity: Polarity) -> ModelParams {
        self.params_from(polarity, |b| b.initial)
    }

    /// Parameter vector at the center of every box.
    pub fn midpoint_params(&self, polarity: Polarity) -> ModelParams {
        self.params_from(polarity, Bound::midpoint)
    }

    fn params_from(&self, polarity: Polarity, f: impl Fn(&Bound) -> f64) -> ModelParams {
        let mut p = ModelParams::zeroed(polarity);
        for (name, b) in &self.entries {
            p.set(*name, f(b));
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bounds_contain_fixtures() {
        let b = ParamBounds::default_bounds();
        for (v, pol) in crate::fixtures::combinations() {
            let p = crate::fixtures::true_params(v, pol);
            for (name, value) in p.entries() {
                let bd = b.get(name);
                assert!(bd.lower < value && value < bd.upper, "{v} {pol} {name}={value}");
            }
        }
        b.initial_params(Polarity::N).validate().unwrap();
        b.midpoint_params(Polarity::P).validate().unwrap();
    }

    #[test]
    fn round_trip() {
        let b = ParamBounds::default_bounds();
        assert_eq!(ParamBounds::parse(&b.to_text(), "x").unwrap(), b);
    }

    #[test]
    fn rejects_bad_lines() {
        let good = ParamBounds::default_bounds().to_text();
        let bad = good.replace("VTH0   1e-1 6e-1 4e-1", "VTH0 0.6 0.1 0.4");
        assert_ne!(bad, good);
        let err = ParamBounds::parse(&bad, "b").unwrap_err().to_string();
        assert!(err.starts_with("b:"), "{err}");

        let err = ParamBounds::parse("VTH0 0.1 0.6\n", "b").unwrap_err().to_string();
        assert!(err.starts_with("b:1:"), "{err}");
        let err = ParamBounds::parse("FOO 0 1 0.5\n", "b").unwrap_err().to_string();
        assert!(err.contains("unknown parameter"), "{err}");
        let err = ParamBounds::parse("VTH0 0.1 0.6 0.9\n", "b").unwrap_err().to_string();
        assert!(err.contains("outside"), "{err}");
        let err = ParamBounds::parse("VTH0 0.1 0.6 0.4\n", "b").unwrap_err().to_string();
        assert!(err.contains("no bounds"), "{err}");
    }
}
