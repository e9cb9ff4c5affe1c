//! Reference devices and default extraction bounds shipped under `data/`.
//!
//! The eight model files stand in for measured/TCAD devices: the synthetic
//! generator samples curves from them and extraction tries to recover them.
//! They are embedded at build time; the CLI can read replacements from a data
//! directory instead.

use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::model::{read_model_file, ModelCard, ModelConstants, ModelParams};
use crate::types::{Polarity, Variant};

/// Environment variable that points the CLI at an alternative data directory.
pub const DATA_DIR_ENV: &str = "MIVCELLKIT_DATA_DIR";

const FIXTURES: [(Variant, Polarity, &str); 8] = [
    (Variant::Traditional, Polarity::N, include_str!("../../../data/fixtures/traditional_n.model")),
    (Variant::Traditional, Polarity::P, include_str!("../../../data/fixtures/traditional_p.model")),
    (Variant::Ch1, Polarity::N, include_str!("../../../data/fixtures/ch1_n.model")),
    (Variant::Ch1, Polarity::P, include_str!("../../../data/fixtures/ch1_p.model")),
    (Variant::Ch2, Polarity::N, include_str!("../../../data/fixtures/ch2_n.model")),
    (Variant::Ch2, Polarity::P, include_str!("../../../data/fixtures/ch2_p.model")),
    (Variant::Ch4, Polarity::N, include_str!("../../../data/fixtures/ch4_n.model")),
    (Variant::Ch4, Polarity::P, include_str!("../../../data/fixtures/ch4_p.model")),
];

/// Default extraction bounds (`NAME lower upper initial`).
pub const DEFAULT_BOUNDS: &str = include_str!("../../../data/default.bounds");

/// All (variant, polarity) combinations in fixture order.
pub fn combinations() -> impl Iterator<Item = (Variant, Polarity)> {
    FIXTURES.iter().map(|(v, p, _)| (*v, *p))
}

/// File stem used for per-device artifacts, e.g. `ch2_n`.
pub fn device_stem(variant: Variant, polarity: Polarity) -> String {
    format!("{variant}_{polarity}")
}

/// The embedded reference model card for one device.
pub fn card(variant: Variant, polarity: Polarity) -> ModelCard {
    let (_, _, text) = FIXTURES
        .iter()
        .find(|(v, p, _)| *v == variant && *p == polarity)
        .expect("every variant/polarity has a fixture");
    ModelCard::parse(text, &device_stem(variant, polarity)).expect("embedded fixture parses")
}

pub fn true_params(variant: Variant, polarity: Polarity) -> ModelParams {
    card(variant, polarity).params
}

pub fn constants() -> ModelConstants {
    ModelConstants::default()
}

/// Fixture path inside a data directory.
pub fn fixture_path(dir: &Path, variant: Variant, polarity: Polarity) -> PathBuf {
    dir.join("fixtures")
        .join(format!("{}.model", device_stem(variant, polarity)))
}

/// Load a fixture from `dir`, or the embedded copy when `dir` is `None`.
pub fn load_card(dir: Option<&Path>, variant: Variant, polarity: Polarity) -> Result<ModelCard> {
    match dir {
        Some(d) => read_model_file(fixture_path(d, variant, polarity)),
        None => Ok(card(variant, polarity)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_valid() {
        for (v, p) in combinations() {
            let c = card(v, p);
            assert_eq!(c.params.polarity, p);
            c.params.validate().unwrap();
            c.consts.validate().unwrap();
        }
        assert_eq!(combinations().count(), 8);
    }

    #[test]
    fn variants_differ_within_fifteen_percent() {
        for p in Polarity::ALL {
            let base = true_params(Variant::Traditional, p);
            for v in Variant::ALL {
                let q = true_params(v, p);
                for (a, b) in [(q.u0, base.u0), (q.vth0, base.vth0), (q.cgso, base.cgso)] {
                    assert!((a / b - 1.0).abs() <= 0.15 + 1e-12, "{v} {p}: {a} vs {b}");
                }
            }
        }
    }
}
