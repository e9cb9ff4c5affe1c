//! Synthetic reference-device generator: samples the compact model on the
//! canonical bias grids and applies multiplicative Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{eval_point, CharacterizationSet, CurveKind, DeviceCurve, IDVD_VGS, VDS_HIGH, VDS_LOW};
use crate::error::{Error, Result};
use crate::model::{ModelConstants, ModelParams};
use crate::types::{Polarity, Variant};

/// Grid pitch of every canonical sweep (V).
pub const SWEEP_STEP: f64 = 0.025;

/// Canonical sweep grid for a curve kind. n-type: IDVG/IDVD 0..1 V, CV
/// -0.5..1 V. p-type grids are the mirror image, listed in increasing order.
pub fn canonical_sweep(kind: CurveKind, polarity: Polarity) -> Vec<f64> {
    // Integer steps of 25 mV; i/40 is correctly rounded.
    let (lo, hi): (i32, i32) = match kind {
        CurveKind::Cv => (-20, 40),
        _ => (0, 40),
    };
    let grid: Vec<f64> = (lo..=hi).map(|i| f64::from(i) / 40.0).collect();
    match polarity {
        Polarity::N => grid,
        Polarity::P => grid.iter().rev().map(|v| -v).collect(),
    }
}

fn layout(polarity: Polarity) -> Vec<(CurveKind, f64)> {
    let s = polarity.sign();
    let mut out = vec![(CurveKind::IdvgLow, s * VDS_LOW), (CurveKind::IdvgHigh, s * VDS_HIGH)];
    out.extend(IDVD_VGS.iter().map(|v| (CurveKind::Idvd, s * v)));
    out.push((CurveKind::Cv, 0.0));
    out
}

/// Sample the model for `true_params` on the canonical grids. Each sample is
/// scaled by `1 + noise_rel * z`, `z ~ N(0, 1)`, drawn from a ChaCha8 stream
/// seeded with `seed` in canonical curve/sample order.
pub fn generate_synthetic(
    true_params: &ModelParams,
    consts: &ModelConstants,
    variant: Variant,
    noise_rel: f64,
    seed: u64,
) -> Result<CharacterizationSet> {
    if !(0.0..=0.1).contains(&noise_rel) {
        return Err(Error::Precondition(format!("noise_rel must lie in [0, 0.1], got {noise_rel}")));
    }
    true_params.validate()?;
    consts.validate()?;
    let polarity = true_params.polarity;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut curves = Vec::with_capacity(7);
    for (kind, bias) in layout(polarity) {
        let sweep = canonical_sweep(kind, polarity);
        let mut values = Vec::with_capacity(sweep.len());
        for &x in &sweep {
            let clean = eval_point(kind, bias, x, true_params, consts)?;
            let v = if noise_rel > 0.0 {
                clean * (1.0 + noise_rel * normal.sample(&mut rng))
            } else {
                clean
            };
            values.push(v);
        }
        curves.push(DeviceCurve::new(kind, polarity, bias, sweep, values)?);
    }
    CharacterizationSet::new(variant, polarity, curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn grids_have_expected_extent() {
        let g = canonical_sweep(CurveKind::IdvgHigh, Polarity::N);
        assert_eq!(g.len(), 41);
        assert_eq!((g[0], g[40]), (0.0, 1.0));
        let cv = canonical_sweep(CurveKind::Cv, Polarity::N);
        assert_eq!(cv.len(), 61);
        assert_eq!((cv[0], cv[60]), (-0.5, 1.0));
        let p = canonical_sweep(CurveKind::Cv, Polarity::P);
        assert_eq!((p[0], p[60]), (-1.0, 0.5));
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        assert!((g[1] - SWEEP_STEP).abs() < 1e-15);
    }

    #[test]
    fn noise_out_of_range_rejected() {
        let p = fixtures::true_params(Variant::Traditional, Polarity::N);
        let c = fixtures::constants();
        assert!(generate_synthetic(&p, &c, Variant::Traditional, 0.2, 0).is_err());
        assert!(generate_synthetic(&p, &c, Variant::Traditional, -0.01, 0).is_err());
    }
}
