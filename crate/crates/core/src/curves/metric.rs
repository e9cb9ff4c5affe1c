use super::DeviceCurve;
use crate::error::{Error, Result};

/// Below this reference current (A) transfer curves are compared on log10|I|.
pub const SUBTHRESHOLD_CURRENT: f64 = 1e-6;

const FLOOR_FRACTION: f64 = 1e-3;
const GRID_TOL: f64 = 1e-12;
const TINY: f64 = 1e-300;

/// Normalized mean absolute error of `model` against `reference`, in percent.
///
/// Each sample contributes `|y_m - y_r| / max(|y_r|, floor)` with
/// `floor = 1e-3 * max|y_r|`. Transfer (IDVG) curves are split: samples with
/// `|I_ref| < 1 µA` are compared on log10|I| (floor taken over those log
/// values), the rest linearly, and the two sub-errors are averaged with equal
/// weight. The metric is not symmetric in its arguments.
pub fn region_error(model: &DeviceCurve, reference: &DeviceCurve) -> Result<f64> {
    if model.kind != reference.kind
        || model.sweep.len() != reference.sweep.len()
        || model
            .sweep
            .iter()
            .zip(&reference.sweep)
            .any(|(a, b)| (a - b).abs() > GRID_TOL * (1.0 + b.abs()))
    {
        return Err(Error::Precondition(format!(
            "sweep grids differ ({} with {} points vs {} with {} points)",
            model.kind,
            model.sweep.len(),
            reference.kind,
            reference.sweep.len()
        )));
    }

    let pairs: Vec<(f64, f64)> = model.values.iter().copied().zip(reference.values.iter().copied()).collect();
    if !reference.kind.is_transfer() {
        return Ok(linear_error(&pairs, scale_floor(&pairs)));
    }

    let floor = scale_floor(&pairs);
    let (sub, above): (Vec<_>, Vec<_>) = pairs
        .iter()
        .partition(|(_, r)| r.abs() < SUBTHRESHOLD_CURRENT);
    let logs: Vec<(f64, f64)> = sub
        .iter()
        .map(|(m, r)| (m.abs().max(TINY).log10(), r.abs().max(TINY).log10()))
        .collect();
    let parts: Vec<f64> = [
        (!logs.is_empty()).then(|| linear_error(&logs, scale_floor(&logs))),
        (!above.is_empty()).then(|| linear_error(&above, floor)),
    ]
    .into_iter()
    .flatten()
    .collect();
    Ok(parts.iter().sum::<f64>() / parts.len() as f64)
}

fn scale_floor(pairs: &[(f64, f64)]) -> f64 {
    FLOOR_FRACTION * pairs.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max)
}

fn linear_error(pairs: &[(f64, f64)], floor: f64) -> f64 {
    let sum: f64 = pairs
        .iter()
        .map(|(m, r)| {
            let diff = (m - r).abs();
            if diff == 0.0 {
                0.0
            } else {
                diff / r.abs().max(floor).max(TINY)
            }
        })
        .sum();
    100.0 * sum / pairs.len() as f64
}
