//! Three-stage compact-model parameter extraction.
//!
//! 1. `low_drain`: subthreshold and mobility terms against IDVG at
//!    |vds| = 0.05 V.
//! 2. `high_drain`: threshold, DIBL, velocity saturation and output
//!    conductance against IDVG at |vds| = 1 V plus the IDVD family.
//! 3. `capacitance`: C-V terms, with a ±10% fine-tune window on the
//!    parameters handed forward from the DC stages.
//!
//! Every stage starts from the previous stage's output, so U0, UA, DVT0 and
//! DVT1 fitted in stage 1 seed stage 2 and are fine-tuned again in stage 3.

mod bounds;
mod optimize;

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::curves::{region_error, CharacterizationSet, CurveKind};
use crate::error::{Error, Result};
use crate::model::{ModelConstants, ModelParams, ParamName};
use crate::types::{Polarity, Variant};

pub use bounds::{Bound, ParamBounds};
pub use optimize::{optimize, OptimizeOptions, OptimizeResult};

/// Relative half-width of the stage-3 fine-tune window.
pub const FINE_TUNE_WINDOW: f64 = 0.10;

/// Fraction of a box width within which a fitted value counts as pinned.
const PIN_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageName {
    LowDrain,
    HighDrain,
    Capacitance,
}

impl StageName {
    pub fn as_str(self) -> &'static str {
        match self {
            StageName::LowDrain => "low_drain",
            StageName::HighDrain => "high_drain",
            StageName::Capacitance => "capacitance",
        }
    }
}

impl fmt::Display for StageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionStage {
    pub name: StageName,
    /// Parameters optimized over their full bounds.
    pub free_params: Vec<ParamName>,
    /// Previously fitted parameters re-optimized inside
    /// ±[`FINE_TUNE_WINDOW`] of their incoming values.
    pub fine_tune: Vec<ParamName>,
    pub target_kinds: Vec<CurveKind>,
    /// Parameters whose fitted values later stages re-optimize.
    pub carry_forward: Vec<ParamName>,
}

impl ExtractionStage {
    pub fn low_drain() -> Self {
        use ParamName::*;
        ExtractionStage {
            name: StageName::LowDrain,
            free_params: vec![Cdsc, U0, Ua, Ub, Ud, Ucs, Dvt0, Dvt1],
            fine_tune: vec![],
            target_kinds: vec![CurveKind::IdvgLow],
            carry_forward: vec![U0, Ua, Dvt0, Dvt1],
        }
    }

    pub fn high_drain() -> Self {
        use ParamName::*;
        ExtractionStage {
            name: StageName::HighDrain,
            free_params: vec![Cdsc, Cdscd, U0, Ua, Vth0, Pvag, Dvt0, Dvt1, Etab, Vsat],
            fine_tune: vec![],
            target_kinds: vec![CurveKind::IdvgHigh, CurveKind::Idvd],
            carry_forward: vec![U0, Ua, Dvt0, Dvt1],
        }
    }

    /// The DC kinds stay in the objective because the fine-tuned parameters
    /// move the I-V curves as well.
    pub fn capacitance() -> Self {
        use ParamName::*;
        ExtractionStage {
            name: StageName::Capacitance,
            free_params: vec![Ckappa, Delvt, Cf, Cgso, Cgdo, Moin, Cgsl, Cgdl],
            fine_tune: vec![U0, Ua, Dvt0, Dvt1, Vth0],
            target_kinds: vec![CurveKind::Cv, CurveKind::IdvgLow, CurveKind::IdvgHigh, CurveKind::Idvd],
            carry_forward: vec![],
        }
    }

    pub fn standard() -> [ExtractionStage; 3] {
        [Self::low_drain(), Self::high_drain(), Self::capacitance()]
    }
}

/// Percent errors per characterization region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionErrors {
    /// Mean of the IDVG_LOW and IDVG_HIGH errors.
    pub idvg: f64,
    /// Mean over the four IDVD curves.
    pub idvd: f64,
    pub cv: f64,
}

impl RegionErrors {
    pub fn compute(params: &ModelParams, consts: &ModelConstants, target: &CharacterizationSet) -> Result<Self> {
        let low = kind_error(params, consts, target, CurveKind::IdvgLow)?;
        let high = kind_error(params, consts, target, CurveKind::IdvgHigh)?;
        Ok(RegionErrors {
            idvg: 0.5 * (low + high),
            idvd: kind_error(params, consts, target, CurveKind::Idvd)?,
            cv: kind_error(params, consts, target, CurveKind::Cv)?,
        })
    }

    pub fn max(&self) -> f64 {
        self.idvg.max(self.idvd).max(self.cv)
    }

    pub fn total(&self) -> f64 {
        self.idvg + self.idvd + self.cv
    }
}

/// Mean region error over the target curves of one kind.
pub fn kind_error(
    params: &ModelParams,
    consts: &ModelConstants,
    target: &CharacterizationSet,
    kind: CurveKind,
) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0;
    for reference in target.of_kind(kind) {
        sum += region_error(&reference.model_curve(params, consts)?, reference)?;
        n += 1;
    }
    Ok(sum / n as f64)
}

/// Stage objective: sum of per-kind errors over `kinds`.
pub fn stage_objective(
    params: &ModelParams,
    consts: &ModelConstants,
    target: &CharacterizationSet,
    kinds: &[CurveKind],
) -> Result<f64> {
    params.validate()?;
    kinds.iter().map(|&k| kind_error(params, consts, target, k)).sum()
}

/// Sum of the three reported region errors.
pub fn total_objective(params: &ModelParams, consts: &ModelConstants, target: &CharacterizationSet) -> Result<f64> {
    Ok(RegionErrors::compute(params, consts, target)?.total())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOutcome {
    pub stage: StageName,
    pub objective_before: f64,
    pub objective_after: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub warnings: Vec<String>,
}

/// Run one stage from `current`, returning the updated parameters and the
/// stage diagnostics. Only the stage's free and fine-tune entries change.
pub fn run_stage(
    stage: &ExtractionStage,
    current: &ModelParams,
    consts: &ModelConstants,
    bounds: &ParamBounds,
    target: &CharacterizationSet,
    opts: &OptimizeOptions,
) -> Result<(ModelParams, StageOutcome)> {
    let stage_err = |message: String| Error::Extraction {
        stage: stage.name.to_string(),
        message,
    };
    if current.polarity != target.polarity {
        return Err(Error::Precondition(format!(
            "{}-type parameters for a {}-type target",
            current.polarity, target.polarity
        )));
    }
    current.validate()?;
    let objective_before =
        stage_objective(current, consts, target, &stage.target_kinds).map_err(|e| stage_err(e.to_string()))?;

    let mut names = Vec::new();
    let mut boxes = Vec::new();
    for &name in &stage.free_params {
        let b = bounds.get(name);
        names.push(name);
        boxes.push((b.lower, b.upper));
    }
    for &name in &stage.fine_tune {
        if stage.free_params.contains(&name) {
            continue;
        }
        let v = current.get(name);
        let b = bounds.get(name);
        let lo = (v - FINE_TUNE_WINDOW * v.abs()).max(b.lower);
        let hi = (v + FINE_TUNE_WINDOW * v.abs()).min(b.upper);
        if lo < hi {
            names.push(name);
            boxes.push((lo, hi));
        }
    }
    let x0: Vec<f64> = names
        .iter()
        .zip(&boxes)
        .map(|(&n, &(lo, hi))| current.get(n).clamp(lo, hi))
        .collect();

    let with = |x: &[f64]| {
        let mut p = current.clone();
        for (&n, &v) in names.iter().zip(x) {
            p.set(n, v);
        }
        p
    };
    let objective = |x: &[f64]| stage_objective(&with(x), consts, target, &stage.target_kinds).unwrap_or(f64::NAN);

    let result = optimize(objective, &boxes, &x0, opts).map_err(|e| stage_err(e.to_string()))?;
    let (params, objective_after) = if result.f <= objective_before {
        (with(&result.x), result.f)
    } else {
        (current.clone(), objective_before)
    };

    let mut warnings = Vec::new();
    for &name in &stage.free_params {
        let b = bounds.get(name);
        let v = params.get(name);
        let tol = PIN_TOLERANCE * (b.upper - b.lower);
        let side = if v - b.lower <= tol {
            Some(("lower", b.lower))
        } else if b.upper - v <= tol {
            Some(("upper", b.upper))
        } else {
            None
        };
        if let Some((side, edge)) = side {
            let msg = format!("{}: {name} = {v:e} pinned at {side} bound {edge:e}", stage.name);
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }

    let outcome = StageOutcome {
        stage: stage.name,
        objective_before,
        objective_after,
        iterations: result.iterations,
        evaluations: result.evaluations,
        warnings,
    };
    Ok((params, outcome))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub variant: Variant,
    pub polarity: Polarity,
    pub seed: u64,
    pub fitted: ModelParams,
    pub errors: RegionErrors,
    pub stages: Vec<StageOutcome>,
    pub warnings: Vec<String>,
    /// Not serialized so that reports are byte-identical across runs.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExtractionReport {
    /// Every region below `limit` percent.
    pub fn passes(&self, limit: f64) -> bool {
        self.errors.max() < limit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtractOptions {
    pub seed: u64,
    pub optimizer: OptimizeOptions,
}


/// Run the three stages in order, starting from the initial values in
/// `bounds`.
pub fn extract(
    target: &CharacterizationSet,
    bounds: &ParamBounds,
    consts: &ModelConstants,
    opts: &ExtractOptions,
) -> Result<ExtractionReport> {
    let start = Instant::now();
    consts.validate()?;
    let mut params = bounds.initial_params(target.polarity);
    let mut stages = Vec::new();
    let mut warnings = Vec::new();
    for (i, stage) in ExtractionStage::standard().iter().enumerate() {
        let stage_opts = OptimizeOptions {
            seed: opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64),
            ..opts.optimizer
        };
        let (next, outcome) = run_stage(stage, &params, consts, bounds, target, &stage_opts)?;
        log::info!(
            "{} {} {}: objective {:.4} -> {:.4} in {} iterations",
            target.variant,
            target.polarity,
            stage.name,
            outcome.objective_before,
            outcome.objective_after,
            outcome.iterations
        );
        warnings.extend(outcome.warnings.iter().cloned());
        stages.push(outcome);
        params = next;
    }
    let errors = RegionErrors::compute(&params, consts, target)?;
    Ok(ExtractionReport {
        variant: target.variant,
        polarity: target.polarity,
        seed: opts.seed,
        fitted: params,
        errors,
        stages,
        warnings,
        wall_time: start.elapsed(),
    })
}
