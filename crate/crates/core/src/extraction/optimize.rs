//! Box-constrained Nelder-Mead.
//!
//! The simplex lives in logit space, `x = lo + (hi - lo) * sigmoid(z)`, so
//! every trial point is feasible. Coefficients follow the dimension-adaptive
//! scheme of Gao and Han (2012) for n > 2 and the classic values below.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::dual::logistic;

/// Clamp applied before taking the logit of a point on a bound.
const EDGE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    /// Iteration budget per restart.
    pub max_iterations: usize,
    /// Number of runs: the start point plus `restarts - 1` jittered starts.
    pub restarts: usize,
    /// Stop when the simplex objective spread falls below
    /// `rel_tol * |f_best|`.
    pub rel_tol: f64,
    /// Edge length of the initial simplex in logit units.
    pub initial_step: f64,
    /// Half-width of the uniform logit-space jitter used for restarts.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            max_iterations: 2000,
            restarts: 3,
            rel_tol: 1e-6,
            initial_step: 0.5,
            jitter: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub f_initial: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

struct Problem<'a, F> {
    objective: &'a F,
    bounds: &'a [(f64, f64)],
    best_x: Vec<f64>,
    best_f: f64,
    evaluations: usize,
}

impl<F: Fn(&[f64]) -> f64> Problem<'_, F> {
    fn to_x(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.bounds)
            .map(|(&z, &(lo, hi))| (lo + (hi - lo) * logistic(z)).clamp(lo, hi))
            .collect()
    }

    fn to_z(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.bounds)
            .map(|(&x, &(lo, hi))| {
                let t = ((x - lo) / (hi - lo)).clamp(EDGE, 1.0 - EDGE);
                (t / (1.0 - t)).ln()
            })
            .collect()
    }

    fn eval(&mut self, z: &[f64]) -> f64 {
        let x = self.to_x(z);
        let f = (self.objective)(&x);
        self.evaluations += 1;
        let f = if f.is_nan() { f64::INFINITY } else { f };
        if f < self.best_f {
            self.best_f = f;
            self.best_x = x;
        }
        f
    }
}

/// Minimize `objective` over the box `bounds` starting from `x0`.
///
/// The returned point is never worse than `x0`: if no trial point improves
/// strictly, `x0` itself is returned. NaN objective values away from the
/// start are treated as `+inf`.
pub fn optimize<F>(objective: F, bounds: &[(f64, f64)], x0: &[f64], opts: &OptimizeOptions) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> f64,
{
    if opts.max_iterations == 0 || opts.restarts == 0 {
        return Err(Error::Precondition("optimizer budget must be at least one iteration".into()));
    }
    if bounds.len() != x0.len() {
        return Err(Error::Precondition(format!(
            "{} bounds for a {}-dimensional start point",
            bounds.len(),
            x0.len()
        )));
    }
    for (i, (&x, &(lo, hi))) in x0.iter().zip(bounds).enumerate() {
        if !(lo < hi) || !(lo..=hi).contains(&x) {
            return Err(Error::Precondition(format!(
                "coordinate {i}: start {x} not inside bounds [{lo}, {hi}]"
            )));
        }
    }
    let f0 = objective(x0);
    if !f0.is_finite() {
        return Err(Error::Numeric(format!("objective is {f0} at the initial point")));
    }

    let mut prob = Problem {
        objective: &objective,
        bounds,
        best_x: x0.to_vec(),
        best_f: f0,
        evaluations: 1,
    };
    let mut iterations = 0;
    if !x0.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for run in 0..opts.restarts {
            let mut z = prob.to_z(&prob.best_x);
            if run > 0 {
                for zi in &mut z {
                    *zi += rng.random_range(-opts.jitter..=opts.jitter);
                }
            }
            iterations += nelder_mead(&mut prob, z, opts);
        }
    }
    Ok(OptimizeResult {
        x: prob.best_x,
        f: prob.best_f,
        f_initial: f0,
        iterations,
        evaluations: prob.evaluations,
    })
}

fn nelder_mead<F: Fn(&[f64]) -> f64>(prob: &mut Problem<'_, F>, z0: Vec<f64>, opts: &OptimizeOptions) -> usize {
    let n = z0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n > 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f = prob.eval(&z0);
    simplex.push((z0.clone(), f));
    for i in 0..n {
        let mut z = z0.clone();
        z[i] += opts.initial_step;
        let f = prob.eval(&z);
        simplex.push((z, f));
    }

    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        // a + t*(b - a)
        a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect()
    };

    let mut iter = 0;
    while iter < opts.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_lo = simplex[0].1;
        let f_hi = simplex[n].1;
        if f_hi - f_lo <= opts.rel_tol * f_lo.abs() + 1e-300 {
            break;
        }
        iter += 1;

        let mut c = vec![0.0; n];
        for (z, _) in &simplex[..n] {
            for (ci, zi) in c.iter_mut().zip(z) {
                *ci += zi / nf;
            }
        }
        let worst = simplex[n].0.clone();
        let f_second = simplex[n - 1].1;

        let zr = lerp(&c, &worst, -alpha);
        let fr = prob.eval(&zr);
        if fr < f_lo {
            let ze = lerp(&c, &worst, -beta);
            let fe = prob.eval(&ze);
            simplex[n] = if fe < fr { (ze, fe) } else { (zr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (zr, fr);
            continue;
        }
        let (zc, fc) = if fr < f_hi {
            let zc = lerp(&c, &zr, gamma);
            let fc = prob.eval(&zc);
            (zc, fc)
        } else {
            let zc = lerp(&c, &worst, gamma);
            let fc = prob.eval(&zc);
            (zc, fc)
        };
        if fc < fr.min(f_hi) {
            simplex[n] = (zc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let z = lerp(&best, &vertex.0, delta);
            let f = prob.eval(&z);
            *vertex = (z, f);
        }
    }
    iter
}
