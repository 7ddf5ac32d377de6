//! Closed-form reference solutions for the polynomial biobjective family.
//!
//! For dynamics `x' = u` and running cost `(P(x)·u, u)` the first cost
//! component is a perfect differential: along any trajectory it equals
//! `Q(x(T)) − Q(x0)` where `Q` is the antiderivative of `P`. The second is
//! the displacement `δ = x(T) − x0`, which relaxed controls sweep over a full
//! interval. The achievable outcomes therefore form the plane curve
//! `δ ↦ (Q(x0 + δ) − Q(x0), δ)`, and the true Pareto set is the set of
//! minimal points of that curve — computable to any accuracy by sampling.

use crate::pareto::{filter_planar, ParetoFront};
use crate::problem::ControlProblem;
use crate::{Error, Result};

/// Default sample count for the reference front: odd, so zero displacement
/// is hit exactly, and fine enough (spacing `1e-5`-ish) to be negligible next
/// to any grid error the solver produces.
pub const DEFAULT_CURVE_SAMPLES: usize = 200_001;

fn displacement_range(problem: &ControlProblem) -> (f64, f64) {
    let lo = problem
        .controls
        .iter()
        .map(|u| u[0])
        .fold(f64::INFINITY, f64::min);
    let hi = problem
        .controls
        .iter()
        .map(|u| u[0])
        .fold(f64::NEG_INFINITY, f64::max);
    (lo * problem.horizon, hi * problem.horizon)
}

/// Uniform samples of the achievable-outcome curve, flat `(cost, displacement)`
/// pairs in displacement order. Requires the polynomial family and at least
/// two samples.
pub fn objective_curve(problem: &ControlProblem, samples: usize) -> Result<Vec<f64>> {
    let integrand = problem.integrand().ok_or_else(|| {
        Error::Config("the analytic reference needs a polynomial-family problem".into())
    })?;
    if samples < 2 {
        return Err(Error::Config("need at least two curve samples".into()));
    }
    let q = integrand.antiderivative();
    let x0 = problem.x0[0];
    let base = q.eval(x0);
    let (lo, hi) = displacement_range(problem);
    let mut flat = Vec::with_capacity(samples * 2);
    for k in 0..samples {
        let delta = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        flat.push(q.eval(x0 + delta) - base);
        flat.push(delta);
    }
    Ok(flat)
}

/// Reference Pareto front: minimal points of a dense sample of the
/// achievable-outcome curve. At least 1000 samples are required so the
/// sampling error stays well under any lattice step the solver can use.
pub fn analytic_front(problem: &ControlProblem, samples: usize) -> Result<ParetoFront<f64>> {
    if samples < 1000 {
        return Err(Error::DensityGuard(samples, 1000));
    }
    filter_planar(&objective_curve(problem, samples)?)
}

/// [`analytic_front`] at the default sample count.
pub fn analytic_front_default(problem: &ControlProblem) -> Result<ParetoFront<f64>> {
    analytic_front(problem, DEFAULT_CURVE_SAMPLES)
}
