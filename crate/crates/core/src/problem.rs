//! Problem descriptions for the solver.
//!
//! The primary family is the scalar-state, two-objective benchmark: dynamics
//! `x' = u` with a finite control set, running cost `L(x, u) = (P(x)·u, u)`
//! for a polynomial `P`, and a fixed horizon. Four presets (`moc1`–`moc4`)
//! are built in and the same family can be loaded from a small JSON config.
//! Arbitrary problems can be constructed programmatically via
//! [`ProblemKind::Custom`]; those lose the closed-form constant estimates and
//! the analytic reference front.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Dense univariate polynomial, coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Build from ascending-degree coefficients; trailing zero coefficients are
    /// trimmed so equal polynomials compare equal.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::new(vec![0.0]);
        }
        Polynomial::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, &c)| c * (k + 1) as f64)
                .collect(),
        )
    }

    /// Antiderivative with zero constant term, so `Q(0) = 0`.
    pub fn antiderivative(&self) -> Polynomial {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k + 1) as f64),
        );
        Polynomial::new(coeffs)
    }

    /// Real roots inside `[lo, hi]` for degree ≤ 2; `None` for higher degrees.
    fn low_degree_roots_in(&self, lo: f64, hi: f64) -> Option<Vec<f64>> {
        let within = |r: f64| r >= lo && r <= hi;
        match self.coeffs.len() {
            1 => Some(Vec::new()),
            2 => {
                let (c0, c1) = (self.coeffs[0], self.coeffs[1]);
                let r = -c0 / c1;
                Some(if within(r) { vec![r] } else { Vec::new() })
            }
            3 => {
                let (c0, c1, c2) = (self.coeffs[0], self.coeffs[1], self.coeffs[2]);
                let disc = c1 * c1 - 4.0 * c2 * c0;
                if disc < 0.0 {
                    return Some(Vec::new());
                }
                let s = disc.sqrt();
                Some(
                    [(-c1 - s) / (2.0 * c2), (-c1 + s) / (2.0 * c2)]
                        .into_iter()
                        .filter(|&r| within(r))
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Maximum of `|P|` over `[lo, hi]`. Exact (endpoints + critical points)
    /// when the derivative has degree ≤ 2, which covers every built-in
    /// problem; otherwise dense sampling with a 10% safety factor.
    pub fn max_abs_on(&self, lo: f64, hi: f64) -> f64 {
        assert!(lo <= hi, "empty interval");
        let deriv = self.derivative();
        if let Some(roots) = deriv.low_degree_roots_in(lo, hi) {
            let mut best = self.eval(lo).abs().max(self.eval(hi).abs());
            for r in roots {
                best = best.max(self.eval(r).abs());
            }
            best
        } else {
            let samples = 8193;
            let mut best = 0.0f64;
            for k in 0..samples {
                let x = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
                best = best.max(self.eval(x).abs());
            }
            best * 1.1
        }
    }
}

/// Dynamics and running cost of one control at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlEval {
    pub velocity: Vec<f64>,
    pub cost: Vec<f64>,
}

/// Bounds and Lipschitz constants of the right-hand sides over a state box.
/// Upper estimates are always safe; the solver's widening margins grow with
/// them but correctness does not depend on tightness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// Lipschitz constant of `f(·, u)` in the state, uniform over controls.
    pub dynamics_lipschitz: f64,
    /// Lipschitz constant of `L(·, u)` in the state, uniform over controls
    /// and taken over cost components.
    pub cost_lipschitz: f64,
    /// Bound on `|f|∞` over the box and controls.
    pub dynamics_bound: f64,
    /// Bound on `|L|∞` over the box and controls.
    pub cost_bound: f64,
}

/// The right-hand sides of a problem.
#[derive(Clone)]
pub enum ProblemKind {
    /// `x' = u`, `L = (P(x)·u, u)` — the built-in biobjective family.
    PolynomialBiobjective { integrand: Polynomial },
    /// Arbitrary evaluators. `constants`, when given, are trusted upper
    /// estimates used instead of sampling.
    Custom {
        dynamics: Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>,
        running_cost: Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>,
        constants: Option<Constants>,
    },
}

impl fmt::Debug for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemKind::PolynomialBiobjective { integrand } => f
                .debug_struct("PolynomialBiobjective")
                .field("integrand", integrand)
                .finish(),
            ProblemKind::Custom { constants, .. } => f
                .debug_struct("Custom")
                .field("constants", constants)
                .finish_non_exhaustive(),
        }
    }
}

/// A finite-horizon multiobjective control problem over a finite control set.
#[derive(Debug, Clone)]
pub struct ControlProblem {
    pub name: String,
    pub horizon: f64,
    pub x0: Vec<f64>,
    /// Finite control sample; order is preserved in every enumeration.
    pub controls: Vec<Vec<f64>>,
    pub state_dim: usize,
    pub cost_dim: usize,
    kind: ProblemKind,
}

/// JSON document describing a polynomial biobjective problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: String,
    pub kind: String,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub x0: f64,
    pub controls: Vec<f64>,
    /// Ascending-degree coefficients of `P`.
    #[serde(rename = "P")]
    pub integrand: Vec<f64>,
}

pub const POLYNOMIAL_BIOBJECTIVE: &str = "polynomial_biobjective";
pub const PRESET_NAMES: [&str; 4] = ["moc1", "moc2", "moc3", "moc4"];

impl ControlProblem {
    /// Construct a problem of the polynomial biobjective family.
    pub fn polynomial_biobjective(
        name: &str,
        horizon: f64,
        x0: f64,
        controls: &[f64],
        integrand: Polynomial,
    ) -> Result<Self> {
        let prob = ControlProblem {
            name: name.to_string(),
            horizon,
            x0: vec![x0],
            controls: controls.iter().map(|&u| vec![u]).collect(),
            state_dim: 1,
            cost_dim: 2,
            kind: ProblemKind::PolynomialBiobjective { integrand },
        };
        prob.validate()?;
        Ok(prob)
    }

    /// Construct from arbitrary evaluators.
    pub fn custom(
        name: &str,
        horizon: f64,
        x0: Vec<f64>,
        controls: Vec<Vec<f64>>,
        cost_dim: usize,
        kind: ProblemKind,
    ) -> Result<Self> {
        let state_dim = x0.len();
        let prob = ControlProblem {
            name: name.to_string(),
            horizon,
            x0,
            controls,
            state_dim,
            cost_dim,
            kind,
        };
        prob.validate()?;
        Ok(prob)
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config("horizon must be positive and finite".into()));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("x0 must be finite".into()));
        }
        if self.controls.is_empty() {
            return Err(Error::Config("controls must be nonempty".into()));
        }
        if self
            .controls
            .iter()
            .any(|u| u.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Config("controls must be finite".into()));
        }
        if self.state_dim == 0 || self.cost_dim == 0 {
            return Err(Error::Config("state and cost dimensions must be ≥ 1".into()));
        }
        if let ProblemKind::PolynomialBiobjective { integrand } = &self.kind {
            if integrand.coeffs().iter().any(|c| !c.is_finite()) {
                return Err(Error::Config("P coefficients must be finite".into()));
            }
            if self.state_dim != 1 || self.cost_dim != 2 {
                return Err(Error::Config(
                    "polynomial_biobjective problems have state_dim 1 and cost_dim 2".into(),
                ));
            }
        }
        Ok(())
    }

    /// One of the four built-in benchmark problems.
    pub fn preset(name: &str) -> Result<Self> {
        let (x0, coeffs): (f64, Vec<f64>) = match name {
            "moc1" => (1.0, vec![-1.0, 1.0]),
            "moc2" => (1.5, vec![1.0, -1.0]),
            "moc3" => (0.0, vec![0.2, 2.0 / 75.0, -3.75, -2.0]),
            "moc4" => (0.0, vec![-0.125, -1.5]),
            other => return Err(Error::UnknownPreset(other.to_string())),
        };
        ControlProblem::polynomial_biobjective(name, 0.5, x0, &[-1.0, 1.0], Polynomial::new(coeffs))
    }

    /// Load from a preset name or a JSON config file path.
    pub fn load(source: &str) -> Result<Self> {
        if PRESET_NAMES.contains(&source) {
            return ControlProblem::preset(source);
        }
        let text = std::fs::read_to_string(source).map_err(|e| {
            Error::Config(format!("`{source}` is neither a preset name nor a readable file: {e}"))
        })?;
        ControlProblem::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ProblemConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        ControlProblem::from_config(&cfg)
    }

    pub fn from_config(cfg: &ProblemConfig) -> Result<Self> {
        if cfg.kind != POLYNOMIAL_BIOBJECTIVE {
            return Err(Error::Config(format!(
                "unknown kind `{}` (supported: {POLYNOMIAL_BIOBJECTIVE})",
                cfg.kind
            )));
        }
        if cfg.integrand.is_empty() {
            return Err(Error::Config("P must have at least one coefficient".into()));
        }
        if cfg.name.is_empty() {
            return Err(Error::Config("name must be nonempty".into()));
        }
        ControlProblem::polynomial_biobjective(
            &cfg.name,
            cfg.horizon,
            cfg.x0,
            &cfg.controls,
            Polynomial::new(cfg.integrand.clone()),
        )
    }

    /// The config document for a polynomial-family problem (round-trips with
    /// [`ControlProblem::from_config`]). Custom problems are not representable.
    pub fn to_config(&self) -> Result<ProblemConfig> {
        match &self.kind {
            ProblemKind::PolynomialBiobjective { integrand } => Ok(ProblemConfig {
                name: self.name.clone(),
                kind: POLYNOMIAL_BIOBJECTIVE.to_string(),
                horizon: self.horizon,
                x0: self.x0[0],
                controls: self.controls.iter().map(|u| u[0]).collect(),
                integrand: integrand.coeffs().to_vec(),
            }),
            ProblemKind::Custom { .. } => {
                Err(Error::Config("custom problems have no config representation".into()))
            }
        }
    }

    /// The polynomial `P` when this is a polynomial-family problem.
    pub fn integrand(&self) -> Option<&Polynomial> {
        match &self.kind {
            ProblemKind::PolynomialBiobjective { integrand } => Some(integrand),
            ProblemKind::Custom { .. } => None,
        }
    }

    pub fn dynamics(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        match &self.kind {
            ProblemKind::PolynomialBiobjective { .. } => vec![u[0]],
            ProblemKind::Custom { dynamics, .. } => dynamics(x, u),
        }
    }

    pub fn running_cost(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        match &self.kind {
            ProblemKind::PolynomialBiobjective { integrand } => {
                vec![integrand.eval(x[0]) * u[0], u[0]]
            }
            ProblemKind::Custom { running_cost, .. } => running_cost(x, u),
        }
    }

    /// Velocity/cost pairs of every control at `x`, in control order.
    pub fn eval_controls(&self, x: &[f64]) -> Vec<ControlEval> {
        self.controls
            .iter()
            .map(|u| ControlEval {
                velocity: self.dynamics(x, u),
                cost: self.running_cost(x, u),
            })
            .collect()
    }

    /// Velocity/cost pairs densified along the polyline between consecutive
    /// controls: convex combinations of neighbouring pairs are inserted until
    /// consecutive velocities are at most `max_velocity_gap` apart (sup norm).
    /// For two controls this samples the segment joining their pairs — the
    /// convex hull the continuous-time theory closes over. Vertices are always
    /// included; with a single control this is just [`Self::eval_controls`].
    pub fn eval_controls_dense(&self, x: &[f64], max_velocity_gap: f64) -> Vec<ControlEval> {
        assert!(max_velocity_gap > 0.0, "velocity gap must be positive");
        let vertices = self.eval_controls(x);
        if vertices.len() < 2 {
            return vertices;
        }
        let mut out = Vec::new();
        for w in vertices.windows(2) {
            let gap = w[0]
                .velocity
                .iter()
                .zip(&w[1].velocity)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let pieces = (gap / max_velocity_gap).ceil().max(1.0) as usize;
            for s in 0..pieces {
                let t = s as f64 / pieces as f64;
                let lerp = |a: &[f64], b: &[f64]| -> Vec<f64> {
                    a.iter().zip(b).map(|(&p, &q)| p + (q - p) * t).collect()
                };
                out.push(ControlEval {
                    velocity: lerp(&w[0].velocity, &w[1].velocity),
                    cost: lerp(&w[0].cost, &w[1].cost),
                });
            }
        }
        out.push(vertices.last().unwrap().clone());
        out
    }

    fn max_control_norm(&self) -> f64 {
        self.controls
            .iter()
            .flat_map(|u| u.iter().map(|v| v.abs()))
            .fold(0.0, f64::max)
    }

    /// Bounds and Lipschitz constants over a state box (one `(lo, hi)` pair
    /// per state axis). Exact for the polynomial family; declared or sampled
    /// (with a 10% safety factor) for custom problems.
    pub fn constants(&self, state_box: &[(f64, f64)]) -> Constants {
        assert_eq!(state_box.len(), self.state_dim);
        match &self.kind {
            ProblemKind::PolynomialBiobjective { integrand } => {
                let (lo, hi) = state_box[0];
                let u_max = self.max_control_norm();
                let p_max = integrand.max_abs_on(lo, hi);
                let dp_max = integrand.derivative().max_abs_on(lo, hi);
                Constants {
                    dynamics_lipschitz: 0.0,
                    cost_lipschitz: dp_max * u_max,
                    dynamics_bound: u_max,
                    cost_bound: (p_max * u_max).max(u_max),
                }
            }
            ProblemKind::Custom { constants: Some(c), .. } => *c,
            ProblemKind::Custom { .. } => self.sampled_constants(state_box),
        }
    }

    fn sampled_constants(&self, state_box: &[(f64, f64)]) -> Constants {
        let per_axis = if self.state_dim == 1 { 2001 } else { 65 };
        let axis_points: Vec<Vec<f64>> = state_box
            .iter()
            .map(|&(lo, hi)| {
                (0..per_axis)
                    .map(|k| lo + (hi - lo) * k as f64 / (per_axis - 1) as f64)
                    .collect()
            })
            .collect();
        let mut states = vec![vec![]];
        for axis in &axis_points {
            let mut next = Vec::with_capacity(states.len() * axis.len());
            for s in &states {
                for &v in axis {
                    let mut t = s.clone();
                    t.push(v);
                    next.push(t);
                }
            }
            states = next;
        }
        let sup = |vals: &[f64]| vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let mut m_f = 0.0f64;
        let mut m_l = 0.0f64;
        let mut k_f = 0.0f64;
        let mut k_l = 0.0f64;
        for u in &self.controls {
            let mut prev: Option<(Vec<f64>, Vec<f64>, Vec<f64>)> = None;
            for x in &states {
                let f = self.dynamics(x, u);
                let l = self.running_cost(x, u);
                m_f = m_f.max(sup(&f));
                m_l = m_l.max(sup(&l));
                if let Some((px, pf, pl)) = &prev {
                    let dx = x
                        .iter()
                        .zip(px)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max);
                    if dx > 0.0 {
                        let df = f
                            .iter()
                            .zip(pf)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0f64, f64::max);
                        let dl = l
                            .iter()
                            .zip(pl)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0f64, f64::max);
                        k_f = k_f.max(df / dx);
                        k_l = k_l.max(dl / dx);
                    }
                }
                prev = Some((x.clone(), f, l));
            }
        }
        Constants {
            dynamics_lipschitz: k_f * 1.1,
            cost_lipschitz: k_l * 1.1,
            dynamics_bound: m_f * 1.1,
            cost_bound: m_l * 1.1,
        }
    }

    /// Default state box: reachable set of the horizon plus a unit margin.
    pub fn default_domain_box(&self) -> Vec<(f64, f64)> {
        let m_f = match &self.kind {
            ProblemKind::PolynomialBiobjective { .. } => self.max_control_norm(),
            ProblemKind::Custom { constants: Some(c), .. } => c.dynamics_bound,
            ProblemKind::Custom { .. } => {
                let wide: Vec<(f64, f64)> = self
                    .x0
                    .iter()
                    .map(|&c| (c - 4.0 * self.horizon - 2.0, c + 4.0 * self.horizon + 2.0))
                    .collect();
                self.sampled_constants(&wide).dynamics_bound
            }
        };
        self.x0
            .iter()
            .map(|&c| (c - m_f * self.horizon - 1.0, c + m_f * self.horizon + 1.0))
            .collect()
    }

    /// The same problem with the running cost truncated to its first
    /// `cost_dim` components. Constants are inherited from this problem (still
    /// valid upper bounds), so grid plans are unchanged.
    pub fn truncate_costs(&self, cost_dim: usize) -> Result<Self> {
        if cost_dim == 0 || cost_dim > self.cost_dim {
            return Err(Error::DimensionMismatch { expected: self.cost_dim, got: cost_dim });
        }
        if cost_dim == self.cost_dim {
            return Ok(self.clone());
        }
        let inherited = self.constants(&self.default_domain_box());
        let inner = self.clone();
        let inner_cost = self.clone();
        ControlProblem::custom(
            &format!("{}_p{}", self.name, cost_dim),
            self.horizon,
            self.x0.clone(),
            self.controls.clone(),
            cost_dim,
            ProblemKind::Custom {
                dynamics: Arc::new(move |x, u| inner.dynamics(x, u)),
                running_cost: Arc::new(move |x, u| {
                    let mut l = inner_cost.running_cost(x, u);
                    l.truncate(cost_dim);
                    l
                }),
                constants: Some(inherited),
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_eval_examples() {
        // P = x − 1
        let p = Polynomial::new(vec![-1.0, 1.0]);
        assert_eq!(p.eval(1.0), 0.0);
        assert_eq!(p.eval(0.0), -1.0);
        // MOC4 integrand at 0.
        let p4 = Polynomial::new(vec![-0.125, -1.5]);
        assert_eq!(p4.eval(0.0), -0.125);
        // Degree trimming.
        assert_eq!(Polynomial::new(vec![1.0, 2.0, 0.0]).degree(), 1);
        assert_eq!(Polynomial::new(vec![]).eval(3.0), 0.0);
    }

    #[test]
    fn antiderivative_matches_difference_quotient() {
        for name in PRESET_NAMES {
            let prob = ControlProblem::preset(name).unwrap();
            let p = prob.integrand().unwrap();
            let q = p.antiderivative();
            assert_eq!(q.eval(0.0), 0.0);
            let eps = 1e-6;
            for k in 0..100 {
                let x = -2.0 + 4.0 * k as f64 / 99.0;
                let numeric = (q.eval(x + eps) - q.eval(x - eps)) / (2.0 * eps);
                assert!(
                    (numeric - p.eval(x)).abs() < 1e-5,
                    "{name}: dQ/dx vs P at {x}: {numeric} vs {}",
                    p.eval(x)
                );
            }
        }
    }

    #[test]
    fn presets_match_their_definitions() {
        let m1 = ControlProblem::preset("moc1").unwrap();
        assert_eq!(m1.x0, vec![1.0]);
        assert_eq!(m1.horizon, 0.5);
        assert_eq!(m1.controls, vec![vec![-1.0], vec![1.0]]);
        assert_eq!(m1.integrand().unwrap().coeffs(), &[-1.0, 1.0]);

        let m2 = ControlProblem::preset("moc2").unwrap();
        assert_eq!(m2.x0, vec![1.5]);
        assert_eq!(m2.integrand().unwrap().eval(1.0), 0.0);

        let m3 = ControlProblem::preset("moc3").unwrap();
        assert_eq!(m3.integrand().unwrap().eval(0.0), 0.2);

        assert!(matches!(
            ControlProblem::preset("moc9"),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn control_evaluations_in_control_order() {
        let m1 = ControlProblem::preset("moc1").unwrap();
        let evals = m1.eval_controls(&[1.0]);
        assert_eq!(evals.len(), 2);
        // P(1) = 0, so costs are (0, ∓1).
        assert_eq!(evals[0].velocity, vec![-1.0]);
        assert_eq!(evals[0].cost, vec![0.0, -1.0]);
        assert_eq!(evals[1].velocity, vec![1.0]);
        assert_eq!(evals[1].cost, vec![0.0, 1.0]);

        let m4 = ControlProblem::preset("moc4").unwrap();
        let evals = m4.eval_controls(&[0.0]);
        assert_eq!(evals[1].cost, vec![-0.125, 1.0]);
        assert_eq!(evals[0].cost, vec![0.125, -1.0]);
    }

    #[test]
    fn dense_evaluations_cover_the_segment() {
        let m1 = ControlProblem::preset("moc1").unwrap();
        let dense = m1.eval_controls_dense(&[1.0], 0.25);
        // Velocities −1..1 at spacing ≤ 0.25: exactly 9 samples.
        assert_eq!(dense.len(), 9);
        assert_eq!(dense.first().unwrap().velocity, vec![-1.0]);
        assert_eq!(dense.last().unwrap().velocity, vec![1.0]);
        for w in dense.windows(2) {
            assert!((w[0].velocity[0] - w[1].velocity[0]).abs() <= 0.25 + 1e-12);
        }
        // Interpolated pairs stay on the segment: for MOC1 cost = (P(x)u, u) is
        // linear in u, so cost[1] equals the velocity.
        for e in &dense {
            assert!((e.cost[1] - e.velocity[0]).abs() < 1e-12);
        }

        // A single control has nothing to densify.
        let single = ControlProblem::polynomial_biobjective(
            "one",
            0.5,
            1.0,
            &[1.0],
            Polynomial::new(vec![-1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(single.eval_controls_dense(&[1.0], 0.01).len(), 1);
    }

    #[test]
    fn constants_exact_for_polynomial_family() {
        let m1 = ControlProblem::preset("moc1").unwrap();
        let c = m1.constants(&[(0.0, 2.0)]);
        assert_eq!(c.dynamics_lipschitz, 0.0);
        assert_eq!(c.dynamics_bound, 1.0);
        // |P| = |x−1| ≤ 1 on [0,2]; |L| = max(|P·u|, |u|) ≤ 1.
        assert_eq!(c.cost_bound, 1.0);
        assert_eq!(c.cost_lipschitz, 1.0);
    }

    #[test]
    fn constants_bound_sampled_values() {
        for name in PRESET_NAMES {
            let prob = ControlProblem::preset(name).unwrap();
            let state_box = prob.default_domain_box();
            let c = prob.constants(&state_box);
            let (lo, hi) = state_box[0];
            for k in 0..500 {
                let x = [lo + (hi - lo) * k as f64 / 499.0];
                for u in &prob.controls {
                    let f = prob.dynamics(&x, u);
                    let l = prob.running_cost(&x, u);
                    assert!(f.iter().all(|v| v.abs() <= c.dynamics_bound + 1e-12));
                    assert!(l.iter().all(|v| v.abs() <= c.cost_bound + 1e-9), "{name}");
                }
            }
        }
    }

    #[test]
    fn config_round_trip() {
        for name in PRESET_NAMES {
            let prob = ControlProblem::preset(name).unwrap();
            let cfg = prob.to_config().unwrap();
            let back = ControlProblem::from_config(&cfg).unwrap();
            assert_eq!(back.to_config().unwrap(), cfg);
        }
    }

    #[test]
    fn config_parsing_and_validation() {
        let good = r#"{"name":"custom1","kind":"polynomial_biobjective",
                       "T":0.5,"x0":1.0,"controls":[-1.0,1.0],"P":[-1.0,1.0]}"#;
        let prob = ControlProblem::from_json_str(good).unwrap();
        assert_eq!(prob.name, "custom1");

        let unknown_kind = good.replace("polynomial_biobjective", "mystery");
        assert!(matches!(
            ControlProblem::from_json_str(&unknown_kind),
            Err(Error::Config(_))
        ));

        let extra_field = good.replace("\"T\":0.5", "\"T\":0.5,\"extra\":1");
        assert!(matches!(
            ControlProblem::from_json_str(&extra_field),
            Err(Error::Config(_))
        ));

        let bad_horizon = good.replace("\"T\":0.5", "\"T\":-1.0");
        assert!(matches!(
            ControlProblem::from_json_str(&bad_horizon),
            Err(Error::Config(_))
        ));

        let no_controls = good.replace("[-1.0,1.0],\"P\"", "[],\"P\"");
        assert!(matches!(
            ControlProblem::from_json_str(&no_controls),
            Err(Error::Config(_))
        ));

        assert!(matches!(
            ControlProblem::from_json_str("{"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn cost_truncation_keeps_dynamics_and_constants() {
        let m1 = ControlProblem::preset("moc1").unwrap();
        let scalar = m1.truncate_costs(1).unwrap();
        assert_eq!(scalar.cost_dim, 1);
        assert_eq!(scalar.running_cost(&[0.5], &[1.0]), vec![-0.5]);
        assert_eq!(scalar.dynamics(&[0.5], &[1.0]), vec![1.0]);
        let b = m1.default_domain_box();
        assert_eq!(scalar.constants(&b), m1.constants(&b));
        assert!(scalar.truncate_costs(3).is_err());
    }
}
