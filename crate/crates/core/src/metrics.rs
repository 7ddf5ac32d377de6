//! Distances between fronts and convergence reporting.

use crate::oracle;
use crate::pareto::ParetoFront;
use crate::problem::ControlProblem;
use crate::solver::{backward_solve, plan_grid, ImageSampling, SolveMode};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn directed(a: &ParetoFront<f64>, b: &ParetoFront<f64>) -> f64 {
    a.as_flat()
        .par_chunks_exact(a.dim())
        .map(|pa| {
            b.points()
                .map(|pb| sup_dist(pa, pb))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance between two nonempty finite sets under the sup norm.
pub fn hausdorff(a: &ParetoFront<f64>, b: &ParetoFront<f64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(directed(a, b).max(directed(b, a)))
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub level: u32,
    pub grid_points: u64,
    pub successor_edges: u64,
    pub front_cardinality: usize,
    /// Hausdorff distance to the analytic reference front.
    pub hausdorff: f64,
    /// Distance divided by the coarsest level's distance.
    pub normalized_hausdorff: f64,
}

/// A convergence row together with the computed front itself.
#[derive(Debug, Clone)]
pub struct ConvergenceEntry {
    pub row: ConvergenceRow,
    pub front: ParetoFront<f64>,
}

/// Solve a polynomial-family problem at each level (ascending) and measure
/// each front against the analytic reference.
pub fn convergence_table(
    problem: &ControlProblem,
    levels: &[u32],
    mode: SolveMode,
    sampling: ImageSampling,
    reference_samples: usize,
) -> Result<Vec<ConvergenceEntry>> {
    if levels.is_empty() {
        return Err(Error::Config("need at least one level".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("levels must be strictly ascending".into()));
    }
    let reference = oracle::analytic_front(problem, reference_samples)?;
    let mut entries = Vec::with_capacity(levels.len());
    let mut base = None;
    for &level in levels {
        let plan = plan_grid(problem, level, mode, sampling)?;
        let solution = backward_solve(problem, &plan)?;
        let front = solution.start_front();
        let d = hausdorff(&front, &reference)?;
        let base_d = *base.get_or_insert(d);
        entries.push(ConvergenceEntry {
            row: ConvergenceRow {
                level,
                grid_points: solution.domain.points,
                successor_edges: solution.domain.edges,
                front_cardinality: front.len(),
                hausdorff: d,
                normalized_hausdorff: if base_d > 0.0 { d / base_d } else { 1.0 },
            },
            front,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::filter_fast;

    fn front(pts: &[f64]) -> ParetoFront<f64> {
        filter_fast(2, pts).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let a = front(&[0.0, 0.0, 2.0, 0.0]);
        let b = front(&[1.0, 0.0]);
        assert_eq!(hausdorff(&a, &b).unwrap(), 1.0);
        assert_eq!(hausdorff(&b, &a).unwrap(), 1.0);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);

        // Sup norm: diagonal offset counts once.
        let c = front(&[0.0, 0.0]);
        let d = front(&[0.25, 0.25]);
        assert_eq!(hausdorff(&c, &d).unwrap(), 0.25);
    }

    #[test]
    fn hausdorff_rejects_dimension_mismatch() {
        let a = front(&[0.0, 0.0]);
        let b = filter_fast(3, &[0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            hausdorff(&a, &b),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn convergence_table_guards() {
        let m1 = ControlProblem::preset("moc1").unwrap();
        assert!(matches!(
            convergence_table(&m1, &[], SolveMode::Simplified, ImageSampling::Hull, 2000),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            convergence_table(&m1, &[3, 3], SolveMode::Simplified, ImageSampling::Hull, 2000),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn convergence_table_single_level() {
        let m1 = ControlProblem::preset("moc1").unwrap();
        let entries = convergence_table(
            &m1,
            &[3],
            SolveMode::Simplified,
            ImageSampling::Hull,
            10_000,
        )
        .unwrap();
        assert_eq!(entries.len(), 1);
        let row = &entries[0].row;
        assert_eq!(row.level, 3);
        assert_eq!(row.normalized_hausdorff, 1.0);
        assert_eq!(row.front_cardinality, entries[0].front.len());
        assert!(row.hausdorff > 0.0 && row.hausdorff < 0.25);
        assert_eq!(row.grid_points, 205);
    }
}
