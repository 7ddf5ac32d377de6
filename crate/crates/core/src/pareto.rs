//! Pareto domination and filtering over p-dimensional cost vectors.
//!
//! Everything here is minimization with the componentwise (nonnegative-orthant)
//! order: `a` dominates `b` when `a ≤ b` in every coordinate and `a ≠ b`. A
//! Pareto front is the set of non-dominated elements of a finite point set,
//! stored deduplicated in ascending lexicographic order so that equal fronts
//! are byte-equal — the solver's determinism guarantees rest on that canonical
//! form.
//!
//! Coordinates are either cost-lattice integers (`i64`, the solver's working
//! representation) or exact reals (`f64`, the analytic reference fronts).

use crate::{Error, Result};
use std::cmp::Ordering;

/// Scalar coordinate types a cost vector can be made of.
///
/// `cmp_total` must be a total order consistent with `PartialOrd` on the values
/// actually stored (no NaNs; `is_valid` screens them out on input).
pub trait Coord: Copy + PartialOrd + std::fmt::Debug + Send + Sync + 'static {
    fn cmp_total(a: &Self, b: &Self) -> Ordering;
    /// True for values admissible in a point set (finite for floats).
    fn is_valid(&self) -> bool;
}

impl Coord for i64 {
    fn cmp_total(a: &Self, b: &Self) -> Ordering {
        a.cmp(b)
    }
    fn is_valid(&self) -> bool {
        true
    }
}

impl Coord for f64 {
    fn cmp_total(a: &Self, b: &Self) -> Ordering {
        a.total_cmp(b)
    }
    fn is_valid(&self) -> bool {
        self.is_finite()
    }
}

/// Lexicographic comparison of two equal-length points.
pub fn lex_cmp<T: Coord>(a: &[T], b: &[T]) -> Ordering {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        match T::cmp_total(x, y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// True when `a` dominates `b`: `a ≤ b` componentwise and `a ≠ b`.
///
/// Panics if the two points have different dimensions.
pub fn dominates<T: Coord>(a: &[T], b: &[T]) -> bool {
    assert_eq!(
        a.len(),
        b.len(),
        "dominates: dimension mismatch ({} vs {})",
        a.len(),
        b.len()
    );
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// True when `a ≤ b` componentwise (domination or equality).
pub fn weakly_dominates<T: Coord>(a: &[T], b: &[T]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// A Pareto front: a deduplicated antichain stored flat in ascending
/// lexicographic order (`data` holds `len()` points of `dim` coordinates each).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoFront<T: Coord> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Coord> ParetoFront<T> {
    /// The empty front (used as an accumulator seed; `filter` never returns it).
    pub fn empty(dim: usize) -> Self {
        ParetoFront { dim, data: Vec::new() }
    }

    /// A front holding a single point.
    pub fn singleton(point: Vec<T>) -> Self {
        ParetoFront { dim: point.len(), data: point }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Iterate over the points in canonical (ascending lexicographic) order.
    pub fn points(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// The flat coordinate buffer (points back to back, canonical order).
    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    pub fn point(&self, idx: usize) -> &[T] {
        &self.data[idx * self.dim..(idx + 1) * self.dim]
    }

    /// Membership test via binary search (the data is lex-sorted).
    pub fn contains(&self, p: &[T]) -> bool {
        if p.len() != self.dim || self.is_empty() {
            return false;
        }
        let mut lo = 0usize;
        let mut hi = self.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match lex_cmp(self.point(mid), p) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return true,
            }
        }
        false
    }

    /// Copy out the points as row vectors (test/report convenience).
    pub fn rows(&self) -> Vec<Vec<T>> {
        self.points().map(|p| p.to_vec()).collect()
    }

    /// Whether `p` lies in the upper set of this antichain — some point of
    /// the front is componentwise ≤ `p`. This is epigraph membership when the
    /// front is a value-function slice.
    pub fn covers(&self, p: &[T]) -> bool {
        assert_eq!(p.len(), self.dim, "covers: dimension mismatch");
        self.points().any(|q| weakly_dominates(q, p))
    }

    /// Shift every point by `offset` (Minkowski translation). The canonical
    /// order is preserved because translation is monotone in every coordinate.
    pub fn translate(&self, offset: &[T]) -> ParetoFront<T>
    where
        T: std::ops::Add<Output = T>,
    {
        assert_eq!(offset.len(), self.dim);
        let data = self
            .data
            .chunks_exact(self.dim)
            .flat_map(|p| p.iter().zip(offset).map(|(&a, &b)| a + b))
            .collect();
        ParetoFront { dim: self.dim, data }
    }

    /// Merge two planar (`dim == 2`) fronts into the front of their union in
    /// one linear pass. Both inputs are sorted antichains, so a point survives
    /// exactly when its second coordinate is strictly below every second
    /// coordinate seen earlier in the merged lexicographic order.
    pub fn merge_planar(&self, other: &ParetoFront<T>) -> ParetoFront<T> {
        assert_eq!(self.dim, 2, "merge_planar requires dim == 2");
        assert_eq!(other.dim, 2, "merge_planar requires dim == 2");
        let mut out: Vec<T> = Vec::with_capacity(self.data.len() + other.data.len());
        let mut best: Option<T> = None;
        let (mut i, mut j) = (0usize, 0usize);
        let (a, b) = (&self.data, &other.data);
        while i < a.len() || j < b.len() {
            let take_a = if i >= a.len() {
                false
            } else if j >= b.len() {
                true
            } else {
                lex_cmp(&a[i..i + 2], &b[j..j + 2]) != Ordering::Greater
            };
            let p = if take_a {
                let p = &a[i..i + 2];
                i += 2;
                p
            } else {
                let p = &b[j..j + 2];
                j += 2;
                p
            };
            let keep = match best {
                None => true,
                Some(y) => p[1] < y,
            };
            if keep {
                out.extend_from_slice(p);
                best = Some(p[1]);
            }
        }
        ParetoFront { dim: 2, data: out }
    }
}

fn validate_points<T: Coord>(dim: usize, flat: &[T]) -> Result<()> {
    if dim == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    if flat.len() % dim != 0 {
        return Err(Error::DimensionMismatch { expected: dim, got: flat.len() % dim });
    }
    if flat.is_empty() {
        return Err(Error::EmptySet);
    }
    if !flat.iter().all(Coord::is_valid) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Sort point indices lexicographically and drop exact duplicates.
fn sorted_unique_rows<T: Coord>(dim: usize, flat: &[T]) -> Vec<Vec<T>> {
    let mut rows: Vec<Vec<T>> = flat.chunks_exact(dim).map(|p| p.to_vec()).collect();
    rows.sort_by(|a, b| lex_cmp(a, b));
    rows.dedup_by(|a, b| lex_cmp(a, b) == Ordering::Equal);
    rows
}

/// Pareto-filter a point set: returns the non-dominated subset in canonical
/// order. Pairwise O(n²) scan after dedup — the reference algorithm every
/// other filtering path in this crate must agree with.
pub fn filter<T: Coord>(dim: usize, flat: &[T]) -> Result<ParetoFront<T>> {
    validate_points(dim, flat)?;
    let rows = sorted_unique_rows(dim, flat);
    let mut data = Vec::with_capacity(rows.len() * dim);
    for (i, cand) in rows.iter().enumerate() {
        // Rows are deduplicated, so a dominator is any other row weakly below.
        let dominated = rows
            .iter()
            .enumerate()
            .any(|(j, other)| j != i && weakly_dominates(other, cand));
        if !dominated {
            data.extend_from_slice(cand);
        }
    }
    Ok(ParetoFront { dim, data })
}

/// Planar sweep variant of [`filter`] for `dim == 2`: O(n log n), identical
/// output. Kept separate so the two algorithms can be tested against each
/// other; the solver's hot paths use this one.
pub fn filter_planar<T: Coord>(flat: &[T]) -> Result<ParetoFront<T>> {
    validate_points(2, flat)?;
    let rows = sorted_unique_rows(2, flat);
    let mut data = Vec::with_capacity(rows.len() * 2);
    let mut best: Option<T> = None;
    for p in &rows {
        let keep = match best {
            None => true,
            Some(y) => p[1] < y,
        };
        if keep {
            data.extend_from_slice(p);
            best = Some(p[1]);
        }
    }
    Ok(ParetoFront { dim: 2, data })
}

/// Dimension-dispatching filter used by the solver: planar sweep when `dim == 2`,
/// pairwise scan otherwise.
pub fn filter_fast<T: Coord>(dim: usize, flat: &[T]) -> Result<ParetoFront<T>> {
    if dim == 2 {
        filter_planar(flat)
    } else {
        filter(dim, flat)
    }
}

/// Filter a union presented in parts without materializing it: maintains the
/// running front `E_k` and folds each part via `E_{k+1} = E(S_{k+1} ∪ E_k)`.
/// Equals `filter` of the concatenation exactly.
pub fn incremental_filter<T: Coord>(dim: usize, parts: &[Vec<T>]) -> Result<ParetoFront<T>> {
    if parts.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut acc: Option<ParetoFront<T>> = None;
    for part in parts {
        let part_front = filter_fast(dim, part)?;
        acc = Some(match acc {
            None => part_front,
            Some(front) if dim == 2 => front.merge_planar(&part_front),
            Some(front) => {
                let mut joined = front.data;
                joined.extend_from_slice(part_front.as_flat());
                filter(dim, &joined)?
            }
        });
    }
    Ok(acc.unwrap())
}

/// External stability: every point of `flat` is weakly dominated by some front
/// point (i.e. the set lies inside front + nonnegative orthant).
pub fn check_external_stability<T: Coord>(
    dim: usize,
    flat: &[T],
    front: &ParetoFront<T>,
) -> Result<bool> {
    validate_points(dim, flat)?;
    if front.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: front.dim() });
    }
    Ok(flat
        .chunks_exact(dim)
        .all(|s| front.points().any(|e| weakly_dominates(e, s))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(rows: &[[i64; 2]]) -> Vec<i64> {
        rows.iter().flatten().copied().collect()
    }

    #[test]
    fn domination_examples() {
        assert!(dominates(&[0i64, 1], &[1, 1]));
        assert!(!dominates(&[1i64, 1], &[1, 1]));
        assert!(!dominates(&[0i64, 2], &[1, 1]));
        assert!(!dominates(&[1i64, 1], &[0, 2]));
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn domination_rejects_mixed_dims() {
        dominates(&[0i64, 1], &[1, 1, 2]);
    }

    #[test]
    fn filter_examples() {
        let front = filter(2, &flat(&[[2, 0], [0, 2], [1, 1], [2, 2]])).unwrap();
        assert_eq!(front.rows(), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);

        let single = filter(2, &flat(&[[5, 5]])).unwrap();
        assert_eq!(single.rows(), vec![vec![5, 5]]);

        // Duplicates collapse to one representative.
        let dup = filter(2, &flat(&[[1, 1], [1, 1]])).unwrap();
        assert_eq!(dup.rows(), vec![vec![1, 1]]);

        assert!(matches!(filter::<i64>(2, &[]), Err(Error::EmptySet)));
    }

    #[test]
    fn filter_rejects_non_finite() {
        assert!(matches!(
            filter(2, &[0.0f64, f64::NAN]),
            Err(Error::NonFinite)
        ));
        assert!(matches!(
            filter(2, &[0.0f64, f64::INFINITY]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn planar_sweep_agrees_with_pairwise() {
        let pts = flat(&[
            [3, 1],
            [1, 3],
            [2, 2],
            [0, 9],
            [9, 0],
            [4, 4],
            [2, 2],
            [1, 3],
        ]);
        let a = filter(2, &pts).unwrap();
        let b = filter_planar(&pts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn incremental_matches_batch() {
        let parts = vec![
            flat(&[[2, 0], [2, 2]]),
            flat(&[[0, 2]]),
            flat(&[[1, 1], [3, 3]]),
        ];
        let inc = incremental_filter(2, &parts).unwrap();
        let all: Vec<i64> = parts.concat();
        let batch = filter(2, &all).unwrap();
        assert_eq!(inc, batch);

        // A single part reduces to a plain filter.
        let one = incremental_filter(2, &[flat(&[[2, 0], [1, 1], [2, 2]])]).unwrap();
        assert_eq!(one, filter(2, &flat(&[[2, 0], [1, 1], [2, 2]])).unwrap());

        assert!(matches!(
            incremental_filter::<i64>(2, &[]),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn merge_planar_is_union_filter() {
        let a = filter(2, &flat(&[[0, 4], [2, 2], [4, 0]])).unwrap();
        let b = filter(2, &flat(&[[1, 3], [3, 1], [0, 9]])).unwrap();
        let merged = a.merge_planar(&b);
        let mut union = a.as_flat().to_vec();
        union.extend_from_slice(b.as_flat());
        assert_eq!(merged, filter(2, &union).unwrap());
    }

    #[test]
    fn external_stability_examples() {
        let pts = flat(&[[2, 0], [0, 2], [1, 1], [2, 2]]);
        let front = filter(2, &pts).unwrap();
        assert!(check_external_stability(2, &pts, &front).unwrap());

        // A strict subset of the front is not externally stable for the set.
        let partial = filter(2, &flat(&[[0, 2]])).unwrap();
        assert!(!check_external_stability(2, &pts, &partial).unwrap());

        // The front is externally stable for itself.
        assert!(check_external_stability(2, front.as_flat(), &front).unwrap());
    }

    #[test]
    fn translate_shifts_all_points() {
        let front = filter(2, &flat(&[[0, 2], [1, 1], [2, 0]])).unwrap();
        let moved = front.translate(&[10, -5]);
        assert_eq!(
            moved.rows(),
            vec![vec![10, -3], vec![11, -4], vec![12, -5]]
        );
    }

    #[test]
    fn contains_uses_canonical_order() {
        let front = filter(2, &flat(&[[2, 0], [0, 2], [1, 1]])).unwrap();
        assert!(front.contains(&[1, 1]));
        assert!(!front.contains(&[2, 2]));
        assert!(!front.contains(&[1, 1, 1]));
    }

    #[test]
    fn covers_is_upper_set_membership() {
        let front = filter(2, &flat(&[[0, 2], [2, 0]])).unwrap();
        assert!(front.covers(&[0, 2]));
        assert!(front.covers(&[5, 2]));
        assert!(front.covers(&[2, 2]));
        // The antichain gap: (1,1) is above neither point.
        assert!(!front.covers(&[1, 1]));
        assert!(!front.covers(&[-1, 10]));
    }
}
