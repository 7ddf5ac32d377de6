//! Uniform-lattice helpers: snapping reals to lattice coordinates and
//! enumerating lattice points inside sup-norm balls.
//!
//! All discretized quantities in this crate (states, objective vectors, and —
//! via layer indices — time) live on lattices with a common step `h`. Points
//! are stored as integer coordinate vectors; the real value of coordinate `k`
//! is `k·h`. The benchmark levels use `h = 2^(-2i)`, which is exact in binary
//! floating point, so snapping and conversion round-trip without error there.

/// A uniform lattice `h·Z^d` (the dimension is implicit in the slices passed in).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    step: f64,
}

/// Boundary slack for ball enumeration, relative to one lattice step. Radii
/// and centers are binary-exact for the built-in problems, so this only
/// matters for problems with irrational constants where a lattice point can
/// sit within rounding error of the ball boundary; such points are included.
const BOUNDARY_TOL: f64 = 1e-9;

impl Lattice {
    /// Create a lattice with the given step. Panics when the step is not a
    /// positive finite number.
    pub fn new(step: f64) -> Self {
        assert!(step.is_finite() && step > 0.0, "lattice step must be positive");
        Lattice { step }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Snap one real value to the nearest lattice coordinate, ties rounding
    /// toward +∞ (so e.g. 1.5 steps snap to coordinate 2 and −1.5 to −1).
    pub fn snap_scalar(&self, v: f64) -> i64 {
        (v / self.step + 0.5).floor() as i64
    }

    /// Snap a real vector to lattice coordinates componentwise.
    pub fn snap(&self, v: &[f64]) -> Vec<i64> {
        v.iter().map(|&x| self.snap_scalar(x)).collect()
    }

    /// Round one real value up to the next lattice coordinate (toward +∞),
    /// with boundary slack so values within rounding error of a lattice point
    /// stay on it. This is epigraph-consistent rounding: the result never
    /// under-reports the value.
    pub fn snap_up_scalar(&self, v: f64) -> i64 {
        (v / self.step - BOUNDARY_TOL).ceil() as i64
    }

    /// Round a real vector up to lattice coordinates componentwise.
    pub fn snap_up(&self, v: &[f64]) -> Vec<i64> {
        v.iter().map(|&x| self.snap_up_scalar(x)).collect()
    }

    pub fn to_real_scalar(&self, k: i64) -> f64 {
        k as f64 * self.step
    }

    pub fn to_real(&self, coords: &[i64]) -> Vec<f64> {
        coords.iter().map(|&k| self.to_real_scalar(k)).collect()
    }

    /// Inclusive coordinate range of lattice points within sup-distance
    /// `radius` of `center` along one axis.
    pub fn ball_range(&self, center: f64, radius: f64) -> (i64, i64) {
        assert!(radius >= 0.0, "ball radius must be nonnegative");
        let lo = ((center - radius) / self.step - BOUNDARY_TOL).ceil() as i64;
        let hi = ((center + radius) / self.step + BOUNDARY_TOL).floor() as i64;
        (lo, hi)
    }

    /// All lattice points within sup-distance `radius` of `center`, in
    /// ascending lexicographic order. Empty when the radius is too small to
    /// reach any lattice point.
    pub fn ball_points(&self, center: &[f64], radius: f64) -> Vec<Vec<i64>> {
        let ranges: Vec<(i64, i64)> = center
            .iter()
            .map(|&c| self.ball_range(c, radius))
            .collect();
        if ranges.iter().any(|&(lo, hi)| lo > hi) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut cursor: Vec<i64> = ranges.iter().map(|&(lo, _)| lo).collect();
        loop {
            out.push(cursor.clone());
            // Odometer increment, most significant axis first for lex order.
            let mut axis = cursor.len();
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if cursor[axis] < ranges[axis].1 {
                    cursor[axis] += 1;
                    for later in axis + 1..cursor.len() {
                        cursor[later] = ranges[later].0;
                    }
                    break;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snap_examples() {
        let lat = Lattice::new(0.25);
        assert_eq!(lat.snap_scalar(0.3), 1);
        // Exact tie 1.5 steps rounds toward +∞.
        assert_eq!(lat.snap_scalar(0.375), 2);
        assert_eq!(lat.snap_scalar(-0.3), -1);
        assert_eq!(lat.snap_scalar(-0.375), -1);
        assert_eq!(lat.snap(&[0.3, -0.3]), vec![1, -1]);
    }

    #[test]
    fn snap_up_examples() {
        let lat = Lattice::new(0.25);
        assert_eq!(lat.snap_up_scalar(0.3), 2);
        assert_eq!(lat.snap_up_scalar(0.25), 1);
        assert_eq!(lat.snap_up_scalar(-0.3), -1);
        assert_eq!(lat.snap_up_scalar(0.0), 0);
        assert_eq!(lat.snap_up(&[0.3, -0.3]), vec![2, -1]);
        // Never under-reports: the rounded value is ≥ the input.
        let fine = Lattice::new(0.015625);
        for k in 0..1000 {
            let v = -1.0 + 0.002 * k as f64;
            let snapped = fine.to_real_scalar(fine.snap_up_scalar(v));
            assert!(snapped >= v - 1e-12);
            assert!(snapped - v < fine.step());
        }
        // Lattice points stay put.
        assert_eq!(fine.snap_up_scalar(fine.to_real_scalar(-37)), -37);
    }

    #[test]
    fn to_real_is_exact_on_binary_steps() {
        let lat = Lattice::new(0.015625); // 2^-6
        assert_eq!(lat.to_real_scalar(64), 1.0);
        assert_eq!(lat.to_real(&[64, -32]), vec![1.0, -0.5]);
        for k in -100..100 {
            assert_eq!(lat.snap_scalar(lat.to_real_scalar(k)), k);
        }
    }

    #[test]
    fn ball_examples() {
        let lat = Lattice::new(0.25);
        // Interval [0.05, 0.55] contains lattice reals 0.25 and 0.5.
        assert_eq!(lat.ball_points(&[0.3], 0.25), vec![vec![1], vec![2]]);

        let fine = Lattice::new(0.015625);
        let two_h = 2.0 * fine.step();
        let pts = fine.ball_points(&[0.0], two_h);
        assert_eq!(pts, vec![vec![-2], vec![-1], vec![0], vec![1], vec![2]]);

        // Radius 0 at a lattice point: just the point itself.
        assert_eq!(fine.ball_points(&[1.0], 0.0), vec![vec![64]]);
        // Radius too small to reach the lattice from an off-lattice center.
        assert!(fine.ball_points(&[0.008], 0.001).is_empty());
    }

    #[test]
    fn planar_ball_is_cartesian_and_sorted() {
        let lat = Lattice::new(0.25);
        let pts = lat.ball_points(&[0.0, 0.0], 0.25);
        assert_eq!(pts.len(), 9);
        assert_eq!(pts.first().unwrap(), &vec![-1, -1]);
        assert_eq!(pts.last().unwrap(), &vec![1, 1]);
        let mut sorted = pts.clone();
        sorted.sort();
        assert_eq!(pts, sorted);
    }

    #[test]
    fn ball_membership_matches_definition() {
        let lat = Lattice::new(0.125);
        let center = [0.3, -0.7];
        let radius = 0.4;
        let pts = lat.ball_points(&center, radius);
        for p in &pts {
            for (axis, &k) in p.iter().enumerate() {
                assert!((lat.to_real_scalar(k) - center[axis]).abs() <= radius + 1e-12);
            }
        }
        // Every lattice point of a bounding box either is in the ball or violates the bound.
        for a in -10..10 {
            for b in -10..10 {
                let inside = (0..2).all(|axis| {
                    let k = if axis == 0 { a } else { b };
                    (lat.to_real_scalar(k) - center[axis]).abs() <= radius
                });
                assert_eq!(inside, pts.contains(&vec![a, b]));
            }
        }
    }
}
