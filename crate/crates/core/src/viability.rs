//! Discrete viability-kernel engine and the epigraph cross-check.
//!
//! The solver's correctness rests on an equivalence: the set-valued value
//! function of the control problem, extended with a cost coordinate, has an
//! epigraph equal to the viability kernel of a constraint set under a widened
//! transition map. This module realizes both sides at tiny scale and compares
//! them point by point.
//!
//! The kernel side works on flat sets of lattice triples `(layer, state,
//! cost)`: start from the constraint set (a window truncation with a linear
//! cost floor) and repeatedly delete triples whose transition image misses
//! the surviving set. The value side runs a windowed strict-mode value
//! iteration from the floor initialization and takes epigraphs. The two are
//! compared only on points whose full transition image fits inside the
//! window — at the window boundary the truncation inevitably makes the sides
//! disagree, so those points prove nothing either way.
//!
//! Everything here is exponential in the combined state/cost dimension and is
//! meant for windows of at most ~10^5 points.

use crate::lattice::Lattice;
use crate::pareto::{filter_fast, ParetoFront};
use crate::problem::ControlProblem;
use crate::solver::{plan_grid, GridPlan, ImageSampling, SolveMode};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashSet};

/// One lattice triple: time layer, state coordinates, cost coordinates.
pub type KernelPoint = (usize, Vec<i64>, Vec<i64>);

/// Inclusive lattice coordinate ranges truncating states and costs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Window {
    pub state: Vec<(i64, i64)>,
    pub cost: Vec<(i64, i64)>,
}

fn axis_range(lattice: &Lattice, lo: f64, hi: f64) -> Result<(i64, i64)> {
    let lo_c = lattice.snap_up_scalar(lo);
    let hi_c = (hi / lattice.step() + 1e-9).floor() as i64;
    if lo_c > hi_c {
        return Err(Error::EmptyWindow);
    }
    Ok((lo_c, hi_c))
}

fn enumerate_box(ranges: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &(lo, hi) in ranges {
        let mut next = Vec::with_capacity(out.len() * (hi - lo + 1) as usize);
        for prefix in &out {
            for v in lo..=hi {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

impl Window {
    /// Build from real-valued state and cost boxes; each axis keeps the
    /// lattice points inside its interval.
    pub fn from_real(
        lattice: &Lattice,
        state_box: &[(f64, f64)],
        cost_box: &[(f64, f64)],
    ) -> Result<Window> {
        let state = state_box
            .iter()
            .map(|&(lo, hi)| axis_range(lattice, lo, hi))
            .collect::<Result<_>>()?;
        let cost = cost_box
            .iter()
            .map(|&(lo, hi)| axis_range(lattice, lo, hi))
            .collect::<Result<_>>()?;
        Ok(Window { state, cost })
    }

    pub fn contains_state(&self, x: &[i64]) -> bool {
        x.len() == self.state.len()
            && x.iter().zip(&self.state).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn contains_cost(&self, z: &[i64]) -> bool {
        z.len() == self.cost.len()
            && z.iter().zip(&self.cost).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn states(&self) -> Vec<Vec<i64>> {
        enumerate_box(&self.state)
    }

    pub fn costs(&self) -> Vec<Vec<i64>> {
        enumerate_box(&self.cost)
    }
}

/// A finite set of kernel points with the window it was truncated to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelSet {
    pub points: BTreeSet<KernelPoint>,
    pub window: Window,
    /// True when the cost window cut into the floor region, i.e. the set is
    /// a strict truncation of the intended constraint set.
    pub clipped: bool,
}

/// Smallest integer floor slope satisfying the key relation for this plan.
///
/// The constraint set's cost floor drops by `rate · lattice_step` per layer;
/// the relation `ε·cost_bound + cost_margin ≤ (ε − 2h)·rate` makes one
/// backward step from the floor land on or above the earlier floor, so the
/// floor region survives the kernel iteration.
pub fn cost_floor_rate(plan: &GridPlan) -> i64 {
    let lhs = plan.time_step * plan.constants.cost_bound + plan.cost_margin();
    let per_rate = plan.time_step - 2.0 * plan.lattice_step;
    ((lhs / per_rate - 1e-9).ceil() as i64).max(1)
}

/// Verify the key relation for a candidate floor slope.
pub fn check_key_relation(plan: &GridPlan, rate: i64) -> Result<()> {
    let lhs = plan.time_step * plan.constants.cost_bound + plan.cost_margin();
    let rhs = (plan.time_step - 2.0 * plan.lattice_step) * rate as f64;
    if lhs <= rhs + 1e-12 {
        Ok(())
    } else {
        Err(Error::KeyRelation { lhs, rhs })
    }
}

/// Lattice coordinate of the cost floor at a layer: the floor is
/// `−(T − t)·rate − h` in real units, which is integral on the lattice.
pub fn floor_coord(plan: &GridPlan, rate: i64, layer: usize) -> i64 {
    let horizon_layers = plan.layer_count as i64 - 3;
    -(horizon_layers + 1 - layer as i64) * rate - 1
}

/// The constraint set: every windowed lattice triple on or above the cost
/// floor of its layer. Fails when the floor slope violates the key relation.
pub fn build_constraint_set(plan: &GridPlan, rate: i64, window: &Window) -> Result<KernelSet> {
    check_key_relation(plan, rate)?;
    let states = window.states();
    let costs = window.costs();
    if states.is_empty() || costs.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut points = BTreeSet::new();
    let mut clipped = false;
    for layer in 0..plan.layer_count {
        let floor = floor_coord(plan, rate, layer);
        if window.cost.iter().any(|&(lo, _)| floor < lo) {
            clipped = true;
        }
        if window.cost.iter().any(|&(_, hi)| floor > hi) {
            // The whole slice sits above the window.
            continue;
        }
        for x in &states {
            for z in &costs {
                if z.iter().all(|&c| c >= floor) {
                    points.insert((layer, x.clone(), z.clone()));
                }
            }
        }
    }
    Ok(KernelSet { points, window: window.clone(), clipped })
}

/// Walk the transition image of one point, earliest-exit: `visit` returns
/// true to stop (a witness was found). The point itself is visited first in
/// the terminal region, matching the self-ball the construction puts there.
/// Returns whether the walk was stopped.
fn for_each_gamma_target(
    problem: &ControlProblem,
    plan: &GridPlan,
    point: &KernelPoint,
    visit: &mut impl FnMut(usize, &[i64], &[i64]) -> bool,
) -> bool {
    let (layer, x, z) = point;
    let lattice = plan.lattice();
    let terminal = plan.is_terminal(*layer);
    let eps = plan.time_step;
    let x_real = lattice.to_real(x);
    let z_real = lattice.to_real(z);
    let last = plan.layer_count - 1;
    let (first_target, last_target) = if terminal {
        (*layer, (*layer + plan.layer_advance + 4).min(last))
    } else {
        (*layer + plan.layer_advance, (*layer + plan.layer_advance + 4).min(last))
    };

    if terminal {
        // Self-ball of radius one ball diameter across the time window.
        if visit(*layer, x, z) {
            return true;
        }
        let two_h = 2.0 * plan.lattice_step;
        let x_ball = lattice.ball_points(&x_real, two_h);
        let z_ball = lattice.ball_points(&z_real, two_h);
        for target_layer in first_target..=last_target {
            for xs in &x_ball {
                for zs in &z_ball {
                    if visit(target_layer, xs, zs) {
                        return true;
                    }
                }
            }
        }
    }

    let state_margin = plan.state_margin();
    let cost_margin = plan.cost_margin();
    for eval in problem.eval_controls(&x_real) {
        let x_center: Vec<f64> = x_real
            .iter()
            .zip(&eval.velocity)
            .map(|(xi, fi)| xi + eps * fi)
            .collect();
        // The extended dynamics carry the negated running cost: moving
        // forward in time lowers the remaining-cost coordinate.
        let z_center: Vec<f64> = z_real
            .iter()
            .zip(&eval.cost)
            .map(|(zi, li)| zi - eps * li)
            .collect();
        let x_ball = lattice.ball_points(&x_center, state_margin);
        let z_ball = lattice.ball_points(&z_center, cost_margin);
        for target_layer in first_target..=last_target {
            for xs in &x_ball {
                for zs in &z_ball {
                    if visit(target_layer, xs, zs) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// The full transition image of one point, sorted and duplicate-free.
///
/// Interior points (layer time below the terminal threshold) map to a
/// five-layer time window of per-control balls around the extended-dynamics
/// image; terminal points map to a window starting at their own layer and
/// additionally a self-ball, so a terminal point always reaches itself.
pub fn gamma_transition(
    problem: &ControlProblem,
    plan: &GridPlan,
    point: &KernelPoint,
) -> Vec<KernelPoint> {
    let mut out = Vec::new();
    for_each_gamma_target(problem, plan, point, &mut |layer, x, z| {
        out.push((layer, x.to_vec(), z.to_vec()));
        false
    });
    out.sort();
    out.dedup();
    out
}

/// Iterate `A ← {a ∈ A : image(a) ∩ A ≠ ∅}` to a fixpoint.
///
/// `survives` gets the point and the current membership set and reports
/// whether the point keeps a witness; it is expected to early-exit. Returns
/// the number of passes run (the final, unchanged pass included) and the
/// fixpoint. Iterates are monotone decreasing by construction.
pub fn kernel_fixpoint(
    initial: &KernelSet,
    survives: impl Fn(&KernelPoint, &HashSet<KernelPoint>) -> bool + Sync,
    max_passes: usize,
) -> Result<(usize, KernelSet)> {
    let mut current: Vec<KernelPoint> = initial.points.iter().cloned().collect();
    let mut membership: HashSet<KernelPoint> = current.iter().cloned().collect();
    for pass in 1..=max_passes {
        let kept: Vec<KernelPoint> = current
            .iter()
            .filter(|p| survives(p, &membership))
            .cloned()
            .collect();
        let stable = kept.len() == current.len();
        if !stable {
            membership = kept.iter().cloned().collect();
            current = kept;
        }
        if stable {
            return Ok((
                pass,
                KernelSet {
                    points: current.into_iter().collect(),
                    window: initial.window.clone(),
                    clipped: initial.clipped,
                },
            ));
        }
    }
    Err(Error::Config(format!(
        "kernel iteration did not stabilize within {max_passes} passes"
    )))
}

/// Survival test under the plain (union-realized) transition.
pub fn survives_union(
    problem: &ControlProblem,
    plan: &GridPlan,
    point: &KernelPoint,
    membership: &HashSet<KernelPoint>,
) -> bool {
    let mut probe = (0usize, Vec::new(), Vec::new());
    for_each_gamma_target(problem, plan, point, &mut |layer, x, z| {
        probe.0 = layer;
        probe.1.clear();
        probe.1.extend_from_slice(x);
        probe.2.clear();
        probe.2.extend_from_slice(z);
        membership.contains(&probe)
    })
}

// ---------------------------------------------------------------------------
// Convex-hull variant of the transition.
//
// The underlying construction closes the union of the per-control balls (and,
// in the terminal region, the self-ball) under convex combination. The kernel
// realizes it as a plain union; the functions below realize the literal hull
// so the difference can be reported.

struct BallBox {
    center: Vec<f64>,
    radius: Vec<f64>,
}

/// Is `p` in the convex hull of the union of the boxes? Feasibility of the
/// convex weights is solved exactly: one box is containment, two boxes give a
/// one-dimensional weight interval, three a two-dimensional polygon.
fn in_box_hull(p: &[f64], boxes: &[BallBox]) -> Result<bool> {
    let tol = 1e-9;
    match boxes.len() {
        0 => Ok(false),
        1 => Ok(p
            .iter()
            .zip(&boxes[0].center)
            .zip(&boxes[0].radius)
            .all(|((v, c), r)| (v - c).abs() <= r + tol)),
        2 => {
            // Weight s on the first box: per component
            // |p − (c2 + s(c1−c2))| ≤ r2 + s(r1−r2).
            let mut lo = 0.0f64;
            let mut hi = 1.0f64;
            for k in 0..p.len() {
                let dc = boxes[0].center[k] - boxes[1].center[k];
                let dr = boxes[0].radius[k] - boxes[1].radius[k];
                let base = p[k] - boxes[1].center[k];
                // |base − s·dc| ≤ r2 + s·dr → two linear constraints in s.
                for (a, b) in [(dc - dr, boxes[1].radius[k] + base), (-dc - dr, boxes[1].radius[k] - base)]
                {
                    // a·s ≤ b
                    if a.abs() <= tol {
                        if b < -tol {
                            return Ok(false);
                        }
                    } else if a > 0.0 {
                        hi = hi.min(b / a);
                    } else {
                        lo = lo.max(b / a);
                    }
                }
            }
            Ok(lo <= hi + tol)
        }
        3 => {
            // Weights (s, t) on the first two boxes; clip the feasible region
            // out of the simplex triangle.
            let mut poly = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
            let clip = |poly: &[(f64, f64)], a: f64, b: f64, c: f64| -> Vec<(f64, f64)> {
                // Keep a·s + b·t ≤ c.
                let side = |q: &(f64, f64)| a * q.0 + b * q.1 - c;
                let mut out = Vec::new();
                for i in 0..poly.len() {
                    let cur = poly[i];
                    let nxt = poly[(i + 1) % poly.len()];
                    let sc = side(&cur);
                    let sn = side(&nxt);
                    if sc <= tol {
                        out.push(cur);
                    }
                    if (sc < -tol && sn > tol) || (sc > tol && sn < -tol) {
                        let f = sc / (sc - sn);
                        out.push((cur.0 + f * (nxt.0 - cur.0), cur.1 + f * (nxt.1 - cur.1)));
                    }
                }
                out
            };
            for k in 0..p.len() {
                let c3 = boxes[2].center[k];
                let r3 = boxes[2].radius[k];
                let dc1 = boxes[0].center[k] - c3;
                let dc2 = boxes[1].center[k] - c3;
                let dr1 = boxes[0].radius[k] - r3;
                let dr2 = boxes[1].radius[k] - r3;
                let base = p[k] - c3;
                // |base − (s·dc1 + t·dc2)| ≤ r3 + s·dr1 + t·dr2 splits into
                //   (dc1 − dr1)s + (dc2 − dr2)t ≤ r3 + base
                //   (−dc1 − dr1)s + (−dc2 − dr2)t ≤ r3 − base.
                poly = clip(&poly, dc1 - dr1, dc2 - dr2, r3 + base);
                poly = clip(&poly, -dc1 - dr1, -dc2 - dr2, r3 - base);
                if poly.is_empty() {
                    return Ok(false);
                }
            }
            Ok(!poly.is_empty())
        }
        n => Err(Error::Config(format!(
            "hull transition supports at most 3 balls per point, got {n}"
        ))),
    }
}

fn gamma_boxes(
    problem: &ControlProblem,
    plan: &GridPlan,
    x_real: &[f64],
    z_real: &[f64],
    terminal: bool,
) -> Vec<BallBox> {
    let eps = plan.time_step;
    let mut boxes: Vec<BallBox> = problem
        .eval_controls(x_real)
        .iter()
        .map(|eval| {
            let mut center: Vec<f64> = x_real
                .iter()
                .zip(&eval.velocity)
                .map(|(xi, fi)| xi + eps * fi)
                .collect();
            center.extend(z_real.iter().zip(&eval.cost).map(|(zi, li)| zi - eps * li));
            let mut radius = vec![plan.state_margin(); x_real.len()];
            radius.extend(vec![plan.cost_margin(); z_real.len()]);
            BallBox { center, radius }
        })
        .collect();
    if terminal {
        let mut center = x_real.to_vec();
        center.extend_from_slice(z_real);
        let radius = vec![2.0 * plan.lattice_step; center.len()];
        boxes.push(BallBox { center, radius });
    }
    boxes
}

/// Survival test under the literal convex-hull transition: the witness may
/// lie anywhere in the hull of the per-control balls (plus the terminal
/// self-ball), not just in their union.
pub fn survives_hull(
    problem: &ControlProblem,
    plan: &GridPlan,
    point: &KernelPoint,
    membership: &HashSet<KernelPoint>,
) -> Result<bool> {
    let (layer, x, z) = point;
    let lattice = plan.lattice();
    let terminal = plan.is_terminal(*layer);
    let x_real = lattice.to_real(x);
    let z_real = lattice.to_real(z);
    let boxes = gamma_boxes(problem, plan, &x_real, &z_real, terminal);
    let dims = x.len() + z.len();
    let mut lo = vec![i64::MAX; dims];
    let mut hi = vec![i64::MIN; dims];
    for b in &boxes {
        for k in 0..dims {
            let (a, c) = lattice.ball_range(b.center[k], b.radius[k]);
            lo[k] = lo[k].min(a);
            hi[k] = hi[k].max(c);
        }
    }
    let last = plan.layer_count - 1;
    let (first_target, last_target) = if terminal {
        (*layer, (*layer + plan.layer_advance + 4).min(last))
    } else {
        (*layer + plan.layer_advance, (*layer + plan.layer_advance + 4).min(last))
    };
    // A surviving terminal point almost always witnesses itself; test that
    // before sweeping the box.
    if terminal && membership.contains(point) {
        return Ok(true);
    }
    let ranges: Vec<(i64, i64)> = lo.into_iter().zip(hi).collect();
    let candidates = enumerate_box(&ranges);
    let mut probe = (0usize, Vec::new(), Vec::new());
    for cand in &candidates {
        // Membership is a hash probe, the hull test a small LP: probe first
        // and run the LP once per candidate, only when some layer matched.
        let mut in_hull = None;
        for target_layer in first_target..=last_target {
            probe.0 = target_layer;
            probe.1.clear();
            probe.1.extend_from_slice(&cand[..x.len()]);
            probe.2.clear();
            probe.2.extend_from_slice(&cand[x.len()..]);
            if !membership.contains(&probe) {
                continue;
            }
            if in_hull.is_none() {
                let real: Vec<f64> = cand.iter().map(|&c| lattice.to_real_scalar(c)).collect();
                in_hull = Some(in_box_hull(&real, &boxes)?);
            }
            match in_hull {
                Some(true) => return Ok(true),
                _ => break,
            }
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// Windowed value iteration (the epigraph side of the cross-check).

/// Result of the floor-initialized windowed value iteration.
#[derive(Debug, Clone)]
pub struct ValueIteration {
    /// Antichain per (layer, state); absent entries are empty slices.
    pub fronts: BTreeMap<(usize, Vec<i64>), ParetoFront<i64>>,
    pub iterations: usize,
    /// Whether every iterate's epigraph was contained in its predecessor's.
    pub monotone: bool,
}

fn clamp_to_window(point: &mut [i64], floor: i64, window: &Window) -> bool {
    for (v, &(lo, hi)) in point.iter_mut().zip(&window.cost) {
        *v = (*v).max(floor).max(lo);
        if *v > hi {
            return false;
        }
    }
    true
}

/// Strict-mode value iteration over a window, initialized at the cost floor.
///
/// This mirrors the kernel recursion through antichains: each slice update
/// pulls every target slice of the transition's time window back through the
/// per-control cost balls (terminal slices also through the self-ball),
/// filters to minimal elements, and clamps to the constraint set. With the
/// key relation in force the floor is stationary, so the iteration converges
/// from above in finitely many steps.
pub fn windowed_value_iteration(
    problem: &ControlProblem,
    plan: &GridPlan,
    rate: i64,
    window: &Window,
    max_iterations: usize,
) -> Result<ValueIteration> {
    check_key_relation(plan, rate)?;
    let p = problem.cost_dim;
    let lattice = plan.lattice();
    let states = window.states();
    if states.is_empty() {
        return Err(Error::EmptyWindow);
    }

    // Floor initialization, clamped into the window; slices whose floor
    // exceeds the window stay empty.
    let mut fronts: BTreeMap<(usize, Vec<i64>), ParetoFront<i64>> = BTreeMap::new();
    for layer in 0..plan.layer_count {
        let floor = floor_coord(plan, rate, layer);
        let mut base = vec![floor; p];
        if !clamp_to_window(&mut base, floor, window) {
            continue;
        }
        for x in &states {
            fronts.insert((layer, x.clone()), ParetoFront::singleton(base.clone()));
        }
    }

    let mut monotone = true;
    for iteration in 1..=max_iterations {
        let mut next: BTreeMap<(usize, Vec<i64>), ParetoFront<i64>> = BTreeMap::new();
        for (layer, x) in fronts.keys().map(|(l, x)| (*l, x.clone())) {
            let floor = floor_coord(plan, rate, layer);
            let terminal = plan.is_terminal(layer);
            let x_real = lattice.to_real(&x);
            let last = plan.layer_count - 1;
            let (first_target, last_target) = if terminal {
                (layer, (layer + plan.layer_advance + 4).min(last))
            } else {
                (layer + plan.layer_advance, (layer + plan.layer_advance + 4).min(last))
            };

            let mut candidates: Vec<i64> = Vec::new();
            let mut pull = |x_ball: &[Vec<i64>], offset: &[f64], margin: f64| {
                for target_layer in first_target..=last_target {
                    for xs in x_ball {
                        if !window.contains_state(xs) {
                            continue;
                        }
                        let Some(front) = fronts.get(&(target_layer, xs.clone())) else {
                            continue;
                        };
                        for q in front.points() {
                            // Smallest lattice cost reachable from epigraph
                            // point q through this cost ball.
                            let mut corner: Vec<i64> = q
                                .iter()
                                .zip(offset)
                                .map(|(&qi, &off)| {
                                    lattice
                                        .snap_up_scalar(lattice.to_real_scalar(qi) + off - margin)
                                })
                                .collect();
                            if clamp_to_window(&mut corner, floor, window) {
                                candidates.extend_from_slice(&corner);
                            }
                        }
                    }
                }
            };

            if terminal {
                let two_h = 2.0 * plan.lattice_step;
                let x_ball = lattice.ball_points(&x_real, two_h);
                pull(&x_ball, &vec![0.0; p], two_h);
            }
            let eps = plan.time_step;
            for eval in problem.eval_controls(&x_real) {
                let x_center: Vec<f64> = x_real
                    .iter()
                    .zip(&eval.velocity)
                    .map(|(xi, fi)| xi + eps * fi)
                    .collect();
                let x_ball = lattice.ball_points(&x_center, plan.state_margin());
                let offset: Vec<f64> = eval.cost.iter().map(|l| eps * l).collect();
                pull(&x_ball, &offset, plan.cost_margin());
            }

            if !candidates.is_empty() {
                next.insert((layer, x), filter_fast(p, &candidates)?);
            }
        }

        // Epigraph monotonicity: every new slice must sit above the old one.
        for (key, front) in &next {
            match fronts.get(key) {
                None => monotone = false,
                Some(old) => {
                    if !front.points().all(|pt| old.covers(pt)) {
                        monotone = false;
                    }
                }
            }
        }

        let stable = next == fronts;
        fronts = next;
        if stable {
            return Ok(ValueIteration { fronts, iterations: iteration, monotone });
        }
    }
    Err(Error::Config(format!(
        "value iteration did not stabilize within {max_iterations} iterations"
    )))
}

/// All windowed lattice triples covered by a family of antichains: the
/// discrete epigraph of the value function.
pub fn epigraph(
    fronts: &BTreeMap<(usize, Vec<i64>), ParetoFront<i64>>,
    window: &Window,
) -> BTreeSet<KernelPoint> {
    let costs = window.costs();
    let mut out = BTreeSet::new();
    for ((layer, x), front) in fronts {
        if !window.contains_state(x) {
            continue;
        }
        for z in &costs {
            if front.covers(z) {
                out.insert((*layer, x.clone(), z.clone()));
            }
        }
    }
    out
}

/// Whether the full (unclipped) transition image of a point stays inside the
/// window and the layer range — only such points are compared across the two
/// sides of the cross-check.
pub fn gamma_fits_window(
    problem: &ControlProblem,
    plan: &GridPlan,
    window: &Window,
    point: &KernelPoint,
) -> bool {
    let (layer, x, z) = point;
    let lattice = plan.lattice();
    let terminal = plan.is_terminal(*layer);
    if *layer + plan.layer_advance + 4 > plan.layer_count - 1 {
        return false;
    }
    let x_real = lattice.to_real(x);
    let z_real = lattice.to_real(z);
    let fits = |center: &[f64], radius: f64, axes: &[(i64, i64)]| -> bool {
        center.iter().zip(axes).all(|(&c, &(lo, hi))| {
            let (a, b) = lattice.ball_range(c, radius);
            lo <= a && b <= hi
        })
    };
    if terminal {
        let two_h = 2.0 * plan.lattice_step;
        if !fits(&x_real, two_h, &window.state) || !fits(&z_real, two_h, &window.cost) {
            return false;
        }
    }
    let eps = plan.time_step;
    for eval in problem.eval_controls(&x_real) {
        let x_center: Vec<f64> = x_real
            .iter()
            .zip(&eval.velocity)
            .map(|(xi, fi)| xi + eps * fi)
            .collect();
        let z_center: Vec<f64> = z_real
            .iter()
            .zip(&eval.cost)
            .map(|(zi, li)| zi - eps * li)
            .collect();
        if !fits(&x_center, plan.state_margin(), &window.state)
            || !fits(&z_center, plan.cost_margin(), &window.cost)
        {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Cross-check driver.

/// Configuration of one kernel/epigraph cross-check.
#[derive(Debug, Clone)]
pub struct CrossCheckConfig {
    pub problem: ControlProblem,
    pub level: u32,
    pub state_window: Vec<(f64, f64)>,
    pub cost_window: Vec<(f64, f64)>,
    /// Floor slope; computed from the key relation when absent.
    pub cost_floor_rate: Option<i64>,
    pub max_iterations: usize,
    /// Also run the convex-hull transition kernel and report the difference.
    pub compare_hull: bool,
}

impl CrossCheckConfig {
    /// The default tiny instance: quadratic-cost dynamics on a quarter
    /// horizon at level 2, one state unit of window, cost window
    /// `[−0.75, 0.75]²` — about 5·10⁴ kernel points.
    pub fn tiny_default() -> Result<Self> {
        let base = ControlProblem::preset("moc1")?;
        let problem = ControlProblem::polynomial_biobjective(
            "moc1_tiny",
            0.25,
            base.x0[0],
            &[-1.0, 1.0],
            base.integrand().unwrap().clone(),
        )?;
        let x0 = problem.x0[0];
        Ok(CrossCheckConfig {
            problem,
            level: 2,
            state_window: vec![(x0 - 0.5, x0 + 0.5)],
            cost_window: vec![(-0.75, 0.75), (-0.75, 0.75)],
            cost_floor_rate: None,
            max_iterations: 500,
            compare_hull: true,
        })
    }
}

/// Everything the cross-check measured.
#[derive(Debug, Clone, Serialize)]
pub struct CrossCheckReport {
    pub problem: String,
    pub level: u32,
    pub cost_floor_rate: i64,
    pub clipped: bool,
    pub constraint_points: usize,
    pub kernel_points: usize,
    pub kernel_passes: usize,
    pub value_iterations: usize,
    pub value_monotone: bool,
    pub epigraph_points: usize,
    /// Points of the window whose transition image fits inside it.
    pub interior_points: usize,
    pub kernel_only_interior: usize,
    pub epigraph_only_interior: usize,
    /// The identity the construction rests on: kernel = epigraph on the
    /// interior.
    pub interior_match: bool,
    /// Size of the hull-transition kernel and how many points it differs in
    /// (whole window, informational): the union realization is a deliberate
    /// simplification of the convex hull.
    pub hull_kernel_points: Option<usize>,
    pub hull_union_gap: Option<usize>,
}

/// Run the kernel/epigraph cross-check for one configuration.
pub fn cross_check(cfg: &CrossCheckConfig) -> Result<CrossCheckReport> {
    let plan = plan_grid(&cfg.problem, cfg.level, SolveMode::Strict, ImageSampling::Vertices)?;
    let lattice = plan.lattice();
    let window = Window::from_real(&lattice, &cfg.state_window, &cfg.cost_window)?;
    let rate = match cfg.cost_floor_rate {
        Some(r) => r,
        None => cost_floor_rate(&plan),
    };
    let constraint = build_constraint_set(&plan, rate, &window)?;
    let constraint_points = constraint.points.len();

    let (kernel_passes, kernel) = kernel_fixpoint(
        &constraint,
        |pt, members| survives_union(&cfg.problem, &plan, pt, members),
        cfg.max_iterations,
    )?;

    let vi = windowed_value_iteration(&cfg.problem, &plan, rate, &window, cfg.max_iterations)?;
    let epi = epigraph(&vi.fronts, &window);

    let mut interior_points = 0usize;
    let mut kernel_only = 0usize;
    let mut epigraph_only = 0usize;
    let interior = |pt: &KernelPoint| gamma_fits_window(&cfg.problem, &plan, &window, pt);
    for pt in kernel.points.union(&epi) {
        if !interior(pt) {
            continue;
        }
        interior_points += 1;
        match (kernel.points.contains(pt), epi.contains(pt)) {
            (true, false) => kernel_only += 1,
            (false, true) => epigraph_only += 1,
            _ => {}
        }
    }

    let (hull_kernel_points, hull_union_gap) = if cfg.compare_hull {
        let (_, hull_kernel) = kernel_fixpoint(
            &constraint,
            |pt, members| {
                survives_hull(&cfg.problem, &plan, pt, members).unwrap_or(false)
            },
            cfg.max_iterations,
        )?;
        let gap = hull_kernel.points.symmetric_difference(&kernel.points).count();
        (Some(hull_kernel.points.len()), Some(gap))
    } else {
        (None, None)
    };

    Ok(CrossCheckReport {
        problem: cfg.problem.name.clone(),
        level: cfg.level,
        cost_floor_rate: rate,
        clipped: constraint.clipped,
        constraint_points,
        kernel_points: kernel.points.len(),
        kernel_passes,
        value_iterations: vi.iterations,
        value_monotone: vi.monotone,
        epigraph_points: epi.len(),
        interior_points,
        kernel_only_interior: kernel_only,
        epigraph_only_interior: epigraph_only,
        interior_match: kernel_only == 0 && epigraph_only == 0,
        hull_kernel_points,
        hull_union_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_plan() -> (ControlProblem, GridPlan) {
        let cfg = CrossCheckConfig::tiny_default().unwrap();
        let plan =
            plan_grid(&cfg.problem, 2, SolveMode::Strict, ImageSampling::Vertices).unwrap();
        (cfg.problem, plan)
    }

    fn tiny_window(plan: &GridPlan) -> Window {
        Window::from_real(
            &plan.lattice(),
            &[(0.5, 1.5)],
            &[(-0.75, 0.75), (-0.75, 0.75)],
        )
        .unwrap()
    }

    #[test]
    fn window_construction() {
        let lat = Lattice::new(0.0625);
        let w = Window::from_real(&lat, &[(0.5, 1.5)], &[(-0.75, 0.75), (-0.75, 0.75)]).unwrap();
        assert_eq!(w.state, vec![(8, 24)]);
        assert_eq!(w.cost, vec![(-12, 12), (-12, 12)]);
        assert_eq!(w.states().len(), 17);
        assert_eq!(w.costs().len(), 625);
        assert!(w.contains_state(&[8]) && !w.contains_state(&[7]));
        assert!(matches!(
            Window::from_real(&lat, &[(1.0, 0.99)], &[]),
            Err(Error::EmptyWindow)
        ));
    }

    #[test]
    fn floor_rate_and_key_relation() {
        let (_, plan) = tiny_plan();
        // ε·M_L + α_L = 0.25·1.25 + 0.203125 = 0.515625; per unit of slope,
        // (ε − 2h) = 0.125 → smallest integer slope is 5.
        assert_eq!(cost_floor_rate(&plan), 5);
        assert!(check_key_relation(&plan, 5).is_ok());
        match check_key_relation(&plan, 4) {
            Err(Error::KeyRelation { lhs, rhs }) => {
                assert_eq!(lhs, 0.515625);
                assert_eq!(rhs, 0.5);
            }
            other => panic!("expected key relation failure, got {other:?}"),
        }
    }

    #[test]
    fn floor_coordinates() {
        let (_, plan) = tiny_plan();
        // Layer at t = T: floor −h. Layer at t = 0: floor −T·rate − h.
        assert_eq!(floor_coord(&plan, 5, 5), -1);
        assert_eq!(floor_coord(&plan, 5, 1), -21);
        assert_eq!(floor_coord(&plan, 5, 6), 4);
    }

    #[test]
    fn constraint_set_counts_and_clipping() {
        let (_, plan) = tiny_plan();
        let w = tiny_window(&plan);
        let set = build_constraint_set(&plan, 5, &w).unwrap();
        // Floors per layer: −26,−21,−16,−11,−6,−1,4; the window cost axes
        // span −12..12, so layers 0–2 are clipped to the full 25² box and the
        // later layers lose the region below their floor.
        assert!(set.clipped);
        let slice = |floor: i64| -> usize {
            let side = if floor < -12 { 25 } else { (12 - floor + 1) as usize };
            side * side
        };
        let expected: usize =
            17 * (slice(-26) + slice(-21) + slice(-16) + slice(-11) + slice(-6) + slice(-1) + slice(4));
        assert_eq!(set.points.len(), expected);
        assert_eq!(set.points.len(), 52513);
        assert!(matches!(
            build_constraint_set(&plan, 4, &w),
            Err(Error::KeyRelation { .. })
        ));
    }

    #[test]
    fn terminal_transition_contains_self() {
        let (prob, plan) = tiny_plan();
        assert!(plan.is_terminal(3));
        let pt = (3usize, vec![16i64], vec![0i64, 0]);
        let image = gamma_transition(&prob, &plan, &pt);
        assert!(image.binary_search(&pt).is_ok());
        // Sorted and duplicate-free.
        assert!(image.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn interior_transition_is_a_window_of_balls() {
        // Non-terminal layers need the full horizon at level 2.
        let prob = ControlProblem::preset("moc1").unwrap();
        let plan = plan_grid(&prob, 2, SolveMode::Strict, ImageSampling::Vertices).unwrap();
        assert!(!plan.is_terminal(1));
        let single = ControlProblem::polynomial_biobjective(
            "one",
            0.5,
            1.0,
            &[1.0],
            crate::problem::Polynomial::new(vec![-1.0, 1.0]),
        )
        .unwrap();
        let pt = (1usize, vec![16i64], vec![0i64, 0]);
        let image = gamma_transition(&single, &plan, &pt);
        // Five layers × five states × (7×7) costs, one control.
        assert_eq!(image.len(), 5 * 5 * 49);
        let layers: BTreeSet<usize> = image.iter().map(|(l, _, _)| *l).collect();
        assert_eq!(layers.into_iter().collect::<Vec<_>>(), vec![3, 4, 5, 6, 7]);
    }

    #[test]
    fn fixpoint_of_reflexive_transition_is_immediate() {
        let (prob, plan) = tiny_plan();
        let w = tiny_window(&plan);
        let set = build_constraint_set(&plan, 5, &w).unwrap();
        // All layers of the tiny instance are terminal, so every point is its
        // own witness and the constraint set is already the kernel.
        assert!(plan.is_terminal(0));
        let (passes, kernel) = kernel_fixpoint(
            &set,
            |pt, members| survives_union(&prob, &plan, pt, members),
            50,
        )
        .unwrap();
        assert_eq!(passes, 1);
        assert_eq!(kernel.points, set.points);
    }

    #[test]
    fn empty_initial_set_stays_empty() {
        let (prob, plan) = tiny_plan();
        let w = tiny_window(&plan);
        let empty = KernelSet { points: BTreeSet::new(), window: w, clipped: false };
        let (passes, kernel) = kernel_fixpoint(
            &empty,
            |pt, members| survives_union(&prob, &plan, pt, members),
            50,
        )
        .unwrap();
        assert_eq!(passes, 1);
        assert!(kernel.points.is_empty());
    }

    #[test]
    fn hull_membership_interval_and_polygon() {
        // Two unit-radius boxes at 0 and 10: the segment between them is in
        // the hull, not the union.
        let boxes = vec![
            BallBox { center: vec![0.0], radius: vec![1.0] },
            BallBox { center: vec![10.0], radius: vec![1.0] },
        ];
        assert!(in_box_hull(&[5.0], &boxes).unwrap());
        assert!(in_box_hull(&[10.9], &boxes).unwrap());
        assert!(!in_box_hull(&[11.5], &boxes).unwrap());

        // Three boxes: midpoint of two, far from the third.
        let boxes3 = vec![
            BallBox { center: vec![0.0, 0.0], radius: vec![0.5, 0.5] },
            BallBox { center: vec![4.0, 0.0], radius: vec![0.5, 0.5] },
            BallBox { center: vec![0.0, 4.0], radius: vec![0.5, 0.5] },
        ];
        assert!(in_box_hull(&[2.0, 0.0], &boxes3).unwrap());
        assert!(in_box_hull(&[1.0, 1.0], &boxes3).unwrap());
        assert!(!in_box_hull(&[3.0, 3.0], &boxes3).unwrap());
        assert!(in_box_hull(&[2.0, 2.25], &boxes3).unwrap());
        assert!(!in_box_hull(&[2.6, 2.6], &boxes3).unwrap());
    }

    #[test]
    fn hull_transition_bridges_the_control_gap() {
        // At level 2 on the full horizon, the two control images sit 16
        // lattice steps apart; the hull contains the midpoint, the union
        // does not.
        let prob = ControlProblem::preset("moc1").unwrap();
        let plan = plan_grid(&prob, 2, SolveMode::Strict, ImageSampling::Vertices).unwrap();
        let pt = (1usize, vec![16i64], vec![0i64, 0]);
        let image = gamma_transition(&prob, &plan, &pt);
        let mid = (3usize, vec![16i64], vec![0i64, 0]);
        assert!(image.binary_search(&mid).is_err());
        let members: HashSet<KernelPoint> = [mid].into_iter().collect();
        assert!(survives_hull(&prob, &plan, &pt, &members).unwrap());
        assert!(!survives_union(&prob, &plan, &pt, &members));
    }

    #[test]
    fn degenerate_cross_check_matches_exactly() {
        let cfg = CrossCheckConfig::tiny_default().unwrap();
        let report = cross_check(&cfg).unwrap();
        assert_eq!(report.cost_floor_rate, 5);
        assert!(report.clipped);
        assert_eq!(report.constraint_points, 52513);
        // All-terminal: the constraint set is already viable.
        assert_eq!(report.kernel_points, report.constraint_points);
        assert_eq!(report.kernel_passes, 1);
        assert!(report.value_monotone);
        assert!(report.interior_points > 0);
        assert!(report.interior_match, "kernel and epigraph disagree: {report:?}");
        // More witnesses can only help survival, and everything already
        // survives, so the hull kernel is identical.
        assert_eq!(report.hull_union_gap, Some(0));
    }

    #[test]
    fn half_horizon_cross_check_matches_on_the_interior() {
        // Full horizon at level 2: four non-terminal layers, so the kernel
        // iteration actually removes points (a wedge at the window boundary
        // whose transition images exit the window) and the value iteration
        // takes a genuine step. The sides still agree exactly on the
        // interior; they differ only where the window truncates the images.
        let base = ControlProblem::preset("moc1").unwrap();
        let problem = ControlProblem::polynomial_biobjective(
            "moc1_half",
            0.5,
            base.x0[0],
            &[-1.0, 1.0],
            base.integrand().unwrap().clone(),
        )
        .unwrap();
        let x0 = problem.x0[0];
        let cfg = CrossCheckConfig {
            problem,
            level: 2,
            state_window: vec![(x0 - 0.5, x0 + 0.5)],
            cost_window: vec![(-0.75, 0.75), (-0.75, 0.75)],
            cost_floor_rate: None,
            max_iterations: 500,
            compare_hull: false,
        };
        let report = cross_check(&cfg).unwrap();
        assert_eq!(report.constraint_points, 95013);
        assert_eq!(report.kernel_points, 94613);
        assert_eq!(report.kernel_passes, 2);
        assert_eq!(report.value_iterations, 2);
        assert!(report.value_monotone);
        assert_eq!(report.interior_points, 5225);
        assert!(report.interior_match, "cross-check mismatch: {report:?}");
        // Globally the sides disagree (boundary effects), which is exactly
        // why the comparison is interior-restricted.
        assert_ne!(report.epigraph_points, report.kernel_points);
    }

    #[test]
    fn value_iteration_is_stationary_on_the_degenerate_instance() {
        let (prob, plan) = tiny_plan();
        let w = tiny_window(&plan);
        let vi = windowed_value_iteration(&prob, &plan, 5, &w, 50).unwrap();
        assert_eq!(vi.iterations, 1);
        assert!(vi.monotone);
        // Every slice is the clamped floor singleton.
        for ((layer, _), front) in &vi.fronts {
            let floor = floor_coord(&plan, 5, *layer);
            let want = vec![floor.max(-12); 2];
            assert_eq!(front.rows(), vec![want]);
        }
    }
}
