//! Set-valued dynamic programming for finite-horizon multiobjective optimal control.
//!
//! The solver computes finite approximations of the Pareto optimal set of the
//! vector-valued objective of a control system `x' = f(x, u)` with running cost
//! `L(x, u) ∈ R^p`, by discretizing time, state, and objective space on a common
//! lattice and running a backward multiobjective dynamic programming recursion
//! whose per-point values are Pareto fronts of lattice cost vectors.
//!
//! Module map:
//!
//! * [`pareto`] — domination, Pareto filtering, incremental filtering, external
//!   stability checks. Everything downstream reduces to these set operations.
//! * [`lattice`] — snap/round helpers and lattice-ball enumeration shared by the
//!   solver and the viability kernel.
//! * [`problem`] — problem descriptions: the built-in polynomial biobjective
//!   family (presets `moc1`–`moc4`), JSON problem configs, and constant
//!   (Lipschitz/bound) estimation.
//! * [`solver`] — grid planning, successor enumeration, forward domain
//!   construction, the backward Pareto recursion, and a brute-force path
//!   enumeration reference for tiny instances.
//! * [`oracle`] — closed-form objective curves and dense-sampling reference
//!   fronts for the polynomial family.
//! * [`metrics`] — Hausdorff distance and convergence tables.
//! * [`viability`] — the epigraphic viability-kernel engine used to cross-check
//!   the recursion against an independent fixed-point characterization.
//! * [`frontio`] — deterministic CSV/JSON emission for fronts and run reports.

pub mod frontio;
pub mod lattice;
pub mod metrics;
pub mod oracle;
pub mod pareto;
pub mod problem;
pub mod solver;
pub mod viability;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty point set")]
    EmptySet,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate encountered")]
    NonFinite,
    #[error("unknown preset `{0}` (available: moc1, moc2, moc3, moc4)")]
    UnknownPreset(String),
    #[error("invalid problem config: {0}")]
    Config(String),
    #[error("invalid grid plan: {0}")]
    Grid(String),
    #[error("layer {0} out of range (grid has {1} layers)")]
    LayerOutOfRange(usize, usize),
    #[error("layer {0} is terminal and has no successors")]
    TerminalLayer(usize),
    #[error("successor value undefined at layer {layer}, state {state:?}")]
    UndefinedSuccessor { layer: usize, state: Vec<i64> },
    #[error("path count {0} exceeds the brute-force guard of {1}")]
    PathGuard(u128, u128),
    #[error("sample count {0} is below the density guard of {1}")]
    DensityGuard(usize, usize),
    #[error(
        "key relation violated: step·cost_bound + margin = {lhs} > {rhs} = (step − 2·lattice)·floor_slope"
    )]
    KeyRelation { lhs: f64, rhs: f64 },
    #[error("viability window is empty or inverted")]
    EmptyWindow,
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
