//! `moc` — solve multiobjective optimal control problems on a lattice,
//! emit Pareto fronts and convergence tables, and cross-check the solver
//! against the viability-kernel fixpoint.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 computation
//! failure (a numeric guard tripped or a cross-check did not pass).

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use moc_solver::frontio::{format_significant, front_to_csv, read_front_csv};
use moc_solver::metrics::{convergence_table, hausdorff};
use moc_solver::oracle::{analytic_front, objective_curve, DEFAULT_CURVE_SAMPLES};
use moc_solver::pareto::{filter_fast, ParetoFront};
use moc_solver::problem::ControlProblem;
use moc_solver::solver::{
    backward_solve, plan_grid, with_thread_count, ImageSampling, SolveMode,
};
use moc_solver::viability::{cross_check, CrossCheckConfig};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "moc",
    version,
    about = "Finite Pareto front approximations for multiobjective optimal control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem and emit the Pareto front at the start point.
    Solve(SolveArgs),
    /// Emit the analytic reference front of a polynomial-family problem.
    Oracle(OracleArgs),
    /// Hausdorff-compare a front CSV against a reference front.
    Compare(CompareArgs),
    /// Solve across refinement levels and write convergence tables.
    Table(TableArgs),
    /// Cross-check the recursion against the viability-kernel fixpoint.
    KernelCheck(KernelCheckArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Preset name (moc1..moc4) or path to a problem JSON file.
    #[arg(long)]
    problem: String,
    /// Refinement level i ≥ 2: time step 2^-i, lattice step 2^-2i.
    #[arg(long)]
    level: u32,
    /// Use the tightened construction (time-window targets and cost balls)
    /// instead of the default single-target rounding.
    #[arg(long)]
    strict: bool,
    /// Worker threads for the backward recursion (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Write the front CSV here instead of standard output.
    #[arg(long)]
    out_front: Option<PathBuf>,
    /// Write run statistics JSON here instead of standard output.
    #[arg(long)]
    out_stats: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Preset name (moc1..moc4) or path to a problem JSON file; the problem
    /// must be in the built-in polynomial family.
    #[arg(long)]
    problem: String,
    /// Objective-curve sample count (the front is filtered from these).
    #[arg(long, default_value_t = DEFAULT_CURVE_SAMPLES)]
    samples: usize,
    /// Write the reference front CSV here instead of standard output.
    #[arg(long)]
    out_front: Option<PathBuf>,
    /// Also write the full objective curve (unfiltered, in parameter order).
    #[arg(long)]
    out_curve: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Front CSV to measure.
    #[arg(long)]
    front: PathBuf,
    /// Reference front CSV; omit to compare against the analytic oracle.
    #[arg(long, conflicts_with_all = ["problem", "samples"])]
    reference: Option<PathBuf>,
    /// Problem whose analytic front is the reference.
    #[arg(long, required_unless_present = "reference")]
    problem: Option<String>,
    /// Oracle sample count when comparing against the analytic front.
    #[arg(long, default_value_t = DEFAULT_CURVE_SAMPLES)]
    samples: usize,
}

#[derive(Args)]
struct TableArgs {
    /// Comma-separated preset names or problem JSON paths.
    #[arg(long, value_delimiter = ',', required = true)]
    problems: Vec<String>,
    /// Comma-separated refinement levels, strictly ascending.
    #[arg(long, value_delimiter = ',', required = true)]
    levels: Vec<u32>,
    /// Oracle sample count for the reference front.
    #[arg(long, default_value_t = DEFAULT_CURVE_SAMPLES)]
    samples: usize,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Directory for the per-problem table CSVs.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct KernelCheckArgs {
    /// Preset name or problem JSON path (polynomial family).
    #[arg(long, default_value = "moc1")]
    problem: String,
    /// Horizon of the check instance (overrides the problem's horizon).
    #[arg(long, default_value_t = 0.25)]
    horizon: f64,
    /// Refinement level of the check instance.
    #[arg(long, default_value_t = 2)]
    level: u32,
    /// State window half-width around the start state.
    #[arg(long, default_value_t = 0.5)]
    state_radius: f64,
    /// Cost window half-width: each cost axis spans [-r, r].
    #[arg(long, default_value_t = 0.75)]
    cost_radius: f64,
    /// Cost floor slope override (smallest admissible slope by default).
    #[arg(long)]
    floor_slope: Option<i64>,
    /// Iteration cap for both fixpoint loops.
    #[arg(long, default_value_t = 500)]
    max_iterations: usize,
    /// Skip the convex-hull transition comparison (faster).
    #[arg(long)]
    skip_hull: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Table(args) => cmd_table(args),
        Command::KernelCheck(args) => cmd_kernel_check(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code_for(&err)
        }
    }
}

/// Map failures onto the documented exit codes: configuration and I/O
/// problems are usage errors (2); tripped numeric guards and failed checks
/// are computation failures (3).
fn exit_code_for(err: &anyhow::Error) -> ExitCode {
    use moc_solver::Error as E;
    let code = match err.downcast_ref::<E>() {
        Some(
            E::Config(_)
            | E::Grid(_)
            | E::UnknownPreset(_)
            | E::Csv(_)
            | E::Io(_)
            | E::DimensionMismatch { .. }
            | E::EmptyWindow
            | E::KeyRelation { .. },
        ) => 2,
        Some(_) => 3,
        None => 2,
    };
    ExitCode::from(code)
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn mode_name(mode: SolveMode) -> &'static str {
    match mode {
        SolveMode::Simplified => "simplified",
        SolveMode::Strict => "strict",
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let problem = ControlProblem::load(&args.problem)?;
    let mode = if args.strict { SolveMode::Strict } else { SolveMode::Simplified };
    let plan = plan_grid(&problem, args.level, mode, ImageSampling::Hull)?;

    // The start state lives on the lattice; warn when the configured one
    // doesn't, because the solved problem then starts at the snapped point.
    let lattice = plan.lattice();
    let snapped = lattice.to_real(&lattice.snap(&problem.x0));
    if snapped
        .iter()
        .zip(&problem.x0)
        .any(|(s, x)| (s - x).abs() > 1e-12)
    {
        eprintln!(
            "warning: start state {:?} is off-lattice at level {}; solving from {:?}",
            problem.x0, args.level, snapped
        );
    }

    let started = Instant::now();
    let solution = with_thread_count(args.threads, || backward_solve(&problem, &plan))??;
    let wall_time = started.elapsed().as_secs_f64();

    let front = solution.start_front();
    let csv = front_to_csv(&front.rows())?;
    emit(&csv, args.out_front.as_deref())?;

    let stats = json!({
        "problem": problem.name,
        "level": args.level,
        "mode": mode_name(mode),
        "sampling": "hull",
        "threads": args.threads,
        "grid_points": solution.domain.points,
        "successor_edges": solution.domain.edges,
        "front_cardinality": front.len(),
        "wall_time": wall_time,
        "hausdorff": serde_json::Value::Null,
    });
    let mut text = serde_json::to_string_pretty(&stats)?;
    text.push('\n');
    emit(&text, args.out_stats.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(args: OracleArgs) -> Result<ExitCode> {
    let problem = ControlProblem::load(&args.problem)?;
    let front = analytic_front(&problem, args.samples)?;
    let csv = front_to_csv(&front.rows())?;
    emit(&csv, args.out_front.as_deref())?;

    if let Some(path) = &args.out_curve {
        let flat = objective_curve(&problem, args.samples)?;
        let rows: Vec<Vec<f64>> = flat.chunks_exact(problem.cost_dim).map(<[f64]>::to_vec).collect();
        let mut text = String::from("j1,j2\n");
        for row in &rows {
            let fields: Vec<String> = row.iter().map(|v| format_significant(*v)).collect();
            text.push_str(&fields.join(","));
            text.push('\n');
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn load_front_file(path: &Path) -> Result<ParetoFront<f64>> {
    let rows = read_front_csv(path).with_context(|| format!("reading {}", path.display()))?;
    if rows.is_empty() {
        return Err(anyhow!("{}: no points", path.display()));
    }
    let dim = rows[0].len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(filter_fast(dim, &flat)?)
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    let front = load_front_file(&args.front)?;
    let reference = match (&args.reference, &args.problem) {
        (Some(path), _) => load_front_file(path)?,
        (None, Some(name)) => {
            let problem = ControlProblem::load(name)?;
            analytic_front(&problem, args.samples)?
        }
        (None, None) => unreachable!("clap enforces reference or problem"),
    };
    let distance = hausdorff(&front, &reference)?;
    let report = json!({
        "hausdorff": distance,
        "cardinality_front": front.len(),
        "cardinality_ref": reference.len(),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn cmd_table(args: TableArgs) -> Result<ExitCode> {
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    for name in &args.problems {
        let problem = ControlProblem::load(name)?;
        let entries = with_thread_count(args.threads, || {
            convergence_table(
                &problem,
                &args.levels,
                SolveMode::Simplified,
                ImageSampling::Hull,
                args.samples,
            )
        })??;
        let mut text = String::from(
            "level,grid_points,successor_edges,front_cardinality,hausdorff,normalized_hausdorff\n",
        );
        for entry in &entries {
            let r = &entry.row;
            text.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.level,
                r.grid_points,
                r.successor_edges,
                r.front_cardinality,
                format_significant(r.hausdorff),
                format_significant(r.normalized_hausdorff),
            ));
        }
        let path = args.out_dir.join(format!("{}_table.csv", sanitize(&problem.name)));
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_kernel_check(args: KernelCheckArgs) -> Result<ExitCode> {
    let base = ControlProblem::load(&args.problem)?;
    let problem = if (base.horizon - args.horizon).abs() < 1e-12 {
        base
    } else {
        let integrand = base
            .integrand()
            .ok_or_else(|| {
                moc_solver::Error::Config(
                    "horizon override requires the built-in polynomial family".to_string(),
                )
            })?
            .clone();
        let controls: Vec<f64> = base.controls.iter().map(|u| u[0]).collect();
        ControlProblem::polynomial_biobjective(
            &base.name,
            args.horizon,
            base.x0[0],
            &controls,
            integrand,
        )?
    };

    let cfg = CrossCheckConfig {
        state_window: problem
            .x0
            .iter()
            .map(|&x| (x - args.state_radius, x + args.state_radius))
            .collect(),
        cost_window: vec![(-args.cost_radius, args.cost_radius); problem.cost_dim],
        problem,
        level: args.level,
        cost_floor_rate: args.floor_slope,
        max_iterations: args.max_iterations,
        compare_hull: !args.skip_hull,
    };
    let report = cross_check(&cfg)?;
    if report.clipped {
        eprintln!(
            "warning: the cost window clips the constraint set's floor; \
             boundary points are excluded from the comparison"
        );
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    let pass = report.interior_match && report.value_monotone;
    eprintln!("kernel-check: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use moc_solver::frontio::parse_front_csv;

    #[test]
    fn exit_codes_by_error_kind() {
        use moc_solver::Error as E;
        let config: anyhow::Error = E::Config("x".into()).into();
        let guard: anyhow::Error = E::PathGuard(10, 5).into();
        let density: anyhow::Error = E::DensityGuard(10, 1000).into();
        let plain = anyhow!("not a solver error");
        assert_eq!(exit_code_for(&config), ExitCode::from(2));
        assert_eq!(exit_code_for(&guard), ExitCode::from(3));
        assert_eq!(exit_code_for(&density), ExitCode::from(3));
        assert_eq!(exit_code_for(&plain), ExitCode::from(2));
    }

    #[test]
    fn sanitize_keeps_simple_names() {
        assert_eq!(sanitize("moc1"), "moc1");
        assert_eq!(sanitize("a b/c"), "a_b_c");
    }

    #[test]
    fn parse_front_round_trip_through_string() {
        let rows = vec![vec![0.125, -0.5]];
        let text = front_to_csv(&rows).unwrap();
        assert_eq!(parse_front_csv(&text).unwrap(), rows);
    }
}
