//! Command-line frontend for the firebreak scheduling library.
//!
//! Exit codes: 0 success, 1 invalid input, 2 no feasible schedule (or an
//! exceeded search cap), 3 I/O failure, 64 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use firebreak::dynamics::{default_eps, is_feasible, simulate, Schedule};
use firebreak::landscape::{
    default_edge_weights, load_landscape, save_landscape, Landscape, VegClass, WeightScheme,
};
use firebreak::mip::{
    build_phase1, build_phase2, check_assignment, parse_lp, read_solution,
    schedule_from_assignment, write_model, MipModel, ModelFormat, SolutionDialect,
};
use firebreak::pipeline::{
    compare_levels, generate_synthetic, old_fraction, report_for_schedule, run_phase1,
    run_phase2, write_report, StopRule,
};
use firebreak::search::{solve, Phase, SolveStatus, SolverKind};

#[derive(Parser)]
#[command(name = "firebreak", version, about = "Multi-period fuel treatment scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand that loads an instance.
#[derive(Args)]
struct InstanceArgs {
    /// Instance JSON file
    instance: PathBuf,
    /// Override the yearly budget fraction
    #[arg(long)]
    rho: Option<f64>,
    /// Override the high-risk area share threshold
    #[arg(long = "H")]
    h: Option<f64>,
    /// Override the planning horizon
    #[arg(long = "T")]
    horizon: Option<u32>,
    /// Recompute edge weights: unit, combined_area or shared_boundary_fraction
    #[arg(long)]
    weights: Option<WeightScheme>,
}

impl InstanceArgs {
    fn load(&self) -> firebreak::Result<Landscape> {
        let mut ls = load_landscape(&self.instance)?;
        if let Some(rho) = self.rho {
            ls = ls.with_rho(rho)?;
        }
        if let Some(h) = self.h {
            ls = ls.with_h(h)?;
        }
        if let Some(t) = self.horizon {
            ls = ls.with_horizon(t)?;
        }
        if let Some(scheme) = self.weights {
            let w = default_edge_weights(&ls, scheme)?;
            ls = ls.with_edge_weights(&w)?;
        }
        Ok(ls)
    }
}

#[derive(Args)]
struct SolverArgs {
    /// exhaustive, bnb or greedy
    #[arg(long, default_value = "bnb")]
    solver: SolverKind,
    /// Random seed (greedy construction and restarts)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (reserved; all solvers currently run single-threaded)
    #[arg(long, default_value_t = 1)]
    #[allow(dead_code)]
    workers: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate an instance, printing summary statistics
    Validate {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Simulate a schedule and report the resulting series
    Simulate {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Schedule CSV (unit_id,t)
        #[arg(long)]
        schedule: PathBuf,
        /// Directory for patch/unit state CSVs
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the optimisation model as LP or MPS text
    Build {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Output file
        #[arg(long)]
        out: PathBuf,
        /// lp or mps
        #[arg(long, default_value = "lp")]
        format: ModelFormat,
        /// Build the preparatory (backlog-clearing) model over N periods
        #[arg(long, value_name = "N")]
        phase1: Option<u32>,
        /// Keep age variables for untreatable units instead of fixing their risk
        #[arg(long)]
        no_reduce: bool,
    },
    /// Verify an externally solved model against every constraint
    Check {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Check against this LP model file instead of rebuilding the model
        #[arg(long)]
        model: Option<PathBuf>,
        /// Solution file from an external solver
        #[arg(long)]
        solution: PathBuf,
        /// generic_csv or lp_sol_xml
        #[arg(long, default_value = "generic_csv")]
        dialect: SolutionDialect,
        #[arg(long, value_name = "N")]
        phase1: Option<u32>,
        #[arg(long)]
        no_reduce: bool,
        /// Write the extracted schedule here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the full plan and print the schedule
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Directory for schedule.csv and series.csv
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grow the preparatory horizon until the stop rule holds
    Phase1 {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// phase2_feasible or old_below=<f>
        #[arg(long, default_value = "phase2_feasible")]
        stop: String,
        /// Largest preparatory horizon to try
        #[arg(long, default_value_t = 15)]
        n_max: u32,
        /// Write the schedule and the aged instance here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the full plan and write a report directory
    Phase2 {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Report directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the plan at several budget levels and tabulate the results
    Compare {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Comma-separated rho values, e.g. 0.05,0.10,0.15
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<f64>,
    },
    /// Generate a synthetic instance
    Generate {
        /// Number of treatment units
        #[arg(long, default_value_t = 30)]
        units: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Target old (beyond maximum TFI) area share
        #[arg(long, default_value_t = 0.3)]
        old_frac: f64,
        /// Output instance JSON
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code_for(err: &firebreak::Error) -> u8 {
    use firebreak::Error::*;
    match err {
        Validation(_) | Parse(_) | Model(_) | Csv(_) => 1,
        Infeasible(_) | CapExceeded(_) => 2,
        Io(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn build_model(ls: &Landscape, phase1: Option<u32>, no_reduce: bool) -> firebreak::Result<MipModel> {
    match phase1 {
        Some(n) => build_phase1(ls, n, &default_eps(ls)),
        None => build_phase2(ls, !no_reduce),
    }
}

fn print_schedule(schedule: &Schedule) {
    if schedule.is_empty() {
        println!("schedule: (no treatments)");
        return;
    }
    println!("schedule:");
    let mut pairs: Vec<(&str, u32)> = schedule.pairs().collect();
    pairs.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| firebreak::landscape::natural_cmp(a.0, b.0)));
    for (unit, t) in pairs {
        println!("  year {t}: unit {unit}");
    }
}

fn write_schedule_csv(schedule: &Schedule, path: &Path) -> firebreak::Result<()> {
    let mut buf = Vec::new();
    schedule.write_csv(&mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

fn run(cli: Cli) -> firebreak::Result<ExitCode> {
    match cli.command {
        Command::Validate { instance } => {
            let ls = instance.load()?;
            println!("instance ok");
            println!("units: {} ({} treatable)", ls.units().len(),
                ls.units().values().filter(|u| u.treatable).count());
            println!("patches: {}", ls.patches().len());
            println!("edges: {}", ls.edges().len());
            println!("treatable area: {}", ls.treatable_area());
            println!("budget cap per period: {}", ls.rho() * ls.treatable_area());
            println!("old share: {}", old_fraction(&ls, false));
        }
        Command::Simulate { instance, schedule, out } => {
            let ls = instance.load()?;
            let text = std::fs::read_to_string(&schedule)?;
            let sched = Schedule::read_csv(&ls, &text)?;
            let feas = is_feasible(&ls, &sched);
            let traj = simulate(&ls, &sched);
            println!("feasible: {}", feas.feasible);
            for v in &feas.violations {
                println!("violation: {:?} unit={:?} t={}", v.tag, v.unit, v.t);
            }
            println!("t,connectivity,weighted");
            for t in 0..=ls.horizon() {
                println!("{t},{},{}", traj.connectivity_count(t), traj.weighted_connectivity(t));
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                let mut buf = Vec::new();
                traj.write_patch_csv(&mut buf)?;
                std::fs::write(dir.join("patches.csv"), buf)?;
                let mut buf = Vec::new();
                traj.write_unit_csv(&mut buf)?;
                std::fs::write(dir.join("units.csv"), buf)?;
            }
            if !feas.feasible {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Build { instance, out, format, phase1, no_reduce } => {
            let ls = instance.load()?;
            let model = build_model(&ls, phase1, no_reduce)?;
            write_model(&model, format, &out)?;
            println!(
                "wrote {} ({} variables, {} constraints)",
                out.display(),
                model.variables().len(),
                model.constraints().len()
            );
        }
        Command::Check { instance, model, solution, dialect, phase1, no_reduce, out } => {
            let ls = instance.load()?;
            let model = match model {
                Some(path) => parse_lp(&std::fs::read_to_string(&path)?)?,
                None => build_model(&ls, phase1, no_reduce)?,
            };
            let read = read_solution(&model, &solution, dialect)?;
            for w in &read.warnings {
                eprintln!("warning: {w}");
            }
            let report = check_assignment(&model, &read.assignment)?;
            let horizon = phase1.unwrap_or(ls.horizon());
            let sched = schedule_from_assignment(&ls, &read.assignment, horizon)?;
            println!("model rows satisfied: {}", report.feasible);
            for v in &report.violated_rows {
                println!("violated: {} activity={} rhs={}", v.row, v.activity, v.rhs);
            }
            for name in &report.fractional_binaries {
                println!("not binary: {name}");
            }
            println!("objective: {}", model.objective_value(&read.assignment)?);
            print_schedule(&sched);
            if let Some(path) = out {
                write_schedule_csv(&sched, &path)?;
            }
            if !report.feasible {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Solve { instance, solver, out } => {
            let ls = instance.load()?;
            let res = solve(&ls, &Phase::Phase2, solver.solver, solver.seed)?;
            println!("status: {:?}", res.status);
            println!("nodes: {}", res.nodes_explored);
            match (&res.schedule, res.objective) {
                (Some(sched), Some(z)) => {
                    println!("objective: {z}");
                    print_schedule(sched);
                    if let Some(dir) = out {
                        let report = report_for_schedule(&ls, sched.clone());
                        write_report(&ls, &report, &dir)?;
                        println!("report written to {}", dir.display());
                    }
                }
                _ => {
                    return Err(firebreak::Error::Infeasible(
                        "no feasible schedule found".into(),
                    ))
                }
            }
        }
        Command::Phase1 { instance, solver, stop, n_max, out } => {
            let ls = instance.load()?;
            let rule = parse_stop_rule(&stop)?;
            let outcome = run_phase1(&ls, rule, n_max, solver.solver, solver.seed)?;
            println!("preparatory periods: {}", outcome.n);
            println!("old share after: {}", outcome.old_fraction);
            print_schedule(&outcome.schedule);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                write_schedule_csv(&outcome.schedule, &dir.join("schedule.csv"))?;
                save_landscape(&outcome.aged_landscape, dir.join("aged_instance.json"))?;
            }
        }
        Command::Phase2 { instance, solver, out } => {
            let ls = instance.load()?;
            let report = run_phase2(&ls, solver.solver, solver.seed)?;
            write_report(&ls, &report, &out)?;
            println!("status: {:?}", report.status);
            println!("objective: {}", report.objective);
            println!("report written to {}", out.display());
            if report.status == SolveStatus::NodeBudgetExhausted {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Compare { instance, solver, levels } => {
            let ls = instance.load()?;
            let rows = compare_levels(&ls, &levels, solver.solver, solver.seed)?;
            println!("rho,status,objective,mean_connectivity");
            for r in rows {
                println!(
                    "{},{:?},{},{}",
                    r.rho, r.report.status, r.report.objective, r.mean_connectivity
                );
            }
        }
        Command::Generate { units, seed, old_frac, out } => {
            let ls = generate_synthetic(units, &default_veg_table(), seed, old_frac)?;
            save_landscape(&ls, &out)?;
            println!("wrote {} ({} units, {} patches, {} edges)",
                out.display(), ls.units().len(), ls.patches().len(), ls.edges().len());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_stop_rule(s: &str) -> firebreak::Result<StopRule> {
    if s == "phase2_feasible" {
        return Ok(StopRule::Phase2Feasible);
    }
    if let Some(v) = s.strip_prefix("old_below=") {
        let f: f64 = v
            .parse()
            .map_err(|_| firebreak::Error::Validation(format!("bad stop threshold {v:?}")))?;
        return Ok(StopRule::OldFractionBelow(f));
    }
    Err(firebreak::Error::Validation(format!(
        "unknown stop rule {s:?} (use phase2_feasible or old_below=<f>)"
    )))
}

/// Built-in vegetation classes for `generate`, spanning short and long
/// tolerable fire intervals.
fn default_veg_table() -> Vec<VegClass> {
    let mk = |code: &str, min, max, d| VegClass {
        code: code.into(),
        name: format!("EVC {code}"),
        min_tfi: min,
        max_tfi: max,
        risk_threshold: d,
    };
    vec![mk("1", 3, 10, 5), mk("3", 4, 15, 7), mk("6", 7, 20, 10)]
}
