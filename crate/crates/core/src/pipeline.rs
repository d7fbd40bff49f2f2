//! End-to-end planning workflows: the two-phase procedure, budget-level
//! comparison, report emission and synthetic instance generation.
//!
//! Every reported series is recomputed from the ground-truth simulator, never
//! read back from solver auxiliaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{default_eps, is_feasible, objective_phase2, simulate, simulate_over, Schedule};
use crate::landscape::{Landscape, Params, Patch, UnitDef, VegClass};
use crate::search::{solve, Phase, SolveStatus, SolverKind};
use crate::{Error, Result};

/// Share of the treatable area sitting in backlog units: treatable units
/// holding a patch at or beyond its maximum tolerable fire interval and no
/// young patch, i.e. units whose treatment is overdue and not blocked.
/// Area share by default; `by_count` switches to the fraction of treatable
/// units.
pub fn old_fraction(landscape: &Landscape, by_count: bool) -> f64 {
    old_fraction_of_ages(
        landscape,
        &landscape.patches().iter().map(|(id, p)| (id.clone(), p.initial_age)).collect(),
        by_count,
    )
}

fn old_fraction_of_ages(
    landscape: &Landscape,
    ages: &BTreeMap<String, u32>,
    by_count: bool,
) -> f64 {
    let mut overdue = 0.0;
    let mut total = 0.0;
    for unit in landscape.units().values() {
        if !unit.treatable {
            continue;
        }
        let w = if by_count { 1.0 } else { unit.area };
        total += w;
        let mut any_old = false;
        let mut any_young = false;
        for pid in &unit.patches {
            let veg = landscape.veg_of(pid);
            any_old |= ages[pid] >= veg.max_tfi;
            any_young |= ages[pid] < veg.min_tfi;
        }
        if any_old && !any_young {
            overdue += w;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        overdue / total
    }
}

/// When the phase-1 loop may stop growing its horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// The aged landscape admits a feasible full plan.
    Phase2Feasible,
    /// The backlog share of the treatable area (see [`old_fraction`]) has
    /// fallen below this.
    OldFractionBelow(f64),
}

#[derive(Debug, Clone)]
pub struct Phase1Outcome {
    /// Number of preparatory periods used.
    pub n: u32,
    /// Backlog-clearing schedule over periods 1..=n (empty when n = 0).
    pub schedule: Schedule,
    /// The landscape re-based to the ages after the preparatory periods.
    pub aged_landscape: Landscape,
    /// Backlog share (treatable area) of the aged landscape.
    pub old_fraction: f64,
}

fn stop_satisfied(landscape: &Landscape, rule: StopRule, solver: SolverKind, seed: u64) -> Result<bool> {
    match rule {
        StopRule::OldFractionBelow(f) => Ok(old_fraction(landscape, false) < f),
        StopRule::Phase2Feasible => {
            let res = solve(landscape, &Phase::Phase2, solver, seed)?;
            Ok(res.schedule.is_some())
        }
    }
}

/// Grows the preparatory horizon N = 0, 1, 2, ... and re-solves the
/// backlog-clearing problem from scratch at each N until the stop rule is
/// satisfied on the aged landscape, or errors once N would exceed `n_max`.
pub fn run_phase1(
    landscape: &Landscape,
    rule: StopRule,
    n_max: u32,
    solver: SolverKind,
    seed: u64,
) -> Result<Phase1Outcome> {
    if stop_satisfied(landscape, rule, solver, seed)? {
        return Ok(Phase1Outcome {
            n: 0,
            schedule: Schedule::empty(),
            aged_landscape: landscape.clone(),
            old_fraction: old_fraction(landscape, false),
        });
    }
    for n in 1..=n_max {
        let phase = Phase::Phase1 { n, eps: default_eps(landscape) };
        let res = solve(landscape, &phase, solver, seed)?;
        let Some(schedule) = res.schedule else {
            continue; // even an empty schedule is feasible, so this is defensive
        };
        let traj = simulate_over(landscape, &schedule, n);
        let aged = landscape.with_initial_ages(&traj.final_ages())?;
        if stop_satisfied(&aged, rule, solver, seed)? {
            return Ok(Phase1Outcome {
                n,
                schedule,
                old_fraction: old_fraction(&aged, false),
                aged_landscape: aged,
            });
        }
    }
    Err(Error::Infeasible(format!(
        "stop rule not reached within {n_max} preparatory periods"
    )))
}

/// Per-unit standing in one period of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitStatus {
    /// The unit is high-risk in this period.
    pub risk: bool,
    /// The unit is treated in this period (always false at t = 0).
    pub treated: bool,
}

/// A solved plan with all reporting series recomputed by simulation, never
/// read back from solver auxiliaries.
#[derive(Debug, Clone)]
pub struct PlanReport {
    /// Preparatory periods used before the plan (0 when none were needed).
    pub phase1_n: u32,
    /// Backlog-clearing schedule over the preparatory periods.
    pub phase1_schedule: Schedule,
    /// The plan itself, over periods 1..=T of (the possibly aged) landscape.
    pub phase2_schedule: Schedule,
    pub objective: f64,
    pub status: SolveStatus,
    /// Unweighted risk-connection count per period, t = 0..=T.
    pub connectivity_series: Vec<u32>,
    /// Weighted connectivity per period, t = 0..=T.
    pub weighted_series: Vec<f64>,
    /// Treated area per period, t = 1..=T.
    pub treated_area_series: Vec<f64>,
    /// Backlog share of the treatable area per period, t = 0..=T.
    pub old_fraction_series: Vec<f64>,
    /// Per-period unit standing (risk, treated), t = 0..=T.
    pub risk_maps: Vec<BTreeMap<String, UnitStatus>>,
    pub nodes_explored: u64,
    pub wall_time: Duration,
}

/// Solves the full plan on the landscape and assembles the report.
pub fn run_phase2(landscape: &Landscape, solver: SolverKind, seed: u64) -> Result<PlanReport> {
    let res = solve(landscape, &Phase::Phase2, solver, seed)?;
    let schedule = res.schedule.ok_or_else(|| {
        Error::Infeasible("no feasible schedule under the budget and TFI rules".into())
    })?;
    Ok(report_for(landscape, schedule, res.status, res.nodes_explored, res.wall_time))
}

/// Builds a [`PlanReport`] for a given (externally obtained) schedule.
pub fn report_for_schedule(landscape: &Landscape, schedule: Schedule) -> PlanReport {
    report_for(landscape, schedule, SolveStatus::Feasible, 0, Duration::ZERO)
}

fn report_for(
    landscape: &Landscape,
    schedule: Schedule,
    status: SolveStatus,
    nodes_explored: u64,
    wall_time: Duration,
) -> PlanReport {
    let t_max = landscape.horizon();
    let traj = simulate(landscape, &schedule);
    let connectivity = (0..=t_max).map(|t| traj.connectivity_count(t)).collect();
    let weighted: Vec<f64> = (0..=t_max).map(|t| traj.weighted_connectivity(t)).collect();
    let treated_area = (1..=t_max)
        .map(|t| {
            landscape
                .units()
                .values()
                .filter(|u| schedule.is_treated(&u.id, t))
                .map(|u| u.area)
                .sum()
        })
        .collect();
    let old_fraction = (0..=t_max)
        .map(|t| {
            let ages = landscape
                .patches()
                .keys()
                .map(|pid| (pid.clone(), traj.age(pid, t)))
                .collect();
            old_fraction_of_ages(landscape, &ages, false)
        })
        .collect();
    let risk_maps = (0..=t_max)
        .map(|t| {
            landscape
                .unit_order()
                .iter()
                .map(|uid| {
                    (
                        uid.clone(),
                        UnitStatus {
                            risk: traj.risk_unit(uid, t),
                            treated: t >= 1 && schedule.is_treated(uid, t),
                        },
                    )
                })
                .collect()
        })
        .collect();
    let objective = objective_phase2(landscape, &traj);
    PlanReport {
        phase1_n: 0,
        phase1_schedule: Schedule::empty(),
        phase2_schedule: schedule,
        objective,
        status,
        connectivity_series: connectivity,
        weighted_series: weighted,
        treated_area_series: treated_area,
        old_fraction_series: old_fraction,
        risk_maps,
        nodes_explored,
        wall_time,
    }
}

/// Writes schedule.csv, series.csv, summary.txt and (when the landscape has
/// unit geometry) one GeoJSON per period into `dir`, creating it if needed.
pub fn write_report(landscape: &Landscape, report: &PlanReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut sched_csv = Vec::new();
    report.phase2_schedule.write_csv(&mut sched_csv)?;
    std::fs::write(dir.join("schedule.csv"), sched_csv)?;

    let t_max = landscape.horizon();
    let mut series = String::from("t,connectivity,weighted,treated_area\n");
    for t in 0..=t_max as usize {
        let treated = if t == 0 { 0.0 } else { report.treated_area_series[t - 1] };
        let _ = writeln!(
            series,
            "{t},{},{},{}",
            report.connectivity_series[t], report.weighted_series[t], treated
        );
    }
    std::fs::write(dir.join("series.csv"), series)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "status: {:?}", report.status);
    let _ = writeln!(summary, "objective (weighted connectivity over horizon): {}", report.objective);
    let _ = writeln!(summary, "preparatory periods: {}", report.phase1_n);
    let _ = writeln!(summary, "treatments: {}", report.phase2_schedule.len());
    let _ = writeln!(summary, "horizon: {t_max}");
    let _ = writeln!(summary, "budget cap per period: {}", landscape.rho() * landscape.treatable_area());
    let _ = writeln!(summary, "initial backlog share: {}", report.old_fraction_series[0]);
    let _ = writeln!(summary, "final backlog share: {}", report.old_fraction_series[t_max as usize]);
    let _ = writeln!(summary, "nodes explored: {}", report.nodes_explored);
    std::fs::write(dir.join("summary.txt"), summary)?;

    if !landscape.geometry().is_empty() {
        for t in 0..=t_max {
            let mut features = Vec::new();
            for uid in landscape.unit_order() {
                let Some(ring) = landscape.geometry().get(uid) else { continue };
                let mut coords: Vec<[f64; 2]> = ring.clone();
                if coords.first() != coords.last() {
                    coords.push(coords[0]);
                }
                let status = report.risk_maps[t as usize][uid];
                features.push(serde_json::json!({
                    "type": "Feature",
                    "geometry": {"type": "Polygon", "coordinates": [coords]},
                    "properties": {
                        "unit": uid,
                        "risk": status.risk,
                        "treated": status.treated,
                    }
                }));
            }
            let doc = serde_json::json!({"type": "FeatureCollection", "features": features});
            std::fs::write(
                dir.join(format!("year_{t}.geojson")),
                serde_json::to_string_pretty(&doc).map_err(|e| Error::parse(e.to_string()))?,
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct LevelOutcome {
    pub rho: f64,
    pub report: PlanReport,
    /// Mean of the risk-connection count over the planning periods t = 1..=T.
    pub mean_connectivity: f64,
}

/// Solves the full plan at each budget level (rho value), in the order given.
/// Any level without a feasible plan is an error.
pub fn compare_levels(
    landscape: &Landscape,
    levels: &[f64],
    solver: SolverKind,
    seed: u64,
) -> Result<Vec<LevelOutcome>> {
    let mut out = Vec::new();
    for &rho in levels {
        let ls = landscape.with_rho(rho)?;
        let report = run_phase2(&ls, solver, seed)?;
        let t_max = ls.horizon() as usize;
        let mean_connectivity = report.connectivity_series[1..=t_max]
            .iter()
            .map(|&c| c as f64)
            .sum::<f64>()
            / t_max as f64;
        out.push(LevelOutcome { rho, report, mean_connectivity });
    }
    Ok(out)
}

/// Deterministic synthetic instance: `n_units` single- to three-patch units
/// over the given vegetation classes, a connected random adjacency, roughly
/// 40% untreatable units, and treatable units pushed past their maximum TFI
/// until the backlog share of the treatable area reaches
/// `old_fraction_target` (within 0.05, else an error). Horizon 5, rho 0.15,
/// H 0.5.
pub fn generate_synthetic(
    n_units: usize,
    veg: &[VegClass],
    seed: u64,
    old_fraction_target: f64,
) -> Result<Landscape> {
    if n_units < 1 {
        return Err(Error::validation("need at least 1 unit"));
    }
    if veg.is_empty() {
        return Err(Error::validation("need at least one vegetation class"));
    }
    if !(0.0..=1.0).contains(&old_fraction_target) {
        return Err(Error::validation("old fraction target must be in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // unit skeletons: patch count, veg and area per patch, treatable flag
    struct Draft {
        id: String,
        treatable: bool,
        patches: Vec<(String, usize, f64)>, // (patch id, veg index, area)
    }
    let mut drafts = Vec::with_capacity(n_units);
    for k in 1..=n_units {
        let id = k.to_string();
        let n_patches = rng.gen_range(1..=3usize);
        let patches = (1..=n_patches)
            .map(|p| (format!("{id}_{p}"), rng.gen_range(0..veg.len()), rng.gen_range(5.0..50.0)))
            .collect();
        drafts.push(Draft { id, treatable: rng.gen_bool(0.6), patches });
    }
    if !drafts.iter().any(|d| d.treatable) {
        drafts[0].treatable = true;
    }

    // ages: backlog units are drawn from the treatable pool until their share
    // of the treatable area reaches the target; everything else stays well
    // under maxTFI
    let treatable_area: f64 = drafts
        .iter()
        .filter(|d| d.treatable)
        .flat_map(|d| &d.patches)
        .map(|p| p.2)
        .sum();
    let mut order: Vec<usize> = (0..n_units).filter(|&k| drafts[k].treatable).collect();
    order.shuffle(&mut rng);
    let mut old_units = vec![false; n_units];
    let mut old_area = 0.0;
    for &k in &order {
        if old_area / treatable_area >= old_fraction_target {
            break;
        }
        let unit_area: f64 = drafts[k].patches.iter().map(|p| p.2).sum();
        // skip units that would overshoot the tolerance; a smaller unit
        // later in the shuffled order may still fit
        if (old_area + unit_area) / treatable_area > old_fraction_target + 0.05 {
            continue;
        }
        old_units[k] = true;
        old_area += unit_area;
    }
    let achieved = old_area / treatable_area;
    if (achieved - old_fraction_target).abs() > 0.05 {
        return Err(Error::validation(format!(
            "old share {achieved:.3} not within 0.05 of target {old_fraction_target:.3} \
             (unit areas too coarse; try a different seed or more units)"
        )));
    }

    let mut units = Vec::new();
    let mut patches = Vec::new();
    for (k, d) in drafts.iter().enumerate() {
        units.push(UnitDef { id: d.id.clone(), treatable: d.treatable, area_override: None });
        for (pid, vi, area) in &d.patches {
            let v = &veg[*vi];
            let age = if old_units[k] {
                v.max_tfi + rng.gen_range(0..=3)
            } else {
                // stays short of maxTFI even after several periods of growth
                let hi = ((v.max_tfi as f64 * 0.55) as u32).max(v.min_tfi);
                rng.gen_range(v.min_tfi..=hi)
            };
            patches.push(Patch {
                id: pid.clone(),
                unit_id: d.id.clone(),
                veg: v.code.clone(),
                area: *area,
                initial_age: age,
            });
        }
    }

    // random geometric adjacency over unit positions, then connect any
    // remaining components through their nearest cross pair
    let pos: Vec<[f64; 2]> =
        (0..n_units).map(|_| [rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)]).collect();
    let radius = 100.0 * (2.5 / n_units as f64).sqrt().min(1.0);
    let dist2 = |a: usize, b: usize| {
        (pos[a][0] - pos[b][0]).powi(2) + (pos[a][1] - pos[b][1]).powi(2)
    };
    let mut adj: Vec<(usize, usize)> = Vec::new();
    for i in 0..n_units {
        for j in i + 1..n_units {
            if dist2(i, j) <= radius * radius {
                adj.push((i, j));
            }
        }
    }
    let mut comp: Vec<usize> = (0..n_units).collect();
    fn find(comp: &mut Vec<usize>, x: usize) -> usize {
        if comp[x] != x {
            let r = find(comp, comp[x]);
            comp[x] = r;
        }
        comp[x]
    }
    for &(i, j) in &adj {
        let (ri, rj) = (find(&mut comp, i), find(&mut comp, j));
        comp[ri] = rj;
    }
    loop {
        let roots: Vec<usize> = (0..n_units).map(|x| find(&mut comp, x)).collect();
        let first = roots[0];
        let Some(stranger) = (0..n_units).find(|&x| roots[x] != first) else { break };
        // nearest pair across the two components
        let mut best = (0usize, stranger, f64::INFINITY);
        for i in (0..n_units).filter(|&x| roots[x] == first) {
            for j in (0..n_units).filter(|&x| roots[x] == roots[stranger]) {
                let d = dist2(i, j);
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        adj.push((best.0.min(best.1), best.0.max(best.1)));
        let (ri, rj) = (find(&mut comp, best.0), find(&mut comp, best.1));
        comp[ri] = rj;
    }
    let edges = adj
        .into_iter()
        .map(|(i, j)| crate::landscape::EdgeDef {
            i: (i + 1).to_string(),
            j: (j + 1).to_string(),
            weight: None,
        })
        .collect();

    Landscape::new(
        veg.to_vec(),
        units,
        patches,
        edges,
        Params { horizon: 5, rho: 0.15, h: 0.5 },
        BTreeMap::new(),
    )
}

/// Convenience wrapper: phase 1 then phase 2 on the aged landscape.
pub fn run_two_phase(
    landscape: &Landscape,
    rule: StopRule,
    n_max: u32,
    solver: SolverKind,
    seed: u64,
) -> Result<(Phase1Outcome, PlanReport)> {
    let p1 = run_phase1(landscape, rule, n_max, solver, seed)?;
    let mut p2 = run_phase2(&p1.aged_landscape, solver, seed)?;
    p2.phase1_n = p1.n;
    p2.phase1_schedule = p1.schedule.clone();
    Ok((p1, p2))
}

/// Feasibility of a plan against the ground-truth rules; exposed here so the
/// command-line layer has one entry point per workflow.
pub fn validate_schedule(landscape: &Landscape, schedule: &Schedule) -> crate::dynamics::FeasibilityReport {
    is_feasible(landscape, schedule)
}
