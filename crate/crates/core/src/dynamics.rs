//! Deterministic evaluation of a schedule against a landscape: vegetation
//! ages, risk classification, TFI legality, budget feasibility and the two
//! objective functions. Everything downstream (the MIP and all solvers) is
//! checked against this module.
//!
//! Conventions, mirrored exactly by the MIP:
//! - treating unit i in period t resets its patch ages at t itself;
//!   otherwise ages grow by exactly one year per period,
//! - a patch is high-risk when its age is >= the vegetation risk threshold,
//!   young when age < minTFI, old when age >= maxTFI,
//! - a unit is high-risk when its risky patch area strictly exceeds H times
//!   its total patch area,
//! - young/old treatment gating reads the state at t-1: a unit with any
//!   young patch cannot be treated at t, and a treatable unit with an old
//!   patch and no young patch must be treated at t (deadlocks resolve in
//!   favour of the young patch).

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::landscape::{Compiled, Landscape};
use crate::{Error, Result};

/// Relative slack on the yearly budget comparison so schedules that meet the
/// cap exactly survive floating-point accumulation.
pub(crate) fn budget_tol(cap: f64) -> f64 {
    1e-9 * cap.abs().max(1.0)
}

/// The binary treatment decisions: the set of (treatable unit, period) pairs
/// that are treated, with periods in 1..=T.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pairs: BTreeSet<(String, u32)>,
}

impl Schedule {
    pub fn empty() -> Schedule {
        Schedule::default()
    }

    /// Builds a schedule, rejecting untreatable units and out-of-range
    /// periods.
    pub fn new(
        landscape: &Landscape,
        pairs: impl IntoIterator<Item = (String, u32)>,
    ) -> Result<Schedule> {
        Schedule::with_horizon(landscape, landscape.horizon(), pairs)
    }

    /// Like [`Schedule::new`] but validated against an explicit horizon
    /// (phase-1 plans may run longer than the instance horizon).
    pub fn with_horizon(
        landscape: &Landscape,
        horizon: u32,
        pairs: impl IntoIterator<Item = (String, u32)>,
    ) -> Result<Schedule> {
        let mut set = BTreeSet::new();
        for (unit, t) in pairs {
            match landscape.units().get(&unit) {
                None => return Err(Error::validation(format!("schedule names unknown unit {unit}"))),
                Some(u) if !u.treatable => {
                    return Err(Error::validation(format!("unit {unit} is not treatable")))
                }
                Some(_) => {}
            }
            if t < 1 || t > horizon {
                return Err(Error::validation(format!(
                    "schedule period {t} for unit {unit} outside 1..={horizon}"
                )));
            }
            set.insert((unit, t));
        }
        Ok(Schedule { pairs: set })
    }

    pub fn is_treated(&self, unit: &str, t: u32) -> bool {
        self.pairs.contains(&(unit.to_string(), t))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, u32)> {
        self.pairs.iter().map(|(u, t)| (u.as_str(), *t))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Merges another schedule into this one (used for phase concatenation).
    pub fn extend(&mut self, other: &Schedule) {
        for (u, t) in &other.pairs {
            self.pairs.insert((u.clone(), *t));
        }
    }

    /// CSV rows `unit_id,t` for treated pairs.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "unit_id,t")?;
        for (u, t) in &self.pairs {
            writeln!(w, "{u},{t}")?;
        }
        Ok(())
    }

    pub fn read_csv(landscape: &Landscape, text: &str) -> Result<Schedule> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.eq_ignore_ascii_case("unit_id,t")) {
                continue;
            }
            let (u, t) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(format!("schedule line {}: expected unit_id,t", lineno + 1)))?;
            let t: u32 = t
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("schedule line {}: bad period {t:?}", lineno + 1)))?;
            pairs.push((u.trim().to_string(), t));
        }
        // Accept periods past the instance horizon; they come from phase-1
        // files whose horizon was extended.
        let max_t = pairs.iter().map(|&(_, t)| t).max().unwrap_or(1);
        Schedule::with_horizon(landscape, max_t.max(landscape.horizon()), pairs)
    }
}

/// Full state evolution of a landscape under a schedule, for t = 0..=T.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    c: Compiled,
    horizon: u32,
    /// ages[t][patch]
    ages: Vec<Vec<u32>>,
    risk_patch: Vec<Vec<bool>>,
    young: Vec<Vec<bool>>,
    old: Vec<Vec<bool>>,
    risk_unit: Vec<Vec<bool>>,
    /// risk_conn[t][edge]
    risk_conn: Vec<Vec<bool>>,
}

impl StateTrajectory {
    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    fn patch_idx(&self, id: &str) -> usize {
        self.c
            .patch_ids
            .iter()
            .position(|p| p == id)
            .unwrap_or_else(|| panic!("unknown patch {id}"))
    }

    fn unit_idx(&self, id: &str) -> usize {
        self.c.unit_index(id).unwrap_or_else(|| panic!("unknown unit {id}"))
    }

    pub fn age(&self, patch: &str, t: u32) -> u32 {
        self.ages[t as usize][self.patch_idx(patch)]
    }

    pub fn risk_patch(&self, patch: &str, t: u32) -> bool {
        self.risk_patch[t as usize][self.patch_idx(patch)]
    }

    pub fn young(&self, patch: &str, t: u32) -> bool {
        self.young[t as usize][self.patch_idx(patch)]
    }

    pub fn old(&self, patch: &str, t: u32) -> bool {
        self.old[t as usize][self.patch_idx(patch)]
    }

    pub fn risk_unit(&self, unit: &str, t: u32) -> bool {
        self.risk_unit[t as usize][self.unit_idx(unit)]
    }

    pub fn risk_conn(&self, i: &str, j: &str, t: u32) -> bool {
        let (a, b) = (self.unit_idx(i), self.unit_idx(j));
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let e = self
            .c
            .edges
            .iter()
            .position(|&(x, y, _)| (x, y) == (a, b))
            .unwrap_or_else(|| panic!("no edge between {i} and {j}"));
        self.risk_conn[t as usize][e]
    }

    /// Number of edges with both endpoints high-risk at t.
    pub fn connectivity_count(&self, t: u32) -> u32 {
        self.risk_conn[t as usize].iter().filter(|&&b| b).count() as u32
    }

    /// Weighted connectivity at t.
    pub fn weighted_connectivity(&self, t: u32) -> f64 {
        // `+ 0.0` turns the empty sum's -0.0 into plain 0.0
        self.risk_conn[t as usize]
            .iter()
            .zip(&self.c.edges)
            .filter(|(&on, _)| on)
            .map(|(_, &(_, _, w))| w)
            .sum::<f64>()
            + 0.0
    }

    /// Ages at the final period, keyed by patch id (the phase-1 to phase-2
    /// handoff state).
    pub fn final_ages(&self) -> BTreeMap<String, u32> {
        let last = &self.ages[self.horizon as usize];
        self.c
            .patch_ids
            .iter()
            .cloned()
            .zip(last.iter().copied())
            .collect()
    }

    /// Tidy CSV: patch_id,t,age,risk_patch,young,old.
    pub fn write_patch_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "patch_id,t,age,risk_patch,young,old")?;
        for (p, pid) in self.c.patch_ids.iter().enumerate() {
            for t in 0..=self.horizon as usize {
                writeln!(
                    w,
                    "{pid},{t},{},{},{},{}",
                    self.ages[t][p],
                    self.risk_patch[t][p] as u8,
                    self.young[t][p] as u8,
                    self.old[t][p] as u8
                )?;
            }
        }
        Ok(())
    }

    /// Tidy CSV: unit_id,t,risk_unit.
    pub fn write_unit_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "unit_id,t,risk_unit")?;
        for (u, uid) in self.c.unit_ids.iter().enumerate() {
            for t in 0..=self.horizon as usize {
                writeln!(w, "{uid},{t},{}", self.risk_unit[t][u] as u8)?;
            }
        }
        Ok(())
    }
}

/// Evolves ages and risk classifications under the schedule over the
/// landscape horizon. Pure: identical inputs give identical trajectories.
pub fn simulate(landscape: &Landscape, schedule: &Schedule) -> StateTrajectory {
    simulate_over(landscape, schedule, landscape.horizon())
}

/// As [`simulate`] but over an explicit horizon (>= any scheduled period).
pub fn simulate_over(landscape: &Landscape, schedule: &Schedule, horizon: u32) -> StateTrajectory {
    let c = landscape.compile();
    let bits = bits_from_schedule(&c, schedule, horizon);
    raw_trajectory(c, &bits, horizon)
}

pub(crate) fn bits_from_schedule(c: &Compiled, schedule: &Schedule, horizon: u32) -> Vec<bool> {
    let nl = c.lambda.len();
    let mut bits = vec![false; nl * horizon as usize];
    for (uid, t) in schedule.pairs() {
        let u = c.unit_index(uid).expect("validated unit");
        let lp = c.lambda.iter().position(|&x| x == u).expect("treatable unit");
        bits[(t - 1) as usize * nl + lp] = true;
    }
    bits
}

pub(crate) fn schedule_from_bits(c: &Compiled, bits: &[bool], horizon: u32) -> Schedule {
    let nl = c.lambda.len();
    let mut pairs = BTreeSet::new();
    for t in 1..=horizon {
        for (lp, &u) in c.lambda.iter().enumerate() {
            if bits[(t - 1) as usize * nl + lp] {
                pairs.insert((c.unit_ids[u].clone(), t));
            }
        }
    }
    Schedule { pairs }
}

fn raw_trajectory(c: Compiled, bits: &[bool], horizon: u32) -> StateTrajectory {
    let np = c.n_patches();
    let nu = c.n_units();
    let ne = c.edges.len();
    let nl = c.lambda.len();
    let th = horizon as usize;

    let mut ages = vec![vec![0u32; np]; th + 1];
    ages[0].copy_from_slice(&c.init_age);
    for t in 1..=th {
        let mut treated = vec![false; nu];
        for (lp, &u) in c.lambda.iter().enumerate() {
            treated[u] = bits[(t - 1) * nl + lp];
        }
        for p in 0..np {
            ages[t][p] = if treated[c.unit_of_patch[p]] { 0 } else { ages[t - 1][p] + 1 };
        }
    }

    let mut risk_patch = vec![vec![false; np]; th + 1];
    let mut young = vec![vec![false; np]; th + 1];
    let mut old = vec![vec![false; np]; th + 1];
    let mut risk_unit = vec![vec![false; nu]; th + 1];
    let mut risk_conn = vec![vec![false; ne]; th + 1];
    for t in 0..=th {
        for p in 0..np {
            let a = ages[t][p];
            risk_patch[t][p] = a >= c.d[p];
            young[t][p] = a < c.min_tfi[p];
            old[t][p] = a >= c.max_tfi[p];
        }
        for u in 0..nu {
            let (s, e) = c.patch_range[u];
            let risky: f64 =
                (s..e).filter(|&p| risk_patch[t][p]).map(|p| c.area[p]).sum();
            risk_unit[t][u] = risky > c.h * c.patch_area_sum[u];
        }
        for (ei, &(i, j, _)) in c.edges.iter().enumerate() {
            risk_conn[t][ei] = risk_unit[t][i] && risk_unit[t][j];
        }
    }

    StateTrajectory { c, horizon, ages, risk_patch, young, old, risk_unit, risk_conn }
}

/// Which feasibility rule a schedule broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintTag {
    /// Yearly treated area above rho * R.
    Budget,
    /// A treated unit had a young patch the year before.
    YoungBlocksTreatment,
    /// A treatable unit with an old patch and no young patch was left
    /// untreated.
    OldForcesTreatment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub tag: ConstraintTag,
    /// Unit involved; None for the budget row, which is per period.
    pub unit: Option<String>,
    pub t: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Checks the yearly budget and both TFI gating rules over the horizon.
pub fn is_feasible(landscape: &Landscape, schedule: &Schedule) -> FeasibilityReport {
    is_feasible_over(landscape, schedule, landscape.horizon())
}

pub fn is_feasible_over(
    landscape: &Landscape,
    schedule: &Schedule,
    horizon: u32,
) -> FeasibilityReport {
    let c = landscape.compile();
    let traj = simulate_over(landscape, schedule, horizon);
    let cap = c.budget_cap();
    let tol = budget_tol(cap);

    let mut violations = Vec::new();
    for t in 1..=horizon {
        let mut treated_area = 0.0;
        for &u in &c.lambda {
            let uid = &c.unit_ids[u];
            let treated = schedule.is_treated(uid, t);
            if treated {
                treated_area += c.area_c[u];
            }
            let (s, e) = c.patch_range[u];
            let any_young = (s..e).any(|p| traj.young[(t - 1) as usize][p]);
            let any_old = (s..e).any(|p| traj.old[(t - 1) as usize][p]);
            if treated && any_young {
                violations.push(Violation {
                    tag: ConstraintTag::YoungBlocksTreatment,
                    unit: Some(uid.clone()),
                    t,
                });
            }
            if !treated && any_old && !any_young {
                violations.push(Violation {
                    tag: ConstraintTag::OldForcesTreatment,
                    unit: Some(uid.clone()),
                    t,
                });
            }
        }
        if treated_area > cap + tol {
            violations.push(Violation { tag: ConstraintTag::Budget, unit: None, t });
        }
    }
    FeasibilityReport { feasible: violations.is_empty(), violations }
}

/// The weighted connectivity objective: sum over t = 1..=T and all edges of
/// w[i,j] * risk_conn(i,j,t). Minimised in phase 2.
pub fn objective_phase2(_landscape: &Landscape, trajectory: &StateTrajectory) -> f64 {
    (1..=trajectory.horizon).map(|t| trajectory.weighted_connectivity(t)).sum()
}

/// The phase-1 objective: treated area over the backlog set minus a small
/// connectivity penalty, summed over t = 1..=N. Maximised.
///
/// The penalty counts edge {i, j} when i is the smaller endpoint and i is in
/// the backlog set; edges whose smaller endpoint lies outside the set do not
/// contribute.
pub fn objective_phase1(
    landscape: &Landscape,
    schedule: &Schedule,
    trajectory: &StateTrajectory,
    theta: &BTreeSet<String>,
    eps: &BTreeMap<String, f64>,
    n: u32,
) -> f64 {
    let c = &trajectory.c;
    assert!(n <= trajectory.horizon, "N must be within the trajectory horizon");
    let mut z = 0.0;
    for t in 1..=n {
        for uid in theta {
            if schedule.is_treated(uid, t) {
                z += landscape.units()[uid].area;
            }
        }
        for (ei, &(i, j, _)) in c.edges.iter().enumerate() {
            let _ = j;
            let iid = &c.unit_ids[i];
            if theta.contains(iid) && trajectory.risk_conn[t as usize][ei] {
                z -= eps.get(iid).copied().unwrap_or(0.0);
            }
        }
    }
    z
}

/// The phase-1 backlog set: treatable units that contain an old patch now or
/// next year (initial age >= maxTFI - 1) and have no young patch.
pub fn theta_set(landscape: &Landscape) -> BTreeSet<String> {
    let c = landscape.compile();
    let mut out = BTreeSet::new();
    for &u in &c.lambda {
        let (s, e) = c.patch_range[u];
        let near_old = (s..e).any(|p| c.init_age[p] + 1 >= c.max_tfi[p]);
        let no_young = (s..e).all(|p| c.init_age[p] >= c.min_tfi[p]);
        if near_old && no_young {
            out.insert(c.unit_ids[u].clone());
        }
    }
    out
}

/// Default per-unit phase-1 connectivity weight: 1e-3 times the smallest
/// treatable unit area, well under any c_i.
pub fn default_eps(landscape: &Landscape) -> BTreeMap<String, f64> {
    let min_c = landscape
        .units()
        .values()
        .filter(|u| u.treatable)
        .map(|u| u.area)
        .fold(f64::INFINITY, f64::min);
    let eps = if min_c.is_finite() { 1e-3 * min_c } else { 0.0 };
    landscape.units().keys().map(|id| (id.clone(), eps)).collect()
}

// ---------------------------------------------------------------------------
// Fast kernels shared with the search module. These operate on the compiled
// index and period-major bit vectors and avoid per-call allocation.
// ---------------------------------------------------------------------------

pub(crate) struct Evaluator {
    pub c: Compiled,
    pub horizon: u32,
    ages_prev: Vec<u32>,
    ages_cur: Vec<u32>,
}

pub(crate) struct PeriodFlags {
    /// Units that cannot be treated this period (young patch at t-1).
    pub blocked: Vec<bool>,
    /// Units that must be treated this period (old, no young at t-1).
    pub forced: Vec<bool>,
}

impl Evaluator {
    pub fn new(c: Compiled, horizon: u32) -> Evaluator {
        let np = c.n_patches();
        Evaluator { c, horizon, ages_prev: vec![0; np], ages_cur: vec![0; np] }
    }

    /// Weighted connectivity of one period given patch ages.
    pub fn weighted_conn_of_ages(&self, ages: &[u32]) -> f64 {
        let c = &self.c;
        let mut risky = vec![false; c.n_units()];
        for u in 0..c.n_units() {
            let (s, e) = c.patch_range[u];
            let risky_area: f64 =
                (s..e).filter(|&p| ages[p] >= c.d[p]).map(|p| c.area[p]).sum();
            risky[u] = risky_area > c.h * c.patch_area_sum[u];
        }
        // `+ 0.0` turns the empty sum's -0.0 into plain 0.0
        c.edges
            .iter()
            .filter(|&&(i, j, _)| risky[i] && risky[j])
            .map(|&(_, _, w)| w)
            .sum::<f64>()
            + 0.0
    }

    /// Per-unit blocked/forced flags for a period, from the ages at t-1.
    pub fn period_flags(&self, ages_prev: &[u32]) -> PeriodFlags {
        let c = &self.c;
        let nu = c.n_units();
        let mut blocked = vec![false; nu];
        let mut forced = vec![false; nu];
        for &u in &c.lambda {
            let (s, e) = c.patch_range[u];
            let any_young = (s..e).any(|p| ages_prev[p] < c.min_tfi[p]);
            let any_old = (s..e).any(|p| ages_prev[p] >= c.max_tfi[p]);
            blocked[u] = any_young;
            forced[u] = any_old && !any_young;
        }
        PeriodFlags { blocked, forced }
    }

    /// Ages one period forward. `treat` is indexed by unit.
    pub fn step_ages(ages_prev: &[u32], c: &Compiled, treat: &[bool], ages_out: &mut [u32]) {
        for p in 0..c.n_patches() {
            ages_out[p] = if treat[c.unit_of_patch[p]] { 0 } else { ages_prev[p] + 1 };
        }
    }

    /// Evaluates a full phase-2 schedule (period-major treatable-unit bits).
    /// Returns None when infeasible, otherwise the weighted connectivity
    /// objective.
    pub fn eval_phase2(&mut self, bits: &[bool]) -> Option<f64> {
        let nl = self.c.lambda.len();
        let cap = self.c.budget_cap();
        let tol = budget_tol(cap);
        self.ages_prev.copy_from_slice(&self.c.init_age);
        let mut treat = vec![false; self.c.n_units()];
        let mut z = 0.0;
        for t in 1..=self.horizon as usize {
            let flags = self.period_flags(&self.ages_prev);
            let mut area = 0.0;
            for u in treat.iter_mut() {
                *u = false;
            }
            for (lp, &u) in self.c.lambda.iter().enumerate() {
                let x = bits[(t - 1) * nl + lp];
                if x {
                    if flags.blocked[u] {
                        return None;
                    }
                    area += self.c.area_c[u];
                } else if flags.forced[u] {
                    return None;
                }
                treat[u] = x;
            }
            if area > cap + tol {
                return None;
            }
            Self::step_ages(&self.ages_prev, &self.c, &treat, &mut self.ages_cur);
            z += self.weighted_conn_of_ages(&self.ages_cur);
            std::mem::swap(&mut self.ages_prev, &mut self.ages_cur);
        }
        Some(z)
    }

    /// Evaluates a phase-1 schedule over t = 1..=horizon: budget feasibility
    /// only, Eq.-(19)-style objective over `theta` (unit-indexed mask) with
    /// per-unit penalties `eps`.
    pub fn eval_phase1(&mut self, bits: &[bool], theta: &[bool], eps: &[f64]) -> Option<f64> {
        let nl = self.c.lambda.len();
        let cap = self.c.budget_cap();
        let tol = budget_tol(cap);
        self.ages_prev.copy_from_slice(&self.c.init_age);
        let mut treat = vec![false; self.c.n_units()];
        let mut z = 0.0;
        for t in 1..=self.horizon as usize {
            let mut area = 0.0;
            for u in treat.iter_mut() {
                *u = false;
            }
            for (lp, &u) in self.c.lambda.iter().enumerate() {
                let x = bits[(t - 1) * nl + lp];
                if x {
                    area += self.c.area_c[u];
                    if theta[u] {
                        z += self.c.area_c[u];
                    }
                }
                treat[u] = x;
            }
            if area > cap + tol {
                return None;
            }
            Self::step_ages(&self.ages_prev, &self.c, &treat, &mut self.ages_cur);
            z -= self.period_phase1_penalty(&self.ages_cur, theta, eps);
            std::mem::swap(&mut self.ages_prev, &mut self.ages_cur);
        }
        Some(z)
    }

    /// Connectivity penalty of one period for the phase-1 objective.
    pub fn period_phase1_penalty(&self, ages: &[u32], theta: &[bool], eps: &[f64]) -> f64 {
        let c = &self.c;
        let mut risky = vec![false; c.n_units()];
        for u in 0..c.n_units() {
            let (s, e) = c.patch_range[u];
            let risky_area: f64 =
                (s..e).filter(|&p| ages[p] >= c.d[p]).map(|p| c.area[p]).sum();
            risky[u] = risky_area > c.h * c.patch_area_sum[u];
        }
        c.edges
            .iter()
            .filter(|&&(i, j, _)| theta[i] && risky[i] && risky[j])
            .map(|&(i, _, _)| eps[i])
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{EdgeDef, Params, Patch, UnitDef, VegClass};
    use std::collections::BTreeMap;

    fn veg(code: &str, min: u32, max: u32, d: u32) -> VegClass {
        VegClass {
            code: code.into(),
            name: format!("EVC {code}"),
            min_tfi: min,
            max_tfi: max,
            risk_threshold: d,
        }
    }

    fn two_unit_landscape() -> Landscape {
        // two adjacent single-patch units, both risky from the start
        Landscape::new(
            vec![veg("1", 3, 10, 5)],
            vec![
                UnitDef { id: "a".into(), treatable: true, area_override: None },
                UnitDef { id: "b".into(), treatable: true, area_override: None },
            ],
            vec![
                Patch { id: "pa".into(), unit_id: "a".into(), veg: "1".into(), area: 10.0, initial_age: 6 },
                Patch { id: "pb".into(), unit_id: "b".into(), veg: "1".into(), area: 10.0, initial_age: 6 },
            ],
            vec![EdgeDef { i: "a".into(), j: "b".into(), weight: None }],
            Params { horizon: 3, rho: 1.0, h: 0.5 },
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn treatment_resets_patch_ages() {
        let ls = two_unit_landscape();
        let s = Schedule::new(&ls, [("a".to_string(), 2)]).unwrap();
        let traj = simulate(&ls, &s);
        assert_eq!(traj.age("pa", 0), 6);
        assert_eq!(traj.age("pa", 1), 7);
        assert_eq!(traj.age("pa", 2), 0);
        assert_eq!(traj.age("pa", 3), 1);
        assert_eq!(traj.age("pb", 3), 9);
    }

    #[test]
    fn risk_threshold_is_inclusive() {
        // age 5 with d = 5 is already high risk
        let ls = Landscape::new(
            vec![veg("1", 3, 10, 5)],
            vec![UnitDef { id: "u".into(), treatable: true, area_override: None }],
            vec![Patch { id: "p".into(), unit_id: "u".into(), veg: "1".into(), area: 5.0, initial_age: 5 }],
            vec![],
            Params { horizon: 1, rho: 1.0, h: 0.5 },
            BTreeMap::new(),
        )
        .unwrap();
        let traj = simulate(&ls, &Schedule::empty());
        assert!(traj.risk_patch("p", 0));
        assert!(traj.risk_unit("u", 0));
    }

    #[test]
    fn young_patch_blocks_treatment() {
        // EVC 3: minTFI 4; patch age 2 is young, so treating at t = 1 violates
        let ls = Landscape::new(
            vec![veg("3", 4, 15, 7)],
            vec![UnitDef { id: "u".into(), treatable: true, area_override: None }],
            vec![Patch { id: "p".into(), unit_id: "u".into(), veg: "3".into(), area: 5.0, initial_age: 2 }],
            vec![],
            Params { horizon: 1, rho: 1.0, h: 0.5 },
            BTreeMap::new(),
        )
        .unwrap();
        let s = Schedule::new(&ls, [("u".to_string(), 1)]).unwrap();
        let rep = is_feasible(&ls, &s);
        assert!(!rep.feasible);
        assert_eq!(rep.violations[0].tag, ConstraintTag::YoungBlocksTreatment);
    }

    #[test]
    fn old_patch_forces_treatment() {
        // EVC 6: maxTFI 20; age 20 and untreated at t = 1 violates
        let ls = Landscape::new(
            vec![veg("6", 7, 20, 10)],
            vec![UnitDef { id: "u".into(), treatable: true, area_override: None }],
            vec![Patch { id: "p".into(), unit_id: "u".into(), veg: "6".into(), area: 5.0, initial_age: 20 }],
            vec![],
            Params { horizon: 1, rho: 1.0, h: 0.5 },
            BTreeMap::new(),
        )
        .unwrap();
        let rep = is_feasible(&ls, &Schedule::empty());
        assert!(!rep.feasible);
        assert_eq!(rep.violations[0].tag, ConstraintTag::OldForcesTreatment);
    }

    #[test]
    fn empty_schedule_on_quiet_landscape_is_feasible() {
        let ls = Landscape::new(
            vec![veg("1", 3, 10, 5)],
            vec![UnitDef { id: "u".into(), treatable: true, area_override: None }],
            vec![Patch { id: "p".into(), unit_id: "u".into(), veg: "1".into(), area: 5.0, initial_age: 0 }],
            vec![],
            Params { horizon: 3, rho: 0.5, h: 0.5 },
            BTreeMap::new(),
        )
        .unwrap();
        assert!(is_feasible(&ls, &Schedule::empty()).feasible);
    }

    #[test]
    fn phase2_objective_counts_weighted_connected_periods() {
        let ls = two_unit_landscape();
        let traj = simulate(&ls, &Schedule::empty());
        // both risky every period, w = 1, T = 3
        assert_eq!(objective_phase2(&ls, &traj), 3.0);
    }

    #[test]
    fn phase1_objective_single_theta_unit() {
        // one 10 ha unit at maxTFI, treated at t = 1, no edges -> value 10
        let ls = Landscape::new(
            vec![veg("1", 3, 10, 5)],
            vec![UnitDef { id: "u".into(), treatable: true, area_override: None }],
            vec![Patch { id: "p".into(), unit_id: "u".into(), veg: "1".into(), area: 10.0, initial_age: 10 }],
            vec![],
            Params { horizon: 1, rho: 1.0, h: 0.5 },
            BTreeMap::new(),
        )
        .unwrap();
        let theta = theta_set(&ls);
        assert!(theta.contains("u"));
        let s = Schedule::new(&ls, [("u".to_string(), 1)]).unwrap();
        let traj = simulate(&ls, &s);
        let z = objective_phase1(&ls, &s, &traj, &theta, &default_eps(&ls), 1);
        assert_eq!(z, 10.0);
    }

    #[test]
    fn theta_includes_nearly_old_and_excludes_young() {
        let ls = Landscape::new(
            vec![veg("1", 3, 10, 5), veg("6", 7, 20, 10)],
            vec![
                UnitDef { id: "near".into(), treatable: true, area_override: None },
                UnitDef { id: "mix".into(), treatable: true, area_override: None },
                UnitDef { id: "fresh".into(), treatable: true, area_override: None },
            ],
            vec![
                Patch { id: "p1".into(), unit_id: "near".into(), veg: "6".into(), area: 5.0, initial_age: 19 },
                Patch { id: "p2".into(), unit_id: "mix".into(), veg: "6".into(), area: 5.0, initial_age: 20 },
                Patch { id: "p3".into(), unit_id: "mix".into(), veg: "1".into(), area: 5.0, initial_age: 1 },
                Patch { id: "p4".into(), unit_id: "fresh".into(), veg: "1".into(), area: 5.0, initial_age: 0 },
            ],
            vec![],
            Params { horizon: 1, rho: 1.0, h: 0.5 },
            BTreeMap::new(),
        )
        .unwrap();
        let theta = theta_set(&ls);
        assert!(theta.contains("near"), "age maxTFI-1 counts as potentially old");
        assert!(!theta.contains("mix"), "young patch excludes the unit");
        assert!(!theta.contains("fresh"));
    }

    #[test]
    fn schedule_csv_round_trip() {
        let ls = two_unit_landscape();
        let s = Schedule::new(&ls, [("a".to_string(), 1), ("b".to_string(), 3)]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = Schedule::read_csv(&ls, std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn untreatable_unit_risk_is_monotone() {
        let ls = Landscape::new(
            vec![veg("1", 3, 10, 5)],
            vec![
                UnitDef { id: "locked".into(), treatable: false, area_override: None },
                UnitDef { id: "free".into(), treatable: true, area_override: None },
            ],
            vec![
                Patch { id: "pl".into(), unit_id: "locked".into(), veg: "1".into(), area: 5.0, initial_age: 3 },
                Patch { id: "pf".into(), unit_id: "free".into(), veg: "1".into(), area: 5.0, initial_age: 0 },
            ],
            vec![],
            Params { horizon: 6, rho: 1.0, h: 0.5 },
            BTreeMap::new(),
        )
        .unwrap();
        let traj = simulate(&ls, &Schedule::empty());
        let mut seen_risk = false;
        for t in 0..=6 {
            let r = traj.risk_unit("locked", t);
            assert!(!(seen_risk && !r), "untreatable risk must not clear");
            seen_risk = seen_risk || r;
        }
        assert!(seen_risk);
    }
}
