//! Solver-agnostic mixed-integer model of the scheduling problem, with
//! LP/MPS text emission, external-solution ingestion and a ground-truth
//! assignment checker.
//!
//! Variable naming is fixed so external solutions stay joinable:
//! `x_<unit>_<t>`, `A_<patch>_<t>`, `RP_<patch>_<t>` (high-risk patch),
//! `RU_<unit>_<t>` (high-risk unit), `RC_<i>_<j>_<t>` (risk connection),
//! `OLD_<patch>_<t>`, `YNG_<patch>_<t>`. Identifiers are sanitised by
//! mapping every character outside `[A-Za-z0-9]` to `_`; a collision after
//! sanitisation is an error.
//!
//! The risk indicator variables are only forced upward by the model;
//! downward tightness comes from minimisation pressure. Reports must
//! therefore recompute risk status from ages via the dynamics module, never
//! from solver auxiliaries.

use std::collections::BTreeMap;

use crate::dynamics::{simulate_over, Schedule};
use crate::landscape::Landscape;
use crate::{Error, Result};

mod lp_parse;
mod solution;
mod write;

pub use lp_parse::parse_lp;
pub use solution::{parse_solution, read_solution, SolutionDialect, SolutionRead};
pub use write::{to_lp_string, to_mps_string, write_model, ModelFormat};

/// Absolute tolerance on row activity and binary integrality.
pub const CHECK_TOL: f64 = 1e-6;

/// Numeric-safety cap on any big-M constant.
pub const BIG_M_CAP: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    /// (variable index, coefficient)
    pub terms: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

/// A linear mixed-binary model: named variables, rows and one objective.
#[derive(Debug, Clone)]
pub struct MipModel {
    pub name: String,
    variables: Vec<Variable>,
    var_index: BTreeMap<String, usize>,
    constraints: Vec<Constraint>,
    row_names: BTreeMap<String, usize>,
    obj_sense: ObjSense,
    obj_terms: Vec<(usize, f64)>,
}

impl MipModel {
    pub fn new(name: impl Into<String>, sense: ObjSense) -> MipModel {
        MipModel {
            name: name.into(),
            variables: Vec::new(),
            var_index: BTreeMap::new(),
            constraints: Vec::new(),
            row_names: BTreeMap::new(),
            obj_sense: sense,
            obj_terms: Vec::new(),
        }
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<usize> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lb: f64, ub: f64) -> Result<usize> {
        self.add_var(name, VarKind::Continuous, lb, ub)
    }

    fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lb: f64, ub: f64) -> Result<usize> {
        let name = name.into();
        if self.var_index.contains_key(&name) {
            return Err(Error::model(format!("duplicate variable name {name}")));
        }
        let idx = self.variables.len();
        self.var_index.insert(name.clone(), idx);
        self.variables.push(Variable { name, kind, lb, ub });
        Ok(idx)
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> Result<()> {
        let name = name.into();
        if self.row_names.contains_key(&name) {
            return Err(Error::model(format!("duplicate constraint name {name}")));
        }
        for &(v, _) in &terms {
            if v >= self.variables.len() {
                return Err(Error::model(format!("row {name} references undeclared variable")));
            }
        }
        self.row_names.insert(name.clone(), self.constraints.len());
        self.constraints.push(Constraint { name, terms, sense, rhs });
        Ok(())
    }

    pub fn set_objective(&mut self, terms: Vec<(usize, f64)>) {
        self.obj_terms = terms;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective_sense(&self) -> ObjSense {
        self.obj_sense
    }

    pub fn objective_terms(&self) -> &[(usize, f64)] {
        &self.obj_terms
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_index.get(name).copied()
    }

    /// Objective value of a (complete) assignment.
    pub fn objective_value(&self, assignment: &BTreeMap<String, f64>) -> Result<f64> {
        let mut z = 0.0;
        for &(v, c) in &self.obj_terms {
            let name = &self.variables[v].name;
            let val = assignment
                .get(name)
                .ok_or_else(|| Error::model(format!("assignment missing variable {name}")))?;
            z += c * val;
        }
        Ok(z)
    }
}

fn sanitize(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

pub(crate) fn name_x(unit: &str, t: u32) -> String {
    format!("x_{}_{t}", sanitize(unit))
}

pub(crate) fn name_age(patch: &str, t: u32) -> String {
    format!("A_{}_{t}", sanitize(patch))
}

pub(crate) fn name_risk_patch(patch: &str, t: u32) -> String {
    format!("RP_{}_{t}", sanitize(patch))
}

pub(crate) fn name_risk_unit(unit: &str, t: u32) -> String {
    format!("RU_{}_{t}", sanitize(unit))
}

pub(crate) fn name_risk_conn(i: &str, j: &str, t: u32) -> String {
    format!("RC_{}_{}_{t}", sanitize(i), sanitize(j))
}

pub(crate) fn name_old(patch: &str, t: u32) -> String {
    format!("OLD_{}_{t}", sanitize(patch))
}

pub(crate) fn name_young(patch: &str, t: u32) -> String {
    format!("YNG_{}_{t}", sanitize(patch))
}

/// Tight per-instance big-M constants for the linearised implications, from
/// the age upper bound age_max(p, t) = initial_age(p) + t.
#[derive(Debug, Clone)]
pub struct BigMPlan {
    init_age: BTreeMap<String, u32>,
    d: BTreeMap<String, u32>,
    min_tfi: BTreeMap<String, u32>,
    max_tfi: BTreeMap<String, u32>,
    unit_patch_area: BTreeMap<String, f64>,
}

impl BigMPlan {
    pub fn new(landscape: &Landscape, horizon: u32) -> Result<BigMPlan> {
        let plan = BigMPlan {
            init_age: landscape
                .patches()
                .iter()
                .map(|(id, p)| (id.clone(), p.initial_age))
                .collect(),
            d: landscape
                .patches()
                .keys()
                .map(|id| (id.clone(), landscape.veg_of(id).risk_threshold))
                .collect(),
            min_tfi: landscape
                .patches()
                .keys()
                .map(|id| (id.clone(), landscape.veg_of(id).min_tfi))
                .collect(),
            max_tfi: landscape
                .patches()
                .keys()
                .map(|id| (id.clone(), landscape.veg_of(id).max_tfi))
                .collect(),
            unit_patch_area: landscape
                .units()
                .iter()
                .map(|(id, u)| {
                    let sum = u.patches.iter().map(|p| landscape.patches()[p].area).sum();
                    (id.clone(), sum)
                })
                .collect(),
        };
        // overflow guard: the largest constant grows with initial age + T
        for (pid, &a) in &plan.init_age {
            let top = a as f64 + horizon as f64 + 1.0;
            if top > BIG_M_CAP {
                return Err(Error::model(format!(
                    "big-M for patch {pid} exceeds the numeric-safety cap {BIG_M_CAP:e}"
                )));
            }
        }
        for (uid, &s) in &plan.unit_patch_area {
            if s > BIG_M_CAP {
                return Err(Error::model(format!(
                    "big-M for unit {uid} exceeds the numeric-safety cap {BIG_M_CAP:e}"
                )));
            }
        }
        Ok(plan)
    }

    pub fn age_max(&self, patch: &str, t: u32) -> f64 {
        (self.init_age[patch] + t) as f64
    }

    /// M1 = M2, the age-reset pair in the growth/reset rows.
    pub fn m_age(&self, patch: &str, t: u32) -> f64 {
        self.age_max(patch, t) + 1.0
    }

    /// M3, high-risk patch indicator.
    pub fn m_risk(&self, patch: &str, t: u32) -> f64 {
        (self.age_max(patch, t) - self.d[patch] as f64 + 1.0).max(1.0)
    }

    /// M4, high-risk unit indicator (total patch area of the unit).
    pub fn m_unit(&self, unit: &str) -> f64 {
        self.unit_patch_area[unit]
    }

    /// M5, old indicator upper row.
    pub fn m_old(&self, patch: &str, t: u32) -> f64 {
        (self.age_max(patch, t) - self.max_tfi[patch] as f64 + 1.0).max(1.0)
    }

    /// M6, young indicator lower row.
    pub fn m_young_lb(&self, patch: &str) -> f64 {
        self.min_tfi[patch] as f64
    }

    /// M7, young indicator upper row.
    pub fn m_young_ub(&self, patch: &str, t: u32) -> f64 {
        (self.age_max(patch, t) - self.min_tfi[patch] as f64 + 1.0).max(1.0)
    }
}

struct Builder<'a> {
    ls: &'a Landscape,
    model: MipModel,
    plan: BigMPlan,
    horizon: u32,
}

impl<'a> Builder<'a> {
    fn new(ls: &'a Landscape, horizon: u32, sense: ObjSense, name: &str) -> Result<Builder<'a>> {
        Ok(Builder { ls, model: MipModel::new(name, sense), plan: BigMPlan::new(ls, horizon)?, horizon })
    }

    fn vi(&self, name: &str) -> usize {
        self.model.var_index(name).unwrap_or_else(|| panic!("undeclared variable {name}"))
    }

    /// Declares x, A, RP, RU, RC over the horizon. When `ages_for_untreatable`
    /// is false, A and RP are omitted for patches of untreatable units.
    fn declare_core_vars(&mut self, ages_for_untreatable: bool) -> Result<()> {
        let t_max = self.horizon;
        for uid in self.ls.unit_order() {
            let u = &self.ls.units()[uid];
            if u.treatable {
                for t in 1..=t_max {
                    self.model.add_binary(name_x(uid, t))?;
                }
            }
            if u.treatable || ages_for_untreatable {
                for pid in &u.patches {
                    for t in 0..=t_max {
                        self.model.add_continuous(name_age(pid, t), 0.0, f64::INFINITY)?;
                    }
                    for t in 1..=t_max {
                        self.model.add_binary(name_risk_patch(pid, t))?;
                    }
                }
            }
            for t in 1..=t_max {
                self.model.add_binary(name_risk_unit(uid, t))?;
            }
        }
        for e in self.ls.edges() {
            for t in 1..=t_max {
                self.model.add_binary(name_risk_conn(&e.i, &e.j, t))?;
            }
        }
        Ok(())
    }

    fn budget_rows(&mut self) -> Result<()> {
        let cap = self.ls.rho() * self.ls.treatable_area();
        for t in 1..=self.horizon {
            let terms = self
                .ls
                .unit_order()
                .iter()
                .filter(|uid| self.ls.units()[*uid].treatable)
                .map(|uid| (self.vi(&name_x(uid, t)), self.ls.units()[uid].area))
                .collect();
            self.model.add_row(format!("budget_{t}"), terms, RowSense::Le, cap)?;
        }
        Ok(())
    }

    /// Rows (3)-(7): initial ages and age dynamics.
    fn age_rows(&mut self, ages_for_untreatable: bool) -> Result<()> {
        for uid in self.ls.unit_order() {
            let u = &self.ls.units()[uid];
            if !u.treatable && !ages_for_untreatable {
                continue;
            }
            for pid in &u.patches {
                let p = &self.ls.patches()[pid];
                self.model.add_row(
                    format!("init_{}", sanitize(pid)),
                    vec![(self.vi(&name_age(pid, 0)), 1.0)],
                    RowSense::Eq,
                    p.initial_age as f64,
                )?;
                for t in 1..=self.horizon {
                    let a_t = self.vi(&name_age(pid, t));
                    let a_prev = self.vi(&name_age(pid, t - 1));
                    if u.treatable {
                        let x = self.vi(&name_x(uid, t));
                        let m = self.plan.m_age(pid, t);
                        // A_t >= A_{t-1} + 1 - M1 x
                        self.model.add_row(
                            format!("grow_lb_{}_{t}", sanitize(pid)),
                            vec![(a_t, 1.0), (a_prev, -1.0), (x, m)],
                            RowSense::Ge,
                            1.0,
                        )?;
                        // A_t <= M2 (1 - x)
                        self.model.add_row(
                            format!("reset_{}_{t}", sanitize(pid)),
                            vec![(a_t, 1.0), (x, m)],
                            RowSense::Le,
                            m,
                        )?;
                        // A_t <= A_{t-1} + 1
                        self.model.add_row(
                            format!("grow_ub_{}_{t}", sanitize(pid)),
                            vec![(a_t, 1.0), (a_prev, -1.0)],
                            RowSense::Le,
                            1.0,
                        )?;
                    } else {
                        // A_t = A_{t-1} + 1
                        self.model.add_row(
                            format!("grow_eq_{}_{t}", sanitize(pid)),
                            vec![(a_t, 1.0), (a_prev, -1.0)],
                            RowSense::Eq,
                            1.0,
                        )?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Rows (8)-(9): patch and unit risk indicators, for the given units.
    fn risk_rows(&mut self, include_untreatable: bool) -> Result<()> {
        for uid in self.ls.unit_order() {
            let u = &self.ls.units()[uid];
            if !u.treatable && !include_untreatable {
                continue;
            }
            for t in 1..=self.horizon {
                for pid in &u.patches {
                    let p = &self.ls.patches()[pid];
                    let d = self.ls.veg_of(pid).risk_threshold as f64;
                    let _ = p;
                    // A - M3 RP <= d - 1
                    self.model.add_row(
                        format!("rp_{}_{t}", sanitize(pid)),
                        vec![
                            (self.vi(&name_age(pid, t)), 1.0),
                            (self.vi(&name_risk_patch(pid, t)), -self.plan.m_risk(pid, t)),
                        ],
                        RowSense::Le,
                        d - 1.0,
                    )?;
                }
                // sum Area RP - M4 RU <= H * sum Area
                let mut terms: Vec<(usize, f64)> = u
                    .patches
                    .iter()
                    .map(|pid| {
                        (self.vi(&name_risk_patch(pid, t)), self.ls.patches()[pid].area)
                    })
                    .collect();
                let total: f64 = u.patches.iter().map(|pid| self.ls.patches()[pid].area).sum();
                terms.push((self.vi(&name_risk_unit(uid, t)), -self.plan.m_unit(uid)));
                self.model.add_row(
                    format!("ru_{}_{t}", sanitize(uid)),
                    terms,
                    RowSense::Le,
                    self.ls.h() * total,
                )?;
            }
        }
        Ok(())
    }

    /// Row (10): RU_i + RU_j - RC_ij <= 1 per edge and period.
    fn connectivity_rows(&mut self) -> Result<()> {
        for e in self.ls.edges() {
            for t in 1..=self.horizon {
                self.model.add_row(
                    format!("conn_{}_{}_{t}", sanitize(&e.i), sanitize(&e.j)),
                    vec![
                        (self.vi(&name_risk_unit(&e.i, t)), 1.0),
                        (self.vi(&name_risk_unit(&e.j, t)), 1.0),
                        (self.vi(&name_risk_conn(&e.i, &e.j, t)), -1.0),
                    ],
                    RowSense::Le,
                    1.0,
                )?;
            }
        }
        Ok(())
    }

    /// Rows (11)-(16): old/young classification over t = 0..T-1 and the
    /// treatment gating rows, treatable units only.
    fn tfi_rows(&mut self) -> Result<()> {
        for uid in self.ls.unit_order() {
            let u = &self.ls.units()[uid];
            if !u.treatable {
                continue;
            }
            for pid in &u.patches {
                let min_tfi = self.ls.veg_of(pid).min_tfi as f64;
                let max_tfi = self.ls.veg_of(pid).max_tfi as f64;
                for t in 0..self.horizon {
                    self.model.add_binary(name_old(pid, t))?;
                    self.model.add_binary(name_young(pid, t))?;
                    let a = self.vi(&name_age(pid, t));
                    let old = self.vi(&name_old(pid, t));
                    let young = self.vi(&name_young(pid, t));
                    // A - M5 OLD <= maxTFI - 1
                    self.model.add_row(
                        format!("old_ub_{}_{t}", sanitize(pid)),
                        vec![(a, 1.0), (old, -self.plan.m_old(pid, t))],
                        RowSense::Le,
                        max_tfi - 1.0,
                    )?;
                    // A >= maxTFI OLD
                    self.model.add_row(
                        format!("old_lb_{}_{t}", sanitize(pid)),
                        vec![(a, 1.0), (old, -max_tfi)],
                        RowSense::Ge,
                        0.0,
                    )?;
                    // A + M6 YNG >= minTFI
                    self.model.add_row(
                        format!("yng_lb_{}_{t}", sanitize(pid)),
                        vec![(a, 1.0), (young, self.plan.m_young_lb(pid))],
                        RowSense::Ge,
                        min_tfi,
                    )?;
                    // A - M7 (1 - YNG) <= minTFI - 1
                    let m7 = self.plan.m_young_ub(pid, t);
                    self.model.add_row(
                        format!("yng_ub_{}_{t}", sanitize(pid)),
                        vec![(a, 1.0), (young, m7)],
                        RowSense::Le,
                        min_tfi - 1.0 + m7,
                    )?;
                }
            }
            let n_patches = u.patches.len() as f64;
            for t in 1..=self.horizon {
                let x = self.vi(&name_x(uid, t));
                // (15) per patch: YNG_{p,t-1} + x <= 1
                for pid in &u.patches {
                    self.model.add_row(
                        format!("block_{}_{t}", sanitize(pid)),
                        vec![(self.vi(&name_young(pid, t - 1)), 1.0), (x, 1.0)],
                        RowSense::Le,
                        1.0,
                    )?;
                }
                // (16): sum OLD - |V_i| sum YNG - |V_i| x <= 0
                let mut terms: Vec<(usize, f64)> = Vec::new();
                for pid in &u.patches {
                    terms.push((self.vi(&name_old(pid, t - 1)), 1.0));
                    terms.push((self.vi(&name_young(pid, t - 1)), -n_patches));
                }
                terms.push((x, -n_patches));
                self.model.add_row(format!("force_{}_{t}", sanitize(uid)), terms, RowSense::Le, 0.0)?;
            }
        }
        Ok(())
    }

    /// Reduced-model rows: untreatable unit risk fixed per precomputed ages,
    /// from theta = risky area minus H times total area.
    fn fixed_risk_rows(&mut self) -> Result<()> {
        let traj = simulate_over(self.ls, &Schedule::empty(), self.horizon);
        for uid in self.ls.unit_order() {
            let u = &self.ls.units()[uid];
            if u.treatable {
                continue;
            }
            let total: f64 = u.patches.iter().map(|pid| self.ls.patches()[pid].area).sum();
            for t in 1..=self.horizon {
                let risky: f64 = u
                    .patches
                    .iter()
                    .filter(|pid| traj.risk_patch(pid, t))
                    .map(|pid| self.ls.patches()[pid].area)
                    .sum();
                let theta = risky - self.ls.h() * total;
                let value = if theta > 0.0 { 1.0 } else { 0.0 };
                self.model.add_row(
                    format!("fixr_{}_{t}", sanitize(uid)),
                    vec![(self.vi(&name_risk_unit(uid, t)), 1.0)],
                    RowSense::Eq,
                    value,
                )?;
            }
        }
        Ok(())
    }
}

/// Builds the full connectivity-minimising model over the landscape horizon.
/// With `reduce` set, age and patch-risk variables for untreatable units are
/// dropped and their unit risk is fixed from the deterministic aging.
pub fn build_phase2(landscape: &Landscape, reduce: bool) -> Result<MipModel> {
    let horizon = landscape.horizon();
    let mut b = Builder::new(landscape, horizon, ObjSense::Minimize, "phase2")?;
    b.declare_core_vars(!reduce)?;
    b.budget_rows()?;
    b.age_rows(!reduce)?;
    b.risk_rows(!reduce)?;
    b.connectivity_rows()?;
    b.tfi_rows()?;
    if reduce {
        b.fixed_risk_rows()?;
    }
    let obj = landscape
        .edges()
        .iter()
        .flat_map(|e| {
            (1..=horizon).map(move |t| (e, t))
        })
        .map(|(e, t)| (b.vi(&name_risk_conn(&e.i, &e.j, t)), e.weight))
        .collect();
    b.model.set_objective(obj);
    Ok(b.model)
}

/// Builds the phase-1 backlog-clearing model over `n` periods: the phase-2
/// rows without the TFI/gating rows, maximising treated area over the
/// backlog set minus the small connectivity penalty `eps`.
pub fn build_phase1(
    landscape: &Landscape,
    n: u32,
    eps: &BTreeMap<String, f64>,
) -> Result<MipModel> {
    if n < 1 {
        return Err(Error::model("phase-1 horizon N must be >= 1"));
    }
    let mut b = Builder::new(landscape, n, ObjSense::Maximize, "phase1")?;
    b.declare_core_vars(true)?;
    b.budget_rows()?;
    b.age_rows(true)?;
    b.risk_rows(true)?;
    b.connectivity_rows()?;

    let theta = crate::dynamics::theta_set(landscape);
    let mut obj: Vec<(usize, f64)> = Vec::new();
    for uid in &theta {
        for t in 1..=n {
            obj.push((b.vi(&name_x(uid, t)), landscape.units()[uid].area));
        }
    }
    for e in landscape.edges() {
        if theta.contains(&e.i) {
            let pen = eps.get(&e.i).copied().unwrap_or(0.0);
            for t in 1..=n {
                obj.push((b.vi(&name_risk_conn(&e.i, &e.j, t)), -pen));
            }
        }
    }
    b.model.set_objective(obj);
    Ok(b.model)
}

/// One violated row or binary-integrality failure.
#[derive(Debug, Clone, PartialEq)]
pub struct RowViolation {
    pub row: String,
    pub activity: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub feasible: bool,
    pub violated_rows: Vec<RowViolation>,
    /// Binary variables whose value is not within tolerance of {0, 1}.
    pub fractional_binaries: Vec<String>,
}

/// Verifies a complete assignment against every row and binary domain, with
/// absolute tolerance [`CHECK_TOL`].
pub fn check_assignment(
    model: &MipModel,
    assignment: &BTreeMap<String, f64>,
) -> Result<CheckReport> {
    for name in assignment.keys() {
        if model.var_index(name).is_none() {
            return Err(Error::model(format!("assignment has undeclared variable {name}")));
        }
    }
    let mut values = vec![0.0; model.variables().len()];
    for (i, v) in model.variables().iter().enumerate() {
        match assignment.get(&v.name) {
            Some(&x) => values[i] = x,
            None => {
                return Err(Error::model(format!("assignment missing variable {}", v.name)))
            }
        }
    }

    let mut fractional = Vec::new();
    for (i, v) in model.variables().iter().enumerate() {
        let x = values[i];
        if v.kind == VarKind::Binary && x.abs() > CHECK_TOL && (x - 1.0).abs() > CHECK_TOL {
            fractional.push(v.name.clone());
        }
        if x < v.lb - CHECK_TOL || x > v.ub + CHECK_TOL {
            fractional.push(v.name.clone());
        }
    }

    let mut violated = Vec::new();
    for row in model.constraints() {
        let activity: f64 = row.terms.iter().map(|&(v, c)| c * values[v]).sum();
        let ok = match row.sense {
            RowSense::Le => activity <= row.rhs + CHECK_TOL,
            RowSense::Ge => activity >= row.rhs - CHECK_TOL,
            RowSense::Eq => (activity - row.rhs).abs() <= CHECK_TOL,
        };
        if !ok {
            violated.push(RowViolation { row: row.name.clone(), activity, rhs: row.rhs });
        }
    }

    Ok(CheckReport {
        feasible: violated.is_empty() && fractional.is_empty(),
        violated_rows: violated,
        fractional_binaries: fractional,
    })
}

/// Lifts a schedule into a complete assignment for `model` by simulating the
/// landscape and reading every auxiliary variable's truth value from the
/// trajectory. `horizon` must equal the horizon the model was built with.
pub fn lift_assignment(
    landscape: &Landscape,
    schedule: &Schedule,
    model: &MipModel,
    horizon: u32,
) -> Result<BTreeMap<String, f64>> {
    let traj = simulate_over(landscape, schedule, horizon);
    let mut truth: BTreeMap<String, f64> = BTreeMap::new();
    for uid in landscape.unit_order() {
        let u = &landscape.units()[uid];
        if u.treatable {
            for t in 1..=horizon {
                truth.insert(name_x(uid, t), schedule.is_treated(uid, t) as u8 as f64);
            }
        }
        for t in 1..=horizon {
            truth.insert(name_risk_unit(uid, t), traj.risk_unit(uid, t) as u8 as f64);
        }
        for pid in &u.patches {
            for t in 0..=horizon {
                truth.insert(name_age(pid, t), traj.age(pid, t) as f64);
            }
            for t in 1..=horizon {
                truth.insert(name_risk_patch(pid, t), traj.risk_patch(pid, t) as u8 as f64);
            }
            for t in 0..horizon {
                truth.insert(name_old(pid, t), traj.old(pid, t) as u8 as f64);
                truth.insert(name_young(pid, t), traj.young(pid, t) as u8 as f64);
            }
        }
    }
    for e in landscape.edges() {
        for t in 1..=horizon {
            truth.insert(name_risk_conn(&e.i, &e.j, t), traj.risk_conn(&e.i, &e.j, t) as u8 as f64);
        }
    }

    let mut out = BTreeMap::new();
    for v in model.variables() {
        match truth.get(&v.name) {
            Some(&x) => {
                out.insert(v.name.clone(), x);
            }
            None => {
                return Err(Error::model(format!(
                    "model variable {} has no trajectory value",
                    v.name
                )))
            }
        }
    }
    Ok(out)
}

/// Extracts the treatment schedule from an assignment by rounding the x
/// variables at 0.5; absent x variables count as untreated.
pub fn schedule_from_assignment(
    landscape: &Landscape,
    assignment: &BTreeMap<String, f64>,
    horizon: u32,
) -> Result<Schedule> {
    let mut pairs = Vec::new();
    for uid in landscape.unit_order() {
        if !landscape.units()[uid].treatable {
            continue;
        }
        for t in 1..=horizon {
            if assignment.get(&name_x(uid, t)).copied().unwrap_or(0.0) >= 0.5 {
                pairs.push((uid.clone(), t));
            }
        }
    }
    Schedule::with_horizon(landscape, horizon, pairs)
}
