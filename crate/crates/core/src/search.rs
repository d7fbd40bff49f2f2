//! Internal exact and heuristic solvers over treatment schedules.
//!
//! All solvers share the allocation-free evaluation kernels from the
//! dynamics module and work on period-major bit vectors over the treatable
//! units. Exhaustive enumeration and branch-and-bound are exact on
//! desk-scale instances; greedy plus local search scales further but only
//! returns a feasible incumbent.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    budget_tol, schedule_from_bits, theta_set, Evaluator, Schedule,
};
use crate::landscape::Landscape;
use crate::{Error, Result};

/// Hard cap on the exhaustive search space: at most 2^24 schedules.
pub const EXHAUSTIVE_CAP_BITS: u32 = 24;

/// Which objective a solver optimises.
#[derive(Debug, Clone)]
pub enum Phase {
    /// Minimise weighted connectivity over the landscape horizon, subject to
    /// budget and both TFI gating rules.
    Phase2,
    /// Maximise backlog treatment over `n` periods minus the small per-unit
    /// connectivity penalty; only the budget binds.
    Phase1 { n: u32, eps: BTreeMap<String, f64> },
}

impl Phase {
    fn horizon(&self, landscape: &Landscape) -> u32 {
        match self {
            Phase::Phase2 => landscape.horizon(),
            Phase::Phase1 { n, .. } => *n,
        }
    }

    fn is_phase2(&self) -> bool {
        matches!(self, Phase::Phase2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// The returned schedule is proven optimal.
    Optimal,
    /// A feasible schedule was found but optimality is not proven.
    Feasible,
    /// The search space was exhausted without a feasible schedule.
    Infeasible,
    /// The node budget ran out before any feasible schedule was found.
    NodeBudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub schedule: Option<Schedule>,
    pub objective: Option<f64>,
    pub status: SolveStatus,
    pub nodes_explored: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy)]
pub struct BnbOptions {
    /// Maximum number of branching nodes before the search gives up.
    pub node_cap: u64,
    /// Assign TFI-determined treatments directly instead of branching.
    pub propagate: bool,
    /// Seed the incumbent with a greedy solution before branching.
    pub seed_greedy: bool,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions { node_cap: 50_000_000, propagate: true, seed_greedy: true }
    }
}

/// Sense-aware comparison: is `a` strictly better than `b`?
fn better(phase: &Phase, a: f64, b: f64) -> bool {
    if phase.is_phase2() {
        a < b
    } else {
        a > b
    }
}

struct PhaseCtx {
    theta: Vec<bool>,
    eps: Vec<f64>,
}

fn phase_ctx(landscape: &Landscape, phase: &Phase) -> PhaseCtx {
    match phase {
        Phase::Phase2 => PhaseCtx { theta: Vec::new(), eps: Vec::new() },
        Phase::Phase1 { eps, .. } => {
            let names = theta_set(landscape);
            let c = landscape.compile();
            let theta = c.unit_ids.iter().map(|id| names.contains(id)).collect();
            let epsv = c.unit_ids.iter().map(|id| eps.get(id).copied().unwrap_or(0.0)).collect();
            PhaseCtx { theta, eps: epsv }
        }
    }
}

fn eval_bits(ev: &mut Evaluator, phase: &Phase, ctx: &PhaseCtx, bits: &[bool]) -> Option<f64> {
    if phase.is_phase2() {
        ev.eval_phase2(bits)
    } else {
        ev.eval_phase1(bits, &ctx.theta, &ctx.eps)
    }
}

/// Enumerates every schedule in the search space. Exact; errors with
/// [`Error::CapExceeded`] when the space is larger than 2^[`EXHAUSTIVE_CAP_BITS`].
pub fn solve_exhaustive(landscape: &Landscape, phase: &Phase) -> Result<SearchResult> {
    let start = Instant::now();
    let horizon = phase.horizon(landscape);
    let c = landscape.compile();
    let k = c.lambda.len() as u32 * horizon;
    if k > EXHAUSTIVE_CAP_BITS {
        return Err(Error::CapExceeded(format!(
            "{k} schedule bits exceed the exhaustive cap of {EXHAUSTIVE_CAP_BITS}"
        )));
    }
    let ctx = phase_ctx(landscape, phase);
    let mut ev = Evaluator::new(c, horizon);
    let mut bits = vec![false; k as usize];
    let mut best: Option<(u64, f64)> = None;
    let total: u64 = 1u64 << k;
    for mask in 0..total {
        for (b, slot) in bits.iter_mut().enumerate() {
            *slot = (mask >> b) & 1 == 1;
        }
        if let Some(z) = eval_bits(&mut ev, phase, &ctx, &bits) {
            if best.map_or(true, |(_, zb)| better(phase, z, zb)) {
                best = Some((mask, z));
            }
        }
    }
    let result = match best {
        Some((mask, z)) => {
            for (b, slot) in bits.iter_mut().enumerate() {
                *slot = (mask >> b) & 1 == 1;
            }
            SearchResult {
                schedule: Some(schedule_from_bits(&ev.c, &bits, horizon)),
                objective: Some(z),
                status: SolveStatus::Optimal,
                nodes_explored: total,
                wall_time: start.elapsed(),
            }
        }
        None => SearchResult {
            schedule: None,
            objective: None,
            status: SolveStatus::Infeasible,
            nodes_explored: total,
            wall_time: start.elapsed(),
        },
    };
    Ok(result)
}

struct Bnb<'a> {
    ev: Evaluator,
    phase: &'a Phase,
    ctx: PhaseCtx,
    horizon: u32,
    cap: f64,
    tol: f64,
    node_cap: u64,
    propagate: bool,
    /// Upper bound on the per-period phase-1 gain, for the optimistic bound.
    theta_gain: f64,

    bits: Vec<bool>,
    treat: Vec<bool>,
    /// ages[t] holds patch ages after period t; ages[0] is the initial state.
    ages: Vec<Vec<u32>>,
    blocked: Vec<Vec<bool>>,
    forced: Vec<Vec<bool>>,

    nodes: u64,
    aborted: bool,
    incumbent: Option<(Vec<bool>, f64)>,
}

impl<'a> Bnb<'a> {
    fn prune_by_bound(&self, acc: f64) -> bool {
        let Some((_, zb)) = &self.incumbent else { return false };
        if self.phase.is_phase2() {
            acc >= *zb
        } else {
            false // handled with the optimistic bound in leafward pruning
        }
    }

    fn phase1_bound_prunes(&self, acc: f64, t_done: u32) -> bool {
        let Some((_, zb)) = &self.incumbent else { return false };
        let remaining = (self.horizon - t_done) as f64 * self.theta_gain;
        acc + remaining <= *zb
    }

    fn period(&mut self, t: u32, acc: f64) {
        if self.aborted {
            return;
        }
        if t > self.horizon {
            if self
                .incumbent
                .as_ref()
                .map_or(true, |(_, zb)| better(self.phase, acc, *zb))
            {
                self.incumbent = Some((self.bits.clone(), acc));
            }
            return;
        }
        if self.phase.is_phase2() {
            let flags = self.ev.period_flags(&self.ages[(t - 1) as usize]);
            self.blocked[(t - 1) as usize].copy_from_slice(&flags.blocked);
            self.forced[(t - 1) as usize].copy_from_slice(&flags.forced);
        }
        for u in self.ev.c.lambda.clone() {
            self.treat[u] = false;
        }
        self.unit(t, 0, 0.0, acc);
    }

    fn descend(&mut self, t: u32, acc: f64) {
        self.snapshot_period(t);
        let ti = t as usize;
        let (prev, cur) = self.ages.split_at_mut(ti);
        Evaluator::step_ages(&prev[ti - 1], &self.ev.c, &self.treat, &mut cur[0]);
        let period_value = if self.phase.is_phase2() {
            self.ev.weighted_conn_of_ages(&self.ages[ti])
        } else {
            let gain: f64 = self
                .ev
                .c
                .lambda
                .iter()
                .filter(|&&u| self.treat[u] && self.ctx.theta[u])
                .map(|&u| self.ev.c.area_c[u])
                .sum();
            gain - self.ev.period_phase1_penalty(&self.ages[ti], &self.ctx.theta, &self.ctx.eps)
        };
        let acc = acc + period_value;
        if self.phase.is_phase2() {
            if self.prune_by_bound(acc) {
                return;
            }
        } else if self.phase1_bound_prunes(acc, t) {
            return;
        }
        self.period(t + 1, acc);
    }

    fn unit(&mut self, t: u32, lp: usize, area: f64, acc: f64) {
        if self.aborted {
            return;
        }
        if lp == self.ev.c.lambda.len() {
            self.descend(t, acc);
            return;
        }
        let u = self.ev.c.lambda[lp];
        let c_u = self.ev.c.area_c[u];
        let ti = (t - 1) as usize;
        let (blocked, forced) = if self.phase.is_phase2() {
            (self.blocked[ti][u], self.forced[ti][u])
        } else {
            (false, false)
        };

        if self.propagate && (blocked || forced) {
            if forced {
                if area + c_u > self.cap + self.tol {
                    return; // a forced treatment that cannot fit the budget
                }
                self.treat[u] = true;
                self.unit(t, lp + 1, area + c_u, acc);
                self.treat[u] = false;
            } else {
                self.treat[u] = false;
                self.unit(t, lp + 1, area, acc);
            }
            return;
        }

        for value in [true, false] {
            self.nodes += 1;
            if self.nodes > self.node_cap {
                self.aborted = true;
                return;
            }
            if value && (blocked || area + c_u > self.cap + self.tol) {
                continue;
            }
            if !value && forced {
                continue;
            }
            self.treat[u] = value;
            self.unit(t, lp + 1, if value { area + c_u } else { area }, acc);
            self.treat[u] = false;
            if self.aborted {
                return;
            }
        }
    }
}

/// Chronological branch-and-bound, exact when it terminates within the node
/// cap. Branches period-major (treat before not-treat); determined decisions
/// are propagated instead of branched when `options.propagate` is set.
pub fn solve_bnb(landscape: &Landscape, phase: &Phase, options: &BnbOptions) -> Result<SearchResult> {
    let start = Instant::now();
    let horizon = phase.horizon(landscape);
    let c = landscape.compile();
    let nl = c.lambda.len();
    let np = c.n_patches();
    let nu = c.n_units();
    let cap = c.budget_cap();
    let ctx = phase_ctx(landscape, phase);
    let theta_gain = c
        .lambda
        .iter()
        .filter(|&&u| ctx.theta.get(u).copied().unwrap_or(false))
        .map(|&u| c.area_c[u])
        .sum();

    let mut ages = vec![vec![0u32; np]; horizon as usize + 1];
    ages[0].copy_from_slice(&c.init_age);

    let mut bnb = Bnb {
        ev: Evaluator::new(c, horizon),
        phase,
        ctx,
        horizon,
        cap,
        tol: budget_tol(cap),
        node_cap: options.node_cap,
        propagate: options.propagate,
        theta_gain,
        bits: vec![false; nl * horizon as usize],
        treat: vec![false; nu],
        ages,
        blocked: vec![vec![false; nu]; horizon as usize],
        forced: vec![vec![false; nu]; horizon as usize],
        nodes: 0,
        aborted: false,
        incumbent: None,
    };

    if options.seed_greedy {
        let seeded = solve_greedy_ls(landscape, phase, 0)?;
        if let (Some(sched), Some(z)) = (&seeded.schedule, seeded.objective) {
            let bits = crate::dynamics::bits_from_schedule(&bnb.ev.c, sched, horizon);
            bnb.incumbent = Some((bits, z));
        }
    }

    bnb.run();

    let status = match (&bnb.incumbent, bnb.aborted) {
        (Some(_), false) => SolveStatus::Optimal,
        (Some(_), true) => SolveStatus::Feasible,
        (None, false) => SolveStatus::Infeasible,
        (None, true) => SolveStatus::NodeBudgetExhausted,
    };
    let (schedule, objective) = match &bnb.incumbent {
        Some((bits, z)) => (Some(schedule_from_bits(&bnb.ev.c, bits, horizon)), Some(*z)),
        None => (None, None),
    };
    Ok(SearchResult {
        schedule,
        objective,
        status,
        nodes_explored: bnb.nodes,
        wall_time: start.elapsed(),
    })
}

impl<'a> Bnb<'a> {
    fn run(&mut self) {
        self.period(1, 0.0);
    }
}

// Record the schedule bits as treatment decisions are made: the bits vector
// inside Bnb mirrors `treat` at leaf time. Keeping it synchronised in `unit`
// would double the bookkeeping, so `descend` snapshots instead.
impl<'a> Bnb<'a> {
    fn snapshot_period(&mut self, t: u32) {
        let nl = self.ev.c.lambda.len();
        for (lp, &u) in self.ev.c.lambda.iter().enumerate() {
            self.bits[(t - 1) as usize * nl + lp] = self.treat[u];
        }
    }
}

/// Greedy construction plus toggle/swap local search. Deterministic for a
/// given seed; returns a feasible incumbent, never a proof of optimality.
pub fn solve_greedy_ls(landscape: &Landscape, phase: &Phase, seed: u64) -> Result<SearchResult> {
    let start = Instant::now();
    let horizon = phase.horizon(landscape);
    let c = landscape.compile();
    let ctx = phase_ctx(landscape, phase);
    let mut ev = Evaluator::new(c, horizon);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    const RESTARTS: u32 = 3;
    let mut best: Option<(Vec<bool>, f64)> = None;
    for _ in 0..RESTARTS {
        let Some(bits) = greedy_construct(&mut ev, phase, &ctx, &mut rng) else {
            continue;
        };
        let Some(mut z) = eval_bits(&mut ev, phase, &ctx, &bits) else {
            continue;
        };
        let mut bits = bits;
        local_search(&mut ev, phase, &ctx, &mut bits, &mut z);
        if best.as_ref().map_or(true, |(_, zb)| better(phase, z, *zb)) {
            best = Some((bits, z));
        }
    }

    Ok(match best {
        Some((bits, z)) => SearchResult {
            schedule: Some(schedule_from_bits(&ev.c, &bits, horizon)),
            objective: Some(z),
            status: SolveStatus::Feasible,
            nodes_explored: 0,
            wall_time: start.elapsed(),
        },
        None => SearchResult {
            schedule: None,
            objective: None,
            status: SolveStatus::Infeasible,
            nodes_explored: 0,
            wall_time: start.elapsed(),
        },
    })
}

/// Builds a schedule chronologically. Phase 2: treat everything the TFI rules
/// force, then add the best connectivity reduction per hectare while it
/// helps. Phase 1: fill the budget with backlog units, preferring ones not
/// yet treated or still holding an old patch.
fn greedy_construct(
    ev: &mut Evaluator,
    phase: &Phase,
    ctx: &PhaseCtx,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<bool>> {
    let c = ev.c.clone();
    let horizon = match phase {
        Phase::Phase2 => ev.horizon,
        Phase::Phase1 { n, .. } => *n,
    };
    let nl = c.lambda.len();
    let cap = c.budget_cap();
    let tol = budget_tol(cap);
    let np = c.n_patches();

    let mut bits = vec![false; nl * horizon as usize];
    let mut ages_prev = c.init_age.clone();
    let mut ages_next = vec![0u32; np];
    let mut treat = vec![false; c.n_units()];
    let mut treated_ever = vec![false; c.n_units()];

    for t in 1..=horizon {
        for v in treat.iter_mut() {
            *v = false;
        }
        let mut area = 0.0;
        let mut order: Vec<usize> = (0..nl).collect();
        order.shuffle(rng);

        if phase.is_phase2() {
            let flags = ev.period_flags(&ages_prev);
            for &lp in &order {
                let u = c.lambda[lp];
                if flags.forced[u] {
                    treat[u] = true;
                    area += c.area_c[u];
                }
            }
            if area > cap + tol {
                return None; // forced treatments alone blow the budget
            }
            loop {
                Evaluator::step_ages(&ages_prev, &c, &treat, &mut ages_next);
                let base = ev.weighted_conn_of_ages(&ages_next);
                let mut pick: Option<(usize, f64)> = None;
                for &lp in &order {
                    let u = c.lambda[lp];
                    if treat[u] || flags.blocked[u] || area + c.area_c[u] > cap + tol {
                        continue;
                    }
                    treat[u] = true;
                    Evaluator::step_ages(&ages_prev, &c, &treat, &mut ages_next);
                    let with_u = ev.weighted_conn_of_ages(&ages_next);
                    treat[u] = false;
                    let score = (base - with_u) / c.area_c[u];
                    if score > 0.0 && pick.map_or(true, |(_, s)| score > s) {
                        pick = Some((u, score));
                    }
                }
                match pick {
                    Some((u, _)) => {
                        treat[u] = true;
                        area += c.area_c[u];
                    }
                    None => break,
                }
            }
        } else {
            // backlog units first: untreated-so-far or still holding an old patch
            let mut cands: Vec<usize> = order
                .iter()
                .map(|&lp| c.lambda[lp])
                .filter(|&u| ctx.theta[u])
                .collect();
            cands.sort_by(|&a, &b| {
                let key = |u: usize| {
                    let (s, e) = c.patch_range[u];
                    let has_old = (s..e).any(|p| ages_prev[p] >= c.max_tfi[p]);
                    // prefer untreated, then old-holding, then larger area
                    (treated_ever[u], !has_old)
                };
                key(a)
                    .cmp(&key(b))
                    .then(c.area_c[b].partial_cmp(&c.area_c[a]).unwrap())
            });
            for u in cands {
                if area + c.area_c[u] <= cap + tol {
                    treat[u] = true;
                    area += c.area_c[u];
                }
            }
        }

        for (lp, &u) in c.lambda.iter().enumerate() {
            bits[(t - 1) as usize * nl + lp] = treat[u];
            treated_ever[u] |= treat[u];
        }
        Evaluator::step_ages(&ages_prev, &c, &treat, &mut ages_next);
        std::mem::swap(&mut ages_prev, &mut ages_next);
    }
    Some(bits)
}

/// First-improvement local search over single-bit toggles and same-period
/// swaps, repeated until a full pass finds nothing better.
fn local_search(
    ev: &mut Evaluator,
    phase: &Phase,
    ctx: &PhaseCtx,
    bits: &mut Vec<bool>,
    z: &mut f64,
) {
    let nl = ev.c.lambda.len();
    let horizon = bits.len() / nl.max(1);
    loop {
        let mut improved = false;
        for b in 0..bits.len() {
            bits[b] = !bits[b];
            match eval_bits(ev, phase, ctx, bits) {
                Some(zn) if better(phase, zn, *z) => {
                    *z = zn;
                    improved = true;
                }
                _ => bits[b] = !bits[b],
            }
        }
        for t in 0..horizon {
            for a in 0..nl {
                for b in 0..nl {
                    let ia = t * nl + a;
                    let ib = t * nl + b;
                    if !(bits[ia] && !bits[ib]) {
                        continue;
                    }
                    bits[ia] = false;
                    bits[ib] = true;
                    match eval_bits(ev, phase, ctx, bits) {
                        Some(zn) if better(phase, zn, *z) => {
                            *z = zn;
                            improved = true;
                        }
                        _ => {
                            bits[ia] = true;
                            bits[ib] = false;
                        }
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Solver selection for the pipeline and CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Exhaustive,
    Bnb,
    Greedy,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(SolverKind::Exhaustive),
            "bnb" => Ok(SolverKind::Bnb),
            "greedy" => Ok(SolverKind::Greedy),
            other => Err(Error::parse(format!("unknown solver {other:?}"))),
        }
    }
}

/// Runs the chosen solver with its default options; `seed` only affects the
/// greedy solver.
pub fn solve(
    landscape: &Landscape,
    phase: &Phase,
    kind: SolverKind,
    seed: u64,
) -> Result<SearchResult> {
    match kind {
        SolverKind::Exhaustive => solve_exhaustive(landscape, phase),
        SolverKind::Bnb => solve_bnb(landscape, phase, &BnbOptions::default()),
        SolverKind::Greedy => solve_greedy_ls(landscape, phase, seed),
    }
}

#[cfg(test)]
mod tests;
