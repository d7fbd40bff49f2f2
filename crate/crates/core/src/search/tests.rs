use std::collections::BTreeMap;

use super::*;
use crate::dynamics::{default_eps, is_feasible, objective_phase2, simulate};
use crate::landscape::parse_landscape;

fn chain3() -> Landscape {
    // three risky single-patch units in a chain; budget fits one per year
    parse_landscape(
        r#"{
        "veg_classes": [{"code": "1", "min_tfi": 3, "max_tfi": 20, "risk_threshold": 5}],
        "units": [
            {"id": "1", "patches": [{"id": "p1", "veg": "1", "area": 10.0, "initial_age": 6}]},
            {"id": "2", "patches": [{"id": "p2", "veg": "1", "area": 10.0, "initial_age": 6}]},
            {"id": "3", "patches": [{"id": "p3", "veg": "1", "area": 10.0, "initial_age": 6}]}
        ],
        "edges": [{"i": "1", "j": "2"}, {"i": "2", "j": "3"}],
        "params": {"T": 2, "rho": 0.34, "H": 0.5}
    }"#,
    )
    .unwrap()
}

#[test]
fn exhaustive_breaks_the_chain_through_the_middle() {
    let ls = chain3();
    let res = solve_exhaustive(&ls, &Phase::Phase2).unwrap();
    assert_eq!(res.status, SolveStatus::Optimal);
    let sched = res.schedule.unwrap();
    // treating unit 2 in year 1 kills both edges for the whole horizon
    assert!(sched.is_treated("2", 1));
    assert_eq!(res.objective, Some(0.0));
}

#[test]
fn exhaustive_cap_is_enforced() {
    let ls = chain3().with_horizon(9).unwrap(); // 3 * 9 = 27 bits
    assert!(matches!(
        solve_exhaustive(&ls, &Phase::Phase2),
        Err(crate::Error::CapExceeded(_))
    ));
}

#[test]
fn bnb_matches_exhaustive_on_the_chain() {
    let ls = chain3();
    let a = solve_exhaustive(&ls, &Phase::Phase2).unwrap();
    let b = solve_bnb(&ls, &Phase::Phase2, &BnbOptions::default()).unwrap();
    assert_eq!(b.status, SolveStatus::Optimal);
    assert_eq!(a.objective, b.objective);
}

#[test]
fn bnb_respects_forced_treatments() {
    // unit at maxTFI must be treated in year 1 even though it costs budget
    let ls = parse_landscape(
        r#"{
        "veg_classes": [{"code": "1", "min_tfi": 3, "max_tfi": 10, "risk_threshold": 5}],
        "units": [
            {"id": "a", "patches": [{"id": "pa", "veg": "1", "area": 10.0, "initial_age": 10}]},
            {"id": "b", "patches": [{"id": "pb", "veg": "1", "area": 10.0, "initial_age": 6}]}
        ],
        "edges": [{"i": "a", "j": "b"}],
        "params": {"T": 2, "rho": 0.5, "H": 0.5}
    }"#,
    )
    .unwrap();
    let res = solve_bnb(&ls, &Phase::Phase2, &BnbOptions::default()).unwrap();
    let sched = res.schedule.unwrap();
    assert!(sched.is_treated("a", 1));
    assert!(is_feasible(&ls, &sched).feasible);
}

#[test]
fn bnb_reports_infeasibility() {
    // forced treatment that cannot fit any budget
    let ls = parse_landscape(
        r#"{
        "veg_classes": [{"code": "1", "min_tfi": 3, "max_tfi": 10, "risk_threshold": 5}],
        "units": [
            {"id": "a", "patches": [{"id": "pa", "veg": "1", "area": 10.0, "initial_age": 10}]},
            {"id": "b", "patches": [{"id": "pb", "veg": "1", "area": 100.0, "initial_age": 1}]}
        ],
        "params": {"T": 1, "rho": 0.05, "H": 0.5}
    }"#,
    )
    .unwrap();
    let res = solve_bnb(&ls, &Phase::Phase2, &BnbOptions::default()).unwrap();
    assert_eq!(res.status, SolveStatus::Infeasible);
    assert!(res.schedule.is_none());
}

#[test]
fn node_cap_exhaustion_is_reported() {
    let ls = chain3();
    let opts = BnbOptions { node_cap: 1, propagate: false, seed_greedy: false };
    let res = solve_bnb(&ls, &Phase::Phase2, &opts).unwrap();
    assert_eq!(res.status, SolveStatus::NodeBudgetExhausted);
}

#[test]
fn propagation_never_explores_more_nodes() {
    let ls = chain3();
    let base = BnbOptions { node_cap: u64::MAX, propagate: false, seed_greedy: false };
    let prop = BnbOptions { propagate: true, ..base };
    let a = solve_bnb(&ls, &Phase::Phase2, &base).unwrap();
    let b = solve_bnb(&ls, &Phase::Phase2, &prop).unwrap();
    assert!(b.nodes_explored <= a.nodes_explored);
    assert_eq!(a.objective, b.objective);
}

#[test]
fn greedy_is_deterministic_and_feasible() {
    let ls = chain3();
    let a = solve_greedy_ls(&ls, &Phase::Phase2, 7).unwrap();
    let b = solve_greedy_ls(&ls, &Phase::Phase2, 7).unwrap();
    assert_eq!(a.objective, b.objective);
    assert_eq!(
        a.schedule.as_ref().unwrap().pairs().collect::<Vec<_>>(),
        b.schedule.as_ref().unwrap().pairs().collect::<Vec<_>>()
    );
    let sched = a.schedule.unwrap();
    assert!(is_feasible(&ls, &sched).feasible);
    // greedy objective matches an independent re-simulation
    let traj = simulate(&ls, &sched);
    assert_eq!(a.objective, Some(objective_phase2(&ls, &traj)));
}

#[test]
fn phase1_treats_the_backlog() {
    // one backlog unit (old, no young), one ordinary unit
    let ls = parse_landscape(
        r#"{
        "veg_classes": [{"code": "1", "min_tfi": 3, "max_tfi": 10, "risk_threshold": 5}],
        "units": [
            {"id": "a", "patches": [{"id": "pa", "veg": "1", "area": 10.0, "initial_age": 12}]},
            {"id": "b", "patches": [{"id": "pb", "veg": "1", "area": 10.0, "initial_age": 6}]}
        ],
        "edges": [{"i": "a", "j": "b"}],
        "params": {"T": 5, "rho": 0.5, "H": 0.5}
    }"#,
    )
    .unwrap();
    let phase = Phase::Phase1 { n: 2, eps: default_eps(&ls) };
    let ex = solve_exhaustive(&ls, &phase).unwrap();
    let bb = solve_bnb(&ls, &phase, &BnbOptions::default()).unwrap();
    assert_eq!(ex.objective, bb.objective);
    // the optimum treats the backlog unit both years (area 10 each, small penalty)
    assert!(ex.objective.unwrap() > 19.0);
    let sched = ex.schedule.unwrap();
    assert!(sched.is_treated("a", 1));
    assert!(sched.is_treated("a", 2));
}

#[test]
fn empty_backlog_means_zero_phase1_objective() {
    let ls = chain3(); // ages 6, far from maxTFI 20
    let phase = Phase::Phase1 { n: 1, eps: BTreeMap::new() };
    let ex = solve_exhaustive(&ls, &phase).unwrap();
    assert_eq!(ex.objective, Some(0.0));
}
