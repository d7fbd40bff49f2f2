//! Acceptance gate: one test per criterion, each printing a PASS line with
//! its pinned tolerances when it holds.

mod common;

use firebreak::dynamics::{is_feasible, objective_phase2, simulate, ConstraintTag};
use firebreak::landscape::{parse_landscape, Landscape, VegClass};
use firebreak::mip::{
    build_phase2, check_assignment, lift_assignment, parse_lp, to_lp_string, to_mps_string,
    MipModel,
};
use firebreak::pipeline::{generate_synthetic, old_fraction, run_phase1, StopRule};
use firebreak::search::{
    solve_bnb, solve_exhaustive, solve_greedy_ls, BnbOptions, Phase, SolveStatus, SolverKind,
};

const OBJ_TOL: f64 = 1e-9;

/// Minimum model objective over all schedules whose lifted assignment
/// satisfies every row, or None when no schedule checks out.
fn min_checked_objective(ls: &Landscape, model: &MipModel) -> Option<f64> {
    let mut best: Option<f64> = None;
    for sched in common::all_schedules(ls) {
        let a = lift_assignment(ls, &sched, model, ls.horizon()).unwrap();
        if check_assignment(model, &a).unwrap().feasible {
            let z = model.objective_value(&a).unwrap();
            if best.map_or(true, |b| z < b) {
                best = Some(z);
            }
        }
    }
    best
}

#[test]
fn acceptance_1_branch_and_bound_matches_exhaustive() {
    let bnb_opts = BnbOptions { node_cap: u64::MAX, propagate: true, seed_greedy: true };
    let mut checked = 0u32;
    for seed in 0..200u64 {
        let mut rng = common::rng(seed);
        let max_bits = if seed % 10 == 0 { 16 } else { 12 };
        let ls = common::random_landscape(&mut rng, max_bits);
        let ex = solve_exhaustive(&ls, &Phase::Phase2).unwrap();
        let bb = solve_bnb(&ls, &Phase::Phase2, &bnb_opts).unwrap();
        match (ex.objective, bb.objective) {
            (Some(a), Some(b)) => {
                assert!((a - b).abs() <= OBJ_TOL, "seed {seed}: {a} vs {b}");
                assert_eq!(bb.status, SolveStatus::Optimal, "seed {seed}");
            }
            (None, None) => assert_eq!(bb.status, SolveStatus::Infeasible, "seed {seed}"),
            (a, b) => panic!("seed {seed}: exhaustive {a:?} but branch-and-bound {b:?}"),
        }
        checked += 1;
    }
    println!(
        "acceptance 1: PASS - branch-and-bound equals exhaustive on {checked} random \
         instances (objective tolerance {OBJ_TOL:e})"
    );
}

#[test]
fn acceptance_2_lifted_schedules_satisfy_the_model() {
    let mut feasible_pairs = 0u32;
    let mut infeasible_pairs = 0u32;
    let mut seed = 0u64;
    while feasible_pairs < 500 {
        seed += 1;
        let mut rng = common::rng(1_000_000 + seed);
        let ls = common::random_landscape(&mut rng, 16);
        let model = build_phase2(&ls, false).unwrap();
        let sched = common::random_schedule(&mut rng, &ls);
        let a = lift_assignment(&ls, &sched, &model, ls.horizon()).unwrap();
        let model_report = check_assignment(&model, &a).unwrap();
        let truth = is_feasible(&ls, &sched);
        if truth.feasible {
            assert!(
                model_report.feasible,
                "seed {seed}: ground-truth feasible but rows violated: {:?}",
                model_report.violated_rows
            );
            let z = model.objective_value(&a).unwrap();
            let z_sim = objective_phase2(&ls, &simulate(&ls, &sched));
            assert!((z - z_sim).abs() <= OBJ_TOL, "seed {seed}: {z} vs {z_sim}");
            feasible_pairs += 1;
        } else {
            // the converse; budget violations within the checker tolerance
            // are too marginal to distinguish, so only clear excesses count
            let non_budget = truth.violations.iter().any(|v| v.tag != ConstraintTag::Budget);
            let cap = ls.rho() * ls.treatable_area();
            let max_excess = (1..=ls.horizon())
                .map(|t| {
                    ls.units()
                        .values()
                        .filter(|u| sched.is_treated(&u.id, t))
                        .map(|u| u.area)
                        .sum::<f64>()
                        - cap
                })
                .fold(0.0f64, f64::max);
            if non_budget || max_excess > 1e-5 {
                assert!(
                    !model_report.feasible,
                    "seed {seed}: ground-truth infeasible ({:?}) but all rows hold",
                    truth.violations
                );
            }
            infeasible_pairs += 1;
        }
    }
    println!(
        "acceptance 2: PASS - {feasible_pairs} feasible schedule lifts satisfy every row \
         and match the simulated objective (tolerance {OBJ_TOL:e}); {infeasible_pairs} \
         infeasible lifts were rejected"
    );
}

#[test]
fn acceptance_3_reduction_preserves_the_optimum() {
    let mut with_untreatable = 0u32;
    let mut seed = 0u64;
    while with_untreatable < 50 {
        seed += 1;
        let mut rng = common::rng(2_000_000 + seed);
        let ls = common::random_landscape(&mut rng, 12);
        if ls.units().values().all(|u| u.treatable) {
            continue;
        }
        let full = build_phase2(&ls, false).unwrap();
        let reduced = build_phase2(&ls, true).unwrap();
        let a = min_checked_objective(&ls, &full);
        let b = min_checked_objective(&ls, &reduced);
        match (a, b) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= OBJ_TOL, "seed {seed}: {a} vs {b}"),
            (None, None) => {}
            other => panic!("seed {seed}: feasibility differs across reduction: {other:?}"),
        }
        assert!(reduced.variables().len() < full.variables().len(), "seed {seed}");
        with_untreatable += 1;
    }
    println!(
        "acceptance 3: PASS - reduced and full models agree on the optimal objective \
         (tolerance {OBJ_TOL:e}) on {with_untreatable} instances with untreatable units"
    );
}

#[test]
fn acceptance_4_returned_schedules_respect_the_tfi_rules() {
    let mut checked = 0u32;
    for seed in 0..100u64 {
        let mut rng = common::rng(3_000_000 + seed);
        let ls = common::random_landscape(&mut rng, 12);
        let results = [
            solve_exhaustive(&ls, &Phase::Phase2).unwrap(),
            solve_bnb(&ls, &Phase::Phase2, &BnbOptions::default()).unwrap(),
            solve_greedy_ls(&ls, &Phase::Phase2, seed).unwrap(),
        ];
        for res in results {
            if let Some(sched) = res.schedule {
                let rep = is_feasible(&ls, &sched);
                assert!(rep.feasible, "seed {seed}: {:?}", rep.violations);
                checked += 1;
            }
        }
    }
    println!(
        "acceptance 4: PASS - {checked} solver schedules satisfy the budget and both \
         TFI gating rules exactly"
    );
}

#[test]
fn acceptance_5_more_budget_never_hurts() {
    let mut compared = 0u32;
    let mut seed = 0u64;
    while compared < 50 {
        seed += 1;
        let mut rng = common::rng(4_000_000 + seed);
        let ls = common::random_landscape(&mut rng, 12);
        let lo = ls.rho() * 0.5;
        let hi = (ls.rho() * 1.5).min(1.0);
        let z_lo = solve_exhaustive(&ls.with_rho(lo).unwrap(), &Phase::Phase2)
            .unwrap()
            .objective;
        let z_hi = solve_exhaustive(&ls.with_rho(hi).unwrap(), &Phase::Phase2)
            .unwrap()
            .objective;
        if let Some(a) = z_lo {
            let b = z_hi.expect("a feasible schedule stays feasible under a larger budget");
            assert!(b <= a + OBJ_TOL, "seed {seed}: rho {lo} gave {a}, rho {hi} gave {b}");
            compared += 1;
        }
    }
    println!(
        "acceptance 5: PASS - optimal connectivity is non-increasing in the budget on \
         {compared} instance pairs (tolerance {OBJ_TOL:e})"
    );
}

#[test]
fn acceptance_6_demo_landscape_connectivity_declines() {
    let ls = firebreak::landscape::load_landscape(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/demo29.json"
    ))
    .unwrap();
    assert_eq!(ls.units().len(), 29);
    assert_eq!(ls.veg_classes().len(), 3);
    assert_eq!(ls.horizon(), 5);

    // before any treatment, unit 1 is high-risk across its whole 32 ha while
    // the freshly burnt unit 3 is not at risk at all
    let initial = simulate(&ls, &firebreak::dynamics::Schedule::empty());
    assert!(initial.risk_unit("1", 0));
    assert!(!initial.risk_unit("3", 0));
    let unit1 = &ls.units()["1"];
    assert_eq!(unit1.area, 32.0);
    let risky_area: f64 = unit1
        .patches
        .iter()
        .filter(|p| initial.risk_patch(p, 0))
        .map(|p| ls.patches()[p.as_str()].area)
        .sum();
    assert_eq!(risky_area, 32.0);

    let opts = BnbOptions { node_cap: 2_000_000, propagate: true, seed_greedy: true };
    let res = solve_bnb(&ls, &Phase::Phase2, &opts).unwrap();
    let sched = res.schedule.expect("the demo landscape admits a feasible plan");
    assert!(is_feasible(&ls, &sched).feasible);

    let traj = simulate(&ls, &sched);
    let series: Vec<u32> = (0..=5).map(|t| traj.connectivity_count(t)).collect();
    let non_increasing = series.windows(2).filter(|w| w[1] <= w[0]).count();
    assert!(
        non_increasing >= 4,
        "connectivity series {series:?} rises in more than one step"
    );
    assert!(series[5] < series[0], "no overall reduction: {series:?}");
    println!(
        "acceptance 6: PASS - 29-unit demo: connectivity {series:?} is non-increasing in \
         {non_increasing}/5 steps under a node-capped exact search (status {:?})",
        res.status
    );
}

#[test]
fn acceptance_7_preparatory_phase_clears_the_backlog() {
    let veg = vec![
        VegClass {
            code: "slow".into(),
            name: "slow regrowth".into(),
            min_tfi: 5,
            max_tfi: 100,
            risk_threshold: 15,
        },
        VegClass {
            code: "slower".into(),
            name: "slower regrowth".into(),
            min_tfi: 7,
            max_tfi: 120,
            risk_threshold: 20,
        },
    ];
    let ls = generate_synthetic(30, &veg, 11, 0.31).unwrap();
    let start = old_fraction(&ls, false);
    assert!((start - 0.31).abs() <= 0.05, "generator missed the target: {start}");

    let outcome = run_phase1(&ls, StopRule::OldFractionBelow(0.05), 15, SolverKind::Greedy, 0)
        .unwrap();
    assert!(outcome.n <= 15);
    assert!(outcome.n >= 1, "a 31% backlog cannot clear instantly");
    assert!(
        outcome.old_fraction < 0.05,
        "old share still {} after {} periods",
        outcome.old_fraction,
        outcome.n
    );
    println!(
        "acceptance 7: PASS - old share {start:.3} -> {:.3} (< 0.05) after {} preparatory \
         periods (cap 15) at a 15% yearly budget",
        outcome.old_fraction, outcome.n
    );
}

#[test]
fn acceptance_8_model_text_is_stable_and_reparses_equivalently() {
    let ls = golden_landscape();
    let model = build_phase2(&ls, true).unwrap();

    let lp = to_lp_string(&model).unwrap();
    let mps = to_mps_string(&model).unwrap();
    assert_eq!(lp, include_str!("golden/two_unit.lp"), "LP text drifted from the golden file");
    assert_eq!(mps, include_str!("golden/two_unit.mps"), "MPS text drifted from the golden file");

    let reparsed = parse_lp(&lp).unwrap();
    let a = min_checked_objective(&ls, &model);
    let b = min_checked_objective(&ls, &reparsed);
    assert_eq!(a.is_some(), b.is_some());
    let (a, b) = (a.unwrap(), b.unwrap());
    assert!((a - b).abs() <= OBJ_TOL, "{a} vs {b}");
    println!(
        "acceptance 8: PASS - LP and MPS output match the golden files byte-for-byte and \
         the re-parsed LP model has the same optimum ({a}) within {OBJ_TOL:e}"
    );
}

fn golden_landscape() -> Landscape {
    parse_landscape(
        r#"{
        "veg_classes": [
            {"code": "1", "min_tfi": 3, "max_tfi": 10, "risk_threshold": 5},
            {"code": "2", "min_tfi": 4, "max_tfi": 15, "risk_threshold": 7}
        ],
        "units": [
            {"id": "1", "patches": [
                {"id": "1_1", "veg": "1", "area": 10.0, "initial_age": 6},
                {"id": "1_2", "veg": "2", "area": 8.0, "initial_age": 7}
            ]},
            {"id": "2", "patches": [
                {"id": "2_1", "veg": "1", "area": 12.0, "initial_age": 5}
            ]},
            {"id": "3", "treatable": false, "patches": [
                {"id": "3_1", "veg": "2", "area": 9.0, "initial_age": 8}
            ]}
        ],
        "edges": [{"i": "1", "j": "2", "w": 2.0}, {"i": "2", "j": "3"}, {"i": "1", "j": "3", "w": 1.5}],
        "params": {"T": 2, "rho": 0.65, "H": 0.5}
    }"#,
    )
    .unwrap()
}
