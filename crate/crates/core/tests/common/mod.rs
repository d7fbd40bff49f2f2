//! Shared helpers for the integration suites: a deterministic random
//! instance generator small enough for exhaustive enumeration, and a random
//! schedule sampler.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use firebreak::dynamics::Schedule;
use firebreak::landscape::{parse_landscape, Landscape};

/// A small random instance: 2-4 units (some possibly untreatable), 1-2
/// patches each, 1-2 vegetation classes, random adjacency, horizon 2-3.
/// The treatable-bits product stays at or below `max_bits`.
pub fn random_landscape(rng: &mut ChaCha8Rng, max_bits: u32) -> Landscape {
    loop {
        let n_veg = rng.gen_range(1..=2usize);
        let mut veg = Vec::new();
        for k in 1..=n_veg {
            let min_tfi = rng.gen_range(1..=4u32);
            let max_tfi = min_tfi + rng.gen_range(2..=8u32);
            let d = rng.gen_range(min_tfi..=max_tfi);
            veg.push(format!(
                r#"{{"code": "{k}", "min_tfi": {min_tfi}, "max_tfi": {max_tfi}, "risk_threshold": {d}}}"#
            ));
        }

        let n_units = rng.gen_range(2..=4usize);
        let horizon = rng.gen_range(2..=3u32);
        let mut units = Vec::new();
        let mut treatable_count = 0u32;
        for u in 1..=n_units {
            let treatable = rng.gen_bool(0.8);
            treatable_count += treatable as u32;
            let n_patches = rng.gen_range(1..=2usize);
            let patches: Vec<String> = (1..=n_patches)
                .map(|p| {
                    let v = rng.gen_range(1..=n_veg);
                    let area = rng.gen_range(1..=20u32);
                    let age = rng.gen_range(0..=12u32);
                    format!(
                        r#"{{"id": "{u}_{p}", "veg": "{v}", "area": {area}.0, "initial_age": {age}}}"#
                    )
                })
                .collect();
            units.push(format!(
                r#"{{"id": "{u}", "treatable": {treatable}, "patches": [{}]}}"#,
                patches.join(",")
            ));
        }
        if treatable_count == 0 || treatable_count * horizon > max_bits {
            continue;
        }

        let mut edges = BTreeSet::new();
        let n_edges = rng.gen_range(0..=n_units + 1);
        for _ in 0..n_edges {
            let i = rng.gen_range(1..=n_units);
            let j = rng.gen_range(1..=n_units);
            if i != j {
                edges.insert((i.min(j), i.max(j)));
            }
        }
        let edges: Vec<String> = edges
            .into_iter()
            .map(|(i, j)| {
                let w = rng.gen_range(1..=5u32);
                format!(r#"{{"i": "{i}", "j": "{j}", "w": {w}.0}}"#)
            })
            .collect();

        let rho = rng.gen_range(0.2..0.9);
        let h = rng.gen_range(0.2..0.8);
        let text = format!(
            r#"{{"veg_classes": [{}], "units": [{}], "edges": [{}],
                "params": {{"T": {horizon}, "rho": {rho:.3}, "H": {h:.3}}}}}"#,
            veg.join(","),
            units.join(","),
            edges.join(",")
        );
        return parse_landscape(&text).expect("generated instance must validate");
    }
}

/// A uniformly random (not necessarily feasible) schedule.
pub fn random_schedule(rng: &mut ChaCha8Rng, landscape: &Landscape) -> Schedule {
    let mut pairs = Vec::new();
    for (id, u) in landscape.units() {
        if !u.treatable {
            continue;
        }
        for t in 1..=landscape.horizon() {
            if rng.gen_bool(0.3) {
                pairs.push((id.clone(), t));
            }
        }
    }
    Schedule::new(landscape, pairs).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Enumerates every schedule of the landscape (including infeasible ones).
/// Not every suite that shares this module uses it.
#[allow(dead_code)]
pub fn all_schedules(landscape: &Landscape) -> Vec<Schedule> {
    let treatable: Vec<&String> = landscape
        .unit_order()
        .iter()
        .filter(|id| landscape.units()[*id].treatable)
        .collect();
    let k = treatable.len() as u32 * landscape.horizon();
    assert!(k <= 16, "schedule space too large to enumerate in a test");
    let mut out = Vec::with_capacity(1 << k);
    for mask in 0u32..(1 << k) {
        let mut pairs = Vec::new();
        let mut b = 0;
        for t in 1..=landscape.horizon() {
            for id in &treatable {
                if (mask >> b) & 1 == 1 {
                    pairs.push(((*id).clone(), t));
                }
                b += 1;
            }
        }
        out.push(Schedule::new(landscape, pairs).unwrap());
    }
    out
}
