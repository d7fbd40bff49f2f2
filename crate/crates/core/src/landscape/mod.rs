//! The immutable problem instance: vegetation classes, patches, treatment
//! units, the weighted adjacency graph and global parameters.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::{Error, Result};

mod geometry;
mod io;

pub use geometry::{default_edge_weights, derive_adjacency, WeightScheme};
pub use io::{landscape_to_json, load_csv_triplet, load_landscape, parse_landscape, save_landscape};

/// Per-vegetation ecological parameters. `min_tfi`/`max_tfi` bound the ages
/// at which treatment is permitted/required; `risk_threshold` is the age at
/// which a patch of this vegetation counts as high-risk.
#[derive(Debug, Clone, PartialEq)]
pub struct VegClass {
    pub code: String,
    pub name: String,
    pub min_tfi: u32,
    pub max_tfi: u32,
    pub risk_threshold: u32,
}

/// One vegetation type of uniform age within a treatment unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub id: String,
    pub unit_id: String,
    pub veg: String,
    pub area: f64,
    pub initial_age: u32,
}

/// A polygonal land parcel, the atomic object of a treatment decision.
#[derive(Debug, Clone, PartialEq)]
pub struct TreatmentUnit {
    pub id: String,
    pub patches: Vec<String>,
    pub treatable: bool,
    /// The budget area of the unit. Defaults to the sum of member patch
    /// areas; an explicit override from the input file is honoured as-is.
    pub area: f64,
}

/// Undirected adjacency edge, stored once with `i` before `j` under the
/// natural unit-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub i: String,
    pub j: String,
    pub weight: f64,
}

/// Unit declaration used when assembling a landscape programmatically.
#[derive(Debug, Clone)]
pub struct UnitDef {
    pub id: String,
    pub treatable: bool,
    pub area_override: Option<f64>,
}

/// Edge declaration; weight defaults to 1 when absent.
#[derive(Debug, Clone)]
pub struct EdgeDef {
    pub i: String,
    pub j: String,
    pub weight: Option<f64>,
}

/// Global planning parameters: horizon T in years, the per-year treatment
/// level rho as a fraction of the treatable area, and the high-risk area
/// proportion threshold H.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub horizon: u32,
    pub rho: f64,
    pub h: f64,
}

/// A validated, immutable problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    veg_classes: BTreeMap<String, VegClass>,
    units: BTreeMap<String, TreatmentUnit>,
    patches: BTreeMap<String, Patch>,
    edges: Vec<Edge>,
    geometry: BTreeMap<String, Vec<[f64; 2]>>,
    params: Params,
    treatable_area: f64,
    unit_order: Vec<String>,
}

/// Numeric-aware total order on identifiers: runs of digits compare as
/// integers, everything else byte-wise, so "u2" < "u10".
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (a, b) = (a.as_bytes(), b.as_bytes());
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        if a[i].is_ascii_digit() && b[j].is_ascii_digit() {
            let si = i;
            while i < a.len() && a[i].is_ascii_digit() {
                i += 1;
            }
            let sj = j;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            let da = &a[si..i];
            let db = &b[sj..j];
            let ta = da.iter().position(|&c| c != b'0').map_or(&b""[..], |k| &da[k..]);
            let tb = db.iter().position(|&c| c != b'0').map_or(&b""[..], |k| &db[k..]);
            let ord = ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb));
            if ord != Ordering::Equal {
                return ord;
            }
            // equal value, fewer leading zeros first
            let ord = da.len().cmp(&db.len());
            if ord != Ordering::Equal {
                return ord;
            }
        } else {
            let ord = a[i].cmp(&b[j]);
            if ord != Ordering::Equal {
                return ord;
            }
            i += 1;
            j += 1;
        }
    }
    (a.len() - i).cmp(&(b.len() - j))
}

impl Landscape {
    /// Assembles and validates a landscape. Reports the first violated
    /// invariant by name.
    pub fn new(
        veg_classes: Vec<VegClass>,
        units: Vec<UnitDef>,
        patches: Vec<Patch>,
        edges: Vec<EdgeDef>,
        params: Params,
        geometry: BTreeMap<String, Vec<[f64; 2]>>,
    ) -> Result<Landscape> {
        if params.horizon < 1 {
            return Err(Error::validation("horizon T must be >= 1"));
        }
        if !(params.rho > 0.0 && params.rho <= 1.0) {
            return Err(Error::validation(format!("rho must be in (0,1], got {}", params.rho)));
        }
        if !(params.h >= 0.0 && params.h < 1.0) {
            return Err(Error::validation(format!("H must be in [0,1), got {}", params.h)));
        }

        let mut veg_map = BTreeMap::new();
        for v in veg_classes {
            if v.min_tfi < 1 {
                return Err(Error::validation(format!("veg {}: min_tfi must be >= 1", v.code)));
            }
            if v.min_tfi > v.max_tfi {
                return Err(Error::validation(format!(
                    "veg {}: min_tfi {} > max_tfi {}",
                    v.code, v.min_tfi, v.max_tfi
                )));
            }
            if v.risk_threshold < v.min_tfi || v.risk_threshold > v.max_tfi {
                return Err(Error::validation(format!(
                    "veg {}: risk_threshold {} outside [{}, {}]",
                    v.code, v.risk_threshold, v.min_tfi, v.max_tfi
                )));
            }
            if veg_map.insert(v.code.clone(), v).is_some() {
                return Err(Error::validation("duplicate vegetation class code"));
            }
        }

        let mut unit_map: BTreeMap<String, TreatmentUnit> = BTreeMap::new();
        for u in &units {
            let unit = TreatmentUnit {
                id: u.id.clone(),
                patches: Vec::new(),
                treatable: u.treatable,
                area: 0.0,
            };
            if unit_map.insert(u.id.clone(), unit).is_some() {
                return Err(Error::validation(format!("duplicate unit id {}", u.id)));
            }
        }

        let mut patch_map: BTreeMap<String, Patch> = BTreeMap::new();
        for p in patches {
            if p.area <= 0.0 {
                return Err(Error::validation(format!("patch {}: area must be > 0", p.id)));
            }
            if !veg_map.contains_key(&p.veg) {
                return Err(Error::validation(format!(
                    "patch {}: unknown vegetation class {}",
                    p.id, p.veg
                )));
            }
            match unit_map.get_mut(&p.unit_id) {
                Some(u) => u.patches.push(p.id.clone()),
                None => {
                    return Err(Error::validation(format!(
                        "patch {}: dangling unit_id {}",
                        p.id, p.unit_id
                    )))
                }
            }
            let id = p.id.clone();
            if patch_map.insert(id.clone(), p).is_some() {
                return Err(Error::validation(format!("duplicate patch id {id}")));
            }
        }

        for u in unit_map.values_mut() {
            u.patches.sort_by(|a, b| natural_cmp(a, b));
            if u.patches.is_empty() {
                return Err(Error::validation(format!("unit {}: no patches", u.id)));
            }
            let sum: f64 = u.patches.iter().map(|p| patch_map[p].area).sum();
            u.area = sum;
        }
        for def in &units {
            if let Some(a) = def.area_override {
                if a <= 0.0 {
                    return Err(Error::validation(format!("unit {}: area must be > 0", def.id)));
                }
                unit_map.get_mut(&def.id).expect("declared above").area = a;
            }
        }

        let mut unit_order: Vec<String> = unit_map.keys().cloned().collect();
        unit_order.sort_by(|a, b| natural_cmp(a, b));
        let rank: BTreeMap<&str, usize> =
            unit_order.iter().enumerate().map(|(k, id)| (id.as_str(), k)).collect();

        let mut edge_list = Vec::with_capacity(edges.len());
        let mut seen = BTreeSet::new();
        for e in edges {
            let (ri, rj) = match (rank.get(e.i.as_str()), rank.get(e.j.as_str())) {
                (Some(&ri), Some(&rj)) => (ri, rj),
                _ => {
                    return Err(Error::validation(format!(
                        "edge ({}, {}): endpoint is not a declared unit",
                        e.i, e.j
                    )))
                }
            };
            if ri == rj {
                return Err(Error::validation(format!("edge ({}, {}): self-loop", e.i, e.j)));
            }
            let w = e.weight.unwrap_or(1.0);
            if !(w >= 0.0) {
                return Err(Error::validation(format!(
                    "edge ({}, {}): weight must be >= 0",
                    e.i, e.j
                )));
            }
            let (i, j) = if ri < rj { (e.i, e.j) } else { (e.j, e.i) };
            if !seen.insert((i.clone(), j.clone())) {
                return Err(Error::validation(format!("duplicate edge ({i}, {j})")));
            }
            edge_list.push(Edge { i, j, weight: w });
        }
        edge_list.sort_by(|a, b| natural_cmp(&a.i, &b.i).then_with(|| natural_cmp(&a.j, &b.j)));

        for (uid, ring) in &geometry {
            if !unit_map.contains_key(uid) {
                return Err(Error::validation(format!("geometry for undeclared unit {uid}")));
            }
            if ring.len() < 3 {
                return Err(Error::validation(format!("unit {uid}: degenerate ring (< 3 vertices)")));
            }
        }

        let treatable_area: f64 =
            unit_map.values().filter(|u| u.treatable).map(|u| u.area).sum();

        Ok(Landscape {
            veg_classes: veg_map,
            units: unit_map,
            patches: patch_map,
            edges: edge_list,
            geometry,
            params,
            treatable_area,
            unit_order,
        })
    }

    pub fn veg_classes(&self) -> &BTreeMap<String, VegClass> {
        &self.veg_classes
    }

    pub fn units(&self) -> &BTreeMap<String, TreatmentUnit> {
        &self.units
    }

    pub fn patches(&self) -> &BTreeMap<String, Patch> {
        &self.patches
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn geometry(&self) -> &BTreeMap<String, Vec<[f64; 2]>> {
        &self.geometry
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn horizon(&self) -> u32 {
        self.params.horizon
    }

    pub fn rho(&self) -> f64 {
        self.params.rho
    }

    pub fn h(&self) -> f64 {
        self.params.h
    }

    /// Total area of the treatable units (the parameter R).
    pub fn treatable_area(&self) -> f64 {
        self.treatable_area
    }

    /// Unit ids in natural order; edge normalisation and all deterministic
    /// tie-breaking follow this order.
    pub fn unit_order(&self) -> &[String] {
        &self.unit_order
    }

    pub fn veg_of(&self, patch_id: &str) -> &VegClass {
        &self.veg_classes[&self.patches[patch_id].veg]
    }

    /// Copy with a different treatment level.
    pub fn with_rho(&self, rho: f64) -> Result<Landscape> {
        self.rebuild(Params { rho, ..self.params }, None, None)
    }

    /// Copy with a different horizon.
    pub fn with_horizon(&self, horizon: u32) -> Result<Landscape> {
        self.rebuild(Params { horizon, ..self.params }, None, None)
    }

    /// Copy with a different high-risk area share threshold.
    pub fn with_h(&self, h: f64) -> Result<Landscape> {
        self.rebuild(Params { h, ..self.params }, None, None)
    }

    /// Copy whose initial ages are replaced by `ages` (patch id -> years).
    /// Patches not named keep their current age.
    pub fn with_initial_ages(&self, ages: &BTreeMap<String, u32>) -> Result<Landscape> {
        for id in ages.keys() {
            if !self.patches.contains_key(id) {
                return Err(Error::validation(format!("age override for unknown patch {id}")));
            }
        }
        self.rebuild(self.params, Some(ages), None)
    }

    /// Copy with edge weights replaced from the map keyed by normalised
    /// (i, j) pairs; every edge must be covered.
    pub fn with_edge_weights(&self, weights: &BTreeMap<(String, String), f64>) -> Result<Landscape> {
        self.rebuild(self.params, None, Some(weights))
    }

    fn rebuild(
        &self,
        params: Params,
        ages: Option<&BTreeMap<String, u32>>,
        weights: Option<&BTreeMap<(String, String), f64>>,
    ) -> Result<Landscape> {
        let patches = self
            .patches
            .values()
            .map(|p| {
                let mut p = p.clone();
                if let Some(m) = ages {
                    if let Some(&a) = m.get(&p.id) {
                        p.initial_age = a;
                    }
                }
                p
            })
            .collect();
        let units = self
            .units
            .values()
            .map(|u| UnitDef {
                id: u.id.clone(),
                treatable: u.treatable,
                area_override: Some(u.area),
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let w = match weights {
                    Some(m) => match m.get(&(e.i.clone(), e.j.clone())) {
                        Some(&w) => w,
                        None => {
                            return Err(Error::validation(format!(
                                "no weight supplied for edge ({}, {})",
                                e.i, e.j
                            )))
                        }
                    },
                    None => e.weight,
                };
                Ok(EdgeDef { i: e.i.clone(), j: e.j.clone(), weight: Some(w) })
            })
            .collect::<Result<Vec<_>>>()?;
        Landscape::new(
            self.veg_classes.values().cloned().collect(),
            units,
            patches,
            edges,
            params,
            self.geometry.clone(),
        )
    }

    /// Flattens the instance into index-based arrays for the evaluators.
    pub(crate) fn compile(&self) -> Compiled {
        let unit_ids = self.unit_order.clone();
        let n = unit_ids.len();
        let mut treatable = Vec::with_capacity(n);
        let mut area_c = Vec::with_capacity(n);
        let mut patch_range = Vec::with_capacity(n);
        let mut patch_area_sum = Vec::with_capacity(n);

        let mut patch_ids = Vec::new();
        let mut unit_of_patch = Vec::new();
        let mut area = Vec::new();
        let mut init_age = Vec::new();
        let mut d = Vec::new();
        let mut min_tfi = Vec::new();
        let mut max_tfi = Vec::new();

        for (ui, uid) in unit_ids.iter().enumerate() {
            let u = &self.units[uid];
            let start = patch_ids.len();
            let mut sum = 0.0;
            for pid in &u.patches {
                let p = &self.patches[pid];
                let v = &self.veg_classes[&p.veg];
                patch_ids.push(pid.clone());
                unit_of_patch.push(ui);
                area.push(p.area);
                init_age.push(p.initial_age);
                d.push(v.risk_threshold);
                min_tfi.push(v.min_tfi);
                max_tfi.push(v.max_tfi);
                sum += p.area;
            }
            treatable.push(u.treatable);
            area_c.push(u.area);
            patch_range.push((start, patch_ids.len()));
            patch_area_sum.push(sum);
        }

        let rank: BTreeMap<&str, usize> =
            unit_ids.iter().enumerate().map(|(k, id)| (id.as_str(), k)).collect();
        let edges = self
            .edges
            .iter()
            .map(|e| (rank[e.i.as_str()], rank[e.j.as_str()], e.weight))
            .collect();
        let lambda = (0..n).filter(|&u| treatable[u]).collect();

        Compiled {
            unit_ids,
            patch_ids,
            treatable,
            lambda,
            area_c,
            patch_range,
            patch_area_sum,
            unit_of_patch,
            area,
            init_age,
            d,
            min_tfi,
            max_tfi,
            edges,
            horizon: self.params.horizon,
            rho: self.params.rho,
            h: self.params.h,
            treatable_area: self.treatable_area,
        }
    }
}

/// Index-based view of a landscape. Units are ordered naturally by id and
/// patches grouped contiguously by unit; all evaluators work on this form.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub unit_ids: Vec<String>,
    pub patch_ids: Vec<String>,
    #[allow(dead_code)]
    pub treatable: Vec<bool>,
    /// Treatable unit indices in natural order.
    pub lambda: Vec<usize>,
    pub area_c: Vec<f64>,
    pub patch_range: Vec<(usize, usize)>,
    pub patch_area_sum: Vec<f64>,
    pub unit_of_patch: Vec<usize>,
    pub area: Vec<f64>,
    pub init_age: Vec<u32>,
    pub d: Vec<u32>,
    pub min_tfi: Vec<u32>,
    pub max_tfi: Vec<u32>,
    pub edges: Vec<(usize, usize, f64)>,
    #[allow(dead_code)]
    pub horizon: u32,
    pub rho: f64,
    pub h: f64,
    pub treatable_area: f64,
}

impl Compiled {
    pub fn n_units(&self) -> usize {
        self.unit_ids.len()
    }

    pub fn n_patches(&self) -> usize {
        self.patch_ids.len()
    }

    /// Yearly budget cap rho * R, with a small slack so that schedules that
    /// exactly meet the budget are not rejected by rounding.
    pub fn budget_cap(&self) -> f64 {
        self.rho * self.treatable_area
    }

    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.unit_ids.iter().position(|u| u == id)
    }
}
