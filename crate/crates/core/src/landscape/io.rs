//! Instance file ingestion and emission.
//!
//! The primary format is a single JSON document:
//!
//! ```json
//! {
//!   "veg_classes": [{"code": "1", "name": "EVC 1", "min_tfi": 3, "max_tfi": 10, "risk_threshold": 5}],
//!   "units": [{
//!     "id": "1", "treatable": true,
//!     "patches": [{"id": "1_1", "veg": "1", "area": 10.0, "initial_age": 6}]
//!   }],
//!   "edges": [{"i": "1", "j": "2", "w": 1.0}],
//!   "params": {"T": 5, "rho": 0.15, "H": 0.5},
//!   "geometry": {"1": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]}
//! }
//! ```
//!
//! Areas are hectares, ages and TFIs whole years. `units[].area`, `edges[].w`,
//! `name` and `geometry` are optional; unit area defaults to the patch sum and
//! edge weights to 1. A CSV triplet (veg.csv, patches.csv, edges.csv) is
//! accepted as an alternative for spreadsheet-authored data.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EdgeDef, Landscape, Params, Patch, UnitDef, VegClass};
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    veg_classes: Vec<VegRow>,
    units: Vec<UnitRow>,
    #[serde(default)]
    edges: Vec<EdgeRow>,
    params: ParamsRow,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    geometry: BTreeMap<String, Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct VegRow {
    code: String,
    #[serde(default)]
    name: String,
    min_tfi: u32,
    max_tfi: u32,
    risk_threshold: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct UnitRow {
    id: String,
    #[serde(default = "default_true")]
    treatable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    area: Option<f64>,
    patches: Vec<PatchRow>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
struct PatchRow {
    id: String,
    veg: String,
    area: f64,
    initial_age: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    i: String,
    j: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamsRow {
    #[serde(rename = "T")]
    horizon: u32,
    rho: f64,
    #[serde(rename = "H")]
    h: f64,
}

fn assemble(file: InstanceFile) -> Result<Landscape> {
    let veg = file
        .veg_classes
        .into_iter()
        .map(|v| VegClass {
            name: if v.name.is_empty() { format!("EVC {}", v.code) } else { v.name },
            code: v.code,
            min_tfi: v.min_tfi,
            max_tfi: v.max_tfi,
            risk_threshold: v.risk_threshold,
        })
        .collect();

    let mut units = Vec::new();
    let mut patches = Vec::new();
    for u in file.units {
        units.push(UnitDef { id: u.id.clone(), treatable: u.treatable, area_override: u.area });
        for p in u.patches {
            patches.push(Patch {
                id: p.id,
                unit_id: u.id.clone(),
                veg: p.veg,
                area: p.area,
                initial_age: p.initial_age,
            });
        }
    }

    let edges = file
        .edges
        .into_iter()
        .map(|e| EdgeDef { i: e.i, j: e.j, weight: e.w })
        .collect();

    Landscape::new(
        veg,
        units,
        patches,
        edges,
        Params { horizon: file.params.horizon, rho: file.params.rho, h: file.params.h },
        file.geometry,
    )
}

/// Loads and validates a JSON instance file.
pub fn load_landscape(path: impl AsRef<Path>) -> Result<Landscape> {
    let text = fs::read_to_string(path.as_ref())?;
    parse_landscape(&text)
}

/// Parses a JSON instance from a string.
pub fn parse_landscape(text: &str) -> Result<Landscape> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
    assemble(file)
}

/// Writes a landscape back out as a JSON instance. Loading the result yields
/// a structurally equal landscape.
pub fn save_landscape(landscape: &Landscape, path: impl AsRef<Path>) -> Result<()> {
    let text = landscape_to_json(landscape)?;
    fs::write(path.as_ref(), text)?;
    Ok(())
}

pub fn landscape_to_json(landscape: &Landscape) -> Result<String> {
    let file = InstanceFile {
        veg_classes: landscape
            .veg_classes()
            .values()
            .map(|v| VegRow {
                code: v.code.clone(),
                name: v.name.clone(),
                min_tfi: v.min_tfi,
                max_tfi: v.max_tfi,
                risk_threshold: v.risk_threshold,
            })
            .collect(),
        units: landscape
            .unit_order()
            .iter()
            .map(|uid| {
                let u = &landscape.units()[uid];
                UnitRow {
                    id: u.id.clone(),
                    treatable: u.treatable,
                    area: Some(u.area),
                    patches: u
                        .patches
                        .iter()
                        .map(|pid| {
                            let p = &landscape.patches()[pid];
                            PatchRow {
                                id: p.id.clone(),
                                veg: p.veg.clone(),
                                area: p.area,
                                initial_age: p.initial_age,
                            }
                        })
                        .collect(),
                }
            })
            .collect(),
        edges: landscape
            .edges()
            .iter()
            .map(|e| EdgeRow { i: e.i.clone(), j: e.j.clone(), w: Some(e.weight) })
            .collect(),
        params: ParamsRow {
            horizon: landscape.horizon(),
            rho: landscape.rho(),
            h: landscape.h(),
        },
        geometry: landscape.geometry().clone(),
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::parse(e.to_string()))
}

/// Loads an instance from the CSV triplet `veg.csv`, `patches.csv`,
/// `edges.csv` in `dir`. `edges.csv` may be absent (no adjacency).
///
/// Columns:
/// - veg.csv: `code,name,min_tfi,max_tfi,risk_threshold`
/// - patches.csv: `unit_id,patch_id,veg,area,initial_age,treatable`
///   (`treatable` must agree across the rows of a unit)
/// - edges.csv: `i,j[,w]`
pub fn load_csv_triplet(dir: impl AsRef<Path>, params: Params) -> Result<Landscape> {
    let dir = dir.as_ref();

    let mut veg = Vec::new();
    let mut rdr = csv::Reader::from_path(dir.join("veg.csv"))?;
    for rec in rdr.deserialize() {
        let row: VegCsvRow = rec.map_err(|e| Error::parse(format!("veg.csv: {e}")))?;
        veg.push(VegClass {
            code: row.code,
            name: row.name,
            min_tfi: row.min_tfi,
            max_tfi: row.max_tfi,
            risk_threshold: row.risk_threshold,
        });
    }

    let mut units: Vec<UnitDef> = Vec::new();
    let mut seen: BTreeMap<String, bool> = BTreeMap::new();
    let mut patches = Vec::new();
    let mut rdr = csv::Reader::from_path(dir.join("patches.csv"))?;
    for rec in rdr.deserialize() {
        let row: PatchCsvRow = rec.map_err(|e| Error::parse(format!("patches.csv: {e}")))?;
        match seen.get(&row.unit_id) {
            Some(&t) if t != row.treatable => {
                return Err(Error::validation(format!(
                    "patches.csv: unit {} has conflicting treatable flags",
                    row.unit_id
                )))
            }
            Some(_) => {}
            None => {
                seen.insert(row.unit_id.clone(), row.treatable);
                units.push(UnitDef {
                    id: row.unit_id.clone(),
                    treatable: row.treatable,
                    area_override: None,
                });
            }
        }
        patches.push(Patch {
            id: row.patch_id,
            unit_id: row.unit_id,
            veg: row.veg,
            area: row.area,
            initial_age: row.initial_age,
        });
    }

    let mut edges = Vec::new();
    let edges_path = dir.join("edges.csv");
    if edges_path.exists() {
        let mut rdr = csv::Reader::from_path(&edges_path)?;
        for rec in rdr.deserialize() {
            let row: EdgeCsvRow = rec.map_err(|e| Error::parse(format!("edges.csv: {e}")))?;
            edges.push(EdgeDef { i: row.i, j: row.j, weight: row.w });
        }
    }

    Landscape::new(veg, units, patches, edges, params, BTreeMap::new())
}

#[derive(Debug, Deserialize)]
struct VegCsvRow {
    code: String,
    name: String,
    min_tfi: u32,
    max_tfi: u32,
    risk_threshold: u32,
}

#[derive(Debug, Deserialize)]
struct PatchCsvRow {
    unit_id: String,
    patch_id: String,
    veg: String,
    area: f64,
    initial_age: u32,
    treatable: bool,
}

#[derive(Debug, Deserialize)]
struct EdgeCsvRow {
    i: String,
    j: String,
    #[serde(default)]
    w: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_instance_parses() {
        let text = r#"{
            "veg_classes": [{"code": "1", "min_tfi": 3, "max_tfi": 10, "risk_threshold": 5}],
            "units": [{"id": "u1", "patches": [{"id": "p1", "veg": "1", "area": 7.0, "initial_age": 2}]}],
            "params": {"T": 5, "rho": 0.15, "H": 0.5}
        }"#;
        let ls = parse_landscape(text).unwrap();
        assert!(ls.edges().is_empty());
        assert_eq!(ls.treatable_area(), 7.0);
        assert!(ls.units()["u1"].treatable);
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        let err = parse_landscape("{ not json").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn json_round_trip_is_structurally_equal() {
        let text = r#"{
            "veg_classes": [{"code": "1", "name": "EVC 1", "min_tfi": 3, "max_tfi": 10, "risk_threshold": 5}],
            "units": [
                {"id": "a", "treatable": true, "patches": [{"id": "pa", "veg": "1", "area": 3.0, "initial_age": 6}]},
                {"id": "b", "treatable": false, "patches": [{"id": "pb", "veg": "1", "area": 4.5, "initial_age": 1}]}
            ],
            "edges": [{"i": "b", "j": "a", "w": 2.0}],
            "params": {"T": 3, "rho": 0.5, "H": 0.5},
            "geometry": {"a": [[0,0],[1,0],[1,1]], "b": [[1,0],[2,0],[2,1]]}
        }"#;
        let ls = parse_landscape(text).unwrap();
        let again = parse_landscape(&landscape_to_json(&ls).unwrap()).unwrap();
        assert_eq!(ls, again);
    }
}
