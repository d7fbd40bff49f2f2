//! Adjacency derivation and edge weighting from unit boundary rings.
//!
//! Geometry is plain planar coordinates; no CRS handling. Two units are
//! neighbours when they share at least one boundary segment, i.e. a pair of
//! consecutive ring vertices coincident within the tolerance in either
//! orientation. Touching at a single corner does not count.

use std::collections::BTreeMap;

use super::{natural_cmp, Landscape};
use crate::{Error, Result};

/// Edge weighting rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightScheme {
    /// Every edge weighs 1 (count of broken connections).
    Unit,
    /// Combined area of the two endpoint units.
    CombinedArea,
    /// Shared boundary length over the sum of the two unit perimeters.
    SharedBoundaryFraction,
}

impl std::str::FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(WeightScheme::Unit),
            "combined_area" => Ok(WeightScheme::CombinedArea),
            "shared_boundary_fraction" => Ok(WeightScheme::SharedBoundaryFraction),
            other => Err(Error::parse(format!("unknown weight scheme {other:?}"))),
        }
    }
}

type Point = [f64; 2];

fn close(a: Point, b: Point, tol: f64) -> bool {
    (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol
}

fn segments_coincide(a: (Point, Point), b: (Point, Point), tol: f64) -> bool {
    (close(a.0, b.0, tol) && close(a.1, b.1, tol))
        || (close(a.0, b.1, tol) && close(a.1, b.0, tol))
}

/// Ring segments, including the closing one when the ring is not explicitly
/// closed.
fn ring_segments(ring: &[Point]) -> Vec<(Point, Point)> {
    let mut segs: Vec<(Point, Point)> = ring.windows(2).map(|w| (w[0], w[1])).collect();
    let first = ring[0];
    let last = ring[ring.len() - 1];
    if !(first == last) {
        segs.push((last, first));
    }
    segs
}

fn bbox(ring: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in ring {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

fn bbox_overlap(a: (Point, Point), b: (Point, Point), tol: f64) -> bool {
    (0..2).all(|k| a.0[k] - tol <= b.1[k] && b.0[k] - tol <= a.1[k])
}

/// Derives the neighbourhood edge set from per-unit boundary rings: an edge
/// {i, j} is emitted when the two rings share at least one segment. Edges are
/// normalised with the smaller unit id first and returned sorted.
pub fn derive_adjacency(
    polygons: &BTreeMap<String, Vec<Point>>,
    tolerance: f64,
) -> Result<Vec<(String, String)>> {
    if tolerance < 0.0 {
        return Err(Error::validation("tolerance must be >= 0"));
    }
    for (id, ring) in polygons {
        if ring.len() < 3 {
            return Err(Error::validation(format!("unit {id}: degenerate ring (< 3 vertices)")));
        }
    }

    let mut ids: Vec<&String> = polygons.keys().collect();
    ids.sort_by(|a, b| natural_cmp(a, b));
    let rings: Vec<&Vec<Point>> = ids.iter().map(|id| &polygons[*id]).collect();
    let segs: Vec<Vec<(Point, Point)>> = rings.iter().map(|r| ring_segments(r)).collect();
    let boxes: Vec<(Point, Point)> = rings.iter().map(|r| bbox(r)).collect();

    let mut edges = Vec::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            if !bbox_overlap(boxes[i], boxes[j], tolerance) {
                continue;
            }
            let shared = segs[i]
                .iter()
                .any(|&a| segs[j].iter().any(|&b| segments_coincide(a, b, tolerance)));
            if shared {
                edges.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    Ok(edges)
}

fn perimeter(ring: &[Point]) -> f64 {
    ring_segments(ring)
        .iter()
        .map(|&(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
        .sum()
}

/// Length of the boundary shared between two rings: the total length of
/// segments of `a` that coincide with a segment of `b`.
fn shared_boundary_length(a: &[Point], b: &[Point], tol: f64) -> f64 {
    let sb = ring_segments(b);
    ring_segments(a)
        .iter()
        .filter(|&&sa| sb.iter().any(|&s| segments_coincide(sa, s, tol)))
        .map(|&(p, q)| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
        .sum()
}

const GEOM_TOL: f64 = 1e-9;

/// Computes edge weights for the landscape's adjacency under the given
/// scheme, keyed by normalised (i, j) pairs.
pub fn default_edge_weights(
    landscape: &Landscape,
    scheme: WeightScheme,
) -> Result<BTreeMap<(String, String), f64>> {
    let mut out = BTreeMap::new();
    for e in landscape.edges() {
        let w = match scheme {
            WeightScheme::Unit => 1.0,
            WeightScheme::CombinedArea => {
                landscape.units()[&e.i].area + landscape.units()[&e.j].area
            }
            WeightScheme::SharedBoundaryFraction => {
                let ri = landscape.geometry().get(&e.i).ok_or_else(|| {
                    Error::validation(format!("no geometry for unit {} (required by scheme)", e.i))
                })?;
                let rj = landscape.geometry().get(&e.j).ok_or_else(|| {
                    Error::validation(format!("no geometry for unit {} (required by scheme)", e.j))
                })?;
                shared_boundary_length(ri, rj, GEOM_TOL) / (perimeter(ri) + perimeter(rj))
            }
        };
        out.insert((e.i.clone(), e.j.clone()), w);
    }
    Ok(out)
}
