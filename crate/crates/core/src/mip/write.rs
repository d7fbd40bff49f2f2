//! Deterministic LP and MPS text emission.
//!
//! Output is plain-text and stable across runs: variables and rows are
//! written in declaration order and numbers use Rust's shortest round-trip
//! `f64` formatting. The LP dialect emitted here is the same subset accepted
//! by [`super::parse_lp`].

use std::fmt::Write as _;
use std::path::Path;

use super::{MipModel, ObjSense, RowSense, VarKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    Lp,
    Mps,
}

impl std::str::FromStr for ModelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" => Ok(ModelFormat::Lp),
            "mps" => Ok(ModelFormat::Mps),
            other => Err(Error::parse(format!("unknown model format {other:?}"))),
        }
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !name.chars().next().unwrap().is_ascii_digit()
}

fn check_names(model: &MipModel) -> Result<()> {
    for v in model.variables() {
        if !valid_name(&v.name) {
            return Err(Error::model(format!("variable name {:?} is not emittable", v.name)));
        }
    }
    for r in model.constraints() {
        if !valid_name(&r.name) {
            return Err(Error::model(format!("row name {:?} is not emittable", r.name)));
        }
    }
    Ok(())
}

fn fmt_terms(model: &MipModel, terms: &[(usize, f64)]) -> String {
    let mut s = String::new();
    for (k, &(v, c)) in terms.iter().enumerate() {
        let name = &model.variables()[v].name;
        if k == 0 {
            if c < 0.0 {
                let _ = write!(s, "-{} {}", -c, name);
            } else {
                let _ = write!(s, "{c} {name}");
            }
        } else if c < 0.0 {
            let _ = write!(s, " - {} {}", -c, name);
        } else {
            let _ = write!(s, " + {c} {name}");
        }
    }
    if terms.is_empty() {
        s.push('0');
    }
    s
}

/// Renders the model in CPLEX-style LP text.
pub fn to_lp_string(model: &MipModel) -> Result<String> {
    check_names(model)?;
    let mut out = String::new();
    let _ = writeln!(out, "\\ model {}", model.name);
    let _ = writeln!(
        out,
        "{}",
        match model.objective_sense() {
            ObjSense::Minimize => "Minimize",
            ObjSense::Maximize => "Maximize",
        }
    );
    let _ = writeln!(out, " obj: {}", fmt_terms(model, model.objective_terms()));
    let _ = writeln!(out, "Subject To");
    for r in model.constraints() {
        let sense = match r.sense {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        };
        let _ = writeln!(out, " {}: {} {} {}", r.name, fmt_terms(model, &r.terms), sense, r.rhs);
    }
    let _ = writeln!(out, "Bounds");
    for v in model.variables() {
        if v.kind == VarKind::Binary {
            continue;
        }
        match (v.lb, v.ub) {
            (lb, ub) if lb == f64::NEG_INFINITY && ub == f64::INFINITY => {
                let _ = writeln!(out, " {} free", v.name);
            }
            (lb, ub) if ub == f64::INFINITY => {
                let _ = writeln!(out, " {} >= {lb}", v.name);
            }
            (lb, ub) => {
                let _ = writeln!(out, " {lb} <= {} <= {ub}", v.name);
            }
        }
    }
    let binaries: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        let _ = writeln!(out, "Binaries");
        for name in binaries {
            let _ = writeln!(out, " {name}");
        }
    }
    let _ = writeln!(out, "End");
    Ok(out)
}

/// Renders the model in (free-layout) MPS text. Binary columns are wrapped
/// in INTORG/INTEND markers and given BV bounds; a maximising objective is
/// declared via OBJSENSE.
pub fn to_mps_string(model: &MipModel) -> Result<String> {
    check_names(model)?;
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", model.name);
    if model.objective_sense() == ObjSense::Maximize {
        let _ = writeln!(out, "OBJSENSE");
        let _ = writeln!(out, "    MAX");
    }
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N  OBJ");
    for r in model.constraints() {
        let tag = match r.sense {
            RowSense::Le => 'L',
            RowSense::Ge => 'G',
            RowSense::Eq => 'E',
        };
        let _ = writeln!(out, " {tag}  {}", r.name);
    }

    // per-column entries: objective first so every column appears
    let n = model.variables().len();
    let mut entries: Vec<Vec<(String, f64)>> = vec![Vec::new(); n];
    for (i, _) in model.variables().iter().enumerate() {
        entries[i].push(("OBJ".to_string(), 0.0));
    }
    for &(v, c) in model.objective_terms() {
        entries[v][0].1 += c;
    }
    for r in model.constraints() {
        for &(v, c) in &r.terms {
            entries[v].push((r.name.clone(), c));
        }
    }

    let _ = writeln!(out, "COLUMNS");
    let mut in_int = false;
    for (i, v) in model.variables().iter().enumerate() {
        let want_int = v.kind == VarKind::Binary;
        if want_int && !in_int {
            let _ = writeln!(out, "    MARKER                 'MARKER'                 'INTORG'");
            in_int = true;
        } else if !want_int && in_int {
            let _ = writeln!(out, "    MARKER                 'MARKER'                 'INTEND'");
            in_int = false;
        }
        for pair in entries[i].chunks(2) {
            let mut line = format!("    {}  ", v.name);
            for (row, c) in pair {
                let _ = write!(line, "{row}  {c}  ");
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
    }
    if in_int {
        let _ = writeln!(out, "    MARKER                 'MARKER'                 'INTEND'");
    }

    let _ = writeln!(out, "RHS");
    for r in model.constraints() {
        if r.rhs != 0.0 {
            let _ = writeln!(out, "    RHS  {}  {}", r.name, r.rhs);
        }
    }

    let _ = writeln!(out, "BOUNDS");
    for v in model.variables() {
        if v.kind == VarKind::Binary {
            let _ = writeln!(out, " BV BND  {}", v.name);
        } else if v.lb == f64::NEG_INFINITY && v.ub == f64::INFINITY {
            let _ = writeln!(out, " FR BND  {}", v.name);
        } else {
            if v.lb != 0.0 {
                let _ = writeln!(out, " LO BND  {}  {}", v.name, v.lb);
            }
            if v.ub != f64::INFINITY {
                let _ = writeln!(out, " UP BND  {}  {}", v.name, v.ub);
            }
        }
    }
    let _ = writeln!(out, "ENDATA");
    Ok(out)
}

/// Writes the model to `path` in the chosen format.
pub fn write_model(model: &MipModel, format: ModelFormat, path: &Path) -> Result<()> {
    let text = match format {
        ModelFormat::Lp => to_lp_string(model)?,
        ModelFormat::Mps => to_mps_string(model)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}
