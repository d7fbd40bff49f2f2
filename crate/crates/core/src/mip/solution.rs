//! Ingestion of externally solved variable values.
//!
//! Two dialects: a generic `name,value` CSV, and the XML solution files
//! written by common LP/MIP solvers (`<variable name="..." value="..."/>`).
//! Values for variables the file omits default to 0 with a warning, so
//! solvers that drop zero binaries still yield a complete assignment.

use std::collections::BTreeMap;
use std::path::Path;

use regex::Regex;

use super::MipModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionDialect {
    GenericCsv,
    LpSolXml,
}

impl std::str::FromStr for SolutionDialect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic_csv" => Ok(SolutionDialect::GenericCsv),
            "lp_sol_xml" => Ok(SolutionDialect::LpSolXml),
            other => Err(Error::parse(format!("unknown solution dialect {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolutionRead {
    /// Complete assignment over all model variables.
    pub assignment: BTreeMap<String, f64>,
    /// One entry per variable the file did not mention (defaulted to 0).
    pub warnings: Vec<String>,
}

fn parse_generic_csv(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let name = parts
            .next()
            .ok_or_else(|| Error::parse(format!("line {}: empty record", lineno + 1)))?;
        let value = parts
            .next()
            .ok_or_else(|| Error::parse(format!("line {}: missing value", lineno + 1)))?;
        if parts.next().is_some() {
            return Err(Error::parse(format!("line {}: too many fields", lineno + 1)));
        }
        if lineno == 0 && name.eq_ignore_ascii_case("name") && value.eq_ignore_ascii_case("value") {
            continue;
        }
        let value: f64 = value
            .parse()
            .map_err(|_| Error::parse(format!("line {}: bad value {value:?}", lineno + 1)))?;
        out.push((name.to_string(), value));
    }
    Ok(out)
}

fn parse_lp_sol_xml(text: &str) -> Result<Vec<(String, f64)>> {
    let var = Regex::new(r#"<variable\b[^>]*?\bname="([^"]+)"[^>]*?\bvalue="([^"]+)""#).unwrap();
    let mut out = Vec::new();
    for cap in var.captures_iter(text) {
        let name = cap[1].to_string();
        let value: f64 = cap[2]
            .parse()
            .map_err(|_| Error::parse(format!("bad value {:?} for variable {name}", &cap[2])))?;
        out.push((name, value));
    }
    if out.is_empty() && !text.contains("<variable") {
        return Err(Error::parse("no <variable> elements found in solution XML"));
    }
    Ok(out)
}

/// Parses solver output text into a complete assignment for `model`.
pub fn parse_solution(
    model: &MipModel,
    text: &str,
    dialect: SolutionDialect,
) -> Result<SolutionRead> {
    let pairs = match dialect {
        SolutionDialect::GenericCsv => parse_generic_csv(text)?,
        SolutionDialect::LpSolXml => parse_lp_sol_xml(text)?,
    };
    let mut assignment: BTreeMap<String, f64> = BTreeMap::new();
    for (name, value) in pairs {
        if model.var_index(&name).is_none() {
            return Err(Error::model(format!("solution has undeclared variable {name}")));
        }
        assignment.insert(name, value);
    }
    let mut warnings = Vec::new();
    for v in model.variables() {
        if !assignment.contains_key(&v.name) {
            warnings.push(format!("variable {} missing from solution, defaulting to 0", v.name));
            assignment.insert(v.name.clone(), 0.0);
        }
    }
    Ok(SolutionRead { assignment, warnings })
}

/// Reads and parses a solution file for `model`.
pub fn read_solution(
    model: &MipModel,
    path: &Path,
    dialect: SolutionDialect,
) -> Result<SolutionRead> {
    let text = std::fs::read_to_string(path)?;
    parse_solution(model, &text, dialect)
}
