//! Parser for the LP text emitted by [`super::to_lp_string`].
//!
//! Accepts the usual CPLEX-LP surface for that subset: `\` comments,
//! case-insensitive section headers, optional coefficients, `<=`/`>=`/`=`
//! senses, a Bounds section and a Binaries section. Quadratic terms, ranges,
//! semi-continuous variables and general integers are not supported.

use std::collections::BTreeMap;

use super::{MipModel, ObjSense, RowSense};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Objective,
    Rows,
    Bounds,
    Binaries,
    Done,
}

#[derive(Debug)]
struct RawRow {
    name: String,
    terms: Vec<(String, f64)>,
    sense: RowSense,
    rhs: f64,
}

fn is_sense(tok: &str) -> Option<RowSense> {
    match tok {
        "<=" | "=<" | "<" => Some(RowSense::Le),
        ">=" | "=>" | ">" => Some(RowSense::Ge),
        "=" => Some(RowSense::Eq),
        _ => None,
    }
}

/// Parses a linear expression from tokens, consuming up to (not including)
/// the first sense token or the end.
fn parse_expr(tokens: &[String], pos: &mut usize) -> Result<Vec<(String, f64)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut pending_coef: Option<f64> = None;
    while *pos < tokens.len() {
        let tok = &tokens[*pos];
        if is_sense(tok).is_some() {
            break;
        }
        *pos += 1;
        match tok.as_str() {
            "+" => {
                if pending_coef.is_some() {
                    return Err(Error::parse("dangling coefficient before '+'"));
                }
                sign = 1.0;
            }
            "-" => {
                if pending_coef.is_some() {
                    return Err(Error::parse("dangling coefficient before '-'"));
                }
                sign = -1.0;
            }
            _ => {
                if let Ok(v) = tok.parse::<f64>() {
                    if pending_coef.is_some() {
                        return Err(Error::parse(format!("unexpected number {tok}")));
                    }
                    pending_coef = Some(sign * v);
                    sign = 1.0;
                } else {
                    let coef = pending_coef.take().unwrap_or(sign);
                    sign = 1.0;
                    terms.push((tok.clone(), coef));
                }
            }
        }
    }
    if pending_coef.is_some() {
        return Err(Error::parse("expression ends with a dangling coefficient"));
    }
    Ok(terms)
}

fn section_of(line: &str) -> Option<(Section, Option<ObjSense>)> {
    match line.to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some((Section::Objective, Some(ObjSense::Minimize))),
        "maximize" | "maximise" | "max" => Some((Section::Objective, Some(ObjSense::Maximize))),
        "subject to" | "such that" | "st" | "s.t." => Some((Section::Rows, None)),
        "bounds" | "bound" => Some((Section::Bounds, None)),
        "binaries" | "binary" | "bin" => Some((Section::Binaries, None)),
        "end" => Some((Section::Done, None)),
        _ => None,
    }
}

/// Splits a stream of content tokens into labelled entries: a token ending
/// with ':' starts a new entry (label may also be split as `name`, `:`).
fn split_entries(tokens: Vec<String>) -> Vec<(Option<String>, Vec<String>)> {
    let mut entries: Vec<(Option<String>, Vec<String>)> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        let label = if let Some(stripped) = tok.strip_suffix(':') {
            if stripped.is_empty() { None } else { Some(stripped.to_string()) }
        } else if i + 1 < tokens.len() && tokens[i + 1] == ":" {
            i += 1;
            Some(tok.clone())
        } else {
            None
        };
        if let Some(label) = label {
            entries.push((Some(label), Vec::new()));
            i += 1;
            continue;
        }
        if entries.is_empty() {
            entries.push((None, Vec::new()));
        }
        entries.last_mut().unwrap().1.push(tok.clone());
        i += 1;
    }
    entries
}

fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_string).collect()
}

/// Parses LP text into a model. Variables are registered in first-mention
/// order as continuous `[0, inf)`, then adjusted by Bounds/Binaries.
pub fn parse_lp(text: &str) -> Result<MipModel> {
    let mut name = "lp_import".to_string();
    let mut section = None;
    let mut obj_sense = ObjSense::Minimize;
    let mut obj_tokens: Vec<String> = Vec::new();
    let mut row_tokens: Vec<String> = Vec::new();
    let mut bound_lines: Vec<Vec<String>> = Vec::new();
    let mut binary_names: Vec<String> = Vec::new();

    for raw in text.lines() {
        let line = match raw.find('\\') {
            Some(k) => {
                if section.is_none() && raw.trim_start().starts_with('\\') {
                    let c = raw[k + 1..].trim();
                    if let Some(rest) = c.strip_prefix("model ") {
                        name = rest.trim().to_string();
                    }
                }
                &raw[..k]
            }
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some((sec, sense)) = section_of(trimmed) {
            if let Some(s) = sense {
                obj_sense = s;
            }
            section = Some(sec);
            continue;
        }
        match section {
            Some(Section::Objective) => obj_tokens.extend(tokenize(trimmed)),
            Some(Section::Rows) => row_tokens.extend(tokenize(trimmed)),
            Some(Section::Bounds) => bound_lines.push(tokenize(trimmed)),
            Some(Section::Binaries) => binary_names.extend(tokenize(trimmed)),
            Some(Section::Done) => {
                return Err(Error::parse(format!("content after End: {trimmed:?}")))
            }
            None => return Err(Error::parse(format!("content before any section: {trimmed:?}"))),
        }
    }

    // objective: at most one entry, optional label
    let obj_entries = split_entries(obj_tokens);
    let mut obj_terms_raw: Vec<(String, f64)> = Vec::new();
    if obj_entries.len() > 1 {
        return Err(Error::parse("multiple objective expressions"));
    }
    if let Some((_, toks)) = obj_entries.into_iter().next() {
        let mut pos = 0;
        obj_terms_raw = parse_expr(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(Error::parse("unexpected relational operator in objective"));
        }
    }

    let mut rows: Vec<RawRow> = Vec::new();
    for (k, (label, toks)) in split_entries(row_tokens).into_iter().enumerate() {
        let mut pos = 0;
        let terms = parse_expr(&toks, &mut pos)?;
        let sense = toks
            .get(pos)
            .and_then(|t| is_sense(t))
            .ok_or_else(|| Error::parse("constraint without relational operator"))?;
        pos += 1;
        let rhs: f64 = toks
            .get(pos)
            .ok_or_else(|| Error::parse("constraint without right-hand side"))?
            .parse()
            .map_err(|_| Error::parse("right-hand side is not a number"))?;
        pos += 1;
        if pos != toks.len() {
            return Err(Error::parse("trailing tokens after constraint right-hand side"));
        }
        rows.push(RawRow {
            name: label.unwrap_or_else(|| format!("c{}", k + 1)),
            terms,
            sense,
            rhs,
        });
    }

    // variable registry in first-mention order
    let mut order: Vec<String> = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let note = |n: &str, order: &mut Vec<String>, seen: &mut BTreeMap<String, usize>| {
        if !seen.contains_key(n) {
            seen.insert(n.to_string(), order.len());
            order.push(n.to_string());
        }
    };
    for (n, _) in &obj_terms_raw {
        note(n, &mut order, &mut seen);
    }
    for r in &rows {
        for (n, _) in &r.terms {
            note(n, &mut order, &mut seen);
        }
    }

    // bounds: "name free" | "name >= lb" | "name <= ub" | "lb <= name <= ub"
    let mut bounds: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for toks in bound_lines {
        match toks.as_slice() {
            [n, kw] if kw.eq_ignore_ascii_case("free") => {
                note(n, &mut order, &mut seen);
                bounds.insert(n.clone(), (f64::NEG_INFINITY, f64::INFINITY));
            }
            [n, op, v] if is_sense(op) == Some(RowSense::Ge) => {
                note(n, &mut order, &mut seen);
                let lb: f64 = v.parse().map_err(|_| Error::parse("bad bound value"))?;
                let e = bounds.entry(n.clone()).or_insert((0.0, f64::INFINITY));
                e.0 = lb;
            }
            [n, op, v] if is_sense(op) == Some(RowSense::Le) => {
                note(n, &mut order, &mut seen);
                let ub: f64 = v.parse().map_err(|_| Error::parse("bad bound value"))?;
                let e = bounds.entry(n.clone()).or_insert((0.0, f64::INFINITY));
                e.1 = ub;
            }
            [lo, op1, n, op2, hi]
                if is_sense(op1) == Some(RowSense::Le) && is_sense(op2) == Some(RowSense::Le) =>
            {
                note(n, &mut order, &mut seen);
                let lb: f64 = lo.parse().map_err(|_| Error::parse("bad bound value"))?;
                let ub: f64 = hi.parse().map_err(|_| Error::parse("bad bound value"))?;
                bounds.insert(n.clone(), (lb, ub));
            }
            _ => return Err(Error::parse(format!("unsupported bound line: {}", toks.join(" ")))),
        }
    }
    for n in &binary_names {
        note(n, &mut order, &mut seen);
    }

    let binary: std::collections::BTreeSet<&String> = binary_names.iter().collect();
    let mut model = MipModel::new(name, obj_sense);
    for n in &order {
        if binary.contains(n) {
            model.add_binary(n.clone())?;
        } else {
            let (lb, ub) = bounds.get(n).copied().unwrap_or((0.0, f64::INFINITY));
            model.add_continuous(n.clone(), lb, ub)?;
        }
    }
    for r in rows {
        let terms = r
            .terms
            .into_iter()
            .map(|(n, c)| (model.var_index(&n).unwrap(), c))
            .collect();
        model.add_row(r.name, terms, r.sense, r.rhs)?;
    }
    let obj = obj_terms_raw
        .into_iter()
        .map(|(n, c)| (model.var_index(&n).unwrap(), c))
        .collect();
    model.set_objective(obj);
    Ok(model)
}
