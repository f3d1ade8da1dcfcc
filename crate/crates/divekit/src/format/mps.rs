//! Reader for a small MPS subset: `N`/`L`/`G`/`E` rows, integer markers,
//! `RHS`, and `UP`/`LO`/`FX`/`BV` bounds. Fields are split on whitespace,
//! so names must not contain spaces.

use std::collections::HashMap;

use divekit_core::instance::{MilpInstance, Sense};

use super::FormatError;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Start,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

enum RowKind {
    Objective,
    Free,
    Constraint(usize),
}

fn parse_err(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::Parse { line, reason: reason.into() }
}

fn number(tok: &str, line: usize) -> Result<f64, FormatError> {
    tok.parse::<f64>().map_err(|_| parse_err(line, format!("bad number {tok:?}")))
}

pub fn read_mps(text: &str) -> Result<MilpInstance, FormatError> {
    let mut section = Section::Start;
    let mut name = String::new();
    let mut row_kind: HashMap<String, RowKind> = HashMap::new();
    let mut row_names = Vec::new();
    let mut sense = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut col_names: Vec<String> = Vec::new();
    let mut objective = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs = Vec::new();
    let mut is_int: Vec<bool> = Vec::new();
    let mut lower: Vec<f64> = Vec::new();
    let mut upper: Vec<f64> = Vec::new();
    let mut in_marker = false;
    let mut has_objective = false;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match fields[0] {
                "NAME" => {
                    name = fields.get(1).unwrap_or(&"").to_string();
                    Section::Start
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(FormatError::UnsupportedFeature { line, what: format!("section {other}") }),
            };
            continue;
        }
        match section {
            Section::Rows => {
                let [kind, rname] = fields[..] else {
                    return Err(parse_err(line, "expected row type and name"));
                };
                let entry = match kind {
                    "N" if !has_objective => {
                        has_objective = true;
                        RowKind::Objective
                    }
                    "N" => RowKind::Free,
                    "L" | "G" | "E" => {
                        sense.push(Sense::from_char(kind.chars().next().unwrap()).unwrap());
                        row_names.push(rname.to_string());
                        rows.push(Vec::new());
                        rhs.push(0.0);
                        RowKind::Constraint(rows.len() - 1)
                    }
                    other => return Err(parse_err(line, format!("unknown row type {other}"))),
                };
                if row_kind.insert(rname.to_string(), entry).is_some() {
                    return Err(parse_err(line, format!("duplicate row {rname}")));
                }
            }
            Section::Columns => {
                if fields.get(1) == Some(&"'MARKER'") {
                    match fields.get(2) {
                        Some(&"'INTORG'") => in_marker = true,
                        Some(&"'INTEND'") => in_marker = false,
                        _ => return Err(parse_err(line, "unknown marker")),
                    }
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(parse_err(line, "expected column name and one or two row/value pairs"));
                }
                let j = *col_index.entry(fields[0].to_string()).or_insert_with(|| {
                    col_names.push(fields[0].to_string());
                    objective.push(0.0);
                    is_int.push(in_marker);
                    lower.push(0.0);
                    upper.push(f64::INFINITY);
                    col_names.len() - 1
                });
                for pair in fields[1..].chunks(2) {
                    let v = number(pair[1], line)?;
                    match row_kind.get(pair[0]) {
                        Some(RowKind::Objective) => objective[j] = v,
                        Some(RowKind::Free) => {}
                        Some(RowKind::Constraint(i)) => rows[*i].push((j, v)),
                        None => return Err(parse_err(line, format!("unknown row {}", pair[0]))),
                    }
                }
            }
            Section::Rhs => {
                // the set name is optional when an odd number of fields remains
                let pairs = if fields.len() % 2 == 1 { &fields[1..] } else { &fields[..] };
                for pair in pairs.chunks(2) {
                    let [rname, val] = pair else {
                        return Err(parse_err(line, "dangling RHS field"));
                    };
                    let v = number(val, line)?;
                    match row_kind.get(*rname) {
                        Some(RowKind::Constraint(i)) => rhs[*i] = v,
                        Some(RowKind::Objective) => {
                            return Err(FormatError::UnsupportedFeature { line, what: "objective constant".into() })
                        }
                        Some(RowKind::Free) => {}
                        None => return Err(parse_err(line, format!("unknown row {rname}"))),
                    }
                }
            }
            Section::Bounds => {
                let kind = fields[0];
                if !matches!(kind, "UP" | "LO" | "FX" | "BV") {
                    return Err(FormatError::UnsupportedFeature { line, what: format!("bound type {kind}") });
                }
                // BND set name may be omitted; BV may omit its value
                let (col, value) = match (kind, fields.len()) {
                    ("BV", 3) => (fields[2], None),
                    ("BV", 2) => (fields[1], None),
                    (_, 4) => (fields[2], Some(fields[3])),
                    (_, 3) => (fields[1], Some(fields[2])),
                    _ => return Err(parse_err(line, "malformed bound")),
                };
                let j = *col_index.get(col).ok_or_else(|| parse_err(line, format!("unknown column {col}")))?;
                let v = value.map(|t| number(t, line)).transpose()?;
                match (kind, v) {
                    ("UP", Some(v)) => upper[j] = v,
                    ("LO", Some(v)) => lower[j] = v,
                    ("FX", Some(v)) => {
                        lower[j] = v;
                        upper[j] = v;
                    }
                    ("BV", _) => {
                        lower[j] = 0.0;
                        upper[j] = 1.0;
                        is_int[j] = true;
                    }
                    _ => return Err(parse_err(line, "bound needs a value")),
                }
            }
            Section::Start => return Err(parse_err(line, "data before ROWS")),
            Section::End => return Err(parse_err(line, "data after ENDATA")),
        }
    }
    if section != Section::End {
        return Err(parse_err(text.lines().count(), "missing ENDATA"));
    }

    let integers: Vec<usize> = (0..is_int.len()).filter(|&j| is_int[j]).collect();
    let inst = MilpInstance {
        name,
        objective,
        rows,
        sense,
        rhs,
        lower,
        upper,
        divable: is_int.clone(),
        integers,
        var_names: Some(col_names),
        row_names: Some(row_names),
    };
    inst.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(inst)
}
