//! Native JSON instance schema. Infinite bounds are written as `null`.

use divekit_core::instance::{MilpInstance, Row, Sense};
use serde::{Deserialize, Serialize};

use super::FormatError;

pub const INSTANCE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    version: u32,
    name: String,
    c: Vec<f64>,
    rows: Vec<Row>,
    sense: Vec<String>,
    b: Vec<f64>,
    lb: Vec<Option<f64>>,
    ub: Vec<Option<f64>>,
    int: Vec<usize>,
    divable: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    var_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    row_names: Option<Vec<String>>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

pub fn to_json(inst: &MilpInstance) -> String {
    let doc = InstanceDoc {
        version: INSTANCE_VERSION,
        name: inst.name.clone(),
        c: inst.objective.clone(),
        rows: inst.rows.clone(),
        sense: inst.sense.iter().map(|s| s.as_char().to_string()).collect(),
        b: inst.rhs.clone(),
        lb: inst.lower.iter().map(|&v| finite(v)).collect(),
        ub: inst.upper.iter().map(|&v| finite(v)).collect(),
        int: inst.integers.clone(),
        divable: inst.candidates(),
        var_names: inst.var_names.clone(),
        row_names: inst.row_names.clone(),
    };
    let mut s = serde_json::to_string(&doc).expect("instance documents always serialize");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<MilpInstance, FormatError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    if doc.version != INSTANCE_VERSION {
        return Err(FormatError::Version { found: doc.version.to_string(), expected: INSTANCE_VERSION.to_string() });
    }
    let n = doc.c.len();
    let mut sense = Vec::with_capacity(doc.sense.len());
    for s in &doc.sense {
        let mut chars = s.chars();
        match (chars.next().and_then(Sense::from_char), chars.next()) {
            (Some(v), None) => sense.push(v),
            _ => return Err(FormatError::Invalid(format!("unknown row sense {s:?}"))),
        }
    }
    let mut divable = vec![false; n];
    for &j in &doc.divable {
        *divable.get_mut(j).ok_or_else(|| FormatError::Invalid(format!("divable index {j} out of range")))? = true;
    }
    let inst = MilpInstance {
        name: doc.name,
        objective: doc.c,
        rows: doc.rows,
        sense,
        rhs: doc.b,
        lower: doc.lb.iter().map(|v| v.unwrap_or(f64::NEG_INFINITY)).collect(),
        upper: doc.ub.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect(),
        integers: doc.int,
        divable,
        var_names: doc.var_names,
        row_names: doc.row_names,
    };
    inst.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(inst)
}
