//! JSON persistence for [`DvMatrix`].
//!
//! ```json
//! {
//!   "format": "dvchain-matrix/1",
//!   "labels": ["97", "98"],
//!   "leg_count": 1,
//!   "grid": { "t_start": 40.0, "dt_step": 40.0, "h": 250, "d": 25, "dur_min": 40.0 },
//!   "values": [[12034.5, "inf", ...], ...]
//! }
//! ```
//!
//! `values` holds `d` rows of `h` entries, row 1 being the shortest
//! duration. Finite entries are written with the shortest representation
//! that parses back to the same double; `+∞` is the string `"inf"`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{DvMatrix, GridSpec, MatrixError};

pub const FORMAT_TAG: &str = "dvchain-matrix/1";

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    labels: Vec<String>,
    leg_count: usize,
    grid: GridSpec,
    values: Vec<Vec<Value>>,
}

fn field_err(field: impl Into<String>, msg: impl Into<String>) -> MatrixError {
    MatrixError::Document {
        field: field.into(),
        msg: msg.into(),
    }
}

fn encode(v: f64) -> Value {
    if v.is_infinite() {
        Value::String("inf".into())
    } else {
        serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
    }
}

pub fn serialize(m: &DvMatrix) -> String {
    let doc = Document {
        format: FORMAT_TAG.to_string(),
        labels: m.labels.clone(),
        leg_count: m.leg_count(),
        grid: m.spec,
        values: (1..=m.d()).map(|i| m.row(i).iter().copied().map(encode).collect()).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("matrix documents always serialize")
}

pub fn deserialize(text: &str) -> Result<DvMatrix, MatrixError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        // serde names the missing or mistyped field in its message
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.contains("field"))
            .unwrap_or("document")
            .to_string();
        field_err(field, msg)
    })?;
    if doc.format != FORMAT_TAG {
        return Err(field_err("format", format!("expected `{FORMAT_TAG}`, found `{}`", doc.format)));
    }
    doc.grid.validate().map_err(|e| field_err("grid", e.to_string()))?;
    if doc.labels.len() != doc.leg_count + 1 {
        return Err(field_err(
            "leg_count",
            format!("{} legs need {} labels, found {}", doc.leg_count, doc.leg_count + 1, doc.labels.len()),
        ));
    }
    let (d, h) = (doc.grid.d, doc.grid.h);
    if doc.values.len() != d {
        return Err(field_err("values", format!("expected {d} rows, found {}", doc.values.len())));
    }
    let mut values = Vec::with_capacity(d * h);
    for (ii, row) in doc.values.iter().enumerate() {
        if row.len() != h {
            return Err(field_err(
                format!("values[{ii}]"),
                format!("expected {h} entries, found {}", row.len()),
            ));
        }
        for (jj, cell) in row.iter().enumerate() {
            let v = match cell {
                Value::Number(n) => n.as_f64(),
                Value::String(s) if s == "inf" => Some(f64::INFINITY),
                _ => None,
            }
            .ok_or_else(|| field_err(format!("values[{ii}][{jj}]"), format!("not a ΔV: {cell}")))?;
            values.push(v);
        }
    }
    DvMatrix::new(doc.grid, values, doc.labels)
}
