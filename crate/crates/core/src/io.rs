//! JSON and CSV formats for measures and plans.
//!
//! ```text
//! measure:  {"atoms":   [{"x": 1.5, "w": "1/3"}, ...]}
//! coupling: {"entries": [{"x": 0, "y": -1, "w": 0.25}, ...]}
//! ```
//!
//! Numbers may be JSON numbers or strings holding a decimal or a ratio
//! `"p/q"`. A string anywhere in a document marks it as exact.

use serde_json::{json, Value};

use crate::curtain::Coupling;
use crate::error::{MotError, Result};
use crate::measures::DiscreteMeasure;
use crate::scalar::Scalar;

fn field<'a>(obj: &'a Value, key: &str, ctx: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| MotError::InvalidMeasure(format!("{ctx}: missing field \"{key}\"")))
}

/// Reads a number; JSON numbers go through their decimal text so that exact
/// mode sees `0.1` as `1/10`.
pub fn scalar_from_json<T: Scalar>(v: &Value, ctx: &str) -> Result<T> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => return Err(MotError::InvalidMeasure(format!("{ctx}: expected a number, found {other}"))),
    };
    T::parse_str(&text).ok_or_else(|| MotError::InvalidMeasure(format!("{ctx}: cannot read \"{text}\" as a number")))
}

fn list<'a>(doc: &'a Value, key: &str) -> Result<&'a Vec<Value>> {
    field(doc, key, "document")?
        .as_array()
        .ok_or_else(|| MotError::InvalidMeasure(format!("\"{key}\" must be an array")))
}

/// Whether any `x`, `y` or `w` in the document is written as a string.
pub fn has_exact_values(doc: &Value) -> bool {
    ["atoms", "entries"].iter().any(|key| {
        doc.get(key).and_then(Value::as_array).is_some_and(|items| {
            items
                .iter()
                .any(|it| ["x", "y", "w"].iter().any(|k| it.get(k).is_some_and(Value::is_string)))
        })
    })
}

pub fn parse_document(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}

pub fn measure_from_value<T: Scalar>(doc: &Value) -> Result<DiscreteMeasure<T>> {
    let atoms = list(doc, "atoms")?;
    let mut pairs = Vec::with_capacity(atoms.len());
    for (k, a) in atoms.iter().enumerate() {
        let ctx = format!("atom {k}");
        pairs.push((
            scalar_from_json(field(a, "x", &ctx)?, &ctx)?,
            scalar_from_json(field(a, "w", &ctx)?, &ctx)?,
        ));
    }
    DiscreteMeasure::new(pairs)
}

pub fn measure_from_json<T: Scalar>(text: &str) -> Result<DiscreteMeasure<T>> {
    measure_from_value(&parse_document(text)?)
}

pub fn measure_to_value<T: Scalar>(m: &DiscreteMeasure<T>) -> Value {
    let atoms: Vec<Value> = m.atoms().iter().map(|a| json!({"x": a.x.to_json(), "w": a.w.to_json()})).collect();
    json!({ "atoms": atoms })
}

/// Rows `x,w` with a header line.
pub fn measure_to_csv<T: Scalar>(m: &DiscreteMeasure<T>) -> String {
    let mut out = String::from("x,w\n");
    for a in m.atoms() {
        out.push_str(&format!("{},{}\n", a.x, a.w));
    }
    out
}

pub fn coupling_from_value<T: Scalar>(doc: &Value) -> Result<Coupling<T>> {
    let entries = list(doc, "entries")?;
    let mut triples = Vec::with_capacity(entries.len());
    for (k, e) in entries.iter().enumerate() {
        let ctx = format!("entry {k}");
        triples.push((
            scalar_from_json(field(e, "x", &ctx)?, &ctx)?,
            scalar_from_json(field(e, "y", &ctx)?, &ctx)?,
            scalar_from_json(field(e, "w", &ctx)?, &ctx)?,
        ));
    }
    Coupling::from_entries(triples)
}

pub fn coupling_from_json<T: Scalar>(text: &str) -> Result<Coupling<T>> {
    coupling_from_value(&parse_document(text)?)
}

pub fn coupling_to_value<T: Scalar>(pi: &Coupling<T>) -> Value {
    let entries: Vec<Value> = pi
        .entries()
        .into_iter()
        .map(|(x, y, w)| json!({"x": x.to_json(), "y": y.to_json(), "w": w.to_json()}))
        .collect();
    json!({ "entries": entries })
}

/// Rows `x,T1,T2`; `T2` is empty for one-atom rows and both are empty for
/// rows without mass above `threshold`.
pub fn maps_to_csv<T: Scalar>(pi: &Coupling<T>, threshold: &T) -> String {
    let mut out = String::from("x,T1,T2\n");
    for r in pi.row_maps(threshold) {
        let show = |v: &Option<T>| v.as_ref().map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", r.x, show(&r.t1), show(&r.t2)));
    }
    out
}
