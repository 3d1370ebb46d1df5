//! Instance file format.
//!
//! ```json
//! {
//!   "n": 3,
//!   "d": 2,
//!   "mode": "vertex",
//!   "vertex_weights": [10.0, 6.0, 8.0],
//!   "edges": [
//!     {"from": 2, "to": 1},
//!     {"from": 3, "to": 1}
//!   ]
//! }
//! ```
//!
//! Edge-mode files omit `vertex_weights` and give every edge a `"weight"`.
//! Unknown fields are rejected. [`serialize`] always emits the layout above,
//! one edge per line, so identical instances give identical bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{validate_instance, Edge, Instance, Violation, WeightMode};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    d: usize,
    mode: WeightMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertex_weights: Option<Vec<f64>>,
    edges: Vec<EdgeRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    from: usize,
    to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

/// A violation located at a line of the input, when one can be named.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub violation: Violation,
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", render(.0))]
    Invalid(Vec<Diagnostic>),
}

fn render(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| match d.line {
            Some(line) => format!("line {line}: {}", d.violation),
            None => d.violation.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// 1-based line of the `k`-th `"from"` key; edge objects are the only place
/// that key can occur.
fn edge_line(text: &str, k: usize) -> Option<usize> {
    let (offset, _) = text.match_indices("\"from\"").nth(k)?;
    Some(text[..offset].matches('\n').count() + 1)
}

/// Parses and validates an instance file.
pub fn parse(text: &str) -> Result<Instance, ParseError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let inst = Instance {
        n: file.n,
        d: file.d,
        mode: file.mode,
        vertex_weights: file.vertex_weights,
        edges: file
            .edges
            .into_iter()
            .map(|e| Edge {
                origin: e.from,
                terminal: e.to,
                weight: e.weight,
            })
            .collect(),
    };
    let report = validate_instance(&inst);
    if report.is_ok() {
        return Ok(inst);
    }
    Err(ParseError::Invalid(
        report
            .findings
            .into_iter()
            .map(|f| Diagnostic {
                line: f.position.and_then(|k| edge_line(text, k)),
                violation: f.violation,
            })
            .collect(),
    ))
}

fn number(x: f64) -> String {
    serde_json::to_string(&x).expect("finite weight")
}

/// Canonical text of an instance. Weights must be finite.
pub fn serialize(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"n\": {},", inst.n);
    let _ = writeln!(out, "  \"d\": {},", inst.d);
    let _ = writeln!(out, "  \"mode\": \"{}\",", inst.mode);
    if let Some(ws) = &inst.vertex_weights {
        let items: Vec<String> = ws.iter().map(|&w| number(w)).collect();
        let _ = writeln!(out, "  \"vertex_weights\": [{}],", items.join(", "));
    }
    if inst.edges.is_empty() {
        let _ = writeln!(out, "  \"edges\": []");
    } else {
        let _ = writeln!(out, "  \"edges\": [");
        for (k, e) in inst.edges.iter().enumerate() {
            let sep = if k + 1 < inst.edges.len() { "," } else { "" };
            match e.weight {
                Some(w) => {
                    let _ = writeln!(
                        out,
                        "    {{\"from\": {}, \"to\": {}, \"weight\": {}}}{sep}",
                        e.origin,
                        e.terminal,
                        number(w)
                    );
                }
                None => {
                    let _ = writeln!(out, "    {{\"from\": {}, \"to\": {}}}{sep}", e.origin, e.terminal);
                }
            }
        }
        let _ = writeln!(out, "  ]");
    }
    let _ = writeln!(out, "}}");
    out
}
