//! Dataset rendering and file writing.
//!
//! Two formats, both deterministic byte for byte:
//! * CSV — one `#`-prefixed line holding the complete metadata as compact
//!   JSON, then a header row, then one line per data row.
//! * JSON — a pretty-printed object `{"metadata": ..., "rows": [...]}` where
//!   each row is an object keyed by column name.
//!
//! Metadata objects are built with `serde_json`'s default map, which orders
//! keys alphabetically, and numbers render through the shortest round-trip
//! float formatting — the same config therefore always produces the same
//! bytes.

use std::path::Path;

use serde_json::{Map, Value};

use crate::AppError;

/// A table plus the metadata describing the run that produced it, ready to
/// render in either format.
pub struct Dataset {
    pub metadata: Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

/// Convert a finite float into a JSON number.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .expect("dataset values must be finite")
}

impl Dataset {
    pub fn render(&self, format: crate::config::Format) -> String {
        match format {
            crate::config::Format::Csv => self.render_csv(),
            crate::config::Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push('#');
        out.push_str(&self.metadata.to_string());
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut object = Map::new();
                for (name, value) in self.columns.iter().zip(row) {
                    object.insert((*name).to_string(), value.clone());
                }
                Value::Object(object)
            })
            .collect();
        let document = serde_json::json!({
            "metadata": self.metadata,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&document).expect("serializable document");
        text.push('\n');
        text
    }
}

fn csv_cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Write rendered content, creating the parent directory only when the path
/// came from the default-directory rule.
pub fn write(path: &Path, content: &str, create_parent: bool) -> Result<(), AppError> {
    if create_parent {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| {
                    AppError::Io(format!("cannot create {}: {e}", parent.display()))
                })?;
            }
        }
    }
    std::fs::write(path, content)
        .map_err(|e| AppError::Io(format!("cannot write {}: {e}", path.display())))
}
