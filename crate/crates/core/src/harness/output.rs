use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{Map, Value};

use super::config::ExperimentKind;
use crate::error::{LabError, Result};

/// Rows of JSON scalars under named columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `# boostlab <kind> generated_at_unix=<seconds>`.
pub fn header_meta_line(kind: ExperimentKind) -> String {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    format!("# boostlab {kind} generated_at_unix={now}")
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column, top to bottom.
    pub fn values<'a>(&'a self, name: &str) -> Option<impl Iterator<Item = &'a Value> + 'a> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(move |r| &r[i]))
    }

    pub fn get(&self, row: usize, name: &str) -> Option<&Value> {
        self.column(name).and_then(|i| self.rows.get(row).map(|r| &r[i]))
    }

    /// Header and data rows; the optional `meta` line goes first.
    pub fn to_csv(&self, meta: Option<&str>) -> Result<String> {
        let mut out = Vec::new();
        if let Some(meta) = meta {
            out.extend_from_slice(meta.as_bytes());
            out.push(b'\n');
        }
        {
            let mut w = csv::Writer::from_writer(&mut out);
            let io = |e: csv::Error| LabError::Io(e.to_string());
            w.write_record(&self.columns).map_err(io)?;
            for row in &self.rows {
                w.write_record(row.iter().map(cell_text)).map_err(io)?;
            }
            w.flush()?;
        }
        String::from_utf8(out).map_err(|e| LabError::Io(e.to_string()))
    }

    /// `{"kind": ..., "generated_at_unix"?: ..., "rows": [{column: value}]}`.
    pub fn to_json(&self, kind: ExperimentKind, generated_at: Option<u64>) -> Result<String> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect::<Map<_, _>>()))
            .collect();
        let mut doc = Map::new();
        doc.insert("kind".into(), Value::from(kind.name()));
        if let Some(t) = generated_at {
            doc.insert("generated_at_unix".into(), Value::from(t));
        }
        doc.insert("rows".into(), Value::Array(rows));
        serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| LabError::Io(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_rendering() {
        let t = Table {
            columns: vec!["seed".into(), "x".into(), "note".into()],
            rows: vec![vec![json!(1), json!(0.5), Value::Null], vec![json!(2), json!(true), json!("a,b")]],
        };
        assert_eq!(t.to_csv(None).unwrap(), "seed,x,note\n1,0.5,\n2,true,\"a,b\"\n");
        assert!(t.to_csv(Some("# meta")).unwrap().starts_with("# meta\nseed,"));
        assert_eq!(t.get(1, "x"), Some(&json!(true)));
        let json: Value = serde_json::from_str(&t.to_json(ExperimentKind::Adaboost, None).unwrap()).unwrap();
        assert_eq!(json["rows"][1]["note"], "a,b");
        assert!(json.get("generated_at_unix").is_none());
    }
}
