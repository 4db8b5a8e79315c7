//! Deterministic table output: CSV with `# key = value` metadata comment
//! lines, or a JSON envelope mirroring the same columns and metadata.
//!
//! Numbers are printed with 17 significant digits so text round-trips are
//! lossless; identical requests produce byte-identical files.

use std::io::Write;

pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<I, S>(columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            meta: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn meta_float(&mut self, key: &str, value: f64) {
        self.meta.push((key.to_string(), fmt(value)));
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (key, value) in &self.meta {
            writeln!(w, "# {key} = {value}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| fmt(*x)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let meta: serde_json::Map<String, serde_json::Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let doc = serde_json::json!({
            "meta": meta,
            "columns": self.columns,
            "rows": self.rows,
        });
        writeln!(
            w,
            "{}",
            serde_json::to_string_pretty(&doc).expect("table is valid json")
        )
    }
}

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}
