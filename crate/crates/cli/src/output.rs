use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{Map, Value};

use crate::config::{Format, RunConfig};
use crate::manifest::Manifest;

/// A rectangular table of already formatted cells.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner().context("flushing CSV")?).expect("CSV of UTF-8 cells"))
    }

    pub fn json_rows(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self.header.iter().cloned().zip(r.iter().map(|c| Value::String(c.clone()))).collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }

    /// Text for stdout, without a manifest.
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => Ok(pretty(&self.json_rows())),
        }
    }

    /// File contents with the manifest embedded.
    pub fn render_file(&self, format: Format, manifest: &Manifest) -> Result<String> {
        match format {
            Format::Csv => Ok(manifest.csv_comment() + &self.csv()?),
            Format::Json => Ok(pretty(&serde_json::json!({
                "manifest": manifest.to_value(),
                "columns": self.header,
                "rows": self.json_rows(),
            }))),
        }
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Adds the manifest under a `manifest` key of a JSON object.
pub fn with_manifest(mut v: Value, manifest: &Manifest) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("manifest".into(), manifest.to_value());
    }
    v
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(contents.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// `explicit`, or `name` inside the configured output directory.
pub fn output_path(cfg: &RunConfig, explicit: Option<&Path>, name: &str) -> PathBuf {
    explicit.map(Path::to_path_buf).unwrap_or_else(|| cfg.paths.output_dir.join(name))
}

pub fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into())
}
