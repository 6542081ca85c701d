use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qrobin::DiscreteFunction;
use serde_json::{json, Map, Value};

pub const CLI_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance stamped on every artifact of a run.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

impl Header {
    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("qrobin-cli {CLI_VERSION}, qrobin {}", qrobin::VERSION),
            format!("command {}", self.command),
            format!("config_sha256 {}", self.config_sha256),
            format!("seed {}", self.seed),
        ]
    }

    fn json(&self) -> Value {
        json!({
            "command": self.command,
            "config_sha256": self.config_sha256,
            "seed": self.seed,
            "versions": { "qrobin": qrobin::VERSION, "qrobin-cli": CLI_VERSION },
        })
    }
}

pub struct Writer {
    dir: PathBuf,
    header: Header,
    pub written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(dir: &Path, header: Header) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), header, written: Vec::new() })
    }

    fn put(&mut self, name: &str, text: &str) -> std::io::Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }

    /// Writes `body` (an object) with a leading `header` member.
    pub fn json(&mut self, name: &str, body: Value) -> std::io::Result<()> {
        let mut obj = Map::new();
        obj.insert("header".into(), self.header.json());
        match body {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("result".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(obj)).expect("JSON value serializes");
        text.push('\n');
        self.put(name, &text)
    }

    pub fn profile(&mut self, name: &str, u: &DiscreteFunction<f64>) -> std::io::Result<()> {
        let text = qrobin::mesh::to_csv(u, &self.header.lines(), true);
        self.put(name, &text)
    }

    /// A table with `columns`; `None` cells are left empty.
    pub fn table(&mut self, name: &str, columns: &[&str], rows: &[Vec<Option<String>>]) -> std::io::Result<()> {
        let mut text = String::new();
        for line in self.header.lines() {
            let _ = writeln!(text, "# {line}");
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        for row in rows {
            let cells: Vec<&str> = row.iter().map(|c| c.as_deref().unwrap_or("")).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        self.put(name, &text)
    }
}

pub fn num(x: f64) -> Option<String> {
    Some(qrobin::mesh::fmt_num(x))
}

/// Finite floats as numbers, anything else as `null`.
pub fn jnum(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
