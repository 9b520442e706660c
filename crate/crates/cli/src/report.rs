use std::io::{self, Write};

use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// Everything a command produced, plus what produced it.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub command: &'static str,
    pub inputs: Map<String, Value>,
    pub outputs: Value,
    pub provenance: Map<String, Value>,
    /// Human-readable result lines.
    pub text: Vec<String>,
    /// Plot-ready table: header and rows.
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl RunReport {
    pub fn new(command: &'static str) -> Self {
        RunReport {
            command,
            inputs: Map::new(),
            outputs: Value::Null,
            provenance: Map::new(),
            text: Vec::new(),
            header: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.inputs.insert(key.to_string(), value.into());
        self
    }

    pub fn provenance(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.provenance.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("command".into(), Value::from(self.command));
        obj.insert("inputs".into(), Value::Object(self.inputs.clone()));
        obj.insert("outputs".into(), self.outputs.clone());
        obj.insert("provenance".into(), Value::Object(self.provenance.clone()));
        Value::Object(obj)
    }

    /// Text goes to stdout with provenance on stderr, so stdout stays
    /// byte-stable for a given flag set.
    pub fn emit(&self, format: Format) -> io::Result<()> {
        let stdout = io::stdout();
        let mut out = stdout.lock();
        match format {
            Format::Text => {
                for line in &self.text {
                    writeln!(out, "{line}")?;
                }
                let mut err = io::stderr().lock();
                for (k, v) in self.inputs.iter().chain(&self.provenance) {
                    writeln!(err, "# {k}: {}", plain(v))?;
                }
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row)?;
                }
                w.flush()?;
            }
            Format::Json => {
                let text =
                    serde_json::to_string_pretty(&self.to_json()).map_err(io::Error::other)?;
                writeln!(out, "{text}")?;
            }
        }
        Ok(())
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Shortest round-trip decimal for a float.
pub fn num(x: f64) -> String {
    format!("{x}")
}
