//! Report assembly and emission.

use std::collections::BTreeMap;
use std::io::Write;

use lightcone::grid::GridPoint;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::CliError;

/// Per-site values on a lattice, row-major; `None` marks masked sites.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SiteTable {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub values: BTreeMap<String, Vec<Option<f64>>>,
    pub labels: BTreeMap<String, Vec<String>>,
}

impl SiteTable {
    pub fn new(points: &[GridPoint]) -> Self {
        SiteTable {
            i: points.iter().map(|p| p.i).collect(),
            j: points.iter().map(|p| p.j).collect(),
            u: points.iter().map(|p| p.u).collect(),
            v: points.iter().map(|p| p.v).collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, name: &str, k: usize, value: Option<f64>) {
        let n = self.u.len();
        self.values.entry(name.to_string()).or_insert_with(|| vec![None; n])[k] = value;
    }

    pub fn label(&mut self, name: &str, k: usize, value: impl Into<String>) {
        let n = self.u.len();
        self.labels.entry(name.to_string()).or_insert_with(|| vec![String::new(); n])[k] = value.into();
    }

    fn write_csv(&self, w: impl Write) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["i".to_string(), "j".into(), "u".into(), "v".into()];
        header.extend(self.values.keys().cloned());
        header.extend(self.labels.keys().cloned());
        out.write_record(&header).map_err(CliError::io)?;
        for k in 0..self.u.len() {
            let mut row = vec![
                self.i[k].to_string(),
                self.j[k].to_string(),
                format!("{:e}", self.u[k]),
                format!("{:e}", self.v[k]),
            ];
            row.extend(self.values.values().map(|c| c[k].map(|x| format!("{x:e}")).unwrap_or_default()));
            row.extend(self.labels.values().map(|c| c[k].clone()));
            out.write_record(&row).map_err(CliError::io)?;
        }
        out.flush().map_err(CliError::io)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub sites: usize,
    pub masked: usize,
    pub summary: BTreeMap<String, f64>,
    /// Command-specific structured results.
    pub details: BTreeMap<String, Value>,
    pub fields: Option<SiteTable>,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Report {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: config.clone(),
            sites: 0,
            masked: 0,
            summary: BTreeMap::new(),
            details: BTreeMap::new(),
            fields: None,
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(key.to_string(), v);
    }

    pub fn masked_fraction(&self) -> f64 {
        if self.sites == 0 {
            0.0
        } else {
            self.masked as f64 / self.sites as f64
        }
    }

    /// JSON (full report) or CSV (per-site table, or the summary as one row
    /// when the command has no lattice), to `config.out` or stdout.
    pub fn emit(&self) -> Result<(), CliError> {
        let mut buf = Vec::new();
        match self.config.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut buf, self).map_err(CliError::io)?;
                buf.push(b'\n');
            }
            Format::Csv => match &self.fields {
                Some(t) => t.write_csv(&mut buf)?,
                None => {
                    let mut w = csv::Writer::from_writer(&mut buf);
                    w.write_record(self.summary.keys()).map_err(CliError::io)?;
                    w.write_record(self.summary.values().map(|x| format!("{x:e}"))).map_err(CliError::io)?;
                    w.flush().map_err(CliError::io)?;
                }
            },
        }
        match &self.config.out {
            Some(path) => std::fs::write(path, buf)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
            None => std::io::stdout().write_all(&buf).map_err(CliError::io),
        }
    }
}
