//! Tabular record of every checked inequality.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub params: serde_json::Value,
    pub lhs: f64,
    pub rhs: f64,
    pub implied_constant: Option<f64>,
    pub ceiling: Option<f64>,
    pub samples: usize,
    pub pass: bool,
}

impl CheckRecord {
    /// One-sided `lhs <= rhs` (and `implied <= ceiling` when both are present).
    pub fn one_sided(name: &str, params: serde_json::Value, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            params,
            lhs,
            rhs,
            implied_constant: None,
            ceiling: None,
            samples: 1,
            pass: lhs <= rhs,
        }
    }

    pub fn with_constant(mut self, implied: f64, ceiling: Option<f64>) -> Self {
        self.implied_constant = Some(implied);
        self.ceiling = ceiling;
        self.pass = self.lhs <= self.rhs && ceiling.is_none_or(|c| implied <= c);
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub records: Vec<CheckRecord>,
    /// Free-form notes, e.g. how a supremum was sampled.
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    name: &'a str,
    params: String,
    lhs: f64,
    rhs: f64,
    implied_constant: Option<f64>,
    ceiling: Option<f64>,
    samples: usize,
    pass: bool,
}

impl VerificationReport {
    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.records.iter().filter(|r| !r.pass).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(CsvRow {
                name: &r.name,
                params: r.params.to_string(),
                lhs: r.lhs,
                rhs: r.rhs,
                implied_constant: r.implied_constant,
                ceiling: r.ceiling,
                samples: r.samples,
                pass: r.pass,
            })
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.json")), serde_json::to_vec_pretty(self)?)?;
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv()?)?;
        Ok(())
    }
}
