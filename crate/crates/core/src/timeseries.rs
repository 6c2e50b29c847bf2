//! Columnar time-series records: the output unit consumed by the CLI.
//! Column and metadata order is fixed at construction so emission is
//! byte-reproducible.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub columns: Vec<Column>,
    pub metadata: Vec<(String, String)>,
}

impl TimeSeries {
    pub fn new(names: &[&str]) -> Self {
        Self {
            columns: names
                .iter()
                .map(|n| Column {
                    name: (*n).to_string(),
                    values: Vec::new(),
                })
                .collect(),
            metadata: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidParameter(format!(
                "row width {} does not match {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for (col, v) in self.columns.iter_mut().zip(row.iter()) {
            col.values.push(*v);
        }
        Ok(())
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        if let Some(slot) = self.metadata.iter_mut().find(|(k, _)| k == key) {
            slot.1 = value;
        } else {
            self.metadata.push((key.to_string(), value));
        }
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    /// Rectangularity check.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_rows();
        if self.columns.iter().any(|c| c.values.len() != n) {
            return Err(Error::InvalidParameter("ragged time series".into()));
        }
        Ok(())
    }
}
