use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Scenario, VerifyConfig};
use crate::dynamics::BoundParams;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::Le => value <= threshold,
            Relation::Lt => value < threshold,
            Relation::Gt => value > threshold,
            Relation::Ge => value >= threshold,
        }
    }
}

/// A measured value compared against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation,
            threshold,
            pass: relation.holds(value, threshold),
        }
    }
}

/// Rows of measured numbers; missing entries are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub scenario: Scenario,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Scalar measurements that carry no verdict of their own.
    pub quantities: BTreeMap<String, f64>,
    pub tables: BTreeMap<String, Table>,
    pub calibrated: Option<BoundParams>,
    pub config: VerifyConfig,
}

impl VerifyReport {
    pub(crate) fn new(config: &VerifyConfig) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            scenario: config.scenario,
            pass: true,
            checks: Vec::new(),
            quantities: BTreeMap::new(),
            tables: BTreeMap::new(),
            calibrated: None,
            config: config.clone(),
        }
    }

    pub(crate) fn check(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub(crate) fn quantity(&mut self, name: &str, value: f64) {
        self.quantities.insert(name.to_string(), value);
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}
