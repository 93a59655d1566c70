//! Run reports: constants, exact inequality checks, named values.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::functionals::ConstantReport;
use crate::rational::{format_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn eval(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Eq => lhs == rhs,
            Relation::Le => lhs <= rhs,
            Relation::Lt => lhs < rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "crate::rational::serde_rational")]
    pub lhs: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub rhs: Rational,
    pub relation: Relation,
    pub holds: bool,
}

/// Everything in the JSON form is a pure function of the command and seed;
/// timings are kept aside and only ever printed to stderr.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub constants: Vec<ConstantReport>,
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

impl RunReport {
    pub fn new(command: &str, params: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            params,
            seed,
            constants: Vec::new(),
            checks: Vec::new(),
            values: BTreeMap::new(),
            detail: None,
            timings: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, lhs: Rational, relation: Relation, rhs: Rational) -> bool {
        let holds = relation.eval(&lhs, &rhs);
        self.checks.push(Check { name: name.into(), lhs, rhs, relation, holds });
        holds
    }

    pub fn value(&mut self, name: impl Into<String>, v: &Rational) {
        self.values.insert(name.into(), format_rational(v));
    }

    pub fn constant(&mut self, c: ConstantReport) -> &ConstantReport {
        self.constants.push(c);
        self.constants.last().expect("just pushed")
    }

    /// Runs `f` and records its wall time under `label`.
    pub fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push((label.to_string(), start.elapsed().as_secs_f64()));
        out
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.holds)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
