//! Approximation rates against a ground truth and the closed-form
//! resource model.

mod cost;

pub use cost::{attribution, estimate, scale_report, CostRow, Measured, ResourceEstimate, ScaleReport, OPS};

use std::collections::BTreeSet;

use num_integer::Integer;
use serde_json::{json, Value};

use crate::{Error, Result};

/// Exact rate `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rate {
    pub num: u64,
    pub den: u64,
}

impl Rate {
    fn new(num: u64, den: u64) -> Self {
        let g = num.gcd(&den).max(1);
        Rate { num: num / g, den: den / g }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Percentage rounded to one decimal.
    pub fn percent(self) -> f64 {
        (self.value() * 1000.0).round() / 10.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxReport {
    pub gt: BTreeSet<u64>,
    pub analysis: BTreeSet<u64>,
    pub fp: BTreeSet<u64>,
    pub fn_: BTreeSet<u64>,
    pub over: Rate,
    pub under: Rate,
}

/// Compares the values an analysis reports with the ground truth.
pub fn compare(analysis: &BTreeSet<u64>, gt: &BTreeSet<u64>) -> Result<ApproxReport> {
    if gt.is_empty() {
        return Err(Error::Config("empty ground truth".into()));
    }
    let fp: BTreeSet<u64> = analysis.difference(gt).copied().collect();
    let fn_: BTreeSet<u64> = gt.difference(analysis).copied().collect();
    let n = gt.len() as u64;
    Ok(ApproxReport {
        over: Rate::new(fp.len() as u64 + n, n),
        under: Rate::new(fn_.len() as u64, n),
        gt: gt.clone(),
        analysis: analysis.clone(),
        fp,
        fn_,
    })
}

impl ApproxReport {
    pub fn exact(&self) -> bool {
        self.fp.is_empty() && self.fn_.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "gt": self.gt,
            "analysis": self.analysis,
            "fp": self.fp,
            "fn": self.fn_,
            "over_rate_pct": self.over.percent(),
            "under_rate_pct": self.under.percent(),
            "over_rate": format!("{}/{}", self.over.num, self.over.den),
            "under_rate": format!("{}/{}", self.under.num, self.under.den),
        })
    }
}
