//! Closed-form gate and depth model per operation, evaluated at a target
//! width, with measured figures of the synthesized circuit alongside.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::circuit::{depth, Circuit};
use crate::synth::{parse_src, Tally};

/// Operation rows of the model.
pub const OPS: [&str; 4] = ["add_sub", "mul", "div", "if_else"];

pub fn gates(op: &str, n: u128) -> u128 {
    match op {
        "add_sub" => 3 * n * (n + 1) / 2,
        "mul" => (11 * n * n * n + 5 * n - 16 * n * n) / 2,
        "div" => n * (28 * n * n + 4 * n + 4),
        "if_else" => 9 * n * (n + 1) + 1,
        _ => unreachable!("unknown row {op}"),
    }
}

pub fn depth_of(op: &str, n: u128) -> u128 {
    match op {
        "add_sub" => 5 * n - 2,
        "mul" => (11 * n * n * n + 9 * n - 18 * n * n) / 2,
        "div" => 22 * n * n * n + 3 * n * n + 6 * n + 1,
        "if_else" => 10 * n - 3,
        _ => unreachable!("unknown row {op}"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostRow {
    pub op: &'static str,
    pub count: u64,
    pub gates: u128,
    pub depth: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Measured {
    pub qubits: usize,
    pub gates: usize,
    pub depth: usize,
    pub width: usize,
}

impl Measured {
    pub fn of(c: &Circuit, width: usize) -> Self {
        Measured { qubits: c.qubits, gates: c.gates.len(), depth: depth(c), width }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceEstimate {
    pub n: u32,
    pub tally: Tally,
    pub rows: Vec<CostRow>,
    pub gates: u128,
    /// Serialized statements: per-operation depths summed.
    pub depth: u128,
    pub measured: Option<Measured>,
}

/// Evaluates the model for `tally` at width `n`. Comparisons are charged
/// as subtractions.
pub fn estimate(tally: &Tally, n: u32) -> crate::Result<ResourceEstimate> {
    if n == 0 {
        return Err(crate::Error::Config("width must be at least 1".into()));
    }
    let counts = [tally.add + tally.sub + tally.cmp, tally.mul, tally.div, tally.if_else];
    let w = u128::from(n);
    let rows: Vec<CostRow> = OPS
        .iter()
        .zip(counts)
        .map(|(&op, count)| CostRow {
            op,
            count,
            gates: u128::from(count) * gates(op, w),
            depth: u128::from(count) * depth_of(op, w),
        })
        .collect();
    Ok(ResourceEstimate {
        n,
        tally: *tally,
        gates: rows.iter().map(|r| r.gates).sum(),
        depth: rows.iter().map(|r| r.depth).sum(),
        rows,
        measured: None,
    })
}

impl ResourceEstimate {
    pub fn with_measured(mut self, m: Measured) -> Self {
        self.measured = Some(m);
        self
    }

    pub fn to_json(&self) -> Value {
        let rows: serde_json::Map<String, Value> = self
            .rows
            .iter()
            .map(|r| {
                (
                    r.op.to_string(),
                    json!({"count": r.count, "gates": r.gates.to_string(), "depth": r.depth.to_string()}),
                )
            })
            .collect();
        json!({
            "n": self.n,
            "tally": self.tally,
            "model": {"gates": self.gates.to_string(), "depth": self.depth.to_string(), "rows": rows},
            "measured": self.measured,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleReport {
    pub from: ResourceEstimate,
    pub to: ResourceEstimate,
    pub gate_ratio: f64,
    pub depth_ratio: f64,
    /// Growth of each register, `(n_to + 1) / (n_from + 1)`.
    pub qubit_factor: f64,
    /// Qubits of the measured circuit scaled by `qubit_factor`.
    pub qubits_scaled: Option<f64>,
}

pub fn scale_report(tally: &Tally, n_from: u32, n_to: u32, measured: Option<Measured>) -> crate::Result<ScaleReport> {
    let mut from = estimate(tally, n_from)?;
    let to = estimate(tally, n_to)?;
    let ratio = |a: u128, b: u128| if a == 0 { 0.0 } else { b as f64 / a as f64 };
    let qubit_factor = f64::from(n_to + 1) / f64::from(n_from + 1);
    let qubits_scaled = measured.as_ref().map(|m| m.qubits as f64 * qubit_factor);
    from.measured = measured;
    Ok(ScaleReport {
        gate_ratio: ratio(from.gates, to.gates),
        depth_ratio: ratio(from.depth, to.depth),
        from,
        to,
        qubit_factor,
        qubits_scaled,
    })
}

impl ScaleReport {
    pub fn to_json(&self) -> Value {
        json!({
            "from": self.from.to_json(),
            "to": self.to.to_json(),
            "gate_ratio": self.gate_ratio,
            "depth_ratio": self.depth_ratio,
            "qubit_factor": self.qubit_factor,
            "qubits_scaled": self.qubits_scaled,
        })
    }
}

/// Gate counts of a circuit grouped by the provenance kind of each gate.
pub fn attribution(c: &Circuit) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for g in &c.gates {
        let kind = g.src.as_deref().and_then(parse_src).map_or("unknown", |(_, k)| k);
        *out.entry(kind.to_string()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(f: impl FnOnce(&mut Tally)) -> Tally {
        let mut t = Tally::default();
        f(&mut t);
        t
    }

    #[test]
    fn table_values_at_three() {
        let e = estimate(&one(|t| t.add = 1), 3).unwrap();
        assert_eq!((e.gates, e.depth), (18, 13));
        let e = estimate(&one(|t| t.if_else = 1), 3).unwrap();
        assert_eq!((e.gates, e.depth), (109, 27));
        let e = estimate(&one(|t| t.div = 1), 3).unwrap();
        assert_eq!((e.gates, e.depth), (3 * (28 * 9 + 12 + 4), 22 * 27 + 27 + 18 + 1));
    }

    #[test]
    fn closed_forms_at_64() {
        let n: u128 = 64;
        let e = estimate(&Tally { add: 1, sub: 1, mul: 1, div: 1, cmp: 1, if_else: 1 }, 64).unwrap();
        let g = 3 * (3 * n * (n + 1) / 2)
            + (11 * n.pow(3) - 16 * n.pow(2) + 5 * n) / 2
            + n * (28 * n * n + 4 * n + 4)
            + 9 * n * (n + 1)
            + 1;
        assert_eq!(e.gates, g);
        let d = 3 * (5 * n - 2) + (11 * n.pow(3) - 18 * n.pow(2) + 9 * n) / 2 + 22 * n.pow(3) + 3 * n * n + 6 * n + 1 + 10 * n - 3;
        assert_eq!(e.depth, d);
    }

    #[test]
    fn forms_strictly_increase() {
        for op in OPS {
            for n in 1..64u128 {
                assert!(gates(op, n + 1) > gates(op, n), "{op} gates at {n}");
                assert!(depth_of(op, n + 1) > depth_of(op, n), "{op} depth at {n}");
            }
        }
    }

    #[test]
    fn gates_dominate_depth_from_two() {
        for op in OPS {
            for n in 2..=64u128 {
                assert!(gates(op, n) >= depth_of(op, n), "{op} at {n}");
            }
        }
        // The multiplication row is the exception at n = 1 (0 gates, depth 1).
        assert_eq!((gates("mul", 1), depth_of("mul", 1)), (0, 1));
    }

    #[test]
    fn scaling() {
        let r = scale_report(&one(|t| t.add = 1), 3, 64, None).unwrap();
        assert!((r.gate_ratio - 6240.0 / 18.0).abs() < 1e-9);
        assert!((r.qubit_factor - 65.0 / 4.0).abs() < 1e-12);
        let r = scale_report(&Tally::default(), 3, 64, None).unwrap();
        assert_eq!((r.from.gates, r.to.gates, r.gate_ratio), (0, 0, 0.0));
        assert!(estimate(&Tally::default(), 0).is_err());
    }
}
