use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Circuit, Gate, Op, Register};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct GateJson {
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    controls: Vec<usize>,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    src: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    qubits: usize,
    #[serde(default)]
    registers: Vec<Register>,
    gates: Vec<GateJson>,
}

fn gate_json(g: &Gate) -> GateJson {
    GateJson {
        kind: g.kind().to_string(),
        controls: g.controls.clone(),
        targets: g.targets.clone(),
        params: g.op.params(),
        src: g.src.as_deref().map(str::to_string),
    }
}

pub fn to_json_value(c: &Circuit) -> Value {
    let j = CircuitJson {
        qubits: c.qubits,
        registers: c.registers.clone(),
        gates: c.gates.iter().map(gate_json).collect(),
    };
    serde_json::to_value(j).expect("circuit serializes")
}

pub fn to_json(c: &Circuit) -> String {
    to_json_value(c).to_string()
}

/// Parses circuit-JSON and validates it; errors name the offending gate.
pub fn from_json(text: &str) -> Result<Circuit> {
    let j: CircuitJson = serde_json::from_str(text)
        .map_err(|e| Error::Circuit(format!("malformed circuit JSON at line {} column {}: {e}", e.line(), e.column())))?;
    let mut c = Circuit { qubits: j.qubits, registers: j.registers, gates: Vec::with_capacity(j.gates.len()) };
    for (i, g) in j.gates.into_iter().enumerate() {
        let gate = decode(g).map_err(|e| Error::Circuit(format!("gate {i}: {e}")))?;
        gate.check(c.qubits).map_err(|e| Error::Circuit(format!("gate {i}: {e}")))?;
        c.gates.push(gate);
    }
    c.check()?;
    Ok(c)
}

fn decode(g: GateJson) -> std::result::Result<Gate, String> {
    let n = g.controls.len();
    let p = &g.params;
    let (op, ok_controls) = match g.kind.as_str() {
        "H" => (Op::H, n == 0),
        "CH" => (Op::H, n >= 1),
        "X" => (Op::X, n == 0),
        "CX" => (Op::X, n == 1),
        "CCX" => (Op::X, n == 2),
        "MCX" => (Op::X, n >= 3),
        "SWAP" => (Op::Swap, n == 0),
        "CSWAP" => (Op::Swap, n == 1),
        "MCSWAP" => (Op::Swap, n >= 2),
        "PHASE" | "CPHASE" | "MCPHASE" => {
            let [t] = p.as_slice() else { return Err(format!("{} needs 1 parameter", g.kind)) };
            let ok = match g.kind.as_str() {
                "PHASE" => n == 0,
                "CPHASE" => n == 1,
                _ => n >= 2,
            };
            (Op::Phase(*t), ok)
        }
        "U3" | "CU3" => {
            let [t, ph, l] = p.as_slice() else { return Err(format!("{} needs 3 parameters", g.kind)) };
            (Op::U3(*t, *ph, *l), (g.kind == "U3") == (n == 0))
        }
        other => return Err(format!("unknown gate kind `{other}`")),
    };
    if !ok_controls {
        return Err(format!("{} cannot have {n} control(s)", g.kind));
    }
    Ok(Gate { op, controls: g.controls, targets: g.targets, src: g.src.map(Arc::from) })
}

/// One-way text export, one gate per line.
pub fn to_qasm(c: &Circuit) -> String {
    let mut out = format!("qubits {};\n", c.qubits);
    for g in &c.gates {
        let name = g.kind().to_lowercase();
        let name = match name.as_str() {
            "phase" => "p".to_string(),
            "cphase" => "cp".to_string(),
            "mcphase" => "mcp".to_string(),
            _ => name,
        };
        let params = g.op.params();
        let head = if params.is_empty() {
            name
        } else {
            let ps: Vec<String> = params.iter().map(|v| format!("{v}")).collect();
            format!("{name}({})", ps.join(","))
        };
        let args: Vec<String> = g.qubits().map(|q| format!("q[{q}]")).collect();
        out.push_str(&format!("{head} {};\n", args.join(",")));
    }
    out
}
