//! Gate-level circuit representation over dense global qubit indices.
//! Registers are named views onto those qubits.

mod export;
mod metrics;

pub use export::{from_json, to_json, to_json_value, to_qasm};
pub use metrics::{depth, gate_count, GateCounts};

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    H,
    X,
    Swap,
    Phase(f64),
    U3(f64, f64, f64),
}

impl Op {
    pub fn inverse(self) -> Op {
        match self {
            Op::Phase(t) => Op::Phase(-t),
            Op::U3(t, p, l) => Op::U3(-t, -l, -p),
            other => other,
        }
    }

    /// True when the gate maps basis states to basis states.
    pub fn is_permutation(self) -> bool {
        matches!(self, Op::X | Op::Swap)
    }

    pub fn params(self) -> Vec<f64> {
        match self {
            Op::Phase(t) => vec![t],
            Op::U3(t, p, l) => vec![t, p, l],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub op: Op,
    pub controls: Vec<usize>,
    pub targets: Vec<usize>,
    /// Provenance label, `L<line>:<col>:<kind>` for synthesized gates.
    pub src: Option<Arc<str>>,
}

impl Gate {
    pub fn new(op: Op, controls: Vec<usize>, targets: Vec<usize>) -> Self {
        Gate { op, controls, targets, src: None }
    }

    pub fn h(q: usize) -> Self {
        Gate::new(Op::H, vec![], vec![q])
    }

    pub fn x(q: usize) -> Self {
        Gate::new(Op::X, vec![], vec![q])
    }

    pub fn cx(c: usize, t: usize) -> Self {
        Gate::new(Op::X, vec![c], vec![t])
    }

    pub fn ccx(a: usize, b: usize, t: usize) -> Self {
        Gate::new(Op::X, vec![a, b], vec![t])
    }

    pub fn mcx(controls: Vec<usize>, t: usize) -> Self {
        Gate::new(Op::X, controls, vec![t])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate::new(Op::Swap, vec![], vec![a, b])
    }

    pub fn cswap(c: usize, a: usize, b: usize) -> Self {
        Gate::new(Op::Swap, vec![c], vec![a, b])
    }

    pub fn phase(theta: f64, q: usize) -> Self {
        Gate::new(Op::Phase(theta), vec![], vec![q])
    }

    pub fn u3(theta: f64, phi: f64, lambda: f64, q: usize) -> Self {
        Gate::new(Op::U3(theta, phi, lambda), vec![], vec![q])
    }

    pub fn with_src(mut self, src: Option<Arc<str>>) -> Self {
        self.src = src;
        self
    }

    /// Kind name derived from the operation and number of controls.
    pub fn kind(&self) -> &'static str {
        let n = self.controls.len();
        match (self.op, n) {
            (Op::H, 0) => "H",
            (Op::H, _) => "CH",
            (Op::X, 0) => "X",
            (Op::X, 1) => "CX",
            (Op::X, 2) => "CCX",
            (Op::X, _) => "MCX",
            (Op::Swap, 0) => "SWAP",
            (Op::Swap, 1) => "CSWAP",
            (Op::Swap, _) => "MCSWAP",
            (Op::Phase(_), 0) => "PHASE",
            (Op::Phase(_), 1) => "CPHASE",
            (Op::Phase(_), _) => "MCPHASE",
            (Op::U3(..), 0) => "U3",
            (Op::U3(..), _) => "CU3",
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().chain(&self.targets).copied()
    }

    pub fn inverse(&self) -> Gate {
        Gate { op: self.op.inverse(), ..self.clone() }
    }

    /// Same gate with an extra control qubit.
    pub fn lifted(&self, ctl: usize) -> Gate {
        let mut g = self.clone();
        g.controls.insert(0, ctl);
        g
    }

    fn check(&self, qubits: usize) -> Result<()> {
        let arity = match self.op {
            Op::Swap => 2,
            _ => 1,
        };
        if self.targets.len() != arity {
            return Err(Error::Circuit(format!("{} expects {arity} target(s)", self.kind())));
        }
        let mut seen = HashSet::new();
        for q in self.qubits() {
            if q >= qubits {
                return Err(Error::Circuit(format!("qubit {q} out of range (circuit has {qubits})")));
            }
            if !seen.insert(q) {
                return Err(Error::Circuit(format!("qubit {q} used twice in one {} gate", self.kind())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Value bits followed by the sign/overflow bit.
    Variable,
    Sign,
    Control,
    Immediate,
    Scratch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub role: Role,
    pub qubits: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    pub qubits: usize,
    pub registers: Vec<Register>,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubits: usize) -> Self {
        Circuit { qubits, ..Default::default() }
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    /// Checks gate arity, index ranges and register disjointness.
    pub fn check(&self) -> Result<()> {
        for g in &self.gates {
            g.check(self.qubits)?;
        }
        let mut seen = HashSet::new();
        for r in &self.registers {
            for &q in &r.qubits {
                if q >= self.qubits {
                    return Err(Error::Circuit(format!("register {} uses qubit {q} out of range", r.name)));
                }
                if !seen.insert(q) {
                    return Err(Error::Circuit(format!("qubit {q} belongs to two registers")));
                }
            }
        }
        Ok(())
    }

    /// Reversed gate order with every gate inverted.
    pub fn invert(&self) -> Circuit {
        Circuit {
            qubits: self.qubits,
            registers: self.registers.clone(),
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Appends `b` after `self`. `wiring` maps register names of `b` to
    /// registers of `self`; unmapped registers of `b` get fresh qubits, as
    /// does any qubit of `b` outside a register.
    pub fn compose(&self, b: &Circuit, wiring: &BTreeMap<String, String>) -> Result<Circuit> {
        let mut out = self.clone();
        let mut map: Vec<Option<usize>> = vec![None; b.qubits];
        for r in &b.registers {
            match wiring.get(&r.name) {
                Some(target) => {
                    let t = self
                        .register(target)
                        .ok_or_else(|| Error::Circuit(format!("no register `{target}` to wire `{}` to", r.name)))?;
                    if t.qubits.len() != r.qubits.len() {
                        return Err(Error::Circuit(format!(
                            "width mismatch wiring `{}` ({}) to `{target}` ({})",
                            r.name,
                            r.qubits.len(),
                            t.qubits.len()
                        )));
                    }
                    for (&from, &to) in r.qubits.iter().zip(&t.qubits) {
                        map[from] = Some(to);
                    }
                }
                None => {
                    let fresh: Vec<usize> = (0..r.qubits.len()).map(|i| out.qubits + i).collect();
                    out.qubits += r.qubits.len();
                    for (&from, &to) in r.qubits.iter().zip(&fresh) {
                        map[from] = Some(to);
                    }
                    let name = if out.register(&r.name).is_some() { format!("{}'", r.name) } else { r.name.clone() };
                    out.registers.push(Register { name, role: r.role, qubits: fresh });
                }
            }
        }
        for slot in map.iter_mut() {
            if slot.is_none() {
                *slot = Some(out.qubits);
                out.qubits += 1;
            }
        }
        let remap = |qs: &[usize]| qs.iter().map(|&q| map[q].expect("all qubits mapped")).collect();
        for g in &b.gates {
            out.gates.push(Gate {
                op: g.op,
                controls: remap(&g.controls),
                targets: remap(&g.targets),
                src: g.src.clone(),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Circuit {
        let mut c = Circuit::new(3);
        c.registers.push(Register { name: "a".into(), role: Role::Variable, qubits: vec![0, 1] });
        c.push(Gate::h(0));
        c.push(Gate::cx(0, 1));
        c.push(Gate::phase(0.3, 2));
        c.push(Gate::u3(0.1, 0.2, 0.3, 1));
        c
    }

    #[test]
    fn invert_is_an_involution() {
        let c = sample();
        assert_eq!(c.invert().invert(), c);
        let inv = c.invert();
        assert_eq!(inv.gates[0].op, Op::U3(-0.1, -0.3, -0.2));
        assert_eq!(inv.gates[1].op, Op::Phase(-0.3));
        assert_eq!(inv.gates[3], Gate::h(0));
    }

    #[test]
    fn kinds() {
        assert_eq!(Gate::mcx(vec![0, 1, 2], 3).kind(), "MCX");
        assert_eq!(Gate::cswap(0, 1, 2).kind(), "CSWAP");
        assert_eq!(Gate::phase(1.0, 0).lifted(1).kind(), "CPHASE");
    }

    #[test]
    fn compose_with_empty_is_identity() {
        let c = sample();
        let empty = Circuit::default();
        let wiring: BTreeMap<String, String> = [("a".to_string(), "a".to_string())].into_iter().collect();
        let out = empty.compose(&c, &BTreeMap::new()).unwrap();
        assert_eq!(out.gates, c.gates);
        assert_eq!(out.qubits, 3);
        let out = c.compose(&c, &wiring).unwrap();
        assert_eq!(out.qubits, 4);
        assert_eq!(out.gates.len(), 8);
        assert_eq!(out.gates[5], Gate::cx(0, 1));
    }

    #[test]
    fn compose_is_associative() {
        let mut c = sample();
        c.registers.push(Register { name: "b".into(), role: Role::Scratch, qubits: vec![2] });
        let w: BTreeMap<String, String> = ["a", "b"].iter().map(|n| (n.to_string(), n.to_string())).collect();
        let left = c.compose(&c, &w).unwrap().compose(&c, &w).unwrap();
        let right = c.compose(&c.compose(&c, &w).unwrap(), &w).unwrap();
        assert_eq!(left.gates, right.gates);
    }

    #[test]
    fn compose_rejects_width_mismatch() {
        let c = sample();
        let mut b = Circuit::new(3);
        b.registers.push(Register { name: "b".into(), role: Role::Variable, qubits: vec![0, 1, 2] });
        let wiring: BTreeMap<String, String> = [("b".to_string(), "a".to_string())].into_iter().collect();
        assert!(c.compose(&b, &wiring).is_err());
    }

    #[test]
    fn check_catches_bad_gates() {
        let mut c = Circuit::new(2);
        c.push(Gate::cx(0, 2));
        assert!(c.check().is_err());
        let mut c = Circuit::new(2);
        c.push(Gate::cx(1, 1));
        assert!(c.check().is_err());
    }
}
