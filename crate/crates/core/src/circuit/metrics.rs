use std::collections::BTreeMap;

use serde::Serialize;

use super::Circuit;

/// Greedy front-to-back layering: each gate goes one layer after the latest
/// layer touching any of its qubits.
pub fn depth(c: &Circuit) -> usize {
    let mut last = vec![0usize; c.qubits];
    let mut max = 0;
    for g in &c.gates {
        let layer = g.qubits().map(|q| last[q]).max().unwrap_or(0) + 1;
        for q in g.qubits() {
            last[q] = layer;
        }
        max = max.max(layer);
    }
    max
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub by_kind: BTreeMap<String, usize>,
    pub total: usize,
}

pub fn gate_count(c: &Circuit) -> GateCounts {
    let mut by_kind = BTreeMap::new();
    for g in &c.gates {
        *by_kind.entry(g.kind().to_string()).or_insert(0) += 1;
    }
    GateCounts { by_kind, total: c.gates.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use proptest::prelude::*;

    #[test]
    fn small_depths() {
        let mut c = Circuit::new(2);
        c.push(Gate::h(0));
        c.push(Gate::h(1));
        assert_eq!(depth(&c), 1);
        let mut c = Circuit::new(2);
        c.push(Gate::h(0));
        c.push(Gate::cx(0, 1));
        c.push(Gate::x(0));
        assert_eq!(depth(&c), 3);
        assert_eq!(depth(&Circuit::new(4)), 0);
    }

    #[test]
    fn counts() {
        let mut c = Circuit::new(3);
        assert_eq!(gate_count(&c).total, 0);
        c.push(Gate::ccx(0, 1, 2));
        c.push(Gate::ccx(0, 2, 1));
        c.push(Gate::x(0));
        let n = gate_count(&c);
        assert_eq!(n.total, 3);
        assert_eq!(n.by_kind["CCX"], 2);
        assert_eq!(n.by_kind["X"], 1);
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        prop::collection::vec((0usize..4, 0usize..4, any::<bool>()), 0..30).prop_map(|spec| {
            let mut c = Circuit::new(4);
            for (a, b, two) in spec {
                if two && a != b {
                    c.push(Gate::cx(a, b));
                } else {
                    c.push(Gate::x(a));
                }
            }
            c
        })
    }

    proptest! {
        #[test]
        fn depth_bounded_by_count(c in arb_circuit()) {
            let d = depth(&c);
            prop_assert!(d <= c.gates.len());
            let chained = c.gates.windows(2).all(|w| w[0].qubits().any(|q| w[1].qubits().any(|r| r == q)));
            prop_assert_eq!(d == c.gates.len(), chained);
        }

        #[test]
        fn layering_respects_shared_qubits(c in arb_circuit()) {
            // Recompute layers and check that gates sharing a qubit are strictly ordered.
            let mut last = vec![0usize; c.qubits];
            let mut layers = Vec::new();
            for g in &c.gates {
                let l = g.qubits().map(|q| last[q]).max().unwrap_or(0) + 1;
                for q in g.qubits() { last[q] = l; }
                layers.push(l);
            }
            for i in 0..c.gates.len() {
                for j in i + 1..c.gates.len() {
                    if c.gates[i].qubits().any(|q| c.gates[j].qubits().any(|r| r == q)) {
                        prop_assert!(layers[i] < layers[j]);
                    }
                }
            }
        }

        #[test]
        fn invert_involution(c in arb_circuit()) {
            prop_assert_eq!(c.invert().invert(), c);
        }
    }
}
