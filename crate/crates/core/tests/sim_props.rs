use proptest::prelude::*;
use qex_core::circuit::{Circuit, Gate, Op};
use qex_core::sim::{basis_of, run, SparseState};

const N: usize = 5;

fn gate() -> impl Strategy<Value = Gate> {
    let op = prop_oneof![
        Just(Op::H),
        Just(Op::X),
        Just(Op::Swap),
        (-3.2f64..3.2).prop_map(Op::Phase),
        (-3.2f64..3.2, -3.2f64..3.2, -3.2f64..3.2).prop_map(|(a, b, c)| Op::U3(a, b, c)),
    ];
    (op, Just((0..N).collect::<Vec<_>>()).prop_shuffle(), 0usize..3).prop_map(|(op, qs, nc)| {
        let nt = if op == Op::Swap { 2 } else { 1 };
        Gate::new(op, qs[nt..nt + nc].to_vec(), qs[..nt].to_vec())
    })
}

fn circuit() -> impl Strategy<Value = Circuit> {
    prop::collection::vec(gate(), 1..40).prop_map(|gates| {
        let mut c = Circuit::new(N);
        for g in gates {
            c.push(g);
        }
        c
    })
}

fn start() -> impl Strategy<Value = SparseState> {
    prop::collection::vec(0usize..N, 0..N).prop_map(|ones| {
        let mut s = SparseState::zero(N);
        s.entries_mut()[0].0 = basis_of(N, &ones);
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn circuit_then_inverse_is_identity(c in circuit(), s in start()) {
        let back = run(&c.invert(), &run(&c, &s));
        let (b0, a0) = &s.entries()[0];
        prop_assert!((back.amplitude(b0) - a0).norm() < 1e-9);
        prop_assert!((back.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn every_gate_preserves_norm(c in circuit(), s in start()) {
        let mut st = s;
        for g in &c.gates {
            st.apply(g);
            prop_assert!((st.norm_sqr() - 1.0).abs() < 1e-9, "after {:?}", g);
        }
    }

    #[test]
    fn permutations_keep_support_size(gs in prop::collection::vec(gate(), 1..30)) {
        let mut s = SparseState::zero(N);
        for q in 0..N { s.apply(&Gate::h(q)); }
        let n0 = s.support();
        for g in gs.into_iter().filter(|g| g.op.is_permutation()) {
            s.apply(&g);
            prop_assert_eq!(s.support(), n0);
        }
    }
}
