mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use qex_core::classical::{enumerate, interval_analyze, EnumOptions, InputDomain};
use qex_core::lang::{parse, RETURN_VAR};
use qex_core::report::compare;
use qex_core::synth::{optimize, synthesize, OptFlags, SynthOptions};

fn oracle(p: &qex_core::lang::Program) -> std::collections::BTreeMap<u64, u64> {
    enumerate(p, &InputDomain::full(), 3, &[RETURN_VAR.to_string()], EnumOptions::default())
        .unwrap()
        .per_target
        .remove(RETURN_VAR)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn superposed_run_equals_enumeration(src in common::program()) {
        let p = parse(&src).unwrap();
        let r = synthesize(&p, &InputDomain::full(), &SynthOptions::default()).unwrap();
        let st = r.simulate().unwrap();
        let got = st.marginal(r.register(RETURN_VAR).unwrap()).counts_over(64).unwrap();
        prop_assert_eq!(got, oracle(&p), "{}", src);
    }

    #[test]
    fn optimizations_preserve_distribution(src in common::program()) {
        let p = parse(&src).unwrap();
        let base = synthesize(&p, &InputDomain::full(), &SynthOptions::default()).unwrap();
        let expect = oracle(&p);
        for flags in [
            OptFlags { uncompute: true, ..Default::default() },
            OptFlags { uncompute: true, share_immediates: true, parallel_copy: false },
            OptFlags::all(),
        ] {
            let r = optimize(&base, flags).unwrap();
            let got = r.simulate().unwrap().marginal(r.register(RETURN_VAR).unwrap()).counts_over(64).unwrap();
            prop_assert_eq!(&got, &expect, "{} {:?}", src, flags);
            if !flags.parallel_copy {
                prop_assert!(r.circuit.qubits <= base.circuit.qubits, "{} {:?}", src, flags);
            }
        }
    }

    #[test]
    fn interval_analysis_is_sound(src in common::program()) {
        let p = parse(&src).unwrap();
        let gt: BTreeSet<u64> = oracle(&p).into_keys().collect();
        let iv = interval_analyze(&p, &InputDomain::full(), 3).unwrap().get(RETURN_VAR).unwrap();
        let rep = compare(&iv.values(), &gt).unwrap();
        prop_assert!(rep.fn_.is_empty(), "{}", src);
        prop_assert!(rep.over.value() >= 1.0);
    }
}
