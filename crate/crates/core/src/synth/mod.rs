//! Synthesis of WHILE programs into circuits whose superposed execution
//! covers every input tuple at once.

mod builder;
mod compile;

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::circuit::Circuit;
use crate::classical::{DomainSpec, InputDomain};
use crate::lang::{Program, Span};
use crate::sim::{run_capped, Factor, SparseState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithBackend {
    /// Toffoli-cascade arithmetic; keeps every state a basis permutation
    /// of the input superposition.
    #[default]
    Ripple,
    /// Fourier-basis (Draper) addition and subtraction. Multiplication and
    /// division still use the ripple circuits.
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct OptFlags {
    /// Undo predicate scratch after its control qubit is extracted.
    pub uncompute: bool,
    /// One immediate register re-targeted with X gates.
    pub share_immediates: bool,
    /// Give else-branches private copies of the variables they read.
    pub parallel_copy: bool,
}

impl OptFlags {
    pub fn all() -> Self {
        OptFlags { uncompute: true, share_immediates: true, parallel_copy: true }
    }

    /// Parses a comma-separated list of `uncompute`, `share`, `parallel`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut f = OptFlags::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "uncompute" => f.uncompute = true,
                "share" | "share_immediates" => f.share_immediates = true,
                "parallel" | "parallel_copy" => f.parallel_copy = true,
                "none" => {}
                other => return Err(Error::Config(format!("unknown optimization `{other}`"))),
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SynthOptions {
    /// Value bits per variable; registers have `m + 1` qubits.
    pub m: u32,
    /// Iterations compiled for each loop.
    pub k: usize,
    pub flags: OptFlags,
    pub backend: ArithBackend,
    pub qubit_budget: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions { m: 3, k: 8, flags: OptFlags::default(), backend: ArithBackend::Ripple, qubit_budget: 4096 }
    }
}

impl SynthOptions {
    pub fn width(m: u32) -> Self {
        SynthOptions { m, ..Default::default() }
    }
}

/// How input registers are initialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputInit {
    /// Independent domains. Full domains are prepared with H gates in the
    /// circuit; intervals and sets are prepared directly in the simulator.
    Domain(InputDomain),
    /// Weighted joint tuples over the integer parameters, in order.
    Joint { tuples: Vec<(Vec<u64>, u64)> },
}

/// Operation counts feeding the resource model. `cmp` counts relational
/// nodes and is charged like a subtraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub add: u64,
    pub sub: u64,
    pub mul: u64,
    pub div: u64,
    pub cmp: u64,
    pub if_else: u64,
}

impl Tally {
    pub fn ops(&self) -> u64 {
        self.add + self.sub + self.mul + self.div + self.cmp
    }

    pub fn to_map(&self) -> BTreeMap<String, u64> {
        [
            ("add", self.add),
            ("sub", self.sub),
            ("mul", self.mul),
            ("div", self.div),
            ("cmp", self.cmp),
            ("if_else", self.if_else),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn from_map(m: &BTreeMap<String, u64>) -> Result<Self> {
        let mut t = Tally::default();
        for (k, &v) in m {
            match k.as_str() {
                "add" => t.add = v,
                "sub" => t.sub = v,
                "mul" => t.mul = v,
                "div" => t.div = v,
                "cmp" => t.cmp = v,
                "if_else" => t.if_else = v,
                other => return Err(Error::Config(format!("unknown operation kind `{other}`"))),
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputReg {
    pub name: String,
    pub qubits: Vec<usize>,
    pub spec: DomainSpec,
}

#[derive(Debug, Clone)]
pub struct SynthResult {
    pub program: Program,
    pub opts: SynthOptions,
    pub init: InputInit,
    pub circuit: Circuit,
    /// Final register of every variable (the sign qubit is last).
    pub layout: BTreeMap<String, Vec<usize>>,
    /// Registers each variable held before its current one.
    pub history: BTreeMap<String, Vec<Vec<usize>>>,
    pub inputs: Vec<InputReg>,
    pub tally: Tally,
    pub diagnostics: Vec<String>,
}

/// Default bound on the simulated support size.
pub const DEFAULT_SUPPORT_CAP: usize = 1 << 22;

impl SynthResult {
    pub fn register(&self, var: &str) -> Result<&[usize]> {
        self.layout.get(var).map(Vec::as_slice).ok_or_else(|| Error::Unbound(var.to_string()))
    }

    /// Number of input tuples, i.e. the common denominator of all exact
    /// output probabilities.
    pub fn input_count(&self) -> u64 {
        match &self.init {
            InputInit::Domain(_) => self.inputs.iter().map(|i| i.spec.size(self.opts.m)).product(),
            InputInit::Joint { tuples } => tuples.iter().map(|(_, w)| w).sum(),
        }
    }

    /// Initial simulator state: zeros, with interval/set inputs or joint
    /// tuples prepared directly.
    pub fn initial_state(&self) -> Result<SparseState> {
        let factors = match &self.init {
            InputInit::Domain(_) => self
                .inputs
                .iter()
                .filter(|i| i.spec != DomainSpec::Full)
                .map(|i| Factor::uniform(i.qubits.clone(), &i.spec.values(self.opts.m)))
                .collect(),
            InputInit::Joint { tuples } => {
                vec![Factor::weighted(self.inputs.iter().map(|i| i.qubits.clone()).collect(), tuples.clone())]
            }
        };
        SparseState::init(self.circuit.qubits, &factors)
    }

    pub fn simulate(&self) -> Result<SparseState> {
        self.simulate_capped(DEFAULT_SUPPORT_CAP)
    }

    pub fn simulate_capped(&self, cap: usize) -> Result<SparseState> {
        run_capped(&self.circuit, &self.initial_state()?, cap)
    }

    /// `{"vars": {name: {"register", "sign"}}, "tally": {...}}`
    pub fn layout_json(&self) -> Value {
        let vars: serde_json::Map<String, Value> = self
            .layout
            .iter()
            .map(|(k, r)| (k.clone(), json!({"register": r, "sign": r.last()})))
            .collect();
        json!({"vars": vars, "tally": self.tally})
    }
}

/// Compiles `p` with independent input domains.
pub fn synthesize(p: &Program, dom: &InputDomain, opts: &SynthOptions) -> Result<SynthResult> {
    synthesize_with(p, InputInit::Domain(dom.clone()), opts)
}

pub fn synthesize_with(p: &Program, init: InputInit, opts: &SynthOptions) -> Result<SynthResult> {
    if opts.m < 1 || opts.m > 62 {
        return Err(Error::Config(format!("width m = {} outside 1..=62", opts.m)));
    }
    compile::compile(p, init, *opts)
}

/// Recompiles the program of `r` with the given optimization passes.
pub fn optimize(r: &SynthResult, flags: OptFlags) -> Result<SynthResult> {
    let opts = SynthOptions { flags, ..r.opts };
    synthesize_with(&r.program, r.init.clone(), &opts)
}

/// Source position and kind encoded in a gate provenance label.
pub fn parse_src(label: &str) -> Option<(Span, &str)> {
    let rest = label.strip_prefix('L')?;
    let mut parts = rest.splitn(3, ':');
    let line = parts.next()?.parse().ok()?;
    let col = parts.next()?.parse().ok()?;
    let kind = parts.next()?;
    Some((Span::new(line, col), kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{enumerate, EnumOptions};
    use crate::lang::{parse, unroll};
    use crate::sim::read;

    const FIG1: &str = "int f(int x, int y) { if (x >= 5) { z := x + 1; } else { z := y + 1; } return z; }";

    fn dist_matches_oracle(src: &str, dom: &InputDomain, opts: SynthOptions) {
        let p = parse(src).unwrap();
        let r = synthesize(&p, dom, &opts).unwrap();
        let st = r.simulate().unwrap();
        let got = st.marginal(r.register("return").unwrap()).counts_over(r.input_count()).unwrap();
        let oracle_prog = if p.has_loops() { unroll(&p, opts.k) } else { p.clone() };
        let e = enumerate(&oracle_prog, dom, opts.m, &["return".to_string()], EnumOptions::default())
            .unwrap();
        assert_eq!(got, e.per_target["return"], "{src} with {:?}", opts.flags);
    }

    #[test]
    fn fig1_unoptimized_uses_34_qubits() {
        let p = parse(FIG1).unwrap();
        let r = synthesize(&p, &InputDomain::full(), &SynthOptions::default()).unwrap();
        assert_eq!(r.circuit.qubits, 34);
        assert_eq!(r.tally, Tally { add: 2, cmp: 1, if_else: 1, ..Default::default() });
    }

    #[test]
    fn fig1_optimized_is_smaller_and_equivalent() {
        let p = parse(FIG1).unwrap();
        let base = synthesize(&p, &InputDomain::full(), &SynthOptions::default()).unwrap();
        let flags = OptFlags { uncompute: true, share_immediates: true, parallel_copy: false };
        let opt = optimize(&base, flags).unwrap();
        assert!(opt.circuit.qubits <= 18, "{}", opt.circuit.qubits);
        let a = base.simulate().unwrap().marginal(base.register("z").unwrap());
        let b = opt.simulate().unwrap().marginal(opt.register("z").unwrap());
        assert_eq!(a.counts_over(64), b.counts_over(64));
    }

    #[test]
    fn fig1_predicate_scratch_returns_to_zero() {
        let p = parse(FIG1).unwrap();
        let flags = OptFlags { uncompute: true, ..Default::default() };
        let r = synthesize(&p, &InputDomain::full(), &SynthOptions { flags, ..Default::default() }).unwrap();
        assert!(r.diagnostics.is_empty());
        let st = r.simulate().unwrap();
        let live: BTreeSet<usize> = r.layout.values().flatten().copied().collect();
        for (b, _) in st.entries() {
            for reg in &r.circuit.registers {
                if reg.role == Role::Scratch && reg.qubits.iter().all(|q| !live.contains(q)) {
                    assert_eq!(read(b, &reg.qubits), 0, "{}", reg.name);
                }
            }
        }
    }

    use crate::circuit::Role;
    use std::collections::BTreeSet;

    #[test]
    fn arithmetic_matches_oracle_on_all_inputs() {
        for op in ["+", "-", "*", "/"] {
            for m in [2, 3] {
                let src = format!("int f(int a, int b) {{ r := a {op} b; return r; }}");
                dist_matches_oracle(&src, &InputDomain::full(), SynthOptions::width(m));
                let src = format!("int f(int a) {{ r := 3 {op} a; s := a {op} 2; return r + s; }}");
                dist_matches_oracle(&src, &InputDomain::full(), SynthOptions::width(m));
            }
        }
    }

    #[test]
    fn joint_output_of_arithmetic_is_exact_per_tuple() {
        let p = parse("int f(int a, int b) { q := a / b; r := a * b; d := a - b; return q; }").unwrap();
        let r = synthesize(&p, &InputDomain::full(), &SynthOptions::width(3)).unwrap();
        let st = r.simulate().unwrap();
        let regs: Vec<Vec<usize>> =
            ["a", "b", "q", "r", "d"].iter().map(|v| r.register(v).unwrap().to_vec()).collect();
        let j = st.joint(&regs);
        assert_eq!(j.support().len(), 64);
        for t in j.support() {
            let (a, b) = (t[0], t[1]);
            assert_eq!(t[2], a.checked_div(b).unwrap_or(0));
            assert_eq!(t[3], (a * b) & 15);
            assert_eq!(t[4], a.wrapping_sub(b) & 15);
        }
    }

    #[test]
    fn predicates_match_oracle() {
        let preds = [
            "x < y", "x <= 3", "3 > x", "x == y", "x != 2", "x >= y and y > 1",
            "!(x < 2) or y == 7", "x + y > 7", "x - y < 4", "true", "1 > 2", "x * y >= 6",
        ];
        for p in preds {
            let src = format!("int f(int x, int y) {{ if ({p}) {{ r := 1; }} else {{ r := 2; }} return r; }}");
            for flags in [OptFlags::default(), OptFlags::all()] {
                dist_matches_oracle(&src, &InputDomain::full(), SynthOptions { flags, ..Default::default() });
            }
        }
    }

    #[test]
    fn nested_branches_and_rebinding_match_oracle() {
        let srcs = [
            "int f(int x, int y) { z := y; if (x > 3) { z := x + 1; if (y < 2) { z := z * 2; } } return z; }",
            "int f(int x, int y) { if (x > 3) { x := x + 2; } else { y := y - x; } return x + y; }",
            "int f(int x, int y) { if (x > 3) { x := 7 - x; } else { x := x + 1; } return x; }",
            "int f(int x, int y) { z := 0; if (x == y) { } else { if (x < y) { z := y - x; } else { z := x - y; } } return z; }",
            "int f(int x, int y) { if (x >= 2) { t := x / y; x := t; } else { y := 3; } return x * y; }",
        ];
        for s in srcs {
            for flags in [
                OptFlags::default(),
                OptFlags { uncompute: true, ..Default::default() },
                OptFlags { share_immediates: true, ..Default::default() },
                OptFlags::all(),
            ] {
                dist_matches_oracle(s, &InputDomain::full(), SynthOptions { flags, ..Default::default() });
            }
        }
    }

    #[test]
    fn loops_match_unrolled_oracle() {
        let srcs = [
            "int f(int x) { c := 0; i := 0; while (i < x) { c := c + 2; i := i + 1; } return c; }",
            "int f(int x, int y) { while (x > y) { x := x - y; } return x; }",
            "int f(int x) { r := 1; while (x > 1) { r := r * x; x := x - 1; } return r; }",
            "int f(int x) { n := 0; while (x > 0) { x := x / 2; n := n + 1; } return n; }",
        ];
        for s in srcs {
            for k in [0, 1, 3, 8] {
                for flags in [OptFlags::default(), OptFlags::all()] {
                    dist_matches_oracle(s, &InputDomain::full(), SynthOptions { k, flags, ..Default::default() });
                }
            }
        }
    }

    #[test]
    fn restricted_and_joint_inputs() {
        let dom = InputDomain::full().with("x", DomainSpec::Set(vec![1, 2])).with("y", DomainSpec::Interval(3, 4));
        dist_matches_oracle("int f(int x, int y) { z := x + y; return z; }", &dom, SynthOptions::default());
        let p = parse("int f(int x, int y) { z := x + y; return z; }").unwrap();
        let init = InputInit::Joint { tuples: vec![(vec![1, 2], 3), (vec![2, 2], 1)] };
        let r = synthesize_with(&p, init, &SynthOptions::default()).unwrap();
        assert_eq!(r.input_count(), 4);
        let d = r.simulate().unwrap().marginal(r.register("z").unwrap());
        assert_eq!(d.counts_over(4).unwrap(), BTreeMap::from([(3, 3), (4, 1)]));
    }

    #[test]
    fn fourier_backend_adds_and_subtracts() {
        for src in [
            "int f(int a, int b) { r := a + b; return r; }",
            "int f(int a, int b) { r := a - b; s := r + 3; return s; }",
            "int f(int a, int b) { if (a > b) { a := a - b; } return a; }",
        ] {
            let opts = SynthOptions { backend: ArithBackend::Fourier, m: 2, ..Default::default() };
            let p = parse(src).unwrap();
            let r = synthesize(&p, &InputDomain::full(), &opts).unwrap();
            let st = r.simulate().unwrap();
            let got = st.marginal(r.register("return").unwrap());
            let e = enumerate(&p, &InputDomain::full(), 2, &["return".into()], EnumOptions::default()).unwrap();
            for (v, n) in &e.per_target["return"] {
                assert!((got.prob(*v) - *n as f64 / 16.0).abs() < 1e-9, "{src}: {v}");
            }
        }
    }

    #[test]
    fn fourier_blocks_uncompute_with_diagnostic() {
        let p = parse("int f(int a) { r := a + 1; if (r > 2) { r := 0; } return r; }").unwrap();
        let opts = SynthOptions {
            backend: ArithBackend::Fourier,
            flags: OptFlags { uncompute: true, ..Default::default() },
            ..Default::default()
        };
        let r = synthesize(&p, &InputDomain::full(), &opts).unwrap();
        assert_eq!(r.diagnostics.len(), 1);
    }

    #[test]
    fn provenance_labels_parse() {
        let p = parse(FIG1).unwrap();
        let r = synthesize(&p, &InputDomain::full(), &SynthOptions::default()).unwrap();
        let kinds: BTreeSet<&str> =
            r.circuit.gates.iter().map(|g| parse_src(g.src.as_deref().unwrap()).unwrap().1).collect();
        assert!(kinds.is_superset(&BTreeSet::from(["init", "cond", "arith", "merge"])));
    }

    #[test]
    fn pointer_programs_are_rejected() {
        let p = parse("int f(int x, int* a) { *a := x; return x; }").unwrap();
        assert!(matches!(synthesize(&p, &InputDomain::full(), &SynthOptions::default()), Err(Error::Invalid(_))));
    }

    #[test]
    fn tally_round_trips() {
        let t = Tally { add: 1, sub: 2, mul: 3, div: 4, cmp: 5, if_else: 6 };
        assert_eq!(Tally::from_map(&t.to_map()).unwrap(), t);
        let mut bad = t.to_map();
        bad.insert("mod".into(), 1);
        assert!(Tally::from_map(&bad).is_err());
    }

    #[test]
    fn division_scratch_is_not_freed_twice() {
        // The divider frees its own scratch inside a predicate that is later undone.
        let src = "int f(int x, int y) { a := x; b := y; if ((x < (x / x)) or ((y * 0) < x)) { \
                   if ((x <= x) and ((y + 1) != (0 * y))) { } else { b := 5; } } else { } return a * b; }";
        let flags = OptFlags { uncompute: true, share_immediates: true, parallel_copy: false };
        dist_matches_oracle(src, &InputDomain::full(), SynthOptions { flags, ..Default::default() });
    }
}
