//! Exact sparse statevector simulation. The state is a list of
//! (basis string, amplitude) pairs; permutation gates rewrite the basis
//! strings in place and only H/U3 need to merge amplitudes.

mod dist;

pub use dist::{Distribution, JointDistribution};

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::distributions::WeightedIndex;
use rand::distributions::Distribution as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use smallvec::SmallVec;

use crate::circuit::{Circuit, Gate, Op};
use crate::{Error, Result};

/// Amplitudes below this magnitude are dropped after merging gates.
pub const PRUNE: f64 = 1e-12;

pub type Basis = SmallVec<[u64; 4]>;

/// Initial content of one group of registers: a list of value tuples with
/// integer weights, prepared as `sum_i sqrt(w_i / W) |tuple_i>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub registers: Vec<Vec<usize>>,
    pub entries: Vec<(Vec<u64>, u64)>,
}

impl Factor {
    /// Uniform superposition over `values` on one register.
    pub fn uniform(register: Vec<usize>, values: &[u64]) -> Self {
        Factor { registers: vec![register], entries: values.iter().map(|&v| (vec![v], 1)).collect() }
    }

    pub fn weighted(registers: Vec<Vec<usize>>, entries: Vec<(Vec<u64>, u64)>) -> Self {
        Factor { registers, entries }
    }

    fn weight(&self) -> u64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    n: usize,
    entries: Vec<(Basis, Complex64)>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

#[inline]
fn bit(b: &Basis, q: usize) -> bool {
    (b[q / 64] >> (q % 64)) & 1 == 1
}

#[inline]
fn flip(b: &mut Basis, q: usize) {
    b[q / 64] ^= 1 << (q % 64);
}

#[inline]
fn controls_set(b: &Basis, controls: &[usize]) -> bool {
    controls.iter().all(|&c| bit(b, c))
}

/// Value of `reg` (least significant qubit first) in basis string `b`.
pub fn read(b: &Basis, reg: &[usize]) -> u64 {
    reg.iter().enumerate().fold(0, |acc, (i, &q)| acc | (u64::from(bit(b, q)) << i))
}

impl SparseState {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Self {
        let basis: Basis = SmallVec::from_elem(0, words(n));
        SparseState { n, entries: vec![(basis, Complex64::new(1.0, 0.0))] }
    }

    /// Tensor product of the given factors, all other qubits zero.
    pub fn init(n: usize, factors: &[Factor]) -> Result<Self> {
        let mut used = vec![false; n];
        for f in factors {
            for reg in &f.registers {
                for &q in reg {
                    if q >= n {
                        return Err(Error::Config(format!("qubit {q} out of range ({n} qubits)")));
                    }
                    if std::mem::replace(&mut used[q], true) {
                        return Err(Error::Config(format!("qubit {q} initialized twice")));
                    }
                }
            }
            for (vals, _) in &f.entries {
                if vals.len() != f.registers.len() {
                    return Err(Error::Config("tuple arity does not match registers".into()));
                }
                for (v, reg) in vals.iter().zip(&f.registers) {
                    if reg.len() < 64 && *v >> reg.len() != 0 {
                        return Err(Error::Config(format!("value {v} does not fit in {} qubits", reg.len())));
                    }
                }
            }
            if f.weight() == 0 {
                return Err(Error::Config("factor has no weight".into()));
            }
        }
        let mut state = SparseState::zero(n);
        for f in factors {
            let total = f.weight() as f64;
            let mut next = Vec::with_capacity(state.entries.len() * f.entries.len());
            for (basis, amp) in &state.entries {
                for (vals, w) in f.entries.iter().filter(|(_, w)| *w > 0) {
                    let mut b = basis.clone();
                    for (v, reg) in vals.iter().zip(&f.registers) {
                        for (i, &q) in reg.iter().enumerate() {
                            if (v >> i) & 1 == 1 {
                                flip(&mut b, q);
                            }
                        }
                    }
                    next.push((b, amp * (*w as f64 / total).sqrt()));
                }
            }
            state.entries = next;
        }
        state.entries.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(state)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(Basis, Complex64)] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut Vec<(Basis, Complex64)> {
        &mut self.entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Amplitude of the basis state given as a list of set qubits.
    pub fn amplitude(&self, basis: &Basis) -> Complex64 {
        self.entries.iter().find(|(b, _)| b == basis).map_or(Complex64::new(0.0, 0.0), |(_, a)| *a)
    }

    pub fn sort(&mut self) {
        self.entries.sort_by(|a, b| a.0.cmp(&b.0));
    }

    pub fn apply(&mut self, g: &Gate) {
        match g.op {
            Op::X => {
                let t = g.targets[0];
                for (b, _) in self.entries.iter_mut() {
                    if controls_set(b, &g.controls) {
                        flip(b, t);
                    }
                }
            }
            Op::Swap => {
                let (p, q) = (g.targets[0], g.targets[1]);
                for (b, _) in self.entries.iter_mut() {
                    if controls_set(b, &g.controls) && bit(b, p) != bit(b, q) {
                        flip(b, p);
                        flip(b, q);
                    }
                }
            }
            Op::Phase(theta) => {
                let t = g.targets[0];
                let w = Complex64::from_polar(1.0, theta);
                for (b, a) in self.entries.iter_mut() {
                    if controls_set(b, &g.controls) && bit(b, t) {
                        *a *= w;
                    }
                }
            }
            Op::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let one = Complex64::new(s, 0.0);
                self.mix(g, [[one, one], [one, -one]]);
            }
            Op::U3(theta, phi, lambda) => {
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                let m = [
                    [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
                    [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
                ];
                self.mix(g, m);
            }
        }
    }

    /// Applies a controlled 2x2 matrix `m[out][in]` on the target qubit.
    fn mix(&mut self, g: &Gate, m: [[Complex64; 2]; 2]) {
        let t = g.targets[0];
        let mut index: HashMap<Basis, usize> = HashMap::with_capacity(self.entries.len() * 2);
        let mut out: Vec<(Basis, Complex64)> = Vec::with_capacity(self.entries.len() * 2);
        let mut add = |b: Basis, a: Complex64, out: &mut Vec<(Basis, Complex64)>| match index.get(&b) {
            Some(&i) => out[i].1 += a,
            None => {
                index.insert(b.clone(), out.len());
                out.push((b, a));
            }
        };
        for (b, a) in self.entries.drain(..) {
            if !controls_set(&b, &g.controls) {
                add(b, a, &mut out);
                continue;
            }
            let input = usize::from(bit(&b, t));
            let mut zero = b.clone();
            if input == 1 {
                flip(&mut zero, t);
            }
            let mut one = zero.clone();
            flip(&mut one, t);
            add(zero, m[0][input] * a, &mut out);
            add(one, m[1][input] * a, &mut out);
        }
        out.retain(|(_, a)| a.norm() >= PRUNE);
        out.sort_by(|a, b| a.0.cmp(&b.0));
        self.entries = out;
    }

    pub fn marginal(&self, reg: &[usize]) -> Distribution {
        let mut probs = BTreeMap::new();
        for (b, a) in &self.entries {
            *probs.entry(read(b, reg)).or_insert(0.0) += a.norm_sqr();
        }
        Distribution { probs }
    }

    pub fn joint(&self, regs: &[Vec<usize>]) -> JointDistribution {
        let mut probs = BTreeMap::new();
        for (b, a) in &self.entries {
            let key: Vec<u64> = regs.iter().map(|r| read(b, r)).collect();
            *probs.entry(key).or_insert(0.0) += a.norm_sqr();
        }
        JointDistribution { probs }
    }

    /// `shots` independent measurements of `regs`, reproducible for a seed.
    pub fn sample(&self, regs: &[Vec<usize>], shots: usize, seed: u64) -> BTreeMap<Vec<u64>, usize> {
        let joint = self.joint(regs);
        let keys: Vec<&Vec<u64>> = joint.probs.keys().collect();
        let mut counts = BTreeMap::new();
        let Ok(dist) = WeightedIndex::new(joint.probs.values().copied()) else {
            return counts;
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..shots {
            *counts.entry(keys[dist.sample(&mut rng)].clone()).or_insert(0) += 1;
        }
        counts
    }

    /// `[{"basis","re","im"}]` sorted by basis; qubit 0 is the rightmost
    /// character.
    pub fn to_json(&self) -> Value {
        let mut rows: Vec<(String, Complex64)> = self
            .entries
            .iter()
            .map(|(b, a)| ((0..self.n).rev().map(|q| if bit(b, q) { '1' } else { '0' }).collect(), *a))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        Value::Array(rows.into_iter().map(|(s, a)| json!({"basis": s, "re": a.re, "im": a.im})).collect())
    }
}

/// Runs `c` on `s0` gate by gate.
pub fn run(c: &Circuit, s0: &SparseState) -> SparseState {
    let mut s = s0.clone();
    for g in &c.gates {
        s.apply(g);
    }
    s
}

/// Like [`run`] but fails once the support grows past `cap` states.
pub fn run_capped(c: &Circuit, s0: &SparseState, cap: usize) -> Result<SparseState> {
    let mut s = s0.clone();
    for g in &c.gates {
        s.apply(g);
        if s.support() > cap {
            return Err(Error::Support(s.support()));
        }
    }
    Ok(s)
}

/// Basis string with the given qubits set.
pub fn basis_of(n: usize, ones: &[usize]) -> Basis {
    let mut b: Basis = SmallVec::from_elem(0, words(n));
    for &q in ones {
        flip(&mut b, q);
    }
    b
}
