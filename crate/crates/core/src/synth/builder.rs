//! Qubit allocation, gate emission with branch-control lifting, immediate
//! registers and the reversible arithmetic primitives.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;
use std::sync::Arc;

use super::{ArithBackend, SynthOptions};
use crate::circuit::{Circuit, Gate, Op, Register, Role};
use crate::lang::Span;
use crate::{Error, Result};

pub(super) type Reg = Vec<usize>;

/// Position in the gate list and allocation log, used to undo a predicate.
#[derive(Debug, Clone, Copy)]
pub(super) struct Mark {
    pub gates: usize,
    pub allocs: usize,
    pub imms: usize,
    pub shared: Option<u64>,
}

pub(super) struct Builder {
    pub opts: SynthOptions,
    /// Register width `m + 1`.
    pub w: usize,
    pub circuit: Circuit,
    free: BTreeSet<usize>,
    names: HashMap<String, usize>,
    /// Allocations in order, for undoing predicate scratch.
    alloc_log: Vec<Reg>,
    imm: HashMap<(Span, u64), Reg>,
    imm_log: Vec<(Span, u64)>,
    shared: Option<(Reg, u64)>,
    pub src: Option<Arc<str>>,
    /// Control qubit of the enclosing branch or loop iteration.
    pub ctx: Option<usize>,
    /// Whether [`Builder::g`] adds `ctx` as a control.
    pub lift: bool,
    /// False once a gate that can create negative or complex amplitudes
    /// has been emitted after input preparation.
    pub nonneg: bool,
    pub diagnostics: Vec<String>,
}

impl Builder {
    pub fn new(opts: SynthOptions) -> Self {
        Builder {
            w: opts.m as usize + 1,
            opts,
            circuit: Circuit::new(0),
            free: BTreeSet::new(),
            names: HashMap::new(),
            alloc_log: Vec::new(),
            imm: HashMap::new(),
            imm_log: Vec::new(),
            shared: None,
            src: None,
            ctx: None,
            lift: true,
            nonneg: true,
            diagnostics: Vec::new(),
        }
    }

    pub fn set_src(&mut self, span: Span, kind: &str) {
        self.src = Some(Arc::from(format!("L{}:{}:{kind}", span.line, span.col)));
    }

    fn unique(&mut self, base: &str) -> String {
        let n = self.names.entry(base.to_string()).or_insert(0);
        *n += 1;
        if *n == 1 {
            base.to_string()
        } else {
            format!("{base}#{n}")
        }
    }

    pub fn alloc(&mut self, n: usize, role: Role, name: &str) -> Result<Reg> {
        let mut qs = Vec::with_capacity(n);
        for _ in 0..n {
            let q = match self.free.pop_first() {
                Some(q) => q,
                None => {
                    let q = self.circuit.qubits;
                    if q >= self.opts.qubit_budget {
                        return Err(Error::Budget(self.opts.qubit_budget));
                    }
                    self.circuit.qubits += 1;
                    q
                }
            };
            qs.push(q);
        }
        let name = self.unique(name);
        self.circuit.registers.push(Register { name, role, qubits: qs.clone() });
        self.alloc_log.push(qs.clone());
        Ok(qs)
    }

    /// Returns qubits (known to be |0>) to the pool.
    pub fn release(&mut self, qs: &[usize]) {
        let set: BTreeSet<usize> = qs.iter().copied().collect();
        self.circuit.registers.retain(|r| !r.qubits.iter().all(|q| set.contains(q)));
        for r in self.circuit.registers.iter_mut() {
            r.qubits.retain(|q| !set.contains(q));
        }
        // A later undo must not free these a second time.
        for r in self.alloc_log.iter_mut() {
            r.retain(|q| !set.contains(q));
        }
        self.free.extend(set);
    }

    fn push(&mut self, mut gate: Gate) {
        debug_assert!(
            {
                let mut all: Vec<usize> = gate.controls.iter().chain(&gate.targets).copied().collect();
                all.sort_unstable();
                all.windows(2).all(|w| w[0] != w[1])
            },
            "gate touches a qubit twice: {gate:?}"
        );
        gate.src = self.src.clone();
        if matches!(gate.op, Op::Phase(_) | Op::U3(..) | Op::H) {
            self.nonneg = false;
        }
        self.circuit.gates.push(gate);
    }

    /// Emits a gate, adding the branch control when lifting is on.
    pub fn g(&mut self, gate: Gate) {
        match (self.lift, self.ctx) {
            (true, Some(c)) => self.push(gate.lifted(c)),
            _ => self.push(gate),
        }
    }

    /// Emits a gate exactly as given.
    pub fn raw(&mut self, gate: Gate) {
        self.push(gate);
    }

    /// Input preparation; does not count against the non-negativity check.
    pub fn init_h(&mut self, q: usize) {
        let mut gate = Gate::h(q);
        gate.src = self.src.clone();
        self.circuit.gates.push(gate);
    }

    pub fn mark(&self) -> Mark {
        Mark {
            gates: self.circuit.gates.len(),
            allocs: self.alloc_log.len(),
            imms: self.imm_log.len(),
            shared: self.shared.as_ref().map(|s| s.1),
        }
    }

    /// Appends the inverse of the gates emitted between `from` and `to` and
    /// frees the qubits allocated in that span. Only done when every gate is
    /// a basis permutation and the state so far has non-negative real
    /// amplitudes.
    pub fn uncompute(&mut self, from: Mark, to: Mark, what: &str) -> bool {
        match self.uncompute_held(from, to, what) {
            Some(freed) => {
                self.release(&freed);
                true
            }
            None => false,
        }
    }

    /// Like `uncompute`, but hands the cleared qubits back to the caller
    /// instead of the pool.
    pub fn uncompute_held(&mut self, from: Mark, to: Mark, what: &str) -> Option<Vec<usize>> {
        let span = &self.circuit.gates[from.gates..to.gates];
        if !self.nonneg || span.iter().any(|g| !g.op.is_permutation()) {
            let at = self.src.as_deref().unwrap_or("?").to_string();
            self.diagnostics.push(format!(
                "{at}: uncompute of {what} skipped: sub-circuit or state is not restricted to non-negative permutation gates"
            ));
            return None;
        }
        let inverse: Vec<Gate> = span.iter().rev().map(Gate::inverse).collect();
        for g in inverse {
            self.raw(g);
        }
        let freed: Vec<usize> = self.alloc_log.drain(from.allocs..to.allocs).flatten().collect();
        for key in self.imm_log.drain(from.imms..to.imms).collect::<Vec<_>>() {
            self.imm.remove(&key);
        }
        if let (Some((_, cur)), Some(before)) = (self.shared.as_mut(), from.shared) {
            *cur = before;
        } else if let (Some((_, cur)), None) = (self.shared.as_mut(), from.shared) {
            *cur = 0;
        }
        Some(freed)
    }

    /// Register holding the constant `value`. One register per literal
    /// occurrence, or a single register re-targeted with X gates when
    /// immediates are shared.
    pub fn imm(&mut self, at: Span, value: u64) -> Result<Reg> {
        if self.opts.flags.share_immediates {
            if self.shared.is_none() {
                let saved_log = self.alloc_log.len();
                let reg = self.alloc(self.w, Role::Immediate, "imm")?;
                // The shared register outlives any predicate undo.
                self.alloc_log.truncate(saved_log);
                self.shared = Some((reg, 0));
            }
            let (reg, cur) = self.shared.clone().expect("allocated above");
            for (i, &q) in reg.iter().enumerate() {
                if ((cur ^ value) >> i) & 1 == 1 {
                    self.raw(Gate::x(q));
                }
            }
            self.shared.as_mut().expect("allocated above").1 = value;
            return Ok(reg);
        }
        if let Some(r) = self.imm.get(&(at, value)) {
            return Ok(r.clone());
        }
        let reg = self.alloc(self.w, Role::Immediate, &format!("imm{value}"))?;
        for (i, &q) in reg.iter().enumerate() {
            if (value >> i) & 1 == 1 {
                self.raw(Gate::x(q));
            }
        }
        self.imm.insert((at, value), reg.clone());
        self.imm_log.push((at, value));
        Ok(reg)
    }

    // ---- arithmetic primitives; `ctl` are controls beyond the branch context ----

    pub fn copy(&mut self, dest: &[usize], src: &[usize]) {
        for (&d, &s) in dest.iter().zip(src) {
            self.g(Gate::cx(s, d));
        }
    }

    /// Sets `dest` (zero) to the constant `value`.
    pub fn set_const(&mut self, dest: &[usize], value: u64) {
        for (i, &q) in dest.iter().enumerate() {
            if (value >> i) & 1 == 1 {
                self.g(Gate::x(q));
            }
        }
    }

    /// `t += 1` modulo `2^len(t)`.
    pub fn inc(&mut self, t: &[usize], ctl: &[usize]) {
        for k in (0..t.len()).rev() {
            let mut c = ctl.to_vec();
            c.extend_from_slice(&t[..k]);
            self.g(Gate::mcx(c, t[k]));
        }
    }

    /// `t -= 1` modulo `2^len(t)`.
    pub fn dec(&mut self, t: &[usize], ctl: &[usize]) {
        for k in 0..t.len() {
            let mut c = ctl.to_vec();
            c.extend_from_slice(&t[..k]);
            self.g(Gate::mcx(c, t[k]));
        }
    }

    /// `dest += src` modulo `2^len(dest)`; `src` is preserved.
    pub fn add(&mut self, dest: &[usize], src: &[usize], ctl: &[usize]) {
        if self.opts.backend == ArithBackend::Fourier {
            return self.fourier_add(dest, src, ctl, 1.0);
        }
        for (j, &b) in src.iter().enumerate().take(dest.len()) {
            let mut c = ctl.to_vec();
            c.push(b);
            self.inc(&dest[j..], &c);
        }
    }

    /// `dest -= src` modulo `2^len(dest)`; `src` is preserved.
    pub fn sub(&mut self, dest: &[usize], src: &[usize], ctl: &[usize]) {
        if self.opts.backend == ArithBackend::Fourier {
            return self.fourier_add(dest, src, ctl, -1.0);
        }
        for (j, &b) in src.iter().enumerate().take(dest.len()) {
            let mut c = ctl.to_vec();
            c.push(b);
            self.dec(&dest[j..], &c);
        }
    }

    /// `dest (zero) = a * b` by shift-and-add.
    pub fn mul(&mut self, dest: &[usize], a: &[usize], b: &[usize]) {
        let n = dest.len();
        for (i, &bi) in b.iter().enumerate().take(n) {
            for (j, &aj) in a.iter().enumerate().take(n - i) {
                self.inc(&dest[i + j..], &[bi, aj]);
            }
        }
    }

    /// `dest (zero) = a / b` by restoring division, with `x / 0 = 0`.
    /// Leaves a copy of the remainder work space allocated.
    pub fn div(&mut self, dest: &[usize], a: &[usize], b: &[usize]) -> Result<()> {
        let w = dest.len();
        let y = self.alloc(2 * w, Role::Scratch, "div_work")?;
        self.copy(&y[..w], a);
        let bz = self.alloc(1, Role::Scratch, "div_zero")?[0];
        for &q in b {
            self.g(Gate::x(q));
        }
        self.g(Gate::mcx(b.to_vec(), bz));
        for &q in b {
            self.g(Gate::x(q));
        }
        for i in (0..w).rev() {
            let window = &y[i..=i + w];
            let s = self.alloc(w + 2, Role::Scratch, "div_cmp")?;
            let start = self.circuit.gates.len();
            self.copy(&s[..=w], window);
            self.sub(&s, b, &[]);
            let end = self.circuit.gates.len();
            let borrow = s[w + 1];
            self.g(Gate::x(borrow));
            self.g(Gate::x(bz));
            self.g(Gate::mcx(vec![borrow, bz], dest[i]));
            self.g(Gate::x(bz));
            self.g(Gate::x(borrow));
            let undo: Vec<Gate> = self.circuit.gates[start..end].iter().rev().map(Gate::inverse).collect();
            for g in undo {
                self.raw(g);
            }
            self.release(&s);
            self.sub(window, b, &[dest[i]]);
        }
        Ok(())
    }

    /// Draper adder: QFT on `dest`, controlled phase rotations from `src`,
    /// inverse QFT. Only the rotations are lifted by the branch control.
    fn fourier_add(&mut self, dest: &[usize], src: &[usize], ctl: &[usize], sign: f64) {
        let n = dest.len();
        let qft = qft_gates(dest);
        for g in &qft {
            self.raw(g.clone());
        }
        for (j, &b) in src.iter().enumerate() {
            for (k, &d) in dest.iter().enumerate() {
                if j + k >= n {
                    continue;
                }
                let theta = sign * 2.0 * PI * (1u64 << (j + k)) as f64 / (1u64 << n) as f64;
                let mut c = ctl.to_vec();
                c.push(b);
                self.g(Gate::new(Op::Phase(theta), c, vec![d]));
            }
        }
        for g in qft.iter().rev() {
            self.raw(g.inverse());
        }
    }
}

/// Quantum Fourier transform on a little-endian register, mapping `|x>` to
/// `sum_y exp(2 pi i x y / 2^n) |y>` (normalized).
fn qft_gates(q: &[usize]) -> Vec<Gate> {
    let n = q.len();
    let mut out = Vec::new();
    for j in (0..n).rev() {
        out.push(Gate::h(q[j]));
        for k in (0..j).rev() {
            out.push(Gate::new(Op::Phase(PI / (1u64 << (j - k)) as f64), vec![q[k]], vec![q[j]]));
        }
    }
    for i in 0..n / 2 {
        out.push(Gate::swap(q[i], q[n - 1 - i]));
    }
    out
}
