//! Lowering of statements, predicates and expressions onto the builder.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::builder::{Builder, Reg};
use super::{InputInit, InputReg, SynthOptions, SynthResult, Tally};
use crate::circuit::{Gate, Role};
use crate::classical::DomainSpec;
use crate::lang::{
    validate, Backend, BinOp, Block, Expr, ExprKind, Pred, PredKind, Program, RelOp, Span, Stmt,
    StmtKind, RETURN_VAR,
};
use crate::{word_mask, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PredVal {
    Const(bool),
    Qubit(usize),
}

#[derive(Debug, Clone)]
enum Operand {
    Const(u64),
    Reg(Reg, u64),
}

struct Compiler {
    b: Builder,
    m: u32,
    mask: u64,
    layout: BTreeMap<String, Reg>,
    ub: BTreeMap<String, u64>,
    history: BTreeMap<String, Vec<Reg>>,
    tally: Tally,
}

pub(super) fn compile(p: &Program, init: InputInit, opts: SynthOptions) -> Result<SynthResult> {
    let violations = validate(p, Backend::Quantum, opts.m);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let mut c = Compiler {
        b: Builder::new(opts),
        m: opts.m,
        mask: word_mask(opts.m),
        layout: BTreeMap::new(),
        ub: BTreeMap::new(),
        history: BTreeMap::new(),
        tally: Tally::default(),
    };
    let inputs = c.inputs(p, &init)?;
    c.block(&p.body, &HashMap::new())?;
    if let Some(r) = &p.ret {
        match &r.kind {
            ExprKind::Var(v) => {
                let reg = c.var(v)?;
                c.layout.insert(RETURN_VAR.to_string(), reg);
            }
            _ => {
                c.b.set_src(r.span, kind_of(r));
                c.assign(RETURN_VAR, r, None)?;
            }
        }
    }
    Ok(SynthResult {
        program: p.clone(),
        opts,
        init,
        circuit: c.b.circuit,
        layout: c.layout,
        history: c.history,
        inputs,
        tally: c.tally,
        diagnostics: c.b.diagnostics,
    })
}

fn kind_of(e: &Expr) -> &'static str {
    match e.kind {
        ExprKind::Var(_) => "copy",
        ExprKind::Num(_) => "const",
        ExprKind::Bin(..) => "arith",
    }
}

fn bits(k: usize) -> usize {
    (usize::BITS - k.leading_zeros()) as usize
}

impl Compiler {
    fn inputs(&mut self, p: &Program, init: &InputInit) -> Result<Vec<InputReg>> {
        let names: Vec<String> = p.int_params().map(str::to_string).collect();
        let specs: Vec<DomainSpec> = match init {
            InputInit::Domain(dom) => names.iter().map(|n| dom.spec(n)).collect(),
            InputInit::Joint { tuples } => {
                if tuples.is_empty() {
                    return Err(Error::Domain("no input tuples".into()));
                }
                (0..names.len())
                    .map(|i| {
                        let vals = tuples
                            .iter()
                            .map(|(t, _)| {
                                t.get(i).copied().ok_or_else(|| {
                                    Error::Domain(format!("tuple {t:?} has no entry for `{}`", names[i]))
                                })
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok(DomainSpec::Set(vals))
                    })
                    .collect::<Result<_>>()?
            }
        };
        let mut out = Vec::new();
        for (name, spec) in names.into_iter().zip(specs) {
            spec.check(self.m)
                .map_err(|e| Error::AtInput { input: name.clone(), source: Box::new(e) })?;
            self.b.set_src(p.span, "init");
            let reg = self.b.alloc(self.b.w, Role::Variable, &name)?;
            if spec == DomainSpec::Full && matches!(init, InputInit::Domain(_)) {
                for &q in &reg[..self.m as usize] {
                    self.b.init_h(q);
                }
            }
            self.ub.insert(name.clone(), spec.hull(self.m).1);
            self.layout.insert(name.clone(), reg.clone());
            out.push(InputReg { name, qubits: reg, spec });
        }
        Ok(out)
    }

    fn var(&self, v: &str) -> Result<Reg> {
        self.layout.get(v).cloned().ok_or_else(|| Error::Unbound(v.to_string()))
    }

    fn set_var(&mut self, v: &str, reg: Reg, ub: u64) {
        if let Some(old) = self.layout.insert(v.to_string(), reg.clone()) {
            if old != reg {
                self.history.entry(v.to_string()).or_default().push(old);
            }
        }
        self.ub.insert(v.to_string(), ub.min(self.mask));
    }

    fn block(&mut self, b: &Block, hints: &HashMap<usize, Reg>) -> Result<()> {
        for (i, s) in b.iter().enumerate() {
            self.stmt(s, hints.get(&i).cloned())?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt, hint: Option<Reg>) -> Result<()> {
        match &s.kind {
            StmtKind::Assign { var, expr, .. } => {
                self.b.set_src(s.span, kind_of(expr));
                self.tally_expr(expr);
                self.assign(var, expr, hint)
            }
            StmtKind::If { cond, then_block, else_block } => {
                self.if_else(s.span, cond, then_block, else_block)
            }
            StmtKind::While { cond, body } => self.while_loop(s.span, cond, body),
            _ => Err(Error::Config(format!("{}: pointer statement in quantum backend", s.span))),
        }
    }

    fn tally_expr(&mut self, e: &Expr) {
        if let ExprKind::Bin(op, a, b) = &e.kind {
            match op {
                BinOp::Add => self.tally.add += 1,
                BinOp::Sub => self.tally.sub += 1,
                BinOp::Mul => self.tally.mul += 1,
                BinOp::Div => self.tally.div += 1,
            }
            self.tally_expr(a);
            self.tally_expr(b);
        }
    }

    fn tally_pred(&mut self, p: &Pred) {
        match &p.kind {
            PredKind::True | PredKind::False => {}
            PredKind::Not(a) => self.tally_pred(a),
            PredKind::And(a, b) | PredKind::Or(a, b) => {
                self.tally_pred(a);
                self.tally_pred(b);
            }
            PredKind::Rel(_, a, b) => {
                self.tally.cmp += 1;
                self.tally_expr(a);
                self.tally_expr(b);
            }
        }
    }

    /// Splits `v := v + e`, `v := e + v` and `v := v - e` into the operator
    /// and the other operand, when `e` does not read `v`.
    fn in_place<'e>(&self, v: &str, e: &'e Expr) -> Option<(BinOp, &'e Expr)> {
        if !self.layout.contains_key(v) {
            return None;
        }
        let ExprKind::Bin(op, a, b) = &e.kind else { return None };
        let is_v = |x: &Expr| matches!(&x.kind, ExprKind::Var(n) if n == v);
        match op {
            BinOp::Add | BinOp::Sub if is_v(a) && !b.mentions(v) => Some((*op, b)),
            BinOp::Add if is_v(b) && !a.mentions(v) => Some((BinOp::Add, a)),
            _ => None,
        }
    }

    fn assign(&mut self, v: &str, e: &Expr, hint: Option<Reg>) -> Result<()> {
        if hint.is_none() {
            if let Some((op, rhs)) = self.in_place(v, e) {
                let dest = self.var(v)?;
                let old_ub = self.ub.get(v).copied().unwrap_or(self.mask);
                let (src, rub) = match self.operand(rhs)? {
                    Operand::Const(0) => return Ok(()),
                    Operand::Const(c) => (self.b.imm(e.span, c)?, c),
                    Operand::Reg(r, u) => (r, u),
                };
                let ub = match op {
                    BinOp::Add => old_ub.saturating_add(rub).min(self.mask),
                    _ => self.mask,
                };
                if op == BinOp::Add {
                    self.b.add(&dest, &src, &[]);
                } else {
                    self.b.sub(&dest, &src, &[]);
                }
                self.ub.insert(v.to_string(), ub);
                return Ok(());
            }
        }
        let (reg, ub) = self.expr_into(e, hint, v)?;
        self.set_var(v, reg, ub);
        Ok(())
    }

    fn fold(&self, e: &Expr) -> Option<u64> {
        match &e.kind {
            ExprKind::Num(n) => Some(*n),
            ExprKind::Var(_) => None,
            ExprKind::Bin(op, a, b) => {
                let (x, y) = (self.fold(a)?, self.fold(b)?);
                let r = match op {
                    BinOp::Add => x.wrapping_add(y),
                    BinOp::Sub => x.wrapping_sub(y),
                    BinOp::Mul => x.wrapping_mul(y),
                    BinOp::Div => x.checked_div(y).unwrap_or(0),
                };
                Some(r & self.mask)
            }
        }
    }

    /// Value of `e` without copying variables.
    fn operand(&mut self, e: &Expr) -> Result<Operand> {
        if let Some(c) = self.fold(e) {
            return Ok(Operand::Const(c));
        }
        match &e.kind {
            ExprKind::Var(v) => {
                let ub = self.ub.get(v.as_str()).copied().unwrap_or(self.mask);
                Ok(Operand::Reg(self.var(v)?, ub))
            }
            _ => {
                let (r, ub) = self.expr_into(e, None, "tmp")?;
                Ok(Operand::Reg(r, ub))
            }
        }
    }

    fn as_reg(&mut self, at: Span, o: Operand) -> Result<Reg> {
        match o {
            Operand::Reg(r, _) => Ok(r),
            Operand::Const(c) => self.b.imm(at, c),
        }
    }

    /// Computes `e` into a fresh register (or into `dest`, which is zero
    /// wherever the current control is set).
    fn expr_into(&mut self, e: &Expr, dest: Option<Reg>, name: &str) -> Result<(Reg, u64)> {
        let w = self.b.w;
        let fresh = |c: &mut Compiler| match dest.clone() {
            Some(r) => Ok(r),
            None => c.b.alloc(w, Role::Variable, name),
        };
        if let Some(c) = self.fold(e) {
            let r = fresh(self)?;
            self.b.set_const(&r, c);
            return Ok((r, c));
        }
        let (op, a, b) = match &e.kind {
            ExprKind::Var(v) => {
                let src = self.var(v)?;
                let ub = self.ub.get(v.as_str()).copied().unwrap_or(self.mask);
                let r = fresh(self)?;
                self.b.copy(&r, &src);
                return Ok((r, ub));
            }
            ExprKind::Bin(op, a, b) => (*op, a, b),
            ExprKind::Num(_) => unreachable!("folded above"),
        };
        let oa = self.operand(a)?;
        let ob = self.operand(b)?;
        let ub_of = |o: &Operand| match o {
            Operand::Const(c) => *c,
            Operand::Reg(_, u) => *u,
        };
        let (ua, ubb) = (ub_of(&oa), ub_of(&ob));
        let mask = self.mask;
        match op {
            BinOp::Add => {
                let r = fresh(self)?;
                let (x, y) = match (oa, ob) {
                    (Operand::Const(c), reg) | (reg, Operand::Const(c)) => (reg, Operand::Const(c)),
                    pair => pair,
                };
                let x = self.as_reg(e.span, x)?;
                self.b.copy(&r, &x);
                if !matches!(y, Operand::Const(0)) {
                    let y = self.as_reg(e.span, y)?;
                    self.b.add(&r, &y, &[]);
                }
                Ok((r, ua.saturating_add(ubb).min(mask)))
            }
            BinOp::Sub => {
                let r = fresh(self)?;
                match oa {
                    Operand::Const(c) => self.b.set_const(&r, c),
                    Operand::Reg(x, _) => self.b.copy(&r, &x),
                }
                if !matches!(ob, Operand::Const(0)) {
                    let y = self.as_reg(e.span, ob)?;
                    self.b.sub(&r, &y, &[]);
                }
                Ok((r, mask))
            }
            BinOp::Mul => {
                let x = self.as_reg(e.span, oa)?;
                let mut y = self.as_reg(e.span, ob)?;
                if x == y {
                    let t = self.b.alloc(w, Role::Scratch, "mul_copy")?;
                    self.b.copy(&t, &y);
                    y = t;
                }
                let r = fresh(self)?;
                self.b.mul(&r, &x, &y);
                Ok((r, ua.saturating_mul(ubb).min(mask)))
            }
            BinOp::Div => {
                let x = self.as_reg(e.span, oa)?;
                let y = self.as_reg(e.span, ob)?;
                let r = fresh(self)?;
                self.b.div(&r, &x, &y)?;
                Ok((r, ua))
            }
        }
    }

    /// Evaluates a predicate into a scratch qubit; gates are not lifted.
    fn pred(&mut self, p: &Pred) -> Result<PredVal> {
        match &p.kind {
            PredKind::True => Ok(PredVal::Const(true)),
            PredKind::False => Ok(PredVal::Const(false)),
            PredKind::Not(a) => Ok(match self.pred(a)? {
                PredVal::Const(v) => PredVal::Const(!v),
                PredVal::Qubit(q) => {
                    self.b.raw(Gate::x(q));
                    PredVal::Qubit(q)
                }
            }),
            PredKind::And(a, b) => {
                let (x, y) = (self.pred(a)?, self.pred(b)?);
                Ok(match (x, y) {
                    (PredVal::Const(false), _) | (_, PredVal::Const(false)) => PredVal::Const(false),
                    (PredVal::Const(true), v) | (v, PredVal::Const(true)) => v,
                    (PredVal::Qubit(qa), PredVal::Qubit(qb)) => {
                        let r = self.b.alloc(1, Role::Scratch, "and")?[0];
                        self.b.raw(Gate::ccx(qa, qb, r));
                        PredVal::Qubit(r)
                    }
                })
            }
            PredKind::Or(a, b) => {
                let (x, y) = (self.pred(a)?, self.pred(b)?);
                Ok(match (x, y) {
                    (PredVal::Const(true), _) | (_, PredVal::Const(true)) => PredVal::Const(true),
                    (PredVal::Const(false), v) | (v, PredVal::Const(false)) => v,
                    (PredVal::Qubit(qa), PredVal::Qubit(qb)) => {
                        let r = self.b.alloc(1, Role::Scratch, "or")?[0];
                        self.b.raw(Gate::x(qa));
                        self.b.raw(Gate::x(qb));
                        self.b.raw(Gate::ccx(qa, qb, r));
                        self.b.raw(Gate::x(r));
                        self.b.raw(Gate::x(qb));
                        self.b.raw(Gate::x(qa));
                        PredVal::Qubit(r)
                    }
                })
            }
            PredKind::Rel(op, a, b) => {
                let oa = self.operand(a)?;
                let ob = self.operand(b)?;
                match (oa, ob) {
                    (Operand::Const(x), Operand::Const(y)) => Ok(PredVal::Const(op.eval(x, y))),
                    (Operand::Reg(x, u), Operand::Const(c)) => self.rel_const(p.span, &x, u, *op, c),
                    (Operand::Const(c), Operand::Reg(x, u)) => {
                        self.rel_const(p.span, &x, u, op.flipped(), c)
                    }
                    (Operand::Reg(x, _), Operand::Reg(y, _)) => match op {
                        RelOp::Ge => self.ge_reg(&x, &y),
                        RelOp::Le => self.ge_reg(&y, &x),
                        RelOp::Lt => self.ge_reg(&x, &y).map(|v| self.negate(v)),
                        RelOp::Gt => self.ge_reg(&y, &x).map(|v| self.negate(v)),
                    },
                }
            }
        }
    }

    fn negate(&mut self, v: PredVal) -> PredVal {
        match v {
            PredVal::Const(b) => PredVal::Const(!b),
            PredVal::Qubit(q) => {
                self.b.raw(Gate::x(q));
                PredVal::Qubit(q)
            }
        }
    }

    fn rel_const(&mut self, at: Span, x: &[usize], ub: u64, op: RelOp, c: u64) -> Result<PredVal> {
        let c1 = c.saturating_add(1);
        match op {
            RelOp::Ge => self.ge_const(at, x, ub, c),
            RelOp::Gt => self.ge_const(at, x, ub, c1),
            RelOp::Lt => self.ge_const(at, x, ub, c).map(|v| self.negate(v)),
            RelOp::Le => self.ge_const(at, x, ub, c1).map(|v| self.negate(v)),
        }
    }

    /// `x >= c`. When `x` fits in the value bits and `c <= 2^m`, adding
    /// `2^m - c` sets the sign bit exactly when `x >= c`; otherwise a
    /// one-bit-wider subtraction produces the borrow.
    fn ge_const(&mut self, at: Span, x: &[usize], ub: u64, c: u64) -> Result<PredVal> {
        if c == 0 {
            return Ok(PredVal::Const(true));
        }
        if c > self.mask {
            return Ok(PredVal::Const(false));
        }
        let w = self.b.w;
        let half = 1u64 << self.m;
        if ub < half && c <= half {
            let s = self.b.alloc(w, Role::Scratch, "cmp")?;
            self.b.copy(&s, x);
            let k = half - c;
            if k != 0 {
                let imm = self.b.imm(at, k)?;
                self.b.add(&s, &imm, &[]);
            }
            return Ok(PredVal::Qubit(s[self.m as usize]));
        }
        let imm = self.b.imm(at, c)?;
        self.ge_reg(x, &imm)
    }

    fn ge_reg(&mut self, x: &[usize], y: &[usize]) -> Result<PredVal> {
        let w = self.b.w;
        let s = self.b.alloc(w + 1, Role::Scratch, "cmp")?;
        self.b.copy(&s[..w], x);
        self.b.sub(&s, y, &[]);
        self.b.raw(Gate::x(s[w]));
        Ok(PredVal::Qubit(s[w]))
    }

    /// Computes the predicate unconditionally and returns its value together
    /// with the marks delimiting its gates.
    fn guard(&mut self, cond: &Pred) -> Result<(PredVal, super::builder::Mark, super::builder::Mark)> {
        self.tally_pred(cond);
        let lift = self.b.lift;
        self.b.lift = false;
        let from = self.b.mark();
        let v = self.pred(cond);
        self.b.lift = lift;
        let v = v?;
        Ok((v, from, self.b.mark()))
    }

    fn if_else(&mut self, span: Span, cond: &Pred, then_b: &Block, else_b: &Block) -> Result<()> {
        self.tally.if_else += 1;
        self.b.set_src(span, "cond");
        // Allocated first: the undo replays the predicate over every qubit
        // it touched, including scratch it freed along the way.
        let cq1 = self.b.alloc(1, Role::Control, "cq1")?[0];
        let (pv, from, to) = self.guard(cond)?;
        let outer = self.b.ctx;
        match (pv, outer) {
            (PredVal::Qubit(r), None) => self.b.raw(Gate::cx(r, cq1)),
            (PredVal::Qubit(r), Some(c)) => self.b.raw(Gate::ccx(c, r, cq1)),
            (PredVal::Const(true), None) => self.b.raw(Gate::x(cq1)),
            (PredVal::Const(true), Some(c)) => self.b.raw(Gate::cx(c, cq1)),
            (PredVal::Const(false), _) => {}
        }
        if self.b.opts.flags.uncompute {
            self.b.uncompute(from, to, "branch condition");
        }

        let before = self.layout.clone();
        let ub_before = self.ub.clone();

        let mut copies: BTreeMap<String, Reg> = BTreeMap::new();
        if self.b.opts.flags.parallel_copy && !else_b.is_empty() {
            let mut reads = BTreeSet::new();
            let mut writes = BTreeSet::new();
            for s in else_b {
                stmt_reads(s, &mut reads);
                s.assigned_into(&mut writes);
            }
            for v in reads.difference(&writes) {
                if let Some(src) = before.get(v) {
                    self.b.set_src(span, "copy");
                    let r = self.b.alloc(self.b.w, Role::Scratch, &format!("{v}_copy"))?;
                    for (&d, &s) in r.iter().zip(src) {
                        self.b.raw(Gate::cx(s, d));
                    }
                    copies.insert(v.clone(), r);
                }
            }
        }

        self.b.ctx = Some(cq1);
        let res = self.block(then_b, &HashMap::new());
        self.b.ctx = outer;
        res?;
        let after_then = std::mem::replace(&mut self.layout, before.clone());
        let ub_then = std::mem::replace(&mut self.ub, ub_before.clone());

        let changed_old = before.iter().any(|(v, r)| after_then.get(v) != Some(r));
        let cq2 = if !else_b.is_empty() || changed_old {
            let q = self.b.alloc(1, Role::Control, "cq2")?[0];
            self.b.set_src(span, "cond");
            match outer {
                None => {
                    self.b.raw(Gate::cx(cq1, q));
                    self.b.raw(Gate::x(q));
                }
                Some(c) => {
                    self.b.raw(Gate::cx(c, q));
                    self.b.raw(Gate::cx(cq1, q));
                }
            }
            Some(q)
        } else {
            None
        };

        let mut hints = HashMap::new();
        if self.b.opts.flags.share_immediates {
            let used: BTreeSet<&Reg> = before.values().collect();
            for (i, s) in else_b.iter().enumerate() {
                let StmtKind::Assign { var, expr, .. } = &s.kind else { continue };
                let Some(t) = after_then.get(var) else { continue };
                if used.contains(t) || after_then.iter().any(|(o, r)| o != var && r == t) {
                    continue;
                }
                let last = else_b[i + 1..].iter().all(|later| {
                    let mut w = BTreeSet::new();
                    later.assigned_into(&mut w);
                    !w.contains(var)
                });
                let inplace = self.layout.contains_key(var) && self.in_place(var, expr).is_some();
                if last && !inplace {
                    hints.insert(i, t.clone());
                }
            }
        }

        for (v, r) in &copies {
            self.layout.insert(v.clone(), r.clone());
        }
        self.b.ctx = cq2;
        let res = self.block(else_b, &hints);
        self.b.ctx = outer;
        res?;
        let mut after_else = std::mem::take(&mut self.layout);
        let ub_else = std::mem::take(&mut self.ub);
        for v in copies.keys() {
            after_else.insert(v.clone(), before[v].clone());
        }

        self.b.set_src(span, "merge");
        let mut names: BTreeSet<&String> = after_then.keys().collect();
        names.extend(after_else.keys());
        self.layout = before.clone();
        self.ub = ub_before;
        for v in names {
            let (t, e, o) = (after_then.get(v), after_else.get(v), before.get(v));
            let final_reg = match (t, e) {
                (Some(t), Some(e)) if t == e => t.clone(),
                (Some(t), None) => t.clone(),
                (None, Some(e)) => e.clone(),
                (Some(t), Some(e)) if Some(t) == o => {
                    for (&s, &d) in t.iter().zip(e) {
                        self.b.raw(Gate::ccx(cq1, s, d));
                    }
                    e.clone()
                }
                (Some(t), Some(e)) => {
                    let cq2 = cq2.expect("allocated when a branch rebinds an existing variable");
                    if Some(e) == o {
                        for (&s, &d) in e.iter().zip(t) {
                            self.b.raw(Gate::ccx(cq2, s, d));
                        }
                    } else {
                        for (&a, &b) in t.iter().zip(e) {
                            self.b.raw(Gate::cswap(cq2, a, b));
                        }
                    }
                    t.clone()
                }
                (None, None) => unreachable!(),
            };
            let ub = ub_then.get(v).copied().unwrap_or(0).max(ub_else.get(v).copied().unwrap_or(0));
            let mut hist: Vec<Reg> = Vec::new();
            for r in [o, t, e].into_iter().flatten() {
                if *r != final_reg && !hist.contains(r) {
                    hist.push(r.clone());
                }
            }
            if !hist.is_empty() {
                let h = self.history.entry(v.clone()).or_default();
                for r in hist {
                    if !h.contains(&r) {
                        h.push(r);
                    }
                }
            }
            self.layout.insert(v.clone(), final_reg);
            self.ub.insert(v.clone(), ub);
        }
        Ok(())
    }

    fn while_loop(&mut self, span: Span, cond: &Pred, body: &Block) -> Result<()> {
        let k = self.b.opts.k;
        if k == 0 {
            return Ok(());
        }
        let mut assigned = BTreeSet::new();
        for s in body {
            s.assigned_into(&mut assigned);
        }
        let widen = |c: &mut Compiler| {
            for v in &assigned {
                if c.ub.contains_key(v) {
                    c.ub.insert(v.clone(), c.mask);
                }
            }
        };
        widen(self);
        self.b.set_src(span, "loop");
        let n = self.b.w.max(bits(k));
        let ctr = self.b.alloc(n, Role::Scratch, "loop_ctr")?;
        let f = self.b.alloc(1, Role::Control, "loop_flag")?[0];
        let outer = self.b.ctx;
        for j in 1..=k as u64 {
            self.tally.if_else += 1;
            self.b.set_src(span, "loop");
            let (pv, from, to) = self.guard(cond)?;
            if pv != PredVal::Const(false) {
                let mut ctl: Vec<usize> = outer.into_iter().collect();
                if let PredVal::Qubit(q) = pv {
                    ctl.push(q);
                }
                self.counter_eq(&ctr, j - 1, ctl, f);
            }
            // Held through the body so every iteration allocates alike.
            let held = self.b.uncompute_held(from, to, "loop condition");

            let before = self.layout.clone();
            self.b.ctx = Some(f);
            let res = self.block(body, &HashMap::new());
            self.b.ctx = outer;
            res?;
            if let Some(q) = held {
                self.b.release(&q);
            }

            self.b.set_src(span, "loop");
            let changed: Vec<(Reg, Reg)> = self
                .layout
                .iter()
                .filter_map(|(v, r)| match before.get(v) {
                    Some(old) if old != r => Some((old.clone(), r.clone())),
                    _ => None,
                })
                .collect();
            if !changed.is_empty() {
                self.b.raw(Gate::x(f));
                for (old, new) in changed {
                    for (&s, &d) in old.iter().zip(&new) {
                        let mut c: Vec<usize> = outer.into_iter().collect();
                        c.extend([f, s]);
                        self.b.raw(Gate::mcx(c, d));
                    }
                }
                self.b.raw(Gate::x(f));
            }
            let lift = self.b.lift;
            self.b.lift = false;
            self.b.inc(&ctr, &[f]);
            self.b.lift = lift;
            self.counter_eq(&ctr, j, vec![], f);
            widen(self);
        }
        self.b.release(&[f]);
        Ok(())
    }

    /// `t ^= ctl && (ctr == value)`.
    fn counter_eq(&mut self, ctr: &[usize], value: u64, mut ctl: Vec<usize>, t: usize) {
        let zeros: Vec<usize> =
            ctr.iter().enumerate().filter(|(i, _)| (value >> i) & 1 == 0).map(|(_, &q)| q).collect();
        for &q in &zeros {
            self.b.raw(Gate::x(q));
        }
        ctl.extend_from_slice(ctr);
        self.b.raw(Gate::mcx(ctl, t));
        for &q in &zeros {
            self.b.raw(Gate::x(q));
        }
    }
}

fn stmt_reads(s: &Stmt, out: &mut BTreeSet<String>) {
    match &s.kind {
        StmtKind::Assign { expr, .. } | StmtKind::DerefWrite { expr, .. } => expr.vars_into(out),
        StmtKind::AddrOf { .. } => {}
        StmtKind::DerefRead { ptr, .. } => {
            out.insert(ptr.clone());
        }
        StmtKind::If { cond, then_block, else_block } => {
            cond.vars_into(out);
            then_block.iter().chain(else_block).for_each(|t| stmt_reads(t, out));
        }
        StmtKind::While { cond, body } => {
            cond.vars_into(out);
            body.iter().for_each(|t| stmt_reads(t, out));
        }
    }
}
