use std::collections::{BTreeMap, BTreeSet};

use super::domain::InputDomain;
use crate::lang::*;
use crate::{word_mask, Result};

/// Closed interval of unsigned values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: u64,
    pub hi: u64,
}

impl Interval {
    pub fn new(lo: u64, hi: u64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(v: u64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn size(self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn contains(self, v: u64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn hull(self, o: Interval) -> Interval {
        Interval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn values(self) -> BTreeSet<u64> {
        (self.lo..=self.hi).collect()
    }
}

/// Final interval state. `reachable == false` is the bottom element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalEnv {
    pub reachable: bool,
    pub vars: BTreeMap<String, Interval>,
}

impl IntervalEnv {
    pub fn get(&self, var: &str) -> Option<Interval> {
        self.vars.get(var).copied()
    }
}

/// Number of unstable loop iterations before widening to the clamped top.
const WIDEN_AFTER: usize = 3;

/// Non-relational interval analysis. Overflow-prone arithmetic goes to the
/// full range, branches on `var REL const` refine the variable, and pointer
/// dereferences use points-to sets (weak update when ambiguous).
pub fn interval_analyze(p: &Program, dom: &InputDomain, m: u32) -> Result<IntervalEnv> {
    let top = word_mask(m);
    let mut st = State::default();
    for (name, vals) in dom.inputs(p, m)? {
        let (lo, hi) = (vals[0], vals[vals.len() - 1]);
        st.vars.insert(name, Interval::new(lo, hi));
    }
    for prm in p.params.iter().filter(|p| p.is_pointer) {
        st.pts.insert(prm.name.clone(), [pointee_cell(&prm.name)].into_iter().collect());
    }
    let a = Analyzer { top };
    let out = a.block(&p.body, Some(st));
    Ok(match out {
        None => IntervalEnv { reachable: false, vars: BTreeMap::new() },
        Some(mut s) => {
            if let Some(r) = &p.ret {
                let v = a.expr(r, &s);
                s.vars.insert(RETURN_VAR.to_string(), v);
            }
            IntervalEnv { reachable: true, vars: s.vars }
        }
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct State {
    vars: BTreeMap<String, Interval>,
    pts: BTreeMap<String, BTreeSet<String>>,
}

fn join(a: Option<State>, b: Option<State>) -> Option<State> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(mut a), Some(b)) => {
            for (k, v) in b.vars {
                a.vars.entry(k).and_modify(|x| *x = x.hull(v)).or_insert(v);
            }
            for (k, v) in b.pts {
                a.pts.entry(k).or_default().extend(v);
            }
            Some(a)
        }
    }
}

struct Analyzer {
    top: u64,
}

impl Analyzer {
    fn full(&self) -> Interval {
        Interval::new(0, self.top)
    }

    fn block(&self, b: &Block, mut st: Option<State>) -> Option<State> {
        for s in b {
            st = self.stmt(s, st?);
        }
        st
    }

    fn stmt(&self, s: &Stmt, mut st: State) -> Option<State> {
        match &s.kind {
            StmtKind::Assign { var, expr, .. } => {
                if let ExprKind::Var(src) = &expr.kind {
                    if let Some(t) = st.pts.get(src).cloned() {
                        st.pts.insert(var.clone(), t);
                        return Some(st);
                    }
                }
                let v = self.expr(expr, &st);
                st.vars.insert(var.clone(), v);
                Some(st)
            }
            StmtKind::AddrOf { var, target } => {
                st.pts.insert(var.clone(), [target.clone()].into_iter().collect());
                Some(st)
            }
            StmtKind::DerefRead { var, ptr, .. } => {
                let targets = st.pts.get(ptr).cloned().unwrap_or_default();
                let v = targets
                    .iter()
                    .map(|t| st.vars.get(t).copied().unwrap_or(self.full()))
                    .reduce(Interval::hull)
                    .unwrap_or(self.full());
                st.vars.insert(var.clone(), v);
                Some(st)
            }
            StmtKind::DerefWrite { ptr, expr } => {
                let v = self.expr(expr, &st);
                let targets = st.pts.get(ptr).cloned().unwrap_or_default();
                let strong = targets.len() == 1;
                for t in targets {
                    let nv = match st.vars.get(&t) {
                        Some(old) if !strong => old.hull(v),
                        _ => v,
                    };
                    st.vars.insert(t, nv);
                }
                Some(st)
            }
            StmtKind::If { cond, then_block, else_block } => {
                let t = self.refine(cond, true, st.clone()).and_then(|s| self.block(then_block, Some(s)));
                let e = self.refine(cond, false, st).and_then(|s| self.block(else_block, Some(s)));
                join(t, e)
            }
            StmtKind::While { cond, body } => {
                let mut head = st;
                let mut unstable = 0;
                loop {
                    let after = self.refine(cond, true, head.clone()).and_then(|s| self.block(body, Some(s)));
                    let mut next = join(Some(head.clone()), after).expect("entry is reachable");
                    if next == head {
                        break;
                    }
                    unstable += 1;
                    if unstable >= WIDEN_AFTER {
                        for (k, v) in next.vars.iter_mut() {
                            if head.vars.get(k) != Some(v) {
                                *v = self.full();
                            }
                        }
                    }
                    head = next;
                }
                self.refine(cond, false, head)
            }
        }
    }

    fn expr(&self, e: &Expr, st: &State) -> Interval {
        match &e.kind {
            ExprKind::Var(v) => st.vars.get(v).copied().unwrap_or(self.full()),
            ExprKind::Num(n) => Interval::point(n & self.top),
            ExprKind::Bin(op, a, b) => {
                let (a, b) = (self.expr(a, st), self.expr(b, st));
                self.arith(*op, a, b)
            }
        }
    }

    fn arith(&self, op: BinOp, a: Interval, b: Interval) -> Interval {
        let modulus = self.top as u128 + 1;
        let (alo, ahi, blo, bhi) = (a.lo as u128, a.hi as u128, b.lo as u128, b.hi as u128);
        // Exact integer range before wrapping; wraps stay exact when the
        // whole range lands in one period.
        let wrap = |lo: i128, hi: i128| -> Interval {
            let m = modulus as i128;
            let (plo, phi) = (lo.div_euclid(m), hi.div_euclid(m));
            if plo == phi {
                Interval::new(lo.rem_euclid(m) as u64, hi.rem_euclid(m) as u64)
            } else {
                self.full()
            }
        };
        match op {
            BinOp::Add => wrap((alo + blo) as i128, (ahi + bhi) as i128),
            BinOp::Sub => wrap(alo as i128 - bhi as i128, ahi as i128 - blo as i128),
            BinOp::Mul => wrap((alo * blo) as i128, (ahi * bhi) as i128),
            BinOp::Div => {
                if b.hi == 0 {
                    return Interval::point(0);
                }
                let dlo = b.lo.max(1);
                let q = Interval::new(a.lo / b.hi, a.hi / dlo);
                if b.lo == 0 {
                    q.hull(Interval::point(0))
                } else {
                    q
                }
            }
        }
    }

    /// Restricts `st` to the states where `p` evaluates to `want`.
    fn refine(&self, p: &Pred, want: bool, st: State) -> Option<State> {
        match (&p.kind, want) {
            (PredKind::True, true) | (PredKind::False, false) => Some(st),
            (PredKind::True, false) | (PredKind::False, true) => None,
            (PredKind::Not(a), w) => self.refine(a, !w, st),
            (PredKind::And(a, b), true) | (PredKind::Or(a, b), false) => {
                let s = self.refine(a, want, st)?;
                self.refine(b, want, s)
            }
            (PredKind::And(a, b), false) | (PredKind::Or(a, b), true) => {
                join(self.refine(a, want, st.clone()), self.refine(b, want, st))
            }
            (PredKind::Rel(op, l, r), w) => {
                let (lv, rv) = (self.expr(l, &st), self.expr(r, &st));
                let op = if w { *op } else { negate(*op) };
                // Decide from the ranges when possible.
                let always = match op {
                    RelOp::Lt => lv.hi < rv.lo,
                    RelOp::Le => lv.hi <= rv.lo,
                    RelOp::Gt => lv.lo > rv.hi,
                    RelOp::Ge => lv.lo >= rv.hi,
                };
                let never = match op {
                    RelOp::Lt => lv.lo >= rv.hi,
                    RelOp::Le => lv.lo > rv.hi,
                    RelOp::Gt => lv.hi <= rv.lo,
                    RelOp::Ge => lv.hi < rv.lo,
                };
                if never {
                    return None;
                }
                if always {
                    return Some(st);
                }
                let mut st = st;
                match (&l.kind, &r.kind) {
                    (ExprKind::Var(v), ExprKind::Num(c)) => narrow(&mut st, v, op, *c, lv),
                    (ExprKind::Num(c), ExprKind::Var(v)) => narrow(&mut st, v, op.flipped(), *c, rv),
                    _ => {}
                }
                Some(st)
            }
        }
    }
}

fn negate(op: RelOp) -> RelOp {
    match op {
        RelOp::Lt => RelOp::Ge,
        RelOp::Le => RelOp::Gt,
        RelOp::Gt => RelOp::Le,
        RelOp::Ge => RelOp::Lt,
    }
}

/// Intersects `v`'s interval with `{x | x op c}`. Callers have already
/// ruled out an empty result.
fn narrow(st: &mut State, v: &str, op: RelOp, c: u64, cur: Interval) {
    let (lo, hi) = match op {
        RelOp::Lt => (cur.lo, cur.hi.min(c - 1)),
        RelOp::Le => (cur.lo, cur.hi.min(c)),
        RelOp::Gt => (cur.lo.max(c + 1), cur.hi),
        RelOp::Ge => (cur.lo.max(c), cur.hi),
    };
    st.vars.insert(v.to_string(), Interval::new(lo, hi));
}
