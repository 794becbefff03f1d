use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    PointerStatement,
    LiteralOverflow,
    Unassigned,
    DuplicateInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl Violation {
    fn new(kind: ViolationKind, span: Span, message: impl Into<String>) -> Self {
        Violation { kind, line: span.line, col: span.col, message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

/// Checks a program against the feature set of `backend` at width `m`.
/// Literals must fit in `m` value bits; the quantum backend rejects the
/// three pointer statement forms.
pub fn validate(p: &Program, backend: Backend, m: u32) -> Vec<Violation> {
    let mut v = Checker { backend, max_lit: (1u64 << m) - 1, out: Vec::new() };
    let mut seen = BTreeSet::new();
    let mut defined = BTreeSet::new();
    for prm in &p.params {
        if !seen.insert(prm.name.clone()) {
            v.out.push(Violation::new(
                ViolationKind::DuplicateInput,
                p.span,
                format!("duplicate input `{}`", prm.name),
            ));
        }
        defined.insert(prm.name.clone());
    }
    v.block(&p.body, &mut defined);
    if let Some(r) = &p.ret {
        v.expr(r, &defined);
    }
    v.out
}

struct Checker {
    backend: Backend,
    max_lit: u64,
    out: Vec<Violation>,
}

impl Checker {
    fn block(&mut self, b: &Block, defined: &mut BTreeSet<String>) {
        for s in b {
            self.stmt(s, defined);
        }
    }

    fn read(&mut self, name: &str, span: Span, defined: &BTreeSet<String>) {
        if !defined.contains(name) {
            self.out.push(Violation::new(
                ViolationKind::Unassigned,
                span,
                format!("`{name}` may be read before assignment"),
            ));
        }
    }

    fn stmt(&mut self, s: &Stmt, defined: &mut BTreeSet<String>) {
        if s.is_pointer_stmt() && self.backend == Backend::Quantum {
            self.out.push(Violation::new(
                ViolationKind::PointerStatement,
                s.span,
                format!("pointer statement `{}` cannot be interpreted by the quantum backend", s.summary()),
            ));
        }
        match &s.kind {
            StmtKind::Assign { var, expr, .. } => {
                self.expr(expr, defined);
                defined.insert(var.clone());
            }
            StmtKind::AddrOf { var, target } => {
                self.read(target, s.span, defined);
                defined.insert(var.clone());
            }
            StmtKind::DerefRead { var, ptr, .. } => {
                self.read(ptr, s.span, defined);
                defined.insert(var.clone());
            }
            StmtKind::DerefWrite { ptr, expr } => {
                self.read(ptr, s.span, defined);
                self.expr(expr, defined);
            }
            StmtKind::If { cond, then_block, else_block } => {
                self.pred(cond, defined);
                let mut t = defined.clone();
                let mut e = defined.clone();
                self.block(then_block, &mut t);
                self.block(else_block, &mut e);
                *defined = t.intersection(&e).cloned().collect();
            }
            StmtKind::While { cond, body } => {
                self.pred(cond, defined);
                let mut inner = defined.clone();
                self.block(body, &mut inner);
            }
        }
    }

    fn pred(&mut self, p: &Pred, defined: &BTreeSet<String>) {
        match &p.kind {
            PredKind::True | PredKind::False => {}
            PredKind::Not(a) => self.pred(a, defined),
            PredKind::And(a, b) | PredKind::Or(a, b) => {
                self.pred(a, defined);
                self.pred(b, defined);
            }
            PredKind::Rel(_, a, b) => {
                self.expr(a, defined);
                self.expr(b, defined);
            }
        }
    }

    fn expr(&mut self, e: &Expr, defined: &BTreeSet<String>) {
        match &e.kind {
            ExprKind::Var(v) => self.read(v, e.span, defined),
            ExprKind::Num(n) => {
                if *n > self.max_lit {
                    self.out.push(Violation::new(
                        ViolationKind::LiteralOverflow,
                        e.span,
                        format!("literal exceeds width: {n} > {}", self.max_lit),
                    ));
                }
            }
            ExprKind::Bin(_, a, b) => {
                self.expr(a, defined);
                self.expr(b, defined);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    const LIST2: &str = "int func(int x, int* a) {
    *a := x / 2;
    int y := x + 2;
    int z := *a;
    if (x > 5) { r := z * y; } else { r := z + y; }
    return r;
}";

    #[test]
    fn pointer_statements_flagged_for_quantum_only() {
        let p = parse(LIST2).unwrap();
        let q = validate(&p, Backend::Quantum, 3);
        assert_eq!(q.len(), 2);
        assert!(q.iter().all(|v| v.kind == ViolationKind::PointerStatement));
        assert_eq!(q[0].line, 2);
        assert_eq!(q[1].line, 4);
        assert!(validate(&p, Backend::Classical, 3).is_empty());
    }

    #[test]
    fn literal_overflow() {
        let p = parse("int f(int x) { z := x + 9; return z; }").unwrap();
        let v = validate(&p, Backend::Quantum, 3);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::LiteralOverflow);
        assert!(v[0].message.contains("literal exceeds width"));
        assert!(validate(&p, Backend::Quantum, 4).is_empty());
    }

    #[test]
    fn clean_program() {
        let p = parse("int f(int x, int y) { if (x >= 5) { z := x + 1; } else { z := y + 1; } return z; }")
            .unwrap();
        assert!(validate(&p, Backend::Quantum, 3).is_empty());
    }

    #[test]
    fn definite_assignment() {
        let p = parse("int f(int x) { if (x > 1) { z := 1; } return z; }").unwrap();
        let v = validate(&p, Backend::Classical, 3);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::Unassigned);
        let p = parse("int f(int x) { while (x > 1) { z := 1; x := x - 1; } return z; }").unwrap();
        assert_eq!(validate(&p, Backend::Classical, 3).len(), 1);
    }

    #[test]
    fn duplicate_inputs() {
        let p = parse("int f(int x, int x) { return x; }").unwrap();
        assert_eq!(validate(&p, Backend::Classical, 3)[0].kind, ViolationKind::DuplicateInput);
    }
}
