//! Syntax tree for the WHILE language and its pointer extension.

use std::collections::BTreeSet;
use std::fmt;

/// Source position (1-based line and column).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Relational operators kept in the tree. `==` and `!=` are desugared by the
/// parser into conjunctions of `<=` and `>=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }

    pub fn eval(self, a: u64, b: u64) -> bool {
        match self {
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Gt => a > b,
            RelOp::Ge => a >= b,
        }
    }

    /// The relation with its operands exchanged (`a < b` iff `b > a`).
    pub fn flipped(self) -> RelOp {
        match self {
            RelOp::Lt => RelOp::Gt,
            RelOp::Le => RelOp::Ge,
            RelOp::Gt => RelOp::Lt,
            RelOp::Ge => RelOp::Le,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExprKind {
    Var(String),
    Num(u64),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>, span: Span) -> Self {
        Expr { kind: ExprKind::Var(name.into()), span }
    }

    pub fn num(value: u64, span: Span) -> Self {
        Expr { kind: ExprKind::Num(value), span }
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr, span: Span) -> Self {
        Expr { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span }
    }

    pub fn mentions(&self, name: &str) -> bool {
        match &self.kind {
            ExprKind::Var(v) => v == name,
            ExprKind::Num(_) => false,
            ExprKind::Bin(_, a, b) => a.mentions(name) || b.mentions(name),
        }
    }

    pub fn vars_into(&self, out: &mut BTreeSet<String>) {
        match &self.kind {
            ExprKind::Var(v) => {
                out.insert(v.clone());
            }
            ExprKind::Num(_) => {}
            ExprKind::Bin(_, a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
        }
    }

    /// Number of binary operator nodes.
    pub fn op_count(&self) -> usize {
        match &self.kind {
            ExprKind::Bin(_, a, b) => 1 + a.op_count() + b.op_count(),
            _ => 0,
        }
    }

    pub fn node_count(&self) -> usize {
        match &self.kind {
            ExprKind::Bin(_, a, b) => 1 + a.node_count() + b.node_count(),
            _ => 1,
        }
    }

    fn strip(&mut self) {
        self.span = Span::default();
        if let ExprKind::Bin(_, a, b) = &mut self.kind {
            a.strip();
            b.strip();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pred {
    pub kind: PredKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PredKind {
    True,
    False,
    Not(Box<Pred>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Rel(RelOp, Expr, Expr),
}

impl Pred {
    pub fn new(kind: PredKind, span: Span) -> Self {
        Pred { kind, span }
    }

    pub fn rel(op: RelOp, lhs: Expr, rhs: Expr, span: Span) -> Self {
        Pred::new(PredKind::Rel(op, lhs, rhs), span)
    }

    pub fn vars_into(&self, out: &mut BTreeSet<String>) {
        match &self.kind {
            PredKind::True | PredKind::False => {}
            PredKind::Not(p) => p.vars_into(out),
            PredKind::And(a, b) | PredKind::Or(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            PredKind::Rel(_, a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
        }
    }

    /// Count of relational nodes.
    pub fn rel_count(&self) -> usize {
        match &self.kind {
            PredKind::True | PredKind::False => 0,
            PredKind::Not(p) => p.rel_count(),
            PredKind::And(a, b) | PredKind::Or(a, b) => a.rel_count() + b.rel_count(),
            PredKind::Rel(..) => 1,
        }
    }

    /// Count of arithmetic nodes inside relations.
    pub fn arith_count(&self) -> usize {
        match &self.kind {
            PredKind::True | PredKind::False => 0,
            PredKind::Not(p) => p.arith_count(),
            PredKind::And(a, b) | PredKind::Or(a, b) => a.arith_count() + b.arith_count(),
            PredKind::Rel(_, a, b) => a.op_count() + b.op_count(),
        }
    }

    pub fn node_count(&self) -> usize {
        match &self.kind {
            PredKind::True | PredKind::False => 1,
            PredKind::Not(p) => 1 + p.node_count(),
            PredKind::And(a, b) | PredKind::Or(a, b) => 1 + a.node_count() + b.node_count(),
            PredKind::Rel(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    fn strip(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            PredKind::True | PredKind::False => {}
            PredKind::Not(p) => p.strip(),
            PredKind::And(a, b) | PredKind::Or(a, b) => {
                a.strip();
                b.strip();
            }
            PredKind::Rel(_, a, b) => {
                a.strip();
                b.strip();
            }
        }
    }
}

pub type Block = Vec<Stmt>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    /// `x := e;` or, with `decl`, `int x := e;`.
    Assign { var: String, expr: Expr, decl: bool },
    /// `p := &v;`
    AddrOf { var: String, target: String },
    /// `x := *p;` (optionally declared).
    DerefRead { var: String, ptr: String, decl: bool },
    /// `*p := e;`
    DerefWrite { ptr: String, expr: Expr },
    If { cond: Pred, then_block: Block, else_block: Block },
    While { cond: Pred, body: Block },
}

impl Stmt {
    pub fn new(kind: StmtKind, span: Span) -> Self {
        Stmt { kind, span }
    }

    pub fn is_pointer_stmt(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::AddrOf { .. } | StmtKind::DerefRead { .. } | StmtKind::DerefWrite { .. }
        )
    }

    /// True if this statement or anything nested in it is a pointer statement.
    pub fn contains_pointer_stmt(&self) -> bool {
        match &self.kind {
            StmtKind::If { then_block, else_block, .. } => {
                then_block.iter().chain(else_block).any(Stmt::contains_pointer_stmt)
            }
            StmtKind::While { body, .. } => body.iter().any(Stmt::contains_pointer_stmt),
            _ => self.is_pointer_stmt(),
        }
    }

    /// Last source line covered by the statement.
    pub fn end_line(&self) -> u32 {
        match &self.kind {
            StmtKind::If { then_block, else_block, .. } => then_block
                .iter()
                .chain(else_block)
                .map(Stmt::end_line)
                .max()
                .unwrap_or(self.span.line)
                .max(self.span.line),
            StmtKind::While { body, .. } => {
                body.iter().map(Stmt::end_line).max().unwrap_or(self.span.line).max(self.span.line)
            }
            _ => self.span.line,
        }
    }

    /// Variables possibly written by the statement (pointer writes excluded).
    pub fn assigned_into(&self, out: &mut BTreeSet<String>) {
        match &self.kind {
            StmtKind::Assign { var, .. }
            | StmtKind::AddrOf { var, .. }
            | StmtKind::DerefRead { var, .. } => {
                out.insert(var.clone());
            }
            StmtKind::DerefWrite { .. } => {}
            StmtKind::If { then_block, else_block, .. } => {
                for s in then_block.iter().chain(else_block) {
                    s.assigned_into(out);
                }
            }
            StmtKind::While { body, .. } => {
                for s in body {
                    s.assigned_into(out);
                }
            }
        }
    }

    /// Short one-line description used for circuit provenance.
    pub fn summary(&self) -> String {
        match &self.kind {
            StmtKind::Assign { var, .. } => format!("assign {var}"),
            StmtKind::AddrOf { var, target } => format!("{var} := &{target}"),
            StmtKind::DerefRead { var, ptr, .. } => format!("{var} := *{ptr}"),
            StmtKind::DerefWrite { ptr, .. } => format!("*{ptr} := .."),
            StmtKind::If { .. } => "if".to_string(),
            StmtKind::While { .. } => "while".to_string(),
        }
    }

    fn strip(&mut self) {
        self.span = Span::default();
        match &mut self.kind {
            StmtKind::Assign { expr, .. } | StmtKind::DerefWrite { expr, .. } => expr.strip(),
            StmtKind::AddrOf { .. } | StmtKind::DerefRead { .. } => {}
            StmtKind::If { cond, then_block, else_block } => {
                cond.strip();
                then_block.iter_mut().for_each(Stmt::strip);
                else_block.iter_mut().for_each(Stmt::strip);
            }
            StmtKind::While { cond, body } => {
                cond.strip();
                body.iter_mut().for_each(Stmt::strip);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: String,
    pub is_pointer: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Block,
    pub ret: Option<Expr>,
    pub span: Span,
}

/// Name under which the value of the `return` expression is reported.
/// `return` is a keyword, so no program variable can collide with it.
pub const RETURN_VAR: &str = "return";

/// Name of the implicit cell a pointer parameter refers to on entry.
pub fn pointee_cell(ptr: &str) -> String {
    format!("*{ptr}")
}

impl Program {
    pub fn int_params(&self) -> impl Iterator<Item = &str> {
        self.params.iter().filter(|p| !p.is_pointer).map(|p| p.name.as_str())
    }

    /// Copy of the program with every position reset; two programs are
    /// structurally identical iff their stripped forms are equal.
    pub fn stripped(&self) -> Program {
        let mut p = self.clone();
        p.span = Span::default();
        p.body.iter_mut().for_each(Stmt::strip);
        if let Some(r) = &mut p.ret {
            r.strip();
        }
        p
    }

    pub fn same_structure(&self, other: &Program) -> bool {
        self.stripped() == other.stripped()
    }

    pub fn has_loops(&self) -> bool {
        fn any_loop(b: &Block) -> bool {
            b.iter().any(|s| match &s.kind {
                StmtKind::While { .. } => true,
                StmtKind::If { then_block, else_block, .. } => {
                    any_loop(then_block) || any_loop(else_block)
                }
                _ => false,
            })
        }
        any_loop(&self.body)
    }

    /// Total number of AST nodes (statements, predicate and expression nodes).
    pub fn node_count(&self) -> usize {
        fn block(b: &Block) -> usize {
            b.iter()
                .map(|s| {
                    1 + match &s.kind {
                        StmtKind::Assign { expr, .. } | StmtKind::DerefWrite { expr, .. } => {
                            expr.node_count()
                        }
                        StmtKind::AddrOf { .. } | StmtKind::DerefRead { .. } => 0,
                        StmtKind::If { cond, then_block, else_block } => {
                            cond.node_count() + block(then_block) + block(else_block)
                        }
                        StmtKind::While { cond, body } => cond.node_count() + block(body),
                    }
                })
                .sum()
        }
        block(&self.body) + self.ret.as_ref().map_or(0, Expr::node_count)
    }

    pub fn count_while(&self) -> usize {
        fn block(b: &Block) -> usize {
            b.iter()
                .map(|s| match &s.kind {
                    StmtKind::While { body, .. } => 1 + block(body),
                    StmtKind::If { then_block, else_block, .. } => block(then_block) + block(else_block),
                    _ => 0,
                })
                .sum()
        }
        block(&self.body)
    }
}
