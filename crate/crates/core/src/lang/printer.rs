use std::fmt::Write;

use super::ast::*;

#[derive(Debug, Clone, Copy, Default)]
pub struct PrintOptions {
    /// Print `(a <= b) and (a >= b)` back as `a == b` (and its negation as `!=`).
    pub resugar_equality: bool,
}

pub fn print(p: &Program) -> String {
    print_with(p, PrintOptions { resugar_equality: true })
}

pub fn print_with(p: &Program, opts: PrintOptions) -> String {
    let mut out = String::new();
    let params: Vec<String> = p
        .params
        .iter()
        .map(|prm| format!("{} {}", if prm.is_pointer { "int*" } else { "int" }, prm.name))
        .collect();
    let _ = writeln!(out, "int {}({}) {{", p.name, params.join(", "));
    for s in &p.body {
        stmt(&mut out, s, 1, opts);
    }
    if let Some(r) = &p.ret {
        let _ = writeln!(out, "    return {};", expr_str(r));
    }
    out.push_str("}\n");
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize, opts: PrintOptions) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Assign { var, expr, decl } => {
            let kw = if *decl { "int " } else { "" };
            let _ = writeln!(out, "{kw}{var} := {};", expr_str(expr));
        }
        StmtKind::AddrOf { var, target } => {
            let _ = writeln!(out, "{var} := &{target};");
        }
        StmtKind::DerefRead { var, ptr, decl } => {
            let kw = if *decl { "int " } else { "" };
            let _ = writeln!(out, "{kw}{var} := *{ptr};");
        }
        StmtKind::DerefWrite { ptr, expr } => {
            let _ = writeln!(out, "*{ptr} := {};", expr_str(expr));
        }
        StmtKind::If { cond, then_block, else_block } => {
            let _ = writeln!(out, "if ({}) {{", pred_str_with(cond, opts));
            for t in then_block {
                stmt(out, t, depth + 1, opts);
            }
            indent(out, depth);
            if else_block.is_empty() {
                out.push_str("}\n");
            } else {
                out.push_str("} else {\n");
                for e in else_block {
                    stmt(out, e, depth + 1, opts);
                }
                indent(out, depth);
                out.push_str("}\n");
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while ({}) {{", pred_str_with(cond, opts));
            for b in body {
                stmt(out, b, depth + 1, opts);
            }
            indent(out, depth);
            out.push_str("}\n");
        }
    }
}

pub fn expr_str(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Var(v) => v.clone(),
        ExprKind::Num(n) => n.to_string(),
        ExprKind::Bin(op, a, b) => {
            let prec = op.precedence();
            let left = match &a.kind {
                ExprKind::Bin(aop, ..) if aop.precedence() < prec => format!("({})", expr_str(a)),
                _ => expr_str(a),
            };
            // Right operands of equal precedence need parentheses: a - (b - c).
            let right = match &b.kind {
                ExprKind::Bin(bop, ..) if bop.precedence() <= prec => format!("({})", expr_str(b)),
                _ => expr_str(b),
            };
            format!("{left} {} {right}", op.symbol())
        }
    }
}

pub fn pred_str(p: &Pred) -> String {
    pred_str_with(p, PrintOptions { resugar_equality: true })
}

fn equality_parts(p: &Pred) -> Option<(&Expr, &Expr)> {
    if let PredKind::And(a, b) = &p.kind {
        if let (PredKind::Rel(RelOp::Le, l1, r1), PredKind::Rel(RelOp::Ge, l2, r2)) = (&a.kind, &b.kind) {
            if expr_str(l1) == expr_str(l2) && expr_str(r1) == expr_str(r2) {
                return Some((l1, r1));
            }
        }
    }
    None
}

pub fn pred_str_with(p: &Pred, opts: PrintOptions) -> String {
    if opts.resugar_equality {
        if let Some((l, r)) = equality_parts(p) {
            return format!("{} == {}", expr_str(l), expr_str(r));
        }
        if let PredKind::Not(inner) = &p.kind {
            if let Some((l, r)) = equality_parts(inner) {
                return format!("{} != {}", expr_str(l), expr_str(r));
            }
        }
    }
    match &p.kind {
        PredKind::True => "true".into(),
        PredKind::False => "false".into(),
        PredKind::Rel(op, a, b) => format!("{} {} {}", expr_str(a), op.symbol(), expr_str(b)),
        PredKind::Not(inner) => format!("!({})", pred_str_with(inner, opts)),
        PredKind::And(a, b) => format!("{} and {}", operand(a, opts), operand(b, opts)),
        PredKind::Or(a, b) => format!("{} or {}", operand(a, opts), operand(b, opts)),
    }
}

/// Operands of `and`/`or` are parenthesized unless they are constants or negations.
fn operand(p: &Pred, opts: PrintOptions) -> String {
    let bare = matches!(p.kind, PredKind::True | PredKind::False | PredKind::Not(_));
    if bare {
        pred_str_with(p, opts)
    } else {
        format!("({})", pred_str_with(p, opts))
    }
}
