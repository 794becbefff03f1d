use super::ast::*;

/// Replaces every `while (b) { S }` by `k` nested `if (b) { S; ... }`
/// conditionals. Nested loops are unrolled with the same bound.
pub fn unroll(p: &Program, k: usize) -> Program {
    Program { body: unroll_block(&p.body, k), ..p.clone() }
}

fn unroll_block(b: &Block, k: usize) -> Block {
    let mut out = Vec::with_capacity(b.len());
    for s in b {
        match &s.kind {
            StmtKind::While { cond, body } => {
                let body = unroll_block(body, k);
                if let Some(nested) = nest(cond, &body, s.span, k) {
                    out.push(nested);
                }
            }
            StmtKind::If { cond, then_block, else_block } => out.push(Stmt::new(
                StmtKind::If {
                    cond: cond.clone(),
                    then_block: unroll_block(then_block, k),
                    else_block: unroll_block(else_block, k),
                },
                s.span,
            )),
            _ => out.push(s.clone()),
        }
    }
    out
}

fn nest(cond: &Pred, body: &Block, span: Span, k: usize) -> Option<Stmt> {
    if k == 0 {
        return None;
    }
    let mut then_block = body.clone();
    then_block.extend(nest(cond, body, span, k - 1));
    Some(Stmt::new(StmtKind::If { cond: cond.clone(), then_block, else_block: Vec::new() }, span))
}
