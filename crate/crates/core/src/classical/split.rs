use std::collections::BTreeSet;

use crate::lang::*;
use crate::{Error, Result};

/// Splits the top-level body before statement `point`. The suffix takes as
/// inputs the variables live at the split point.
pub fn split(p: &Program, point: usize) -> Result<(Program, Program)> {
    if point > p.body.len() {
        return Err(Error::Split(format!(
            "point {point} is past the end of a {}-statement body",
            p.body.len()
        )));
    }
    let prefix = Program {
        name: format!("{}_prefix", p.name),
        params: p.params.clone(),
        body: p.body[..point].to_vec(),
        ret: None,
        span: p.span,
    };
    let pointers = pointer_vars(p);
    let params = live_inputs(p, point)
        .into_iter()
        .map(|name| Param { is_pointer: pointers.contains(&name), name })
        .collect();
    let suffix = Program {
        name: format!("{}_suffix", p.name),
        params,
        body: p.body[point..].to_vec(),
        ret: p.ret.clone(),
        span: p.span,
    };
    Ok((prefix, suffix))
}

/// Index of the first top-level statement starting at or after `line`.
/// Fails when `line` falls strictly inside a compound statement.
pub fn split_at_line(p: &Program, line: u32) -> Result<usize> {
    for (i, s) in p.body.iter().enumerate() {
        if s.span.line >= line {
            return Ok(i);
        }
        if line <= s.end_line() {
            return Err(Error::Split(format!(
                "line {line} is inside the statement starting at line {}",
                s.span.line
            )));
        }
    }
    Ok(p.body.len())
}

/// Variables read by `body[point..]` (or the return expression) before being
/// written, ordered by their first definition: parameters first, then
/// prefix assignments.
pub fn live_inputs(p: &Program, point: usize) -> Vec<String> {
    let cells = cell_vars(p);
    let mut live = BTreeSet::new();
    if let Some(r) = &p.ret {
        r.vars_into(&mut live);
    }
    let live = live_block(&p.body[point.min(p.body.len())..], live, &cells);
    let mut order: Vec<String> = p.params.iter().map(|prm| prm.name.clone()).collect();
    for prm in p.params.iter().filter(|p| p.is_pointer) {
        order.push(pointee_cell(&prm.name));
    }
    fn defs(b: &[Stmt], out: &mut Vec<String>) {
        for s in b {
            let mut set = BTreeSet::new();
            match &s.kind {
                StmtKind::If { then_block, else_block, .. } => {
                    defs(then_block, out);
                    defs(else_block, out);
                }
                StmtKind::While { body, .. } => defs(body, out),
                _ => {
                    s.assigned_into(&mut set);
                    out.extend(set);
                }
            }
        }
    }
    defs(&p.body[..point.min(p.body.len())], &mut order);
    let mut out = Vec::new();
    for name in order {
        if live.contains(&name) && !out.contains(&name) {
            out.push(name);
        }
    }
    for name in live {
        if !out.contains(&name) {
            out.push(name);
        }
    }
    out
}

fn pointer_vars(p: &Program) -> BTreeSet<String> {
    fn walk(b: &Block, out: &mut BTreeSet<String>) {
        for s in b {
            match &s.kind {
                StmtKind::AddrOf { var, .. } => {
                    out.insert(var.clone());
                }
                StmtKind::If { then_block, else_block, .. } => {
                    walk(then_block, out);
                    walk(else_block, out);
                }
                StmtKind::While { body, .. } => walk(body, out),
                _ => {}
            }
        }
    }
    let mut out: BTreeSet<String> = p.params.iter().filter(|p| p.is_pointer).map(|p| p.name.clone()).collect();
    walk(&p.body, &mut out);
    out
}

/// Every variable a pointer may refer to.
fn cell_vars(p: &Program) -> BTreeSet<String> {
    fn walk(b: &Block, out: &mut BTreeSet<String>) {
        for s in b {
            match &s.kind {
                StmtKind::AddrOf { target, .. } => {
                    out.insert(target.clone());
                }
                StmtKind::If { then_block, else_block, .. } => {
                    walk(then_block, out);
                    walk(else_block, out);
                }
                StmtKind::While { body, .. } => walk(body, out),
                _ => {}
            }
        }
    }
    let mut out: BTreeSet<String> =
        p.params.iter().filter(|p| p.is_pointer).map(|p| pointee_cell(&p.name)).collect();
    walk(&p.body, &mut out);
    out
}

fn pred_vars(p: &Pred) -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    p.vars_into(&mut s);
    s
}

fn live_block(b: &[Stmt], mut live: BTreeSet<String>, cells: &BTreeSet<String>) -> BTreeSet<String> {
    for s in b.iter().rev() {
        live = live_stmt(s, live, cells);
    }
    live
}

fn live_stmt(s: &Stmt, mut live: BTreeSet<String>, cells: &BTreeSet<String>) -> BTreeSet<String> {
    match &s.kind {
        StmtKind::Assign { var, expr, .. } => {
            live.remove(var);
            expr.vars_into(&mut live);
        }
        StmtKind::AddrOf { var, .. } => {
            live.remove(var);
        }
        StmtKind::DerefRead { var, ptr, .. } => {
            live.remove(var);
            live.insert(ptr.clone());
            live.extend(cells.iter().cloned());
        }
        StmtKind::DerefWrite { ptr, expr } => {
            live.insert(ptr.clone());
            expr.vars_into(&mut live);
        }
        StmtKind::If { cond, then_block, else_block } => {
            let mut out = live_block(then_block, live.clone(), cells);
            out.extend(live_block(else_block, live, cells));
            out.extend(pred_vars(cond));
            live = out;
        }
        StmtKind::While { cond, body } => {
            let mut cur = live.clone();
            cur.extend(pred_vars(cond));
            loop {
                let mut next = live_block(body, cur.clone(), cells);
                next.extend(cur.iter().cloned());
                if next == cur {
                    break;
                }
                cur = next;
            }
            live = cur;
        }
    }
    live
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{interpret, ConcreteEnv};

    const LIST2: &str = "int func(int x, int* a) {
    // classical part
    *a := x / 2;
    int y := x + 2;
    int z := *a;
    // quantum part
    if (x > 5) {
        r := z * y;
    } else {
        r := z + y;
    }
    return r;
}";

    #[test]
    fn split_before_branch() {
        let p = parse(LIST2).unwrap();
        let point = split_at_line(&p, 7).unwrap();
        assert_eq!(point, 3);
        let (pre, suf) = split(&p, point).unwrap();
        assert_eq!(pre.body.len(), 3);
        let names: Vec<&str> = suf.params.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["x", "y", "z"]);
        assert!(suf.params.iter().all(|p| !p.is_pointer));
    }

    #[test]
    fn split_at_zero() {
        let p = parse(LIST2).unwrap();
        let (pre, suf) = split(&p, 0).unwrap();
        assert!(pre.body.is_empty());
        assert_eq!(suf.body, p.body);
    }

    #[test]
    fn line_inside_block_is_rejected() {
        let p = parse(LIST2).unwrap();
        assert!(split_at_line(&p, 8).is_err());
        assert!(split(&p, 9).is_err());
    }

    #[test]
    fn composition_matches_whole_program() {
        let p = parse(LIST2).unwrap();
        for point in 0..=p.body.len() {
            let (pre, suf) = split(&p, point).unwrap();
            for x in 0..8 {
                let mut env = ConcreteEnv::from_pairs([("x", x)]);
                env.vars.insert("*a".into(), 0);
                let whole = interpret(&p, &env, 4).unwrap();
                let mid = interpret(&pre, &env, 4).unwrap();
                let end = interpret(&suf, &mid, 4).unwrap();
                assert_eq!(whole.get(RETURN_VAR), end.get(RETURN_VAR));
            }
        }
    }

    #[test]
    fn loop_liveness() {
        let p = parse("int f(int x) { c := 0; i := 0; while (i < x) { c := c + 2; i := i + 1; } return c; }")
            .unwrap();
        assert_eq!(live_inputs(&p, 2), ["x", "c", "i"]);
        assert_eq!(live_inputs(&p, 0), ["x"]);
    }
}
