use std::collections::BTreeMap;

use crate::lang::*;
use crate::{word_mask, Error, Result};

/// Maximum number of executed statements and loop tests per run.
pub const STEP_LIMIT: u64 = 1_000_000;

/// Concrete program state. Pointer values are variable names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConcreteEnv {
    pub vars: BTreeMap<String, u64>,
    pub pointers: BTreeMap<String, String>,
}

impl ConcreteEnv {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, u64)>) -> Self {
        ConcreteEnv {
            vars: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            pointers: BTreeMap::new(),
        }
    }

    pub fn get(&self, var: &str) -> Option<u64> {
        self.vars.get(var).copied()
    }
}

/// Runs `p` on `env`. Arithmetic wraps at `2^(m+1)`, `x / 0 = 0`, loops run
/// to completion (bounded by [`STEP_LIMIT`]). The return value, if any, is
/// bound to [`RETURN_VAR`].
pub fn interpret(p: &Program, env: &ConcreteEnv, m: u32) -> Result<ConcreteEnv> {
    let mut env = env.clone();
    for prm in p.params.iter().filter(|p| p.is_pointer) {
        env.pointers.entry(prm.name.clone()).or_insert_with(|| pointee_cell(&prm.name));
    }
    let mut run = Run { mask: word_mask(m), steps: 0, env };
    run.block(&p.body)?;
    if let Some(r) = &p.ret {
        let v = eval_expr(r, &run.env, m)?;
        run.env.vars.insert(RETURN_VAR.to_string(), v);
    }
    Ok(run.env)
}

pub fn eval_expr(e: &Expr, env: &ConcreteEnv, m: u32) -> Result<u64> {
    let mask = word_mask(m);
    eval(e, env, mask)
}

pub fn eval_pred(p: &Pred, env: &ConcreteEnv, m: u32) -> Result<bool> {
    truth(p, env, word_mask(m))
}

fn eval(e: &Expr, env: &ConcreteEnv, mask: u64) -> Result<u64> {
    Ok(match &e.kind {
        ExprKind::Var(v) => env.get(v).ok_or_else(|| Error::Unbound(v.clone()))?,
        ExprKind::Num(n) => n & mask,
        ExprKind::Bin(op, a, b) => {
            let (a, b) = (eval(a, env, mask)?, eval(b, env, mask)?);
            match op {
                BinOp::Add => a.wrapping_add(b) & mask,
                BinOp::Sub => a.wrapping_sub(b) & mask,
                BinOp::Mul => a.wrapping_mul(b) & mask,
                BinOp::Div => a.checked_div(b).unwrap_or(0),
            }
        }
    })
}

fn truth(p: &Pred, env: &ConcreteEnv, mask: u64) -> Result<bool> {
    Ok(match &p.kind {
        PredKind::True => true,
        PredKind::False => false,
        PredKind::Not(a) => !truth(a, env, mask)?,
        PredKind::And(a, b) => truth(a, env, mask)? && truth(b, env, mask)?,
        PredKind::Or(a, b) => truth(a, env, mask)? || truth(b, env, mask)?,
        PredKind::Rel(op, a, b) => op.eval(eval(a, env, mask)?, eval(b, env, mask)?),
    })
}

struct Run {
    mask: u64,
    steps: u64,
    env: ConcreteEnv,
}

impl Run {
    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > STEP_LIMIT {
            return Err(Error::StepLimit(STEP_LIMIT));
        }
        Ok(())
    }

    fn target(&self, ptr: &str) -> Result<String> {
        self.env.pointers.get(ptr).cloned().ok_or_else(|| Error::Unbound(ptr.to_string()))
    }

    fn block(&mut self, b: &Block) -> Result<()> {
        for s in b {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<()> {
        self.tick()?;
        match &s.kind {
            StmtKind::Assign { var, expr, .. } => {
                // Copying a pointer copies the address.
                if let ExprKind::Var(src) = &expr.kind {
                    if let Some(t) = self.env.pointers.get(src).cloned() {
                        self.env.pointers.insert(var.clone(), t);
                        return Ok(());
                    }
                }
                let v = eval(expr, &self.env, self.mask)?;
                self.env.vars.insert(var.clone(), v);
            }
            StmtKind::AddrOf { var, target } => {
                self.env.pointers.insert(var.clone(), target.clone());
            }
            StmtKind::DerefRead { var, ptr, .. } => {
                let cell = self.target(ptr)?;
                let v = self.env.get(&cell).ok_or(Error::Unbound(cell))?;
                self.env.vars.insert(var.clone(), v);
            }
            StmtKind::DerefWrite { ptr, expr } => {
                let cell = self.target(ptr)?;
                let v = eval(expr, &self.env, self.mask)?;
                self.env.vars.insert(cell, v);
            }
            StmtKind::If { cond, then_block, else_block } => {
                if truth(cond, &self.env, self.mask)? {
                    self.block(then_block)?;
                } else {
                    self.block(else_block)?;
                }
            }
            StmtKind::While { cond, body } => loop {
                self.tick()?;
                if !truth(cond, &self.env, self.mask)? {
                    break;
                }
                self.block(body)?;
            },
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str, pairs: &[(&str, u64)], m: u32) -> Result<ConcreteEnv> {
        interpret(&parse(src).unwrap(), &ConcreteEnv::from_pairs(pairs.iter().copied()), m)
    }

    #[test]
    fn branch_program() {
        let env = run(
            "int f(int x, int y) { if (x >= 5) { z := x + 1; } else { z := y + 1; } return z; }",
            &[("x", 7), ("y", 0)],
            3,
        )
        .unwrap();
        assert_eq!(env.get("z"), Some(8));
        assert_eq!(env.get(RETURN_VAR), Some(8));
    }

    #[test]
    fn arithmetic_conventions() {
        let add = "int f(int x, int y) { z := x + y; }";
        assert_eq!(run(add, &[("x", 1), ("y", 3)], 3).unwrap().get("z"), Some(4));
        let div = "int f(int x, int y) { z := x / y; }";
        assert_eq!(run(div, &[("x", 5), ("y", 0)], 3).unwrap().get("z"), Some(0));
        let sub = "int f(int x, int y) { z := x - y; }";
        assert_eq!(run(sub, &[("x", 1), ("y", 3)], 3).unwrap().get("z"), Some(14));
        let mul = "int f(int x, int y) { z := x * y; }";
        assert_eq!(run(mul, &[("x", 7), ("y", 7)], 3).unwrap().get("z"), Some(49 % 16));
    }

    #[test]
    fn loops_run_concretely() {
        let src = "int f(int x) { c := 0; while (c < x) { c := c + 1; } return c; }";
        assert_eq!(run(src, &[("x", 6)], 3).unwrap().get("c"), Some(6));
    }

    #[test]
    fn step_limit() {
        let src = "int f(int x) { while (true) { x := x + 1; } }";
        assert!(matches!(run(src, &[("x", 0)], 3), Err(Error::StepLimit(_))));
    }

    #[test]
    fn unbound_variable() {
        assert!(matches!(run("int f(int x) { z := q; }", &[("x", 0)], 3), Err(Error::Unbound(v)) if v == "q"));
    }

    #[test]
    fn pointers() {
        let src = "int f(int x, int* a) { *a := x / 2; int y := x + 2; int z := *a; \
                   p := &y; *p := 1; q := p; w := *q; return z + y + w; }";
        let mut env = ConcreteEnv::from_pairs([("x", 7)]);
        env.vars.insert("*a".into(), 0);
        let out = interpret(&parse(src).unwrap(), &env, 3).unwrap();
        assert_eq!(out.get("z"), Some(3));
        assert_eq!(out.get("y"), Some(1));
        assert_eq!(out.get("*a"), Some(3));
        assert_eq!(out.get(RETURN_VAR), Some(5));
    }
}
