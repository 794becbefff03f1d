//! Search targets: conjunctions of `var REL constant` conditions.

use std::fmt;
use std::str::FromStr;

use crate::sim::{read, Basis};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub fn eval(self, a: u64, b: u64) -> bool {
        match self {
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub var: String,
    pub cmp: Cmp,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSpec {
    pub conds: Vec<Condition>,
}

impl TargetSpec {
    pub fn vars(&self) -> Vec<String> {
        let mut v: Vec<String> = Vec::new();
        for c in &self.conds {
            if !v.contains(&c.var) {
                v.push(c.var.clone());
            }
        }
        v
    }

    pub fn holds(&self, values: impl Fn(&str) -> u64) -> bool {
        self.conds.iter().all(|c| c.cmp.eval(values(&c.var), c.value))
    }

    /// Binds variable names to registers; returns a basis-state predicate.
    pub fn bind<'a>(
        &'a self,
        layout: &'a std::collections::BTreeMap<String, Vec<usize>>,
        m: u32,
    ) -> Result<impl Fn(&Basis) -> bool + 'a> {
        let max = crate::word_mask(m);
        let mut regs = Vec::new();
        for c in &self.conds {
            if c.value > max {
                return Err(Error::Target(format!("constant {} exceeds {max}", c.value)));
            }
            let reg = layout
                .get(&c.var)
                .ok_or_else(|| Error::Target(format!("`{}` is not in the circuit layout", c.var)))?;
            regs.push(reg.as_slice());
        }
        Ok(move |b: &Basis| self.conds.iter().zip(&regs).all(|(c, r)| c.cmp.eval(read(b, r), c.value)))
    }
}

impl FromStr for TargetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut conds = Vec::new();
        for part in s.split("and") {
            let part = part.trim();
            let ops = ["==", "!=", "<=", ">=", "<", ">"];
            let (pos, op) = ops
                .iter()
                .filter_map(|op| part.find(op).map(|p| (p, *op)))
                .min_by_key(|(p, op)| (*p, std::cmp::Reverse(op.len())))
                .ok_or_else(|| Error::Target(format!("no comparison in `{part}`")))?;
            let var = part[..pos].trim();
            let rhs = part[pos + op.len()..].trim();
            if var.is_empty() || !var.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(Error::Target(format!("bad variable in `{part}`")));
            }
            let value = rhs.parse().map_err(|_| Error::Target(format!("bad constant in `{part}`")))?;
            let cmp = match op {
                "==" => Cmp::Eq,
                "!=" => Cmp::Ne,
                "<=" => Cmp::Le,
                ">=" => Cmp::Ge,
                "<" => Cmp::Lt,
                _ => Cmp::Gt,
            };
            conds.push(Condition { var: var.to_string(), cmp, value });
        }
        Ok(TargetSpec { conds })
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.conds.iter().enumerate() {
            if i > 0 {
                write!(f, " and ")?;
            }
            write!(f, "{} {} {}", c.var, c.cmp.symbol(), c.value)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_conjunctions() {
        let t: TargetSpec = "z >= 6 and x <= 2".parse().unwrap();
        assert_eq!(t.conds.len(), 2);
        assert_eq!(t.conds[0], Condition { var: "z".into(), cmp: Cmp::Ge, value: 6 });
        assert_eq!(t.conds[1], Condition { var: "x".into(), cmp: Cmp::Le, value: 2 });
        assert_eq!(t.to_string(), "z >= 6 and x <= 2");
        assert_eq!("z==8".parse::<TargetSpec>().unwrap().conds[0].cmp, Cmp::Eq);
        assert_eq!("return != 0".parse::<TargetSpec>().unwrap().conds[0].var, "return");
    }

    #[test]
    fn rejects_garbage() {
        for s in ["z", "z == ", "== 3", "z == x", "a b < 3"] {
            assert!(s.parse::<TargetSpec>().is_err(), "{s}");
        }
    }
}
