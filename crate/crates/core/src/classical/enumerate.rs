use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::domain::InputDomain;
use super::interp::{interpret, ConcreteEnv};
use crate::lang::Program;
use crate::{Error, Result};

/// Default bound on the number of enumerated input tuples.
pub const DEFAULT_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, Copy)]
pub struct EnumOptions {
    pub cap: u64,
    /// Also collect the joint distribution of all targets.
    pub joint: bool,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { cap: DEFAULT_CAP, joint: false }
    }
}

/// Exact value counts over every input tuple. Counts are weighted by tuple
/// multiplicity; `total` is the sum of all weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub total: u64,
    pub targets: Vec<String>,
    pub per_target: BTreeMap<String, BTreeMap<u64, u64>>,
    pub joint: Option<BTreeMap<Vec<u64>, u64>>,
}

impl Enumeration {
    pub fn values(&self, var: &str) -> BTreeSet<u64> {
        self.per_target.get(var).map(|d| d.keys().copied().collect()).unwrap_or_default()
    }

    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        for (var, dist) in &self.per_target {
            let d: Map<String, Value> = dist.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            out.insert(var.clone(), Value::Object(d));
        }
        out.insert("total".into(), json!(self.total));
        Value::Object(out)
    }
}

/// Runs `p` on every tuple of `dom` and tallies the final values of
/// `targets`. A target left unassigned on some path counts as 0, matching
/// the zero-initialized registers of the quantum backend.
pub fn enumerate(
    p: &Program,
    dom: &InputDomain,
    m: u32,
    targets: &[String],
    opts: EnumOptions,
) -> Result<Enumeration> {
    let inputs = dom.inputs(p, m)?;
    let size: u128 = inputs.iter().map(|(_, v)| v.len() as u128).product();
    if size > opts.cap as u128 {
        return Err(Error::CapExceeded { size, cap: opts.cap });
    }
    let radices: Vec<usize> = inputs.iter().map(|(_, v)| v.len()).collect();
    let tuple = |mut i: u64| -> Vec<(String, u64)> {
        let mut out = Vec::with_capacity(inputs.len());
        for (k, (name, vals)) in inputs.iter().enumerate().rev() {
            let r = radices[k] as u64;
            out.push((name.clone(), vals[(i % r) as usize]));
            i /= r;
        }
        out.reverse();
        out
    };
    run_all(p, m, targets, opts.joint, size as u64, |i| (tuple(i), 1))
}

/// Like [`enumerate`], but over an explicit list of weighted input tuples
/// (e.g. the joint output of a program prefix). `names` labels the tuple
/// positions.
pub fn enumerate_weighted(
    p: &Program,
    names: &[String],
    tuples: &[(Vec<u64>, u64)],
    m: u32,
    targets: &[String],
    joint: bool,
) -> Result<Enumeration> {
    run_all(p, m, targets, joint, tuples.len() as u64, |i| {
        let (vals, w) = &tuples[i as usize];
        (names.iter().cloned().zip(vals.iter().copied()).collect(), *w)
    })
}

#[derive(Default)]
struct Acc {
    total: u64,
    per: Vec<BTreeMap<u64, u64>>,
    joint: BTreeMap<Vec<u64>, u64>,
}

impl Acc {
    fn merge(mut self, other: Acc) -> Acc {
        self.total += other.total;
        if self.per.len() < other.per.len() {
            self.per.resize_with(other.per.len(), BTreeMap::new);
        }
        for (mine, theirs) in self.per.iter_mut().zip(other.per) {
            for (k, v) in theirs {
                *mine.entry(k).or_default() += v;
            }
        }
        for (k, v) in other.joint {
            *self.joint.entry(k).or_default() += v;
        }
        self
    }
}

fn run_all<F>(p: &Program, m: u32, targets: &[String], joint: bool, count: u64, tuple: F) -> Result<Enumeration>
where
    F: Fn(u64) -> (Vec<(String, u64)>, u64) + Sync,
{
    let acc = (0..count)
        .into_par_iter()
        .try_fold(Acc::default, |mut acc, i| {
            let (assign, weight) = tuple(i);
            let env = ConcreteEnv {
                vars: assign.iter().cloned().collect(),
                pointers: BTreeMap::new(),
            };
            let out = interpret(p, &env, m).map_err(|e| Error::AtInput {
                input: describe(&assign),
                source: Box::new(e),
            })?;
            let vals: Vec<u64> = targets.iter().map(|t| out.get(t).unwrap_or(0)).collect();
            if acc.per.is_empty() {
                acc.per = vec![BTreeMap::new(); targets.len()];
            }
            for (slot, v) in acc.per.iter_mut().zip(&vals) {
                *slot.entry(*v).or_default() += weight;
            }
            if joint {
                *acc.joint.entry(vals).or_default() += weight;
            }
            acc.total += weight;
            Ok::<_, Error>(acc)
        })
        .try_reduce(Acc::default, |a, b| Ok(a.merge(b)))?;
    let mut per_target = BTreeMap::new();
    for (i, t) in targets.iter().enumerate() {
        per_target.insert(t.clone(), acc.per.get(i).cloned().unwrap_or_default());
    }
    Ok(Enumeration {
        total: acc.total,
        targets: targets.to_vec(),
        per_target,
        joint: joint.then_some(acc.joint),
    })
}

fn describe(assign: &[(String, u64)]) -> String {
    let parts: Vec<String> = assign.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{{{}}}", parts.join(", "))
}
