use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::lang::{pointee_cell, Program};
use crate::{word_mask, Error, Result};

/// Admissible values of one input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainSpec {
    /// Every value of `[0, 2^m - 1]`.
    Full,
    Interval(u64, u64),
    Set(Vec<u64>),
}

impl DomainSpec {
    pub fn check(&self, m: u32) -> Result<()> {
        let max = word_mask(m);
        match self {
            DomainSpec::Full => Ok(()),
            DomainSpec::Interval(lo, hi) if lo > hi => {
                Err(Error::Domain(format!("empty interval [{lo}, {hi}]")))
            }
            DomainSpec::Interval(_, hi) if *hi > max => {
                Err(Error::Domain(format!("interval bound {hi} exceeds {max}")))
            }
            DomainSpec::Interval(..) => Ok(()),
            DomainSpec::Set(v) if v.is_empty() => Err(Error::Domain("empty set".into())),
            DomainSpec::Set(v) => match v.iter().find(|&&x| x > max) {
                Some(x) => Err(Error::Domain(format!("set member {x} exceeds {max}"))),
                None => Ok(()),
            },
        }
    }

    /// Sorted, duplicate-free members.
    pub fn values(&self, m: u32) -> Vec<u64> {
        match self {
            DomainSpec::Full => (0..1u64 << m).collect(),
            DomainSpec::Interval(lo, hi) => (*lo..=*hi).collect(),
            DomainSpec::Set(v) => {
                let mut v = v.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }

    pub fn size(&self, m: u32) -> u64 {
        match self {
            DomainSpec::Full => 1u64 << m,
            DomainSpec::Interval(lo, hi) => hi - lo + 1,
            DomainSpec::Set(_) => self.values(m).len() as u64,
        }
    }

    pub fn hull(&self, m: u32) -> (u64, u64) {
        match self {
            DomainSpec::Full => (0, (1u64 << m) - 1),
            DomainSpec::Interval(lo, hi) => (*lo, *hi),
            DomainSpec::Set(_) => {
                let v = self.values(m);
                (v[0], v[v.len() - 1])
            }
        }
    }

    fn to_json(&self) -> Value {
        match self {
            DomainSpec::Full => json!("full"),
            DomainSpec::Interval(lo, hi) => json!({ "interval": [lo, hi] }),
            DomainSpec::Set(v) => json!({ "set": v }),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Domain(format!("unrecognized domain entry {v}"));
        if v.as_str() == Some("full") {
            return Ok(DomainSpec::Full);
        }
        let obj = v.as_object().ok_or_else(bad)?;
        let nums = |key: &str| -> Result<Option<Vec<u64>>> {
            match obj.get(key) {
                None => Ok(None),
                Some(Value::Array(a)) => a
                    .iter()
                    .map(|x| x.as_u64().ok_or_else(bad))
                    .collect::<Result<Vec<_>>>()
                    .map(Some),
                Some(_) => Err(bad()),
            }
        };
        if let Some(iv) = nums("interval")? {
            return match iv.as_slice() {
                [lo, hi] => Ok(DomainSpec::Interval(*lo, *hi)),
                _ => Err(bad()),
            };
        }
        if let Some(s) = nums("set")? {
            return Ok(DomainSpec::Set(s));
        }
        Err(bad())
    }
}

/// Per-input domains. Integer inputs without an entry range over the full
/// domain; the cell behind a pointer input `a` is named `*a` and defaults
/// to `{0}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InputDomain {
    pub vars: BTreeMap<String, DomainSpec>,
}

impl InputDomain {
    pub fn full() -> Self {
        InputDomain::default()
    }

    pub fn with(mut self, var: impl Into<String>, spec: DomainSpec) -> Self {
        self.vars.insert(var.into(), spec);
        self
    }

    pub fn spec(&self, var: &str) -> DomainSpec {
        self.vars.get(var).cloned().unwrap_or(DomainSpec::Full)
    }

    /// Ordered input names and their values: integer parameters in
    /// declaration order, then the cells behind pointer parameters.
    pub fn inputs(&self, p: &Program, m: u32) -> Result<Vec<(String, Vec<u64>)>> {
        let mut out = Vec::new();
        for name in p.int_params() {
            let spec = self.spec(name);
            spec.check(m)?;
            out.push((name.to_string(), spec.values(m)));
        }
        for prm in p.params.iter().filter(|p| p.is_pointer) {
            let cell = pointee_cell(&prm.name);
            let spec = self.vars.get(&cell).cloned().unwrap_or(DomainSpec::Set(vec![0]));
            spec.check(m)?;
            out.push((cell, spec.values(m)));
        }
        Ok(out)
    }

    /// Number of input tuples.
    pub fn size(&self, p: &Program, m: u32) -> Result<u128> {
        Ok(self.inputs(p, m)?.iter().map(|(_, v)| v.len() as u128).product())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let obj = v.as_object().ok_or_else(|| Error::Domain("expected a JSON object".into()))?;
        let mut vars = BTreeMap::new();
        for (k, spec) in obj {
            vars.insert(k.clone(), DomainSpec::from_json(spec)?);
        }
        Ok(InputDomain { vars })
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in &self.vars {
            m.insert(k.clone(), v.to_json());
        }
        Value::Object(m)
    }
}
