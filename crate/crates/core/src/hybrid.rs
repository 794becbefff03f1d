//! Straight hybridization: a classical pass over the program prefix (which
//! holds every pointer statement) feeds input domains to the quantum
//! analysis of the suffix.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::amplify::{amplify, required_l, schedule, SearchStats, TargetSpec};
use crate::classical::{enumerate, interval_analyze, split, DomainSpec, EnumOptions, InputDomain, Interval, DEFAULT_CAP};
use crate::lang::{Program, RETURN_VAR};
use crate::report::{compare, ApproxReport};
use crate::sim::Distribution;
use crate::synth::{synthesize_with, InputInit, SynthOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrefixBackend {
    /// Exact joint value tuples; keeps dependencies between suffix inputs.
    Enumerate,
    /// Independent intervals per suffix input.
    Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridPlan {
    pub split: usize,
    pub prefix_backend: PrefixBackend,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub target: Option<String>,
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, Default)]
pub struct PlanPrefs {
    pub split: Option<usize>,
    pub backend: Option<PrefixBackend>,
    pub cap: Option<u64>,
    pub delta: Option<f64>,
    pub target: Option<String>,
}

/// Smallest split that puts every pointer statement in the prefix.
pub fn min_split(p: &Program) -> usize {
    p.body.iter().rposition(|s| s.contains_pointer_stmt()).map_or(0, |i| i + 1)
}

pub fn plan(p: &Program, dom: &InputDomain, m: u32, prefs: &PlanPrefs) -> Result<HybridPlan> {
    let need = min_split(p);
    let split = match prefs.split {
        Some(s) if s < need => {
            return Err(Error::Split(format!(
                "pointer statement at line {} lies after split point {s}",
                p.body[need - 1].span.line
            )))
        }
        Some(s) if s > p.body.len() => {
            return Err(Error::Split(format!("split {s} is past the end of the body")))
        }
        Some(s) => s,
        None => need,
    };
    let cap = prefs.cap.unwrap_or(DEFAULT_CAP);
    let prefix_backend = prefs.backend.unwrap_or(if dom.size(p, m)? <= u128::from(cap) {
        PrefixBackend::Enumerate
    } else {
        PrefixBackend::Interval
    });
    Ok(HybridPlan { split, prefix_backend, delta: prefs.delta.unwrap_or(0.1), target: prefs.target.clone() })
}

#[derive(Debug, Clone)]
pub struct HybridReport {
    pub plan: HybridPlan,
    pub suffix: Program,
    /// Suffix inputs and how they were initialized.
    pub inputs: Vec<(String, DomainSpec)>,
    pub distribution: Distribution,
    pub values: BTreeSet<u64>,
    pub approx: ApproxReport,
    pub qubits: usize,
    pub search: Option<SearchStats>,
}

impl HybridReport {
    pub fn to_json(&self) -> Value {
        let inputs: serde_json::Map<String, Value> =
            self.inputs.iter().map(|(n, s)| (n.clone(), spec_json(s))).collect();
        json!({
            "plan": self.plan,
            "suffix_inputs": inputs,
            "values": self.values,
            "qubits": self.qubits,
            "report": self.approx.to_json(),
            "search": self.search,
        })
    }
}

fn spec_json(s: &DomainSpec) -> Value {
    match s {
        DomainSpec::Full => json!("full"),
        DomainSpec::Interval(a, b) => json!({"interval": [a, b]}),
        DomainSpec::Set(v) => json!({"set": v}),
    }
}

/// Analyzes the prefix classically, the suffix with the quantum pipeline,
/// and compares the returned values with whole-program enumeration.
pub fn run_hybrid(p: &Program, dom: &InputDomain, hp: &HybridPlan, opts: &SynthOptions) -> Result<HybridReport> {
    let m = opts.m;
    let (prefix, suffix) = split(p, hp.split)?;
    let names: Vec<String> = suffix.int_params().map(str::to_string).collect();
    let (init, inputs) = match hp.prefix_backend {
        PrefixBackend::Enumerate => {
            let e = enumerate(&prefix, dom, m, &names, EnumOptions { cap: DEFAULT_CAP, joint: true })?;
            let tuples: Vec<(Vec<u64>, u64)> = e.joint.clone().unwrap_or_default().into_iter().collect();
            let inputs = names
                .iter()
                .map(|n| (n.clone(), DomainSpec::Set(e.values(n).into_iter().collect())))
                .collect();
            (InputInit::Joint { tuples }, inputs)
        }
        PrefixBackend::Interval => {
            let env = interval_analyze(&prefix, dom, m)?;
            if !env.reachable {
                return Err(Error::Domain("split point is unreachable".into()));
            }
            let mut d = InputDomain::full();
            let mut inputs = Vec::new();
            for n in &names {
                let iv = env.get(n).unwrap_or(Interval::point(0));
                let spec = DomainSpec::Interval(iv.lo, iv.hi);
                d = d.with(n.clone(), spec.clone());
                inputs.push((n.clone(), spec));
            }
            (InputInit::Domain(d), inputs)
        }
    };
    let r = synthesize_with(&suffix, init, opts)?;
    let state = r.simulate()?;
    let reg = r.register(RETURN_VAR)?.to_vec();
    let distribution = state.marginal(&reg);
    let values: BTreeSet<u64> = distribution.support().into_iter().collect();
    let gt = enumerate(p, dom, m, &[RETURN_VAR.to_string()], EnumOptions::default())?.values(RETURN_VAR);
    let approx = compare(&values, &gt)?;
    let search = match &hp.target {
        None => None,
        Some(t) => {
            let t: TargetSpec = t.parse()?;
            let marked = t.bind(&r.layout, m)?;
            let n = r.input_count();
            let p0: f64 = state.entries().iter().filter(|(b, _)| marked(b)).map(|(_, a)| a.norm_sqr()).sum();
            let l = required_l(hp.delta, 1.0 / n as f64)?;
            let sched = schedule(hp.delta, l)?;
            let p_final = if p0 == 0.0 { 0.0 } else { amplify(&state, &marked, &sched).1 };
            Some(SearchStats {
                n,
                m: (p0 * n as f64).round() as u64,
                p0,
                l,
                delta: hp.delta,
                gamma: sched.gamma,
                p_final,
                queries: l,
            })
        }
    };
    Ok(HybridReport {
        plan: hp.clone(),
        suffix,
        inputs,
        distribution,
        values,
        approx,
        qubits: r.circuit.qubits,
        search,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundN {
    pub intervals: BTreeMap<String, Interval>,
    pub domain: InputDomain,
    /// Product of the refined interval sizes.
    pub refined: u128,
    /// `2^((m + 1) * inputs)`: every suffix input over its full register.
    pub unrefined: u128,
}

impl BoundN {
    /// Iterations needed for `M` marked states before and after refinement.
    pub fn iterations(&self, delta: f64, m_marked: u64) -> Result<(u64, u64)> {
        let mm = m_marked.max(1) as f64;
        Ok((
            required_l(delta, (mm / self.unrefined as f64).min(1.0))?,
            required_l(delta, (mm / self.refined as f64).min(1.0))?,
        ))
    }

    pub fn to_json(&self) -> Value {
        let iv: serde_json::Map<String, Value> =
            self.intervals.iter().map(|(k, i)| (k.clone(), json!([i.lo, i.hi]))).collect();
        json!({"intervals": iv, "N_refined": self.refined.to_string(), "N_unrefined": self.unrefined.to_string()})
    }
}

/// Interval analysis of the prefix bounds each suffix input, shrinking the
/// search space the suffix is queried over.
pub fn bound_n(p: &Program, dom: &InputDomain, m: u32, split_at: usize) -> Result<BoundN> {
    let (prefix, suffix) = split(p, split_at)?;
    let env = interval_analyze(&prefix, dom, m)?;
    if !env.reachable {
        return Err(Error::Domain("split point is unreachable".into()));
    }
    let names: Vec<String> = suffix.int_params().map(str::to_string).collect();
    let full = Interval::new(0, crate::word_mask(m));
    let mut intervals = BTreeMap::new();
    let mut domain = InputDomain::full();
    for n in &names {
        let iv = env.get(n).unwrap_or(full);
        domain = domain.with(n.clone(), DomainSpec::Interval(iv.lo, iv.hi));
        intervals.insert(n.clone(), iv);
    }
    let refined = intervals.values().map(|i| u128::from(i.size())).product();
    let unrefined = (1u128 << (m + 1)).pow(names.len() as u32);
    Ok(BoundN { intervals, domain, refined, unrefined })
}
