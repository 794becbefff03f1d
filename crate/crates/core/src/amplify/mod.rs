//! Fixed-point amplitude amplification over the superposed program output.
//!
//! Reflections act directly on the simulated state: the target reflection
//! multiplies marked amplitudes by a phase, the source reflection is the
//! rank-one update `I - (1 - e^{-i alpha}) |s><s|`. Both keep the support
//! of `|s>`, so the state is carried as a vector aligned to it.

mod target;

pub use target::{Cmp, Condition, TargetSpec};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::classical::InputDomain;
use crate::lang::Program;
use crate::sim::{Basis, SparseState};
use crate::synth::{synthesize, SynthOptions};
use crate::{Error, Result};

/// `T_n(x)` for real `n`: `cos(n acos x)` on `[-1, 1]`, `cosh(n acosh x)`
/// above 1.
pub fn chebyshev_t(n: f64, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (n * x.acos()).cos()
    } else if x > 1.0 {
        (n * x.acosh()).cosh()
    } else {
        let s = if n.rem_euclid(2.0) == 1.0 { -1.0 } else { 1.0 };
        s * (n * (-x).acosh()).cosh()
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("delta must lie in (0, 1], got {delta}")))
    }
}

/// Coverage threshold: amplification with `L` rounds succeeds with
/// probability at least `1 - delta^2` whenever `p0 >= 1 - gamma^2`.
pub fn gamma(delta: f64, l: u64) -> Result<f64> {
    check_delta(delta)?;
    Ok(1.0 / chebyshev_t(1.0 / (2 * l + 1) as f64, 1.0 / delta))
}

/// Smallest `L` whose coverage includes `p0`.
pub fn required_l(delta: f64, p0: f64) -> Result<u64> {
    check_delta(delta)?;
    if !(p0 > 0.0 && p0 <= 1.0) {
        return Err(Error::Config(format!("success probability bound must lie in (0, 1], got {p0}")));
    }
    let mut l = 0;
    loop {
        let g = gamma(delta, l)?;
        if 1.0 - g * g <= p0 {
            return Ok(l);
        }
        l += 1;
    }
}

/// Textbook Grover iteration count, for comparison only.
pub fn grover_iterations(n: u64, m: u64) -> Result<u64> {
    if m == 0 || m > n {
        return Err(Error::Config(format!("need 1 <= M <= N, got M = {m}, N = {n}")));
    }
    Ok((PI / 4.0 * (n as f64 / m as f64).sqrt()).floor() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub l: u64,
    pub delta: f64,
    pub gamma: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

pub fn schedule(delta: f64, l: u64) -> Result<Schedule> {
    let g = gamma(delta, l)?;
    let root = (1.0 - g * g).max(0.0).sqrt();
    let period = (2 * l + 1) as f64;
    let alpha: Vec<f64> = (1..=l)
        .map(|j| {
            let t = (2.0 * PI * j as f64 / period).tan() * root;
            2.0 * 1f64.atan2(t)
        })
        .collect();
    let beta = (1..=l as usize).map(|j| -alpha[l as usize - j]).collect();
    Ok(Schedule { l, delta, gamma: g, alpha, beta })
}

/// Runs the schedule starting from `s`. Returns the final state and the
/// probability mass on marked states.
pub fn amplify(s: &SparseState, marked: impl Fn(&Basis) -> bool, sched: &Schedule) -> (SparseState, f64) {
    let src: Vec<Complex64> = s.entries().iter().map(|(_, a)| *a).collect();
    let mask: Vec<bool> = s.entries().iter().map(|(b, _)| marked(b)).collect();
    let amps = amplify_vec(&src, &mask, sched);
    let p = success(&amps, &mask);
    let mut out = s.clone();
    for ((_, a), v) in out.entries_mut().iter_mut().zip(amps) {
        *a = v;
    }
    (out, p)
}

fn success(amps: &[Complex64], mask: &[bool]) -> f64 {
    amps.iter().zip(mask).filter(|(_, &m)| m).map(|(a, _)| a.norm_sqr()).sum()
}

fn amplify_vec(src: &[Complex64], mask: &[bool], sched: &Schedule) -> Vec<Complex64> {
    let mut a = src.to_vec();
    for (al, be) in sched.alpha.iter().zip(&sched.beta) {
        let tphase = Complex64::from_polar(1.0, *be);
        for (x, _) in a.iter_mut().zip(mask).filter(|(_, &m)| m) {
            *x *= tphase;
        }
        let overlap: Complex64 = src.iter().zip(&a).map(|(s, x)| s.conj() * x).sum();
        let k = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -al)) * overlap;
        for (x, s) in a.iter_mut().zip(src) {
            *x -= k * s;
        }
    }
    a
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchStats {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub p0: f64,
    #[serde(rename = "L")]
    pub l: u64,
    pub delta: f64,
    pub gamma: f64,
    pub p_final: f64,
    /// Prep/unprep pairs, one per round.
    pub queries: u64,
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub stats: SearchStats,
    pub target: TargetSpec,
    /// Gates of one preparation circuit; a round costs two of them plus
    /// the reflections.
    pub prep_gates: usize,
    pub shots: usize,
    /// Sampled values of the target variables after amplification.
    pub samples: BTreeMap<Vec<u64>, usize>,
    pub hits: usize,
}

impl SearchReport {
    pub fn hit_rate(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.hits as f64 / self.shots as f64
        }
    }

    pub fn to_json(&self) -> Value {
        let vars = self.target.vars();
        let samples: Vec<Value> = self
            .samples
            .iter()
            .map(|(k, n)| {
                let vals: serde_json::Map<String, Value> =
                    vars.iter().cloned().zip(k.iter().map(|v| json!(v))).collect();
                json!({"values": vals, "count": n})
            })
            .collect();
        let mut out = json!({
            "target": self.target.to_string(),
            "stats": self.stats,
            "prep_gates": self.prep_gates,
            "query_gates": self.stats.queries * 2 * self.prep_gates as u64,
            "shots": self.shots,
            "hits": self.hits,
            "samples": samples,
        });
        if self.stats.m == 0 {
            out["message"] = json!("no state of interest");
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub delta: f64,
    pub shots: usize,
    pub seed: u64,
    /// Lower bound on the success probability used to pick `L`; defaults
    /// to `1/N`.
    pub p0_bound: Option<f64>,
    pub cap: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { delta: 0.1, shots: 1000, seed: 0, p0_bound: None, cap: crate::synth::DEFAULT_SUPPORT_CAP }
    }
}

/// Synthesizes, simulates, amplifies the target and samples its variables.
pub fn search(
    p: &Program,
    dom: &InputDomain,
    opts: &SynthOptions,
    target: &TargetSpec,
    so: &SearchOptions,
) -> Result<SearchReport> {
    let r = synthesize(p, dom, opts)?;
    let s = r.simulate_capped(so.cap)?;
    let marked = target.bind(&r.layout, opts.m)?;
    let n = r.input_count();
    let p0: f64 = s.entries().iter().filter(|(b, _)| marked(b)).map(|(_, a)| a.norm_sqr()).sum();
    let m = (p0 * n as f64).round() as u64;
    let bound = so.p0_bound.unwrap_or(1.0 / n as f64);
    let l = required_l(so.delta, bound)?;
    let sched = schedule(so.delta, l)?;
    let (fin, p_final) = if m == 0 { (s.clone(), 0.0) } else { amplify(&s, &marked, &sched) };
    let regs: Vec<Vec<usize>> = target.vars().iter().map(|v| r.layout[v].clone()).collect();
    let samples = fin.sample(&regs, so.shots, so.seed);
    let vars = target.vars();
    let hits = samples
        .iter()
        .filter(|(k, _)| target.holds(|v| k[vars.iter().position(|x| x == v).expect("target var")]))
        .map(|(_, c)| c)
        .sum();
    Ok(SearchReport {
        stats: SearchStats { n, m, p0, l, delta: so.delta, gamma: sched.gamma, p_final, queries: l },
        target: target.clone(),
        prep_gates: r.circuit.gates.len(),
        shots: so.shots,
        samples,
        hits,
    })
}

/// Two-entry state with mass `p0` on a marked basis state (qubit 0 set),
/// for exercising schedules without a program.
pub fn two_state(p0: f64) -> SparseState {
    let mut s = SparseState::zero(1);
    let e = s.entries_mut();
    e.clear();
    e.push((crate::sim::basis_of(1, &[]), Complex64::new((1.0 - p0).sqrt(), 0.0)));
    e.push((crate::sim::basis_of(1, &[0]), Complex64::new(p0.sqrt(), 0.0)));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;
    use crate::sim::read;

    #[test]
    fn gamma_edge_cases() {
        for l in 0..5 {
            assert!((gamma(1.0, l).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((gamma(0.3, 0).unwrap() - 0.3).abs() < 1e-12);
        assert!(gamma(0.0, 1).is_err());
        assert!(gamma(1.5, 1).is_err());
    }

    /// `T_n` by the three-term recurrence.
    fn cheb_rec(n: u64, x: f64) -> f64 {
        let (mut a, mut b) = (1.0, x);
        if n == 0 {
            return a;
        }
        for _ in 1..n {
            (a, b) = (b, 2.0 * x * b - a);
        }
        b
    }

    #[test]
    fn gamma_inverts_chebyshev() {
        for l in [1, 4, 10] {
            let g = gamma(0.1, l).unwrap();
            let t = cheb_rec(2 * l + 1, 1.0 / g);
            assert!((t - 10.0).abs() < 1e-9 * 10.0, "{t}");
        }
    }

    #[test]
    fn chebyshev_branches_agree_with_recurrence() {
        for n in 0..7u64 {
            for x in [-2.5, -1.0, -0.3, 0.0, 0.7, 1.0, 1.8] {
                let r = cheb_rec(n, x);
                assert!((chebyshev_t(n as f64, x) - r).abs() < 1e-9 * r.abs().max(1.0), "T_{n}({x})");
            }
        }
    }

    #[test]
    fn required_l_scaling_and_edges() {
        assert_eq!(required_l(0.1, 1.0).unwrap(), 0);
        assert!(required_l(0.1, 0.0).is_err());
        let ls: Vec<u64> = [0.2, 0.05, 0.0125].iter().map(|&p| required_l(0.1, p).unwrap()).collect();
        // Query counts 2L+1 double when p0 drops by four.
        for w in ls.windows(2) {
            let r = (2 * w[1] + 1) as f64 / (2 * w[0] + 1) as f64;
            assert!((1.8..=2.2).contains(&r), "{ls:?}");
        }
        for l in 0..50 {
            let c0 = 1.0 - gamma(0.1, l).unwrap().powi(2);
            let c1 = 1.0 - gamma(0.1, l + 1).unwrap().powi(2);
            assert!(c1 <= c0 + 1e-15);
        }
    }

    #[test]
    fn schedule_antisymmetry() {
        let s = schedule(0.2, 5).unwrap();
        for j in 0..5 {
            assert_eq!(s.alpha[j], -s.beta[4 - j]);
        }
    }

    #[test]
    fn guarantee_holds_on_grid() {
        for delta in [0.5, 0.2, 0.1] {
            for p0 in [0.02, 0.05, 0.1, 0.2, 0.4, 0.8] {
                let l = required_l(delta, p0).unwrap();
                let (_, p) = amplify(&two_state(p0), |b| b[0] & 1 == 1, &schedule(delta, l).unwrap());
                assert!(p >= 1.0 - delta * delta - 1e-12, "delta {delta} p0 {p0} L {l}: {p}");
            }
        }
    }

    #[test]
    fn matches_two_dimensional_recurrence() {
        // Independent evaluation in the {good, bad} basis.
        let (p0, sched) = (0.07f64, schedule(0.1, 6).unwrap());
        let s = [Complex64::new(p0.sqrt(), 0.0), Complex64::new((1.0 - p0).sqrt(), 0.0)];
        let mut v = s;
        for (al, be) in sched.alpha.iter().zip(&sched.beta) {
            v[0] *= Complex64::from_polar(1.0, *be);
            let ov = s[0].conj() * v[0] + s[1].conj() * v[1];
            let f = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -al);
            v = [v[0] - f * ov * s[0], v[1] - f * ov * s[1]];
        }
        let (st, p) = amplify(&two_state(p0), |b| b[0] & 1 == 1, &sched);
        assert!((p - v[0].norm_sqr()).abs() < 1e-9);
        assert!((st.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn trivial_schedules() {
        let s = two_state(0.3);
        let (_, p) = amplify(&s, |b| b[0] & 1 == 1, &schedule(0.1, 0).unwrap());
        assert!((p - 0.3).abs() < 1e-12);
        let (_, p) = amplify(&s, |_| true, &schedule(0.1, 7).unwrap());
        assert!((p - 1.0).abs() < 1e-9);
        let (_, p) = amplify(&two_state(1.0), |b| b[0] & 1 == 1, &schedule(0.3, 3).unwrap());
        assert!((p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grover_counts() {
        assert_eq!(grover_iterations(4, 1).unwrap(), 1);
        assert_eq!(grover_iterations(9, 9).unwrap(), 0);
        assert_eq!(grover_iterations(64, 13).unwrap(), 1);
        assert!(grover_iterations(4, 0).is_err());
    }

    const FIG1: &str = "int f(int x, int y) { if (x >= 5) { z := x + 1; } else { z := y + 1; } return z; }";

    #[test]
    fn fig1_search_hits_eight() {
        let p = parse(FIG1).unwrap();
        let t: TargetSpec = "z == 8".parse().unwrap();
        let so = SearchOptions { seed: 7, ..Default::default() };
        let r = search(&p, &InputDomain::full(), &SynthOptions::default(), &t, &so).unwrap();
        assert_eq!((r.stats.n, r.stats.m), (64, 13));
        assert!((r.stats.p0 - 13.0 / 64.0).abs() < 1e-12);
        assert!(r.stats.p_final >= 0.99);
        assert!(r.hit_rate() >= 0.98);
        assert!(r.samples.keys().all(|k| k.len() == 1));
    }

    #[test]
    fn unreachable_and_wide_targets() {
        let p = parse(FIG1).unwrap();
        let so = SearchOptions::default();
        let t: TargetSpec = "z == 0".parse().unwrap();
        let r = search(&p, &InputDomain::full(), &SynthOptions::default(), &t, &so).unwrap();
        assert_eq!((r.stats.m, r.stats.p_final, r.hits), (0, 0.0, 0));
        assert_eq!(r.to_json()["message"], "no state of interest");
        let t: TargetSpec = "z >= 6".parse().unwrap();
        let r = search(&p, &InputDomain::full(), &SynthOptions::default(), &t, &so).unwrap();
        assert_eq!(r.stats.m, 39);
        let t: TargetSpec = "w == 1".parse().unwrap();
        assert!(search(&p, &InputDomain::full(), &SynthOptions::default(), &t, &so).is_err());
    }

    #[test]
    fn amplified_state_keeps_norm_and_support() {
        let p = parse(FIG1).unwrap();
        let r = synthesize(&p, &InputDomain::full(), &SynthOptions::default()).unwrap();
        let s = r.simulate().unwrap();
        let z = r.layout["z"].clone();
        let (fin, _) = amplify(&s, |b| read(b, &z) == 8, &schedule(0.1, 4).unwrap());
        assert_eq!(fin.support(), s.support());
        assert!((fin.norm_sqr() - 1.0).abs() < 1e-9);
    }
}
