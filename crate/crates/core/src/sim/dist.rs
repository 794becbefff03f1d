use std::collections::BTreeMap;

use num_integer::Integer;
use serde_json::{json, Map, Value};

/// Probabilities of the values of one register.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub probs: BTreeMap<u64, f64>,
}

/// Probabilities of value tuples over several registers.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub probs: BTreeMap<Vec<u64>, f64>,
}

/// Values with probability at or below this are treated as absent.
const SUPPORT_EPS: f64 = 1e-9;

fn counts_over<K: Ord + Clone>(probs: &BTreeMap<K, f64>, den: u64) -> Option<BTreeMap<K, u64>> {
    let mut out = BTreeMap::new();
    for (k, &p) in probs {
        let scaled = p * den as f64;
        let n = scaled.round();
        if (scaled - n).abs() > 1e-6 || (n / den as f64 - p).abs() > 1e-9 {
            return None;
        }
        if n > 0.0 {
            out.insert(k.clone(), n as u64);
        }
    }
    Some(out)
}

impl Distribution {
    pub fn support(&self) -> Vec<u64> {
        self.probs.iter().filter(|(_, &p)| p > SUPPORT_EPS).map(|(&v, _)| v).collect()
    }

    pub fn prob(&self, v: u64) -> f64 {
        self.probs.get(&v).copied().unwrap_or(0.0)
    }

    /// Expresses every probability as `count / den`; `None` if some value
    /// is not within 1e-9 of such a fraction.
    pub fn counts_over(&self, den: u64) -> Option<BTreeMap<u64, u64>> {
        counts_over(&self.probs, den)
    }

    /// Reduced fractions `(num, den)` against the common denominator `den`.
    pub fn rational(&self, den: u64) -> Option<BTreeMap<u64, (u64, u64)>> {
        let counts = self.counts_over(den)?;
        Some(
            counts
                .into_iter()
                .map(|(v, n)| {
                    let g = n.gcd(&den);
                    (v, (n / g, den / g))
                })
                .collect(),
        )
    }

    /// `{value: {"num","den"}}` when `den` rationalizes the distribution,
    /// float probabilities otherwise.
    pub fn to_json(&self, den: Option<u64>) -> Value {
        let mut out = Map::new();
        match den.and_then(|d| self.rational(d)) {
            Some(r) => {
                for (v, (n, d)) in r {
                    out.insert(v.to_string(), json!({"num": n, "den": d}));
                }
            }
            None => {
                for (v, p) in &self.probs {
                    if *p > SUPPORT_EPS {
                        out.insert(v.to_string(), json!(p));
                    }
                }
            }
        }
        Value::Object(out)
    }
}

impl JointDistribution {
    pub fn support(&self) -> Vec<Vec<u64>> {
        self.probs.iter().filter(|(_, &p)| p > SUPPORT_EPS).map(|(v, _)| v.clone()).collect()
    }

    pub fn prob(&self, v: &[u64]) -> f64 {
        self.probs.get(v).copied().unwrap_or(0.0)
    }

    pub fn counts_over(&self, den: u64) -> Option<BTreeMap<Vec<u64>, u64>> {
        counts_over(&self.probs, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationalize() {
        let d = Distribution { probs: [(1, 5.0 / 64.0), (6, 13.0 / 64.0), (7, 46.0 / 64.0)].into_iter().collect() };
        let r = d.rational(64).unwrap();
        assert_eq!(r[&1], (5, 64));
        assert_eq!(r[&7], (23, 32));
        assert!(d.counts_over(10).is_none());
        assert_eq!(d.to_json(Some(64))["1"], json!({"num": 5, "den": 64}));
    }

    #[test]
    fn support_ignores_dust() {
        let d = Distribution { probs: [(1, 1.0), (2, 1e-15)].into_iter().collect() };
        assert_eq!(d.support(), vec![1]);
    }
}
