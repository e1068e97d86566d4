use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalPoint;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Interval, DomainError> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(DomainError::NonFinite { lo, hi });
        }
        if lo > hi {
            return Err(DomainError::Inverted { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("interval [{lo}, {hi}] has lower bound above upper bound")]
    Inverted { lo: f64, hi: f64 },
    #[error("interval [{lo}, {hi}] is not finite")]
    NonFinite { lo: f64, hi: f64 },
    #[error("effective domain is empty in `{0}`")]
    Empty(String),
    #[error("variable `{0}` has no interval in the domain")]
    Uncovered(String),
}

/// A box of closed intervals, one per variable.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    intervals: BTreeMap<String, Interval>,
}

impl Domain {
    pub fn new() -> Domain {
        Domain::default()
    }

    /// Adds (or replaces) the interval for `var`.
    pub fn with(mut self, var: &str, lo: f64, hi: f64) -> Result<Domain, DomainError> {
        self.intervals.insert(var.to_string(), Interval::new(lo, hi)?);
        Ok(self)
    }

    pub fn set(&mut self, var: &str, interval: Interval) {
        self.intervals.insert(var.to_string(), interval);
    }

    pub fn get(&self, var: &str) -> Option<Interval> {
        self.intervals.get(var).copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.intervals.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Interval)> {
        self.intervals.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, point: &EvalPoint) -> bool {
        self.intervals.iter().all(|(k, iv)| point.get(k).is_some_and(|x| iv.contains(*x)))
    }

    /// Intersection; variables present in only one side keep their interval.
    pub fn intersect(&self, other: &Domain) -> Result<Domain, DomainError> {
        let mut out = self.clone();
        for (k, b) in &other.intervals {
            let merged = match self.intervals.get(k) {
                Some(a) => {
                    let (lo, hi) = (a.lo.max(b.lo), a.hi.min(b.hi));
                    if lo > hi {
                        return Err(DomainError::Empty(k.clone()));
                    }
                    Interval { lo, hi }
                }
                None => *b,
            };
            out.intervals.insert(k.clone(), merged);
        }
        Ok(out)
    }

    /// Restricts to the listed variables.
    pub fn project(&self, vars: &[&str]) -> Domain {
        Domain { intervals: self.intervals.iter().filter(|(k, _)| vars.contains(&k.as_str())).map(|(k, v)| (k.clone(), *v)).collect() }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> EvalPoint {
        self.intervals
            .iter()
            .map(|(k, iv)| {
                let x = if iv.width() > 0.0 { rng.gen_range(iv.lo..=iv.hi) } else { iv.lo };
                (k.clone(), x)
            })
            .collect()
    }

    /// All `2^n` vertices of the box.
    pub fn corners(&self) -> Vec<EvalPoint> {
        let mut out = vec![EvalPoint::new()];
        for (k, iv) in &self.intervals {
            let mut next = Vec::with_capacity(out.len() * 2);
            for p in &out {
                for x in [iv.lo, iv.hi] {
                    let mut q = p.clone();
                    q.insert(k.clone(), x);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    pub fn center(&self) -> EvalPoint {
        self.intervals.iter().map(|(k, iv)| (k.clone(), iv.mid())).collect()
    }
}

/// `n` uniform points from a seeded ChaCha8 stream.
pub fn sample_points(domain: &Domain, n: usize, seed: u64) -> Vec<EvalPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| domain.sample(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverted_intervals_are_rejected() {
        assert!(matches!(Domain::new().with("x", 1.0, -1.0), Err(DomainError::Inverted { .. })));
        assert!(Domain::new().with("x", 0.5, 0.5).is_ok());
    }

    #[test]
    fn intersection() {
        let a = Domain::new().with("x", -1.0, 1.0).unwrap();
        let b = Domain::new().with("x", 0.0, 2.0).unwrap().with("v", -3.0, 3.0).unwrap();
        let c = a.intersect(&b).unwrap();
        assert_eq!(c.get("x"), Some(Interval { lo: 0.0, hi: 1.0 }));
        assert_eq!(c.get("v"), Some(Interval { lo: -3.0, hi: 3.0 }));
        let far = Domain::new().with("x", 5.0, 6.0).unwrap();
        assert!(matches!(a.intersect(&far), Err(DomainError::Empty(_))));
    }

    #[test]
    fn sampling_is_reproducible_and_inside() {
        let d = Domain::new().with("x", -2.0, 1.0).unwrap().with("v", 0.1, 0.2).unwrap();
        let p = sample_points(&d, 50, 7);
        assert_eq!(p, sample_points(&d, 50, 7));
        assert!(p.iter().all(|q| d.contains(q)));
        assert_eq!(d.corners().len(), 4);
    }
}
