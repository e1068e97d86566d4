//! Randomized identity testing and sign certificates over a domain box.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Bindings, Compiled, Domain, DomainError, EvalError, EvalPoint, Expr};

pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZeroTestConfig {
    pub samples: usize,
    pub tol: f64,
    /// Draw budget as a multiple of `samples`; singular draws are skipped.
    pub retry_factor: usize,
    pub seed: u64,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig { samples: 64, tol: 1e-9, retry_factor: 10, seed: DEFAULT_SEED }
    }
}

impl ZeroTestConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        ZeroTestConfig { seed, ..self }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Zero { samples: usize, max_scaled: f64 },
    NonZero { witness: EvalPoint, residual: f64, scaled: f64 },
    Inconclusive { accepted: usize, required: usize, last_error: Option<String> },
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, Verdict::Zero { .. })
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ZeroTestError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Tests whether `e` vanishes identically on `domain`.
///
/// The residual at a point is `|Σ t_i| / (1 + Σ |t_i|)` over the top-level
/// terms of `e`, which makes the tolerance relative to the size of the parts
/// that are meant to cancel.
pub fn zero_test(e: &Expr, domain: &Domain, params: &Bindings, cfg: &ZeroTestConfig) -> Result<Verdict, ZeroTestError> {
    let slots: Vec<&str> = domain.vars().collect();
    for v in e.variables() {
        if !slots.contains(&v.as_str()) && !params.contains_key(&v) {
            return Err(DomainError::Uncovered(v).into());
        }
    }
    for p in e.parameters() {
        if !slots.contains(&p.as_str()) && !params.contains_key(&p) {
            return Err(EvalError::Unbound(p).into());
        }
    }
    let terms: Vec<Compiled> =
        e.terms().iter().map(|t| Compiled::new(t, &slots, params)).collect::<Result<_, _>>()?;
    let residual = |values: &[f64]| -> Result<(f64, f64), EvalError> {
        let (mut sum, mut mag) = (0.0, 0.0);
        for t in &terms {
            let x = t.eval(values)?;
            sum += x;
            mag += x.abs();
        }
        Ok((sum, mag))
    };
    zero_test_with(domain, cfg, |p| {
        let values: Vec<f64> = slots.iter().map(|s| p[*s]).collect();
        residual(&values)
    })
}

/// Zero test over an arbitrary residual. `f` returns the signed value and the
/// magnitude scale it should be compared against.
pub fn zero_test_with(
    domain: &Domain,
    cfg: &ZeroTestConfig,
    mut f: impl FnMut(&EvalPoint) -> Result<(f64, f64), EvalError>,
) -> Result<Verdict, ZeroTestError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let budget = cfg.samples * cfg.retry_factor.max(1);
    let mut accepted = 0;
    let mut max_scaled: f64 = 0.0;
    let mut last_error = None;
    for _ in 0..budget {
        if accepted == cfg.samples {
            break;
        }
        let p = domain.sample(&mut rng);
        match f(&p) {
            Ok((value, scale)) => {
                let scaled = value.abs() / (1.0 + scale);
                if !(scaled < cfg.tol) {
                    return Ok(Verdict::NonZero { witness: p, residual: value, scaled });
                }
                max_scaled = max_scaled.max(scaled);
                accepted += 1;
            }
            Err(err) => last_error = Some(err.to_string()),
        }
        if domain.is_empty() && accepted > 0 {
            // no free variables: one evaluation decides
            return Ok(Verdict::Zero { samples: accepted, max_scaled });
        }
    }
    if accepted == cfg.samples {
        Ok(Verdict::Zero { samples: accepted, max_scaled })
    } else {
        Ok(Verdict::Inconclusive { accepted, required: cfg.samples, last_error })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "certificate", rename_all = "snake_case")]
pub enum Certificate {
    /// Constant sign on every probe; `min_abs` is the smallest magnitude seen.
    NonVanishing { sign: i8, min_abs: f64, probes: usize },
    Vanishes { witness: EvalPoint },
    SignChange { positive: EvalPoint, negative: EvalPoint },
    Singular { witness: EvalPoint, reason: String },
}

impl Certificate {
    pub fn holds(&self) -> bool {
        matches!(self, Certificate::NonVanishing { .. })
    }
}

/// Probes `e` on 256 seeded samples plus every corner of `domain`.
pub fn certify_nonvanishing(e: &Expr, domain: &Domain, params: &Bindings, seed: u64) -> Result<Certificate, ZeroTestError> {
    let slots: Vec<&str> = domain.vars().collect();
    for v in e.variables() {
        if !slots.contains(&v.as_str()) && !params.contains_key(&v) {
            return Err(DomainError::Uncovered(v).into());
        }
    }
    let c = Compiled::new(e, &slots, params)?;
    certify_nonvanishing_with(domain, seed, |p| c.eval_at(p))
}

pub fn certify_nonvanishing_with(
    domain: &Domain,
    seed: u64,
    mut f: impl FnMut(&EvalPoint) -> Result<f64, EvalError>,
) -> Result<Certificate, ZeroTestError> {
    const SAMPLES: usize = 256;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes: Vec<EvalPoint> = (0..SAMPLES).map(|_| domain.sample(&mut rng)).collect();
    probes.extend(domain.corners());
    let mut positive: Option<EvalPoint> = None;
    let mut negative: Option<EvalPoint> = None;
    let mut min_abs = f64::INFINITY;
    for p in &probes {
        let value = match f(p) {
            Ok(v) => v,
            Err(err) => return Ok(Certificate::Singular { witness: p.clone(), reason: err.to_string() }),
        };
        if value == 0.0 {
            return Ok(Certificate::Vanishes { witness: p.clone() });
        }
        min_abs = min_abs.min(value.abs());
        if value > 0.0 {
            positive.get_or_insert_with(|| p.clone());
        } else {
            negative.get_or_insert_with(|| p.clone());
        }
        if let (Some(pos), Some(neg)) = (&positive, &negative) {
            return Ok(Certificate::SignChange { positive: pos.clone(), negative: neg.clone() });
        }
    }
    let sign = if positive.is_some() { 1 } else { -1 };
    Ok(Certificate::NonVanishing { sign, min_abs, probes: probes.len() })
}
