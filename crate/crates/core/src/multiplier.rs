//! Jacobi multipliers and first integrals of a second-order system.
//!
//! A multiplier `μ` satisfies `v ∂μ/∂x + ∂(μF)/∂v = 0` and must not vanish on
//! its domain. The ratio of two multipliers is conserved, and `G(I)·μ` is a
//! multiplier again for any first integral `I`.

use serde::Serialize;

use crate::expr::{
    certify_nonvanishing, zero_test, Certificate, Domain, DomainError, Expr, Verdict, ZeroTestConfig, ZeroTestError,
};
use crate::geometry::Sode;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MultiplierError {
    #[error("`{0}` is not a verified multiplier")]
    Unverified(String),
    #[error("`{expr}` vanishes or changes sign on the domain: {certificate:?}")]
    Vanishes { expr: String, certificate: Certificate },
    #[error("`{0}` has variables other than x and v")]
    FreeVariable(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

#[derive(Clone, Debug, Serialize)]
pub struct Multiplier {
    pub expr: Expr,
    pub domain: Domain,
    pub residual: Expr,
    pub residual_verdict: Verdict,
    pub certificate: Certificate,
}

impl Multiplier {
    pub fn is_verified(&self) -> bool {
        self.residual_verdict.is_zero() && self.certificate.holds()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FirstIntegral {
    pub expr: Expr,
    pub residual: Expr,
    pub verdict: Verdict,
    pub domain: Domain,
}

impl FirstIntegral {
    pub fn is_verified(&self) -> bool {
        self.verdict.is_zero()
    }
}

/// `v ∂μ/∂x + ∂(μF)/∂v`.
pub fn multiplier_residual(s: &Sode, mu: &Expr) -> Expr {
    let mu = s.bind(mu);
    Expr::var("v") * mu.diff("x") + (&mu * &s.f).diff("v")
}

/// `Γ(I) = v ∂I/∂x + F ∂I/∂v`.
pub fn integral_residual(s: &Sode, i: &Expr) -> Expr {
    s.field().apply(&s.bind(i))
}

fn check_vars(e: &Expr) -> Result<(), MultiplierError> {
    match e.variables().into_iter().find(|v| v != "x" && v != "v") {
        Some(v) => Err(MultiplierError::FreeVariable(v)),
        None => Ok(()),
    }
}

/// Checks the multiplier condition on the system's domain and certifies
/// non-vanishing on `domain` (the system's domain when `None`).
///
/// Both outcomes are recorded; use [`Multiplier::is_verified`] for the
/// combined verdict.
pub fn verify_multiplier(
    s: &Sode,
    mu: &Expr,
    domain: Option<&Domain>,
    cfg: &ZeroTestConfig,
) -> Result<Multiplier, MultiplierError> {
    let mu = s.bind(mu);
    check_vars(&mu)?;
    let domain = domain.cloned().unwrap_or_else(|| s.domain.clone());
    let residual = multiplier_residual(s, &mu);
    let residual_verdict = zero_test(&residual, &s.domain, &s.params, cfg)?;
    let certificate = certify_nonvanishing(&mu, &domain, &s.params, cfg.seed)?;
    Ok(Multiplier { expr: mu, domain, residual, residual_verdict, certificate })
}

pub fn verify_integral(
    s: &Sode,
    i: &Expr,
    domain: Option<&Domain>,
    cfg: &ZeroTestConfig,
) -> Result<FirstIntegral, MultiplierError> {
    let i = s.bind(i);
    check_vars(&i)?;
    let domain = domain.cloned().unwrap_or_else(|| s.domain.clone());
    let residual = integral_residual(s, &i);
    let verdict = zero_test(&residual, &domain, &s.params, cfg)?;
    Ok(FirstIntegral { expr: i, residual, verdict, domain })
}

/// `μ₁/μ₂` as a first integral, verified on the intersection of the two
/// multiplier domains.
pub fn integral_from_ratio(
    mu1: &Multiplier,
    mu2: &Multiplier,
    s: &Sode,
    cfg: &ZeroTestConfig,
) -> Result<FirstIntegral, MultiplierError> {
    for mu in [mu1, mu2] {
        if !mu.is_verified() {
            return Err(MultiplierError::Unverified(mu.expr.to_string()));
        }
    }
    let domain = mu1.domain.intersect(&mu2.domain)?;
    let certificate = certify_nonvanishing(&mu2.expr, &domain, &s.params, cfg.seed)?;
    if !certificate.holds() {
        return Err(MultiplierError::Vanishes { expr: mu2.expr.to_string(), certificate });
    }
    verify_integral(s, &(&mu1.expr / &mu2.expr), Some(&domain), cfg)
}

/// `G(I)·μ` where `g` is an expression in the single variable `u`.
pub fn scale_multiplier(
    mu: &Multiplier,
    g: &Expr,
    u: &str,
    integral: &FirstIntegral,
    s: &Sode,
    cfg: &ZeroTestConfig,
) -> Result<Multiplier, MultiplierError> {
    if !mu.is_verified() {
        return Err(MultiplierError::Unverified(mu.expr.to_string()));
    }
    if !integral.is_verified() {
        return Err(MultiplierError::Unverified(integral.expr.to_string()));
    }
    let g = s.bind(g);
    if g.variables().iter().any(|v| v != u) {
        return Err(MultiplierError::FreeVariable(g.to_string()));
    }
    let g_of_i = g.subs(u, &integral.expr);
    let domain = mu.domain.intersect(&integral.domain)?;
    let certificate = certify_nonvanishing(&g_of_i, &domain, &s.params, cfg.seed)?;
    if !certificate.holds() {
        return Err(MultiplierError::Vanishes { expr: g.to_string(), certificate });
    }
    verify_multiplier(s, &(g_of_i * &mu.expr), Some(&domain), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;
    use proptest::prelude::*;

    fn params(k: f64, a: f64) -> Bindings {
        [("k".to_string(), k), ("a".to_string(), a)].into_iter().collect()
    }

    fn nonl1() -> Sode {
        let d = Domain::new().with("x", -2.0, 2.0).unwrap().with("v", -2.0, 2.0).unwrap();
        Sode::parse("nonl1", "(k*v^2 - a^2)*x/(1 + k*x^2)", params(1.0, 1.0), d).unwrap()
    }

    fn nonl2() -> Sode {
        let d = Domain::new().with("x", -1.0, 1.0).unwrap().with("v", -0.4, 0.4).unwrap();
        Sode::parse("nonl2", "-k*x*v^2/(1 + k*x^2) - a^2*x/(1 + k*x^2)^3", params(1.0, 1.0), d).unwrap()
    }

    fn inner() -> Domain {
        Domain::new().with("x", -2.0, 2.0).unwrap().with("v", -0.99, 0.99).unwrap()
    }

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default()
    }

    #[test]
    fn both_nonl1_multipliers_verify() {
        let s = nonl1();
        let m1 = verify_multiplier(&s, &s.expr("1/(1 + k*x^2)").unwrap(), None, &cfg()).unwrap();
        assert!(m1.is_verified());
        let m2 = verify_multiplier(&s, &s.expr("1/(k*v^2 - a^2)").unwrap(), Some(&inner()), &cfg()).unwrap();
        assert!(m2.is_verified());
        let i = integral_from_ratio(&m2, &m1, &s, &cfg()).unwrap();
        assert!(i.is_verified());
    }

    #[test]
    fn second_multiplier_fails_certificate_across_singular_lines() {
        let s = nonl1();
        let m2 = verify_multiplier(&s, &s.expr("1/(k*v^2 - a^2)").unwrap(), None, &cfg()).unwrap();
        assert!(m2.residual_verdict.is_zero());
        assert!(!m2.certificate.holds());
    }

    #[test]
    fn constant_is_not_a_multiplier_of_nonl2() {
        let s = nonl2();
        let m = verify_multiplier(&s, &Expr::one(), None, &cfg()).unwrap();
        assert!(matches!(m.residual_verdict, Verdict::NonZero { .. }));
    }

    #[test]
    fn residual_matches_divergence_form() {
        for s in [nonl1(), nonl2()] {
            let mu = s.expr("x^2 + exp(v)").unwrap();
            let lhs = multiplier_residual(&s, &mu);
            let rhs = &mu * s.divergence() + s.field().apply(&mu);
            assert!(zero_test(&(lhs - rhs), &s.domain, &s.params, &cfg()).unwrap().is_zero());
        }
    }

    #[test]
    fn self_ratio_is_trivially_conserved() {
        let s = nonl2();
        let m = verify_multiplier(&s, &s.expr("1 + k*x^2").unwrap(), None, &cfg()).unwrap();
        let i = integral_from_ratio(&m, &m, &s, &cfg()).unwrap();
        assert_eq!(i.expr, Expr::one());
        assert!(i.is_verified());
    }

    #[test]
    fn scaling_by_identity_is_a_no_op() {
        let s = nonl1();
        let m = verify_multiplier(&s, &s.expr("1/(1 + k*x^2)").unwrap(), Some(&inner()), &cfg()).unwrap();
        let i = verify_integral(&s, &s.expr("(1 + k*x^2)/(k*v^2 - a^2)").unwrap(), Some(&inner()), &cfg()).unwrap();
        let same = scale_multiplier(&m, &Expr::one(), "u", &i, &s, &cfg()).unwrap();
        assert_eq!(same.expr, m.expr);
    }

    #[test]
    fn integral_residual_of_x_is_v() {
        let s = nonl1();
        assert_eq!(integral_residual(&s, &Expr::var("x")), Expr::var("v"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn scaled_multipliers_stay_multipliers(c in proptest::collection::vec(-3i64..=3, 4)) {
            let s = nonl1();
            let m = verify_multiplier(&s, &s.expr("1/(1 + k*x^2)").unwrap(), Some(&inner()), &cfg()).unwrap();
            let i = verify_integral(&s, &s.expr("(1 + k*x^2)/(k*v^2 - a^2)").unwrap(), Some(&inner()), &cfg()).unwrap();
            let u = Expr::var("u");
            let g = Expr::sum(c.iter().enumerate().map(|(n, ci)| Expr::int(*ci) * u.powi(n as i64)));
            let scaled = match scale_multiplier(&m, &g, "u", &i, &s, &cfg()) {
                Err(MultiplierError::Vanishes { .. }) => return Err(TestCaseError::reject("G vanishes on the range of I")),
                other => other.unwrap(),
            };
            prop_assert!(scaled.residual_verdict.is_zero(), "{:?}", scaled.residual_verdict);
        }
    }
}
