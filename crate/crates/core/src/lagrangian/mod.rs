//! Lagrangians from multipliers and from first integrals, Euler–Lagrange
//! checks, and the Legendre transform.
//!
//! From a multiplier `μ`, the Lagrangian is
//!
//! ```text
//! L(x, v) = ∫_{v0}^{v} (v − ζ) μ(x, ζ) dζ + φ₂(x),   φ₂(x) = ∫_0^x (μF)(ζ, v0) dζ
//! ```
//!
//! so that `∂²L/∂v² = μ`, the gauge term linear in `v` vanishes and `φ₂` is
//! fixed by the Euler–Lagrange equation. From a first integral `I`, the
//! Lagrangian is `L = v ∫^v I(x, ζ)/ζ² dζ`.

mod legendre;
mod numeric;

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

pub use legendre::{legendre, Hamiltonian, HamiltonianForm, Inverse, LegendreError, RoundTrip};
pub use numeric::{Derivatives, IntegralQuadrature, MultiplierQuadrature, NumericLagrangian};

use crate::expr::{
    antiderivative, certify_nonvanishing, certify_nonvanishing_with, zero_test, zero_test_with, Antiderivative, Bindings,
    Certificate, Compiled, Domain, EvalError, EvalPoint, Expr, IntegrationContext, Node, Verdict, ZeroTestConfig,
    ZeroTestError,
};
use crate::geometry::Sode;
use crate::multiplier::{FirstIntegral, Multiplier};

/// Scaled tolerance for Euler–Lagrange checks of quadrature-backed Lagrangians.
pub const NUMERIC_EL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LagrangianError {
    #[error("`{0}` is not verified")]
    Unverified(String),
    #[error("reference velocity {v0} lies outside the v-interval of the domain")]
    ReferenceOutside { v0: f64 },
    #[error("the v-interval [{lo}, {hi}] contains 0, where the 1/ζ² kernel is singular")]
    KernelSingularity { lo: f64, hi: f64 },
    #[error("domain has no v-interval")]
    NoVelocityInterval,
    #[error("quadrature hits a singularity: {0}")]
    Singular(#[from] EvalError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    FromMultiplier,
    FromIntegral,
    Catalog,
    /// Given directly by the caller.
    Supplied,
}

/// A symbolic Lagrangian with its derivatives compiled once.
#[derive(Clone, Debug)]
pub struct SymbolicLagrangian {
    pub l: Expr,
    pub l_x: Expr,
    pub l_v: Expr,
    pub l_vx: Expr,
    pub l_vv: Expr,
    compiled: Arc<[Compiled; 5]>,
}

impl SymbolicLagrangian {
    pub fn new(l: Expr, params: &Bindings) -> Result<SymbolicLagrangian, EvalError> {
        let l_x = l.diff("x");
        let l_v = l.diff("v");
        let l_vx = l_v.diff("x");
        let l_vv = l_v.diff("v");
        let c = |e: &Expr| Compiled::new(e, &["x", "v"], params);
        let compiled = Arc::new([c(&l)?, c(&l_x)?, c(&l_v)?, c(&l_vx)?, c(&l_vv)?]);
        Ok(SymbolicLagrangian { l, l_x, l_v, l_vx, l_vv, compiled })
    }

    fn derivatives(&self, x: f64, v: f64) -> Result<Derivatives, EvalError> {
        let [l, l_x, l_v, l_vx, l_vv] = &*self.compiled;
        let at = [x, v];
        Ok(Derivatives { l: l.eval(&at)?, l_x: l_x.eval(&at)?, l_v: l_v.eval(&at)?, l_vx: l_vx.eval(&at)?, l_vv: l_vv.eval(&at)? })
    }
}

#[derive(Clone, Debug)]
pub enum LagrangianForm {
    Symbolic(SymbolicLagrangian),
    Numeric(NumericLagrangian),
}

#[derive(Clone, Debug, Serialize)]
pub struct Lagrangian {
    #[serde(rename = "L", serialize_with = "form_text")]
    pub form: LagrangianForm,
    pub phi2: Option<Expr>,
    pub gauge_note: String,
    /// Non-vanishing certificate of `∂²L/∂v²` on the domain.
    pub regular: Certificate,
    pub source: Source,
    #[serde(skip)]
    pub domain: Domain,
    #[serde(skip)]
    pub params: Bindings,
}

fn form_text<S: Serializer>(form: &LagrangianForm, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(form)
}

impl fmt::Display for LagrangianForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LagrangianForm::Symbolic(l) => write!(f, "{}", l.l),
            LagrangianForm::Numeric(NumericLagrangian::Multiplier(m)) => {
                write!(f, "numeric: ∫_{{{}}}^v (v - z) mu(x, z) dz + phi2(x)", m.v0)
            }
            LagrangianForm::Numeric(NumericLagrangian::Integral(i)) => write!(f, "numeric: v ∫_{{{}}}^v I(x, z)/z^2 dz", i.vref),
        }
    }
}

impl Lagrangian {
    /// Wraps a given symbolic `L` (catalog entries, user input).
    pub fn symbolic(l: &Expr, source: Source, domain: &Domain, params: &Bindings, seed: u64) -> Result<Lagrangian, LagrangianError> {
        let sym = SymbolicLagrangian::new(l.clone(), params)?;
        let regular = certify_nonvanishing(&sym.l_vv, domain, params, seed)?;
        Ok(Lagrangian {
            form: LagrangianForm::Symbolic(sym),
            phi2: None,
            gauge_note: String::new(),
            regular,
            source,
            domain: domain.clone(),
            params: params.clone(),
        })
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.form {
            LagrangianForm::Symbolic(s) => Some(&s.l),
            LagrangianForm::Numeric(_) => None,
        }
    }

    pub fn symbolic_form(&self) -> Option<&SymbolicLagrangian> {
        match &self.form {
            LagrangianForm::Symbolic(s) => Some(s),
            LagrangianForm::Numeric(_) => None,
        }
    }

    pub fn is_regular(&self) -> bool {
        self.regular.holds()
    }

    pub fn derivatives(&self, x: f64, v: f64) -> Result<Derivatives, EvalError> {
        match &self.form {
            LagrangianForm::Symbolic(s) => s.derivatives(x, v),
            LagrangianForm::Numeric(n) => n.derivatives(x, v),
        }
    }

    pub fn value(&self, x: f64, v: f64) -> Result<f64, EvalError> {
        Ok(self.derivatives(x, v)?.l)
    }

    pub fn momentum(&self, x: f64, v: f64) -> Result<f64, EvalError> {
        Ok(self.derivatives(x, v)?.l_v)
    }

    /// `E_L = v ∂L/∂v − L`.
    pub fn energy(&self, x: f64, v: f64) -> Result<f64, EvalError> {
        let d = self.derivatives(x, v)?;
        Ok(v * d.l_v - d.l)
    }

    /// Symbolic energy function when `L` is symbolic.
    pub fn energy_expr(&self) -> Option<Expr> {
        self.symbolic_form().map(|s| Expr::var("v") * &s.l_v - &s.l)
    }
}

fn xv(p: &EvalPoint) -> (f64, f64) {
    (p.get("x").copied().unwrap_or(0.0), p.get("v").copied().unwrap_or(0.0))
}

fn context(s: &Sode, domain: &Domain, cfg: &ZeroTestConfig) -> IntegrationContext {
    let mut ctx = IntegrationContext::new(s.params.clone(), domain.clone());
    ctx.zero = *cfg;
    ctx
}

/// The Lagrangian with `∂²L/∂v² = μ` built from a verified multiplier, with
/// the gauge `φ₁ = 0` and `φ₂` anchored at `x = 0`.
pub fn lagrangian_from_multiplier(s: &Sode, mu: &Multiplier, v0: f64, cfg: &ZeroTestConfig) -> Result<Lagrangian, LagrangianError> {
    if !mu.is_verified() {
        return Err(LagrangianError::Unverified(mu.expr.to_string()));
    }
    let domain = &mu.domain;
    let v_iv = domain.get("v").ok_or(LagrangianError::NoVelocityInterval)?;
    if !v_iv.contains(v0) {
        return Err(LagrangianError::ReferenceOutside { v0 });
    }
    let ctx = context(s, domain, cfg);
    let v0e = Expr::float(v0);
    let m = &mu.expr;

    let mu_f0 = (m * &s.f).subs("v", &v0e);
    let phi2 = match antiderivative(&mu_f0, "x", &ctx) {
        Antiderivative::Symbolic(p) => Some(&p - p.subs("x", &Expr::zero())),
        Antiderivative::Numeric(_) => None,
    };

    let kinetic = match antiderivative(m, "v", &ctx) {
        Antiderivative::Symbolic(a1) => match antiderivative(&a1, "v", &ctx) {
            Antiderivative::Symbolic(a2) => {
                let v = Expr::var("v");
                Some(&a2 - a2.subs("v", &v0e) - (v - &v0e) * a1.subs("v", &v0e))
            }
            Antiderivative::Numeric(_) => None,
        },
        Antiderivative::Numeric(_) => None,
    };

    let form = match (&kinetic, &phi2) {
        (Some(k), Some(p)) => LagrangianForm::Symbolic(SymbolicLagrangian::new(k + p, &s.params)?),
        _ => LagrangianForm::Numeric(NumericLagrangian::Multiplier(MultiplierQuadrature::new(
            m,
            &s.f,
            phi2.as_ref(),
            v0,
            &s.params,
        )?)),
    };
    let lag = Lagrangian {
        form,
        phi2,
        gauge_note: format!("phi1 = 0; kinetic part anchored at v0 = {v0}; phi2 anchored at x = 0"),
        regular: mu.certificate.clone(),
        source: Source::FromMultiplier,
        domain: domain.clone(),
        params: s.params.clone(),
    };
    let center = domain.center();
    let (x, v) = xv(&center);
    lag.derivatives(x, v)?;
    Ok(lag)
}

/// `L = v ∫^v I(x, ζ)/ζ² dζ` for a verified first integral.
pub fn lagrangian_from_integral(s: &Sode, i: &FirstIntegral, cfg: &ZeroTestConfig) -> Result<Lagrangian, LagrangianError> {
    if !i.is_verified() {
        return Err(LagrangianError::Unverified(i.expr.to_string()));
    }
    let domain = &i.domain;
    let v_iv = domain.get("v").ok_or(LagrangianError::NoVelocityInterval)?;
    let ctx = context(s, domain, cfg);
    let kernel = &i.expr / Expr::var("v").powi(2);
    let form = match antiderivative(&kernel, "v", &ctx) {
        Antiderivative::Symbolic(a) => LagrangianForm::Symbolic(SymbolicLagrangian::new(times_v(&a), &s.params)?),
        Antiderivative::Numeric(_) => {
            if v_iv.contains(0.0) {
                return Err(LagrangianError::KernelSingularity { lo: v_iv.lo, hi: v_iv.hi });
            }
            let vref = if v_iv.lo > 0.0 { v_iv.lo } else { v_iv.hi };
            LagrangianForm::Numeric(NumericLagrangian::Integral(IntegralQuadrature::new(&i.expr, vref, &s.params)?))
        }
    };
    let seed = cfg.seed;
    let regular = match &form {
        LagrangianForm::Symbolic(sym) => certify_nonvanishing(&sym.l_vv, domain, &s.params, seed)?,
        LagrangianForm::Numeric(n) => certify_nonvanishing_with(domain, seed, |p| {
            let (x, v) = xv(p);
            Ok(n.derivatives(x, v)?.l_vv)
        })?,
    };
    Ok(Lagrangian {
        form,
        phi2: None,
        gauge_note: "terms linear in v and additive constants discarded".into(),
        regular,
        source: Source::FromIntegral,
        domain: domain.clone(),
        params: s.params.clone(),
    })
}

/// `v * a`, pushed into a sum factor so `v * (c + b/v)` loses its removable pole.
fn times_v(a: &Expr) -> Expr {
    let v = Expr::var("v");
    let spread = |ts: &[Expr]| Expr::sum(ts.iter().map(|t| &v * t));
    match a.node() {
        Node::Add(ts) => spread(ts),
        Node::Mul(fs) => match fs.iter().position(|f| matches!(f.node(), Node::Add(_))) {
            Some(i) => {
                let Node::Add(ts) = fs[i].node() else { unreachable!() };
                Expr::product(fs.iter().enumerate().map(|(j, f)| if j == i { spread(ts) } else { f.clone() }))
            }
            None => &v * a,
        },
        _ => &v * a,
    }
}

/// `∂L/∂x − (v ∂²L/∂v∂x + F ∂²L/∂v²)` for a symbolic Lagrangian.
pub fn euler_lagrange_residual(s: &Sode, l: &Lagrangian) -> Option<Expr> {
    l.symbolic_form().map(|sym| &sym.l_x - (Expr::var("v") * &sym.l_vx + &s.f * &sym.l_vv))
}

/// Zero test of the Euler–Lagrange residual on the Lagrangian's domain.
///
/// Quadrature-backed Lagrangians are checked pointwise at the scaled
/// tolerance [`NUMERIC_EL_TOL`].
pub fn verify_euler_lagrange(s: &Sode, l: &Lagrangian, cfg: &ZeroTestConfig) -> Result<Verdict, ZeroTestError> {
    if let Some(r) = euler_lagrange_residual(s, l) {
        return zero_test(&r, &l.domain, &s.params, cfg);
    }
    let f = Compiled::new(&s.f, &["x", "v"], &s.params)?;
    let numeric_cfg = ZeroTestConfig { tol: cfg.tol.max(NUMERIC_EL_TOL), ..*cfg };
    zero_test_with(&l.domain, &numeric_cfg, |p| {
        let (x, v) = xv(p);
        let d = l.derivatives(x, v)?;
        let fv = f.eval(&[x, v])?;
        let terms = [d.l_x, -v * d.l_vx, -fv * d.l_vv];
        Ok((terms.iter().sum(), terms.iter().map(|t| t.abs()).sum()))
    })
}

/// Zero test of `∂²L/∂v² − μ`.
pub fn verify_hessian(l: &Lagrangian, mu: &Expr, cfg: &ZeroTestConfig) -> Result<Verdict, ZeroTestError> {
    if let Some(sym) = l.symbolic_form() {
        return zero_test(&(&sym.l_vv - mu), &l.domain, &l.params, cfg);
    }
    let m = Compiled::new(mu, &["x", "v"], &l.params)?;
    zero_test_with(&l.domain, cfg, |p| {
        let (x, v) = xv(p);
        let a = l.derivatives(x, v)?.l_vv;
        let b = m.eval(&[x, v])?;
        Ok((a - b, a.abs() + b.abs()))
    })
}

/// Whether two Lagrangians differ by a gauge term `φ₁(x)·v + c`: the
/// difference `D` must satisfy `D_vv ≡ 0` and `D_x − v D_vx ≡ 0`.
pub fn equivalent_up_to_gauge(a: &Lagrangian, b: &Expr, cfg: &ZeroTestConfig) -> Result<bool, ZeroTestError> {
    let Some(sa) = a.symbolic_form() else {
        return Ok(false);
    };
    let d = &sa.l - b;
    let dv = d.diff("v");
    let checks = [dv.diff("v"), d.diff("x") - Expr::var("v") * dv.diff("x")];
    for c in checks {
        if !zero_test(&c, &a.domain, &a.params, cfg)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::{verify_integral, verify_multiplier};

    fn params(k: f64, a: f64) -> Bindings {
        [("k".to_string(), k), ("a".to_string(), a)].into_iter().collect()
    }

    fn nonl1(k: f64) -> Sode {
        let d = Domain::new().with("x", -1.5, 1.5).unwrap().with("v", -2.0, 2.0).unwrap();
        Sode::parse("nonl1", "(k*v^2 - a^2)*x/(1 + k*x^2)", params(k, 1.0), d).unwrap()
    }

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default()
    }

    #[test]
    fn mechanical_lagrangian_of_nonl1() {
        let s = nonl1(1.0);
        let mu = verify_multiplier(&s, &s.expr("1/(1 + k*x^2)").unwrap(), None, &cfg()).unwrap();
        let l = lagrangian_from_multiplier(&s, &mu, 0.0, &cfg()).unwrap();
        let printed = s.expr("(v^2 - a^2*x^2)/(2*(1 + k*x^2))").unwrap();
        let got = l.expr().expect("symbolic").clone();
        assert!(zero_test(&(got - printed), &s.domain, &s.params, &cfg()).unwrap().is_zero());
        assert!(verify_euler_lagrange(&s, &l, &cfg()).unwrap().is_zero());
        assert!(verify_hessian(&l, &mu.expr, &cfg()).unwrap().is_zero());
    }

    #[test]
    fn wrong_lagrangian_has_nonzero_residual() {
        let s = nonl1(1.0);
        let l = Lagrangian::symbolic(&s.expr("v^2/2").unwrap(), Source::Catalog, &s.domain, &s.params, 1).unwrap();
        assert!(matches!(verify_euler_lagrange(&s, &l, &cfg()).unwrap(), Verdict::NonZero { .. }));
    }

    #[test]
    fn numeric_path_matches_symbolic() {
        let s = nonl1(1.0);
        let mu = verify_multiplier(&s, &s.expr("1/(1 + k*x^2)").unwrap(), None, &cfg()).unwrap();
        let sym = lagrangian_from_multiplier(&s, &mu, 0.0, &cfg()).unwrap();
        let num = Lagrangian {
            form: LagrangianForm::Numeric(NumericLagrangian::Multiplier(
                MultiplierQuadrature::new(&mu.expr, &s.f, None, 0.0, &s.params).unwrap(),
            )),
            ..sym.clone()
        };
        for (x, v) in [(0.3, -1.2), (-1.1, 0.7), (1.4, 1.9)] {
            let a = sym.derivatives(x, v).unwrap();
            let b = num.derivatives(x, v).unwrap();
            for (p, q) in [(a.l, b.l), (a.l_x, b.l_x), (a.l_v, b.l_v), (a.l_vx, b.l_vx), (a.l_vv, b.l_vv)] {
                assert!((p - q).abs() < 1e-9, "{p} vs {q}");
            }
        }
        assert!(verify_euler_lagrange(&s, &num, &cfg()).unwrap().is_zero());
    }

    #[test]
    fn integral_route_differs_by_a_constant() {
        let s = nonl1(1.0);
        let dom = Domain::new().with("x", -1.5, 1.5).unwrap().with("v", -0.99, 0.99).unwrap();
        let i = verify_integral(&s, &s.expr("(k*v^2 - a^2)/(2*k*(1 + k*x^2))").unwrap(), Some(&dom), &cfg()).unwrap();
        let l = lagrangian_from_integral(&s, &i, &cfg()).unwrap();
        let want = s.expr("(k*v^2 + a^2)/(2*k*(1 + k*x^2))").unwrap();
        assert!(zero_test(&(l.expr().unwrap() - want), &dom, &s.params, &cfg()).unwrap().is_zero());
    }

    #[test]
    fn constant_integral_gives_degenerate_lagrangian() {
        let s = nonl1(1.0);
        let i = verify_integral(&s, &Expr::int(3), None, &cfg()).unwrap();
        let l = lagrangian_from_integral(&s, &i, &cfg()).unwrap();
        assert_eq!(l.expr().unwrap(), &Expr::int(-3));
        assert!(!l.is_regular());
    }

    #[test]
    fn reference_velocity_must_be_in_domain() {
        let s = nonl1(1.0);
        let mu = verify_multiplier(&s, &s.expr("1/(1 + k*x^2)").unwrap(), None, &cfg()).unwrap();
        assert!(matches!(
            lagrangian_from_multiplier(&s, &mu, 5.0, &cfg()),
            Err(LagrangianError::ReferenceOutside { .. })
        ));
    }

    #[test]
    fn non_mechanical_lagrangian_of_nonl1() {
        let s = nonl1(1.0);
        let dom = Domain::new().with("x", -1.5, 1.5).unwrap().with("v", -0.99, 0.99).unwrap();
        let mu = verify_multiplier(&s, &s.expr("1/(k*v^2 - a^2)").unwrap(), Some(&dom), &cfg()).unwrap();
        let l = lagrangian_from_multiplier(&s, &mu, 0.0, &cfg()).unwrap();
        assert!(l.expr().is_some());
        assert!(verify_euler_lagrange(&s, &l, &cfg()).unwrap().is_zero());
        assert!(verify_hessian(&l, &mu.expr, &cfg()).unwrap().is_zero());
        let printed = s
            .expr("-v*atanh(sqrt(k)*v/a)/(a*sqrt(k)) - ln(1 - k*v^2/a^2)/(2*k) + ln(1 + k*x^2)/(2*k)")
            .unwrap();
        assert!(equivalent_up_to_gauge(&l, &printed, &cfg()).unwrap());
    }

    fn nonl2() -> Sode {
        let d = Domain::new().with("x", -1.0, 1.0).unwrap().with("v", -0.49, 0.49).unwrap();
        Sode::parse("nonl2", "-k*x*v^2/(1 + k*x^2) - a^2*x/(1 + k*x^2)^3", params(1.0, 1.0), d).unwrap()
    }

    #[test]
    fn nonl2_lagrangians() {
        let s = nonl2();
        let mu1 = verify_multiplier(&s, &s.expr("1 + k*x^2").unwrap(), None, &cfg()).unwrap();
        let l1 = lagrangian_from_multiplier(&s, &mu1, 0.0, &cfg()).unwrap();
        let printed = s.expr("(1 + k*x^2)*v^2/2 - a^2*x^2/(2*(1 + k*x^2))").unwrap();
        assert!(equivalent_up_to_gauge(&l1, &printed, &cfg()).unwrap());
        assert!(verify_euler_lagrange(&s, &l1, &cfg()).unwrap().is_zero());

        let mu2 = s.expr("k*(1 + k*x^2)^2*v^2 - a^2").unwrap();
        let mu2 = verify_multiplier(&s, &mu2, None, &cfg()).unwrap();
        assert!(mu2.is_verified());
        let l2 = lagrangian_from_multiplier(&s, &mu2, 0.0, &cfg()).unwrap();
        assert!(verify_euler_lagrange(&s, &l2, &cfg()).unwrap().is_zero());
        assert!(verify_hessian(&l2, &mu2.expr, &cfg()).unwrap().is_zero());
        let phi2 = s.expr("a^4*x^2*(2 + k*x^2)/(4*(1 + k*x^2)^2)").unwrap();
        assert!(zero_test(&(l2.phi2.clone().unwrap() - phi2), &s.domain, &s.params, &cfg()).unwrap().is_zero());
    }

    #[test]
    fn negative_k_uses_restricted_domain() {
        let d = Domain::new().with("x", -1.9, 1.9).unwrap().with("v", -1.0, 1.0).unwrap();
        let s = Sode::parse("nonl1", "(k*v^2 - a^2)*x/(1 + k*x^2)", params(-0.25, 1.0), d).unwrap();
        let mu = verify_multiplier(&s, &s.expr("1/(1 + k*x^2)").unwrap(), None, &cfg()).unwrap();
        let l = lagrangian_from_multiplier(&s, &mu, 0.0, &cfg()).unwrap();
        assert!(verify_euler_lagrange(&s, &l, &cfg()).unwrap().is_zero());
    }
}
