//! Legendre transform `p = ∂L/∂v`, `H(x, p) = p·v(p) − L(x, v(p))`.
//!
//! The velocity is recovered in closed form when the momentum is affine in
//! `v`, or has the shape `D(x) + C(x)·f(αv + β)` for an invertible table
//! function `f`. Anything else is inverted pointwise by Newton iteration with
//! a bisection fallback on the domain's v-interval.

use std::fmt;

use serde::{Serialize, Serializer};

use super::{xv, Lagrangian, LagrangianForm};
use crate::expr::{
    certify_nonvanishing, certify_nonvanishing_with, sample_points, zero_test, Certificate, Compiled, Domain, EvalError,
    Expr, Func, Interval, Node, Verdict, ZeroTestConfig, ZeroTestError,
};

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 60;
const BISECTION_MAX_ITER: usize = 200;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LegendreError {
    #[error("L is not regular on the domain: {0:?}")]
    Irregular(Certificate),
    #[error("domain has no v-interval")]
    NoVelocityInterval,
    #[error("p = {p} at x = {x} is outside the momentum range of the v-interval")]
    OutOfRange { x: f64, p: f64 },
    #[error("neither Newton nor bisection converged at x = {x}, p = {p}")]
    NoConvergence { x: f64, p: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

/// How `v` is recovered from `(x, p)`.
#[derive(Clone, Debug)]
pub enum Inverse {
    Symbolic(Expr),
    /// Newton on `∂L/∂v − p` over the v-interval.
    Numeric(Interval),
}

#[derive(Clone, Debug)]
pub enum HamiltonianForm {
    Symbolic { h: Expr, compiled: Compiled },
    Numeric,
}

#[derive(Clone, Debug, Serialize)]
pub struct Hamiltonian {
    #[serde(serialize_with = "opt_text")]
    pub p_of_v: Option<Expr>,
    #[serde(serialize_with = "inverse_text")]
    pub v_of_p: Inverse,
    #[serde(rename = "H", serialize_with = "h_text")]
    pub form: HamiltonianForm,
    /// Branch on which the closed-form inverse is valid, when it is not global.
    pub branch: Option<String>,
    #[serde(skip)]
    pub lagrangian: Lagrangian,
    #[serde(skip)]
    v_compiled: Option<Compiled>,
}

fn opt_text<S: Serializer>(e: &Option<Expr>, s: S) -> Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.collect_str(e),
        None => s.serialize_str("numeric"),
    }
}

fn inverse_text<S: Serializer>(inv: &Inverse, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(inv)
}

fn h_text<S: Serializer>(form: &HamiltonianForm, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(form)
}

impl fmt::Display for HamiltonianForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HamiltonianForm::Symbolic { h, .. } => write!(f, "{h}"),
            HamiltonianForm::Numeric => f.write_str("numeric: p*v(p) - L(x, v(p))"),
        }
    }
}

impl fmt::Display for Inverse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inverse::Symbolic(e) => write!(f, "{e}"),
            Inverse::Numeric(iv) => write!(f, "newton on v in [{}, {}]", iv.lo, iv.hi),
        }
    }
}

/// Worst-case errors of the Legendre round trip on sampled points.
#[derive(Clone, Debug, Serialize)]
pub struct RoundTrip {
    pub samples: usize,
    /// `max |v(x, p(x, v)) − v|`.
    pub velocity_error: f64,
    /// `max |H(x, p(v)) − (v·p(v) − L(x, v))|`.
    pub identity_error: f64,
    /// Zero test of the identity after substituting `p = p(x, v)`, when `H` is symbolic.
    pub identity_verdict: Option<Verdict>,
}

impl RoundTrip {
    pub fn passes(&self, velocity_tol: f64, identity_tol: f64) -> bool {
        self.velocity_error <= velocity_tol
            && self.identity_error <= identity_tol
            && self.identity_verdict.as_ref().is_none_or(Verdict::is_zero)
    }
}

impl Hamiltonian {
    pub fn expr(&self) -> Option<&Expr> {
        match &self.form {
            HamiltonianForm::Symbolic { h, .. } => Some(h),
            HamiltonianForm::Numeric => None,
        }
    }

    pub fn momentum(&self, x: f64, v: f64) -> Result<f64, EvalError> {
        self.lagrangian.momentum(x, v)
    }

    pub fn velocity(&self, x: f64, p: f64) -> Result<f64, LegendreError> {
        match (&self.v_of_p, &self.v_compiled) {
            (Inverse::Symbolic(_), Some(c)) => Ok(c.eval(&[x, p])?),
            (Inverse::Numeric(iv), _) => newton(&self.lagrangian, *iv, x, p),
            (Inverse::Symbolic(_), None) => unreachable!("symbolic inverse is compiled on construction"),
        }
    }

    pub fn value(&self, x: f64, p: f64) -> Result<f64, LegendreError> {
        match &self.form {
            HamiltonianForm::Symbolic { compiled, .. } => Ok(compiled.eval(&[x, p])?),
            HamiltonianForm::Numeric => {
                let v = self.velocity(x, p)?;
                Ok(p * v - self.lagrangian.value(x, v)?)
            }
        }
    }

    /// `H` with `p` replaced by `p(x, v)`, a function on the Lagrangian's domain.
    pub fn pullback(&self, e: &Expr) -> Option<Expr> {
        self.p_of_v.as_ref().map(|p| e.subs("p", p))
    }

    pub fn round_trip(&self, domain: &Domain, samples: usize, cfg: &ZeroTestConfig) -> Result<RoundTrip, LegendreError> {
        let mut velocity_error: f64 = 0.0;
        let mut identity_error: f64 = 0.0;
        for pt in sample_points(domain, samples, cfg.seed) {
            let (x, v) = xv(&pt);
            let d = self.lagrangian.derivatives(x, v)?;
            let back = self.velocity(x, d.l_v)?;
            velocity_error = velocity_error.max((back - v).abs());
            let h = self.value(x, d.l_v)?;
            identity_error = identity_error.max((h - (v * d.l_v - d.l)).abs());
        }
        let identity_verdict = match (self.expr(), self.lagrangian.symbolic_form()) {
            (Some(h), Some(sym)) => {
                let lhs = self.pullback(h).expect("symbolic H implies symbolic p");
                let rhs = Expr::var("v") * &sym.l_v - &sym.l;
                Some(zero_test(&(lhs - rhs), domain, &self.lagrangian.params, cfg)?)
            }
            _ => None,
        };
        Ok(RoundTrip { samples, velocity_error, identity_error, identity_verdict })
    }
}

fn newton(l: &Lagrangian, iv: Interval, x: f64, p: f64) -> Result<f64, LegendreError> {
    let g = |v: f64| -> Result<(f64, f64), EvalError> {
        let d = l.derivatives(x, v)?;
        Ok((d.l_v - p, d.l_vv))
    };
    let mut v = iv.mid();
    for _ in 0..NEWTON_MAX_ITER {
        let Ok((r, slope)) = g(v) else { break };
        let step = r / slope;
        let next = v - step;
        if !next.is_finite() || !iv.contains(next) {
            break;
        }
        v = next;
        if step.abs() <= NEWTON_TOL * (1.0 + v.abs()) {
            return Ok(v);
        }
    }
    bisect(&g, iv, x, p)
}

fn bisect(g: &impl Fn(f64) -> Result<(f64, f64), EvalError>, iv: Interval, x: f64, p: f64) -> Result<f64, LegendreError> {
    let (mut lo, mut hi) = (iv.lo, iv.hi);
    let (mut flo, fhi) = (g(lo)?.0, g(hi)?.0);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(LegendreError::OutOfRange { x, p });
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= NEWTON_TOL * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        let fm = g(mid)?.0;
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(LegendreError::NoConvergence { x, p })
}

/// `(v(x, p), branch)` when `p_of_v` is invertible in closed form.
fn invert(p_of_v: &Expr) -> Option<(Expr, Option<String>)> {
    let p = Expr::var("p");
    if let Some((a, b)) = p_of_v.linear_in("v") {
        return Some(((p - b) / a, None));
    }
    let (dep, indep): (Vec<Expr>, Vec<Expr>) = p_of_v.terms().into_iter().partition(|t| t.depends_on("v"));
    let [term] = dep.as_slice() else { return None };
    let (inner, coeff): (Vec<Expr>, Vec<Expr>) = term.factors().into_iter().partition(|f| f.depends_on("v"));
    let [g] = inner.as_slice() else { return None };
    let target = (p - Expr::sum(indep)) / Expr::product(coeff);
    let (u, solved, branch) = match g.node() {
        Node::Call(f, u) => {
            let (solved, branch) = match f {
                Func::Atanh => (Expr::call(Func::Tanh, target), Some(format!("|{u}| < 1"))),
                Func::Tanh => (Expr::call(Func::Atanh, target), None),
                Func::Atan => (Expr::call(Func::Tan, target), None),
                Func::Tan => (Expr::call(Func::Atan, target), Some(format!("|{u}| < pi/2"))),
                Func::Exp => (target.ln(), None),
                Func::Ln => (target.exp(), Some(format!("{u} > 0"))),
                _ => return None,
            };
            (u.clone(), solved, branch)
        }
        Node::Pow(u, e) => {
            let r = e.as_number()?.as_rational()?;
            if r.numer() % 2 == 0 || r.denom() % 2 == 0 {
                return None;
            }
            (u.clone(), Expr::pow(target, Expr::rational(*r.denom(), *r.numer())), None)
        }
        _ => return None,
    };
    let (alpha, beta) = u.linear_in("v")?;
    Some(((solved - beta) / alpha, branch))
}

/// Legendre transform of a regular Lagrangian over `domain`.
pub fn legendre(l: &Lagrangian, domain: &Domain, cfg: &ZeroTestConfig) -> Result<Hamiltonian, LegendreError> {
    let v_iv = domain.get("v").ok_or(LegendreError::NoVelocityInterval)?;
    let regular = match &l.form {
        LagrangianForm::Symbolic(sym) => certify_nonvanishing(&sym.l_vv, domain, &l.params, cfg.seed)?,
        LagrangianForm::Numeric(n) => certify_nonvanishing_with(domain, cfg.seed, |pt| {
            let (x, v) = xv(pt);
            Ok(n.derivatives(x, v)?.l_vv)
        })?,
    };
    if !regular.holds() {
        return Err(LegendreError::Irregular(regular));
    }
    let mut ham = Hamiltonian {
        p_of_v: l.symbolic_form().map(|s| s.l_v.clone()),
        v_of_p: Inverse::Numeric(v_iv),
        form: HamiltonianForm::Numeric,
        branch: None,
        lagrangian: l.clone(),
        v_compiled: None,
    };
    let Some(sym) = l.symbolic_form() else { return Ok(ham) };
    let Some((v_of_p, branch)) = invert(&sym.l_v) else { return Ok(ham) };
    let check = v_of_p.subs("p", &sym.l_v) - Expr::var("v");
    if !matches!(zero_test(&check, domain, &l.params, cfg), Ok(v) if v.is_zero()) {
        return Ok(ham);
    }
    let h = Expr::var("p") * &v_of_p - sym.l.subs("v", &v_of_p);
    let (Ok(vc), Ok(hc)) = (Compiled::new(&v_of_p, &["x", "p"], &l.params), Compiled::new(&h, &["x", "p"], &l.params))
    else {
        return Ok(ham);
    };
    ham.v_of_p = Inverse::Symbolic(v_of_p);
    ham.v_compiled = Some(vc);
    ham.form = HamiltonianForm::Symbolic { h, compiled: hc };
    ham.branch = branch;
    Ok(ham)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;
    use crate::geometry::Sode;
    use crate::lagrangian::{lagrangian_from_multiplier, NumericLagrangian, MultiplierQuadrature, Source};
    use crate::multiplier::verify_multiplier;

    fn params() -> Bindings {
        [("k".to_string(), 1.0), ("a".to_string(), 1.0)].into_iter().collect()
    }

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default()
    }

    fn nonl1(vmax: f64) -> Sode {
        let d = Domain::new().with("x", -1.5, 1.5).unwrap().with("v", -vmax, vmax).unwrap();
        Sode::parse("nonl1", "(k*v^2 - a^2)*x/(1 + k*x^2)", params(), d).unwrap()
    }

    fn assert_matches(h: &Hamiltonian, printed: &str, s: &Sode) {
        let printed = s.expr(printed).unwrap();
        let diff = h.pullback(&(h.expr().unwrap() - printed)).unwrap();
        assert!(zero_test(&diff, &s.domain, &s.params, &cfg()).unwrap().is_zero());
    }

    #[test]
    fn mechanical_hamiltonian_of_nonl1() {
        let s = nonl1(2.0);
        let mu = verify_multiplier(&s, &s.expr("1/(1 + k*x^2)").unwrap(), None, &cfg()).unwrap();
        let l = lagrangian_from_multiplier(&s, &mu, 0.0, &cfg()).unwrap();
        let h = legendre(&l, &s.domain, &cfg()).unwrap();
        assert_matches(&h, "(1 + k*x^2)*p^2/2 + a^2*x^2/(2*(1 + k*x^2))", &s);
        let rt = h.round_trip(&s.domain, 32, &cfg()).unwrap();
        assert!(rt.passes(1e-10, 1e-9), "{rt:?}");
    }

    #[test]
    fn non_mechanical_hamiltonian_inverts_atanh() {
        let s = nonl1(0.99);
        let mu = verify_multiplier(&s, &s.expr("1/(k*v^2 - a^2)").unwrap(), None, &cfg()).unwrap();
        let l = lagrangian_from_multiplier(&s, &mu, 0.0, &cfg()).unwrap();
        let h = legendre(&l, &s.domain, &cfg()).unwrap();
        assert!(matches!(h.v_of_p, Inverse::Symbolic(_)), "{:?}", h.v_of_p);
        assert!(h.branch.is_some());
        let rt = h.round_trip(&s.domain, 32, &cfg()).unwrap();
        assert!(rt.passes(1e-10, 1e-9), "{rt:?}");
    }

    #[test]
    fn harmonic() {
        let d = Domain::new().with("x", -1.0, 1.0).unwrap().with("v", -1.0, 1.0).unwrap();
        let s = Sode::parse("harmonic", "-x", Bindings::new(), d).unwrap();
        let l = Lagrangian::symbolic(&s.expr("(v^2 - x^2)/2").unwrap(), Source::Catalog, &s.domain, &s.params, 1).unwrap();
        let h = legendre(&l, &s.domain, &cfg()).unwrap();
        assert_eq!(h.expr().unwrap(), &s.expr("(p^2 + x^2)/2").unwrap().expand());
    }

    #[test]
    fn newton_inverse_for_quadrature_lagrangian() {
        let s = nonl1(0.9);
        let mu = verify_multiplier(&s, &s.expr("1/(k*v^2 - a^2)").unwrap(), None, &cfg()).unwrap();
        let sym = lagrangian_from_multiplier(&s, &mu, 0.0, &cfg()).unwrap();
        let num = Lagrangian {
            form: LagrangianForm::Numeric(NumericLagrangian::Multiplier(
                MultiplierQuadrature::new(&mu.expr, &s.f, None, 0.0, &s.params).unwrap(),
            )),
            ..sym
        };
        let h = legendre(&num, &s.domain, &cfg()).unwrap();
        assert!(matches!(h.form, HamiltonianForm::Numeric));
        let rt = h.round_trip(&s.domain, 32, &cfg()).unwrap();
        assert!(rt.passes(1e-10, 1e-9), "{rt:?}");
        assert!(matches!(h.velocity(0.0, 50.0), Err(LegendreError::OutOfRange { .. })));
    }

    #[test]
    fn irregular_lagrangian_is_rejected() {
        let s = nonl1(1.0);
        let l = Lagrangian::symbolic(&s.expr("x*v").unwrap(), Source::Catalog, &s.domain, &s.params, 1).unwrap();
        assert!(matches!(legendre(&l, &s.domain, &cfg()), Err(LegendreError::Irregular(_))));
    }
}
