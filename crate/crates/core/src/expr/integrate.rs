//! Restricted symbolic antiderivatives with a quadrature fallback.
//!
//! The rule table covers constants, the power rule, linear substitution into
//! a small table of elementary functions, `u`-substitution, rational
//! functions with a quadratic denominator (atan / atanh / log branches chosen
//! from the signs of the coefficients on the domain), and expansion of
//! products of sums. A symbolic result is only returned after its derivative
//! has been zero-tested against the integrand.

use std::sync::Arc;

use super::{
    adaptive_simpson, certify_nonvanishing, zero_test, Bindings, Certificate, Compiled, Domain, EvalError, EvalPoint,
    Expr, Func, Interval, Node, ZeroTestConfig, QUAD_ABS_TOL,
};

const MAX_DEPTH: usize = 3;

/// Inputs that steer rule selection and validation.
#[derive(Clone, Debug)]
pub struct IntegrationContext {
    pub params: Bindings,
    /// Used to decide branch choices (signs, inner/outer atanh) and to
    /// validate results. Variables missing here are sampled on `[-1, 1]`.
    pub domain: Domain,
    pub zero: ZeroTestConfig,
    /// Lower limit of numeric-backed antiderivatives.
    pub reference: f64,
}

impl IntegrationContext {
    pub fn new(params: Bindings, domain: Domain) -> Self {
        IntegrationContext { params, domain, zero: ZeroTestConfig::default(), reference: 0.0 }
    }
}

#[derive(Clone, Debug)]
pub enum Antiderivative {
    Symbolic(Expr),
    Numeric(NumericAntiderivative),
}

impl Antiderivative {
    pub fn symbolic(&self) -> Option<&Expr> {
        match self {
            Antiderivative::Symbolic(e) => Some(e),
            Antiderivative::Numeric(_) => None,
        }
    }

    pub fn is_symbolic(&self) -> bool {
        self.symbolic().is_some()
    }

    pub fn eval(&self, point: &EvalPoint, params: &Bindings) -> Result<f64, EvalError> {
        match self {
            Antiderivative::Symbolic(e) => super::evaluate(e, point, params),
            Antiderivative::Numeric(n) => n.eval(point),
        }
    }
}

/// `x ↦ ∫_{reference}^{x} integrand dζ` by adaptive Simpson, other variables
/// held at the values in the evaluation point.
#[derive(Clone, Debug)]
pub struct NumericAntiderivative {
    pub integrand: Expr,
    pub var: String,
    pub reference: f64,
    slots: Vec<String>,
    compiled: Arc<Compiled>,
}

impl NumericAntiderivative {
    pub fn new(integrand: &Expr, var: &str, reference: f64, params: &Bindings) -> Result<Self, EvalError> {
        let mut slots: Vec<String> = integrand.variables().into_iter().collect();
        if !slots.iter().any(|s| s == var) {
            slots.push(var.to_string());
        }
        let refs: Vec<&str> = slots.iter().map(String::as_str).collect();
        let compiled = Arc::new(Compiled::new(integrand, &refs, params)?);
        Ok(NumericAntiderivative { integrand: integrand.clone(), var: var.to_string(), reference, slots, compiled })
    }

    pub fn eval(&self, point: &EvalPoint) -> Result<f64, EvalError> {
        self.eval_between(self.reference, point)
    }

    /// `∫_{from}^{point[var]}` of the integrand.
    pub fn eval_between(&self, from: f64, point: &EvalPoint) -> Result<f64, EvalError> {
        let mut values = Vec::with_capacity(self.slots.len());
        let mut idx = 0;
        for (i, s) in self.slots.iter().enumerate() {
            if *s == self.var {
                idx = i;
                values.push(0.0);
            } else {
                values.push(*point.get(s).ok_or_else(|| EvalError::Unbound(s.clone()))?);
            }
        }
        let upper = *point.get(&self.var).ok_or_else(|| EvalError::Unbound(self.var.clone()))?;
        adaptive_simpson(
            |t| {
                values[idx] = t;
                self.compiled.eval(&values)
            },
            from,
            upper,
            QUAD_ABS_TOL,
        )
    }
}

/// Antiderivative of `e` with respect to `var`.
///
/// Tries the rule table with parameters kept symbolic, then with parameter
/// values substituted (which resolves cases such as `k = 0` where the general
/// formula divides by a vanishing coefficient), then falls back to quadrature
/// from `ctx.reference`.
pub fn antiderivative(e: &Expr, var: &str, ctx: &IntegrationContext) -> Antiderivative {
    let mut domain = ctx.domain.clone();
    for v in e.variables().into_iter().chain([var.to_string()]) {
        if domain.get(&v).is_none() && !ctx.params.contains_key(&v) {
            domain.set(&v, Interval { lo: -1.0, hi: 1.0 });
        }
    }
    let rules = Rules { params: &ctx.params, domain: &domain, seed: ctx.zero.seed };
    let specialized = e.specialize(&ctx.params);
    for candidate in [e.clone(), specialized] {
        if let Some(f) = rules.integrate(&candidate, var, 0) {
            let check = f.diff(var) - &candidate;
            let verified = matches!(zero_test(&check, &domain, &ctx.params, &ctx.zero), Ok(v) if v.is_zero());
            if verified && mostly_evaluable(&f, &domain, &ctx.params, ctx.zero.seed) {
                return Antiderivative::Symbolic(f);
            }
        }
        if e.parameters().is_empty() {
            break;
        }
    }
    match NumericAntiderivative::new(e, var, ctx.reference, &ctx.params) {
        Ok(n) => Antiderivative::Numeric(n),
        // unbound symbols surface on first evaluation instead
        Err(_) => Antiderivative::Numeric(NumericAntiderivative {
            integrand: e.clone(),
            var: var.to_string(),
            reference: ctx.reference,
            slots: vec![var.to_string()],
            compiled: Arc::new(Compiled::new(&Expr::zero(), &[var], &ctx.params).expect("constant compiles")),
        }),
    }
}

/// An exact identity can hold symbolically while the formula itself is
/// singular under the bound parameters (a `1/k` with `k = 0`).
fn mostly_evaluable(f: &Expr, domain: &Domain, params: &Bindings, seed: u64) -> bool {
    let slots: Vec<&str> = domain.vars().collect();
    let Ok(c) = Compiled::new(f, &slots, params) else {
        return false;
    };
    let pts = super::sample_points(domain, 16, seed);
    pts.iter().filter(|p| c.eval_at(p).is_ok()).count() >= pts.len() / 2
}

struct Rules<'a> {
    params: &'a Bindings,
    domain: &'a Domain,
    seed: u64,
}

impl Rules<'_> {
    fn integrate(&self, e: &Expr, var: &str, depth: usize) -> Option<Expr> {
        if !e.depends_on(var) {
            return Some(e * Expr::var(var));
        }
        match e.node() {
            Node::Var(_) => return Some(Expr::rational(1, 2) * e.powi(2)),
            Node::Add(ts) => {
                let parts: Option<Vec<Expr>> = ts.iter().map(|t| self.integrate(t, var, depth)).collect();
                return parts.map(Expr::sum);
            }
            Node::Mul(fs) => {
                let (konst, dep): (Vec<Expr>, Vec<Expr>) = fs.iter().cloned().partition(|f| !f.depends_on(var));
                if !konst.is_empty() {
                    let c = Expr::product(konst);
                    return self.integrate(&Expr::product(dep), var, depth).map(|f| c * f);
                }
            }
            _ => {}
        }
        self.linear_table(e, var)
            .or_else(|| self.quadratic_denominator(e, var))
            .or_else(|| self.substitution(e, var, depth))
            .or_else(|| {
                let expanded = e.expand();
                (expanded != *e && matches!(expanded.node(), Node::Add(_)))
                    .then(|| self.integrate(&expanded, var, depth))
                    .flatten()
            })
    }

    /// `f(a*var + b)` for a table of elementary `f`.
    fn linear_table(&self, e: &Expr, var: &str) -> Option<Expr> {
        match e.node() {
            Node::Pow(base, n) if !n.depends_on(var) => {
                let (a, _) = base.linear_in(var)?;
                if n.as_number().is_some_and(|k| k == super::Number::MINUS_ONE) {
                    return Some(self.log_abs(base) / a);
                }
                let n1 = n + Expr::one();
                Some(Expr::pow(base.clone(), n1.clone()) / (n1 * a))
            }
            Node::Pow(base, u) if !base.depends_on(var) => {
                let (a, _) = u.linear_in(var)?;
                Some(e / (a * base.ln()))
            }
            Node::Call(f, u) => {
                let (a, _) = u.linear_in(var)?;
                let half = Expr::rational(1, 2);
                let one = Expr::one();
                let prim = match f {
                    Func::Exp => e.clone(),
                    Func::Sin => -Expr::call(Func::Cos, u.clone()),
                    Func::Cos => Expr::call(Func::Sin, u.clone()),
                    Func::Ln => u * u.ln() - u,
                    Func::Tan => -self.log_abs(&Expr::call(Func::Cos, u.clone())),
                    Func::Atan => u * Expr::call(Func::Atan, u.clone()) - &half * (&one + u.powi(2)).ln(),
                    Func::Atanh => u * Expr::call(Func::Atanh, u.clone()) + &half * (&one - u.powi(2)).ln(),
                    Func::Abs => &half * u * e,
                    Func::Sign => e.clone() * u,
                    Func::Tanh => return None,
                };
                Some(prim / a)
            }
            _ => None,
        }
    }

    /// `(p1*var + p0) / (A*var^2 + B*var + C)`.
    fn quadratic_denominator(&self, e: &Expr, var: &str) -> Option<Expr> {
        let mut denom = None;
        let mut numer = Vec::new();
        for f in e.factors() {
            match f.node() {
                Node::Pow(b, n) if denom.is_none() && n.as_number() == Some(super::Number::MINUS_ONE) => {
                    denom = Some(b.clone())
                }
                _ => numer.push(f),
            }
        }
        let q = denom?;
        let qc = q.poly_coeffs(var)?;
        if qc.len() != 3 || qc[2].is_zero() {
            return None;
        }
        let pc = Expr::product(numer).poly_coeffs(var)?;
        if pc.len() > 2 {
            return None;
        }
        let (a, b, c) = (&qc[2], &qc[1], &qc[0]);
        let p0 = pc[0].clone();
        let p1 = pc.get(1).cloned().unwrap_or_else(Expr::zero);
        let two_a = Expr::int(2) * a;
        let log_part = if p1.is_zero() { Expr::zero() } else { &p1 / &two_a * self.log_abs(&q) };
        let rest = p0 - &p1 * b / &two_a;
        if rest.is_zero() {
            return Some(log_part);
        }
        // complete the square: A*u^2 + C' with u = var + B/(2A)
        let u = Expr::var(var) + b / &two_a;
        let c_shift = c - b.powi(2) / (Expr::int(4) * a);
        if c_shift.is_zero() {
            return Some(log_part - rest / (a * u));
        }
        let ratio = a / &c_shift;
        let core = match self.sign(&ratio)? {
            1 => {
                let m = self.sqrt_pos(&ratio);
                Expr::call(Func::Atan, &m * &u) / (&c_shift * m)
            }
            _ => {
                let m = self.sqrt_pos(&-ratio);
                let mu = &m * &u;
                let inner = Expr::one() - mu.powi(2);
                if self.sign(&inner) == Some(1) {
                    Expr::call(Func::Atanh, mu) / (&c_shift * m)
                } else {
                    let one = Expr::one();
                    (self.log_abs(&(&one + &mu)) - self.log_abs(&(&one - &mu))) / (Expr::int(2) * &c_shift * m)
                }
            }
        };
        Some(log_part + rest * core)
    }

    /// Finds a subexpression `u` with `e = G(u) * u'` and integrates `G`.
    fn substitution(&self, e: &Expr, var: &str, depth: usize) -> Option<Expr> {
        if depth >= MAX_DEPTH {
            return None;
        }
        let t_name = format!("_u{depth}");
        let t = Expr::var(&t_name);
        let mut candidates = Vec::new();
        collect_inner(e, var, &mut candidates);
        candidates.sort_by_key(|c| std::cmp::Reverse(c.node_count()));
        candidates.dedup();
        for u in candidates {
            let du = u.diff(var);
            if du.is_zero() {
                continue;
            }
            let g = replace(&(e / &du), &u, &t);
            if g.depends_on(var) {
                continue;
            }
            let sub_domain = self.image_domain(&u, &t_name)?;
            let inner = Rules { params: self.params, domain: &sub_domain, seed: self.seed };
            if let Some(f) = inner.integrate(&g, &t_name, depth + 1) {
                return Some(f.subs(&t_name, &u));
            }
        }
        None
    }

    /// Domain for the substituted variable: the range of `u` over the current
    /// box, estimated from samples and corners.
    fn image_domain(&self, u: &Expr, name: &str) -> Option<Domain> {
        let slots: Vec<&str> = self.domain.vars().collect();
        let c = Compiled::new(u, &slots, self.params).ok()?;
        let mut pts = super::sample_points(self.domain, 64, self.seed);
        pts.extend(self.domain.corners());
        let vals: Vec<f64> = pts.iter().filter_map(|p| c.eval_at(p).ok()).collect();
        if vals.is_empty() {
            return None;
        }
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut d = self.domain.clone();
        d.set(name, Interval { lo, hi });
        Some(d)
    }

    /// Constant sign of `c` over the domain, if certifiable.
    fn sign(&self, c: &Expr) -> Option<i8> {
        if let Some(n) = c.as_number() {
            return match n.to_f64() {
                x if x > 0.0 => Some(1),
                x if x < 0.0 => Some(-1),
                _ => None,
            };
        }
        let vars: Vec<String> = c.variables().into_iter().collect();
        let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        match certify_nonvanishing(c, &self.domain.project(&refs), self.params, self.seed).ok()? {
            Certificate::NonVanishing { sign, .. } => Some(sign),
            _ => None,
        }
    }

    /// `sqrt(c)` for `c > 0`, split across factors whose signs are known so
    /// that e.g. `sqrt(k/a^2)` becomes `sqrt(k)/a` when `a > 0`.
    fn sqrt_pos(&self, c: &Expr) -> Expr {
        match c.node() {
            Node::Mul(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for f in fs {
                    match self.sign(f) {
                        Some(1) => out.push(self.sqrt_pos(f)),
                        Some(_) => {
                            // `-f` of a symbol is `-1 * f` again; recursing would not terminate
                            let neg = -f;
                            out.push(if matches!(neg.node(), Node::Mul(_)) { Expr::sqrt(neg) } else { self.sqrt_pos(&neg) });
                        }
                        None => return Expr::sqrt(c.clone()),
                    }
                }
                Expr::product(out)
            }
            Node::Pow(b, n) => match (self.sign(b), n.as_number().and_then(|k| k.as_integer())) {
                (Some(1), _) => Expr::pow(b.clone(), n / Expr::int(2)),
                (Some(-1), Some(k)) if k % 2 == 0 => Expr::pow(-b, n / Expr::int(2)),
                _ => Expr::sqrt(c.clone()),
            },
            _ => Expr::sqrt(c.clone()),
        }
    }

    /// `ln|u|`, dropping the absolute value when the sign of `u` is fixed.
    fn log_abs(&self, u: &Expr) -> Expr {
        match self.sign(u) {
            Some(1) => u.ln(),
            Some(_) => (-u).ln(),
            None => u.abs().ln(),
        }
    }
}

fn collect_inner(e: &Expr, var: &str, out: &mut Vec<Expr>) {
    if !e.depends_on(var) {
        return;
    }
    match e.node() {
        Node::Num(_) | Node::Var(_) | Node::Param(_) => {}
        Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| collect_inner(x, var, out)),
        Node::Pow(b, x) => {
            if b.depends_on(var) && b.symbol_name().is_none() {
                out.push(b.clone());
            }
            if x.depends_on(var) {
                out.push(x.clone());
            }
            collect_inner(b, var, out);
            collect_inner(x, var, out);
        }
        Node::Call(_, a) => {
            out.push(e.clone());
            if a.symbol_name().is_none() {
                out.push(a.clone());
            }
            collect_inner(a, var, out);
        }
    }
}

/// Structural replacement of every occurrence of `target`.
fn replace(e: &Expr, target: &Expr, with: &Expr) -> Expr {
    if e == target {
        return with.clone();
    }
    match e.node() {
        Node::Num(_) | Node::Var(_) | Node::Param(_) => e.clone(),
        Node::Add(xs) => Expr::sum(xs.iter().map(|x| replace(x, target, with))),
        Node::Mul(xs) => Expr::product(xs.iter().map(|x| replace(x, target, with))),
        Node::Pow(b, x) => Expr::pow(replace(b, target, with), replace(x, target, with)),
        Node::Call(f, a) => Expr::call(*f, replace(a, target, with)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_with_params;

    fn ctx(params: &[(&str, f64)], dom: &[(&str, f64, f64)]) -> IntegrationContext {
        let mut d = Domain::new();
        for (n, lo, hi) in dom {
            d = d.with(n, *lo, *hi).unwrap();
        }
        IntegrationContext::new(params.iter().map(|(k, v)| (k.to_string(), *v)).collect(), d)
    }

    fn p(src: &str) -> Expr {
        parse_with_params(src, &["k", "a"]).unwrap()
    }

    #[test]
    fn atan_branch() {
        let c = ctx(&[("k", 2.0)], &[("x", -2.0, 2.0)]);
        let f = antiderivative(&p("1/(1 + k*x^2)"), "x", &c);
        let f = f.symbolic().expect("symbolic").clone();
        assert_eq!(f, p("atan(k^(1/2)*x)/k^(1/2)"));
    }

    #[test]
    fn atanh_branch_inside_the_singular_lines() {
        let c = ctx(&[("k", 1.0), ("a", 1.0)], &[("v", -0.9, 0.9)]);
        let f = antiderivative(&p("1/(k*v^2 - a^2)"), "v", &c);
        assert_eq!(f.symbolic().unwrap().clone(), p("-atanh(k^(1/2)*v/a)/(a*k^(1/2))"));
    }

    #[test]
    fn atan_branch_for_negative_coefficient() {
        let c = ctx(&[("k", -0.25), ("a", 1.0)], &[("v", -2.0, 2.0)]);
        let f = antiderivative(&p("1/(k*v^2 - a^2)"), "v", &c);
        let f = f.symbolic().expect("symbolic").clone();
        let diff = f.diff("v") - p("1/(k*v^2 - a^2)");
        assert!(zero_test(&diff, &c.domain, &c.params, &ZeroTestConfig::default()).unwrap().is_zero());
    }

    #[test]
    fn log_branch_outside() {
        let c = ctx(&[], &[("v", 2.0, 5.0)]);
        let f = antiderivative(&p("1/(v^2 - 1)"), "v", &c);
        assert!(f.is_symbolic());
    }

    #[test]
    fn substitution_for_phi2() {
        let c = ctx(&[("k", 1.0), ("a", 1.0)], &[("x", -2.0, 2.0)]);
        let f = antiderivative(&p("-a^2*x/(1 + k*x^2)^2"), "x", &c);
        let f = f.symbolic().unwrap().clone();
        let g = &f - f.subs("x", &Expr::zero());
        let want = p("-a^2*x^2/(2*(1 + k*x^2))");
        let params = c.params.clone();
        let diff = g - want;
        assert!(zero_test(&diff, &c.domain, &params, &ZeroTestConfig::default()).unwrap().is_zero());
    }

    #[test]
    fn vanishing_coefficient_uses_specialized_form() {
        let c = ctx(&[("k", 0.0), ("a", 1.0)], &[("x", -2.0, 2.0)]);
        let f = antiderivative(&p("-a^2*x/(1 + k*x^2)^2"), "x", &c);
        assert!(f.is_symbolic());
        let pt: EvalPoint = [("x".to_string(), 1.5)].into_iter().collect();
        assert!((f.eval(&pt, &c.params).unwrap() + 1.125).abs() < 1e-12);
    }

    #[test]
    fn power_rule_and_logs() {
        let c = ctx(&[], &[("v", 0.5, 2.0)]);
        assert_eq!(antiderivative(&p("1/v"), "v", &c).symbolic().unwrap().clone(), p("ln(v)"));
        let c = ctx(&[], &[("v", -2.0, 2.0)]);
        assert_eq!(antiderivative(&p("1/v"), "v", &c).symbolic().unwrap().clone(), p("ln(abs(v))"));
        assert_eq!(antiderivative(&Expr::zero(), "v", &c).symbolic().unwrap().clone(), Expr::zero());
    }

    #[test]
    fn double_antiderivative_of_atanh() {
        let c = ctx(&[("k", 1.0), ("a", 1.0)], &[("v", -0.9, 0.9)]);
        let f = antiderivative(&p("atanh(k^(1/2)*v/a)"), "v", &c);
        assert!(f.is_symbolic());
    }

    #[test]
    fn numeric_fallback() {
        let c = ctx(&[], &[("x", -1.0, 1.0)]);
        let f = antiderivative(&p("exp(-x^2)"), "x", &c);
        assert!(!f.is_symbolic());
        let pt: EvalPoint = [("x".to_string(), 1.0)].into_iter().collect();
        let v = f.eval(&pt, &c.params).unwrap();
        assert!((v - 0.746_824_132_812_427).abs() < 1e-10);
    }
}
