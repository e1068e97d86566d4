//! Symbolic expressions over named variables and parameters.
//!
//! Every [`Expr`] is built through canonicalizing constructors, so a value is
//! always in normal form: sums and products are flattened and sorted, numeric
//! constants are folded exactly, like terms are collected and repeated
//! factors merge into powers. Structurally equal trees therefore compare
//! equal, while deeper identities (anything needing expansion or
//! transcendental rewriting) are left to [`zero_test`].

mod diff;
mod domain;
mod eval;
mod integrate;
mod number;
mod parse;
mod poly;
mod quad;
mod render;
mod zero;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;
use std::sync::Arc;

pub use domain::{sample_points, Domain, DomainError, Interval};
pub use eval::{evaluate, Bindings, Compiled, EvalError, EvalPoint, DEFAULT_EPS_SING};
pub use integrate::{antiderivative, Antiderivative, IntegrationContext, NumericAntiderivative};
pub use number::{Number, Rational};
pub use parse::{parse, parse_with_params, ParseError};
pub use quad::{adaptive_simpson, QUAD_ABS_TOL};
pub use zero::{
    certify_nonvanishing, certify_nonvanishing_with, zero_test, zero_test_with, Certificate, Verdict, ZeroTestConfig,
    ZeroTestError, DEFAULT_SEED,
};

/// Unary functions understood by the parser and evaluator.
///
/// `Sign` never comes out of the parser's fixed list by default; it is produced
/// by differentiating `abs` and is accepted back so rendered trees re-parse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Abs,
    Tanh,
    Atanh,
    Atan,
    Sign,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
            Func::Atanh => "atanh",
            Func::Atan => "atan",
            Func::Sign => "sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            "tanh" => Func::Tanh,
            "atanh" => Func::Atanh,
            "atan" => Func::Atan,
            "sign" => Func::Sign,
            _ => return None,
        })
    }

    fn is_odd(self) -> bool {
        matches!(self, Func::Sin | Func::Tan | Func::Tanh | Func::Atanh | Func::Atan | Func::Sign)
    }

    fn apply_f64(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Abs => x.abs(),
            Func::Tanh => x.tanh(),
            Func::Atanh => x.atanh(),
            Func::Atan => x.atan(),
            Func::Sign => sign(x),
        }
    }
}

pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// One node of an expression tree. The variant order doubles as the
/// canonical sort order of terms and factors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Num(Number),
    Var(Arc<str>),
    Param(Arc<str>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Expr),
    Call(Func, Expr),
}

/// Immutable, cheaply clonable expression handle.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl Expr {
    fn raw(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(n: Number) -> Expr {
        Expr::raw(Node::Num(n))
    }

    pub fn int(n: i64) -> Expr {
        Expr::num(Number::int(n))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::num(Number::ratio(num, den))
    }

    pub fn float(x: f64) -> Expr {
        Expr::num(Number::float(x))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(name: &str) -> Expr {
        Expr::raw(Node::Var(Arc::from(name)))
    }

    pub fn param(name: &str) -> Expr {
        Expr::raw(Node::Param(Arc::from(name)))
    }

    pub fn as_number(&self) -> Option<Number> {
        match self.node() {
            Node::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_number().is_some_and(Number::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_number().is_some_and(Number::is_one)
    }

    pub fn is_number(&self) -> bool {
        self.as_number().is_some()
    }

    /// Name of a variable or parameter leaf.
    pub fn symbol_name(&self) -> Option<&str> {
        match self.node() {
            Node::Var(s) | Node::Param(s) => Some(s),
            _ => None,
        }
    }

    /// Top-level additive terms (a single-element slice for non-sums).
    pub fn terms(&self) -> Vec<Expr> {
        match self.node() {
            Node::Add(ts) => ts.clone(),
            _ => vec![self.clone()],
        }
    }

    /// Multiplicative factors, numeric coefficient included.
    pub fn factors(&self) -> Vec<Expr> {
        match self.node() {
            Node::Mul(fs) => fs.clone(),
            _ => vec![self.clone()],
        }
    }

    /// Splits a term into its numeric coefficient and the remaining factor.
    pub fn split_coeff(&self) -> (Number, Expr) {
        match self.node() {
            Node::Num(n) => (*n, Expr::one()),
            Node::Mul(fs) => match fs[0].node() {
                Node::Num(n) => {
                    let rest = if fs.len() == 2 { fs[1].clone() } else { Expr::raw(Node::Mul(fs[1..].to_vec())) };
                    (*n, rest)
                }
                _ => (Number::ONE, self.clone()),
            },
            _ => (Number::ONE, self.clone()),
        }
    }

    /// Whether the canonical form carries a negative leading coefficient.
    pub fn has_negative_coeff(&self) -> bool {
        self.split_coeff().0.is_negative()
    }

    // ---- canonicalizing constructors -------------------------------------

    pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut constant = Number::ZERO;
        let mut collected: BTreeMap<Expr, Number> = BTreeMap::new();
        let mut stack: Vec<Expr> = items.into_iter().collect();
        stack.reverse();
        while let Some(item) = stack.pop() {
            match item.node() {
                Node::Num(n) => constant = constant.add(*n),
                Node::Add(ts) => stack.extend(ts.iter().rev().cloned()),
                _ => {
                    let (c, rest) = item.split_coeff();
                    let entry = collected.entry(rest).or_insert(Number::ZERO);
                    *entry = entry.add(c);
                }
            }
        }
        let mut terms = Vec::with_capacity(collected.len() + 1);
        if !constant.is_zero() {
            terms.push(Expr::num(constant));
        }
        for (rest, c) in collected {
            if c.is_zero() {
                continue;
            }
            terms.push(Expr::scaled(c, rest));
        }
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => Expr::raw(Node::Add(terms)),
        }
    }

    /// `c * rest` for an already canonical, non-numeric `rest`.
    fn scaled(c: Number, rest: Expr) -> Expr {
        if c.is_one() {
            return rest;
        }
        let mut fs = vec![Expr::num(c)];
        match rest.node() {
            Node::Mul(inner) => fs.extend(inner.iter().cloned()),
            _ => fs.push(rest),
        }
        Expr::raw(Node::Mul(fs))
    }

    pub fn product<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        let mut coef = Number::ONE;
        let mut powers: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
        let mut stack: Vec<Expr> = items.into_iter().collect();
        while let Some(item) = stack.pop() {
            match item.node() {
                Node::Num(n) => coef = coef.mul(*n),
                Node::Mul(fs) => stack.extend(fs.iter().cloned()),
                Node::Pow(b, e) => powers.entry(b.clone()).or_default().push(e.clone()),
                _ => powers.entry(item.clone()).or_default().push(Expr::one()),
            }
        }
        if coef.is_zero() {
            return Expr::zero();
        }
        let mut factors = Vec::with_capacity(powers.len());
        let mut reprocess = false;
        for (base, exps) in powers {
            let exp = if exps.len() == 1 { exps.into_iter().next().unwrap() } else { Expr::sum(exps) };
            let p = Expr::pow(base, exp);
            match p.node() {
                Node::Num(n) => coef = coef.mul(*n),
                Node::Mul(_) => {
                    reprocess = true;
                    factors.push(p);
                }
                _ => factors.push(p),
            }
        }
        if coef.is_zero() {
            return Expr::zero();
        }
        if reprocess {
            factors.push(Expr::num(coef));
            return Expr::product(factors);
        }
        factors.sort();
        if factors.is_empty() {
            return Expr::num(coef);
        }
        if factors.len() == 1 {
            let f = factors.pop().unwrap();
            if coef.is_one() {
                return f;
            }
            // numeric coefficients distribute over sums: 2*(x + 1) -> 2*x + 2
            if let Node::Add(ts) = f.node() {
                return Expr::sum(ts.iter().map(|t| Expr::product([Expr::num(coef), t.clone()])));
            }
            return Expr::raw(Node::Mul(vec![Expr::num(coef), f]));
        }
        // sums among several factors are kept primitive: -(2*a + 2*b)*c becomes -2*(a + b)*c
        if let Some((i, c)) = factors.iter().enumerate().find_map(|(i, f)| sum_content(f).map(|c| (i, c))) {
            factors[i] = divide_terms(&factors[i], c);
            factors.push(Expr::num(coef.mul(c)));
            return Expr::product(factors);
        }
        if !coef.is_one() {
            factors.insert(0, Expr::num(coef));
        }
        Expr::raw(Node::Mul(factors))
    }

    pub fn pow(base: Expr, exp: Expr) -> Expr {
        if exp.is_zero() {
            return Expr::one();
        }
        if exp.is_one() {
            return base;
        }
        if base.is_one() {
            return Expr::one();
        }
        let exp_num = exp.as_number();
        if let (Some(b), Some(e)) = (base.as_number(), exp_num) {
            if let Some(folded) = fold_numeric_pow(b, e) {
                return Expr::num(folded);
            }
            return Expr::raw(Node::Pow(base, exp));
        }
        let exp_int = exp_num.and_then(Number::as_integer);
        match base.node() {
            Node::Pow(inner_base, inner_exp) if exp_int.is_some() => {
                return Expr::pow(inner_base.clone(), Expr::product([inner_exp.clone(), exp]));
            }
            Node::Mul(fs) if exp_int.is_some() => {
                return Expr::product(fs.iter().map(|f| Expr::pow(f.clone(), exp.clone())));
            }
            Node::Call(Func::Exp, arg) => {
                return Expr::call(Func::Exp, Expr::product([arg.clone(), exp]));
            }
            Node::Call(Func::Abs, arg) if exp_int.is_some_and(|n| n % 2 == 0) => {
                return Expr::pow(arg.clone(), exp);
            }
            Node::Add(_) if exp_int.is_some() => {
                if let Some(c) = sum_content(&base) {
                    return Expr::product([Expr::pow(Expr::num(c), exp.clone()), Expr::pow(divide_terms(&base, c), exp)]);
                }
            }
            _ => {}
        }
        Expr::raw(Node::Pow(base, exp))
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        if let Some(n) = arg.as_number() {
            if let Some(v) = fold_numeric_call(func, n) {
                return Expr::num(v);
            }
        }
        match (func, arg.node()) {
            (Func::Exp, Node::Call(Func::Ln, inner)) => return inner.clone(),
            (Func::Ln, Node::Call(Func::Exp, inner)) => return inner.clone(),
            (Func::Tanh, Node::Call(Func::Atanh, inner)) => return inner.clone(),
            (Func::Atanh, Node::Call(Func::Tanh, inner)) => return inner.clone(),
            (Func::Tan, Node::Call(Func::Atan, inner)) => return inner.clone(),
            (Func::Abs, Node::Call(Func::Abs | Func::Exp, _)) => return arg,
            (Func::Sign, Node::Call(Func::Sign, _)) => return arg,
            (Func::Exp, Node::Add(ts)) => {
                return Expr::product(ts.iter().map(|t| Expr::call(Func::Exp, t.clone())));
            }
            (Func::Exp, Node::Mul(_)) => {
                let (c, rest) = arg.split_coeff();
                if let Node::Call(Func::Ln, inner) = rest.node() {
                    return Expr::pow(inner.clone(), Expr::num(c));
                }
            }
            (Func::Ln, Node::Mul(fs)) if fs.iter().all(is_positive_form) => {
                return Expr::sum(fs.iter().map(|f| Expr::call(Func::Ln, f.clone())));
            }
            (Func::Ln, Node::Pow(b, e)) if is_positive_form(b) => {
                return Expr::product([e.clone(), Expr::call(Func::Ln, b.clone())]);
            }
            (Func::Abs, Node::Mul(fs)) => {
                return Expr::product(fs.iter().map(|f| Expr::call(Func::Abs, f.clone())));
            }
            (Func::Abs, Node::Pow(b, e)) => {
                if let Some(n) = e.as_number().and_then(Number::as_integer) {
                    return if n % 2 == 0 { arg.clone() } else { Expr::pow(Expr::call(Func::Abs, b.clone()), e.clone()) };
                }
            }
            _ => {}
        }
        if arg.has_negative_coeff() && !arg.is_number() {
            if func.is_odd() {
                return -Expr::call(func, -arg);
            }
            if matches!(func, Func::Cos | Func::Abs) {
                return Expr::call(func, -arg);
            }
        }
        Expr::raw(Node::Call(func, arg))
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::pow(arg, Expr::rational(1, 2))
    }

    pub fn recip(&self) -> Expr {
        Expr::pow(self.clone(), Expr::int(-1))
    }

    pub fn powi(&self, n: i64) -> Expr {
        Expr::pow(self.clone(), Expr::int(n))
    }

    pub fn exp(&self) -> Expr {
        Expr::call(Func::Exp, self.clone())
    }

    pub fn ln(&self) -> Expr {
        Expr::call(Func::Ln, self.clone())
    }

    pub fn abs(&self) -> Expr {
        Expr::call(Func::Abs, self.clone())
    }

    // ---- structural queries -----------------------------------------------

    /// Variables and parameters occurring in the tree.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Some(name) = e.symbol_name() {
                out.insert(name.to_string());
            }
        });
        out
    }

    /// Variable (non-parameter) names occurring in the tree.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Node::Var(s) = e.node() {
                out.insert(s.to_string());
            }
        });
        out
    }

    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Node::Param(s) = e.node() {
                out.insert(s.to_string());
            }
        });
        out
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Var(s) | Node::Param(s) => &**s == name,
            Node::Add(xs) | Node::Mul(xs) => xs.iter().any(|x| x.depends_on(name)),
            Node::Pow(b, e) => b.depends_on(name) || e.depends_on(name),
            Node::Call(_, a) => a.depends_on(name),
        }
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn visit(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self.node() {
            Node::Num(_) | Node::Var(_) | Node::Param(_) => {}
            Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| x.visit(f)),
            Node::Pow(b, e) => {
                b.visit(f);
                e.visit(f);
            }
            Node::Call(_, a) => a.visit(f),
        }
    }

    /// Rebuilds the tree bottom-up, replacing leaves through `leaf`.
    pub fn map_leaves(&self, leaf: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Var(_) | Node::Param(_) => leaf(self).unwrap_or_else(|| self.clone()),
            Node::Add(xs) => Expr::sum(xs.iter().map(|x| x.map_leaves(leaf))),
            Node::Mul(xs) => Expr::product(xs.iter().map(|x| x.map_leaves(leaf))),
            Node::Pow(b, e) => Expr::pow(b.map_leaves(leaf), e.map_leaves(leaf)),
            Node::Call(func, a) => Expr::call(*func, a.map_leaves(leaf)),
        }
    }

    /// Substitutes `value` for every variable or parameter named `name`.
    pub fn subs(&self, name: &str, value: &Expr) -> Expr {
        if !self.depends_on(name) {
            return self.clone();
        }
        self.map_leaves(&|leaf| (leaf.symbol_name() == Some(name)).then(|| value.clone()))
    }

    pub fn subs_all(&self, values: &BTreeMap<String, Expr>) -> Expr {
        self.map_leaves(&|leaf| leaf.symbol_name().and_then(|n| values.get(n).cloned()))
    }

    /// Replaces parameters (or like-named variables) by their numeric values.
    pub fn specialize(&self, params: &Bindings) -> Expr {
        self.map_leaves(&|leaf| leaf.symbol_name().and_then(|n| params.get(n)).map(|v| Expr::float(*v)))
    }

    /// Reinterprets the listed variable names as parameters.
    pub fn with_params(&self, names: &[&str]) -> Expr {
        self.map_leaves(&|leaf| match leaf.node() {
            Node::Var(s) if names.contains(&&**s) => Some(Expr::param(s)),
            _ => None,
        })
    }

    /// Rebuilds through the canonicalizing constructors. Idempotent.
    pub fn normalize(&self) -> Expr {
        self.map_leaves(&|_| None)
    }

    pub fn diff(&self, var: &str) -> Expr {
        diff::differentiate(self, var)
    }
}

fn fold_numeric_pow(b: Number, e: Number) -> Option<Number> {
    if let Some(n) = e.as_integer() {
        return b.powi(n);
    }
    match (b, e) {
        (Number::Rat(_), Number::Rat(er)) => b.exact_root_pow(er),
        _ => {
            let (bf, ef) = (b.to_f64(), e.to_f64());
            let v = bf.powf(ef);
            (v.is_finite() && (bf > 0.0)).then(|| Number::float(v))
        }
    }
}

fn fold_numeric_call(func: Func, n: Number) -> Option<Number> {
    match func {
        Func::Abs => return Some(n.abs()),
        Func::Sign => return Some(Number::float(sign(n.to_f64()))),
        _ => {}
    }
    if n.is_zero() {
        return match func {
            Func::Sin | Func::Tan | Func::Tanh | Func::Atanh | Func::Atan => Some(Number::ZERO),
            Func::Cos | Func::Exp => Some(Number::ONE),
            _ => None,
        };
    }
    if n.is_one() && func == Func::Ln {
        return Some(Number::ZERO);
    }
    // transcendental values of exact rationals stay symbolic
    if let Number::Float(x) = n {
        let v = func.apply_f64(x);
        if v.is_finite() {
            return Some(Number::float(v));
        }
    }
    None
}

/// Forms that are positive wherever they are defined, so `ln` may split them.
/// The rational content of a sum: gcd of the numerators over lcm of the
/// denominators, signed like the term with the smallest non-numeric part.
/// `None` when it is one or some coefficient is not rational.
fn sum_content(e: &Expr) -> Option<Number> {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    let Node::Add(ts) = e.node() else { return None };
    let (mut num, mut den) = (0i64, 1i64);
    for t in ts {
        let r = t.split_coeff().0.as_rational()?;
        num = gcd(num, *r.numer());
        den = den.checked_mul(*r.denom() / gcd(den, *r.denom()))?;
    }
    let lead = ts.iter().map(Expr::split_coeff).min_by(|a, b| a.1.cmp(&b.1))?.0;
    let c = Number::ratio(if lead.is_negative() { -num } else { num }, den);
    (!c.is_one()).then_some(c)
}

fn divide_terms(e: &Expr, c: Number) -> Expr {
    let inv = Expr::num(c.recip().expect("content is nonzero"));
    Expr::sum(e.terms().into_iter().map(|t| Expr::product([inv.clone(), t])))
}

fn is_positive_form(e: &Expr) -> bool {
    match e.node() {
        Node::Num(n) => !n.is_negative() && !n.is_zero(),
        Node::Call(Func::Abs | Func::Exp, _) => true,
        Node::Pow(b, _) => is_positive_form(b),
        Node::Mul(fs) => fs.iter().all(is_positive_form),
        _ => false,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render::render(self))
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum([a, b]));
binop!(Sub, sub, |a, b| Expr::sum([a, Expr::product([Expr::int(-1), b])]));
binop!(Mul, mul, |a, b| Expr::product([a, b]));
binop!(Div, div, |a, b| Expr::product([a, Expr::pow(b, Expr::int(-1))]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::int(-1), self])
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var("x")
    }

    fn v() -> Expr {
        Expr::var("v")
    }

    #[test]
    fn like_terms_collect_and_cancel() {
        assert_eq!(&x() - &x(), Expr::zero());
        assert_eq!(&x() + &x(), Expr::int(2) * x());
        let e = Expr::int(3) * x() * v() - v() * x() * Expr::int(3);
        assert!(e.is_zero());
    }

    #[test]
    fn repeated_factors_merge_into_powers() {
        assert_eq!(&x() * &x(), x().powi(2));
        assert_eq!(x().powi(3) / x(), x().powi(2));
        assert_eq!(&x() / &x(), Expr::one());
    }

    #[test]
    fn integer_powers_distribute_over_products() {
        let e = (Expr::int(2) * x() * v()).powi(-1);
        assert_eq!(e, Expr::rational(1, 2) * x().recip() * v().recip());
    }

    #[test]
    fn numeric_coefficients_distribute_over_sums() {
        let e = Expr::int(2) * (x() + Expr::one());
        assert_eq!(e, Expr::int(2) * x() + Expr::int(2));
        assert_eq!(-(x() - v()), v() - x());
    }

    #[test]
    fn exp_of_sum_with_log_becomes_power() {
        let w = Expr::var("w");
        let g = (w.clone() - v().abs().ln()).exp();
        assert_eq!(g, w.exp() * v().abs().recip());
        let g2 = (w.clone() - v().ln()).exp();
        assert_eq!(g2, w.exp() / v());
    }

    #[test]
    fn inverse_function_pairs_cancel() {
        assert_eq!(Expr::call(Func::Tanh, Expr::call(Func::Atanh, x())), x());
        assert_eq!(Expr::call(Func::Ln, x().exp()), x());
        assert_eq!(Expr::call(Func::Sin, -x()), -Expr::call(Func::Sin, x()));
        assert_eq!(Expr::call(Func::Cos, -x()), Expr::call(Func::Cos, x()));
    }

    #[test]
    fn numeric_folding() {
        assert_eq!(Expr::sqrt(Expr::int(4)), Expr::int(2));
        assert_eq!(Expr::int(2).powi(-2), Expr::rational(1, 4));
        assert!(matches!(Expr::sqrt(Expr::int(2)).node(), Node::Pow(..)));
        assert_eq!(Expr::call(Func::Exp, Expr::zero()), Expr::one());
    }

    #[test]
    fn substitution_renormalizes() {
        let e = x().powi(2) + v();
        assert_eq!(e.subs("x", &Expr::int(3)), v() + Expr::int(9));
        assert_eq!(e.subs("v", &-x().powi(2)), Expr::zero());
    }

    #[test]
    fn params_are_distinct_leaves() {
        let e = parse("k*x").unwrap().with_params(&["k"]);
        assert_eq!(e.parameters().into_iter().collect::<Vec<_>>(), vec!["k".to_string()]);
        assert_eq!(e.variables().into_iter().collect::<Vec<_>>(), vec!["x".to_string()]);
        assert!(e.diff("k").is_zero() || !e.diff("k").is_zero());
    }
}
