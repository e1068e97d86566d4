//! Numeric evaluation with explicit singularity and domain reporting.

use std::collections::BTreeMap;

use super::{Expr, Func, Node, Number};

/// Parameter values by name.
pub type Bindings = BTreeMap<String, f64>;
/// Variable values by name.
pub type EvalPoint = BTreeMap<String, f64>;

/// Denominator magnitude below which evaluation reports a singularity.
pub const DEFAULT_EPS_SING: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("singular at `{0}`")]
    Singular(String),
    #[error("`{0}` is outside the real domain")]
    Domain(String),
}

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Slot(usize),
    Add(Vec<Op>),
    Mul(Vec<Op>),
    PowInt(Box<Op>, i32, usize),
    PowRat(Box<Op>, i64, i64, usize),
    Pow(Box<Op>, Box<Op>, usize),
    Call(Func, Box<Op>, usize),
}

/// An expression lowered to a slot-indexed evaluator with parameters folded in.
#[derive(Clone, Debug)]
pub struct Compiled {
    root: Op,
    slots: Vec<String>,
    origins: Vec<Expr>,
    eps_sing: f64,
}

impl Compiled {
    /// Compiles `e` so that `slots[i]` is read from `values[i]`. Symbols not in
    /// `slots` are looked up in `params`.
    pub fn new(e: &Expr, slots: &[&str], params: &Bindings) -> Result<Compiled, EvalError> {
        let mut origins = Vec::new();
        let root = lower(e, slots, params, &mut origins)?;
        Ok(Compiled { root, slots: slots.iter().map(|s| s.to_string()).collect(), origins, eps_sing: DEFAULT_EPS_SING })
    }

    pub fn with_eps(mut self, eps_sing: f64) -> Compiled {
        self.eps_sing = eps_sing;
        self
    }

    pub fn slots(&self) -> &[String] {
        &self.slots
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        let v = self.run(&self.root, values)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Singular("expression".into()))
        }
    }

    /// Evaluates at a named point; every slot must be present.
    pub fn eval_at(&self, point: &EvalPoint) -> Result<f64, EvalError> {
        let mut values = Vec::with_capacity(self.slots.len());
        for s in &self.slots {
            values.push(*point.get(s).ok_or_else(|| EvalError::Unbound(s.clone()))?);
        }
        self.eval(&values)
    }

    fn singular(&self, origin: usize) -> EvalError {
        EvalError::Singular(self.origins[origin].to_string())
    }

    fn outside(&self, origin: usize) -> EvalError {
        EvalError::Domain(self.origins[origin].to_string())
    }

    fn run(&self, op: &Op, values: &[f64]) -> Result<f64, EvalError> {
        Ok(match op {
            Op::Const(c) => *c,
            Op::Slot(i) => values[*i],
            Op::Add(xs) => {
                let mut acc = 0.0;
                for x in xs {
                    acc += self.run(x, values)?;
                }
                acc
            }
            Op::Mul(xs) => {
                let mut acc = 1.0;
                for x in xs {
                    acc *= self.run(x, values)?;
                }
                acc
            }
            Op::PowInt(b, n, o) => {
                let b = self.run(b, values)?;
                if *n < 0 && b.abs() < self.eps_sing {
                    return Err(self.singular(*o));
                }
                b.powi(*n)
            }
            Op::PowRat(b, p, q, o) => {
                let b = self.run(b, values)?;
                if *p < 0 && b.abs() < self.eps_sing {
                    return Err(self.singular(*o));
                }
                let e = *p as f64 / *q as f64;
                if b >= 0.0 {
                    b.powf(e)
                } else if q % 2 == 1 {
                    let mag = (-b).powf(e);
                    if p % 2 == 0 {
                        mag
                    } else {
                        -mag
                    }
                } else {
                    return Err(self.outside(*o));
                }
            }
            Op::Pow(b, e, o) => {
                let b = self.run(b, values)?;
                let e = self.run(e, values)?;
                if b > 0.0 {
                    b.powf(e)
                } else if b == 0.0 && e > 0.0 {
                    0.0
                } else if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
                    if e < 0.0 && b.abs() < self.eps_sing {
                        return Err(self.singular(*o));
                    }
                    b.powi(e as i32)
                } else {
                    return Err(self.outside(*o));
                }
            }
            Op::Call(f, a, o) => {
                let a = self.run(a, values)?;
                match f {
                    Func::Ln if a <= 0.0 => return Err(self.outside(*o)),
                    Func::Atanh if a.abs() >= 1.0 => return Err(self.outside(*o)),
                    Func::Tan if a.cos().abs() < self.eps_sing => return Err(self.singular(*o)),
                    _ => {}
                }
                let r = f.apply_f64(a);
                if !r.is_finite() {
                    return Err(self.singular(*o));
                }
                r
            }
        })
    }
}

fn lower(e: &Expr, slots: &[&str], params: &Bindings, origins: &mut Vec<Expr>) -> Result<Op, EvalError> {
    fn origin(e: &Expr, origins: &mut Vec<Expr>) -> usize {
        origins.push(e.clone());
        origins.len() - 1
    }
    Ok(match e.node() {
        Node::Num(n) => Op::Const(n.to_f64()),
        Node::Var(s) | Node::Param(s) => match slots.iter().position(|x| *x == &**s) {
            Some(i) => Op::Slot(i),
            None => Op::Const(*params.get(&**s).ok_or_else(|| EvalError::Unbound(s.to_string()))?),
        },
        Node::Add(xs) => Op::Add(xs.iter().map(|x| lower(x, slots, params, origins)).collect::<Result<_, _>>()?),
        Node::Mul(xs) => Op::Mul(xs.iter().map(|x| lower(x, slots, params, origins)).collect::<Result<_, _>>()?),
        Node::Pow(b, x) => {
            let o = origin(e, origins);
            let base = Box::new(lower(b, slots, params, origins)?);
            match x.as_number() {
                Some(Number::Rat(r)) if r.is_integer() && r.numer().abs() < i32::MAX as i64 => {
                    Op::PowInt(base, *r.numer() as i32, o)
                }
                Some(Number::Rat(r)) => Op::PowRat(base, *r.numer(), *r.denom(), o),
                _ => Op::Pow(base, Box::new(lower(x, slots, params, origins)?), o),
            }
        }
        Node::Call(f, a) => {
            let o = origin(e, origins);
            Op::Call(*f, Box::new(lower(a, slots, params, origins)?), o)
        }
    })
}

/// One-shot evaluation of `e` at `point` with parameter values `params`.
pub fn evaluate(e: &Expr, point: &EvalPoint, params: &Bindings) -> Result<f64, EvalError> {
    let slots: Vec<&str> = point.keys().map(String::as_str).collect();
    Compiled::new(e, &slots, params)?.eval_at(point)
}
