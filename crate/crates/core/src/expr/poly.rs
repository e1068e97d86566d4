//! Expansion and polynomial views of expressions.

use super::{Expr, Node};

/// Products of sums beyond this many terms are left unexpanded.
const MAX_TERMS: usize = 512;

impl Expr {
    /// Distributes products over sums and expands small positive integer
    /// powers of sums, recursively.
    pub fn expand(&self) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Var(_) | Node::Param(_) => self.clone(),
            Node::Add(ts) => Expr::sum(ts.iter().map(Expr::expand)),
            Node::Mul(fs) => {
                let mut acc: Vec<Expr> = vec![Expr::one()];
                for f in fs {
                    let ef = f.expand();
                    let parts = ef.terms();
                    if acc.len() * parts.len() > MAX_TERMS {
                        return Expr::product(fs.iter().map(Expr::expand));
                    }
                    acc = acc.iter().flat_map(|a| parts.iter().map(move |p| a * p)).collect();
                }
                Expr::sum(acc)
            }
            Node::Pow(b, e) => {
                let base = b.expand();
                match e.as_number().and_then(|n| n.as_integer()) {
                    Some(n) if (2..=12).contains(&n) && matches!(base.node(), Node::Add(_)) => {
                        let parts = base.terms();
                        let mut acc = parts.clone();
                        for _ in 1..n {
                            if acc.len() * parts.len() > MAX_TERMS {
                                return Expr::pow(base, e.clone());
                            }
                            acc = Expr::sum(acc.iter().flat_map(|a| parts.iter().map(move |p| a * p))).terms();
                        }
                        Expr::sum(acc)
                    }
                    _ => Expr::pow(base, e.expand()),
                }
            }
            Node::Call(f, a) => Expr::call(*f, a.expand()),
        }
    }

    /// Coefficients `c[0..=deg]` when `self` is a polynomial in `var` whose
    /// coefficients do not involve `var`.
    pub fn poly_coeffs(&self, var: &str) -> Option<Vec<Expr>> {
        if !self.depends_on(var) {
            return Some(vec![self.clone()]);
        }
        let mut coeffs: Vec<Vec<Expr>> = Vec::new();
        for term in self.expand().terms() {
            let mut degree = 0usize;
            let mut rest = Vec::new();
            for f in term.factors() {
                match f.node() {
                    Node::Var(s) if &**s == var => degree += 1,
                    Node::Pow(b, e) if b.symbol_name() == Some(var) && !b.is_param() => {
                        let n = e.as_number()?.as_integer()?;
                        if n < 0 {
                            return None;
                        }
                        degree += n as usize;
                    }
                    _ if f.depends_on(var) => return None,
                    _ => rest.push(f),
                }
            }
            if coeffs.len() <= degree {
                coeffs.resize(degree + 1, Vec::new());
            }
            coeffs[degree].push(Expr::product(rest));
        }
        let out: Vec<Expr> = coeffs.into_iter().map(Expr::sum).collect();
        Some(out)
    }

    /// `(a, b)` with `self = a*var + b`, `a` not identically zero.
    pub fn linear_in(&self, var: &str) -> Option<(Expr, Expr)> {
        let c = self.poly_coeffs(var)?;
        if c.len() != 2 || c[1].is_zero() {
            return None;
        }
        Some((c[1].clone(), c[0].clone()))
    }

    pub fn is_param(&self) -> bool {
        matches!(self.node(), Node::Param(_))
    }
}
