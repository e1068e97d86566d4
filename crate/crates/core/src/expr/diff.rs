use super::{Expr, Func, Node};

pub(super) fn differentiate(e: &Expr, var: &str) -> Expr {
    if !e.depends_on(var) {
        return Expr::zero();
    }
    match e.node() {
        Node::Num(_) | Node::Param(_) => Expr::zero(),
        Node::Var(name) => {
            if &**name == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(ts) => Expr::sum(ts.iter().map(|t| differentiate(t, var))),
        Node::Mul(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for (i, f) in fs.iter().enumerate() {
                let df = differentiate(f, var);
                if df.is_zero() {
                    continue;
                }
                let others = fs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone());
                terms.push(Expr::product(others.chain(std::iter::once(df))));
            }
            Expr::sum(terms)
        }
        Node::Pow(b, ex) => {
            let db = differentiate(b, var);
            if !ex.depends_on(var) {
                let lowered = Expr::pow(b.clone(), ex - Expr::one());
                return Expr::product([ex.clone(), lowered, db]);
            }
            let de = differentiate(ex, var);
            let inner = &de * b.ln() + ex * db / b;
            e * inner
        }
        Node::Call(f, u) => {
            let du = differentiate(u, var);
            let outer = match f {
                Func::Sin => Expr::call(Func::Cos, u.clone()),
                Func::Cos => -Expr::call(Func::Sin, u.clone()),
                Func::Tan => Expr::one() + Expr::call(Func::Tan, u.clone()).powi(2),
                Func::Exp => e.clone(),
                Func::Ln => u.recip(),
                Func::Abs => Expr::call(Func::Sign, u.clone()),
                Func::Tanh => Expr::one() - Expr::call(Func::Tanh, u.clone()).powi(2),
                Func::Atanh => (Expr::one() - u.powi(2)).recip(),
                Func::Atan => (Expr::one() + u.powi(2)).recip(),
                Func::Sign => Expr::zero(),
            };
            outer * du
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    fn d(src: &str, var: &str) -> String {
        parse(src).unwrap().diff(var).to_string()
    }

    #[test]
    fn polynomial_rules() {
        assert_eq!(d("x^3 + 2*x", "x"), parse("3*x^2 + 2").unwrap().to_string());
        assert_eq!(d("x*v", "v"), "x");
        assert_eq!(d("k", "x"), "0");
    }

    #[test]
    fn chain_rule_through_functions() {
        let got = parse("ln(1 + x^2)").unwrap().diff("x");
        let want = parse("2*x/(1 + x^2)").unwrap();
        assert_eq!(got, want);
        assert_eq!(d("atanh(x)", "x"), parse("1/(1 - x^2)").unwrap().to_string());
    }

    #[test]
    fn variable_exponent() {
        let got = parse("x^x").unwrap().diff("x");
        let want = parse("x^x*(ln(x) + 1)").unwrap();
        let pt = [("x".to_string(), 1.7)].into_iter().collect();
        let g = crate::expr::evaluate(&got, &pt, &Default::default()).unwrap();
        let w = crate::expr::evaluate(&want, &pt, &Default::default()).unwrap();
        assert!((g - w).abs() < 1e-12);
    }
}
