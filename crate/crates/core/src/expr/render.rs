//! Infix rendering that the parser reads back to the same canonical tree.

use super::{Expr, Node, Number};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const POWER: u8 = 3;

pub(super) fn render(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, 0, &mut out);
    out
}

fn wrap(out: &mut String, parens: bool, body: impl FnOnce(&mut String)) {
    if parens {
        out.push('(');
    }
    body(out);
    if parens {
        out.push(')');
    }
}

fn write_expr(e: &Expr, ctx: u8, out: &mut String) {
    match e.node() {
        Node::Num(n) => write_number(*n, ctx, out),
        Node::Var(s) | Node::Param(s) => out.push_str(s),
        Node::Add(ts) => wrap(out, ctx > SUM, |out| {
            for (i, t) in ts.iter().enumerate() {
                if i == 0 {
                    write_expr(t, SUM, out);
                } else if t.has_negative_coeff() {
                    out.push_str(" - ");
                    write_expr(&-t, PRODUCT, out);
                } else {
                    out.push_str(" + ");
                    write_expr(t, SUM, out);
                }
            }
        }),
        Node::Mul(_) => write_product(e, ctx, out),
        Node::Pow(b, x) => {
            if x.as_number().is_some_and(|n| n.is_negative() && n.as_integer().is_some()) {
                // a lone reciprocal power reads better as 1/x^n
                write_product(e, ctx, out);
                return;
            }
            wrap(out, ctx > POWER, |out| {
                write_expr(b, POWER + 1, out);
                out.push('^');
                write_expr(x, POWER + 1, out);
            })
        }
        Node::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(a, 0, out);
            out.push(')');
        }
    }
}

fn write_number(n: Number, ctx: u8, out: &mut String) {
    let text = n.to_string();
    let parens = (ctx >= PRODUCT && n.is_negative()) || (ctx > PRODUCT && text.contains('/'));
    wrap(out, parens, |out| out.push_str(&text));
}

fn write_product(e: &Expr, ctx: u8, out: &mut String) {
    let (coef, rest) = e.split_coeff();
    let mut num: Vec<Expr> = Vec::new();
    let mut den: Vec<Expr> = Vec::new();
    for f in rest.factors() {
        match f.node() {
            Node::Pow(b, x) if x.as_number().is_some_and(|n| n.is_negative() && n.as_integer().is_some()) => {
                den.push(Expr::pow(b.clone(), -x));
            }
            _ => num.push(f),
        }
    }
    let negative = coef.is_negative();
    let mag = coef.abs();
    let (cn, cd) = match mag {
        Number::Rat(r) => (Number::int(*r.numer()), Number::int(*r.denom())),
        Number::Float(_) => (mag, Number::ONE),
    };
    let mut parts: Vec<String> = Vec::new();
    if !cn.is_one() || num.is_empty() {
        parts.push(cn.to_string());
    }
    for f in &num {
        let mut s = String::new();
        write_expr(f, PRODUCT, &mut s);
        parts.push(s);
    }
    let mut dparts: Vec<String> = Vec::new();
    if !cd.is_one() {
        dparts.push(cd.to_string());
    }
    for f in &den {
        let mut s = String::new();
        write_expr(f, PRODUCT, &mut s);
        dparts.push(s);
    }
    let parens = ctx > PRODUCT || (negative && ctx == PRODUCT);
    wrap(out, parens, |out| {
        if negative {
            out.push('-');
        }
        out.push_str(&parts.join("*"));
        match dparts.len() {
            0 => {}
            1 => {
                out.push('/');
                out.push_str(&dparts[0]);
            }
            _ => {
                out.push_str("/(");
                out.push_str(&dparts.join("*"));
                out.push(')');
            }
        }
    });
}
