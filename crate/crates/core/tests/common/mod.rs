#![allow(dead_code)]

use mforge::expr::{Expr, Func};
use rand::Rng;

/// Small rational in `[lo, hi]` with denominator 10.
pub fn tenth(rng: &mut impl Rng, lo: i64, hi: i64) -> Expr {
    Expr::rational(rng.gen_range(lo..=hi), 10)
}

/// A random polynomial in `vars` with total degree at most `max_deg`.
pub fn random_poly(rng: &mut impl Rng, vars: &[&str], max_deg: u32, terms: usize) -> Expr {
    Expr::sum((0..terms).map(|_| {
        let mut m = Expr::int(rng.gen_range(-3..=3));
        let mut left = rng.gen_range(0..=max_deg);
        while left > 0 {
            let var = vars[rng.gen_range(0..vars.len())];
            let e = rng.gen_range(1..=left);
            m = m * Expr::var(var).powi(e as i64);
            left -= e;
        }
        m
    }))
}

/// A random smooth expression built from sums, products, `exp` and `sin`.
pub fn random_smooth(rng: &mut impl Rng, vars: &[&str], depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.3) {
            Expr::int(rng.gen_range(-3..=3))
        } else {
            Expr::var(vars[rng.gen_range(0..vars.len())])
        };
    }
    let a = random_smooth(rng, vars, depth - 1);
    match rng.gen_range(0..4) {
        0 => a + random_smooth(rng, vars, depth - 1),
        1 => a * random_smooth(rng, vars, depth - 1),
        2 => a.exp(),
        _ => Expr::call(Func::Sin, a),
    }
}

/// `G(u) = c0 + c1 u + c2 u² + c3 u³` with `c0 ∈ [1.6, 3]` and `|ci| ≤ 0.5`,
/// truncated at a random degree ≤ 3. Positive whenever `|u| ≤ 1`.
pub fn positive_cubic(rng: &mut impl Rng) -> Expr {
    let deg = rng.gen_range(0..=3);
    let u = Expr::var("u");
    let mut g = tenth(rng, 16, 30);
    for d in 1..=deg {
        g = g + tenth(rng, -5, 5) * u.powi(d);
    }
    g
}
