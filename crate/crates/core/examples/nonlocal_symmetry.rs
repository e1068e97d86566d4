//! Extends the first oscillator with w' = F·h(v), solves the characteristic
//! equation for g and checks that Y = g·X_H commutes with the extended flow.

use mforge::catalog;
use mforge::expr::{Expr, Interval, ZeroTestConfig};
use mforge::nonlocal::{build_symmetry, characteristic_g, context, exp_profile, extend};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ZeroTestConfig::default();
    let mut s = catalog::system("oscillator1", 1.0, 1.0)?;
    // h = 1/v needs a velocity interval away from zero
    s.domain.set("v", Interval::new(0.05, 0.5)?);

    for h in [Expr::var("v").recip(), s.expr("1 + v^2")?] {
        let es = extend(&s, &h)?;
        let g = characteristic_g(&es.h, &exp_profile(), &context(&es, &cfg))?;
        let y = build_symmetry(&es, &g, &cfg)?;
        println!("h = {h}");
        println!("  extended field  {}", es.field);
        println!("  g               {g}");
        println!("  Y               {}", y.y);
        println!("  [Y, X̄] = λX̄ with λ = {}: {}", y.lambda, y.bracket_verdicts.iter().all(|v| v.is_zero()));
    }
    Ok(())
}
