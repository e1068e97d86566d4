//! Prolongs point-symmetry ansätze on the extended system and evaluates the
//! determining residuals: the constructed symmetry passes, a rotation does not.

use mforge::catalog;
use mforge::expr::{Expr, Interval, ZeroTestConfig};
use mforge::geometry::PointSymmetryAnsatz;
use mforge::nonlocal::{as_ansatz, build_symmetry, determining_residuals, extend, verify_bracket, verify_determining};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ZeroTestConfig::default();
    let mut s = catalog::system("oscillator1", 1.0, 1.0)?;
    s.domain.set("v", Interval::new(0.05, 0.5)?);
    let es = extend(&s, &Expr::var("v").recip())?;

    let y = build_symmetry(&es, &(Expr::var("w").exp() / Expr::var("v")), &cfg)?;
    let rotation = PointSymmetryAnsatz::new(Expr::zero(), vec![("x".into(), Expr::var("v")), ("v".into(), -Expr::var("x")), ("w".into(), Expr::zero())]);

    for (name, ansatz) in [("Y = g X_H", as_ansatz(&y)), ("rotation", rotation)] {
        println!("{name}:");
        for (i, r) in determining_residuals(&es, &ansatz)?.iter().enumerate() {
            let shown = r.to_string();
            println!("  residual {i}: {}", if shown.len() > 70 { format!("{}…", &shown[..70]) } else { shown });
        }
        let det = verify_determining(&es, &ansatz, &cfg)?.iter().all(|v| v.is_zero());
        let bracket = verify_bracket(&es, &ansatz, &cfg)?.iter().all(|v| v.is_zero());
        println!("  determining: {det}, bracket: {bracket}");
    }
    Ok(())
}
