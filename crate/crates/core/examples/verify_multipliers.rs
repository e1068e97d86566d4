//! Checks candidate Jacobi last multipliers for a user-defined equation and
//! for the first catalog oscillator.

use mforge::catalog;
use mforge::expr::{parse, Domain, ZeroTestConfig};
use mforge::geometry::Sode;
use mforge::multiplier::verify_multiplier;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ZeroTestConfig::default();

    // x'' = -x - x³: any F(x) makes μ = 1 a multiplier
    let duffing = Sode::new("duffing", parse("-x - x^3")?, Default::default(), Domain::new().with("x", -1.0, 1.0)?.with("v", -1.0, 1.0)?)?;
    for src in ["1", "1 + x^2"] {
        let m = verify_multiplier(&duffing, &parse(src)?, None, &cfg)?;
        println!("duffing, μ = {src:<8} residual {:<12} verified: {}", m.residual.to_string(), m.is_verified());
    }

    let s = catalog::system("oscillator1", 0.5, 1.0)?;
    println!("\n{}: x'' = {}", s.name, s.f);
    for src in ["1/(1 + k*x^2)", "1/(k*v^2 - a^2)", "1 + k*x^2"] {
        let m = verify_multiplier(&s, &s.expr(src)?, None, &cfg)?;
        println!("μ = {src:<16} multiplier condition: {:<5} non-vanishing: {}", m.residual_verdict.is_zero(), m.certificate.holds());
        if let mforge::expr::Verdict::NonZero { witness, residual, .. } = &m.residual_verdict {
            println!("    residual {residual:.3e} at {witness:?}");
        }
    }
    Ok(())
}
