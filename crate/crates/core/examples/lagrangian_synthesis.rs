//! Builds Lagrangians from a multiplier (L_vv = μ) and from a first integral,
//! then checks the Euler-Lagrange equation reproduces the system.

use mforge::catalog;
use mforge::expr::ZeroTestConfig;
use mforge::lagrangian::{lagrangian_from_integral, lagrangian_from_multiplier, verify_euler_lagrange, verify_hessian};
use mforge::multiplier::{verify_integral, verify_multiplier};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ZeroTestConfig::default();
    let s = catalog::system("oscillator1", 1.0, 1.0)?;

    for src in ["1/(1 + k*x^2)", "1/(k*v^2 - a^2)"] {
        let mu = verify_multiplier(&s, &s.expr(src)?, None, &cfg)?;
        let l = lagrangian_from_multiplier(&s, &mu, 0.0, &cfg)?;
        println!("μ = {src}");
        println!("  L       = {}", l.expr().map(|e| e.to_string()).unwrap_or_else(|| "(numeric)".into()));
        println!("  L_vv = μ: {}", verify_hessian(&l, &mu.expr, &cfg)?.is_zero());
        println!("  EL ≡ 0:   {}", verify_euler_lagrange(&s, &l, &cfg)?.is_zero());
        if let Some(phi2) = &l.phi2 {
            println!("  φ2      = {phi2}");
        }
    }

    let i = verify_integral(&s, &s.expr("(k*v^2 - a^2)/(2*k*(1 + k*x^2))")?, None, &cfg)?;
    let l = lagrangian_from_integral(&s, &i, &cfg)?;
    println!("from I = {}", i.expr);
    println!("  L = {}", l.expr().unwrap());
    println!("  EL ≡ 0: {}", verify_euler_lagrange(&s, &l, &cfg)?.is_zero());

    // the reciprocal is conserved too, but I/v² has no closed form and v = 0 is in the domain
    let recip = verify_integral(&s, &i.expr.recip(), None, &cfg)?;
    match lagrangian_from_integral(&s, &recip, &cfg) {
        Ok(_) => println!("from 1/I: built"),
        Err(e) => println!("from 1/I: {e}"),
    }
    Ok(())
}
