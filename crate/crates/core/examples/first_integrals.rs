//! A ratio of two multipliers is a first integral; check it symbolically and
//! watch it stay constant along a numerical trajectory.

use mforge::catalog;
use mforge::dynamics::{conservation_drift, integrate, IntegratorConfig};
use mforge::expr::ZeroTestConfig;
use mforge::multiplier::{integral_from_ratio, verify_integral, verify_multiplier};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ZeroTestConfig::default();
    let s = catalog::system("oscillator2", 1.0, 1.0)?;
    let mu1 = verify_multiplier(&s, &s.expr("1 + k*x^2")?, None, &cfg)?;
    let mu2 = verify_multiplier(&s, &s.expr("k*(1 + k*x^2)^2*v^2 - a^2")?, None, &cfg)?;

    let i = integral_from_ratio(&mu1, &mu2, &s, &cfg)?;
    println!("I = μ1/μ2 = {}", i.expr);
    println!("dI/dt along the flow vanishes: {}", i.is_verified());

    let reciprocal = verify_integral(&s, &i.expr.recip(), None, &cfg)?;
    println!("1/I = {} is an integral too: {}", reciprocal.expr, reciprocal.is_verified());

    let traj = integrate(&s.field_with_time(), &s.params, &s.domain, &[0.4, 0.1], &IntegratorConfig::rk4(1e-3, 10.0))?;
    let drift = conservation_drift(&traj, &i.expr, &s.params)?;
    println!("RK4, h = 1e-3, t ∈ [0, 10]: max relative drift of I = {:.2e}", drift.max_rel_drift);
    Ok(())
}
