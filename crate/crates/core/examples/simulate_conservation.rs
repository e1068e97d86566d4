//! Integrates the second oscillator with RK4 and Dormand-Prince, reports the
//! drift of its constant of motion and writes a CSV trajectory to stdout.

use std::io::{self, Write};

use mforge::catalog;
use mforge::dynamics::{conservation_drift, integrate, IntegratorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = catalog::system("oscillator2", 1.0, 1.0)?;
    let energy = s.expr("p^2/(2*(1 + k*x^2)) + a^2*x^2/(2*(1 + k*x^2))")?.subs("p", &s.expr("(1 + k*x^2)*v")?);
    let y0 = [0.6, 0.0];

    for (label, cfg) in [
        ("rk4   h = 1e-2", IntegratorConfig::rk4(1e-2, 20.0)),
        ("rk4   h = 1e-3", IntegratorConfig::rk4(1e-3, 20.0)),
        ("rk45  tol 1e-10", IntegratorConfig::rk45(1e-10, 1e-10, 20.0)),
    ] {
        let traj = integrate(&s.field_with_time(), &s.params, &s.domain, &y0, &cfg)?;
        let d = conservation_drift(&traj, &energy, &s.params)?;
        println!("{label}: {:>6} points, max relative drift {:.2e}", traj.times.len(), d.max_rel_drift);
    }

    let traj = integrate(&s.field_with_time(), &s.params, &s.domain, &y0, &IntegratorConfig::rk4(0.5, 3.0))?;
    let d = conservation_drift(&traj, &energy, &s.params)?;
    let mut out = io::stdout().lock();
    writeln!(out)?;
    traj.write_csv(&mut out, Some(&d.series))?;
    Ok(())
}
