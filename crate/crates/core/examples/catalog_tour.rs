//! Loads every catalog entry, which re-verifies all of its artifacts, and
//! lists what was derived along with the status of the reference forms.

use mforge::catalog;
use mforge::expr::ZeroTestConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ZeroTestConfig::default();
    for name in ["oscillator1", "oscillator2", "harmonic"] {
        let e = catalog::by_name(name, 1.0, 1.0, &cfg)?;
        println!("{name}: x'' = {}", e.sode.f);
        for m in &e.multipliers {
            println!("  multiplier  {:<4} {}", m.name, m.value.expr);
        }
        for i in &e.integrals {
            println!("  integral    {:<4} {}", i.name, i.value.expr);
        }
        for l in &e.lagrangians {
            println!("  lagrangian  {:<4} {}", l.name, l.value.expr().map(|x| x.to_string()).unwrap_or_default());
        }
        for h in &e.hamiltonians {
            println!("  hamiltonian {:<4} {}", h.name, h.value.form);
        }
        for p in &e.printed {
            println!("  reference   {:<4} {:?}{}", p.artifact, p.status, p.flag.map(|f| format!("  [{f}]")).unwrap_or_default());
        }
        println!("  {} load-time checks, all passed: {}", e.checks.len(), e.certified());
    }
    Ok(())
}
