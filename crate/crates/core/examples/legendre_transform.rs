//! Legendre transform of a quadratic and a non-quadratic Lagrangian, with the
//! numerical round trip v(p(v)) = v and H + L = v·p.

use mforge::catalog;
use mforge::expr::ZeroTestConfig;
use mforge::lagrangian::legendre;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ZeroTestConfig::default();
    for name in ["oscillator1", "oscillator2"] {
        let entry = catalog::by_name(name, 1.0, 1.0, &cfg)?;
        for l in &entry.lagrangians {
            let h = legendre(&l.value, &entry.sode.domain, &cfg)?;
            let rt = h.round_trip(&entry.sode.domain, 32, &cfg)?;
            println!("{name} {}:", l.name);
            println!("  p(v) = {}", h.p_of_v.as_ref().map(|e| e.to_string()).unwrap_or_else(|| "(numeric)".into()));
            println!("  v(p) = {}", h.v_of_p);
            println!("  H    = {}", h.form);
            println!("  round trip: |Δv| ≤ {:.1e}, |H + L - v·p| ≤ {:.1e}", rt.velocity_error, rt.identity_error);
        }
    }
    Ok(())
}
