//! Parsing, differentiation, antiderivatives and the randomized zero test.

use mforge::expr::{antiderivative, parse_with_params, zero_test, Antiderivative, Domain, IntegrationContext, ZeroTestConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e = parse_with_params("x^2*exp(-k*x) + sin(x)/x", &["k"])?;
    println!("e       = {e}");
    println!("de/dx   = {}", e.diff("x"));

    let params = [("k".to_string(), 2.0), ("a".to_string(), 1.0)].into();
    let domain = Domain::new().with("x", 0.1, 3.0)?.with("v", -0.5, 0.5)?;
    let cfg = ZeroTestConfig::default();

    // sin² + cos² - 1 is not simplified symbolically, but it samples to zero
    let identity = parse_with_params("sin(x)^2 + cos(x)^2 - 1", &[])?;
    println!("sin²+cos²-1 zero? {}", zero_test(&identity, &domain, &params, &cfg)?.is_zero());

    let ctx = IntegrationContext::new(params.clone(), domain.clone());
    for src in ["1/(1 + k*x^2)", "x/(1 + k*x^2)^2", "exp(-x^2)"] {
        let f = parse_with_params(src, &["k"])?;
        match antiderivative(&f, "x", &ctx) {
            Antiderivative::Symbolic(a) => {
                let back = zero_test(&(a.diff("x") - &f), &domain, &params, &cfg)?;
                println!("∫ {src} dx = {a}   (differentiates back: {})", back.is_zero());
            }
            Antiderivative::Numeric(_) => println!("∫ {src} dx has no closed form here; using quadrature"),
        }
    }

    let nonzero = parse_with_params("x - sin(x)", &[])?;
    println!("x - sin(x) on [0.1, 3]: {:?}", zero_test(&nonzero, &domain, &params, &cfg)?);
    Ok(())
}
