/// Default absolute tolerance for one-dimensional quadrature.
pub const QUAD_ABS_TOL: f64 = 1e-10;

const MAX_DEPTH: u32 = 40;

/// Adaptive Simpson quadrature of `f` over `[a, b]` (either orientation).
///
/// Evaluation errors abort the integration and are passed through.
pub fn adaptive_simpson<E>(mut f: impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64, tol: f64) -> Result<f64, E> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(&mut f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn step<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, E> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let half = (0.5 * tol).max(1e-16);
    Ok(step(f, a, m, fa, flm, fm, left, half, depth - 1)? + step(f, m, b, fm, frm, fb, right, half, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(x: f64) -> Result<f64, ()> {
        Ok(x)
    }

    #[test]
    fn polynomials_are_exact() {
        let v = adaptive_simpson(|x| ok(x * x * x - x), 0.0, 2.0, QUAD_ABS_TOL).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integrands_meet_tolerance() {
        let v = adaptive_simpson(|x| ok((x * x).exp()), 0.0, 1.0, QUAD_ABS_TOL).unwrap();
        assert!((v - 1.462_651_745_907_181_6).abs() < 1e-10);
        let w = adaptive_simpson(|x| ok(1.0 / (1.0 - x * x)), 0.3, -0.9, QUAD_ABS_TOL).unwrap();
        let exact = (-0.9f64).atanh() - 0.3f64.atanh();
        assert!((w - exact).abs() < 1e-10);
    }

    #[test]
    fn errors_propagate() {
        let r: Result<f64, &str> = adaptive_simpson(|x| if x > 0.5 { Err("boom") } else { Ok(x) }, 0.0, 1.0, 1e-8);
        assert_eq!(r, Err("boom"));
    }
}
