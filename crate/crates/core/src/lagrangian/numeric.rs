//! Quadrature-backed Lagrangians.
//!
//! Derivatives are taken under the integral sign, so `L_x`, `L_v`, `L_vx` and
//! `L_vv` are as accurate as the quadrature itself rather than limited by a
//! finite-difference step.

use std::sync::Arc;

use crate::expr::{adaptive_simpson, Bindings, Compiled, EvalError, Expr, QUAD_ABS_TOL};

/// `L` and its first and mixed second derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivatives {
    pub l: f64,
    pub l_x: f64,
    pub l_v: f64,
    pub l_vx: f64,
    pub l_vv: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct XvFn(Arc<Compiled>);

impl XvFn {
    pub(crate) fn new(e: &Expr, params: &Bindings) -> Result<XvFn, EvalError> {
        Ok(XvFn(Arc::new(Compiled::new(e, &["x", "v"], params)?)))
    }

    pub(crate) fn at(&self, x: f64, v: f64) -> Result<f64, EvalError> {
        self.0.eval(&[x, v])
    }
}

fn quad(f: impl FnMut(f64) -> Result<f64, EvalError>, a: f64, b: f64) -> Result<f64, EvalError> {
    adaptive_simpson(f, a, b, QUAD_ABS_TOL)
}

#[derive(Clone, Debug)]
pub enum NumericLagrangian {
    /// `L = ∫_{v0}^{v} (v − ζ) μ(x, ζ) dζ + φ₂(x)`, `φ₂(x) = ∫_0^x (μF)(ζ, v0) dζ`.
    Multiplier(MultiplierQuadrature),
    /// `L = v ∫_{vref}^{v} I(x, ζ)/ζ² dζ`.
    Integral(IntegralQuadrature),
}

#[derive(Clone, Debug)]
pub struct MultiplierQuadrature {
    pub(crate) mu: XvFn,
    pub(crate) mu_x: XvFn,
    pub(crate) mu_f: XvFn,
    /// Symbolic `φ₂` when the table produced one.
    pub(crate) phi2: Option<XvFn>,
    pub v0: f64,
}

#[derive(Clone, Debug)]
pub struct IntegralQuadrature {
    pub(crate) i: XvFn,
    pub(crate) i_x: XvFn,
    pub(crate) i_v: XvFn,
    pub vref: f64,
}

impl MultiplierQuadrature {
    pub(crate) fn new(mu: &Expr, f: &Expr, phi2: Option<&Expr>, v0: f64, params: &Bindings) -> Result<Self, EvalError> {
        Ok(MultiplierQuadrature {
            mu: XvFn::new(mu, params)?,
            mu_x: XvFn::new(&mu.diff("x"), params)?,
            mu_f: XvFn::new(&(mu * f), params)?,
            phi2: phi2.map(|p| XvFn::new(p, params)).transpose()?,
            v0,
        })
    }

    fn phi2(&self, x: f64) -> Result<f64, EvalError> {
        match &self.phi2 {
            Some(p) => p.at(x, self.v0),
            None => quad(|z| self.mu_f.at(z, self.v0), 0.0, x),
        }
    }

    fn derivatives(&self, x: f64, v: f64) -> Result<Derivatives, EvalError> {
        let v0 = self.v0;
        let kin = quad(|z| Ok((v - z) * self.mu.at(x, z)?), v0, v)?;
        let kin_x = quad(|z| Ok((v - z) * self.mu_x.at(x, z)?), v0, v)?;
        Ok(Derivatives {
            l: kin + self.phi2(x)?,
            l_x: kin_x + self.mu_f.at(x, v0)?,
            l_v: quad(|z| self.mu.at(x, z), v0, v)?,
            l_vx: quad(|z| self.mu_x.at(x, z), v0, v)?,
            l_vv: self.mu.at(x, v)?,
        })
    }
}

impl IntegralQuadrature {
    pub(crate) fn new(i: &Expr, vref: f64, params: &Bindings) -> Result<Self, EvalError> {
        Ok(IntegralQuadrature {
            i: XvFn::new(i, params)?,
            i_x: XvFn::new(&i.diff("x"), params)?,
            i_v: XvFn::new(&i.diff("v"), params)?,
            vref,
        })
    }

    fn derivatives(&self, x: f64, v: f64) -> Result<Derivatives, EvalError> {
        let j = quad(|z| Ok(self.i.at(x, z)? / (z * z)), self.vref, v)?;
        let j_x = quad(|z| Ok(self.i_x.at(x, z)? / (z * z)), self.vref, v)?;
        let (i, i_x, i_v) = (self.i.at(x, v)?, self.i_x.at(x, v)?, self.i_v.at(x, v)?);
        Ok(Derivatives { l: v * j, l_x: v * j_x, l_v: j + i / v, l_vx: j_x + i_x / v, l_vv: i_v / v })
    }
}

impl NumericLagrangian {
    pub fn derivatives(&self, x: f64, v: f64) -> Result<Derivatives, EvalError> {
        match self {
            NumericLagrangian::Multiplier(m) => m.derivatives(x, v),
            NumericLagrangian::Integral(i) => i.derivatives(x, v),
        }
    }
}
