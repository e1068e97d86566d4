//! Fixed-step RK4 and adaptive Dormand–Prince integration of autonomous
//! fields `∂t + X`, with conservation diagnostics and CSV export.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::expr::{Bindings, Compiled, Domain, EvalError, Expr};
use crate::geometry::VectorField;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("initial state {0:?} lies outside the domain")]
    OutsideDomain(Vec<f64>),
    #[error("field must be on (t, ...) with unit t-component")]
    NotTimeField,
    #[error("expected {expected} initial values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("invalid integrator configuration: {0}")]
    Config(String),
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    Rk4 { step: f64 },
    Rk45 { abs_tol: f64, rel_tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    #[serde(flatten)]
    pub method: Method,
    pub t_end: f64,
}

impl IntegratorConfig {
    pub fn rk4(step: f64, t_end: f64) -> Self {
        IntegratorConfig { method: Method::Rk4 { step }, t_end }
    }

    pub fn rk45(abs_tol: f64, rel_tol: f64, t_end: f64) -> Self {
        IntegratorConfig { method: Method::Rk45 { abs_tol, rel_tol }, t_end }
    }

    fn validate(&self) -> Result<(), DynamicsError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let ok = positive(self.t_end)
            && match self.method {
                Method::Rk4 { step } => positive(step),
                Method::Rk45 { abs_tol, rel_tol } => positive(abs_tol) && positive(rel_tol),
            };
        if ok {
            Ok(())
        } else {
            Err(DynamicsError::Config(format!("{self:?}")))
        }
    }
}

/// Why integration stopped before `t_end`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Truncation {
    pub t: f64,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub vars: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub method: &'static str,
    /// Effective step of a fixed-step run.
    pub step: Option<f64>,
    pub truncated: Option<Truncation>,
}

impl Trajectory {
    pub fn last(&self) -> (f64, &[f64]) {
        (*self.times.last().expect("non-empty"), self.states.last().expect("non-empty"))
    }

    /// The trajectory restricted to the first `n` state variables.
    pub fn project(&self, n: usize) -> Trajectory {
        Trajectory {
            vars: self.vars[..n].to_vec(),
            states: self.states.iter().map(|s| s[..n].to_vec()).collect(),
            ..self.clone()
        }
    }

    /// CSV with header `t,<vars>[,Q]` and 17 significant digits per value.
    pub fn write_csv(&self, out: &mut impl Write, q: Option<&[f64]>) -> io::Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend(self.vars.iter().cloned());
        if q.is_some() {
            header.push("Q".into());
        }
        writeln!(out, "{}", header.join(","))?;
        for (i, (t, s)) in self.times.iter().zip(&self.states).enumerate() {
            write!(out, "{t:.16e}")?;
            for x in s {
                write!(out, ",{x:.16e}")?;
            }
            if let Some(q) = q {
                write!(out, ",{:.16e}", q[i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

struct Rhs {
    comps: Vec<Compiled>,
    buf: Vec<f64>,
}

impl Rhs {
    fn eval(&mut self, t: f64, y: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        self.buf[0] = t;
        self.buf[1..].copy_from_slice(y);
        for (o, c) in out.iter_mut().zip(&self.comps) {
            *o = c.eval(&self.buf)?;
        }
        Ok(())
    }
}

fn inside(domain: &Domain, vars: &[String], y: &[f64]) -> bool {
    vars.iter().zip(y).all(|(v, x)| x.is_finite() && domain.get(v).is_none_or(|iv| iv.contains(*x)))
}

/// Integrates `field = ∂t + Σ X^i ∂_i` from `y0` at `t = 0`. Leaving the
/// domain or hitting a singular evaluation truncates the trajectory.
pub fn integrate(
    field: &VectorField,
    params: &Bindings,
    domain: &Domain,
    y0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    cfg.validate()?;
    let coords = field.coords();
    if coords.first().map(String::as_str) != Some("t") || !field.components()[0].is_one() {
        return Err(DynamicsError::NotTimeField);
    }
    let vars: Vec<String> = coords[1..].to_vec();
    if vars.len() != y0.len() {
        return Err(DynamicsError::Arity { expected: vars.len(), got: y0.len() });
    }
    if !inside(domain, &vars, y0) {
        return Err(DynamicsError::OutsideDomain(y0.to_vec()));
    }
    let slots: Vec<&str> = coords.iter().map(String::as_str).collect();
    let comps = field.components()[1..].iter().map(|c| Compiled::new(c, &slots, params)).collect::<Result<_, _>>()?;
    let mut rhs = Rhs { comps, buf: vec![0.0; coords.len()] };
    let mut k = vec![0.0; y0.len()];
    rhs.eval(0.0, y0, &mut k)?;
    let mut traj = Trajectory {
        vars,
        times: vec![0.0],
        states: vec![y0.to_vec()],
        method: "rk4",
        step: None,
        truncated: None,
    };
    match cfg.method {
        Method::Rk4 { step } => rk4(&mut rhs, domain, step, cfg.t_end, &mut traj),
        Method::Rk45 { abs_tol, rel_tol } => {
            traj.method = "rk45";
            dopri(&mut rhs, domain, abs_tol, rel_tol, cfg.t_end, &mut traj)?
        }
    }
    Ok(traj)
}

fn accept(traj: &mut Trajectory, domain: &Domain, t: f64, y: Vec<f64>) -> bool {
    if inside(domain, &traj.vars, &y) {
        traj.times.push(t);
        traj.states.push(y);
        true
    } else {
        traj.truncated = Some(Truncation { t, reason: "left the domain".into() });
        false
    }
}

fn rk4(rhs: &mut Rhs, domain: &Domain, step: f64, t_end: f64, traj: &mut Trajectory) {
    let n = (t_end / step).ceil().max(1.0) as usize;
    let h = t_end / n as f64;
    traj.step = Some(h);
    let dim = traj.vars.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    let mut y = traj.states[0].clone();
    for i in 0..n {
        let t = i as f64 * h;
        let result = (|| -> Result<(), EvalError> {
            rhs.eval(t, &y, &mut k1)?;
            for j in 0..dim {
                tmp[j] = y[j] + 0.5 * h * k1[j];
            }
            rhs.eval(t + 0.5 * h, &tmp, &mut k2)?;
            for j in 0..dim {
                tmp[j] = y[j] + 0.5 * h * k2[j];
            }
            rhs.eval(t + 0.5 * h, &tmp, &mut k3)?;
            for j in 0..dim {
                tmp[j] = y[j] + h * k3[j];
            }
            rhs.eval(t + h, &tmp, &mut k4)
        })();
        if let Err(err) = result {
            traj.truncated = Some(Truncation { t, reason: err.to_string() });
            return;
        }
        for j in 0..dim {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if !accept(traj, domain, (i + 1) as f64 * h, y.clone()) {
            return;
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn dopri(
    rhs: &mut Rhs,
    domain: &Domain,
    abs_tol: f64,
    rel_tol: f64,
    t_end: f64,
    traj: &mut Trajectory,
) -> Result<(), DynamicsError> {
    let dim = traj.vars.len();
    let mut y = traj.states[0].clone();
    let mut t = 0.0;
    let mut h = (t_end * 1e-3).min(1e-2);
    let mut k = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];
    while t < t_end {
        h = h.min(t_end - t);
        if h < 1e-14 * t_end.max(1.0) {
            return Err(DynamicsError::StepUnderflow { t });
        }
        let mut stages = || -> Result<(), EvalError> {
            for s in 0..7 {
                for j in 0..dim {
                    tmp[j] = y[j] + h * (0..s).map(|r| A[s][r] * k[r][j]).sum::<f64>();
                }
                rhs.eval(t + C[s] * h, &tmp, &mut k[s])?;
            }
            Ok(())
        };
        if let Err(err) = stages() {
            if h > 1e-10 {
                h *= 0.25;
                continue;
            }
            traj.truncated = Some(Truncation { t, reason: err.to_string() });
            return Ok(());
        }
        let mut err: f64 = 0.0;
        for j in 0..dim {
            y5[j] = y[j] + h * (0..7).map(|s| B5[s] * k[s][j]).sum::<f64>();
            let y4 = y[j] + h * (0..7).map(|s| B4[s] * k[s][j]).sum::<f64>();
            let scale = abs_tol + rel_tol * y[j].abs().max(y5[j].abs());
            err = err.max(((y5[j] - y4) / scale).abs());
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&y5);
            if !accept(traj, domain, t, y.clone()) {
                return Ok(());
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(())
}

/// Drift of a conserved quantity along a trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct Drift {
    /// `max_t |Q(t) − Q(0)| / max(1, |Q(0)|)`.
    pub max_rel_drift: f64,
    pub series: Vec<f64>,
}

/// Drift of `q(t, state)` along `traj`.
pub fn drift_with(traj: &Trajectory, mut q: impl FnMut(f64, &[f64]) -> Result<f64, EvalError>) -> Result<Drift, EvalError> {
    let series = traj.times.iter().zip(&traj.states).map(|(t, s)| q(*t, s)).collect::<Result<Vec<f64>, _>>()?;
    let q0 = series[0];
    let max_rel_drift = series.iter().map(|q| (q - q0).abs()).fold(0.0, f64::max) / q0.abs().max(1.0);
    Ok(Drift { max_rel_drift, series })
}

/// Drift of an expression in `t` and the trajectory's variables.
pub fn conservation_drift(traj: &Trajectory, q: &Expr, params: &Bindings) -> Result<Drift, EvalError> {
    let mut slots = vec!["t"];
    slots.extend(traj.vars.iter().map(String::as_str));
    let c = Compiled::new(q, &slots, params)?;
    let mut buf = vec![0.0; slots.len()];
    drift_with(traj, |t, s| {
        buf[0] = t;
        buf[1..].copy_from_slice(s);
        c.eval(&buf)
    })
}
