//! Command-line front end: each command resolves a [`Config`], calls into the
//! library and emits a [`Report`] as JSON on stdout with a short summary on
//! stderr. Exit codes are 0 (all checks pass), 1 (a check failed) and 2
//! (usage or configuration error).

pub mod config;
pub mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{Config, ConfigError, Layer, SystemEcho, SEED_ENV};
pub use report::Report;

use crate::catalog::{self, PrintStatus};
use crate::dynamics::{conservation_drift, integrate, IntegratorConfig};
use crate::expr::{zero_test, Expr, Interval, ZeroTestConfig};
use crate::geometry::{PointSymmetryAnsatz, Sode};
use crate::lagrangian::{
    lagrangian_from_integral, lagrangian_from_multiplier, legendre, verify_euler_lagrange, verify_hessian, Lagrangian,
    LagrangianForm, Source,
};
use crate::multiplier::{integral_from_ratio, verify_integral, verify_multiplier, Multiplier};
use crate::nonlocal::{
    as_ansatz, build_symmetry, characteristic_g, context, determining_residuals, exp_profile, extend, verify_bracket,
    verify_determining, ExtendedSystem, NonlocalError, CHART,
};

/// Samples for the Legendre round trip.
pub const ROUND_TRIP_SAMPLES: usize = 32;
pub const VELOCITY_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-9;
pub const DRIFT_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "mforge", version, about = "Multipliers, Lagrangians and non-local symmetries of x'' = F(x, v)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Check the multiplier condition and non-vanishing of --mu.
    VerifyMultiplier,
    /// Check that --integral is conserved.
    VerifyIntegral,
    /// Build L from --mu (anchored at --vref) or from --integral.
    DeriveLagrangian,
    /// Form I = mu1/mu2 from two multipliers.
    DeriveIntegral,
    /// Legendre transform of --lagrangian, or of the L derived from --mu / --integral.
    Legendre,
    /// Build Y = g X_H on the covering w' = F h(v).
    Nonlocal,
    /// Determining residuals and bracket test for a point ansatz on the covering.
    Determining,
    /// Integrate the system and track a conserved quantity.
    Simulate,
    /// Build and certify a catalog entry.
    Catalog,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyMultiplier => "verify-multiplier",
            Command::VerifyIntegral => "verify-integral",
            Command::DeriveLagrangian => "derive-lagrangian",
            Command::DeriveIntegral => "derive-integral",
            Command::Legendre => "legendre",
            Command::Nonlocal => "nonlocal",
            Command::Determining => "determining",
            Command::Simulate => "simulate",
            Command::Catalog => "catalog",
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// INI file with [system], [params], [domain] and [task] sections.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Catalog name (oscillator1, oscillator2, harmonic) or a label for --f.
    #[arg(long, global = true)]
    pub system: Option<String>,
    /// Right-hand side F(x, v) of a custom system.
    #[arg(long = "f", global = true, value_name = "EXPR")]
    pub f: Option<String>,
    #[arg(long = "param", global = true, value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    #[arg(long = "domain", global = true, value_name = "VAR=[LO,HI]")]
    pub domain: Vec<String>,
    /// PRNG seed for zero tests; overrides MFORGE_SEED.
    #[arg(long, global = true)]
    pub seed: Option<String>,

    #[arg(long, global = true, value_name = "EXPR")]
    pub mu: Option<String>,
    #[arg(long, global = true, value_name = "EXPR")]
    pub mu1: Option<String>,
    #[arg(long, global = true, value_name = "EXPR")]
    pub mu2: Option<String>,
    #[arg(long, global = true, value_name = "EXPR")]
    pub integral: Option<String>,
    #[arg(long, global = true, value_name = "EXPR")]
    pub lagrangian: Option<String>,
    /// Reference velocity anchoring L built from a multiplier.
    #[arg(long, global = true)]
    pub vref: Option<String>,
    /// Hamiltonian to compare against after pulling both back to (x, v).
    #[arg(long = "expect-h", global = true, value_name = "EXPR")]
    pub expect_h: Option<String>,
    /// Covering factor h(v), so that w' = F h(v).
    #[arg(long, global = true, value_name = "EXPR")]
    pub h: Option<String>,
    /// Symmetry factor g(v, w); defaults to G(w - ∫h dv).
    #[arg(long, global = true, value_name = "EXPR")]
    pub g: Option<String>,
    /// Profile G as an expression in u; defaults to exp(u).
    #[arg(long, global = true, value_name = "EXPR")]
    pub profile: Option<String>,
    #[arg(long, global = true, value_name = "EXPR")]
    pub xi: Option<String>,
    #[arg(long, global = true, value_name = "EXPR")]
    pub phi: Option<String>,
    #[arg(long, global = true, value_name = "EXPR")]
    pub psi: Option<String>,
    #[arg(long, global = true, value_name = "EXPR")]
    pub eta: Option<String>,
    /// rk4 or rk45.
    #[arg(long, global = true)]
    pub method: Option<String>,
    #[arg(long, global = true)]
    pub step: Option<String>,
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<String>,
    #[arg(long = "abs-tol", global = true)]
    pub abs_tol: Option<String>,
    #[arg(long = "rel-tol", global = true)]
    pub rel_tol: Option<String>,
    #[arg(long, global = true)]
    pub x0: Option<String>,
    #[arg(long, global = true)]
    pub v0: Option<String>,
    /// Quantity whose drift is tracked along the trajectory.
    #[arg(long, global = true, value_name = "EXPR")]
    pub quantity: Option<String>,
    #[arg(long = "drift-tol", global = true)]
    pub drift_tol: Option<String>,
    /// Write the trajectory as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<String>,
}

impl Flags {
    pub fn layer(&self) -> Result<Layer, ConfigError> {
        let mut layer = Layer { name: self.system.clone(), f: self.f.clone(), seed: self.seed.clone(), ..Layer::default() };
        for p in &self.params {
            let (k, v) = config::assignment(p)?;
            layer.params.insert(k, v);
        }
        for d in &self.domain {
            let (k, v) = config::assignment(d)?;
            layer.domain.insert(k, v);
        }
        let task = [
            ("mu", &self.mu),
            ("mu1", &self.mu1),
            ("mu2", &self.mu2),
            ("integral", &self.integral),
            ("lagrangian", &self.lagrangian),
            ("vref", &self.vref),
            ("expect_h", &self.expect_h),
            ("h", &self.h),
            ("g", &self.g),
            ("profile", &self.profile),
            ("xi", &self.xi),
            ("phi", &self.phi),
            ("psi", &self.psi),
            ("eta", &self.eta),
            ("method", &self.method),
            ("step", &self.step),
            ("t_end", &self.t_end),
            ("abs_tol", &self.abs_tol),
            ("rel_tol", &self.rel_tol),
            ("x0", &self.x0),
            ("v0", &self.v0),
            ("quantity", &self.quantity),
            ("drift_tol", &self.drift_tol),
            ("csv", &self.csv),
        ];
        for (k, v) in task {
            if let Some(v) = v {
                layer.task.insert(k.to_string(), v.clone());
            }
        }
        Ok(layer)
    }

    /// The file layer (if any) overridden by these flags.
    pub fn resolve(&self, env_seed: Option<String>) -> Result<Config, ConfigError> {
        let file = match &self.config {
            Some(path) => Layer::from_file(path)?,
            None => Layer::default(),
        };
        Config::resolve(file.merge(self.layer()?), env_seed)
    }
}

/// Entry point for the binary: real arguments, environment and stdio.
pub fn main() -> i32 {
    let env_seed = std::env::var(SEED_ENV).ok();
    run(std::env::args_os(), env_seed, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run<I, T>(args: I, env_seed: Option<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return 0;
        }
        Err(e) => {
            let _ = write!(err, "{e}");
            return 2;
        }
    };
    let outcome = cli.flags.resolve(env_seed).and_then(|cfg| execute(cli.command, &cfg));
    match outcome {
        Ok(report) => {
            let _ = writeln!(out, "{}", report.to_json());
            let _ = write!(err, "{}", report.summary());
            report.exit_code()
        }
        Err(e) => {
            let body = serde_json::json!({ "command": cli.command.name(), "error": e.to_string() });
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&body).expect("json"));
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

/// Runs `command` against a resolved configuration.
pub fn execute(command: Command, cfg: &Config) -> Result<Report, ConfigError> {
    let z = ZeroTestConfig::default().with_seed(cfg.seed);
    let mut r = Report::new(command.name(), cfg.echo(), cfg.task.clone(), cfg.seed);
    match command {
        Command::VerifyMultiplier => verify_multiplier_cmd(cfg, &z, &mut r)?,
        Command::VerifyIntegral => verify_integral_cmd(cfg, &z, &mut r)?,
        Command::DeriveLagrangian => {
            derive_lagrangian(cfg, &z, &mut r)?;
        }
        Command::DeriveIntegral => derive_integral(cfg, &z, &mut r)?,
        Command::Legendre => legendre_cmd(cfg, &z, &mut r)?,
        Command::Nonlocal => nonlocal_cmd(cfg, &z, &mut r)?,
        Command::Determining => determining_cmd(cfg, &z, &mut r)?,
        Command::Simulate => simulate(cfg, &mut r)?,
        Command::Catalog => catalog_cmd(cfg, &z, &mut r)?,
    }
    Ok(r)
}

fn expr(cfg: &Config, key: &str) -> Result<Expr, ConfigError> {
    parse(&cfg.system, key, cfg.require(key)?)
}

fn parse(s: &Sode, key: &str, text: &str) -> Result<Expr, ConfigError> {
    s.expr(text).map_err(|e| ConfigError::Invalid { key: key.to_string(), message: e.to_string() })
}

fn multiplier(cfg: &Config, key: &str, z: &ZeroTestConfig, r: &mut Report) -> Result<Option<Multiplier>, ConfigError> {
    let mu = expr(cfg, key)?;
    match verify_multiplier(&cfg.system, &mu, None, z) {
        Ok(m) => {
            r.verdict(&format!("{key}: multiplier condition"), &m.residual_verdict);
            r.certificate(&format!("{key}: non-vanishing"), &m.certificate);
            r.expression(key, &m.expr);
            Ok(Some(m))
        }
        Err(e) => {
            r.error(&format!("{key}: multiplier"), &e);
            Ok(None)
        }
    }
}

fn verify_multiplier_cmd(cfg: &Config, z: &ZeroTestConfig, r: &mut Report) -> Result<(), ConfigError> {
    if let Some(m) = multiplier(cfg, "mu", z, r)? {
        r.expression("residual", &m.residual);
    }
    Ok(())
}

fn verify_integral_cmd(cfg: &Config, z: &ZeroTestConfig, r: &mut Report) -> Result<(), ConfigError> {
    let i = expr(cfg, "integral")?;
    match verify_integral(&cfg.system, &i, None, z) {
        Ok(fi) => {
            r.verdict("conservation", &fi.verdict);
            r.expression("integral", &fi.expr);
            r.expression("residual", &fi.residual);
        }
        Err(e) => r.error("integral", &e),
    }
    Ok(())
}

fn default_vref(cfg: &Config) -> f64 {
    match cfg.system.domain.get("v") {
        Some(iv) if iv.contains(0.0) => 0.0,
        Some(iv) => iv.mid(),
        None => 0.0,
    }
}

fn derive_lagrangian(cfg: &Config, z: &ZeroTestConfig, r: &mut Report) -> Result<Option<Lagrangian>, ConfigError> {
    let s = &cfg.system;
    let (l, mu) = if cfg.get("mu").is_some() {
        let Some(m) = multiplier(cfg, "mu", z, r)? else { return Ok(None) };
        if !m.is_verified() {
            return Ok(None);
        }
        let vref = cfg.number("vref", default_vref(cfg))?;
        r.diagnostic("vref", vref);
        (lagrangian_from_multiplier(s, &m, vref, z), Some(m.expr))
    } else if cfg.get("integral").is_some() {
        let fi = match verify_integral(s, &expr(cfg, "integral")?, None, z) {
            Ok(fi) => fi,
            Err(e) => {
                r.error("integral", &e);
                return Ok(None);
            }
        };
        r.verdict("integral: conservation", &fi.verdict);
        r.expression("integral", &fi.expr);
        if !fi.is_verified() {
            return Ok(None);
        }
        (lagrangian_from_integral(s, &fi, z), None)
    } else {
        return Err(ConfigError::Missing("mu or integral".into()));
    };
    let l = match l {
        Ok(l) => l,
        Err(e) => {
            r.error("lagrangian", &e);
            return Ok(None);
        }
    };
    report_lagrangian(s, &l, z, r);
    if let Some(mu) = mu {
        match verify_hessian(&l, &mu, z) {
            Ok(v) => r.verdict("hessian equals multiplier", &v),
            Err(e) => r.error("hessian equals multiplier", &e),
        }
    }
    Ok(Some(l))
}

fn report_lagrangian(s: &Sode, l: &Lagrangian, z: &ZeroTestConfig, r: &mut Report) {
    r.expression("L", &l.form);
    if let Some(phi2) = &l.phi2 {
        r.expression("phi2", phi2);
    }
    if !l.gauge_note.is_empty() {
        r.note(l.gauge_note.clone());
    }
    if matches!(l.form, LagrangianForm::Numeric(_)) {
        r.flag("numeric-lagrangian");
    }
    match verify_euler_lagrange(s, l, z) {
        Ok(v) => r.verdict("euler-lagrange", &v),
        Err(e) => r.error("euler-lagrange", &e),
    }
    r.certificate("regular (L_vv non-vanishing)", &l.regular);
}

fn derive_integral(cfg: &Config, z: &ZeroTestConfig, r: &mut Report) -> Result<(), ConfigError> {
    let m1 = multiplier(cfg, "mu1", z, r)?;
    let m2 = multiplier(cfg, "mu2", z, r)?;
    let (Some(m1), Some(m2)) = (m1, m2) else { return Ok(()) };
    if !(m1.is_verified() && m2.is_verified()) {
        return Ok(());
    }
    match integral_from_ratio(&m1, &m2, &cfg.system, z) {
        Ok(fi) => {
            r.verdict("integral: conservation", &fi.verdict);
            r.expression("integral", &fi.expr);
        }
        Err(e) => r.error("integral", &e),
    }
    Ok(())
}

fn legendre_cmd(cfg: &Config, z: &ZeroTestConfig, r: &mut Report) -> Result<(), ConfigError> {
    let s = &cfg.system;
    let l = match cfg.get("lagrangian") {
        Some(text) => {
            let e = parse(s, "lagrangian", text)?;
            match Lagrangian::symbolic(&e, Source::Supplied, &s.domain, &s.params, z.seed) {
                Ok(l) => {
                    report_lagrangian(s, &l, z, r);
                    l
                }
                Err(e) => {
                    r.error("lagrangian", &e);
                    return Ok(());
                }
            }
        }
        None => match derive_lagrangian(cfg, z, r)? {
            Some(l) => l,
            None => return Ok(()),
        },
    };
    let h = match legendre(&l, &l.domain, z) {
        Ok(h) => h,
        Err(e) => {
            r.error("legendre", &e);
            return Ok(());
        }
    };
    r.expression("H", &h.form);
    r.expression("v(x, p)", &h.v_of_p);
    if let Some(p) = &h.p_of_v {
        r.expression("p(x, v)", p);
    }
    if let Some(b) = &h.branch {
        r.note(format!("inverse valid on the branch {b}"));
    }
    match h.round_trip(&l.domain, ROUND_TRIP_SAMPLES, z) {
        Ok(rt) => {
            r.diagnostic("round_trip_velocity_error", rt.velocity_error);
            r.diagnostic("round_trip_identity_error", rt.identity_error);
            r.check("round trip v(x, p(x, v)) = v", rt.velocity_error <= VELOCITY_TOL, rt.velocity_error.into());
            r.check("H(x, p(x, v)) = v p - L", rt.identity_error <= IDENTITY_TOL, rt.identity_error.into());
        }
        Err(e) => r.error("round trip", &e),
    }
    if let Some(text) = cfg.get("expect_h") {
        let expected = parse(s, "expect_h", text)?;
        match (h.expr().and_then(|e| h.pullback(e)), h.pullback(&expected)) {
            (Some(a), Some(b)) => match zero_test(&(a - b), &l.domain, &s.params, z) {
                Ok(v) => r.verdict("matches expected H", &v),
                Err(e) => r.error("matches expected H", &e),
            },
            _ => r.note("expected H not compared: the derived Hamiltonian has no closed form"),
        }
    }
    Ok(())
}

/// Builds the covering. When `h` is singular on a v-interval straddling 0,
/// retries on the positive part `[hi/10, hi]` and says so in the report.
fn extended(cfg: &Config, r: &mut Report) -> Result<Option<ExtendedSystem>, ConfigError> {
    let h = expr(cfg, "h")?;
    let mut result = extend(&cfg.system, &h);
    if let (Err(NonlocalError::Vanishes { .. }), Some(iv)) = (&result, cfg.system.domain.get("v")) {
        if iv.lo < 0.0 && iv.hi > 0.0 {
            let mut s = cfg.system.clone();
            let positive = Interval::new(iv.hi / 10.0, iv.hi).expect("positive interval");
            s.domain.set("v", positive);
            result = extend(&s, &h);
            if result.is_ok() {
                r.note(format!("h is singular at v = 0; v restricted to [{}, {}]", positive.lo, positive.hi));
            }
        }
    }
    match result {
        Ok(es) => {
            r.expression("H", &es.haux);
            Ok(Some(es))
        }
        Err(e) => {
            r.error("covering", &e);
            Ok(None)
        }
    }
}

fn symmetry_factor(cfg: &Config, es: &ExtendedSystem, z: &ZeroTestConfig, r: &mut Report) -> Result<Option<Expr>, ConfigError> {
    if cfg.get("g").is_some() {
        return expr(cfg, "g").map(Some);
    }
    let profile = match cfg.get("profile") {
        Some(text) => parse(&cfg.system, "profile", text)?,
        None => exp_profile(),
    };
    match characteristic_g(&es.h, &profile, &context(es, z)) {
        Ok(g) => Ok(Some(g)),
        Err(e) => {
            r.error("characteristic g", &e);
            Ok(None)
        }
    }
}

fn nonlocal_cmd(cfg: &Config, z: &ZeroTestConfig, r: &mut Report) -> Result<(), ConfigError> {
    let Some(es) = extended(cfg, r)? else { return Ok(()) };
    let Some(g) = symmetry_factor(cfg, &es, z, r)? else { return Ok(()) };
    match build_symmetry(&es, &g, z) {
        Ok(c) => {
            r.expression("g", &c.g);
            r.expression("Y", &c.y);
            r.expression("lambda", &c.lambda);
            for (coord, v) in CHART.iter().zip(&c.bracket_verdicts) {
                r.verdict(&format!("[Y, X̄_H] d{coord}"), v);
            }
        }
        Err(e) => r.error("symmetry", &e),
    }
    Ok(())
}

fn determining_cmd(cfg: &Config, z: &ZeroTestConfig, r: &mut Report) -> Result<(), ConfigError> {
    let Some(es) = extended(cfg, r)? else { return Ok(()) };
    let ansatz = if cfg.get("g").is_some() {
        let g = expr(cfg, "g")?;
        match build_symmetry(&es, &g, z) {
            Ok(c) => as_ansatz(&c),
            Err(e) => {
                r.error("symmetry", &e);
                return Ok(());
            }
        }
    } else {
        let comp = |key: &str| match cfg.get(key) {
            Some(text) => parse(&cfg.system, key, text),
            None => Ok(Expr::zero()),
        };
        PointSymmetryAnsatz::new(comp("xi")?, vec![("x".into(), comp("phi")?), ("v".into(), comp("psi")?), ("w".into(), comp("eta")?)])
    };
    r.expression("xi", &ansatz.xi);
    for (dep, e) in &ansatz.eta {
        r.expression(&format!("eta_{dep}"), e);
    }
    let names = ["x' = v", "v' = F", "w' = H"];
    match determining_residuals(&es, &ansatz) {
        Ok(res) => {
            for (n, e) in names.iter().zip(&res) {
                r.expression(&format!("residual {n}"), e);
            }
        }
        Err(e) => {
            r.error("determining", &e);
            return Ok(());
        }
    }
    match verify_determining(&es, &ansatz, z) {
        Ok(vs) => {
            for (n, v) in names.iter().zip(&vs) {
                r.verdict(&format!("determining {n}"), v);
            }
        }
        Err(e) => r.error("determining", &e),
    }
    match verify_bracket(&es, &ansatz, z) {
        Ok(vs) => {
            for (coord, v) in CHART.iter().zip(&vs) {
                r.verdict(&format!("bracket d{coord}"), v);
            }
        }
        Err(e) => r.error("bracket", &e),
    }
    Ok(())
}

fn simulate(cfg: &Config, r: &mut Report) -> Result<(), ConfigError> {
    let s = &cfg.system;
    let t_end = cfg.number("t_end", 10.0)?;
    let icfg = match cfg.get("method").unwrap_or("rk4") {
        "rk4" => IntegratorConfig::rk4(cfg.number("step", 1e-3)?, t_end),
        "rk45" => IntegratorConfig::rk45(cfg.number("abs_tol", 1e-10)?, cfg.number("rel_tol", 1e-10)?, t_end),
        other => return Err(ConfigError::Invalid { key: "method".into(), message: format!("`{other}`; expected rk4 or rk45") }),
    };
    let y0 = [cfg.number("x0", 0.5)?, cfg.number("v0", 0.0)?];
    let traj = match integrate(&s.field_with_time(), &s.params, &s.domain, &y0, &icfg) {
        Ok(t) => t,
        Err(e) => {
            r.error("integration", &e);
            return Ok(());
        }
    };
    let (t, last) = traj.last();
    r.diagnostic("t_final", t);
    r.diagnostic("x_final", last[0]);
    r.diagnostic("v_final", last[1]);
    r.diagnostic("points", traj.times.len() as f64);
    if let Some(h) = traj.step {
        r.diagnostic("step", h);
    }
    let cut = traj.truncated.as_ref().map(|c| format!("stopped at t = {}: {}", c.t, c.reason));
    r.check("reached t_end inside the domain", traj.truncated.is_none(), cut.into());
    let quantity = match cfg.get("quantity").or(cfg.get("integral")) {
        Some(text) => Some(parse(s, "quantity", text)?),
        None => None,
    };
    let mut series = None;
    if let Some(q) = &quantity {
        r.expression("quantity", q);
        match conservation_drift(&traj, q, &s.params) {
            Ok(d) => {
                let tol = cfg.number("drift_tol", DRIFT_TOL)?;
                r.diagnostic("max_rel_drift", d.max_rel_drift);
                r.check(&format!("relative drift below {tol:e}"), d.max_rel_drift < tol, d.max_rel_drift.into());
                series = Some(d.series);
            }
            Err(e) => r.error("drift", &e),
        }
    }
    if let Some(path) = cfg.get("csv") {
        let io = |source| ConfigError::Io { path: path.to_string(), source };
        let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        traj.write_csv(&mut file, series.as_deref()).map_err(io)?;
        file.flush().map_err(io)?;
        r.note(format!("trajectory written to {path}"));
    }
    Ok(())
}

fn catalog_cmd(cfg: &Config, z: &ZeroTestConfig, r: &mut Report) -> Result<(), ConfigError> {
    let Some(name) = &cfg.catalog else {
        return Err(ConfigError::Invalid { key: "system".into(), message: format!("catalog needs one of {:?}", catalog::NAMES) });
    };
    let p = &cfg.system.params;
    let k = p.get("k").copied().unwrap_or(1.0);
    let a = p.get("a").copied().unwrap_or(1.0);
    let entry = match catalog::by_name(name, k, a, z) {
        Ok(e) => e,
        Err(e) => {
            r.error("catalog", &e);
            return Ok(());
        }
    };
    for c in &entry.checks {
        r.check(&c.name, c.passed, c.detail.clone().into());
    }
    for m in &entry.multipliers {
        r.expression(&m.name, &m.value.expr);
    }
    for i in &entry.integrals {
        r.expression(&i.name, &i.value.expr);
    }
    for l in &entry.lagrangians {
        r.expression(&l.name, &l.value.form);
        if let Some(phi2) = &l.value.phi2 {
            r.expression(&format!("{}.phi2", l.name), phi2);
        }
    }
    for h in &entry.hamiltonians {
        r.expression(&h.name, &h.value.form);
    }
    for pc in &entry.printed {
        if let Some(flag) = pc.flag {
            let status = match &pc.status {
                PrintStatus::Matches => "printed form matches".to_string(),
                PrintStatus::Differs { .. } => "printed form differs".to_string(),
                PrintStatus::Unparseable { error } => format!("printed form unparseable: {error}"),
            };
            r.flag(format!("{flag}: {}: {status}", pc.artifact));
        }
    }
    for n in &entry.notes {
        r.note(n.clone());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["mforge"];
        full.extend_from_slice(args);
        let code = run(full, None, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn verify_multiplier_passes_and_reports_json() {
        let (code, out, err) = call(&["verify-multiplier", "--system", "oscillator1", "--mu", "1/(1+k*x^2)"]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["command"], "verify-multiplier");
        assert_eq!(v["passed"], true);
        assert!(err.contains("PASS"));
    }

    #[test]
    fn wrong_multiplier_exits_one_with_witness() {
        let (code, out, _) = call(&["verify-multiplier", "--system", "oscillator1", "--mu", "1+x^2"]);
        assert_eq!(code, 1);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(!v["witnesses"].as_array().unwrap().is_empty());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["verify-multiplier", "--system", "oscillator1"]).0, 2);
        assert_eq!(call(&["verify-multiplier", "--system", "nope", "--mu", "1"]).0, 2);
        assert_eq!(call(&["verify-multiplier", "--system", "oscillator1", "--mu", "1/("]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn nonlocal_restricts_to_positive_velocities() {
        let (code, out, err) = call(&["nonlocal", "--system", "oscillator1", "--h", "1/v"]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["expressions"]["g"], "exp(w)/v");
        assert!(v["notes"][0].as_str().unwrap().contains("restricted"));
    }

    #[test]
    fn report_is_deterministic_for_a_seed() {
        let args = ["nonlocal", "--system", "oscillator1", "--h", "1/v", "--domain", "v=[0.1,0.9]", "--seed", "11"];
        let (a, b) = (call(&args), call(&args));
        assert_eq!(a.0, 0, "{}", a.2);
        assert_eq!(a.1, b.1);
    }
}
