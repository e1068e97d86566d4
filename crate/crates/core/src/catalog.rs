//! Built-in systems with their multipliers, integrals, Lagrangians and
//! Hamiltonians, each re-verified when the entry is built.
//!
//! * `oscillator1`: `x'' = (k v² − a²) x / (1 + k x²)`
//! * `oscillator2`: `x'' = −k x v²/(1 + k x²) − a² x/(1 + k x²)³`, `k ≠ 0`
//! * `harmonic`: `x'' = −a² x`
//!
//! Reference forms that are known to be misprinted are carried as
//! [`PrintCheck`]s flagged `unverified-print`; the certified artifact is
//! always the one constructed here.

use serde::Serialize;

use crate::expr::{
    parse_with_params, zero_test, zero_test_with, Bindings, Compiled, Domain, DomainError, EvalError, Expr, Verdict,
    ZeroTestConfig, ZeroTestError,
};
use crate::geometry::{GeometryError, Sode};
use crate::lagrangian::{
    equivalent_up_to_gauge, lagrangian_from_integral, lagrangian_from_multiplier, legendre, verify_euler_lagrange,
    verify_hessian, Hamiltonian, Lagrangian, LagrangianError, LegendreError, Source,
};
use crate::multiplier::{verify_integral, verify_multiplier, FirstIntegral, Multiplier, MultiplierError};

pub const NAMES: [&str; 3] = ["oscillator1", "oscillator2", "harmonic"];
pub const UNVERIFIED_PRINT: &str = "unverified-print";

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("oscillator2 needs k != 0; for k = 0 use the `harmonic` entry")]
    ZeroK,
    #[error("unknown catalog entry `{0}`; expected one of oscillator1, oscillator2, harmonic")]
    Unknown(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Multiplier(#[from] MultiplierError),
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
    #[error(transparent)]
    Legendre(#[from] LegendreError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

/// Whether an artifact is a transcribed reference form or built here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Reference,
    Derived,
}

#[derive(Clone, Debug, Serialize)]
pub struct Artifact<T> {
    pub name: String,
    pub origin: Origin,
    #[serde(flatten)]
    pub value: T,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum PrintStatus {
    /// Agrees with the certified artifact under the zero test.
    Matches,
    Differs { verdict: Verdict },
    Unparseable { error: String },
}

/// A transcribed reference form compared against the certified artifact.
#[derive(Clone, Debug, Serialize)]
pub struct PrintCheck {
    pub artifact: String,
    pub text: String,
    #[serde(flatten)]
    pub status: PrintStatus,
    pub flag: Option<&'static str>,
}

/// One load-time verification.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub sode: Sode,
    pub multipliers: Vec<Artifact<Multiplier>>,
    pub integrals: Vec<Artifact<FirstIntegral>>,
    pub lagrangians: Vec<Artifact<Lagrangian>>,
    pub hamiltonians: Vec<Artifact<Hamiltonian>>,
    pub printed: Vec<PrintCheck>,
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
}

fn find<'a, T>(items: &'a [Artifact<T>], name: &str) -> Option<&'a T> {
    items.iter().find(|a| a.name == name).map(|a| &a.value)
}

impl CatalogEntry {
    /// Every load-time check passed.
    pub fn certified(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn multiplier(&self, name: &str) -> Option<&Multiplier> {
        find(&self.multipliers, name)
    }

    pub fn integral(&self, name: &str) -> Option<&FirstIntegral> {
        find(&self.integrals, name)
    }

    pub fn lagrangian(&self, name: &str) -> Option<&Lagrangian> {
        find(&self.lagrangians, name)
    }

    pub fn hamiltonian(&self, name: &str) -> Option<&Hamiltonian> {
        find(&self.hamiltonians, name)
    }

    pub fn print_check(&self, artifact: &str) -> Option<&PrintCheck> {
        self.printed.iter().find(|p| p.artifact == artifact)
    }

    /// Every expression the entry carries, for blanket property checks.
    pub fn expressions(&self) -> Vec<Expr> {
        let mut out = vec![self.sode.f.clone()];
        out.extend(self.multipliers.iter().map(|m| m.value.expr.clone()));
        out.extend(self.integrals.iter().map(|i| i.value.expr.clone()));
        out.extend(self.lagrangians.iter().filter_map(|l| l.value.expr().cloned()));
        out.extend(self.hamiltonians.iter().filter_map(|h| h.value.expr().cloned()));
        out
    }
}

struct Builder {
    entry: CatalogEntry,
    cfg: ZeroTestConfig,
}

impl Builder {
    fn new(name: &str, f: &str, params: Bindings, domain: Domain, cfg: &ZeroTestConfig) -> Result<Builder, CatalogError> {
        let sode = Sode::parse(name, f, params, domain)?;
        Ok(Builder {
            entry: CatalogEntry {
                name: name.to_string(),
                sode,
                multipliers: vec![],
                integrals: vec![],
                lagrangians: vec![],
                hamiltonians: vec![],
                printed: vec![],
                notes: vec![],
                checks: vec![],
            },
            cfg: *cfg,
        })
    }

    fn s(&self) -> &Sode {
        &self.entry.sode
    }

    fn expr(&self, src: &str) -> Expr {
        self.s().expr(src).unwrap_or_else(|e| panic!("catalog expression `{src}`: {e}"))
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.entry.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }

    fn verdict_check(&mut self, name: &str, v: &Verdict) {
        self.check(name, v.is_zero(), format!("{v:?}"));
    }

    fn multiplier(&mut self, name: &str, src: &str) -> Result<(), CatalogError> {
        let m = verify_multiplier(self.s(), &self.expr(src), None, &self.cfg)?;
        self.check(&format!("multiplier {name}"), m.is_verified(), format!("{:?}; {:?}", m.residual_verdict, m.certificate));
        self.entry.multipliers.push(Artifact { name: name.into(), origin: Origin::Reference, value: m });
        Ok(())
    }

    fn integral(&mut self, name: &str, src: &str) -> Result<(), CatalogError> {
        let i = verify_integral(self.s(), &self.expr(src), None, &self.cfg)?;
        self.verdict_check(&format!("integral {name}"), &i.verdict);
        self.entry.integrals.push(Artifact { name: name.into(), origin: Origin::Reference, value: i });
        Ok(())
    }

    fn lagrangian(&mut self, name: &str, l: Lagrangian, origin: Origin) -> Result<(), CatalogError> {
        let el = verify_euler_lagrange(self.s(), &l, &self.cfg)?;
        self.verdict_check(&format!("euler-lagrange {name}"), &el);
        self.entry.lagrangians.push(Artifact { name: name.into(), origin, value: l });
        Ok(())
    }

    fn reference_lagrangian(&mut self, name: &str, src: &str) -> Result<(), CatalogError> {
        let s = self.s();
        let l = Lagrangian::symbolic(&self.expr(src), Source::Catalog, &s.domain, &s.params, self.cfg.seed)?;
        self.lagrangian(name, l, Origin::Reference)
    }

    /// Builds `L` from the named multiplier and records its Hessian check.
    fn derived_lagrangian(&mut self, name: &str, mu: &str) -> Result<Lagrangian, CatalogError> {
        let m = self.entry.multiplier(mu).expect("multiplier registered").clone();
        let l = lagrangian_from_multiplier(self.s(), &m, 0.0, &self.cfg)?;
        let hess = verify_hessian(&l, &m.expr, &self.cfg)?;
        self.verdict_check(&format!("hessian {name} = {mu}"), &hess);
        Ok(l)
    }

    fn hamiltonian(&mut self, name: &str, lagrangian: &str) -> Result<(), CatalogError> {
        let l = self.entry.lagrangian(lagrangian).expect("lagrangian registered");
        let h = legendre(l, &self.s().domain, &self.cfg)?;
        let rt = h.round_trip(&self.s().domain, 32, &self.cfg)?;
        self.check(&format!("legendre round trip {name}"), rt.passes(1e-10, 1e-9), format!("{rt:?}"));
        if let Some(branch) = &h.branch {
            self.entry.notes.push(format!("{name}: inverse Legendre map valid on the branch {branch}"));
        }
        self.entry.hamiltonians.push(Artifact { name: name.into(), origin: Origin::Derived, value: h });
        Ok(())
    }

    /// Compares a transcribed form with `certified`, pulling Hamiltonians back
    /// to `(x, v)` through `p = ∂L/∂v`. With no symbolic `certified`, the
    /// named Hamiltonian is compared pointwise.
    fn print_check(&mut self, artifact: &str, text: &str, certified: Option<&Expr>, gauge: bool, flagged: bool) {
        let names: Vec<&str> = self.s().params.keys().map(String::as_str).collect();
        let status = match parse_with_params(text, &names) {
            Err(e) => PrintStatus::Unparseable { error: e.to_string() },
            Ok(printed) => match self.compare(artifact, &printed, certified, gauge) {
                Ok(v) if v.is_zero() => PrintStatus::Matches,
                Ok(verdict) => PrintStatus::Differs { verdict },
                Err(e) => PrintStatus::Unparseable { error: e.to_string() },
            },
        };
        self.entry.printed.push(PrintCheck {
            artifact: artifact.into(),
            text: text.into(),
            status,
            flag: flagged.then_some(UNVERIFIED_PRINT),
        });
    }

    fn compare(&self, artifact: &str, printed: &Expr, certified: Option<&Expr>, gauge: bool) -> Result<Verdict, ZeroTestError> {
        let s = self.s();
        let hamiltonian = self.entry.hamiltonian(artifact);
        let Some(certified) = certified else {
            let h = hamiltonian.expect("numeric comparison needs a Hamiltonian");
            let c = Compiled::new(printed, &["x", "p"], &s.params)?;
            return zero_test_with(&s.domain, &self.cfg, |pt| {
                let (x, v) = (pt["x"], pt["v"]);
                let p = h.momentum(x, v)?;
                let got = h.value(x, p).map_err(|e| EvalError::Domain(e.to_string()))?;
                let want = c.eval(&[x, p])?;
                Ok((got - want, got.abs() + want.abs()))
            });
        };
        let mut diff = certified - printed;
        if let Some(h) = hamiltonian {
            diff = h.pullback(&diff).unwrap_or(diff);
        }
        if gauge {
            let dv = diff.diff("v");
            diff = dv.diff("v") + diff.diff("x") - Expr::var("v") * dv.diff("x");
        }
        zero_test(&diff, &s.domain, &s.params, &self.cfg)
    }

    fn cross_check(&mut self, derived: &Lagrangian, reference: &str) -> Result<(), CatalogError> {
        let r = self.entry.lagrangian(reference).and_then(Lagrangian::expr).expect("symbolic reference").clone();
        let same = equivalent_up_to_gauge(derived, &r, &self.cfg)?;
        self.check(&format!("multiplier route reproduces {reference} up to gauge"), same, "");
        Ok(())
    }

    fn finish(self) -> CatalogEntry {
        self.entry
    }
}

fn params(k: f64, a: f64) -> Bindings {
    [("k".to_string(), k), ("a".to_string(), a)].into_iter().collect()
}

fn x_bound(k: f64, cap: f64) -> f64 {
    if k < 0.0 {
        (0.99 / (-k).sqrt()).min(cap)
    } else {
        cap
    }
}

const F_ONE: &str = "(k*v^2 - a^2)*x/(1 + k*x^2)";
const F_TWO: &str = "-k*x*v^2/(1 + k*x^2) - a^2*x/(1 + k*x^2)^3";
const F_HARMONIC: &str = "-a^2*x";

fn domain_one(k: f64, a: f64) -> Result<(Domain, f64, f64), DomainError> {
    let xm = x_bound(k, 2.0);
    let vm = if k > 0.0 && a != 0.0 { 0.99 * a.abs() / k.sqrt() } else { 2.0 };
    Ok((Domain::new().with("x", -xm, xm)?.with("v", -vm, vm)?, xm, vm))
}

fn domain_two(k: f64, a: f64) -> Result<(Domain, f64), DomainError> {
    let xm = x_bound(k, 1.0);
    let vm = if k > 0.0 && a != 0.0 { 0.99 * a.abs() / (k.sqrt() * (1.0 + k * xm * xm)) } else { 1.0 };
    Ok((Domain::new().with("x", -xm, xm)?.with("v", -vm, vm)?, vm))
}

fn domain_harmonic() -> Result<Domain, DomainError> {
    Domain::new().with("x", -2.0, 2.0)?.with("v", -2.0, 2.0)
}

/// The system of a catalog entry with its default domain, without building
/// or verifying any artifacts.
pub fn system(name: &str, k: f64, a: f64) -> Result<Sode, CatalogError> {
    Ok(match name {
        "oscillator1" => Sode::parse(name, F_ONE, params(k, a), domain_one(k, a)?.0)?,
        "oscillator2" if k == 0.0 => return Err(CatalogError::ZeroK),
        "oscillator2" => Sode::parse(name, F_TWO, params(k, a), domain_two(k, a)?.0)?,
        "harmonic" => Sode::parse(name, F_HARMONIC, [("a".to_string(), a)].into_iter().collect(), domain_harmonic()?)?,
        other => return Err(CatalogError::Unknown(other.to_string())),
    })
}

/// `x'' = (k v² − a²) x / (1 + k x²)`.
pub fn oscillator_one(k: f64, a: f64, cfg: &ZeroTestConfig) -> Result<CatalogEntry, CatalogError> {
    let (domain, xm, vm) = domain_one(k, a)?;
    let branch = k > 0.0 && a != 0.0;
    let mut b = Builder::new("oscillator1", F_ONE, params(k, a), domain, cfg)?;
    if k < 0.0 {
        b.entry.notes.push(format!("k < 0: x restricted to |x| <= {xm:.6} inside the singular lines |x| = 1/sqrt(-k)"));
    }
    if branch {
        b.entry.notes.push(format!("v restricted to |sqrt(k) v / a| < 1 (|v| <= {vm:.6}) so that mu2 is regular"));
    }

    b.multiplier("mu1", "1/(1 + k*x^2)")?;
    let has_mu2 = a != 0.0 || k < 0.0;
    if has_mu2 {
        b.multiplier("mu2", "1/(k*v^2 - a^2)")?;
        b.integral("I", "(1 + k*x^2)/(k*v^2 - a^2)")?;
    }

    b.reference_lagrangian("L1", "(v^2 - a^2*x^2)/(2*(1 + k*x^2))")?;
    let derived = b.derived_lagrangian("L1", "mu1")?;
    b.cross_check(&derived, "L1")?;
    b.hamiltonian("H1", "L1")?;
    let h1 = b.entry.hamiltonian("H1").and_then(Hamiltonian::expr).cloned();
    if let Some(h1) = h1 {
        b.print_check("H1", "(1 + k*x^2)*p^2/2 + a^2*x^2/(2*(1 + k*x^2))", Some(&h1), false, false);
    }

    if k != 0.0 && has_mu2 {
        let i = verify_integral(b.s(), &b.expr("(k*v^2 - a^2)/(2*k*(1 + k*x^2))"), None, cfg)?;
        b.verdict_check("integral mu1/(2k mu2)", &i.verdict);
        let l = lagrangian_from_integral(b.s(), &i, cfg)?;
        b.lagrangian("L_I", l, Origin::Derived)?;
    }

    if branch {
        let l2 = b.derived_lagrangian("L2", "mu2")?;
        let l2_expr = l2.expr().cloned();
        b.lagrangian("L2", l2, Origin::Derived)?;
        if let Some(e) = &l2_expr {
            b.print_check("L2", "-v*atanh(sqrt(k)*v/a)/(sqrt(k)*a) + ln((1 + k*x^2)/abs(a^2 - k*v^2))/(2*k)", Some(e), true, false);
        }
        b.hamiltonian("H2", "L2")?;
        let h2 = b.entry.hamiltonian("H2").and_then(Hamiltonian::expr).cloned();
        if let Some(h2) = h2 {
            b.print_check("H2", "ln(a^2*(1 - tanh(sqrt(k)*p*a)^2)/(1 + k*x^2))/(2*k)", Some(&h2), false, true);
        }
    } else {
        b.entry.notes.push("L2 is built only for k > 0 and a != 0 (atanh branch)".into());
    }
    Ok(b.finish())
}

/// `x'' = −k x v²/(1 + k x²) − a² x/(1 + k x²)³` for `k ≠ 0`.
pub fn oscillator_two(k: f64, a: f64, cfg: &ZeroTestConfig) -> Result<CatalogEntry, CatalogError> {
    if k == 0.0 {
        return Err(CatalogError::ZeroK);
    }
    let (domain, vm) = domain_two(k, a)?;
    let has_mu2 = a != 0.0 || k < 0.0;
    let mut b = Builder::new("oscillator2", F_TWO, params(k, a), domain, cfg)?;
    if k > 0.0 && a != 0.0 {
        b.entry.notes.push(format!("v restricted to |v| <= {vm:.6} so that mu2 = k(1+kx^2)^2 v^2 - a^2 stays negative"));
    }

    b.multiplier("mu1", "1 + k*x^2")?;
    if has_mu2 {
        b.multiplier("mu2", "k*(1 + k*x^2)^2*v^2 - a^2")?;
    } else {
        b.entry.notes.push("a = 0: mu2 = k(1+kx^2)^2 v^2 vanishes at v = 0 and is not a multiplier here".into());
    }
    b.integral("I", "(k*(1 + k*x^2)^2*v^2 - a^2)/(1 + k*x^2)")?;

    b.reference_lagrangian("L1", "(1 + k*x^2)*v^2/2 - a^2*x^2/(2*(1 + k*x^2))")?;
    let derived = b.derived_lagrangian("L1", "mu1")?;
    b.cross_check(&derived, "L1")?;
    b.hamiltonian("H1", "L1")?;
    let h1 = b.entry.hamiltonian("H1").and_then(Hamiltonian::expr).cloned();
    if let Some(h1) = h1 {
        b.print_check("H1", "p^2/(2*(1 + k*x^2)) + a^2*x^2/(2*(1 + k*x^2))", Some(&h1), false, false);
    }

    if has_mu2 {
        let l2 = b.derived_lagrangian("L2", "mu2")?;
        let phi2 = l2.phi2.clone();
        let l2_expr = l2.expr().cloned();
        b.lagrangian("L2", l2, Origin::Derived)?;
        if let Some(phi2) = &phi2 {
            b.print_check("phi2", "a*x^2*(2 + k*x^2)/(4*(1 + k*x^2)^2)", Some(phi2), false, true);
            b.entry.notes.push(
                "phi2 of L2 is the integral of a^4 x/(1+kx^2)^3 from 0; the transcribed coefficient a instead of a^4 \
                 agrees only when a^4 = a"
                    .into(),
            );
        }
        if let Some(e) = &l2_expr {
            b.print_check("L2", "k*v^4*(1 + k*x^2)^2/12 - a^2*v^2/2 + a^4*x^2*(2 + k*x^2)/(4*(1 + k*x^2)^2)", Some(e), true, false);
        }
        b.hamiltonian("H2", "L2")?;
        b.print_check(
            "H2",
            "(p^2 + 4*a^2 + a*(-k*x^2*(2 + k*x^2) + 3*a^3 - 4*a*sqrt(k*(1 + k*x^2)^2*(p + a^2)))/(4*k*(1 + k*x^2)^2)",
            None,
            false,
            true,
        );
    }
    Ok(b.finish())
}

/// `x'' = −a² x`.
pub fn harmonic(a: f64, cfg: &ZeroTestConfig) -> Result<CatalogEntry, CatalogError> {
    let p: Bindings = [("a".to_string(), a)].into_iter().collect();
    let mut b = Builder::new("harmonic", F_HARMONIC, p, domain_harmonic()?, cfg)?;
    b.multiplier("mu", "1")?;
    if a == 0.0 {
        b.integral("I", "v")?;
    } else {
        b.integral("I", "a^2*x^2 + v^2")?;
        if a != 1.0 {
            b.entry.notes.push("I = a^2 x^2 + v^2 reduces to x^2 + v^2 at a = 1".into());
        }
    }
    b.reference_lagrangian("L", "(v^2 - a^2*x^2)/2")?;
    let derived = b.derived_lagrangian("L", "mu")?;
    b.cross_check(&derived, "L")?;
    b.hamiltonian("H", "L")?;
    let h = b.entry.hamiltonian("H").and_then(Hamiltonian::expr).cloned();
    if let Some(h) = h {
        b.print_check("H", "(p^2 + a^2*x^2)/2", Some(&h), false, false);
    }
    Ok(b.finish())
}

/// Looks up an entry by its CLI name. `harmonic` ignores `k`.
pub fn by_name(name: &str, k: f64, a: f64, cfg: &ZeroTestConfig) -> Result<CatalogEntry, CatalogError> {
    match name {
        "oscillator1" => oscillator_one(k, a, cfg),
        "oscillator2" => oscillator_two(k, a, cfg),
        "harmonic" => harmonic(a, cfg),
        other => Err(CatalogError::Unknown(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default()
    }

    fn failed(e: &CatalogEntry) -> Vec<&Check> {
        e.checks.iter().filter(|c| !c.passed).collect()
    }

    #[test]
    fn oscillator_one_certifies() {
        for (k, a) in [(1.0, 1.0), (-0.25, 1.0), (0.0, 1.0), (2.0, 0.5)] {
            let e = oscillator_one(k, a, &cfg()).unwrap();
            assert!(e.certified(), "k={k} a={a}: {:#?}", failed(&e));
        }
        let e = oscillator_one(1.0, 1.0, &cfg()).unwrap();
        for name in ["H1", "L2", "H2"] {
            assert!(matches!(e.print_check(name).unwrap().status, PrintStatus::Matches), "{name}");
        }
        assert_eq!(e.print_check("H2").unwrap().flag, Some(UNVERIFIED_PRINT));
    }

    #[test]
    fn harmonic_limit_of_oscillator_one() {
        let e = oscillator_one(0.0, 1.0, &cfg()).unwrap();
        let mu1 = &e.multiplier("mu1").unwrap().expr;
        assert!(zero_test(&(mu1 - Expr::one()), &e.sode.domain, &e.sode.params, &cfg()).unwrap().is_zero());
        assert!(e.lagrangian("L2").is_none());
    }

    #[test]
    fn oscillator_two_certifies() {
        for (k, a) in [(1.0, 1.0), (1.0, 0.0), (-0.25, 1.0), (0.5, 2.0)] {
            let e = oscillator_two(k, a, &cfg()).unwrap();
            assert!(e.certified(), "k={k} a={a}: {:#?}", failed(&e));
        }
        let e = oscillator_two(1.0, 1.0, &cfg()).unwrap();
        assert!(matches!(e.print_check("H1").unwrap().status, PrintStatus::Matches));
        assert!(matches!(e.print_check("H2").unwrap().status, PrintStatus::Unparseable { .. }));
        assert!(matches!(e.print_check("phi2").unwrap().status, PrintStatus::Matches));
        let e = oscillator_two(0.5, 2.0, &cfg()).unwrap();
        assert!(matches!(e.print_check("phi2").unwrap().status, PrintStatus::Differs { .. }));
        assert!(matches!(oscillator_two(0.0, 1.0, &cfg()), Err(CatalogError::ZeroK)));
    }

    #[test]
    fn harmonic_certifies() {
        for a in [1.0, 0.0, 2.0] {
            let e = harmonic(a, &cfg()).unwrap();
            assert!(e.certified(), "a={a}: {:#?}", failed(&e));
        }
        assert!(matches!(by_name("pendulum", 1.0, 1.0, &cfg()), Err(CatalogError::Unknown(_))));
    }
}
