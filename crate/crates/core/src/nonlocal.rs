//! The covering `w' = H(x, v)` of a second-order system and the non-local
//! symmetries `Y = g X_H` it carries.
//!
//! With `H = F h(v)`, any `g = G(w − ∫h dv)` is annihilated by `X_H`, and
//! `[g X_H, ∂t + X_H] = −(∂t g + X_H g) X_H` then vanishes.

use serde::Serialize;

use crate::expr::{
    antiderivative, certify_nonvanishing, zero_test, Antiderivative, Certificate, Domain, Expr, IntegrationContext,
    Verdict, ZeroTestConfig, ZeroTestError,
};
use crate::geometry::{jet_name, prolong, GeometryError, PointSymmetryAnsatz, Sode, VectorField};

/// Coordinates of the extended system, in chart order.
pub const CHART: [&str; 4] = ["t", "x", "v", "w"];

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum NonlocalError {
    #[error("h must depend on v only, found `{0}`")]
    NotVelocityOnly(String),
    #[error("h = `{h}` vanishes or is singular on the v-interval: {certificate:?}")]
    Vanishes { h: String, certificate: Certificate },
    #[error("no closed-form antiderivative of h = `{0}`")]
    NoClosedForm(String),
    #[error("g must depend on v and w only, found `{0}`")]
    NotInvariant(String),
    #[error("g = `{g}` is not a first integral of X_H: {verdict:?}")]
    NotFirstIntegral { g: String, verdict: Verdict },
    #[error("ansatz has dependent `{0}`; expected x, v or w")]
    UnknownDependent(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
}

/// `x' = v`, `v' = F`, `w' = H` with `X̄_H = ∂t + v ∂x + F ∂v + H ∂w`.
#[derive(Clone, Debug, Serialize)]
pub struct ExtendedSystem {
    pub base: Sode,
    pub h: Expr,
    #[serde(rename = "H")]
    pub haux: Expr,
    #[serde(serialize_with = "field_text")]
    pub field: VectorField,
    /// Sampling domain over `(t, x, v, w)`.
    pub domain: Domain,
}

fn field_text<S: serde::Serializer>(f: &VectorField, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(f)
}

impl ExtendedSystem {
    /// `X_H = v ∂x + F ∂v + H ∂w` on the full chart, with no `∂t` part.
    pub fn x_h(&self) -> VectorField {
        let mut comps = self.field.components().to_vec();
        comps[0] = Expr::zero();
        VectorField::new(&CHART, comps).expect("chart arity")
    }

    fn test(&self, e: &Expr, cfg: &ZeroTestConfig) -> Result<Verdict, ZeroTestError> {
        zero_test(e, &self.domain, &self.base.params, cfg)
    }

    fn test_field(&self, f: &VectorField, cfg: &ZeroTestConfig) -> Result<Vec<Verdict>, ZeroTestError> {
        f.zero_test(&self.domain, &self.base.params, cfg)
    }
}

/// Adds `w' = F h(v)` to `s`. Missing `t` and `w` intervals default to
/// `[0, 1]` and `[-1, 1]`.
pub fn extend(s: &Sode, h: &Expr) -> Result<ExtendedSystem, NonlocalError> {
    let h = s.bind(h);
    if let Some(other) = h.variables().into_iter().find(|v| v != "v") {
        return Err(NonlocalError::NotVelocityOnly(other));
    }
    let mut domain = s.domain.clone();
    if domain.get("t").is_none() {
        domain = domain.with("t", 0.0, 1.0).expect("unit interval");
    }
    if domain.get("w").is_none() {
        domain = domain.with("w", -1.0, 1.0).expect("unit interval");
    }
    let certificate = certify_nonvanishing(&h, &domain.project(&["v"]), &s.params, 0x5EED)?;
    if !certificate.holds() {
        return Err(NonlocalError::Vanishes { h: h.to_string(), certificate });
    }
    let haux = &s.f * &h;
    let field = VectorField::new(&CHART, vec![Expr::one(), Expr::var("v"), s.f.clone(), haux.clone()])?;
    Ok(ExtendedSystem { base: s.clone(), h, haux, field, domain })
}

/// `G(u)` for the default profile `G = exp`.
pub fn exp_profile() -> Expr {
    Expr::var("u").exp()
}

/// `g = G(w − ∫h dv)` with `G` given as an expression in `u`.
pub fn characteristic_g(h: &Expr, profile: &Expr, ctx: &IntegrationContext) -> Result<Expr, NonlocalError> {
    let primitive = match antiderivative(h, "v", ctx) {
        Antiderivative::Symbolic(p) => p,
        Antiderivative::Numeric(_) => return Err(NonlocalError::NoClosedForm(h.to_string())),
    };
    Ok(profile.subs("u", &(Expr::var("w") - primitive)))
}

/// `∂g/∂v + h ∂g/∂w`.
pub fn characteristic_residual(h: &Expr, g: &Expr) -> Expr {
    g.diff("v") + h * g.diff("w")
}

/// Integration context for `h` over the extended system's domain.
pub fn context(es: &ExtendedSystem, cfg: &ZeroTestConfig) -> IntegrationContext {
    let mut ctx = IntegrationContext::new(es.base.params.clone(), es.domain.clone());
    ctx.zero = *cfg;
    ctx
}

#[derive(Clone, Debug, Serialize)]
pub struct NonlocalSymmetryCandidate {
    pub g: Expr,
    #[serde(rename = "Y", serialize_with = "field_text")]
    pub y: VectorField,
    /// `[Y, X̄_H]`.
    #[serde(serialize_with = "field_text")]
    pub bracket: VectorField,
    /// `−(∂t g + X_H g)`, so that `[Y, X̄_H] = λ X_H`.
    pub lambda: Expr,
    /// Per-component zero tests of `[Y, X̄_H]`.
    pub bracket_verdicts: Vec<Verdict>,
}

impl NonlocalSymmetryCandidate {
    pub fn is_symmetry(&self) -> bool {
        self.bracket_verdicts.iter().all(Verdict::is_zero)
    }
}

/// `Y = g X_H` for a first integral `g(v, w)` of `X_H`.
///
/// When `F ≡ 0` every `g` is admissible and the first-integral check is skipped.
pub fn build_symmetry(es: &ExtendedSystem, g: &Expr, cfg: &ZeroTestConfig) -> Result<NonlocalSymmetryCandidate, NonlocalError> {
    let g = es.base.bind(g);
    if let Some(other) = g.variables().into_iter().find(|v| v != "v" && v != "w") {
        return Err(NonlocalError::NotInvariant(other));
    }
    let x_h = es.x_h();
    let degenerate = es.test(&es.base.f, cfg)?.is_zero();
    if !degenerate {
        let verdict = es.test(&x_h.apply(&g), cfg)?;
        if !verdict.is_zero() {
            return Err(NonlocalError::NotFirstIntegral { g: g.to_string(), verdict });
        }
    }
    let y = x_h.scale(&g);
    let bracket = y.lie_bracket(&es.field)?;
    let lambda = -es.field.apply(&g);
    let bracket_verdicts = es.test_field(&bracket, cfg)?;
    Ok(NonlocalSymmetryCandidate { g, y, bracket, lambda, bracket_verdicts })
}

/// `[g X_H, X̄_H] + (X̄_H g) X_H`, which vanishes for every `g(t, x, v, w)`.
pub fn proof_identity_residual(es: &ExtendedSystem, g: &Expr) -> Result<VectorField, GeometryError> {
    let x_h = es.x_h();
    let lhs = x_h.scale(g).lie_bracket(&es.field)?;
    lhs.add(&x_h.scale(&es.field.apply(g)))
}

fn components(es: &ExtendedSystem, ansatz: &PointSymmetryAnsatz) -> Result<[Expr; 4], NonlocalError> {
    let mut out = [es.base.bind(&ansatz.xi), Expr::zero(), Expr::zero(), Expr::zero()];
    for (dep, eta) in &ansatz.eta {
        let slot = match dep.as_str() {
            "x" => 1,
            "v" => 2,
            "w" => 3,
            _ => return Err(NonlocalError::UnknownDependent(dep.clone())),
        };
        out[slot] = es.base.bind(eta);
    }
    Ok(out)
}

/// The ansatz as a vector field on `(t, x, v, w)`.
pub fn ansatz_field(es: &ExtendedSystem, ansatz: &PointSymmetryAnsatz) -> Result<VectorField, NonlocalError> {
    Ok(VectorField::new(&CHART, components(es, ansatz)?.to_vec())?)
}

/// `(Y⁽¹⁾Δⁱ)|_{Δ=0}` for `Δ¹ = ẋ − v`, `Δ² = v̇ − F`, `Δ³ = ẇ − H`.
pub fn determining_residuals(es: &ExtendedSystem, ansatz: &PointSymmetryAnsatz) -> Result<Vec<Expr>, NonlocalError> {
    let [xi, phi, psi, eta] = components(es, ansatz)?;
    let full = PointSymmetryAnsatz::new(xi, vec![("x".into(), phi), ("v".into(), psi), ("w".into(), eta)]);
    let y1 = prolong(&full, 1);
    let base = VectorField::new(&CHART, y1_base(&y1))?;
    let jet = |dep: &str| y1.component(&jet_name(dep, 1)).expect("first prolongation").clone();
    let raw = [
        jet("x") - base.apply(&Expr::var("v")),
        jet("v") - base.apply(&es.base.f),
        jet("w") - base.apply(&es.haux),
    ];
    let on_shell = [("x", Expr::var("v")), ("v", es.base.f.clone()), ("w", es.haux.clone())];
    Ok(raw
        .iter()
        .map(|r| on_shell.iter().fold(r.clone(), |acc, (dep, value)| acc.subs(&jet_name(dep, 1), value)))
        .collect())
}

fn y1_base(y1: &VectorField) -> Vec<Expr> {
    CHART.iter().map(|c| y1.component(c).expect("base coordinate").clone()).collect()
}

pub fn verify_determining(es: &ExtendedSystem, ansatz: &PointSymmetryAnsatz, cfg: &ZeroTestConfig) -> Result<Vec<Verdict>, NonlocalError> {
    determining_residuals(es, ansatz)?.iter().map(|r| Ok(es.test(r, cfg)?)).collect()
}

/// `[Y, X̄_H] − λ X̄_H` with `λ` the `∂t` component of the bracket; zero
/// exactly when the point field `Y` preserves the line field of `X̄_H`.
pub fn bracket_residual(es: &ExtendedSystem, ansatz: &PointSymmetryAnsatz) -> Result<VectorField, NonlocalError> {
    let y = ansatz_field(es, ansatz)?;
    let bracket = y.lie_bracket(&es.field)?;
    let lambda = bracket.components()[0].clone();
    Ok(bracket.sub(&es.field.scale(&lambda))?)
}

pub fn verify_bracket(es: &ExtendedSystem, ansatz: &PointSymmetryAnsatz, cfg: &ZeroTestConfig) -> Result<Vec<Verdict>, NonlocalError> {
    Ok(es.test_field(&bracket_residual(es, ansatz)?, cfg)?)
}

/// `g X_H` read as a point ansatz over `(t, x, v, w)`.
pub fn as_ansatz(candidate: &NonlocalSymmetryCandidate) -> PointSymmetryAnsatz {
    let c = candidate.y.components();
    PointSymmetryAnsatz::new(c[0].clone(), vec![("x".into(), c[1].clone()), ("v".into(), c[2].clone()), ("w".into(), c[3].clone())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;
    use proptest::prelude::*;

    fn params() -> Bindings {
        [("k".to_string(), 1.0), ("a".to_string(), 1.0)].into_iter().collect()
    }

    fn positive() -> Domain {
        Domain::new().with("x", -1.0, 1.0).unwrap().with("v", 0.1, 0.9).unwrap()
    }

    fn nonl1() -> Sode {
        Sode::parse("nonl1", "(k*v^2 - a^2)*x/(1 + k*x^2)", params(), positive()).unwrap()
    }

    fn nonl2() -> Sode {
        Sode::parse("nonl2", "-k*x*v^2/(1 + k*x^2) - a^2*x/(1 + k*x^2)^3", params(), positive()).unwrap()
    }

    fn cfg() -> ZeroTestConfig {
        ZeroTestConfig::default()
    }

    fn recip_v() -> Expr {
        Expr::var("v").recip()
    }

    #[test]
    fn extension_of_nonl1() {
        let s = nonl1();
        let es = extend(&s, &recip_v()).unwrap();
        let want = s.expr("(k*v^2 - a^2)*x/((1 + k*x^2)*v)").unwrap();
        assert!(es.test(&(es.haux.clone() - want), &cfg()).unwrap().is_zero());
        let projected = VectorField::new(&["t", "x", "v"], es.field.components()[..3].to_vec()).unwrap();
        assert_eq!(projected, s.field_with_time());
    }

    #[test]
    fn h_must_not_vanish() {
        let d = Domain::new().with("x", -1.0, 1.0).unwrap().with("v", -1.0, 1.0).unwrap();
        let s = Sode::parse("nonl1", "(k*v^2 - a^2)*x/(1 + k*x^2)", params(), d).unwrap();
        assert!(matches!(extend(&s, &recip_v()), Err(NonlocalError::Vanishes { .. })));
        assert!(matches!(extend(&s, &Expr::var("x")), Err(NonlocalError::NotVelocityOnly(_))));
    }

    #[test]
    fn characteristic_functions() {
        let es = extend(&nonl1(), &recip_v()).unwrap();
        let ctx = context(&es, &cfg());
        let g = characteristic_g(&es.h, &exp_profile(), &ctx).unwrap();
        let want = Expr::var("w").exp() / Expr::var("v");
        assert!(es.test(&(g - want), &cfg()).unwrap().is_zero());
        assert_eq!(characteristic_g(&Expr::zero(), &exp_profile(), &ctx).unwrap(), Expr::var("w").exp());
        let id = characteristic_g(&Expr::one(), &Expr::var("u"), &ctx).unwrap();
        assert_eq!(id, Expr::var("w") - Expr::var("v"));
    }

    #[test]
    fn both_oscillators_carry_the_exponential_symmetry() {
        for s in [nonl1(), nonl2()] {
            let es = extend(&s, &recip_v()).unwrap();
            let g = characteristic_g(&es.h, &exp_profile(), &context(&es, &cfg())).unwrap();
            let c = build_symmetry(&es, &g, &cfg()).unwrap();
            assert!(c.is_symmetry(), "{}: {:?}", s.name, c.bracket_verdicts);
            let printed = VectorField::new(
                &CHART,
                vec![Expr::zero(), Expr::one(), es.haux.clone(), &es.haux / Expr::var("v")],
            )
            .unwrap()
            .scale(&Expr::var("w").exp());
            for v in es.test_field(&c.y.sub(&printed).unwrap(), &cfg()).unwrap() {
                assert!(v.is_zero());
            }
            assert!(verify_determining(&es, &as_ansatz(&c), &cfg()).unwrap().iter().all(Verdict::is_zero));
        }
    }

    #[test]
    fn non_integral_g_is_rejected() {
        let es = extend(&nonl1(), &recip_v()).unwrap();
        let err = build_symmetry(&es, &Expr::var("w"), &cfg()).unwrap_err();
        assert!(matches!(err, NonlocalError::NotFirstIntegral { .. }));
        assert!(matches!(build_symmetry(&es, &Expr::var("x"), &cfg()), Err(NonlocalError::NotInvariant(_))));
        let trivial = build_symmetry(&es, &Expr::one(), &cfg());
        assert!(matches!(trivial, Err(NonlocalError::NotFirstIntegral { .. })) || trivial.unwrap().is_symmetry());
    }

    #[test]
    fn time_translation_and_x_translation() {
        let es = extend(&nonl1(), &recip_v()).unwrap();
        let dt = PointSymmetryAnsatz::new(Expr::one(), vec![]);
        assert!(verify_determining(&es, &dt, &cfg()).unwrap().iter().all(Verdict::is_zero));
        let dx = PointSymmetryAnsatz::new(Expr::zero(), vec![("x".into(), Expr::one())]);
        let verdicts = verify_determining(&es, &dx, &cfg()).unwrap();
        assert!(!verdicts.iter().all(Verdict::is_zero));
        assert!(!verify_bracket(&es, &dx, &cfg()).unwrap().iter().all(Verdict::is_zero));
    }

    #[test]
    fn first_residual_is_the_bracket_x_component() {
        let es = extend(&nonl1(), &recip_v()).unwrap();
        let ansatz = PointSymmetryAnsatz::new(
            es.base.expr("t*x").unwrap(),
            vec![("x".into(), es.base.expr("v*w").unwrap()), ("v".into(), es.base.expr("x^2").unwrap())],
        );
        let det = determining_residuals(&es, &ansatz).unwrap();
        let br = bracket_residual(&es, &ansatz).unwrap();
        assert!(es.test(&(&det[0] + &br.components()[1]), &cfg()).unwrap().is_zero());
        assert!(es.test(&(&det[1] + &br.components()[2]), &cfg()).unwrap().is_zero());
        assert!(es.test(&(&det[2] + &br.components()[3]), &cfg()).unwrap().is_zero());
    }

    fn smooth_g() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-3i64..=3).prop_map(Expr::int),
            Just(Expr::var("t")),
            Just(Expr::var("x")),
            Just(Expr::var("v")),
            Just(Expr::var("w")),
        ];
        leaf.prop_recursive(3, 10, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                inner.clone().prop_map(|a| a.exp()),
                inner.clone().prop_map(|a| Expr::call(crate::expr::Func::Sin, a)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn proof_identity_holds_for_any_g(g in smooth_g()) {
            for s in [nonl1(), nonl2()] {
                let es = extend(&s, &recip_v()).unwrap();
                let r = proof_identity_residual(&es, &g).unwrap();
                for v in es.test_field(&r, &cfg()).unwrap() {
                    prop_assert!(v.is_zero(), "{g}: {v:?}");
                }
            }
        }
    }
}
