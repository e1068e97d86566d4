//! Vector fields on named coordinates, the second-order system `x'' = F(x, v)`
//! and jet prolongation of point symmetries.

use std::fmt;

use serde::Serialize;

use crate::expr::{parse_with_params, zero_test, Bindings, Domain, Expr, ParseError, Verdict, ZeroTestConfig, ZeroTestError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("coordinate mismatch: {left:?} vs {right:?}")]
    CoordinateMismatch { left: Vec<String>, right: Vec<String> },
    #[error("{coords} coordinates but {components} components")]
    Arity { coords: usize, components: usize },
    #[error("`{0}` is neither x, v nor a declared parameter")]
    FreeVariable(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// `Σ X^i ∂_i` on an ordered coordinate chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    coords: Vec<String>,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new<S: AsRef<str>>(coords: &[S], comps: Vec<Expr>) -> Result<VectorField, GeometryError> {
        if coords.len() != comps.len() {
            return Err(GeometryError::Arity { coords: coords.len(), components: comps.len() });
        }
        Ok(VectorField { coords: coords.iter().map(|c| c.as_ref().to_string()).collect(), comps })
    }

    /// The coordinate field `∂_name`.
    pub fn basis<S: AsRef<str>>(coords: &[S], name: &str) -> Result<VectorField, GeometryError> {
        let comps = coords.iter().map(|c| if c.as_ref() == name { Expr::one() } else { Expr::zero() }).collect();
        VectorField::new(coords, comps)
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, name: &str) -> Option<&Expr> {
        self.coords.iter().position(|c| c == name).map(|i| &self.comps[i])
    }

    /// `X(f) = Σ X^i ∂f/∂y^i`.
    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::sum(
            self.coords
                .iter()
                .zip(&self.comps)
                .filter(|(c, x)| !x.is_zero() && f.depends_on(c))
                .map(|(c, x)| x * f.diff(c)),
        )
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        VectorField { coords: self.coords.clone(), comps: self.comps.iter().map(|c| c * f).collect() }
    }

    fn same_chart(&self, other: &VectorField) -> Result<(), GeometryError> {
        if self.coords != other.coords {
            return Err(GeometryError::CoordinateMismatch { left: self.coords.clone(), right: other.coords.clone() });
        }
        Ok(())
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField, GeometryError> {
        self.same_chart(other)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect();
        Ok(VectorField { coords: self.coords.clone(), comps })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField, GeometryError> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    /// `[X, Z]^i = X(Z^i) − Z(X^i)`.
    pub fn lie_bracket(&self, other: &VectorField) -> Result<VectorField, GeometryError> {
        self.same_chart(other)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(x, z)| self.apply(z) - other.apply(x)).collect();
        Ok(VectorField { coords: self.coords.clone(), comps })
    }

    /// Divergence with respect to the standard volume form on `coords`,
    /// which must be exactly this field's chart.
    pub fn divergence<S: AsRef<str>>(&self, coords: &[S]) -> Result<Expr, GeometryError> {
        let want: Vec<String> = coords.iter().map(|c| c.as_ref().to_string()).collect();
        if want != self.coords {
            return Err(GeometryError::CoordinateMismatch { left: self.coords.clone(), right: want });
        }
        Ok(Expr::sum(self.coords.iter().zip(&self.comps).map(|(c, x)| x.diff(c))))
    }

    /// Same field on a chart with `name` added in front, with component `comp`.
    pub fn prepend(&self, name: &str, comp: Expr) -> VectorField {
        let mut coords = vec![name.to_string()];
        coords.extend(self.coords.iter().cloned());
        let mut comps = vec![comp];
        comps.extend(self.comps.iter().cloned());
        VectorField { coords, comps }
    }

    /// Same field with `name` appended, with component `comp`.
    pub fn append(&self, name: &str, comp: Expr) -> VectorField {
        let mut out = self.clone();
        out.coords.push(name.to_string());
        out.comps.push(comp);
        out
    }

    /// Zero test of every component.
    pub fn zero_test(&self, domain: &Domain, params: &Bindings, cfg: &ZeroTestConfig) -> Result<Vec<Verdict>, ZeroTestError> {
        self.comps.iter().map(|c| zero_test(c, domain, params, cfg)).collect()
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .zip(&self.comps)
            .filter(|(_, x)| !x.is_zero())
            .map(|(c, x)| format!("({x})*d/d{c}"))
            .collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// An autonomous system `x'' = F(x, v)` with parameter values and a domain.
#[derive(Clone, Debug, Serialize)]
pub struct Sode {
    pub name: String,
    pub f: Expr,
    pub params: Bindings,
    pub domain: Domain,
}

impl Sode {
    /// Builds the system, turning identifiers named in `params` into
    /// parameters. Any other free symbol than `x` and `v` is rejected.
    pub fn new(name: &str, f: Expr, params: Bindings, domain: Domain) -> Result<Sode, GeometryError> {
        let names: Vec<&str> = params.keys().map(String::as_str).collect();
        let f = f.with_params(&names);
        for v in f.variables() {
            if v != "x" && v != "v" {
                return Err(GeometryError::FreeVariable(v));
            }
        }
        if let Some(p) = f.parameters().into_iter().find(|p| !params.contains_key(p)) {
            return Err(GeometryError::FreeVariable(p));
        }
        Ok(Sode { name: name.to_string(), f, params, domain })
    }

    pub fn parse(name: &str, f: &str, params: Bindings, domain: Domain) -> Result<Sode, GeometryError> {
        let names: Vec<&str> = params.keys().map(String::as_str).collect();
        let f = parse_with_params(f, &names)?;
        Sode::new(name, f, params, domain)
    }

    /// Parses an expression in this system's parameter namespace.
    pub fn expr(&self, src: &str) -> Result<Expr, ParseError> {
        let names: Vec<&str> = self.params.keys().map(String::as_str).collect();
        parse_with_params(src, &names)
    }

    /// Marks this system's parameter names inside an externally built expression.
    pub fn bind(&self, e: &Expr) -> Expr {
        let names: Vec<&str> = self.params.keys().map(String::as_str).collect();
        e.with_params(&names)
    }

    /// `Γ = v ∂x + F ∂v` on `(x, v)`.
    pub fn field(&self) -> VectorField {
        VectorField { coords: vec!["x".into(), "v".into()], comps: vec![Expr::var("v"), self.f.clone()] }
    }

    /// `∂t + Γ` on `(t, x, v)`.
    pub fn field_with_time(&self) -> VectorField {
        self.field().prepend("t", Expr::one())
    }

    /// The total derivative along solutions: `∂t e + v ∂x e + F ∂v e`.
    pub fn total_derivative(&self, e: &Expr) -> Expr {
        self.field_with_time().apply(e)
    }

    /// `div Γ = ∂F/∂v`.
    pub fn divergence(&self) -> Expr {
        self.field().divergence(&["x", "v"]).expect("chart is (x, v)")
    }
}

/// Name of the `order`-th jet coordinate of `dep`: `x`, `x_1`, `x_2`, ...
pub fn jet_name(dep: &str, order: usize) -> String {
    if order == 0 {
        dep.to_string()
    } else {
        format!("{dep}_{order}")
    }
}

/// `ξ ∂t + Σ η_j ∂_{y_j}` with coefficients depending on base coordinates only.
#[derive(Clone, Debug)]
pub struct PointSymmetryAnsatz {
    pub xi: Expr,
    /// Dependent variable names with their coefficients.
    pub eta: Vec<(String, Expr)>,
}

impl PointSymmetryAnsatz {
    pub fn new(xi: Expr, eta: Vec<(String, Expr)>) -> Self {
        PointSymmetryAnsatz { xi, eta }
    }

    pub fn dependents(&self) -> Vec<&str> {
        self.eta.iter().map(|(n, _)| n.as_str()).collect()
    }
}

/// Truncated total derivative `∂t + Σ_j Σ_{i<order} y_{j,i+1} ∂_{y_{j,i}}`.
pub fn truncated_total_derivative(e: &Expr, dependents: &[&str], order: usize) -> Expr {
    let mut terms = vec![e.diff("t")];
    for dep in dependents {
        for i in 0..order {
            let y = jet_name(dep, i);
            if e.depends_on(&y) {
                terms.push(Expr::var(&jet_name(dep, i + 1)) * e.diff(&y));
            }
        }
    }
    Expr::sum(terms)
}

/// The `order`-th prolongation on `(t, y_j, y_{j,1}, …, y_{j,order})`, built
/// by `φ^{(i+1)} = D φ^{(i)} − y_{i+1} D ξ`.
pub fn prolong(ansatz: &PointSymmetryAnsatz, order: usize) -> VectorField {
    let deps = ansatz.dependents();
    let mut coords = vec!["t".to_string()];
    let mut comps = vec![ansatz.xi.clone()];
    let d_xi: Vec<Expr> = (0..order).map(|i| truncated_total_derivative(&ansatz.xi, &deps, i + 1)).collect();
    for (dep, eta) in &ansatz.eta {
        let mut phi = eta.clone();
        coords.push(jet_name(dep, 0));
        comps.push(phi.clone());
        for i in 0..order {
            let next = truncated_total_derivative(&phi, &deps, i + 1) - Expr::var(&jet_name(dep, i + 1)) * &d_xi[i];
            phi = next;
            coords.push(jet_name(dep, i + 1));
            comps.push(phi.clone());
        }
    }
    VectorField { coords, comps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use proptest::prelude::*;

    fn nonl1() -> Sode {
        let params: Bindings = [("k".to_string(), 1.0), ("a".to_string(), 1.0)].into_iter().collect();
        let d = Domain::new().with("x", -2.0, 2.0).unwrap().with("v", -2.0, 2.0).unwrap();
        Sode::parse("nonl1", "(k*v^2 - a^2)*x/(1 + k*x^2)", params, d).unwrap()
    }

    fn zero(e: &Expr, s: &Sode) -> bool {
        zero_test(e, &s.domain, &s.params, &ZeroTestConfig::default()).unwrap().is_zero()
    }

    #[test]
    fn divergence_of_nonl1() {
        let s = nonl1();
        let want = s.expr("2*k*x*v/(1 + k*x^2)").unwrap();
        assert!(zero(&(s.divergence() - want), &s));
    }

    #[test]
    fn bracket_basics() {
        let c = ["x"];
        let dx = VectorField::basis(&c, "x").unwrap();
        let xdx = VectorField::new(&c, vec![parse("x").unwrap()]).unwrap();
        assert_eq!(dx.lie_bracket(&xdx).unwrap(), dx);
        let g = nonl1().field();
        assert!(g.lie_bracket(&g).unwrap().components().iter().all(Expr::is_zero));
    }

    #[test]
    fn chart_mismatch_is_an_error() {
        let a = VectorField::basis(&["x", "v"], "x").unwrap();
        let b = VectorField::basis(&["x", "w"], "x").unwrap();
        assert!(a.lie_bracket(&b).is_err());
        assert!(a.divergence(&["x"]).is_err());
    }

    #[test]
    fn free_variables_are_rejected() {
        let err = Sode::parse("bad", "x + y", Bindings::new(), Domain::new()).unwrap_err();
        assert_eq!(err, GeometryError::FreeVariable("y".into()));
    }

    #[test]
    fn integral_is_conserved_by_total_derivative() {
        let s = nonl1();
        let i = s.expr("(1 + k*x^2)/(k*v^2 - a^2)").unwrap();
        assert!(zero(&s.total_derivative(&i), &s));
        assert_eq!(s.total_derivative(&Expr::var("t")), Expr::one());
    }

    #[test]
    fn prolongation_of_scaling() {
        let ansatz = PointSymmetryAnsatz::new(Expr::zero(), vec![("x".into(), parse("x").unwrap())]);
        let y = prolong(&ansatz, 1);
        assert_eq!(y.coords(), &["t", "x", "x_1"]);
        assert_eq!(y.component("x_1").unwrap(), &parse("x_1").unwrap());
        let time = PointSymmetryAnsatz::new(Expr::one(), vec![("x".into(), Expr::zero())]);
        assert!(prolong(&time, 3).components()[1..].iter().all(Expr::is_zero));
    }

    #[test]
    fn prolongation_projects_to_lower_order() {
        let ansatz = PointSymmetryAnsatz::new(parse("t*x").unwrap(), vec![("x".into(), parse("x^2 + t").unwrap())]);
        let p3 = prolong(&ansatz, 3);
        let p2 = prolong(&ansatz, 2);
        for c in p2.coords() {
            assert_eq!(p3.component(c), p2.component(c), "{c}");
        }
    }

    fn small_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-3i64..=3).prop_map(Expr::int),
            Just(Expr::var("x")),
            Just(Expr::var("v")),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                inner.clone().prop_map(|a| Expr::call(crate::expr::Func::Sin, a)),
            ]
        })
    }

    fn field() -> impl Strategy<Value = VectorField> {
        (small_expr(), small_expr()).prop_map(|(a, b)| VectorField::new(&["x", "v"], vec![a, b]).unwrap())
    }

    fn vanishes(f: &VectorField) -> bool {
        let d = Domain::new().with("x", -1.5, 1.5).unwrap().with("v", -1.5, 1.5).unwrap();
        f.zero_test(&d, &Bindings::new(), &ZeroTestConfig::default()).unwrap().iter().all(Verdict::is_zero)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn bracket_is_antisymmetric(a in field(), b in field()) {
            let s = a.lie_bracket(&b).unwrap().add(&b.lie_bracket(&a).unwrap()).unwrap();
            prop_assert!(vanishes(&s));
        }

        #[test]
        fn jacobi_identity(a in field(), b in field(), c in field()) {
            let ab_c = a.lie_bracket(&b).unwrap().lie_bracket(&c).unwrap();
            let bc_a = b.lie_bracket(&c).unwrap().lie_bracket(&a).unwrap();
            let ca_b = c.lie_bracket(&a).unwrap().lie_bracket(&b).unwrap();
            prop_assert!(vanishes(&ab_c.add(&bc_a).unwrap().add(&ca_b).unwrap()));
        }

        #[test]
        fn bracket_is_bilinear(a in field(), b in field(), c in field(), k in -3i64..=3) {
            let kb = b.scale(&Expr::int(k));
            let lhs = a.lie_bracket(&kb.add(&c).unwrap()).unwrap();
            let rhs = a.lie_bracket(&b).unwrap().scale(&Expr::int(k)).add(&a.lie_bracket(&c).unwrap()).unwrap();
            prop_assert!(vanishes(&lhs.sub(&rhs).unwrap()));
        }

        #[test]
        fn divergence_product_rule(x in field(), f in small_expr()) {
            let lhs = x.scale(&f).divergence(&["x", "v"]).unwrap();
            let rhs = x.apply(&f) + &f * x.divergence(&["x", "v"]).unwrap();
            let d = VectorField::new(&["x"], vec![lhs - rhs]).unwrap();
            prop_assert!(vanishes(&d));
        }

        #[test]
        fn total_derivative_is_a_derivation(a in small_expr(), b in small_expr()) {
            let s = nonl1();
            let lhs = s.total_derivative(&(&a * &b));
            let rhs = s.total_derivative(&a) * &b + &a * s.total_derivative(&b);
            prop_assert!(zero(&(lhs - rhs), &s));
        }
    }
}
