//! Twice-differentiable scalar fields.
//!
//! A [`ScalarField`] maps admissible points of an open convex domain to a
//! [`Jet2`]: value, gradient and Hessian, exact up to floating-point rounding.
//! Leaf fields are expressions evaluated with [`Hyper`] arithmetic; derived
//! fields (see `transforms`) propagate jets of their source analytically.

mod fd;
pub mod hyper;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use fd::{fd_gradient, fd_gradient_with_steps, fd_hessian, fd_hessian_with_steps};
pub use hyper::{Dual, Hyper, Scalar, MAX_DIM};

use crate::error::{Error, Result};

/// Relative distance from a boundary below which a point counts as on it.
pub const BOUNDARY_BAND: f64 = 1e-9;

/// `x > bound`, excluding a relative band of width [`BOUNDARY_BAND`].
pub fn strictly_above(x: f64, bound: f64) -> bool {
    x > bound + BOUNDARY_BAND * bound.abs().max(1.0)
}

/// `x < bound`, excluding a relative band of width [`BOUNDARY_BAND`].
pub fn strictly_below(x: f64, bound: f64) -> bool {
    x < bound - BOUNDARY_BAND * bound.abs().max(1.0)
}

/// A labelled point of state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
    labels: Vec<String>,
}

impl Point {
    pub fn new(coords: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if coords.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                what: "coordinate".into(),
                coords,
            });
        }
        Ok(Point { coords, labels })
    }

    /// A point carrying the labels of `field`.
    pub fn on(field: &ScalarField, coords: Vec<f64>) -> Result<Self> {
        Point::new(coords, field.labels().to_vec())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Second-order Taylor data of a scalar field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

impl Jet2 {
    /// Build from parts, mirroring the upper triangle of `hessian`.
    pub fn new(value: f64, gradient: DVector<f64>, mut hessian: DMatrix<f64>) -> Self {
        let n = gradient.len();
        for i in 0..n {
            for j in 0..i {
                hessian[(i, j)] = hessian[(j, i)];
            }
        }
        Jet2 {
            value,
            gradient,
            hessian,
        }
    }

    pub fn from_hyper(h: &Hyper) -> Self {
        let n = h.dim();
        Jet2 {
            value: h.value(),
            gradient: DVector::from_column_slice(h.grad()),
            hessian: DMatrix::from_fn(n, n, |i, j| h.hess(i, j)),
        }
    }

    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|g| g.is_finite())
            && self.hessian.iter().all(|h| h.is_finite())
    }

    /// Chain rule: given this jet of φ at `u` and `u` expressed as jets in
    /// outer variables, return the jet of `φ(u(w))`.
    pub fn compose(&self, inner: &[Hyper]) -> Hyper {
        let m = self.dim();
        assert_eq!(inner.len(), m, "compose: inner arity");
        let n = inner.first().map_or(0, Hyper::dim);
        let grad: Vec<f64> = (0..n)
            .map(|a| (0..m).map(|k| self.gradient[k] * inner[k].grad()[a]).sum())
            .collect();
        let hess = |a: usize, b: usize| {
            let mut acc = 0.0;
            for k in 0..m {
                acc += self.gradient[k] * inner[k].hess(a, b);
                let gka = inner[k].grad()[a];
                if gka != 0.0 {
                    for l in 0..m {
                        acc += self.hessian[(k, l)] * gka * inner[l].grad()[b];
                    }
                }
            }
            acc
        };
        Hyper::from_parts(self.value, &grad, hess)
    }

    /// This jet lifted to a [`Hyper`] in its own variables.
    pub fn to_hyper(&self) -> Hyper {
        Hyper::from_parts(self.value, self.gradient.as_slice(), |i, j| {
            self.hessian[(i, j)]
        })
    }
}

pub type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Admissible set: an open box intersected with a membership predicate.
#[derive(Clone)]
pub struct DomainSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    predicate: Option<Predicate>,
    description: String,
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainSpec")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("description", &self.description)
            .finish()
    }
}

impl DomainSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i])) {
            return Err(Error::InvalidParameter(format!(
                "empty box in variable {i}: [{}, {}]",
                lower[i], upper[i]
            )));
        }
        Ok(DomainSpec {
            lower,
            upper,
            predicate: None,
            description: String::new(),
        })
    }

    pub fn unbounded(dim: usize) -> Self {
        DomainSpec {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
            predicate: None,
            description: String::new(),
        }
    }

    pub fn with_predicate(
        mut self,
        description: impl Into<String>,
        predicate: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.description = description.into();
        self.predicate = Some(Arc::new(predicate));
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.check(x).is_ok()
    }

    /// `Ok` when `x` is admissible, otherwise a reason.
    pub fn check(&self, x: &[f64]) -> std::result::Result<(), String> {
        if x.len() != self.dim() {
            return Err(format!("expected {} coordinates, got {}", self.dim(), x.len()));
        }
        for (i, &xi) in x.iter().enumerate() {
            if !xi.is_finite() {
                return Err(format!("coordinate {i} is not finite"));
            }
            let lo = self.lower[i];
            let hi = self.upper[i];
            if (lo.is_finite() && !strictly_above(xi, lo)) || (hi.is_finite() && !strictly_below(xi, hi)) {
                return Err(format!("coordinate {i} = {xi} outside ({lo}, {hi})"));
            }
        }
        match &self.predicate {
            Some(p) if !p(x) => Err(if self.description.is_empty() {
                "predicate rejected point".to_string()
            } else {
                format!("requires {}", self.description)
            }),
            _ => Ok(()),
        }
    }
}

/// Implementation side of a scalar field. Use through [`ScalarField`].
pub trait Field: Send + Sync {
    fn labels(&self) -> &[String];
    fn domain(&self) -> &DomainSpec;
    fn provenance(&self) -> &str;
    /// An admissible interior point, used to seed implicit solves downstream.
    fn reference_point(&self) -> &[f64];
    /// Evaluate at a point already known to be admissible.
    fn eval(&self, x: &[f64]) -> Result<Jet2>;
}

/// Shared, immutable handle to a field.
#[derive(Clone)]
pub struct ScalarField {
    inner: Arc<dyn Field>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("labels", &self.labels())
            .field("provenance", &self.provenance())
            .finish()
    }
}

impl ScalarField {
    pub fn new(field: impl Field + 'static) -> Self {
        ScalarField {
            inner: Arc::new(field),
        }
    }

    /// A field defined by an expression in [`Hyper`] arithmetic.
    pub fn from_expr(
        labels: &[&str],
        domain: DomainSpec,
        reference: Vec<f64>,
        provenance: impl Into<String>,
        expr: impl Fn(&[Hyper]) -> Hyper + Send + Sync + 'static,
    ) -> Result<Self> {
        if domain.dim() != labels.len() || reference.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: domain.dim().min(reference.len()),
            });
        }
        if let Err(reason) = domain.check(&reference) {
            return Err(Error::InvalidParameter(format!(
                "reference point {reference:?} inadmissible: {reason}"
            )));
        }
        Ok(ScalarField::new(ExprField {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            domain,
            reference,
            provenance: provenance.into(),
            expr: Box::new(expr),
        }))
    }

    pub fn dim(&self) -> usize {
        self.inner.labels().len()
    }

    pub fn labels(&self) -> &[String] {
        self.inner.labels()
    }

    pub fn domain(&self) -> &DomainSpec {
        self.inner.domain()
    }

    pub fn provenance(&self) -> &str {
        self.inner.provenance()
    }

    pub fn reference_point(&self) -> &[f64] {
        self.inner.reference_point()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.domain().contains(x)
    }

    /// Value, gradient and Hessian at `x`.
    pub fn jet(&self, x: &[f64]) -> Result<Jet2> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if let Err(reason) = self.domain().check(x) {
            return Err(Error::domain(x, reason));
        }
        let jet = self.inner.eval(x)?;
        if !jet.is_finite() {
            return Err(Error::NonFinite {
                what: format!("jet of {}", self.provenance()),
                coords: x.to_vec(),
            });
        }
        Ok(jet)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.jet(x).map(|j| j.value)
    }
}

/// Evaluate `field` at `p`, checking the point against the field's arity.
pub fn evaluate_jet2(field: &ScalarField, p: &Point) -> Result<Jet2> {
    if p.dim() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: p.dim(),
        });
    }
    field.jet(p.coords())
}

struct ExprField {
    labels: Vec<String>,
    domain: DomainSpec,
    reference: Vec<f64>,
    provenance: String,
    expr: Box<dyn Fn(&[Hyper]) -> Hyper + Send + Sync>,
}

impl Field for ExprField {
    fn labels(&self) -> &[String] {
        &self.labels
    }
    fn domain(&self) -> &DomainSpec {
        &self.domain
    }
    fn provenance(&self) -> &str {
        &self.provenance
    }
    fn reference_point(&self) -> &[f64] {
        &self.reference
    }
    fn eval(&self, x: &[f64]) -> Result<Jet2> {
        let vars = Hyper::variables(x);
        Ok(Jet2::from_hyper(&(self.expr)(&vars)))
    }
}

/// Simple fields used in tests and as sanity fixtures.
pub mod builtin {
    use super::*;

    /// ½|u|² on R^m.
    pub fn half_squared_norm(m: usize) -> ScalarField {
        let labels: Vec<String> = (1..=m).map(|i| format!("u{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        ScalarField::from_expr(&refs, DomainSpec::unbounded(m), vec![0.0; m], "½|u|²", |u| {
            let mut acc = u[0] * u[0];
            for x in &u[1..] {
                acc = acc + *x * *x;
            }
            acc * 0.5
        })
        .expect("quadratic field")
    }

    /// u⁴ on R: strictly convex, Hessian vanishes at 0.
    pub fn quartic() -> ScalarField {
        ScalarField::from_expr(&["u"], DomainSpec::unbounded(1), vec![0.0], "u⁴", |u| {
            u[0].powi(4)
        })
        .expect("quartic field")
    }

    /// a·u + c on R^m.
    pub fn linear(a: Vec<f64>, c: f64) -> ScalarField {
        let m = a.len();
        let labels: Vec<String> = (1..=m).map(|i| format!("u{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        ScalarField::from_expr(&refs, DomainSpec::unbounded(m), vec![0.0; m], "a·u + c", move |u| {
            let mut acc = u[0].constant_like(c);
            for (x, ai) in u.iter().zip(&a) {
                acc = acc + *x * *ai;
            }
            acc
        })
        .expect("linear field")
    }
}

#[cfg(test)]
mod tests {
    use super::builtin::*;
    use super::*;

    #[test]
    fn quadratic_jet() {
        let f = half_squared_norm(3);
        let p = Point::on(&f, vec![1.0, 2.0, 3.0]).unwrap();
        let j = evaluate_jet2(&f, &p).unwrap();
        assert_eq!(j.value, 7.0);
        assert_eq!(j.gradient.as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(j.hessian, DMatrix::identity(3, 3));
    }

    #[test]
    fn quartic_at_origin() {
        let j = quartic().jet(&[0.0]).unwrap();
        assert_eq!((j.value, j.gradient[0], j.hessian[(0, 0)]), (0.0, 0.0, 0.0));
    }

    #[test]
    fn point_validation() {
        assert!(matches!(
            Point::new(vec![1.0], vec![]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Point::new(vec![f64::NAN], vec!["x".into()]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn domain_rejects_boundary_band() {
        let d = DomainSpec::new(vec![0.0], vec![f64::INFINITY]).unwrap();
        assert!(!d.contains(&[0.0]));
        assert!(!d.contains(&[5e-10]));
        assert!(d.contains(&[1e-8]));
        assert!(DomainSpec::new(vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn evaluation_outside_domain_and_nonfinite() {
        let dom = DomainSpec::new(vec![-1.0], vec![1.0]).unwrap();
        let f = ScalarField::from_expr(&["x"], dom, vec![0.5], "ln x", |x| x[0].ln()).unwrap();
        assert!(matches!(f.jet(&[2.0]), Err(Error::DomainViolation { .. })));
        assert!(matches!(f.jet(&[-0.5]), Err(Error::NonFinite { .. })));
        assert!(f.jet(&[0.5]).is_ok());
    }

    #[test]
    fn repeated_evaluation_is_bit_identical() {
        let f = half_squared_norm(4);
        let x = [0.1, -2.5, 3.75, 1e-3];
        assert_eq!(f.jet(&x).unwrap(), f.jet(&x).unwrap());
    }

    #[test]
    fn compose_matches_direct_expression() {
        // φ(a, b) = a² b, with a = w0 w1, b = exp(w1)
        let phi = ScalarField::from_expr(
            &["a", "b"],
            DomainSpec::unbounded(2),
            vec![0.0, 0.0],
            "a²b",
            |u| u[0] * u[0] * u[1],
        )
        .unwrap();
        let w = Hyper::variables(&[0.7, -0.3]);
        let inner = [w[0] * w[1], w[1].exp()];
        let composed = phi
            .jet(&[inner[0].value(), inner[1].value()])
            .unwrap()
            .compose(&inner);
        let direct = inner[0] * inner[0] * inner[1];
        assert!((composed.value() - direct.value()).abs() < 1e-15);
        for i in 0..2 {
            assert!((composed.grad()[i] - direct.grad()[i]).abs() < 1e-15);
            for j in 0..2 {
                assert!((composed.hess(i, j) - direct.hess(i, j)).abs() < 1e-14);
            }
        }
    }
}
