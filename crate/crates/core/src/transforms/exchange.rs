use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::{DomainSpec, Field, Jet2, ScalarField};
use crate::solve::{solve_monotone, ScalarSolveSettings};

/// Exchange of the function with its 1-based pivot variable `k`:
/// `ψ(φ(u), û) = u_k`. φ must be strictly monotone in `u_k`.
pub fn exchange(field: &ScalarField, pivot: usize) -> Result<ScalarField> {
    exchange_with(field, pivot, ScalarSolveSettings::default())
}

pub fn exchange_with(field: &ScalarField, pivot: usize, settings: ScalarSolveSettings) -> Result<ScalarField> {
    let m = field.dim();
    if pivot == 0 || pivot > m {
        return Err(Error::InvalidParameter(format!("pivot {pivot} outside 1..={m}")));
    }
    let k = pivot - 1;
    let u_ref = field.reference_point().to_vec();
    let jet = field.jet(&u_ref)?;
    let d = jet.gradient[k];
    if !(d != 0.0 && d.is_finite()) {
        return Err(Error::MonotonicityViolation { pivot, derivative: d });
    }
    let mut lower = field.domain().lower().to_vec();
    let mut upper = field.domain().upper().to_vec();
    lower[k] = f64::NEG_INFINITY;
    upper[k] = f64::INFINITY;
    let mut reference = u_ref.clone();
    reference[k] = jet.value;
    let mut labels = field.labels().to_vec();
    labels[k] = "φ".to_string();
    Ok(ScalarField::new(ExchangeField {
        source: field.clone(),
        pivot,
        increasing: d > 0.0,
        labels,
        domain: DomainSpec::new(lower, upper)?,
        provenance: format!("exchange[{pivot}]({})", field.provenance()),
        center: u_ref[k],
        reference,
        settings,
    }))
}

struct ExchangeField {
    source: ScalarField,
    pivot: usize,
    increasing: bool,
    labels: Vec<String>,
    domain: DomainSpec,
    provenance: String,
    center: f64,
    reference: Vec<f64>,
    settings: ScalarSolveSettings,
}

impl Field for ExchangeField {
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
    fn eval(&self, w: &[f64]) -> Result<Jet2> {
        let k = self.pivot - 1;
        let m = w.len();
        let mut u = w.to_vec();
        let g = |t: f64| {
            let mut x = w.to_vec();
            x[k] = t;
            let j = self.source.jet(&x)?;
            Ok((j.value, j.gradient[k]))
        };
        u[k] = solve_monotone(g, w[k], self.center, self.pivot, &self.settings)?;
        let jet = self.source.jet(&u)?;
        let phi_k = jet.gradient[k];
        if !(phi_k != 0.0 && (phi_k > 0.0) == self.increasing) {
            return Err(Error::MonotonicityViolation {
                pivot: self.pivot,
                derivative: phi_k,
            });
        }
        // du/dw: identity off the pivot row; the pivot row is ∇ψ.
        let grad = DVector::from_fn(m, |a, _| {
            if a == k {
                1.0 / phi_k
            } else {
                -jet.gradient[a] / phi_k
            }
        });
        let mut e = DMatrix::identity(m, m);
        for a in 0..m {
            e[(k, a)] = grad[a];
        }
        // Differentiating φ(u(w)) = w_k twice: φ_k ψ_ab + e_aᵀ φ_uu e_b = 0.
        let hess = -(e.transpose() * &jet.hessian * &e) / phi_k;
        Ok(Jet2::new(u[k], grad, hess))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{Eos, IdealPolytropicParams, PolytropicGas};

    #[test]
    fn energy_entropy_round_trip() {
        let gas = PolytropicGas::new(IdealPolytropicParams::diatomic(287.0).unwrap(), 1.0, 0.0, 300.0).unwrap();
        let u = gas.internal_energy();
        let s = exchange(&u, 2).unwrap();
        let x = [0.7, 120.0];
        let uj = u.jet(&x).unwrap();
        let sj = s.jet(&[0.7, uj.value]).unwrap();
        assert!((sj.value - 120.0).abs() < 1e-10 * 120.0);
        let (p, theta) = (-uj.gradient[0], uj.gradient[1]);
        assert!((sj.gradient[1] * theta - 1.0).abs() < 1e-12);
        assert!((sj.gradient[0] * theta / p - 1.0).abs() < 1e-12);
        let back = exchange(&s, 2).unwrap().jet(&x).unwrap();
        assert!((back.value - uj.value).abs() < 1e-10 * uj.value);
    }

    #[test]
    fn flat_pivot_is_rejected() {
        let f = crate::field::builtin::half_squared_norm(2);
        assert!(matches!(exchange(&f, 1), Err(Error::MonotonicityViolation { .. })));
    }
}
