use nalgebra::DVector;

use crate::error::Result;
use crate::field::{DomainSpec, Field, Jet2, Point, ScalarField};
use crate::linalg::symmetric_inverse;
use crate::solve::{solve_gradient_map, NewtonSettings};

/// Legendre transform `ψ(w) = w·u − φ(u)` with `w = φ_u(u)`.
///
/// Evaluation solves the gradient map by damped Newton from `seed`, then
/// from the source reference point. `ψ_w = u` and `ψ_ww = φ_uu⁻¹`.
pub fn legendre(field: &ScalarField, seed: &Point) -> Result<ScalarField> {
    legendre_with(
        field,
        &LegendreOptions {
            seeds: vec![seed.coords().to_vec()],
            ..Default::default()
        },
    )
}

/// Concave-sign variant `ψ(w) = φ(u) − w·u`, so `ψ_w = −u`, `ψ_ww = −φ_uu⁻¹`.
pub fn legendre_concave(field: &ScalarField, seed: &Point) -> Result<ScalarField> {
    legendre_with(
        field,
        &LegendreOptions {
            seeds: vec![seed.coords().to_vec()],
            concave: true,
            ..Default::default()
        },
    )
}

/// Options for [`legendre_with`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LegendreOptions {
    /// Newton starting points tried before the source reference point.
    pub seeds: Vec<Vec<f64>>,
    pub solver: NewtonSettings,
    pub concave: bool,
    /// Caller-asserted box containing the image of the gradient map, e.g.
    /// θ > 0 for the gradient of an internal energy.
    pub image_box: Option<(Vec<f64>, Vec<f64>)>,
}

pub fn legendre_with(field: &ScalarField, options: &LegendreOptions) -> Result<ScalarField> {
    let m = field.dim();
    let concave = options.concave;
    let settings = options.solver;
    let u_ref = field.reference_point().to_vec();
    let reference: Vec<f64> = field.jet(&u_ref)?.gradient.iter().copied().collect();
    let mut all_seeds: Vec<Vec<f64>> = options.seeds.iter().filter(|s| s.len() == m).cloned().collect();
    all_seeds.push(u_ref);
    let domain = match &options.image_box {
        Some((lo, hi)) => DomainSpec::new(lo.clone(), hi.clone())?,
        None => DomainSpec::unbounded(m),
    };
    if domain.dim() != m {
        return Err(crate::error::Error::DimensionMismatch {
            expected: m,
            got: domain.dim(),
        });
    }
    super::check_reference(&domain, &reference, "legendre")?;
    let labels = field
        .labels()
        .iter()
        .map(|l| format!("∂/∂{}", l.split(' ').next().unwrap_or(l)))
        .collect();
    let sign = if concave { "φ(u) − w·u" } else { "w·u − φ(u)" };
    Ok(ScalarField::new(LegendreField {
        source: field.clone(),
        labels,
        domain,
        provenance: format!("legendre[{sign}]({})", field.provenance()),
        reference,
        seeds: all_seeds,
        settings,
        concave,
    }))
}

struct LegendreField {
    source: ScalarField,
    labels: Vec<String>,
    domain: DomainSpec,
    provenance: String,
    reference: Vec<f64>,
    seeds: Vec<Vec<f64>>,
    settings: NewtonSettings,
    concave: bool,
}

impl Field for LegendreField {
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
        let seeds: Vec<&[f64]> = self.seeds.iter().map(Vec::as_slice).collect();
        let (u, jet) = solve_gradient_map(&self.source, w, &seeds, &self.settings)?;
        let inv = symmetric_inverse(&jet.hessian)?;
        let wu: f64 = w.iter().zip(&u).map(|(a, b)| a * b).sum();
        let u = DVector::from_vec(u);
        Ok(if self.concave {
            Jet2::new(jet.value - wu, -u, -inv)
        } else {
            Jet2::new(wu - jet.value, u, inv)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::builtin::half_squared_norm;

    #[test]
    fn quadratic_is_self_dual() {
        let f = half_squared_norm(3);
        let seed = Point::on(&f, vec![0.0; 3]).unwrap();
        let psi = legendre(&f, &seed).unwrap();
        let j = psi.jet(&[1.0, -2.0, 0.5]).unwrap();
        assert!((j.value - 2.625).abs() < 1e-14);
        assert!((j.hessian.clone() - nalgebra::DMatrix::identity(3, 3)).norm() < 1e-14);
        let c = legendre_concave(&f, &seed).unwrap().jet(&[2.0, 0.0, 0.0]).unwrap();
        assert!((c.value + 2.0).abs() < 1e-14);
        assert!((c.hessian[(0, 0)] + 1.0).abs() < 1e-14);
    }
}
