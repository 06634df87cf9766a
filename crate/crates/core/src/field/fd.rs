//! Central finite differences: an oracle for jet correctness, independent of
//! the forward-mode arithmetic.

use nalgebra::{DMatrix, DVector};

use super::ScalarField;
use crate::error::{Error, Result};

fn default_steps(x: &[f64], h: f64) -> Vec<f64> {
    x.iter().map(|xi| h * xi.abs().max(1.0)).collect()
}

fn eval_at(field: &ScalarField, x: &[f64]) -> Result<f64> {
    field.value(x).map_err(|e| match e {
        Error::DomainViolation { coords, reason } => Error::DomainViolation {
            coords,
            reason: format!("finite-difference stencil left the domain: {reason}"),
        },
        e => e,
    })
}

/// Central-difference gradient with step `h·max(1, |x_i|)` per variable.
pub fn fd_gradient(field: &ScalarField, x: &[f64], h: f64) -> Result<DVector<f64>> {
    fd_gradient_with_steps(field, x, &default_steps(x, h))
}

pub fn fd_gradient_with_steps(field: &ScalarField, x: &[f64], steps: &[f64]) -> Result<DVector<f64>> {
    check_steps(field, x, steps)?;
    let mut g = DVector::zeros(x.len());
    let mut y = x.to_vec();
    for i in 0..x.len() {
        y[i] = x[i] + steps[i];
        let fp = eval_at(field, &y)?;
        y[i] = x[i] - steps[i];
        let fm = eval_at(field, &y)?;
        y[i] = x[i];
        g[i] = (fp - fm) / (2.0 * steps[i]);
    }
    Ok(g)
}

/// Central second-difference Hessian with step `h·max(1, |x_i|)`.
pub fn fd_hessian(field: &ScalarField, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step h = {h} must be positive")));
    }
    fd_hessian_with_steps(field, x, &default_steps(x, h))
}

pub fn fd_hessian_with_steps(field: &ScalarField, x: &[f64], steps: &[f64]) -> Result<DMatrix<f64>> {
    check_steps(field, x, steps)?;
    let n = x.len();
    let f0 = eval_at(field, x)?;
    let mut hess = DMatrix::zeros(n, n);
    let mut y = x.to_vec();
    for i in 0..n {
        let hi = steps[i];
        y[i] = x[i] + hi;
        let fp = eval_at(field, &y)?;
        y[i] = x[i] - hi;
        let fm = eval_at(field, &y)?;
        y[i] = x[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in (i + 1)..n {
            let hj = steps[j];
            let mut corner = |si: f64, sj: f64| -> Result<f64> {
                y[i] = x[i] + si * hi;
                y[j] = x[j] + sj * hj;
                let v = eval_at(field, &y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            let fpp = corner(1.0, 1.0)?;
            let fpm = corner(1.0, -1.0)?;
            let fmp = corner(-1.0, 1.0)?;
            let fmm = corner(-1.0, -1.0)?;
            let hij = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            hess[(i, j)] = hij;
            hess[(j, i)] = hij;
        }
    }
    Ok(hess)
}

fn check_steps(field: &ScalarField, x: &[f64], steps: &[f64]) -> Result<()> {
    if x.len() != field.dim() || steps.len() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: x.len().min(steps.len()),
        });
    }
    if steps.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidParameter("finite-difference steps must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::builtin::{half_squared_norm, quartic};
    use crate::field::{DomainSpec, Scalar};

    #[test]
    fn quadratic_identity() {
        let f = half_squared_norm(3);
        let h = fd_hessian(&f, &[0.3, -1.2, 4.0], 1e-4).unwrap();
        assert!((h - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-6);
    }

    #[test]
    fn quartic_curvature_at_one() {
        let h = fd_hessian(&quartic(), &[1.0], 1e-4).unwrap();
        assert!((h[(0, 0)] - 12.0).abs() / 12.0 < 1e-5);
    }

    #[test]
    fn stencil_outside_domain_is_reported() {
        let dom = DomainSpec::new(vec![0.0], vec![f64::INFINITY]).unwrap();
        let f = ScalarField::from_expr(&["x"], dom, vec![1.0], "ln", |x| x[0].ln()).unwrap();
        assert!(matches!(
            fd_hessian(&f, &[5e-5], 1e-4),
            Err(Error::DomainViolation { .. })
        ));
        assert!(fd_hessian(&f, &[1.0], 0.0).is_err());
    }
}
