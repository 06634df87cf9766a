//! Congruence identities relating the Hessians of a field and of its
//! reciprocal or exchange transform. With the pivot moved to the front:
//!
//! * reciprocal, `w = (1/u₁, û/u₁)`: `F = [[1, 0ᵀ], [û, I]]`,
//!   `D = diag(−1/u₁, I)`, and `Dᵀ Fᵀ ψ_ww F D = u₁ φ_uu`;
//! * exchange, `w = (φ(u), û)`: `F = [[1, φ_ûᵀ], [0, I]]`,
//!   `D = diag(φ_{u₁}, I)`, and `Dᵀ Fᵀ ψ_ww F D = −φ_uu / φ_{u₁}`.
//!
//! These are computed from jets of the two fields only, so they test the
//! transform implementations rather than restate them.

use nalgebra::DMatrix;

use super::reciprocal_map;
use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Left and right sides of a congruence identity at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Congruence {
    pub lhs: DMatrix<f64>,
    pub rhs: DMatrix<f64>,
}

impl Congruence {
    /// ‖lhs − rhs‖_F / ‖rhs‖_F.
    pub fn relative_residual(&self) -> f64 {
        (&self.lhs - &self.rhs).norm() / self.rhs.norm().max(f64::MIN_POSITIVE)
    }
}

/// Permutation moving index `k` to the front, others in order.
fn front_permutation(m: usize, k: usize) -> DMatrix<f64> {
    let order: Vec<usize> = std::iter::once(k).chain((0..m).filter(|&i| i != k)).collect();
    DMatrix::from_fn(m, m, |i, j| if order[i] == j { 1.0 } else { 0.0 })
}

fn check_pivot(m: usize, pivot: usize) -> Result<usize> {
    if pivot == 0 || pivot > m {
        Err(Error::InvalidParameter(format!("pivot {pivot} outside 1..={m}")))
    } else {
        Ok(pivot - 1)
    }
}

/// The reciprocal identity for `psi = reciprocal(phi, pivot)` at source point `u`.
pub fn reciprocal_congruence(phi: &ScalarField, psi: &ScalarField, u: &[f64], pivot: usize) -> Result<Congruence> {
    let m = phi.dim();
    let k = check_pivot(m, pivot)?;
    let w = reciprocal_map(u, pivot);
    let p = front_permutation(m, k);
    let phi_uu = &p * phi.jet(u)?.hessian * p.transpose();
    let psi_ww = &p * psi.jet(&w)?.hessian * p.transpose();
    let pu = &p * nalgebra::DVector::from_column_slice(u);
    let u1 = pu[0];
    let mut f = DMatrix::identity(m, m);
    for i in 1..m {
        f[(i, 0)] = pu[i];
    }
    let mut d = DMatrix::identity(m, m);
    d[(0, 0)] = -1.0 / u1;
    let fd = f * d;
    Ok(Congruence {
        lhs: fd.transpose() * psi_ww * &fd,
        rhs: phi_uu * u1,
    })
}

/// The exchange identity for `psi = exchange(phi, pivot)` at source point `u`.
pub fn exchange_congruence(phi: &ScalarField, psi: &ScalarField, u: &[f64], pivot: usize) -> Result<Congruence> {
    let m = phi.dim();
    let k = check_pivot(m, pivot)?;
    let jet = phi.jet(u)?;
    let mut w = u.to_vec();
    w[k] = jet.value;
    let p = front_permutation(m, k);
    let phi_uu = &p * &jet.hessian * p.transpose();
    let psi_ww = &p * psi.jet(&w)?.hessian * p.transpose();
    let grad = &p * &jet.gradient;
    let mut f = DMatrix::identity(m, m);
    for j in 1..m {
        f[(0, j)] = grad[j];
    }
    let mut d = DMatrix::identity(m, m);
    d[(0, 0)] = grad[0];
    let fd = f * d;
    Ok(Congruence {
        lhs: fd.transpose() * psi_ww * &fd,
        rhs: phi_uu * (-1.0 / grad[0]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{Eos, IdealPolytropicParams, PolytropicGas};
    use crate::transforms::{add_kinetic, exchange, reciprocal};

    #[test]
    fn both_identities_on_polytropic_fields() {
        let gas = PolytropicGas::new(IdealPolytropicParams::diatomic(287.0).unwrap(), 1.0, 0.0, 300.0).unwrap();
        let e = add_kinetic(&gas.internal_energy(), 2).unwrap();
        let rec = reciprocal(&e, 1).unwrap();
        let x = [0.8, 40.0, 12.0, -7.0];
        assert!(reciprocal_congruence(&e, &rec, &x, 1).unwrap().relative_residual() < 1e-12);
        let ex = exchange(&e, 2).unwrap();
        assert!(exchange_congruence(&e, &ex, &x, 2).unwrap().relative_residual() < 1e-12);
    }
}
