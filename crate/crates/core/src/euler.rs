//! Energy and entropy densities of the Euler equations in conserved
//! variables, main-field variables, generating potentials of the symmetric
//! form, and the relative energy.
//!
//! Conserved variables are ordered `u = (ρ, M̄, Ē)`. The convex entropy is
//! `Φ = −S̄` and the main field is `w = Φ_u = ((g − |v̄|²/2)/θ, v̄/θ, −1/θ)`.
//! Entropy fluxes are `Ψ^i = v_i Φ`; fluxes are the standard compressible
//! Euler fluxes with the pressure taken from the EOS.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::convexity::{classify_with, ClassifyPolicy, DefinitenessClass};
use crate::eos::Eos;
use crate::error::{Error, Result};
use crate::field::{Dual, Scalar, ScalarField};
use crate::linalg::symmetric_inverse;
use crate::transforms::{self, named_chain, run_chain, ChainReport, LegendreOptions};

fn check_d(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("space dimension {d} must be 1, 2 or 3")))
    }
}

/// A state in conserved variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservedState {
    pub rho: f64,
    pub momentum: Vec<f64>,
    pub energy: f64,
}

impl ConservedState {
    pub fn new(rho: f64, momentum: Vec<f64>, energy: f64) -> Result<Self> {
        let s = ConservedState { rho, momentum, energy };
        s.validate()?;
        Ok(s)
    }

    /// Finite, with positive density. Admissibility of the internal energy
    /// is a property of the EOS and is checked by its fields.
    pub fn validate(&self) -> Result<()> {
        check_d(self.momentum.len())?;
        let coords = self.to_vec();
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "conserved state".into(),
                coords,
            });
        }
        if !(self.rho > 0.0) {
            return Err(Error::domain(&coords, "density must be positive"));
        }
        Ok(())
    }

    /// From `(ρ, M̄, Ē)`.
    pub fn from_slice(u: &[f64]) -> Result<Self> {
        if u.len() < 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: u.len(),
            });
        }
        Self::new(u[0], u[1..u.len() - 1].to_vec(), u[u.len() - 1])
    }

    /// From density, temperature and velocity, using the EOS.
    pub fn from_primitive(eos: &dyn Eos, rho: f64, theta: f64, velocity: &[f64]) -> Result<Self> {
        check_d(velocity.len())?;
        if !(rho > 0.0) {
            return Err(Error::domain(&[rho, theta], "density must be positive"));
        }
        let v = 1.0 / rho;
        let u = eos.caloric().value(&[v, theta])?;
        let k: f64 = velocity.iter().map(|x| x * x).sum::<f64>() / 2.0;
        Self::new(rho, velocity.iter().map(|x| rho * x).collect(), rho * (u + k))
    }

    pub fn dim(&self) -> usize {
        self.momentum.len()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        std::iter::once(self.rho)
            .chain(self.momentum.iter().copied())
            .chain(std::iter::once(self.energy))
            .collect()
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.momentum.iter().map(|m| m / self.rho).collect()
    }

    pub fn kinetic_energy_density(&self) -> f64 {
        self.momentum.iter().map(|m| m * m).sum::<f64>() / (2.0 * self.rho)
    }

    pub fn internal_energy_density(&self) -> f64 {
        self.energy - self.kinetic_energy_density()
    }

    /// Specific internal energy `u = (Ē − |M̄|²/(2ρ))/ρ`.
    pub fn specific_internal_energy(&self) -> f64 {
        self.internal_energy_density() / self.rho
    }

    /// Specific coordinates `(v, s, v̄)`; `s` solves `u(v, s) = u`.
    pub fn specific(&self, eos: &dyn Eos) -> Result<Vec<f64>> {
        let v = 1.0 / self.rho;
        let s = eos.pressure_from_vu(v, self.specific_internal_energy())?.s;
        Ok([v, s].into_iter().chain(self.velocity()).collect())
    }

    /// Density coordinates `(ρ, M̄, S̄)`.
    pub fn density_coords(&self, eos: &dyn Eos) -> Result<Vec<f64>> {
        let x = self.specific(eos)?;
        Ok(std::iter::once(self.rho)
            .chain(self.momentum.iter().copied())
            .chain(std::iter::once(self.rho * x[1]))
            .collect())
    }
}

/// Internal energy density `Ū(ρ, S̄) = ρ u(1/ρ, S̄/ρ)`.
pub fn internal_energy_density(eos: &dyn Eos) -> Result<ScalarField> {
    transforms::reciprocal(&eos.internal_energy(), 1)
}

fn chain_final(eos: &dyn Eos, name: &str, d: usize) -> Result<ScalarField> {
    check_d(d)?;
    let chain = named_chain(name, d).ok_or_else(|| Error::InvalidParameter(format!("no chain {name}")))?;
    Ok(chain.build(&eos.internal_energy())?.pop().expect("chain has stages"))
}

/// Total energy density `Ē(ρ, S̄, M̄) = ρ e(1/ρ, S̄/ρ, M̄/ρ)`.
pub fn energy_density_field(eos: &dyn Eos, d: usize) -> Result<ScalarField> {
    check_d(d)?;
    let e = transforms::add_kinetic(&eos.internal_energy(), d)?;
    transforms::reciprocal(&e, 1)
}

/// Total energy density in the order `(ρ, M̄, S̄)`.
pub fn energy_density_ordered(eos: &dyn Eos, d: usize) -> Result<ScalarField> {
    chain_final(eos, "energy-density", d)
}

/// Entropy density `S̄(ρ, M̄, Ē)` by exchanging `Ē` and `S̄` in the energy density.
pub fn entropy_density_conserved(eos: &dyn Eos, d: usize) -> Result<ScalarField> {
    chain_final(eos, "entropy-density", d)
}

/// Both constructions of `S̄(ρ, M̄, Ē)`: exchange after the reciprocal map,
/// and reciprocal map of the specific entropy `s(v, e, v̄)`.
pub fn entropy_density_routes(eos: &dyn Eos, d: usize) -> Result<(ScalarField, ScalarField)> {
    Ok((
        chain_final(eos, "entropy-density", d)?,
        chain_final(eos, "entropy-density-specific", d)?,
    ))
}

/// Closed-form Hessian of `Ē^kin(ρ, M̄) = |M̄|²/(2ρ)` and its factorization
/// `R Δ Rᵀ` with unit upper-triangular `R` (first row `(1, −M̄/ρ)`) and
/// `Δ = diag(0, 1/ρ, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticHessian {
    pub hessian: DMatrix<f64>,
    pub upper: DMatrix<f64>,
    pub diagonal: DVector<f64>,
    /// `‖R Δ Rᵀ − H‖_F / ‖H‖_F`.
    pub factorization_residual: f64,
}

pub fn kinetic_density_hessian(rho: f64, momentum: &[f64]) -> Result<KineticHessian> {
    let n = momentum.len() + 1;
    if !(rho > 0.0) {
        let coords: Vec<f64> = std::iter::once(rho).chain(momentum.iter().copied()).collect();
        return Err(Error::domain(&coords, "density must be positive"));
    }
    let m2: f64 = momentum.iter().map(|m| m * m).sum();
    let h = DMatrix::from_fn(n, n, |i, j| match (i, j) {
        (0, 0) => m2 / rho.powi(3),
        (0, j) => -momentum[j - 1] / (rho * rho),
        (i, 0) => -momentum[i - 1] / (rho * rho),
        (i, j) if i == j => 1.0 / rho,
        _ => 0.0,
    });
    let r = DMatrix::from_fn(n, n, |i, j| match (i, j) {
        _ if i == j => 1.0,
        (0, j) => -momentum[j - 1] / rho,
        _ => 0.0,
    });
    let diag = DVector::from_fn(n, |i, _| if i == 0 { 0.0 } else { 1.0 / rho });
    let prod = &r * DMatrix::from_diagonal(&diag) * r.transpose();
    let residual = (&prod - &h).norm() / h.norm().max(f64::MIN_POSITIVE);
    Ok(KineticHessian {
        hessian: h,
        upper: r,
        diagonal: diag,
        factorization_residual: residual,
    })
}

/// Euler flux in direction `i` (0-based) with its Jacobian `A^i = ∂f^i/∂u`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxJet {
    pub flux: DVector<f64>,
    pub jacobian: DMatrix<f64>,
    pub pressure: f64,
}

fn flux_components<T: Scalar>(u: &[T], p: T, i: usize) -> Vec<T> {
    let n = u.len();
    let rho = u[0];
    let mi = u[1 + i];
    let vi = mi / rho;
    let mut f = Vec::with_capacity(n);
    f.push(mi);
    for j in 0..n - 2 {
        let mut c = u[1 + j] * vi;
        if j == i {
            c = c + p;
        }
        f.push(c);
    }
    f.push((u[n - 1] + p) * vi);
    f
}

/// The flux and its Jacobian by forward differentiation. The pressure
/// derivatives come from `p(v, u)` through `v = 1/ρ`, `u = (Ē − |M̄|²/(2ρ))/ρ`.
pub fn euler_flux(state: &ConservedState, eos: &dyn Eos, i: usize) -> Result<FluxJet> {
    state.validate()?;
    let d = state.dim();
    if i >= d {
        return Err(Error::InvalidParameter(format!("direction {i} outside 0..{d}")));
    }
    let x = state.to_vec();
    let n = x.len();
    let vars: Vec<Dual> = (0..n).map(|k| Dual::variable(n, k, x[k])).collect();
    let rho = vars[0];
    let mut kin = vars[0].constant_like(0.0);
    for m in &vars[1..n - 1] {
        kin = kin + *m * *m;
    }
    let v = rho.recip();
    let e = (vars[n - 1] - kin / (rho * 2.0)) / rho;
    let pj = eos.pressure_from_vu(v.value(), e.value())?;
    let grad: Vec<f64> = (0..n).map(|k| pj.p_v * v.grad()[k] + pj.p_u * e.grad()[k]).collect();
    let p = Dual::from_parts(pj.p, &grad);
    let f = flux_components(&vars, p, i);
    Ok(FluxJet {
        flux: DVector::from_iterator(n, f.iter().map(Scalar::value)),
        jacobian: DMatrix::from_fn(n, n, |r, c| f[r].grad()[c]),
        pressure: pj.p,
    })
}

/// Fields of the Euler system for one EOS and dimension, built once.
#[derive(Clone)]
pub struct EulerModel {
    eos: Arc<dyn Eos>,
    d: usize,
    /// `Ē(ρ, M̄, S̄)`.
    pub energy: ScalarField,
    /// `S̄(ρ, M̄, Ē)`.
    pub entropy: ScalarField,
    /// `Φ = −S̄`.
    pub phi: ScalarField,
    /// `L(w) = w·u − Φ(u)`.
    pub potential: ScalarField,
}

impl std::fmt::Debug for EulerModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EulerModel").field("eos", &self.eos).field("d", &self.d).finish()
    }
}

impl EulerModel {
    pub fn new(eos: Arc<dyn Eos>, d: usize) -> Result<Self> {
        let energy = energy_density_ordered(eos.as_ref(), d)?;
        let entropy = entropy_density_conserved(eos.as_ref(), d)?;
        let phi = transforms::scale(&entropy, -1.0)?;
        let potential = transforms::legendre_with(&phi, &LegendreOptions::default())?;
        Ok(EulerModel {
            eos,
            d,
            energy,
            entropy,
            phi,
            potential,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn eos(&self) -> &dyn Eos {
        self.eos.as_ref()
    }

    fn check_state(&self, state: &ConservedState) -> Result<()> {
        state.validate()?;
        if state.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: state.dim(),
            });
        }
        Ok(())
    }

    /// Main field `w = Φ_u(u)`.
    pub fn main_field(&self, state: &ConservedState) -> Result<Vec<f64>> {
        self.check_state(state)?;
        Ok(self.phi.jet(&state.to_vec())?.gradient.iter().copied().collect())
    }

    /// Value, gradient and Hessian of `Ψ^i = v_i Φ`.
    fn entropy_flux(&self, x: &[f64], phi: &crate::field::Jet2, i: usize) -> (f64, DVector<f64>) {
        let n = x.len();
        let vi = x[1 + i] / x[0];
        let mut dvi = DVector::zeros(n);
        dvi[0] = -x[1 + i] / (x[0] * x[0]);
        dvi[1 + i] = 1.0 / x[0];
        (vi * phi.value, &phi.gradient * vi + dvi * phi.value)
    }
}

/// Residuals of `(Ψ^i_u)ᵀ = Φ_uᵀ A^i` per probe and direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairConsistency {
    /// `residuals[k][i]` for probe `k`, direction `i`.
    pub residuals: Vec<Vec<f64>>,
    pub worst: f64,
}

/// Check the entropy pair `(Φ, Ψ^i)` with `Ψ^i = factor·v_i Φ`, factor 1 being
/// the correct pair.
pub fn entropy_pair_consistency_with(
    model: &EulerModel,
    probes: &[ConservedState],
    factor: f64,
) -> Result<PairConsistency> {
    use rayon::prelude::*;
    let residuals: Vec<Vec<f64>> = probes
        .par_iter()
        .map(|s| {
            model.check_state(s)?;
            let x = s.to_vec();
            let phi = model.phi.jet(&x)?;
            (0..model.d)
                .map(|i| {
                    let a = euler_flux(s, model.eos(), i)?.jacobian;
                    let lhs = model.entropy_flux(&x, &phi, i).1 * factor;
                    let rhs = a.transpose() * &phi.gradient;
                    Ok((lhs - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let worst = residuals.iter().flatten().fold(0.0f64, |m, x| m.max(*x));
    Ok(PairConsistency { residuals, worst })
}

pub fn entropy_pair_consistency(model: &EulerModel, probes: &[ConservedState]) -> Result<PairConsistency> {
    entropy_pair_consistency_with(model, probes, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizerDiagnostics {
    /// Relative asymmetry of `L_ww` (from the implicit solve, unsymmetrized).
    pub l_ww_asymmetry: f64,
    /// Relative asymmetry of each `L^i_ww = A^i u_w`.
    pub flux_asymmetry: Vec<f64>,
    pub l_ww_class: DefinitenessClass,
    pub l_ww_margin: f64,
    /// `‖L_ww Φ_uu − I‖_F`.
    pub legendre_identity: f64,
    /// The same with both matrices in Jacobi-scaled variables,
    /// `‖D⁻¹ L_ww Φ_uu D − I‖_F` with `D_jj = |Φ_jj|^{-1/2}`.
    pub legendre_identity_scaled: f64,
    /// Relative distance between `Φ_uu⁻¹` and the Hessian of the Legendre field.
    pub two_path_agreement: f64,
    /// `‖L_w − u‖/‖u‖` with `L_w` from the Legendre field.
    pub gradient_residual: f64,
    /// `‖L^i_w − f^i‖/‖f^i‖`.
    pub flux_gradient_residual: Vec<f64>,
    /// `|L^i − v_i L| / |L|`.
    pub flux_potential_residual: Vec<f64>,
}

/// The symmetric form at one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizedSystem {
    pub state: Vec<f64>,
    pub w: Vec<f64>,
    pub l: f64,
    pub l_flux: Vec<f64>,
    pub l_ww: Vec<Vec<f64>>,
    pub l_flux_ww: Vec<Vec<Vec<f64>>>,
    pub diagnostics: SymmetrizerDiagnostics,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).norm() / m.norm().max(f64::MIN_POSITIVE)
}

pub fn build_symmetrizer(model: &EulerModel, state: &ConservedState) -> Result<SymmetrizedSystem> {
    model.check_state(state)?;
    let x = state.to_vec();
    let n = x.len();
    let u = DVector::from_column_slice(&x);
    let phi = model.phi.jet(&x)?;
    let w = phi.gradient.clone();
    let l = w.dot(&u) - phi.value;
    let inv = symmetric_inverse(&phi.hessian)?;
    let lj = model.potential.jet(w.as_slice())?;
    let l_ww = lj.hessian.clone();
    let verdict = classify_with(&l_ww, 0.0, ClassifyPolicy::Equilibrated)?;
    let mut l_flux = Vec::new();
    let mut l_flux_ww = Vec::new();
    let mut flux_asym = Vec::new();
    let mut flux_grad = Vec::new();
    let mut flux_pot = Vec::new();
    for i in 0..model.d {
        let fj = euler_flux(state, model.eos(), i)?;
        let (psi, psi_u) = model.entropy_flux(&x, &phi, i);
        let li = w.dot(&fj.flux) - psi;
        let lw = &fj.flux + &inv * (fj.jacobian.transpose() * &w - psi_u);
        let lww = &fj.jacobian * &inv;
        flux_grad.push((&lw - &fj.flux).norm() / fj.flux.norm().max(f64::MIN_POSITIVE));
        flux_pot.push((li - x[1 + i] / x[0] * l).abs() / l.abs().max(f64::MIN_POSITIVE));
        flux_asym.push(asymmetry(&lww));
        l_flux.push(li);
        l_flux_ww.push(rows(&lww));
    }
    let diagnostics = SymmetrizerDiagnostics {
        l_ww_asymmetry: asymmetry(&inv),
        flux_asymmetry: flux_asym,
        l_ww_class: verdict.class,
        l_ww_margin: verdict.margin,
        legendre_identity: (&l_ww * &phi.hessian - DMatrix::identity(n, n)).norm(),
        legendre_identity_scaled: {
            let dd = crate::linalg::jacobi_scaling(&phi.hessian);
            let prod = &l_ww * &phi.hessian;
            DMatrix::from_fn(n, n, |i, j| prod[(i, j)] * dd[j] / dd[i] - if i == j { 1.0 } else { 0.0 }).norm()
        },
        two_path_agreement: (&l_ww - &inv).norm() / inv.norm(),
        gradient_residual: (&lj.gradient - &u).norm() / u.norm(),
        flux_gradient_residual: flux_grad,
        flux_potential_residual: flux_pot,
    };
    Ok(SymmetrizedSystem {
        state: x,
        w: w.iter().copied().collect(),
        l,
        l_flux,
        l_ww: rows(&l_ww),
        l_flux_ww,
        diagnostics,
    })
}

/// Comparison of the chain-built potential with the Legendre-built one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GodunovComparison {
    pub chain: ChainReport,
    /// Worst `|L_chain − L_legendre| / |L_legendre|`.
    pub value_residual: f64,
    /// Worst relative distance between the chain's final variables and `Φ_u`.
    pub main_field_residual: f64,
    /// Worst relative distance of the `−1/θ` slot from `−1/θ(state)`.
    pub theta_slot_residual: f64,
}

/// Run the `godunov` chain from `u(v,s)` at the given states and compare
/// with `L = w·u − Φ(u)`.
pub fn godunov_chain(model: &EulerModel, states: &[ConservedState]) -> Result<GodunovComparison> {
    let d = model.d;
    let eos = model.eos();
    let chain = named_chain("godunov", d).expect("built-in chain");
    let probes: Vec<Vec<f64>> = states.iter().map(|s| s.specific(eos)).collect::<Result<_>>()?;
    let report = run_chain(&chain, &eos.internal_energy(), &probes)?;
    let last = report.last();
    let mut value_residual = 0.0f64;
    let mut field_residual = 0.0f64;
    let mut theta_residual = 0.0f64;
    for (k, s) in states.iter().enumerate() {
        let x = s.to_vec();
        let phi = model.phi.jet(&x)?;
        let w = &phi.gradient;
        let l = w.dot(&DVector::from_column_slice(&x)) - phi.value;
        value_residual = value_residual.max((last.values[k] - l).abs() / l.abs());
        let wc = DVector::from_column_slice(&last.points[k]);
        field_residual = field_residual.max((&wc - w).norm() / w.norm());
        let theta = eos.temperature(probes[k][0], probes[k][1])?;
        let slot = last.points[k][d + 1];
        theta_residual = theta_residual.max((slot + 1.0 / theta).abs() * theta);
    }
    Ok(GodunovComparison {
        chain: report,
        value_residual,
        main_field_residual: field_residual,
        theta_slot_residual: theta_residual,
    })
}

/// Bregman distance `φ(u1) − φ(u2) − φ_u(u2)·(u1 − u2)`.
pub fn bregman(field: &ScalarField, u1: &[f64], u2: &[f64]) -> Result<f64> {
    let a = field.value(u1)?;
    let j = field.jet(u2)?;
    let lin: f64 = j.gradient.iter().zip(u1.iter().zip(u2)).map(|(g, (x, y))| g * (x - y)).sum();
    Ok(a - j.value - lin)
}

/// Relative energy `R_E(u1|u2)` of the total energy density in `(ρ, M̄, S̄)`.
pub fn relative_energy(eos: &dyn Eos, d: usize, u1: &[f64], u2: &[f64]) -> Result<f64> {
    bregman(&energy_density_ordered(eos, d)?, u1, u2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{IdealPolytropicParams, PolytropicGas};

    fn gas() -> Arc<dyn Eos> {
        Arc::new(PolytropicGas::new(IdealPolytropicParams::diatomic(287.0).unwrap(), 1.0, 0.0, 300.0).unwrap())
    }

    fn state(eos: &dyn Eos) -> ConservedState {
        ConservedState::from_primitive(eos, 1.2, 400.0, &[30.0, -20.0, 5.0]).unwrap()
    }

    #[test]
    fn kinetic_hessian_closed_form() {
        let k = kinetic_density_hessian(1.0, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(k.hessian, DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 1.0, 1.0])));
        let k = kinetic_density_hessian(2.0, &[1.0, -3.0, 0.5]).unwrap();
        assert!(k.factorization_residual < 1e-15);
        assert!(kinetic_density_hessian(0.0, &[1.0]).is_err());
    }

    #[test]
    fn stationary_flux_and_mass_component() {
        let eos = gas();
        let s = ConservedState::from_primitive(eos.as_ref(), 1.0, 300.0, &[0.0, 0.0]).unwrap();
        let f = euler_flux(&s, eos.as_ref(), 1).unwrap();
        let p = 287.0 * 300.0;
        assert_eq!(f.flux[0], 0.0);
        assert_eq!(f.flux[1], 0.0);
        assert!((f.flux[2] - p).abs() < 1e-9 * p);
        assert_eq!(f.flux[3], 0.0);
    }

    #[test]
    fn one_dimensional_wave_speeds() {
        let eos = gas();
        let s = ConservedState::from_primitive(eos.as_ref(), 0.8, 350.0, &[40.0]).unwrap();
        let f = euler_flux(&s, eos.as_ref(), 0).unwrap();
        let mut ev: Vec<f64> = f.jacobian.clone().complex_eigenvalues().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        let c = (1.4 * f.pressure / 0.8).sqrt();
        for (a, b) in ev.iter().zip([40.0 - c, 40.0, 40.0 + c]) {
            assert!((a - b).abs() < 1e-8 * c, "{ev:?}");
        }
    }

    #[test]
    fn main_field_and_symmetrizer() {
        let eos = gas();
        let model = EulerModel::new(eos.clone(), 3).unwrap();
        let s = state(eos.as_ref());
        let w = model.main_field(&s).unwrap();
        assert!((w[4] + 1.0 / 400.0).abs() < 1e-12 / 400.0);
        assert!((w[1] - 30.0 / 400.0).abs() < 1e-12);
        let sys = build_symmetrizer(&model, &s).unwrap();
        let dg = &sys.diagnostics;
        assert_eq!(dg.l_ww_class, DefinitenessClass::PositiveDefinite);
        assert!(dg.gradient_residual < 1e-9, "{dg:?}");
        assert!(dg.flux_asymmetry.iter().all(|a| *a < 1e-9), "{dg:?}");
        assert!(dg.flux_gradient_residual.iter().all(|a| *a < 1e-9), "{dg:?}");
        assert!(dg.flux_potential_residual.iter().all(|a| *a < 1e-9), "{dg:?}");
        assert!(dg.legendre_identity_scaled < 1e-8, "{dg:?}");
        let ok = entropy_pair_consistency(&model, std::slice::from_ref(&s)).unwrap();
        assert!(ok.worst < 1e-9, "{ok:?}");
        let bad = entropy_pair_consistency_with(&model, &[s], 2.0).unwrap();
        assert!(bad.worst > 0.1);
    }

    #[test]
    fn godunov_potential_matches_legendre() {
        let eos = gas();
        let model = EulerModel::new(eos.clone(), 2).unwrap();
        let states = vec![
            ConservedState::from_primitive(eos.as_ref(), 1.2, 400.0, &[30.0, -20.0]).unwrap(),
            ConservedState::from_primitive(eos.as_ref(), 0.3, 120.0, &[-2.0, 1.0]).unwrap(),
        ];
        let g = godunov_chain(&model, &states).unwrap();
        assert!(g.chain.passed);
        assert!(g.value_residual < 1e-8, "{g:?}");
        assert!(g.main_field_residual < 1e-8, "{g:?}");
        assert!(g.theta_slot_residual < 1e-12);
    }

    #[test]
    fn entropy_routes_agree_and_energy_decomposes() {
        let eos = gas();
        let (a, b) = entropy_density_routes(eos.as_ref(), 3).unwrap();
        let x = state(eos.as_ref()).to_vec();
        let (ja, jb) = (a.jet(&x).unwrap(), b.jet(&x).unwrap());
        assert!((ja.value - jb.value).abs() < 1e-12 * ja.value.abs());
        assert!((&ja.hessian - &jb.hessian).norm() < 1e-9 * ja.hessian.norm());
        let e = energy_density_field(eos.as_ref(), 2).unwrap();
        let ubar = internal_energy_density(eos.as_ref()).unwrap();
        let y = [1.5, 30.0, 4.0, -2.0];
        let kin = (16.0 + 4.0) / 3.0;
        let lhs = e.value(&y).unwrap();
        assert!((lhs - ubar.value(&y[..2]).unwrap() - kin).abs() < 1e-12 * lhs.abs());
    }

    #[test]
    fn relative_energy_properties() {
        let eos = gas();
        let s1 = state(eos.as_ref()).density_coords(eos.as_ref()).unwrap();
        let s2 = ConservedState::from_primitive(eos.as_ref(), 0.5, 700.0, &[1.0, 2.0, 3.0])
            .unwrap()
            .density_coords(eos.as_ref())
            .unwrap();
        assert!(relative_energy(eos.as_ref(), 3, &s1, &s2).unwrap() > 0.0);
        assert_eq!(relative_energy(eos.as_ref(), 3, &s1, &s1).unwrap(), 0.0);
        let q = crate::field::builtin::half_squared_norm(2);
        let r = bregman(&q, &[1.0, 2.0], &[-1.0, 0.5]).unwrap();
        assert!((r - 0.5 * (4.0 + 2.25)).abs() < 1e-15);
    }
}
