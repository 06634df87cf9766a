//! Equations of state and their fundamental potentials.
//!
//! Every family exposes closed-form pressure and temperature in `(v, s)`,
//! the thermal law `p(v, θ)`, the caloric law `u(v, θ)`, and the
//! fundamental equation `u(v, s)` as a [`ScalarField`]. The Gibbs relation
//! `du = θ ds − p dv` ties the closed forms to the jet of `u`; the stability
//! module checks it rather than assuming it.

mod polytropic;
mod tait;
mod vdw;

use std::fmt;

pub use polytropic::{ideal_pressure, polytropic_pressure, IdealPolytropicParams, PolytropicGas};
pub use tait::{TaitEos, TaitParams};
pub use vdw::{vdw_internal_energy, vdw_pressure, VanDerWaals, VanDerWaalsParams};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::solve::{solve_monotone, ScalarSolveSettings};
use crate::transforms;

pub const V_LABEL: &str = "v [m^3/kg]";
pub const S_LABEL: &str = "s [J/(kg K)]";
pub const THETA_LABEL: &str = "θ [K]";
pub const U_LABEL: &str = "u [J/kg]";

/// Pressure and its partial derivatives in `(v, u)` at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureJet {
    pub p: f64,
    /// ∂p/∂v at constant u.
    pub p_v: f64,
    /// ∂p/∂u at constant v.
    pub p_u: f64,
    pub theta: f64,
    pub s: f64,
}

/// A single-component equation of state.
pub trait Eos: Send + Sync + fmt::Debug {
    /// Short family name: `polytropic`, `van-der-waals` or `tait`.
    fn family(&self) -> &'static str;

    /// Fundamental equation u(v, s).
    fn internal_energy(&self) -> ScalarField;

    /// Closed-form p(v, s) as a field, independent of the jet of u.
    fn pressure_vs(&self) -> ScalarField;

    /// Closed-form θ(v, s) as a field.
    fn temperature_vs(&self) -> ScalarField;

    /// Thermal equation of state p(v, θ).
    fn thermal(&self) -> ScalarField;

    /// Caloric equation of state u(v, θ).
    fn caloric(&self) -> ScalarField;

    /// Specific entropy at `(v, θ)` in closed form.
    fn entropy_vt(&self, v: f64, theta: f64) -> Result<f64>;

    /// Closed forms of second derivatives of u(v, s) worth naming in reports,
    /// keyed by `U_VV`, `U_SS` or `U_VS`.
    fn closed_forms(&self) -> Vec<(&'static str, &'static str)> {
        Vec::new()
    }

    /// The state `(v, s)` with temperature `theta`.
    fn state_from_vt(&self, v: f64, theta: f64) -> Result<[f64; 2]> {
        Ok([v, self.entropy_vt(v, theta)?])
    }

    fn pressure(&self, v: f64, s: f64) -> Result<f64> {
        self.pressure_vs().value(&[v, s])
    }

    fn temperature(&self, v: f64, s: f64) -> Result<f64> {
        self.temperature_vs().value(&[v, s])
    }

    /// Specific entropy s(v, u), by exchanging u and s.
    fn entropy(&self) -> Result<ScalarField> {
        exchange_to_s_of_vu(&self.internal_energy())
    }

    /// Pressure in terms of `(v, u)`: solves u(v, s) = u for s, then
    /// differentiates p = −u_v along constant u and constant v.
    fn pressure_from_vu(&self, v: f64, u: f64) -> Result<PressureJet> {
        let field = self.internal_energy();
        let start = field.reference_point()[1];
        let g = |s: f64| {
            let j = field.jet(&[v, s])?;
            Ok((j.value, j.gradient[1]))
        };
        let s = solve_monotone(g, u, start, 2, &ScalarSolveSettings::default())?;
        let j = field.jet(&[v, s])?;
        let p = -j.gradient[0];
        let theta = j.gradient[1];
        if !(theta > 0.0) {
            return Err(Error::MonotonicityViolation {
                pivot: 2,
                derivative: theta,
            });
        }
        let (u_vv, u_vs) = (j.hessian[(0, 0)], j.hessian[(0, 1)]);
        Ok(PressureJet {
            p,
            p_v: -u_vv - u_vs * (p / theta),
            p_u: -u_vs / theta,
            theta,
            s,
        })
    }
}

/// s(v, u) from u(v, s): the exchange with pivot s.
pub fn exchange_to_s_of_vu(u: &ScalarField) -> Result<ScalarField> {
    transforms::exchange(u, 2)
}

/// Relative distance `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub(crate) fn require_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} must be positive and finite")))
    }
}
