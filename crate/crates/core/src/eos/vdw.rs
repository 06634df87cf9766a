use serde::{Deserialize, Serialize};

use super::{require_positive, Eos, S_LABEL, THETA_LABEL, V_LABEL};
use crate::error::{Error, Result};
use crate::field::{strictly_above, DomainSpec, Hyper, Scalar, ScalarField};

/// Van der Waals constants with constant isochoric heat capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VanDerWaalsParams {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub cv: f64,
}

impl VanDerWaalsParams {
    pub fn new(a: f64, b: f64, r: f64, cv: f64) -> Result<Self> {
        let p = VanDerWaalsParams { a, b, r, cv };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("a", self.a)?;
        require_positive("b", self.b)?;
        require_positive("R", self.r)?;
        require_positive("c_v", self.cv)
    }

    /// Critical point `(v_c, θ_c) = (3b, 8a/(27 R b))`.
    pub fn critical_point(&self) -> (f64, f64) {
        (3.0 * self.b, 8.0 * self.a / (27.0 * self.r * self.b))
    }
}

fn check_vt(b: f64, v: f64, theta: f64) -> Result<()> {
    if !strictly_above(v, b) || !(theta > 0.0) {
        return Err(Error::domain(&[v, theta], format!("v > b = {b} and θ > 0")));
    }
    Ok(())
}

/// Thermal law `p = Rθ/(v − b) − a/v²`. The value may be negative.
///
/// Unlike the parameter constructor this accepts `a = 0` or `b = 0`.
pub fn vdw_pressure(params: &VanDerWaalsParams, v: f64, theta: f64) -> Result<f64> {
    check_vt(params.b, v, theta)?;
    Ok(params.r * theta / (v - params.b) - params.a / (v * v))
}

/// Caloric law `u = −a/v + c_v θ`.
pub fn vdw_internal_energy(params: &VanDerWaalsParams, v: f64, theta: f64) -> Result<f64> {
    check_vt(params.b, v, theta)?;
    Ok(-params.a / v + params.cv * theta)
}

/// Van der Waals fluid anchored at `(v0, s0, θ0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VanDerWaals {
    pub params: VanDerWaalsParams,
    pub v0: f64,
    pub s0: f64,
    pub theta0: f64,
}

impl VanDerWaals {
    pub fn new(params: VanDerWaalsParams, v0: f64, s0: f64, theta0: f64) -> Result<Self> {
        params.validate()?;
        if !strictly_above(v0, params.b) {
            return Err(Error::InvalidParameter(format!("v0 = {v0} must exceed b = {}", params.b)));
        }
        require_positive("theta0", theta0)?;
        if !s0.is_finite() {
            return Err(Error::InvalidParameter("s0 must be finite".into()));
        }
        Ok(VanDerWaals {
            params,
            v0,
            s0,
            theta0,
        })
    }

    /// θ(v, s) = θ0 exp((s − s0)/c_v) ((v0 − b)/(v − b))^(R/c_v).
    pub fn theta_vs<T: Scalar>(&self, v: T, s: T) -> T {
        let VanDerWaalsParams { b, r, cv, .. } = self.params;
        ((s - self.s0) / cv).exp() * ((v - b).recip() * (self.v0 - b)).powf(r / cv) * self.theta0
    }

    pub fn u_vs<T: Scalar>(&self, v: T, s: T) -> T {
        self.theta_vs(v, s) * self.params.cv - v.recip() * self.params.a
    }

    pub fn p_vt<T: Scalar>(&self, v: T, theta: T) -> T {
        let VanDerWaalsParams { a, b, r, .. } = self.params;
        theta * r / (v - b) - (v * v).recip() * a
    }

    pub fn u_vt<T: Scalar>(&self, v: T, theta: T) -> T {
        theta * self.params.cv - v.recip() * self.params.a
    }

    pub fn p_vs<T: Scalar>(&self, v: T, s: T) -> T {
        self.p_vt(v, self.theta_vs(v, s))
    }

    pub fn s_vt<T: Scalar>(&self, v: T, theta: T) -> T {
        let VanDerWaalsParams { b, r, cv, .. } = self.params;
        (theta / self.theta0).ln() * cv + ((v - b) / (self.v0 - b)).ln() * r + self.s0
    }

    fn field(
        &self,
        second: &str,
        name: &str,
        f: impl Fn(&VanDerWaals, Hyper, Hyper) -> Hyper + Send + Sync + 'static,
    ) -> ScalarField {
        let me = *self;
        let (lo, reference) = if second == S_LABEL {
            (f64::NEG_INFINITY, self.s0)
        } else {
            (0.0, self.theta0)
        };
        let domain = DomainSpec::new(vec![self.params.b, lo], vec![f64::INFINITY; 2]).expect("box");
        ScalarField::from_expr(
            &[V_LABEL, second],
            domain,
            vec![self.v0, reference],
            format!("van der Waals a={} b={} {name}", self.params.a, self.params.b),
            move |x| f(&me, x[0], x[1]),
        )
        .expect("reference state is admissible")
    }
}

impl Eos for VanDerWaals {
    fn family(&self) -> &'static str {
        "van-der-waals"
    }

    fn internal_energy(&self) -> ScalarField {
        self.field(S_LABEL, "u(v,s)", |e, v, s| e.u_vs(v, s))
    }

    fn pressure_vs(&self) -> ScalarField {
        self.field(S_LABEL, "p(v,s)", |e, v, s| e.p_vs(v, s))
    }

    fn temperature_vs(&self) -> ScalarField {
        self.field(S_LABEL, "θ(v,s)", |e, v, s| e.theta_vs(v, s))
    }

    fn thermal(&self) -> ScalarField {
        self.field(THETA_LABEL, "p(v,θ)", |e, v, t| e.p_vt(v, t))
    }

    fn caloric(&self) -> ScalarField {
        self.field(THETA_LABEL, "u(v,θ)", |e, v, t| e.u_vt(v, t))
    }

    fn entropy_vt(&self, v: f64, theta: f64) -> Result<f64> {
        check_vt(self.params.b, v, theta)?;
        Ok(self.s_vt(v, theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::rel_diff;

    fn fluid() -> VanDerWaals {
        VanDerWaals::new(VanDerWaalsParams::new(1.0, 0.1, 1.0, 2.5).unwrap(), 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn closed_forms() {
        let p = VanDerWaalsParams { a: 1.0, b: 0.1, r: 1.0, cv: 1.0 };
        assert!((vdw_pressure(&p, 1.0, 1.0).unwrap() - (1.0 / 0.9 - 1.0)).abs() < 1e-15);
        let ideal = VanDerWaalsParams { a: 0.0, b: 0.0, r: 287.0, cv: 717.5 };
        assert!(rel_diff(vdw_pressure(&ideal, 0.8, 300.0).unwrap(), 287.0 * 300.0 / 0.8) < 1e-15);
        let q = VanDerWaalsParams { a: 1.0, b: 0.1, r: 1.0, cv: 3.0 };
        assert!((vdw_internal_energy(&q, 2.0, 4.0).unwrap() - 11.5).abs() < 1e-15);
        assert!(vdw_pressure(&p, 0.1, 1.0).is_err());
        assert!(VanDerWaalsParams::new(0.0, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn caloric_derivatives() {
        let e = fluid();
        let cal = e.caloric();
        for &(v, t) in &[(0.2, 0.5), (1.5, 3.0), (10.0, 0.1)] {
            let j = cal.jet(&[v, t]).unwrap();
            assert_eq!(j.gradient[1], 2.5);
            assert!(rel_diff(j.gradient[0], 1.0 / (v * v)) < 1e-14);
        }
    }

    #[test]
    fn fundamental_form_reproduces_thermal_and_caloric_laws() {
        let e = fluid();
        let u = e.internal_energy();
        for &(v, t) in &[(0.25, 0.4), (1.0, 1.0), (6.0, 2.0)] {
            let s = e.entropy_vt(v, t).unwrap();
            let j = u.jet(&[v, s]).unwrap();
            assert!(rel_diff(j.gradient[1], t) < 1e-13);
            assert!(rel_diff(-j.gradient[0], vdw_pressure(&e.params, v, t).unwrap()) < 1e-12);
            assert!(rel_diff(j.value, vdw_internal_energy(&e.params, v, t).unwrap()) < 1e-13);
        }
    }
}
