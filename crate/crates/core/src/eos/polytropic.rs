use serde::{Deserialize, Serialize};

use super::{require_positive, Eos, S_LABEL, THETA_LABEL, V_LABEL};
use crate::error::{Error, Result};
use crate::field::{DomainSpec, Hyper, Scalar, ScalarField};

/// Constants of an ideal polytropic gas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealPolytropicParams {
    pub r: f64,
    pub cv: f64,
    pub cp: f64,
    pub gamma: f64,
}

impl IdealPolytropicParams {
    /// Complete the parameter set from exactly two of `R`, `c_v`, `c_p`, `γ`.
    pub fn from_two(r: Option<f64>, cv: Option<f64>, cp: Option<f64>, gamma: Option<f64>) -> Result<Self> {
        let given = [r, cv, cp, gamma].iter().filter(|x| x.is_some()).count();
        if given != 2 {
            return Err(Error::InvalidParameter(format!(
                "ideal polytropic gas needs exactly two of R, c_v, c_p, gamma; got {given}"
            )));
        }
        let (cv, cp) = match (r, cv, cp, gamma) {
            (Some(r), Some(cv), None, None) => (cv, cv + r),
            (Some(r), None, Some(cp), None) => (cp - r, cp),
            (Some(r), None, None, Some(g)) => (r / (g - 1.0), g * r / (g - 1.0)),
            (None, Some(cv), Some(cp), None) => (cv, cp),
            (None, Some(cv), None, Some(g)) => (cv, g * cv),
            (None, None, Some(cp), Some(g)) => (cp / g, cp),
            _ => unreachable!(),
        };
        let params = IdealPolytropicParams {
            r: r.unwrap_or(cp - cv),
            cv,
            cp,
            gamma: gamma.unwrap_or(cp / cv),
        };
        params.validate()?;
        Ok(params)
    }

    /// Diatomic gas (γ = 7/5) with gas constant `r`.
    pub fn diatomic(r: f64) -> Result<Self> {
        Self::from_two(Some(r), None, None, Some(7.0 / 5.0))
    }

    /// Monatomic gas (γ = 5/3) with gas constant `r`.
    pub fn monatomic(r: f64) -> Result<Self> {
        Self::from_two(Some(r), None, None, Some(5.0 / 3.0))
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("R", self.r)?;
        require_positive("c_v", self.cv)?;
        if !(self.cp > self.cv) {
            return Err(Error::InvalidParameter(format!(
                "c_p = {} must exceed c_v = {}",
                self.cp, self.cv
            )));
        }
        if !(self.gamma > 1.0) {
            return Err(Error::InvalidParameter(format!("gamma = {} must exceed 1", self.gamma)));
        }
        let tol = 1e-12;
        if (self.gamma - self.cp / self.cv).abs() > tol * self.gamma
            || (self.r - (self.cp - self.cv)).abs() > tol * self.cp
        {
            return Err(Error::InvalidParameter(
                "inconsistent set: need gamma = c_p/c_v and R = c_p - c_v".into(),
            ));
        }
        Ok(())
    }
}

/// Ideal gas law `p = R ρ θ`.
pub fn ideal_pressure(params: &IdealPolytropicParams, rho: f64, theta: f64) -> Result<f64> {
    if !(rho > 0.0 && theta > 0.0) {
        return Err(Error::domain(&[rho, theta], "ρ > 0 and θ > 0"));
    }
    Ok(params.r * rho * theta)
}

/// Polytropic law `p = (γ − 1) ρ u`.
pub fn polytropic_pressure(params: &IdealPolytropicParams, rho: f64, u: f64) -> Result<f64> {
    if !(rho > 0.0 && u > 0.0) {
        return Err(Error::domain(&[rho, u], "ρ > 0 and u > 0"));
    }
    Ok((params.gamma - 1.0) * rho * u)
}

/// Ideal polytropic gas anchored at a reference state `(v0, s0, θ0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolytropicGas {
    pub params: IdealPolytropicParams,
    pub v0: f64,
    pub s0: f64,
    pub theta0: f64,
}

impl PolytropicGas {
    pub fn new(params: IdealPolytropicParams, v0: f64, s0: f64, theta0: f64) -> Result<Self> {
        params.validate()?;
        require_positive("v0", v0)?;
        require_positive("theta0", theta0)?;
        if !s0.is_finite() {
            return Err(Error::InvalidParameter("s0 must be finite".into()));
        }
        Ok(PolytropicGas {
            params,
            v0,
            s0,
            theta0,
        })
    }

    pub fn u0(&self) -> f64 {
        self.params.cv * self.theta0
    }

    /// u(v, s) = u0 (v0/v)^(γ−1) exp((s − s0)/c_v).
    pub fn u_vs<T: Scalar>(&self, v: T, s: T) -> T {
        let g = self.params.gamma;
        (v.recip() * self.v0).powf(g - 1.0) * ((s - self.s0) / self.params.cv).exp() * self.u0()
    }

    /// Temperature from the caloric law θ = u / c_v.
    pub fn theta_vs<T: Scalar>(&self, v: T, s: T) -> T {
        self.u_vs(v, s) / self.params.cv
    }

    /// Pressure from the polytropic law with ρ = 1/v.
    pub fn p_vs<T: Scalar>(&self, v: T, s: T) -> T {
        self.u_vs(v, s) * (self.params.gamma - 1.0) / v
    }

    /// Ideal gas law in `(v, θ)`.
    pub fn p_vt<T: Scalar>(&self, v: T, theta: T) -> T {
        theta * self.params.r / v
    }

    pub fn s_vt<T: Scalar>(&self, v: T, theta: T) -> T {
        (theta / self.theta0).ln() * self.params.cv + (v / self.v0).ln() * self.params.r + self.s0
    }

    fn vs_domain() -> DomainSpec {
        DomainSpec::new(vec![0.0, f64::NEG_INFINITY], vec![f64::INFINITY; 2]).expect("box")
    }

    fn vt_domain() -> DomainSpec {
        DomainSpec::new(vec![0.0, 0.0], vec![f64::INFINITY; 2]).expect("box")
    }

    fn vs_field(
        &self,
        name: &str,
        f: impl Fn(&PolytropicGas, Hyper, Hyper) -> Hyper + Send + Sync + 'static,
    ) -> ScalarField {
        let me = *self;
        ScalarField::from_expr(
            &[V_LABEL, S_LABEL],
            Self::vs_domain(),
            vec![self.v0, self.s0],
            format!("polytropic γ={} {name}", self.params.gamma),
            move |x| f(&me, x[0], x[1]),
        )
        .expect("reference state is admissible")
    }

    fn vt_field(
        &self,
        name: &str,
        f: impl Fn(&PolytropicGas, Hyper, Hyper) -> Hyper + Send + Sync + 'static,
    ) -> ScalarField {
        let me = *self;
        ScalarField::from_expr(
            &[V_LABEL, THETA_LABEL],
            Self::vt_domain(),
            vec![self.v0, self.theta0],
            format!("polytropic γ={} {name}", self.params.gamma),
            move |x| f(&me, x[0], x[1]),
        )
        .expect("reference state is admissible")
    }
}

impl Eos for PolytropicGas {
    fn family(&self) -> &'static str {
        "polytropic"
    }

    fn internal_energy(&self) -> ScalarField {
        self.vs_field("u(v,s)", |g, v, s| g.u_vs(v, s))
    }

    fn pressure_vs(&self) -> ScalarField {
        self.vs_field("p(v,s)", |g, v, s| g.p_vs(v, s))
    }

    fn temperature_vs(&self) -> ScalarField {
        self.vs_field("θ(v,s)", |g, v, s| g.theta_vs(v, s))
    }

    fn thermal(&self) -> ScalarField {
        self.vt_field("p(v,θ)", |g, v, t| g.p_vt(v, t))
    }

    fn caloric(&self) -> ScalarField {
        self.vt_field("u(v,θ)", |g, _, t| t * g.params.cv)
    }

    fn entropy_vt(&self, v: f64, theta: f64) -> Result<f64> {
        if !(v > 0.0 && theta > 0.0) {
            return Err(Error::domain(&[v, theta], "v > 0 and θ > 0"));
        }
        Ok(self.s_vt(v, theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::rel_diff;

    fn air() -> PolytropicGas {
        PolytropicGas::new(IdealPolytropicParams::diatomic(287.0).unwrap(), 1.0, 0.0, 300.0).unwrap()
    }

    #[test]
    fn completion_from_every_pair() {
        let full = IdealPolytropicParams::from_two(Some(287.0), Some(717.5), None, None).unwrap();
        assert!((full.gamma - 1.4).abs() < 1e-15);
        let pairs = [
            (Some(full.r), None, Some(full.cp), None),
            (Some(full.r), None, None, Some(full.gamma)),
            (None, Some(full.cv), Some(full.cp), None),
            (None, Some(full.cv), None, Some(full.gamma)),
            (None, None, Some(full.cp), Some(full.gamma)),
        ];
        for (r, cv, cp, g) in pairs {
            let p = IdealPolytropicParams::from_two(r, cv, cp, g).unwrap();
            assert!(rel_diff(p.r, full.r) < 1e-12 && rel_diff(p.cv, full.cv) < 1e-12);
            assert!(rel_diff(p.cp, full.cp) < 1e-12 && rel_diff(p.gamma, full.gamma) < 1e-12);
        }
        assert!(IdealPolytropicParams::from_two(Some(1.0), None, None, None).is_err());
        assert!(IdealPolytropicParams::from_two(Some(1.0), Some(1.0), Some(2.0), None).is_err());
        assert!(IdealPolytropicParams::from_two(Some(1.0), None, None, Some(0.9)).is_err());
    }

    #[test]
    fn pressure_laws() {
        let p = IdealPolytropicParams::from_two(Some(2.0), None, None, Some(1.4)).unwrap();
        assert_eq!(ideal_pressure(&p, 3.0, 5.0).unwrap(), 30.0);
        assert!(ideal_pressure(&p, 0.0, 5.0).is_err());
        let mono = IdealPolytropicParams::from_two(None, Some(1.0), None, Some(5.0 / 3.0)).unwrap();
        assert!((polytropic_pressure(&mono, 1.0, 3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(polytropic_pressure(&mono, 1.0, -3.0).is_err());
        let a = IdealPolytropicParams::from_two(None, Some(718.0), None, Some(1.4)).unwrap();
        let via_u = polytropic_pressure(&a, 1.2, a.cv * 300.0).unwrap();
        let via_theta = ideal_pressure(&a, 1.2, 300.0).unwrap();
        assert!(rel_diff(via_u, via_theta) < 1e-15);
    }

    #[test]
    fn reference_point_and_gibbs_relations() {
        let gas = air();
        let u = gas.internal_energy();
        assert!(rel_diff(u.value(&[1.0, 0.0]).unwrap(), gas.u0()) < 1e-15);
        for &(v, s) in &[(0.3, -200.0), (2.0, 150.0), (7.5, 800.0)] {
            let j = u.jet(&[v, s]).unwrap();
            assert!(rel_diff(j.gradient[1] * gas.params.cv, j.value) < 1e-14);
            assert!(rel_diff(-j.gradient[0] * v, (gas.params.gamma - 1.0) * j.value) < 1e-14);
        }
        assert!(u.jet(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn entropy_inverts_temperature() {
        let gas = air();
        let s = gas.entropy_vt(0.8, 450.0).unwrap();
        assert!(rel_diff(gas.temperature(0.8, s).unwrap(), 450.0) < 1e-13);
        assert!(gas.entropy_vt(0.8, -1.0).is_err());
    }
}
