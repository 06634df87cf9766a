use serde::{Deserialize, Serialize};

use super::{require_positive, Eos, S_LABEL, THETA_LABEL, V_LABEL};
use crate::error::{Error, Result};
use crate::field::{strictly_above, DomainSpec, Hyper, Scalar, ScalarField};

/// Constants of the Tait equation of state.
///
/// `c` is the heat coefficient `C = c_{v,r}/θ_r`; the derived constants
/// are `A = K_r − p_r` and `B = K_r v_r^ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaitParams {
    pub nu: f64,
    pub k_r: f64,
    pub u_r: f64,
    pub v_r: f64,
    pub s_r: f64,
    pub theta_r: f64,
    pub p_r: f64,
    pub d: f64,
    pub c: f64,
}

impl TaitParams {
    /// Stable configuration with `C = c_vr / θ_r` and `c_vr > 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        nu: f64,
        k_r: f64,
        u_r: f64,
        v_r: f64,
        s_r: f64,
        theta_r: f64,
        p_r: f64,
        d: f64,
        c_vr: f64,
    ) -> Result<Self> {
        require_positive("c_vr", c_vr)?;
        require_positive("theta_r", theta_r)?;
        let p = TaitParams {
            nu,
            k_r,
            u_r,
            v_r,
            s_r,
            theta_r,
            p_r,
            d,
            c: c_vr / theta_r,
        };
        p.validate()?;
        Ok(p)
    }

    /// The same constants with the heat coefficient replaced by `c`, which
    /// may be negative (unstable fixture).
    pub fn with_heat_coefficient(self, c: f64) -> Result<Self> {
        let p = TaitParams { c, ..self };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 1.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu = {} must be at least 1", self.nu)));
        }
        require_positive("K_r", self.k_r)?;
        require_positive("v_r", self.v_r)?;
        require_positive("theta_r", self.theta_r)?;
        require_positive("p_r", self.p_r)?;
        if !(self.c != 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("C = {} must be nonzero and finite", self.c)));
        }
        for (name, x) in [("u_r", self.u_r), ("s_r", self.s_r), ("D", self.d)] {
            if !x.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn a(&self) -> f64 {
        self.k_r - self.p_r
    }

    pub fn b(&self) -> f64 {
        self.k_r * self.v_r.powf(self.nu)
    }
}

/// Tait fluid: the fundamental equation
/// `u = A(v − v_r) + BΦ(v) + X²/(2C) + θ_r[(s − s_r) + Cθ_r] + u_r`
/// with `X = (s − s_r) − D(v − v_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaitEos {
    pub params: TaitParams,
}

impl TaitEos {
    pub fn new(params: TaitParams) -> Result<Self> {
        params.validate()?;
        Ok(TaitEos { params })
    }

    /// Φ(v): `ln(v_r/v)` for ν = 1, else `(v_r^{1−ν} − v^{1−ν})/(1 − ν)`.
    pub fn phi<T: Scalar>(&self, v: T) -> T {
        let TaitParams { nu, v_r, .. } = self.params;
        if nu == 1.0 {
            (v.recip() * v_r).ln()
        } else {
            (-v.powf(1.0 - nu) + v_r.powf(1.0 - nu)) / (1.0 - nu)
        }
    }

    /// Φ'(v) = −v^{−ν}.
    pub fn phi_prime<T: Scalar>(&self, v: T) -> T {
        -v.powf(-self.params.nu)
    }

    fn x<T: Scalar>(&self, v: T, s: T) -> T {
        let p = &self.params;
        (s - p.s_r) - (v - p.v_r) * p.d
    }

    pub fn u_vs<T: Scalar>(&self, v: T, s: T) -> T {
        let p = &self.params;
        let x = self.x(v, s);
        (v - p.v_r) * p.a() + self.phi(v) * p.b() + x * x / (2.0 * p.c)
            + ((s - p.s_r) + p.c * p.theta_r) * p.theta_r
            + p.u_r
    }

    /// p = −u_v = −(A + BΦ'(v) − (D/C)X).
    pub fn p_vs<T: Scalar>(&self, v: T, s: T) -> T {
        let p = &self.params;
        -(self.phi_prime(v) * p.b() + p.a() - self.x(v, s) * (p.d / p.c))
    }

    /// θ = u_s = X/C + θ_r.
    pub fn theta_vs<T: Scalar>(&self, v: T, s: T) -> T {
        self.x(v, s) / self.params.c + self.params.theta_r
    }

    /// Thermal law p(v, θ) = D(θ − θ_r) − A − BΦ'(v).
    pub fn p_vt<T: Scalar>(&self, v: T, theta: T) -> T {
        let p = &self.params;
        (theta - p.theta_r) * p.d - p.a() - self.phi_prime(v) * p.b()
    }

    /// The form p = p̄(θ) + K_r[(v_r/v)^ν − 1] with p̄(θ) = D(θ − θ_r) + p_r.
    pub fn p_vt_saturation_form(&self, v: f64, theta: f64) -> f64 {
        let p = &self.params;
        let p_bar = p.d * (theta - p.theta_r) + p.p_r;
        p_bar + p.k_r * ((p.v_r / v).powf(p.nu) - 1.0)
    }

    pub fn s_vt<T: Scalar>(&self, v: T, theta: T) -> T {
        let p = &self.params;
        (v - p.v_r) * p.d + (theta - p.theta_r) * p.c + p.s_r
    }

    pub fn u_vt<T: Scalar>(&self, v: T, theta: T) -> T {
        self.u_vs(v, self.s_vt(v, theta))
    }

    fn field(
        &self,
        second: &'static str,
        name: &str,
        f: impl Fn(&TaitEos, Hyper, Hyper) -> Hyper + Send + Sync + 'static,
    ) -> ScalarField {
        let me = *self;
        let thermal = second == THETA_LABEL;
        let (lo, reference) = if thermal {
            (0.0, self.params.theta_r)
        } else {
            (f64::NEG_INFINITY, self.params.s_r)
        };
        let domain = DomainSpec::new(vec![0.0, lo], vec![f64::INFINITY; 2])
            .expect("box")
            .with_predicate("p > 0", move |x| {
                let p = if thermal { me.p_vt(x[0], x[1]) } else { me.p_vs(x[0], x[1]) };
                strictly_above(p, 0.0)
            });
        ScalarField::from_expr(
            &[V_LABEL, second],
            domain,
            vec![self.params.v_r, reference],
            format!("Tait ν={} {name}", self.params.nu),
            move |x| f(&me, x[0], x[1]),
        )
        .expect("reference state is admissible")
    }
}

impl Eos for TaitEos {
    fn family(&self) -> &'static str {
        "tait"
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

    fn closed_forms(&self) -> Vec<(&'static str, &'static str)> {
        vec![("U_SS", "U_SS = 1/C"), ("U_VS", "U_VS = −D/C")]
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

    fn water(nu: f64) -> TaitEos {
        TaitEos::new(TaitParams::new(nu, 3.3e8, 8.4e4, 1e-3, 296.0, 293.15, 1e5, 145.0, 4180.0).unwrap())
            .unwrap()
    }

    #[test]
    fn reference_state_by_hand() {
        let e = water(7.15);
        let p = e.params;
        let j = e.internal_energy().jet(&[p.v_r, p.s_r]).unwrap();
        // X = 0, Φ(v_r) = 0, so u = u_r + C θ_r², p = −(A − K_r) = p_r, θ = θ_r.
        assert!(rel_diff(j.value, p.u_r + p.c * p.theta_r * p.theta_r) < 1e-15);
        assert!(rel_diff(-j.gradient[0], p.p_r) < 1e-9);
        assert!(rel_diff(j.gradient[1], p.theta_r) < 1e-15);
        assert_eq!(e.theta_vs(p.v_r, p.s_r), p.theta_r);
    }

    #[test]
    fn second_derivatives_match_closed_forms() {
        let e = water(7.15);
        let p = e.params;
        let u = e.internal_energy();
        for &(v, s) in &[(0.99e-3, 296.0), (1e-3, 300.0), (0.975e-3, 280.0)] {
            let j = u.jet(&[v, s]).unwrap();
            let phi2 = p.nu * v.powf(-p.nu - 1.0);
            assert!(rel_diff(j.hessian[(0, 0)], p.b() * phi2 + p.d * p.d / p.c) < 1e-12);
            assert!(rel_diff(j.hessian[(1, 1)], 1.0 / p.c) < 1e-14);
            assert!(rel_diff(j.hessian[(0, 1)], -p.d / p.c) < 1e-10);
        }
    }

    #[test]
    fn nu_one_branch_is_the_limit() {
        let e1 = water(1.0);
        let e2 = water(1.0 + 1e-6);
        for &v in &[0.5e-3, 0.98e-3, 1.5e-3] {
            let (a, b) = (e1.phi(v), e2.phi(v));
            assert!((a - b).abs() < 1e-4 * a.abs().max(1e-12));
        }
    }

    #[test]
    fn saturation_form_agrees_with_thermal_law() {
        let e = water(7.15);
        for &(v, t) in &[(0.99e-3, 300.0), (0.97e-3, 350.0), (1e-3, 293.15)] {
            let s = e.s_vt(v, t);
            let via_s = e.p_vs(v, s);
            assert!(rel_diff(via_s, e.p_vt_saturation_form(v, t)) < 1e-9);
            assert!(rel_diff(via_s, e.p_vt(v, t)) < 1e-12);
        }
    }

    #[test]
    fn pressure_positivity_is_enforced() {
        let e = water(7.15);
        let u = e.internal_energy();
        // strong expansion drives p negative
        assert!(matches!(u.jet(&[1.01e-3, 296.0]), Err(Error::DomainViolation { .. })));
        assert!(matches!(u.jet(&[-1e-3, 296.0]), Err(Error::DomainViolation { .. })));
        let bad = e.params.with_heat_coefficient(-e.params.c).unwrap();
        assert_eq!(TaitEos::new(bad).unwrap().internal_energy().jet(&[1e-3, 296.0]).unwrap().hessian[(1, 1)], 1.0 / bad.c);
    }
}
