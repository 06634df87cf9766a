//! `eval`: value, gradient and Hessian of a named field at one point.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thermoconvex::convexity::classify_hessian;
use thermoconvex::eos::Eos;
use thermoconvex::euler::{energy_density_ordered, entropy_density_conserved, ConservedState};
use thermoconvex::transforms::named_chain;
use thermoconvex::{Jet2, ScalarField};

use crate::config::{EosConfig, NamedState};
use crate::error::CliError;
use crate::report::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    U,
    Theta,
    PVs,
    P,
    PVt,
    UVt,
    S,
    G,
    EnergyDensity,
    EntropyDensity,
}

pub const QUANTITIES: [(&str, &str); 10] = [
    ("u", "specific internal energy u(v,s)"),
    ("theta", "temperature θ(v,s)"),
    ("p-vs", "pressure p(v,s)"),
    ("p", "pressure p(ρ,θ)"),
    ("p-vt", "thermal equation of state p(v,θ)"),
    ("u-vt", "caloric equation of state u(v,θ)"),
    ("s", "specific entropy s(v,u)"),
    ("g", "Gibbs free energy g(p,θ)"),
    ("energy-density", "total energy density Ē(ρ,M̄,S̄)"),
    ("entropy-density", "entropy density S̄(ρ,M̄,Ē)"),
];

impl Quantity {
    pub fn from_name(name: &str) -> Option<Self> {
        use Quantity::*;
        Some(match name {
            "u" => U,
            "theta" => Theta,
            "p-vs" => PVs,
            "p" => P,
            "p-vt" => PVt,
            "u-vt" => UVt,
            "s" => S,
            "g" => G,
            "energy-density" => EnergyDensity,
            "entropy-density" => EntropyDensity,
            _ => return None,
        })
    }

    /// Names of the point coordinates accepted by `--at`.
    pub fn variables(self, d: usize) -> Vec<String> {
        let fixed = |a: &[&str]| a.iter().map(|s| s.to_string()).collect();
        let momenta = |last: &str| {
            let mut v = vec!["rho".to_string()];
            v.extend((1..=d).map(|i| format!("m{i}")));
            v.push(last.to_string());
            v
        };
        match self {
            Quantity::U | Quantity::Theta | Quantity::PVs => fixed(&["v", "s"]),
            Quantity::P => fixed(&["rho", "theta"]),
            Quantity::PVt | Quantity::UVt => fixed(&["v", "theta"]),
            Quantity::S => fixed(&["v", "u"]),
            Quantity::G => fixed(&["p", "theta"]),
            Quantity::EnergyDensity => momenta("S"),
            Quantity::EntropyDensity => momenta("E"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Output {
    #[default]
    Value,
    Gradient,
    Hessian,
    HessianEigenvalues,
    All,
}

impl Output {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "value" => Output::Value,
            "gradient" => Output::Gradient,
            "hessian" => Output::Hessian,
            "hessian-eigenvalues" => Output::HessianEigenvalues,
            "all" => Output::All,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub quantity: String,
    pub eos: String,
    pub variables: Vec<String>,
    pub point: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
    /// Ascending.
    pub hessian_eigenvalues: Vec<f64>,
}

impl EvalResult {
    pub fn render(&self, output: Output) -> String {
        let line = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let hessian = |out: &mut String| {
            for row in &self.hessian {
                let _ = writeln!(out, "{}", line(row));
            }
        };
        match output {
            Output::Value => {
                let _ = writeln!(out, "{}", fmt_f64(self.value));
            }
            Output::Gradient => {
                let _ = writeln!(out, "{}", line(&self.gradient));
            }
            Output::Hessian => hessian(&mut out),
            Output::HessianEigenvalues => {
                let _ = writeln!(out, "{}", line(&self.hessian_eigenvalues));
            }
            Output::All => {
                let _ = writeln!(out, "quantity {} ({})", self.quantity, self.eos);
                let _ = writeln!(out, "variables {}", self.variables.join(" "));
                let _ = writeln!(out, "point {}", line(&self.point));
                let _ = writeln!(out, "value {}", fmt_f64(self.value));
                let _ = writeln!(out, "gradient {}", line(&self.gradient));
                let _ = writeln!(out, "hessian");
                hessian(&mut out);
                let _ = writeln!(out, "hessian-eigenvalues {}", line(&self.hessian_eigenvalues));
            }
        }
        out
    }
}

/// Parse `family:key=value,...` into an EOS configuration.
pub fn parse_eos(spec: &str) -> Result<EosConfig, CliError> {
    let (family, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut obj = serde_json::Map::new();
    let family = match family.trim() {
        "ideal" => "polytropic",
        "vdw" => "van-der-waals",
        f => f,
    };
    obj.insert("family".into(), family.into());
    for (k, v) in parse_pairs(rest)? {
        obj.insert(k, serde_json::Value::from(v));
    }
    serde_json::from_value(serde_json::Value::Object(obj))
        .map_err(|e| CliError::Usage(format!("invalid eos {spec:?}: {e}")))
}

fn parse_pairs(s: &str) -> Result<Vec<(String, f64)>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("expected key=value, got {p:?}")))?;
            Ok((k.trim().to_string(), parse_number(v)?))
        })
        .collect()
}

fn parse_number(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Usage(format!("not a number: {s:?}")))
}

/// Parse `--at`: either `k=v,...` with the quantity's variable names in any
/// order, or plain comma-separated values in variable order.
pub fn parse_point(s: &str, variables: &[String]) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    if parts.len() != variables.len() {
        return Err(CliError::Usage(format!(
            "point needs {} coordinates ({}), got {}",
            variables.len(),
            variables.join(", "),
            parts.len()
        )));
    }
    if parts.iter().all(|p| !p.contains('=')) {
        return parts.iter().map(|p| parse_number(p)).collect();
    }
    let pairs = parse_pairs(s)?;
    let mut out = vec![None; variables.len()];
    for (k, v) in pairs {
        let i = variables
            .iter()
            .position(|n| *n == k)
            .ok_or_else(|| CliError::Usage(format!("unknown coordinate {k:?}; expected {}", variables.join(", "))))?;
        if out[i].replace(v).is_some() {
            return Err(CliError::Usage(format!("coordinate {k:?} given twice")));
        }
    }
    out.into_iter()
        .zip(variables)
        .map(|(v, n)| v.ok_or_else(|| CliError::Usage(format!("missing coordinate {n:?}"))))
        .collect()
}

/// Coordinates of a named state in the variables of `q`.
pub fn state_point(eos: &dyn Eos, q: Quantity, state: &NamedState) -> Result<Vec<f64>, CliError> {
    let (rho, theta) = (state.rho, state.theta);
    let v = 1.0 / rho;
    let s = || eos.entropy_vt(v, theta);
    Ok(match q {
        Quantity::U | Quantity::Theta | Quantity::PVs => vec![v, s()?],
        Quantity::P => vec![rho, theta],
        Quantity::PVt | Quantity::UVt => vec![v, theta],
        Quantity::S => vec![v, eos.internal_energy().value(&[v, s()?])?],
        Quantity::G => vec![eos.thermal().value(&[v, theta])?, theta],
        Quantity::EnergyDensity => {
            let mut x = vec![rho];
            x.extend(state.velocity.iter().map(|c| rho * c));
            x.push(rho * s()?);
            x
        }
        Quantity::EntropyDensity => ConservedState::from_primitive(eos, rho, theta, &state.velocity)?.to_vec(),
    })
}

/// Pull a jet in `(v, θ)` back to `(ρ, θ)` through `v = 1/ρ`.
fn pull_back_density(j: &Jet2, rho: f64) -> Jet2 {
    let dv = -1.0 / (rho * rho);
    let ddv = 2.0 / (rho * rho * rho);
    let g = DVector::from_vec(vec![j.gradient[0] * dv, j.gradient[1]]);
    let h = DMatrix::from_row_slice(
        2,
        2,
        &[
            j.hessian[(0, 0)] * dv * dv + j.gradient[0] * ddv,
            j.hessian[(0, 1)] * dv,
            j.hessian[(1, 0)] * dv,
            j.hessian[(1, 1)],
        ],
    );
    Jet2::new(j.value, g, h)
}

fn field_for(eos: &dyn Eos, q: Quantity, d: usize) -> thermoconvex::Result<ScalarField> {
    Ok(match q {
        Quantity::U => eos.internal_energy(),
        Quantity::Theta => eos.temperature_vs(),
        Quantity::PVs => eos.pressure_vs(),
        Quantity::P | Quantity::PVt => eos.thermal(),
        Quantity::UVt => eos.caloric(),
        Quantity::S => eos.entropy()?,
        Quantity::G => named_chain("gibbs", d)
            .expect("built-in chain")
            .build(&eos.internal_energy())?
            .pop()
            .expect("chain has stages"),
        Quantity::EnergyDensity => energy_density_ordered(eos, d)?,
        Quantity::EntropyDensity => entropy_density_conserved(eos, d)?,
    })
}

pub fn evaluate(eos: &Arc<dyn Eos>, q: Quantity, name: &str, d: usize, point: &[f64]) -> Result<EvalResult, CliError> {
    let field = field_for(eos.as_ref(), q, d)?;
    let jet = match q {
        Quantity::P => {
            if !(point[0] > 0.0) {
                return Err(thermoconvex::Error::domain(point, "density must be positive").into());
            }
            pull_back_density(&field.jet(&[1.0 / point[0], point[1]])?, point[0])
        }
        _ => field.jet(point)?,
    };
    let eig = classify_hessian(&jet.hessian, 0.0)?.eigenvalues;
    let n = jet.dim();
    Ok(EvalResult {
        quantity: name.to_string(),
        eos: eos.family().to_string(),
        variables: q.variables(d),
        point: point.to_vec(),
        value: jet.value,
        gradient: jet.gradient.iter().copied().collect(),
        hessian: (0..n).map(|i| (0..n).map(|j| jet.hessian[(i, j)]).collect()).collect(),
        hessian_eigenvalues: eig,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_pressure_by_substitution() {
        let eos = parse_eos("ideal:r=4,gamma=1.4").unwrap().build().unwrap();
        let q = Quantity::P;
        let x = parse_point("theta=3, rho=2", &q.variables(3)).unwrap();
        let r = evaluate(&eos, q, "p", 3, &x).unwrap();
        assert!((r.value - 24.0).abs() < 1e-12);
        assert!((r.gradient[0] - 12.0).abs() < 1e-12);
        assert!((r.gradient[1] - 8.0).abs() < 1e-12);
        assert!(r.hessian[0][0].abs() < 1e-12);
        assert!((r.hessian[0][1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn point_parsing_errors() {
        let vars = Quantity::U.variables(3);
        assert!(parse_point("1,2,3", &vars).is_err());
        assert!(parse_point("v=1,x=2", &vars).is_err());
        assert!(parse_point("v=1,v=2", &vars).is_err());
        assert_eq!(parse_point("1, 2", &vars).unwrap(), vec![1.0, 2.0]);
        assert!(parse_eos("plasma:x=1").is_err());
        assert!(Quantity::from_name("enthalpy").is_none());
    }

    #[test]
    fn domain_violation_is_numerical_exit() {
        let eos = parse_eos("ideal:r=1,gamma=1.4").unwrap().build().unwrap();
        let e = evaluate(&eos, Quantity::U, "u", 3, &[-1.0, 0.0]).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }
}
