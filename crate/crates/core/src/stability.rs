//! Thermodynamic stability conditions on entropy, energy and the measurable
//! equations of state, and Gibbs/Maxwell residual checks.
//!
//! Inequality margins are dimensionless so that verdicts do not depend on
//! units: a diagonal entry `H_ii` is scaled by `|H_ii| + |H_ij|·√(|H_ii|/|H_jj|)`,
//! the determinant by `|H_11 H_22| + H_12²`. A margin counts as zero inside
//! the convexity module's zero band.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexity::ZERO_BAND;
use crate::eos::Eos;
use crate::error::{Error, Result};
use crate::field::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Verdict {
    StronglyStable,
    Stable,
    Violated,
}

impl Verdict {
    pub fn is_stable(self) -> bool {
        self != Verdict::Violated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub probe: usize,
    pub coords: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    /// e.g. `S_VV ≤ 0`.
    pub name: String,
    /// Closed form of the tested quantity when the EOS provides one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<String>,
    pub variables: Vec<String>,
    /// Strict inequality (strong stability) as opposed to the weak one.
    pub strict: bool,
    pub worst_margin: f64,
    /// Probes where the weak inequality fails.
    pub violations: Vec<Violation>,
    /// Probes where only the strict inequality fails.
    pub degenerate: Vec<usize>,
    /// Signed margin at every probe, positive where the condition holds.
    #[serde(default, skip_serializing)]
    pub margins: Vec<f64>,
}

impl ConditionEntry {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Agreement of a second derivative with an independent closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub worst_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub provenance: String,
    pub variables: Vec<String>,
    pub conditions: Vec<ConditionEntry>,
    pub per_probe: Vec<Verdict>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub identities: Vec<IdentityCheck>,
}

impl StabilityReport {
    pub fn condition(&self, name_prefix: &str) -> Option<&ConditionEntry> {
        self.conditions.iter().find(|c| c.name.starts_with(name_prefix))
    }

    pub fn identities_passed(&self) -> bool {
        self.identities.iter().all(|i| i.passed)
    }
}

/// Sign requirement of one condition.
#[derive(Clone, Copy)]
enum Sign {
    Pos,
    Neg,
}

struct Spec {
    name: String,
    closed_form: Option<String>,
}

fn diagonal_margin(h: [[f64; 2]; 2], i: usize) -> f64 {
    let j = 1 - i;
    let (hii, hjj, hij) = (h[i][i], h[j][j], h[i][j]);
    let denom = if hjj != 0.0 {
        hii.abs() + hij.abs() * (hii.abs() / hjj.abs()).sqrt()
    } else {
        hii.abs()
    };
    if denom == 0.0 {
        0.0
    } else {
        hii / denom
    }
}

fn det_margin(h: [[f64; 2]; 2]) -> f64 {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let denom = (h[0][0] * h[1][1]).abs() + (h[0][1] * h[1][0]).abs();
    if denom == 0.0 {
        0.0
    } else {
        det / denom
    }
}

fn hessian2(field: &ScalarField, x: &[f64]) -> Result<[[f64; 2]; 2]> {
    if field.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: field.dim(),
        });
    }
    let h = field.jet(x)?.hessian;
    Ok([[h[(0, 0)], h[(0, 1)]], [h[(1, 0)], h[(1, 1)]]])
}

/// Assemble a report from per-probe signed margins (already oriented so that
/// positive means the condition holds).
fn assemble(
    field: &ScalarField,
    probes: &[Vec<f64>],
    specs: Vec<Spec>,
    margins: Vec<Vec<f64>>,
    identities: Vec<IdentityCheck>,
) -> StabilityReport {
    let mut per_probe = vec![Verdict::StronglyStable; probes.len()];
    let conditions = specs
        .into_iter()
        .enumerate()
        .map(|(c, spec)| {
            let mut violations = Vec::new();
            let mut degenerate = Vec::new();
            let mut worst = f64::INFINITY;
            for (k, m) in margins.iter().enumerate() {
                let x = m[c];
                worst = worst.min(x);
                if x < -ZERO_BAND {
                    violations.push(Violation {
                        probe: k,
                        coords: probes[k].clone(),
                        margin: x,
                    });
                    per_probe[k] = Verdict::Violated;
                } else if x <= ZERO_BAND {
                    degenerate.push(k);
                    if per_probe[k] == Verdict::StronglyStable {
                        per_probe[k] = Verdict::Stable;
                    }
                }
            }
            ConditionEntry {
                name: spec.name,
                closed_form: spec.closed_form,
                variables: field.labels().to_vec(),
                strict: true,
                worst_margin: if probes.is_empty() { 0.0 } else { worst },
                violations,
                degenerate,
                margins: margins.iter().map(|m| m[c]).collect(),
            }
        })
        .collect();
    let verdict = per_probe.iter().copied().max().unwrap_or(Verdict::StronglyStable);
    StabilityReport {
        provenance: field.provenance().to_string(),
        variables: field.labels().to_vec(),
        conditions,
        per_probe,
        verdict,
        identities,
    }
}

fn hessian_conditions(
    field: &ScalarField,
    probes: &[Vec<f64>],
    names: [&str; 3],
    sign: Sign,
    closed: &[(&str, &str)],
    identities: Vec<IdentityCheck>,
) -> Result<StabilityReport> {
    let s = match sign {
        Sign::Pos => 1.0,
        Sign::Neg => -1.0,
    };
    let margins: Vec<Vec<f64>> = probes
        .par_iter()
        .map(|x| {
            let h = hessian2(field, x)?;
            Ok(vec![s * diagonal_margin(h, 0), s * diagonal_margin(h, 1), det_margin(h)])
        })
        .collect::<Result<_>>()?;
    let rel = match sign {
        Sign::Pos => "≥ 0",
        Sign::Neg => "≤ 0",
    };
    let key = |n: &str| n.split(['·', ' ']).next().unwrap_or(n).to_string();
    let specs = vec![
        Spec {
            name: format!("{} {rel}", names[0]),
            closed_form: closed.iter().find(|(k, _)| *k == key(names[0])).map(|(_, v)| v.to_string()),
        },
        Spec {
            name: format!("{} {rel}", names[1]),
            closed_form: closed.iter().find(|(k, _)| *k == key(names[1])).map(|(_, v)| v.to_string()),
        },
        Spec {
            name: format!("{} ≥ 0", names[2]),
            closed_form: None,
        },
    ];
    Ok(assemble(field, probes, specs, margins, identities))
}

/// Concavity conditions on S(V,U): `S_VV ≤ 0`, `S_UU ≤ 0`, `S_VV S_UU − S_VU² ≥ 0`.
pub fn check_entropy_stability(s_field: &ScalarField, probes: &[Vec<f64>]) -> Result<StabilityReport> {
    hessian_conditions(
        s_field,
        probes,
        ["S_VV", "S_UU", "S_VV·S_UU − S_VU²"],
        Sign::Neg,
        &[],
        vec![],
    )
}

/// Tolerance of the cross identities between the jet of u and closed forms.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Convexity conditions on U(V,S): `U_VV ≥ 0`, `U_SS ≥ 0`,
/// `U_VV U_SS − U_VS² ≥ 0`. With an EOS, also checks `U_VV = −p_V`,
/// `U_SS = θ_S` and `U_VS = −p_S = θ_V` against its closed forms.
pub fn check_energy_stability(
    u_field: &ScalarField,
    probes: &[Vec<f64>],
    eos: Option<&dyn Eos>,
) -> Result<StabilityReport> {
    let mut identities = Vec::new();
    let mut closed = Vec::new();
    if let Some(eos) = eos {
        closed = eos.closed_forms();
        let p = eos.pressure_vs();
        let t = eos.temperature_vs();
        let rows: Vec<[f64; 4]> = probes
            .par_iter()
            .map(|x| {
                let h = u_field.jet(x)?.hessian;
                let pg = p.jet(x)?.gradient;
                let tg = t.jet(x)?.gradient;
                let r = |a: f64, b: f64| crate::eos::rel_diff(a, b);
                Ok([
                    r(h[(0, 0)], -pg[0]),
                    r(h[(1, 1)], tg[1]),
                    r(h[(0, 1)], -pg[1]),
                    r(h[(0, 1)], tg[0]),
                ])
            })
            .collect::<Result<_>>()?;
        for (i, name) in ["U_VV = −p_V", "U_SS = θ_S", "U_VS = −p_S", "U_VS = θ_V"].iter().enumerate() {
            let worst = rows.iter().map(|r| r[i]).fold(0.0, f64::max);
            identities.push(IdentityCheck {
                name: name.to_string(),
                worst_residual: worst,
                tolerance: IDENTITY_TOL,
                passed: worst <= IDENTITY_TOL,
            });
        }
    }
    hessian_conditions(
        u_field,
        probes,
        ["U_VV", "U_SS", "U_VV·U_SS − U_VS²"],
        Sign::Pos,
        &closed,
        identities,
    )
}

/// Per-probe measurable quantities at `(v, θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurableState {
    pub v: f64,
    pub theta: f64,
    pub p: f64,
    /// Specific heat at constant volume, `u_θ(v, θ)`.
    pub c_v: f64,
    /// `∂p/∂v` at constant θ.
    pub p_v: f64,
    /// Isothermal compressibility `−1/(v p_v)`.
    pub kappa_theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurableReport {
    pub stability: StabilityReport,
    pub states: Vec<MeasurableState>,
}

/// `u_θ(v,θ) > 0` and `p_v(v,θ) < 0` from the caloric and thermal laws.
pub fn check_measurable_stability(eos: &dyn Eos, probes: &[Vec<f64>]) -> Result<MeasurableReport> {
    let caloric = eos.caloric();
    let thermal = eos.thermal();
    let rows: Vec<(Vec<f64>, MeasurableState)> = probes
        .par_iter()
        .map(|x| {
            let cu = caloric.jet(x)?;
            let tp = thermal.jet(x)?;
            let (v, theta) = (x[0], x[1]);
            let c_v = cu.gradient[1];
            let p_v = tp.gradient[0];
            let m_cv = c_v * theta / (theta * c_v.abs() + cu.value.abs()).max(f64::MIN_POSITIVE);
            let m_pv = -v * p_v / (v * p_v.abs() + tp.value.abs()).max(f64::MIN_POSITIVE);
            Ok((
                vec![m_cv, m_pv],
                MeasurableState {
                    v,
                    theta,
                    p: tp.value,
                    c_v,
                    p_v,
                    kappa_theta: -1.0 / (v * p_v),
                },
            ))
        })
        .collect::<Result<_>>()?;
    let (margins, states): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let specs = vec![
        Spec {
            name: "u_θ > 0".into(),
            closed_form: None,
        },
        Spec {
            name: "p_v < 0".into(),
            closed_form: None,
        },
    ];
    Ok(MeasurableReport {
        stability: assemble(&thermal, probes, specs, margins, vec![]),
        states,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsReport {
    pub provenance: String,
    /// Worst `|u_v + p| / scale`.
    pub pressure_residual: f64,
    /// Worst `|u_s − θ| / scale`.
    pub temperature_residual: f64,
    /// Worst `|θ_v + p_s| / scale`.
    pub maxwell_residual: f64,
    pub tolerance: f64,
    /// Probes where any residual exceeds the tolerance.
    pub failures: Vec<Violation>,
    pub passed: bool,
}

pub const GIBBS_TOL: f64 = 1e-12;

/// Gibbs relations `u_v = −p`, `u_s = θ` and the Maxwell relation
/// `θ_v = −p_s`, comparing the jet of u with the EOS closed forms.
pub fn check_gibbs_and_maxwell(u_field: &ScalarField, eos: &dyn Eos, probes: &[Vec<f64>]) -> Result<GibbsReport> {
    check_gibbs_fields(u_field, &eos.pressure_vs(), &eos.temperature_vs(), probes)
}

/// As [`check_gibbs_and_maxwell`] with explicit closed-form fields.
pub fn check_gibbs_fields(
    u_field: &ScalarField,
    p_field: &ScalarField,
    theta_field: &ScalarField,
    probes: &[Vec<f64>],
) -> Result<GibbsReport> {
    let rows: Vec<[f64; 3]> = probes
        .par_iter()
        .map(|x| {
            let u = u_field.jet(x)?;
            let p = p_field.jet(x)?;
            let t = theta_field.jet(x)?;
            let r = crate::eos::rel_diff;
            Ok([
                r(u.gradient[0], -p.value),
                r(u.gradient[1], t.value),
                r(t.gradient[0], -p.gradient[1]),
            ])
        })
        .collect::<Result<_>>()?;
    let worst = |i: usize| rows.iter().map(|r| r[i]).fold(0.0, f64::max);
    let failures: Vec<Violation> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.iter().any(|x| !(*x <= GIBBS_TOL)))
        .map(|(k, r)| Violation {
            probe: k,
            coords: probes[k].clone(),
            margin: -r.iter().fold(0.0f64, |m, x| m.max(*x)),
        })
        .collect();
    Ok(GibbsReport {
        provenance: u_field.provenance().to_string(),
        pressure_residual: worst(0),
        temperature_residual: worst(1),
        maxwell_residual: worst(2),
        tolerance: GIBBS_TOL,
        passed: failures.is_empty(),
        failures,
    })
}
