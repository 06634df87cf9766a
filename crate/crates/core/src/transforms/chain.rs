use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TransformRecord;
use crate::convexity::{classify_with, ClassifyPolicy, DefinitenessClass};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::solve::{NewtonSettings, ScalarSolveSettings};

/// Expected Hessian verdict at a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    PositiveDefinite,
    NegativeDefinite,
    /// Positive definite or semi-definite.
    Convex,
    /// Negative definite or semi-definite.
    Concave,
    #[default]
    Any,
}

impl Expectation {
    pub fn accepts(self, class: DefinitenessClass) -> bool {
        match self {
            Expectation::PositiveDefinite => class == DefinitenessClass::PositiveDefinite,
            Expectation::NegativeDefinite => class == DefinitenessClass::NegativeDefinite,
            Expectation::Convex => class.is_convex_type(),
            Expectation::Concave => class.is_concave_type(),
            Expectation::Any => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainStage {
    /// Diagram label of the output function, e.g. `s(v,u)`.
    pub name: String,
    pub transform: TransformRecord,
    #[serde(default)]
    pub expect: Expectation,
    /// Optional variable labels for the output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub name: String,
    /// Diagram label of the starting function.
    #[serde(default = "default_start_name")]
    pub start_name: String,
    #[serde(default)]
    pub start_expect: Expectation,
    pub stages: Vec<ChainStage>,
}

fn default_start_name() -> String {
    "start".into()
}

impl ChainSpec {
    /// Check that stage dimensions compose, starting from `input`.
    pub fn check_dims(&self, input: usize) -> Result<usize> {
        self.stages.iter().enumerate().try_fold(input, |m, (i, s)| {
            s.transform.output_dim(m).map_err(|e| stage_error(i + 1, &s.name, e))
        })
    }

    /// Number of coordinates consumed by `AddKinetic` stages.
    pub fn extra_coords(&self) -> usize {
        self.stages
            .iter()
            .map(|s| match s.transform {
                TransformRecord::AddKinetic { dim } => dim,
                _ => 0,
            })
            .sum()
    }

    /// Build every stage field; element 0 is `start`.
    pub fn build(&self, start: &ScalarField) -> Result<Vec<ScalarField>> {
        self.check_dims(start.dim())?;
        let mut fields = vec![start.clone()];
        for (i, s) in self.stages.iter().enumerate() {
            let prev = fields.last().expect("nonempty");
            let mut next = s.transform.apply(prev).map_err(|e| stage_error(i + 1, &s.name, e))?;
            if let Some(labels) = &s.labels {
                let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
                next = super::relabel(&next, &refs).map_err(|e| stage_error(i + 1, &s.name, e))?;
            }
            fields.push(next);
        }
        Ok(fields)
    }

    /// Map a probe through every stage. The probe holds the start
    /// coordinates followed by the coordinates appended by `AddKinetic`.
    pub fn map_probe(&self, fields: &[ScalarField], probe: &[f64]) -> Result<Vec<Vec<f64>>> {
        let m = fields[0].dim();
        let need = m + self.extra_coords();
        if probe.len() != need {
            return Err(Error::DimensionMismatch {
                expected: need,
                got: probe.len(),
            });
        }
        let mut extra = &probe[m..];
        let mut points = vec![probe[..m].to_vec()];
        for (i, s) in self.stages.iter().enumerate() {
            let prev = points.last().expect("nonempty");
            let next = s
                .transform
                .map_point(&fields[i], prev, extra)
                .map_err(|e| stage_error(i + 1, &s.name, e))?;
            if let TransformRecord::AddKinetic { dim } = s.transform {
                extra = &extra[dim..];
            }
            points.push(next);
        }
        Ok(points)
    }
}

fn stage_error(stage: usize, name: &str, e: Error) -> Error {
    Error::Stage {
        stage,
        name: name.to_string(),
        source: Box::new(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    /// 0 for the starting function.
    pub index: usize,
    pub name: String,
    pub kind: String,
    pub labels: Vec<String>,
    pub provenance: String,
    pub expect: Expectation,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub classes: Vec<DefinitenessClass>,
    /// Relative definiteness margin at each probe.
    pub margins: Vec<f64>,
    pub counts: BTreeMap<DefinitenessClass, usize>,
    pub worst_margin: f64,
    /// Probe indices whose class the expectation rejects.
    pub mismatches: Vec<usize>,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub chain: String,
    pub stages: Vec<StageReport>,
    /// Index of the first stage whose verdicts disagree with the expectation.
    pub first_mismatch: Option<usize>,
    pub passed: bool,
}

impl ChainReport {
    pub fn last(&self) -> &StageReport {
        self.stages.last().expect("chain report has the start stage")
    }
}

/// Build the chain from `start`, map each probe through it, and classify the
/// (equilibrated) Hessian of every stage at every mapped probe.
pub fn run_chain(chain: &ChainSpec, start: &ScalarField, probes: &[Vec<f64>]) -> Result<ChainReport> {
    let fields = chain.build(start)?;
    let mapped: Vec<Vec<Vec<f64>>> = probes
        .iter()
        .map(|p| chain.map_probe(&fields, p))
        .collect::<Result<_>>()?;
    let mut stages = Vec::with_capacity(fields.len());
    for (k, field) in fields.iter().enumerate() {
        let (name, kind, expect) = if k == 0 {
            (chain.start_name.clone(), "start".to_string(), chain.start_expect)
        } else {
            let s = &chain.stages[k - 1];
            (s.name.clone(), s.transform.kind().to_string(), s.expect)
        };
        let points: Vec<Vec<f64>> = mapped.iter().map(|m| m[k].clone()).collect();
        let evals: Vec<(f64, DefinitenessClass, f64)> = points
            .par_iter()
            .map(|x| {
                let jet = field.jet(x)?;
                let v = classify_with(&jet.hessian, 0.0, ClassifyPolicy::Equilibrated)?;
                Ok((jet.value, v.class, v.margin))
            })
            .collect::<Result<_>>()
            .map_err(|e| stage_error(k, &name, e))?;
        let mut counts = BTreeMap::new();
        for e in &evals {
            *counts.entry(e.1).or_insert(0) += 1;
        }
        let mismatches: Vec<usize> = evals
            .iter()
            .enumerate()
            .filter(|(_, e)| !expect.accepts(e.1))
            .map(|(i, _)| i)
            .collect();
        stages.push(StageReport {
            index: k,
            name,
            kind,
            labels: field.labels().to_vec(),
            provenance: field.provenance().to_string(),
            expect,
            points,
            values: evals.iter().map(|e| e.0).collect(),
            classes: evals.iter().map(|e| e.1).collect(),
            margins: evals.iter().map(|e| e.2).collect(),
            counts,
            worst_margin: evals.iter().map(|e| e.2).fold(f64::INFINITY, f64::min),
            matched: mismatches.is_empty(),
            mismatches,
        });
    }
    let first_mismatch = stages.iter().position(|s| !s.matched);
    Ok(ChainReport {
        chain: chain.name.clone(),
        first_mismatch,
        passed: first_mismatch.is_none(),
        stages,
    })
}

fn stage(name: &str, transform: TransformRecord, expect: Expectation) -> ChainStage {
    ChainStage {
        name: name.into(),
        transform,
        expect,
        labels: None,
    }
}

fn legendre_step() -> TransformRecord {
    TransformRecord::Legendre {
        solver: NewtonSettings::default(),
        image_lower: None,
        image_upper: None,
    }
}

fn exchange_step(pivot: usize) -> TransformRecord {
    TransformRecord::Exchange {
        pivot,
        solver: ScalarSolveSettings::default(),
    }
}

/// Permutation matrix (rows = source slots) moving source slot `from` to the
/// last output slot, keeping the others in order; `sign` multiplies that slot.
fn move_to_end(n: usize, from: usize, sign: f64) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; n]; n];
    let mut col = 0;
    for (i, row) in t.iter_mut().enumerate() {
        if i == from {
            row[n - 1] = sign;
        } else {
            row[col] = 1.0;
            col += 1;
        }
    }
    t
}

fn signs_first_negative(n: usize) -> Vec<f64> {
    let mut s = vec![1.0; n];
    s[0] = -1.0;
    s
}

/// Names of the built-in chains.
pub fn named_chains() -> Vec<(&'static str, &'static str)> {
    vec![
        ("gibbs", "g(p,θ) ⇔ û(−p,θ) ⇔ u(v,s)"),
        ("entropy", "u(v,s) ⇔ s(v,u) ⇔ ŝ(p/θ,1/θ)"),
        ("mass-scaling", "u(v,s) ⇔ U(V,S) ⇔ u(v,s)"),
        ("energy-density", "u(v,s) ⇔ e(v,s,v̄) ⇔ Ē(ρ,S̄,M̄) ⇔ Ē(ρ,M̄,S̄)"),
        ("entropy-density", "u(v,s) ⇔ e(v,s,v̄) ⇔ Ē(ρ,S̄,M̄) ⇔ S̄(ρ,Ē,M̄) ⇔ S̄(ρ,M̄,Ē)"),
        ("entropy-density-specific", "u(v,s) ⇔ e(v,s,v̄) ⇔ s(v,e,v̄) ⇔ S̄(ρ,Ē,M̄) ⇔ S̄(ρ,M̄,Ē)"),
        ("godunov", "e(v,s,v̄) ⇔ L̂(−p,θ,v̄) ⇔ P ⇔ p̃(−L̂,θ,v̄) ⇔ L(−L̂/θ,1/θ,v̄/θ) ⇔ L(w)"),
    ]
}

/// A built-in chain, starting from a specific internal energy `u(v,s)` with
/// `d` velocity components where relevant.
pub fn named_chain(name: &str, d: usize) -> Option<ChainSpec> {
    use Expectation::*;
    let n = 2 + d;
    let spec = |stages: Vec<ChainStage>| ChainSpec {
        name: name.to_string(),
        start_name: "u(v,s)".into(),
        start_expect: PositiveDefinite,
        stages,
    };
    let to_density = |stages: &mut Vec<ChainStage>| {
        stages.push(stage("e(v,s,v̄)", TransformRecord::AddKinetic { dim: d }, PositiveDefinite));
    };
    Some(match name {
        "gibbs" => spec(vec![
            stage("û(−p,θ)", legendre_step(), PositiveDefinite),
            stage(
                "û(p,θ) with −p flipped",
                TransformRecord::SignFlip {
                    signs: signs_first_negative(2),
                },
                PositiveDefinite,
            ),
            stage("g(p,θ)", TransformRecord::Scale { factor: -1.0 }, NegativeDefinite),
        ]),
        "entropy" => spec(vec![
            stage("s(v,u)", exchange_step(2), NegativeDefinite),
            stage("ŝ(p/θ,1/θ)", legendre_step(), NegativeDefinite),
        ]),
        "mass-scaling" => {
            let m = 2.5;
            let diag = |c: f64| vec![vec![c, 0.0], vec![0.0, c]];
            spec(vec![
                stage(
                    "u(V/M,S/M)",
                    TransformRecord::Affine {
                        matrix: diag(1.0 / m),
                        offset: vec![0.0; 2],
                    },
                    PositiveDefinite,
                ),
                stage("U(V,S)", TransformRecord::Scale { factor: m }, PositiveDefinite),
                stage(
                    "U(Mv,Ms)",
                    TransformRecord::Affine {
                        matrix: diag(m),
                        offset: vec![0.0; 2],
                    },
                    PositiveDefinite,
                ),
                stage("u(v,s)", TransformRecord::Scale { factor: 1.0 / m }, PositiveDefinite),
            ])
        }
        "energy-density" => {
            let mut st = Vec::new();
            to_density(&mut st);
            st.push(stage("Ē(ρ,S̄,M̄)", TransformRecord::Reciprocal { pivot: 1 }, PositiveDefinite));
            st.push(stage(
                "Ē(ρ,M̄,S̄)",
                TransformRecord::Affine {
                    matrix: move_to_end(n, 1, 1.0),
                    offset: vec![0.0; n],
                },
                PositiveDefinite,
            ));
            spec(st)
        }
        "entropy-density" => {
            let mut st = Vec::new();
            to_density(&mut st);
            st.push(stage("Ē(ρ,S̄,M̄)", TransformRecord::Reciprocal { pivot: 1 }, PositiveDefinite));
            st.push(stage("S̄(ρ,Ē,M̄)", exchange_step(2), NegativeDefinite));
            st.push(stage(
                "S̄(ρ,M̄,Ē)",
                TransformRecord::Affine {
                    matrix: move_to_end(n, 1, 1.0),
                    offset: vec![0.0; n],
                },
                NegativeDefinite,
            ));
            spec(st)
        }
        "entropy-density-specific" => {
            let mut st = Vec::new();
            to_density(&mut st);
            st.push(stage("s(v,e,v̄)", exchange_step(2), NegativeDefinite));
            st.push(stage("S̄(ρ,Ē,M̄)", TransformRecord::Reciprocal { pivot: 1 }, NegativeDefinite));
            st.push(stage(
                "S̄(ρ,M̄,Ē)",
                TransformRecord::Affine {
                    matrix: move_to_end(n, 1, 1.0),
                    offset: vec![0.0; n],
                },
                NegativeDefinite,
            ));
            spec(st)
        }
        "godunov" => {
            let mut lower = vec![f64::NEG_INFINITY; n];
            let mut upper = vec![f64::INFINITY; n];
            upper[0] = 0.0;
            lower[1] = 0.0;
            let mut st = Vec::new();
            to_density(&mut st);
            st.push(stage(
                "L̂(−p,θ,v̄)",
                TransformRecord::Legendre {
                    solver: NewtonSettings::default(),
                    image_lower: Some(lower),
                    image_upper: Some(upper),
                },
                PositiveDefinite,
            ));
            st.push(stage("P(L̂,θ,v̄)", exchange_step(1), NegativeDefinite));
            st.push(stage(
                "−P(−L̂,θ,v̄) with L̂ flipped",
                TransformRecord::SignFlip {
                    signs: signs_first_negative(n),
                },
                NegativeDefinite,
            ));
            st.push(stage("p̃(−L̂,θ,v̄)", TransformRecord::Scale { factor: -1.0 }, PositiveDefinite));
            st.push(stage(
                "L(−L̂/θ,1/θ,v̄/θ)",
                TransformRecord::Reciprocal { pivot: 2 },
                PositiveDefinite,
            ));
            st.push(ChainStage {
                labels: Some(godunov_labels(d)),
                ..stage(
                    "L(w)",
                    TransformRecord::Affine {
                        matrix: move_to_end(n, 1, -1.0),
                        offset: vec![0.0; n],
                    },
                    PositiveDefinite,
                )
            });
            spec(st)
        }
        _ => return None,
    })
}

/// Labels of the canonical main field `((g − |v̄|²/2)/θ, v̄/θ, −1/θ)`.
pub(crate) fn godunov_labels(d: usize) -> Vec<String> {
    let mut l = vec!["(g−|v|²/2)/θ".to_string()];
    l.extend((1..=d).map(|i| format!("v{i}/θ")));
    l.push("−1/θ".into());
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::{Eos, IdealPolytropicParams, PolytropicGas};

    fn gas() -> PolytropicGas {
        PolytropicGas::new(IdealPolytropicParams::diatomic(287.0).unwrap(), 0.8, 0.0, 300.0).unwrap()
    }

    #[test]
    fn every_named_chain_has_consistent_dimensions() {
        for (name, _) in named_chains() {
            let c = named_chain(name, 3).unwrap();
            c.check_dims(2).unwrap();
        }
        assert!(named_chain("nope", 1).is_none());
    }

    #[test]
    fn single_step_chain_is_the_step() {
        let u = gas().internal_energy();
        let c = ChainSpec {
            name: "one".into(),
            start_name: "u".into(),
            start_expect: Expectation::PositiveDefinite,
            stages: vec![stage("s(v,u)", exchange_step(2), Expectation::NegativeDefinite)],
        };
        let x = vec![0.9, 50.0];
        let r = run_chain(&c, &u, std::slice::from_ref(&x)).unwrap();
        let direct = super::super::exchange(&u, 2).unwrap();
        let w = r.stages[1].points[0].clone();
        assert_eq!(r.stages[1].values[0], direct.value(&w).unwrap());
        assert!(r.passed);
    }

    #[test]
    fn entropy_density_chain_on_polytropic_gas() {
        let u = gas().internal_energy();
        let c = named_chain("entropy-density", 2).unwrap();
        let probes = vec![vec![0.8, 10.0, 30.0, -20.0], vec![1.3, -40.0, 0.0, 5.0]];
        let r = run_chain(&c, &u, &probes).unwrap();
        assert!(r.passed, "{:?}", r.first_mismatch);
        assert_eq!(r.stages.len(), 5);
    }

    #[test]
    fn mismatch_is_reported_with_stage() {
        let u = gas().internal_energy();
        let mut c = named_chain("entropy", 0).unwrap();
        c.stages[0].expect = Expectation::PositiveDefinite;
        let r = run_chain(&c, &u, &[vec![0.9, 10.0]]).unwrap();
        assert_eq!(r.first_mismatch, Some(1));
    }

    #[test]
    fn thermodynamic_chains_on_polytropic_gas() {
        let u = gas().internal_energy();
        for name in ["gibbs", "entropy", "mass-scaling"] {
            let c = named_chain(name, 0).unwrap();
            let r = run_chain(&c, &u, &[vec![0.7, 20.0], vec![1.4, -60.0]]).unwrap();
            assert!(r.passed, "{name}: {:?}", r.stages.iter().map(|s| &s.counts).collect::<Vec<_>>());
        }
        let c = named_chain("godunov", 2).unwrap();
        let r = run_chain(&c, &u, &[vec![0.7, 20.0, 30.0, -10.0], vec![1.4, -60.0, 0.0, 200.0]]).unwrap();
        assert!(r.passed, "{:?}", r.stages.iter().map(|s| &s.counts).collect::<Vec<_>>());
        let theta = gas().temperature(0.7, 20.0).unwrap();
        let w = &r.last().points[0];
        assert!((w[3] + 1.0 / theta).abs() < 1e-12 / theta);
        assert!((w[1] - 30.0 / theta).abs() < 1e-12 * w[1].abs());
    }
}
