//! Field-to-field transformations that preserve convexity type.
//!
//! * [`legendre`] / [`legendre_concave`]: `ψ(w) = ±(w·u − φ(u))` with `w = φ_u(u)`.
//! * [`reciprocal`]: `ψ(w) = w_k φ(1/w_k, w_i/w_k)`, the specific ↔ density map.
//! * [`exchange`]: swaps a strictly monotone function with one of its variables.
//! * [`affine`], [`sign_flip`], [`scale`], [`add_kinetic`]: linear changes.
//!
//! Each output field propagates exact jets from its source by the chain
//! rule or implicit differentiation. The congruence identities behind the
//! reciprocal and exchange theorems live in [`congruence`] and serve as
//! independent checks. [`ChainSpec`] strings steps together.

mod affine;
mod chain;
pub mod congruence;
mod exchange;
mod legendre;
mod reciprocal;

use serde::{Deserialize, Serialize};

pub use affine::{add_kinetic, affine, scale, sign_flip};
pub use chain::{named_chain, named_chains, run_chain, ChainReport, ChainSpec, ChainStage, Expectation, StageReport};
pub use exchange::{exchange, exchange_with};
pub use legendre::{legendre, legendre_concave, legendre_with, LegendreOptions};
pub use reciprocal::{reciprocal, reciprocal_map};

use crate::error::{Error, Result};
use crate::field::{DomainSpec, Field, Jet2, ScalarField};
use crate::solve::{NewtonSettings, ScalarSolveSettings};

/// Bounds in JSON: infinite entries are written as `null`, since JSON has
/// no infinity, and read back as the unbounded side.
mod bounds {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        let finite: Option<Vec<Option<f64>>> = b
            .as_ref()
            .map(|v| v.iter().map(|x| x.is_finite().then_some(*x)).collect());
        serde::Serialize::serialize(&finite, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D, open: f64) -> Result<Option<Vec<f64>>, D::Error> {
        let raw: Option<Vec<Option<f64>>> = Option::deserialize(d)?;
        Ok(raw.map(|v| v.into_iter().map(|x| x.unwrap_or(open)).collect()))
    }
}

mod lower_bounds {
    pub use super::bounds::serialize;
    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
        super::bounds::deserialize(d, f64::NEG_INFINITY)
    }
}

mod upper_bounds {
    pub use super::bounds::serialize;
    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
        super::bounds::deserialize(d, f64::INFINITY)
    }
}

/// One transformation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformRecord {
    Legendre {
        #[serde(default)]
        solver: NewtonSettings,
        /// Asserted bounds on the image of the gradient map; `null` entries
        /// are unbounded.
        #[serde(default, skip_serializing_if = "Option::is_none", with = "lower_bounds")]
        image_lower: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "upper_bounds")]
        image_upper: Option<Vec<f64>>,
    },
    LegendreConcave {
        #[serde(default)]
        solver: NewtonSettings,
    },
    /// Pivot is 1-based.
    Reciprocal { pivot: usize },
    /// Pivot is 1-based.
    Exchange {
        pivot: usize,
        #[serde(default)]
        solver: ScalarSolveSettings,
    },
    /// ψ(w) = φ(T w + b); `matrix` is row-major with one row per source variable.
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    SignFlip { signs: Vec<f64> },
    /// ψ = c φ.
    Scale { factor: f64 },
    /// ψ(x, v̄) = φ(x) + ½|v̄|² with `dim` appended velocity variables.
    AddKinetic { dim: usize },
}

impl TransformRecord {
    pub fn kind(&self) -> &'static str {
        match self {
            TransformRecord::Legendre { .. } => "legendre",
            TransformRecord::LegendreConcave { .. } => "legendre_concave",
            TransformRecord::Reciprocal { .. } => "reciprocal",
            TransformRecord::Exchange { .. } => "exchange",
            TransformRecord::Affine { .. } => "affine",
            TransformRecord::SignFlip { .. } => "sign_flip",
            TransformRecord::Scale { .. } => "scale",
            TransformRecord::AddKinetic { .. } => "add_kinetic",
        }
    }

    /// Check parameters against the input dimension; returns the output dimension.
    pub fn output_dim(&self, input: usize) -> Result<usize> {
        let pivot_ok = |k: usize| {
            if k >= 1 && k <= input {
                Ok(input)
            } else {
                Err(Error::InvalidParameter(format!(
                    "pivot {k} outside 1..={input}"
                )))
            }
        };
        match self {
            TransformRecord::Legendre { .. }
            | TransformRecord::LegendreConcave { .. }
            | TransformRecord::Scale { .. } => Ok(input),
            TransformRecord::Reciprocal { pivot } | TransformRecord::Exchange { pivot, .. } => pivot_ok(*pivot),
            TransformRecord::Affine { matrix, offset } => {
                if matrix.len() != input || offset.len() != input {
                    return Err(Error::DimensionMismatch {
                        expected: input,
                        got: matrix.len().min(offset.len()),
                    });
                }
                let n = matrix.first().map_or(0, Vec::len);
                if n == 0 || matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidParameter("affine matrix rows must share a nonzero length".into()));
                }
                Ok(n)
            }
            TransformRecord::SignFlip { signs } => {
                if signs.len() != input {
                    return Err(Error::DimensionMismatch {
                        expected: input,
                        got: signs.len(),
                    });
                }
                Ok(input)
            }
            TransformRecord::AddKinetic { dim } => Ok(input + dim),
        }
    }

    /// Apply the step to `field`.
    pub fn apply(&self, field: &ScalarField) -> Result<ScalarField> {
        self.output_dim(field.dim())?;
        match self {
            TransformRecord::Legendre {
                solver,
                image_lower,
                image_upper,
            } => {
                let m = field.dim();
                let image_box = match (image_lower, image_upper) {
                    (None, None) => None,
                    (lo, hi) => Some((
                        lo.clone().unwrap_or_else(|| vec![f64::NEG_INFINITY; m]),
                        hi.clone().unwrap_or_else(|| vec![f64::INFINITY; m]),
                    )),
                };
                legendre_with(
                    field,
                    &LegendreOptions {
                        solver: *solver,
                        image_box,
                        ..Default::default()
                    },
                )
            }
            TransformRecord::LegendreConcave { solver } => legendre_with(
                field,
                &LegendreOptions {
                    solver: *solver,
                    concave: true,
                    ..Default::default()
                },
            ),
            TransformRecord::Reciprocal { pivot } => reciprocal(field, *pivot),
            TransformRecord::Exchange { pivot, solver } => exchange_with(field, *pivot, *solver),
            TransformRecord::Affine { matrix, offset } => {
                let t = nalgebra::DMatrix::from_fn(matrix.len(), matrix[0].len(), |i, j| matrix[i][j]);
                affine(field, &t, offset)
            }
            TransformRecord::SignFlip { signs } => sign_flip(field, signs),
            TransformRecord::Scale { factor } => scale(field, *factor),
            TransformRecord::AddKinetic { dim } => add_kinetic(field, *dim),
        }
    }

    /// Map a point of the source field to the matching point of the output.
    /// `extra` supplies the appended coordinates of an `AddKinetic` step.
    pub fn map_point(&self, source: &ScalarField, u: &[f64], extra: &[f64]) -> Result<Vec<f64>> {
        match self {
            TransformRecord::Legendre { .. } => Ok(source.jet(u)?.gradient.iter().copied().collect()),
            TransformRecord::LegendreConcave { .. } => Ok(source.jet(u)?.gradient.iter().copied().collect()),
            TransformRecord::Reciprocal { pivot } => Ok(reciprocal_map(u, *pivot)),
            TransformRecord::Exchange { pivot, .. } => {
                let mut w = u.to_vec();
                w[pivot - 1] = source.value(u)?;
                Ok(w)
            }
            TransformRecord::Affine { matrix, offset } => {
                let t = nalgebra::DMatrix::from_fn(matrix.len(), matrix[0].len(), |i, j| matrix[i][j]);
                affine::preimage(&t, offset, u)
            }
            TransformRecord::SignFlip { signs } => Ok(u.iter().zip(signs).map(|(x, s)| x * s).collect()),
            TransformRecord::Scale { .. } => Ok(u.to_vec()),
            TransformRecord::AddKinetic { dim } => {
                if extra.len() < *dim {
                    return Err(Error::DimensionMismatch {
                        expected: *dim,
                        got: extra.len(),
                    });
                }
                Ok(u.iter().chain(&extra[..*dim]).copied().collect())
            }
        }
    }
}

/// A field with the labels of another replaced.
pub fn relabel(field: &ScalarField, labels: &[&str]) -> Result<ScalarField> {
    if labels.len() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: labels.len(),
        });
    }
    Ok(ScalarField::new(Relabelled {
        inner: field.clone(),
        labels: labels.iter().map(|s| s.to_string()).collect(),
    }))
}

struct Relabelled {
    inner: ScalarField,
    labels: Vec<String>,
}

impl Field for Relabelled {
    fn labels(&self) -> &[String] {
        &self.labels
    }
    fn domain(&self) -> &DomainSpec {
        self.inner.domain()
    }
    fn provenance(&self) -> &str {
        self.inner.provenance()
    }
    fn reference_point(&self) -> &[f64] {
        self.inner.reference_point()
    }
    fn eval(&self, x: &[f64]) -> Result<Jet2> {
        self.inner.jet(x)
    }
}

pub(crate) fn check_reference(domain: &DomainSpec, reference: &[f64], what: &str) -> Result<()> {
    domain.check(reference).map_err(|reason| {
        Error::InvalidParameter(format!(
            "{what}: image of the source reference point {reference:?} is inadmissible: {reason}"
        ))
    })
}
