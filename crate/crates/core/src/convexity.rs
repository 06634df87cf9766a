//! Convexity and definiteness certification at sampled points.
//!
//! Definiteness comes from a symmetric eigensolver with a relative zero band
//! of `1e-9·max(‖H‖_F, floor)`; leading principal minors give an independent
//! cross-check. Strict convexity is a different property (`u⁴` is strictly
//! convex with a singular Hessian at 0) and is tested along segments and
//! through gradient monotonicity.
//!
//! Sweeps only sample: a clean report means no violation was found among the
//! probes, nothing more.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::linalg::{equilibrate, leading_minors, symmetrize};

/// Relative width of the zero band for eigenvalues.
pub const ZERO_BAND: f64 = 1e-9;
/// Largest accepted relative asymmetry before symmetrization.
pub const ASYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DefinitenessClass {
    PositiveDefinite,
    PositiveSemiDefinite,
    NegativeDefinite,
    NegativeSemiDefinite,
    Indefinite,
}

impl DefinitenessClass {
    /// The class of `−H` given the class of `H`.
    pub fn mirror(self) -> Self {
        use DefinitenessClass::*;
        match self {
            PositiveDefinite => NegativeDefinite,
            PositiveSemiDefinite => NegativeSemiDefinite,
            NegativeDefinite => PositiveDefinite,
            NegativeSemiDefinite => PositiveSemiDefinite,
            Indefinite => Indefinite,
        }
    }

    pub fn is_definite(self) -> bool {
        matches!(self, Self::PositiveDefinite | Self::NegativeDefinite)
    }

    /// Positive definite or semi-definite.
    pub fn is_convex_type(self) -> bool {
        matches!(self, Self::PositiveDefinite | Self::PositiveSemiDefinite)
    }

    pub fn is_concave_type(self) -> bool {
        matches!(self, Self::NegativeDefinite | Self::NegativeSemiDefinite)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::PositiveDefinite => "PositiveDefinite",
            Self::PositiveSemiDefinite => "PositiveSemiDefinite",
            Self::NegativeDefinite => "NegativeDefinite",
            Self::NegativeSemiDefinite => "NegativeSemiDefinite",
            Self::Indefinite => "Indefinite",
        }
    }
}

impl fmt::Display for DefinitenessClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether to classify `H` itself or its Jacobi-equilibrated congruent
/// form `D H D`, `D_ii = |H_ii|^{-1/2}`. Both have the same inertia; the
/// second is insensitive to the units of the variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifyPolicy {
    Raw,
    #[default]
    Equilibrated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessVerdict {
    pub class: DefinitenessClass,
    /// Extreme eigenvalues of the classified matrix.
    pub min_eig: f64,
    pub max_eig: f64,
    /// Frobenius norm of the classified matrix.
    pub scale: f64,
    /// `min |λ| / max(scale, ε)`.
    pub margin: f64,
    pub zero_band: f64,
    /// Relative asymmetry of the input.
    pub asymmetry: f64,
    /// Some eigenvalue lies within ten zero bands of zero.
    pub near_degenerate: bool,
    pub eigenvalues: Vec<f64>,
    pub leading_minors: Vec<f64>,
    /// Definite class read off the minors, if any.
    pub minors_class: Option<DefinitenessClass>,
    pub minors_agree: bool,
    pub equilibrated: bool,
    /// Extreme eigenvalues of the unscaled input.
    pub raw_min_eig: f64,
    pub raw_max_eig: f64,
}

fn sorted_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Classify a symmetric matrix by the signs of its eigenvalues.
pub fn classify_hessian(h: &DMatrix<f64>, scale_floor: f64) -> Result<DefinitenessVerdict> {
    classify_with(h, scale_floor, ClassifyPolicy::Raw)
}

pub fn classify_with(h: &DMatrix<f64>, scale_floor: f64, policy: ClassifyPolicy) -> Result<DefinitenessVerdict> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            got: h.ncols(),
        });
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            what: "hessian entry".into(),
            coords: vec![],
        });
    }
    let norm = h.norm();
    let asym = (h - h.transpose()).norm();
    let asymmetry = if norm > 0.0 { asym / norm } else { 0.0 };
    if asym > ASYMMETRY_TOL * norm {
        return Err(Error::AsymmetryTooLarge { asymmetry });
    }
    let sym = symmetrize(h);
    let raw_eigs = sorted_eigenvalues(&sym);
    let (target, equilibrated) = match policy {
        ClassifyPolicy::Raw => (sym, false),
        ClassifyPolicy::Equilibrated => (symmetrize(&equilibrate(&sym)), true),
    };
    let eigs = if equilibrated {
        sorted_eigenvalues(&target)
    } else {
        raw_eigs.clone()
    };
    let scale = target.norm();
    let band = ZERO_BAND * scale.max(scale_floor);
    let pos = eigs.iter().filter(|&&l| l > band).count();
    let neg = eigs.iter().filter(|&&l| l < -band).count();
    let n = eigs.len();
    use DefinitenessClass::*;
    let class = if pos > 0 && neg > 0 {
        Indefinite
    } else if pos == n {
        PositiveDefinite
    } else if neg == n {
        NegativeDefinite
    } else if neg == 0 {
        PositiveSemiDefinite
    } else {
        NegativeSemiDefinite
    };
    let min_abs = eigs.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    let minors = leading_minors(&target);
    let minors_class = if minors.iter().all(|d| *d > 0.0) {
        Some(PositiveDefinite)
    } else if minors
        .iter()
        .enumerate()
        .all(|(k, d)| if k % 2 == 0 { *d < 0.0 } else { *d > 0.0 })
    {
        Some(NegativeDefinite)
    } else {
        None
    };
    let minors_agree = match minors_class {
        Some(c) => c == class,
        None => !class.is_definite(),
    };
    Ok(DefinitenessVerdict {
        class,
        min_eig: eigs[0],
        max_eig: eigs[n - 1],
        scale,
        margin: min_abs / scale.max(f64::EPSILON),
        zero_band: band,
        asymmetry,
        near_degenerate: min_abs <= 10.0 * band,
        eigenvalues: eigs,
        leading_minors: minors,
        minors_class,
        minors_agree,
        equilibrated,
        raw_min_eig: raw_eigs[0],
        raw_max_eig: raw_eigs[n - 1],
    })
}

/// Outcome of a pointwise inequality test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub passed: bool,
    pub strict: bool,
    /// Smallest normalized residual; nonnegative when the inequality holds.
    pub worst: f64,
    /// Raw residual per sample or pair.
    pub residuals: Vec<f64>,
}

const STRICT_TOL: f64 = 1e-12;

/// Chord test: `φ(su + (1−s)v) ≤ sφ(u) + (1−s)φ(v)` at `n_samples` interior `s`.
pub fn segment_convexity_test(
    field: &ScalarField,
    u: &[f64],
    v: &[f64],
    n_samples: usize,
    strict: bool,
) -> Result<InequalityReport> {
    let fu = field.value(u)?;
    let fv = field.value(v)?;
    let mut residuals = Vec::with_capacity(n_samples);
    let mut worst = f64::INFINITY;
    let mut passed = true;
    for i in 1..=n_samples {
        let s = i as f64 / (n_samples + 1) as f64;
        let x: Vec<f64> = u.iter().zip(v).map(|(a, b)| s * a + (1.0 - s) * b).collect();
        if let Err(reason) = field.domain().check(&x) {
            return Err(Error::domain(&x, format!("segment leaves the domain: {reason}")));
        }
        let fx = field.value(&x)?;
        let r = s * fu + (1.0 - s) * fv - fx;
        let scale = fu.abs().max(fv.abs()).max(fx.abs()).max(f64::MIN_POSITIVE);
        let normalized = r / scale;
        let ok = if strict {
            normalized > STRICT_TOL
        } else {
            normalized >= -STRICT_TOL
        };
        passed &= ok;
        worst = worst.min(normalized);
        residuals.push(r);
    }
    Ok(InequalityReport {
        passed,
        strict,
        worst,
        residuals,
    })
}

fn dot(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> f64 {
    a.zip(b).map(|(x, y)| x * y).sum()
}

/// Monotone gradient: `[φ_u(u) − φ_u(v)]·(u − v) > 0` for `u ≠ v`.
pub fn gradient_monotonicity_test(field: &ScalarField, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<InequalityReport> {
    let mut residuals = Vec::with_capacity(pairs.len());
    let mut worst = f64::INFINITY;
    let mut passed = true;
    for (u, v) in pairs {
        let gu = field.jet(u)?.gradient;
        let gv = field.jet(v)?.gradient;
        let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
        let ip = dot((&gu - &gv).iter().copied(), diff.iter().copied());
        let dn = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
        let scale = (gu.norm() + gv.norm()).max(f64::MIN_POSITIVE) * dn.max(f64::MIN_POSITIVE);
        if dn > 0.0 {
            passed &= ip > 0.0;
            worst = worst.min(ip / scale);
        }
        residuals.push(ip);
    }
    Ok(InequalityReport {
        passed,
        strict: true,
        worst,
        residuals,
    })
}

/// Supporting hyperplane: `φ(u) − φ(v) − φ_u(v)·(u − v) ≥ 0` (strict: `> 0`).
pub fn supporting_hyperplane_test(
    field: &ScalarField,
    pairs: &[(Vec<f64>, Vec<f64>)],
    strict: bool,
) -> Result<InequalityReport> {
    let mut residuals = Vec::with_capacity(pairs.len());
    let mut worst = f64::INFINITY;
    let mut passed = true;
    for (u, v) in pairs {
        let ju = field.jet(u)?;
        let jv = field.jet(v)?;
        let lin = dot(jv.gradient.iter().copied(), u.iter().zip(v).map(|(a, b)| a - b));
        let r = ju.value - jv.value - lin;
        let scale = ju.value.abs().max(jv.value.abs()).max(lin.abs()).max(f64::MIN_POSITIVE);
        let normalized = r / scale;
        passed &= if strict {
            normalized > STRICT_TOL
        } else {
            normalized >= -STRICT_TOL
        };
        worst = worst.min(normalized);
        residuals.push(r);
    }
    Ok(InequalityReport {
        passed,
        strict,
        worst,
        residuals,
    })
}

/// Probe generator over a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sampler {
    /// Cell centers of a `resolution^m` grid.
    Grid { resolution: usize },
    /// Uniform random points from a ChaCha8 stream.
    Random { count: usize, seed: u64 },
}

impl Sampler {
    pub fn describe(&self) -> String {
        match self {
            Sampler::Grid { resolution } => format!("grid, {resolution} cells per axis"),
            Sampler::Random { count, seed } => format!("uniform random, {count} points, seed {seed}"),
        }
    }
}

/// Sample admissible points of the box `[lower, upper]` by rejection.
pub fn sample_box(
    lower: &[f64],
    upper: &[f64],
    sampler: &Sampler,
    accept: impl Fn(&[f64]) -> bool,
) -> Result<Vec<Vec<f64>>> {
    let m = lower.len();
    if upper.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: upper.len(),
        });
    }
    if let Some(i) = (0..m).find(|&i| !(lower[i] <= upper[i] && lower[i].is_finite() && upper[i].is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "sampling box needs finite bounds with lower <= upper in variable {i}"
        )));
    }
    match *sampler {
        Sampler::Grid { resolution } => {
            if resolution == 0 {
                return Err(Error::InvalidParameter("grid resolution must be positive".into()));
            }
            let total = resolution
                .checked_pow(m as u32)
                .filter(|t| *t <= 10_000_000)
                .ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
            let mut out = Vec::new();
            let mut idx = vec![0usize; m];
            for _ in 0..total {
                let x: Vec<f64> = (0..m)
                    .map(|i| lower[i] + (upper[i] - lower[i]) * (idx[i] as f64 + 0.5) / resolution as f64)
                    .collect();
                if accept(&x) {
                    out.push(x);
                }
                for d in idx.iter_mut() {
                    *d += 1;
                    if *d < resolution {
                        break;
                    }
                    *d = 0;
                }
            }
            if out.is_empty() || out.len() * 100 < total {
                return Err(Error::SamplerExhausted {
                    accepted: out.len(),
                    attempts: total,
                });
            }
            Ok(out)
        }
        Sampler::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let max_attempts = count.saturating_mul(100).max(100);
            let mut out = Vec::with_capacity(count);
            let mut attempts = 0;
            while out.len() < count {
                if attempts >= max_attempts {
                    return Err(Error::SamplerExhausted {
                        accepted: out.len(),
                        attempts,
                    });
                }
                attempts += 1;
                let x: Vec<f64> = (0..m)
                    .map(|i| lower[i] + (upper[i] - lower[i]) * rng.random::<f64>())
                    .collect();
                if accept(&x) {
                    out.push(x);
                }
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeVerdict {
    pub index: usize,
    pub coords: Vec<f64>,
    pub class: DefinitenessClass,
    pub margin: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    pub raw_min_eig: f64,
    pub raw_max_eig: f64,
    pub minors_agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub provenance: String,
    pub sampler: String,
    pub expected: Option<DefinitenessClass>,
    pub probes: Vec<ProbeVerdict>,
    pub counts: BTreeMap<DefinitenessClass, usize>,
    pub worst_margin: f64,
    /// Indices of probes whose class differs from `expected`.
    pub violations: Vec<usize>,
    /// Empirical uniform bound: smallest raw eigenvalue (positive case) or
    /// smallest `−λ_max` (negative case), when every probe matches.
    pub uniform_bound: Option<f64>,
    pub passed: bool,
}

/// Classify the Hessian of `field` at each probe, in parallel, merging in
/// probe order.
pub fn sweep_probes(
    field: &ScalarField,
    probes: &[Vec<f64>],
    expected: Option<DefinitenessClass>,
    policy: ClassifyPolicy,
    sampler: &str,
) -> Result<RegionReport> {
    let verdicts: Vec<ProbeVerdict> = probes
        .par_iter()
        .enumerate()
        .map(|(index, x)| {
            let jet = field.jet(x)?;
            let v = classify_with(&jet.hessian, 0.0, policy)?;
            Ok(ProbeVerdict {
                index,
                coords: x.clone(),
                class: v.class,
                margin: v.margin,
                min_eig: v.min_eig,
                max_eig: v.max_eig,
                raw_min_eig: v.raw_min_eig,
                raw_max_eig: v.raw_max_eig,
                minors_agree: v.minors_agree,
            })
        })
        .collect::<Result<_>>()?;
    Ok(summarize(field.provenance(), sampler, expected, verdicts))
}

/// Sample the box, then classify at each admissible probe.
pub fn region_sweep(
    field: &ScalarField,
    lower: &[f64],
    upper: &[f64],
    sampler: &Sampler,
    expected: Option<DefinitenessClass>,
    policy: ClassifyPolicy,
) -> Result<RegionReport> {
    let probes = sample_box(lower, upper, sampler, |x| field.contains(x))?;
    sweep_probes(field, &probes, expected, policy, &sampler.describe())
}

fn summarize(
    provenance: &str,
    sampler: &str,
    expected: Option<DefinitenessClass>,
    probes: Vec<ProbeVerdict>,
) -> RegionReport {
    let mut counts = BTreeMap::new();
    for p in &probes {
        *counts.entry(p.class).or_insert(0) += 1;
    }
    let violations: Vec<usize> = match expected {
        Some(c) => probes.iter().filter(|p| p.class != c).map(|p| p.index).collect(),
        None => vec![],
    };
    let worst_margin = probes.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
    let uniform_bound = match expected {
        Some(DefinitenessClass::PositiveDefinite) if violations.is_empty() => {
            Some(probes.iter().map(|p| p.raw_min_eig).fold(f64::INFINITY, f64::min))
        }
        Some(DefinitenessClass::NegativeDefinite) if violations.is_empty() => {
            Some(probes.iter().map(|p| -p.raw_max_eig).fold(f64::INFINITY, f64::min))
        }
        _ => None,
    };
    RegionReport {
        provenance: provenance.to_string(),
        sampler: sampler.to_string(),
        expected,
        passed: violations.is_empty() && !probes.is_empty(),
        worst_margin: if probes.is_empty() { 0.0 } else { worst_margin },
        probes,
        counts,
        violations,
        uniform_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::builtin::{half_squared_norm, linear, quartic};
    use nalgebra::DVector;

    #[test]
    fn identity_and_quartic() {
        let v = classify_hessian(&DMatrix::identity(5, 5), 0.0).unwrap();
        assert_eq!(v.class, DefinitenessClass::PositiveDefinite);
        assert_eq!(v.min_eig, 1.0);
        let h = quartic().jet(&[0.0]).unwrap().hessian;
        assert_eq!(classify_hessian(&h, 1e-300).unwrap().class, DefinitenessClass::PositiveSemiDefinite);
    }

    #[test]
    fn indefinite_wins_and_mirror() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 1e-14]));
        assert_eq!(classify_hessian(&h, 0.0).unwrap().class, DefinitenessClass::Indefinite);
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let a = classify_hessian(&h, 0.0).unwrap().class;
        let b = classify_hessian(&(-h), 0.0).unwrap().class;
        assert_eq!(a.mirror(), b);
    }

    #[test]
    fn asymmetry_rejected() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1e-3, 1.0]);
        assert!(matches!(classify_hessian(&h, 0.0), Err(Error::AsymmetryTooLarge { .. })));
    }

    #[test]
    fn equilibration_rescues_badly_scaled_definite_matrix() {
        let h = DMatrix::from_row_slice(2, 2, &[1e12, 0.0, 0.0, 1e-3]);
        assert_eq!(classify_hessian(&h, 0.0).unwrap().class, DefinitenessClass::PositiveSemiDefinite);
        let v = classify_with(&h, 0.0, ClassifyPolicy::Equilibrated).unwrap();
        assert_eq!(v.class, DefinitenessClass::PositiveDefinite);
        assert_eq!(v.raw_min_eig, 1e-3);
    }

    #[test]
    fn inequality_tests_on_simple_fields() {
        let lin = linear(vec![1.0, -2.0], 3.0);
        let r = segment_convexity_test(&lin, &[0.0, 1.0], &[2.0, -1.0], 9, false).unwrap();
        assert!(r.passed);
        assert!(!segment_convexity_test(&lin, &[0.0, 1.0], &[2.0, -1.0], 9, true).unwrap().passed);
        let q = half_squared_norm(2);
        let pairs = vec![(vec![1.0, 0.0], vec![0.0, 2.0])];
        let g = gradient_monotonicity_test(&q, &pairs).unwrap();
        assert!(g.passed && (g.residuals[0] - 5.0).abs() < 1e-15);
        assert!(supporting_hyperplane_test(&lin, &pairs, false).unwrap().passed);
        assert!(supporting_hyperplane_test(&q, &pairs, true).unwrap().passed);
    }

    #[test]
    fn sampler_determinism_and_exhaustion() {
        let s = Sampler::Random { count: 20, seed: 7 };
        let a = sample_box(&[0.0, 0.0], &[1.0, 1.0], &s, |_| true).unwrap();
        let b = sample_box(&[0.0, 0.0], &[1.0, 1.0], &s, |_| true).unwrap();
        assert_eq!(a, b);
        let none = sample_box(&[0.0], &[1.0], &s, |x| x[0] < 1e-6);
        assert!(matches!(none, Err(Error::SamplerExhausted { .. })));
        let grid = sample_box(&[0.0, 0.0], &[1.0, 1.0], &Sampler::Grid { resolution: 4 }, |_| true).unwrap();
        assert_eq!(grid.len(), 16);
        assert_eq!(grid[0], vec![0.125, 0.125]);
    }

    #[test]
    fn identity_region_bound() {
        let f = half_squared_norm(3);
        let r = region_sweep(
            &f,
            &[-1.0; 3],
            &[1.0; 3],
            &Sampler::Random { count: 50, seed: 1 },
            Some(DefinitenessClass::PositiveDefinite),
            ClassifyPolicy::Raw,
        )
        .unwrap();
        assert!(r.passed);
        assert_eq!(r.uniform_bound, Some(1.0));
        assert_eq!(r.counts.values().sum::<usize>(), 50);
    }
}
