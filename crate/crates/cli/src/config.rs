//! Run configuration: JSON, strict schema, optional named preset.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thermoconvex::convexity::Sampler;
use thermoconvex::eos::{Eos, IdealPolytropicParams, PolytropicGas, TaitEos, TaitParams, VanDerWaals, VanDerWaalsParams};
use thermoconvex::transforms::ChainSpec;

use crate::error::CliError;
use crate::presets;

/// Equation-of-state selection and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EosConfig {
    /// Exactly two of `r`, `cv`, `cp`, `gamma`.
    Polytropic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cv: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cp: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
        #[serde(default = "one")]
        v0: f64,
        #[serde(default)]
        s0: f64,
        #[serde(default = "room_temperature")]
        theta0: f64,
    },
    Tait {
        nu: f64,
        k_r: f64,
        u_r: f64,
        v_r: f64,
        s_r: f64,
        theta_r: f64,
        p_r: f64,
        d: f64,
        /// Specific heat at the reference state; `C = c_vr/θ_r`.
        c_vr: f64,
        /// Explicit heat coefficient `C`, overriding `c_vr` (may be negative).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
    VanDerWaals {
        a: f64,
        b: f64,
        r: f64,
        cv: f64,
        v0: f64,
        #[serde(default)]
        s0: f64,
        theta0: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn room_temperature() -> f64 {
    300.0
}

impl EosConfig {
    pub fn family(&self) -> &'static str {
        match self {
            EosConfig::Polytropic { .. } => "polytropic",
            EosConfig::Tait { .. } => "tait",
            EosConfig::VanDerWaals { .. } => "van-der-waals",
        }
    }

    pub fn build(&self) -> thermoconvex::Result<Arc<dyn Eos>> {
        Ok(match *self {
            EosConfig::Polytropic {
                r,
                cv,
                cp,
                gamma,
                v0,
                s0,
                theta0,
            } => Arc::new(PolytropicGas::new(IdealPolytropicParams::from_two(r, cv, cp, gamma)?, v0, s0, theta0)?),
            EosConfig::Tait {
                nu,
                k_r,
                u_r,
                v_r,
                s_r,
                theta_r,
                p_r,
                d,
                c_vr,
                c,
            } => {
                let mut p = TaitParams::new(nu, k_r, u_r, v_r, s_r, theta_r, p_r, d, c_vr)?;
                if let Some(c) = c {
                    p = p.with_heat_coefficient(c)?;
                }
                Arc::new(TaitEos::new(p)?)
            }
            EosConfig::VanDerWaals {
                a,
                b,
                r,
                cv,
                v0,
                s0,
                theta0,
            } => Arc::new(VanDerWaals::new(VanDerWaalsParams::new(a, b, r, cv)?, v0, s0, theta0)?),
        })
    }
}

/// Sampling box in primitive variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub rho: [f64; 2],
    pub theta: [f64; 2],
    /// Bound on each velocity component, `|v_i| ≤ speed`.
    pub speed: f64,
}

impl Region {
    pub fn bounds(&self, d: usize) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![self.rho[0], self.theta[0]];
        let mut hi = vec![self.rho[1], self.theta[1]];
        lo.extend(std::iter::repeat_n(-self.speed, d));
        hi.extend(std::iter::repeat_n(self.speed, d));
        (lo, hi)
    }

    fn validate(&self) -> Result<(), CliError> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] > 0.0 && r[0] <= r[1];
        if !ok(self.rho) || !ok(self.theta) {
            return Err(CliError::Config("region bounds must be positive, finite and ordered".into()));
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return Err(CliError::Config("region speed must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// A named state in primitive variables, usable by `eval --state`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedState {
    pub name: String,
    pub rho: f64,
    pub theta: f64,
    pub velocity: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Stability,
    Chains,
    EulerHessians,
    Symmetrizer,
    RelativeEnergy,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Stability,
        Suite::Chains,
        Suite::EulerHessians,
        Suite::Symmetrizer,
        Suite::RelativeEnergy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Stability => "stability",
            Suite::Chains => "chains",
            Suite::EulerHessians => "euler-hessians",
            Suite::Symmetrizer => "symmetrizer",
            Suite::RelativeEnergy => "relative-energy",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Suite::Stability => "entropy, energy and measurable stability conditions; Gibbs and Maxwell residuals",
            Suite::Chains => "named transformation chains with stage-wise definiteness verdicts",
            Suite::EulerHessians => "S̄(ρ,M̄,Ē) and Ē(ρ,M̄,S̄) Hessians, duality, kinetic factorization, route agreement",
            Suite::Symmetrizer => "main field, generating potentials, symmetric Euler system, Godunov chain",
            Suite::RelativeEnergy => "relative energy positivity and self-pair zero",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Tolerance overrides. Upper-bound tolerances may only be lowered; the
/// margin floor may only be raised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Smallest accepted relative definiteness margin.
    pub min_margin: f64,
    pub gibbs: f64,
    pub identity: f64,
    pub symmetry: f64,
    pub consistency: f64,
    pub route_agreement: f64,
    pub godunov: f64,
    pub legendre_identity: f64,
    pub self_pair: f64,
    pub kinetic_factorization: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            min_margin: 1e-6,
            gibbs: 1e-12,
            identity: 1e-9,
            symmetry: 1e-9,
            consistency: 1e-9,
            route_agreement: 1e-9,
            godunov: 1e-8,
            legendre_identity: 1e-8,
            self_pair: 1e-12,
            kinetic_factorization: 1e-14,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), CliError> {
        let d = Tolerances::default();
        if !(self.min_margin >= d.min_margin && self.min_margin < 1.0) {
            return Err(CliError::Config(format!(
                "min_margin {} may not be lowered below {}",
                self.min_margin, d.min_margin
            )));
        }
        let pairs = [
            ("gibbs", self.gibbs, d.gibbs),
            ("identity", self.identity, d.identity),
            ("symmetry", self.symmetry, d.symmetry),
            ("consistency", self.consistency, d.consistency),
            ("route_agreement", self.route_agreement, d.route_agreement),
            ("godunov", self.godunov, d.godunov),
            ("legendre_identity", self.legendre_identity, d.legendre_identity),
            ("self_pair", self.self_pair, d.self_pair),
            ("kinetic_factorization", self.kinetic_factorization, d.kinetic_factorization),
        ];
        for (name, value, default) in pairs {
            if !(value > 0.0 && value <= default) {
                return Err(CliError::Config(format!(
                    "tolerance {name} = {value} must be positive and at most the default {default}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    #[default]
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// The file format: every field optional when `preset` is given.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eos: Option<EosConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<Sampler>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<Suite>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<Vec<ChainSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<NamedState>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

/// A configuration with every default resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub eos: EosConfig,
    pub dimension: usize,
    pub region: Region,
    pub sampler: Sampler,
    pub tolerances: Tolerances,
    pub suites: Vec<Suite>,
    /// Extra chains run by the `chains` suite after the built-in ones.
    #[serde(default)]
    pub chains: Vec<ChainSpec>,
    #[serde(default)]
    pub states: Vec<NamedState>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        raw.resolve()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=3).contains(&self.dimension) {
            return Err(CliError::Config(format!(
                "dimension {} must be 1, 2 or 3",
                self.dimension
            )));
        }
        self.region.validate()?;
        self.tolerances.validate()?;
        match self.sampler {
            Sampler::Grid { resolution } if resolution == 0 => {
                return Err(CliError::Config("grid resolution must be positive".into()))
            }
            Sampler::Random { count, .. } if count == 0 => {
                return Err(CliError::Config("random sampler count must be positive".into()))
            }
            _ => {}
        }
        if self.suites.is_empty() {
            return Err(CliError::Config("no suites selected".into()));
        }
        for s in &self.states {
            if s.velocity.len() != self.dimension {
                return Err(CliError::Config(format!(
                    "state {} has {} velocity components, expected {}",
                    s.name,
                    s.velocity.len(),
                    self.dimension
                )));
            }
        }
        self.eos.build().map_err(|e| CliError::Config(format!("eos: {e}")))?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON of the resolved configuration.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn state(&self, name: &str) -> Option<&NamedState> {
        self.states.iter().find(|s| s.name == name)
    }
}

impl RawConfig {
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let base = match &self.preset {
            Some(name) => Some(
                presets::preset(name).ok_or_else(|| CliError::Config(format!("unknown preset {name:?}")))?,
            ),
            None => None,
        };
        fn pick<T>(own: Option<T>, from_base: Option<T>, what: &str) -> Result<T, CliError> {
            own.or(from_base)
                .ok_or_else(|| CliError::Config(format!("config needs `{what}` or a preset")))
        }
        let b = base.as_ref();
        let cfg = RunConfig {
            preset: self.preset.clone(),
            eos: pick(self.eos, b.map(|b| b.eos.clone()), "eos")?,
            dimension: pick(self.dimension, b.map(|b| b.dimension), "dimension")?,
            region: pick(self.region, b.map(|b| b.region.clone()), "region")?,
            sampler: pick(self.sampler, b.map(|b| b.sampler.clone()), "sampler")?,
            tolerances: self.tolerances.or(b.map(|b| b.tolerances)).unwrap_or_default(),
            suites: self
                .suites
                .or(b.map(|b| b.suites.clone()))
                .unwrap_or_else(|| Suite::ALL.to_vec()),
            chains: self.chains.or(b.map(|b| b.chains.clone())).unwrap_or_default(),
            states: self.states.or(b.map(|b| b.states.clone())).unwrap_or_default(),
            output: self.output.unwrap_or_default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_only_config_resolves() {
        let c = RunConfig::from_json(r#"{"preset": "polytropic-desk"}"#).unwrap();
        assert_eq!(c.dimension, 3);
        assert_eq!(c.suites, Suite::ALL.to_vec());
        assert_eq!(c.hash(), c.clone().hash());
    }

    #[test]
    fn schema_errors() {
        let missing_seed = r#"{"preset": "polytropic-desk", "sampler": {"kind": "random", "count": 10}}"#;
        assert!(matches!(RunConfig::from_json(missing_seed), Err(CliError::Config(_))));
        let unknown = r#"{"preset": "polytropic-desk", "colour": 1}"#;
        assert!(RunConfig::from_json(unknown).is_err());
        let loose = r#"{"preset": "polytropic-desk", "tolerances": {"gibbs": 1e-3}}"#;
        assert!(RunConfig::from_json(loose).is_err());
        let low_margin = r#"{"preset": "polytropic-desk", "tolerances": {"min_margin": 1e-9}}"#;
        assert!(RunConfig::from_json(low_margin).is_err());
        let tight = r#"{"preset": "polytropic-desk", "tolerances": {"gibbs": 1e-13}}"#;
        assert_eq!(RunConfig::from_json(tight).unwrap().tolerances.gibbs, 1e-13);
        assert!(RunConfig::from_json(r#"{"dimension": 2}"#).is_err());
        let eos_extra = r#"{"preset": "polytropic-desk", "eos": {"family": "polytropic", "r": 1, "gamma": 1.4, "x": 2}}"#;
        assert!(RunConfig::from_json(eos_extra).is_err());
    }
}
