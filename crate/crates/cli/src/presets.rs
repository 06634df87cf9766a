//! Named configurations shipped with the tool. Region boxes are tool
//! defaults chosen for desk-scale runs.

use thermoconvex::convexity::Sampler;

use crate::config::{EosConfig, NamedState, OutputConfig, Region, RunConfig, Suite, Tolerances};

pub const PRESETS: [(&str, &str); 5] = [
    ("polytropic-desk", "polytropic gas R=1, γ=7/5, d=3; ρ∈[0.1,10], θ∈[50,1000], |v_i|≤3; all suites"),
    ("tait-water", "Tait water ν=7.15, C>0, d=1; ρ∈[1000,1030], θ∈[280,360]; stability and chains"),
    ("tait-negative-c", "Tait water with C<0 (unstable fixture); stability only, expected to fail"),
    ("vdw-supercritical", "van der Waals a=b=R=1, c_v=3/2, d=1; θ∈[1.5,3]θ_c, v∈[1.1b,20b]"),
    ("vdw-subcritical", "van der Waals below θ_c: θ∈[0.85,0.9]θ_c, v∈[1.1b,20b]; stability only, expected to fail"),
];

fn base(eos: EosConfig, dimension: usize, region: Region, count: usize, suites: Vec<Suite>) -> RunConfig {
    RunConfig {
        preset: None,
        eos,
        dimension,
        region,
        sampler: Sampler::Random { count, seed: 20240601 },
        tolerances: Tolerances::default(),
        suites,
        chains: Vec::new(),
        states: Vec::new(),
        output: OutputConfig::default(),
    }
}

fn tait(c: Option<f64>) -> EosConfig {
    EosConfig::Tait {
        nu: 7.15,
        k_r: 3.3e8,
        u_r: 8.4e4,
        v_r: 1e-3,
        s_r: 296.0,
        theta_r: 293.15,
        p_r: 1e5,
        d: 145.0,
        c_vr: 4180.0,
        c,
    }
}

fn vdw() -> EosConfig {
    EosConfig::VanDerWaals {
        a: 1.0,
        b: 1.0,
        r: 1.0,
        cv: 1.5,
        v0: 3.0,
        s0: 0.0,
        theta0: 1.0,
    }
}

const THETA_C: f64 = 8.0 / 27.0;
const VDW_RHO: [f64; 2] = [1.0 / 20.0, 1.0 / 1.1];

/// The resolved configuration of a named preset.
pub fn preset(name: &str) -> Option<RunConfig> {
    let mut cfg = match name {
        "polytropic-desk" => {
            let mut c = base(
                EosConfig::Polytropic {
                    r: Some(1.0),
                    cv: None,
                    cp: None,
                    gamma: Some(1.4),
                    v0: 1.0,
                    s0: 0.0,
                    theta0: 300.0,
                },
                3,
                Region {
                    rho: [0.1, 10.0],
                    theta: [50.0, 1000.0],
                    speed: 3.0,
                },
                1000,
                Suite::ALL.to_vec(),
            );
            c.states = vec![
                NamedState {
                    name: "rest".into(),
                    rho: 1.0,
                    theta: 300.0,
                    velocity: vec![0.0, 0.0, 0.0],
                },
                NamedState {
                    name: "moving".into(),
                    rho: 2.0,
                    theta: 500.0,
                    velocity: vec![1.0, -2.0, 0.5],
                },
            ];
            c
        }
        "tait-water" => {
            let mut c = base(
                tait(None),
                1,
                Region {
                    rho: [1000.0, 1030.0],
                    theta: [280.0, 360.0],
                    speed: 0.0,
                },
                200,
                vec![Suite::Stability, Suite::Chains],
            );
            c.states = vec![NamedState {
                name: "reference".into(),
                rho: 1000.0,
                theta: 293.15,
                velocity: vec![0.0],
            }];
            c
        }
        "tait-negative-c" => base(
            tait(Some(-4180.0 / 293.15)),
            1,
            Region {
                rho: [1000.0, 1030.0],
                theta: [280.0, 360.0],
                speed: 0.0,
            },
            200,
            vec![Suite::Stability],
        ),
        "vdw-supercritical" => base(
            vdw(),
            1,
            Region {
                rho: VDW_RHO,
                theta: [1.5 * THETA_C, 3.0 * THETA_C],
                speed: 1.0,
            },
            400,
            vec![Suite::Stability, Suite::Chains, Suite::EulerHessians],
        ),
        "vdw-subcritical" => base(
            vdw(),
            1,
            Region {
                rho: VDW_RHO,
                theta: [0.85 * THETA_C, 0.9 * THETA_C],
                speed: 0.0,
            },
            400,
            vec![Suite::Stability],
        ),
        _ => return None,
    };
    cfg.preset = Some(name.to_string());
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_preset_resolves_and_validates() {
        for (name, _) in PRESETS {
            let c = preset(name).unwrap();
            c.validate().unwrap();
        }
        assert!(preset("nope").is_none());
    }
}
