//! Check suites. One probe set in primitive variables `(ρ, θ, v̄)` is drawn
//! per run and mapped into the coordinates each suite needs.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thermoconvex::convexity::{
    classify_hessian, sample_box, sweep_probes, ClassifyPolicy, DefinitenessClass, RegionReport,
};
use thermoconvex::eos::{rel_diff, Eos};
use thermoconvex::euler::{
    build_symmetrizer, energy_density_ordered, entropy_density_routes, entropy_pair_consistency, godunov_chain,
    kinetic_density_hessian, ConservedState, EulerModel,
};
use thermoconvex::linalg::rel_frobenius;
use thermoconvex::stability::{
    check_energy_stability, check_entropy_stability, check_gibbs_and_maxwell, check_measurable_stability,
    ConditionEntry, StabilityReport,
};
use thermoconvex::transforms::{named_chain, named_chains, run_chain, ChainReport, ChainSpec};
use thermoconvex::Result;

use crate::config::{RunConfig, Suite, Tolerances};
use crate::error::CliError;
use crate::report::{CheckResult, ProbeSummary, RunReport, SuiteResult, Timings, ViolationEntry};

pub const CHAIN_PROBES: usize = 200;
pub const ROUTE_PROBES: usize = 100;
pub const SYMMETRIZER_PROBES: usize = 50;
pub const GODUNOV_PROBES: usize = 20;
pub const SELF_PAIRS: usize = 100;

/// The probe set in every coordinate system used by the suites.
#[derive(Debug, Clone)]
pub struct ProbeSet {
    /// `(ρ, θ, v̄)`.
    pub primitive: Vec<Vec<f64>>,
    /// `(v, s)`.
    pub vs: Vec<Vec<f64>>,
    /// `(v, θ)`.
    pub vt: Vec<Vec<f64>>,
    pub states: Vec<ConservedState>,
    /// `(ρ, M̄, Ē)`.
    pub conserved: Vec<Vec<f64>>,
    /// `(ρ, M̄, S̄)`.
    pub density: Vec<Vec<f64>>,
    pub sampler: String,
}

impl ProbeSet {
    pub fn len(&self) -> usize {
        self.primitive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitive.is_empty()
    }

    /// `(v, s, v̄)`, the start coordinates of the named chains.
    pub fn chain_start(&self, k: usize) -> Vec<f64> {
        let mut p = self.vs[k].clone();
        p.extend_from_slice(&self.primitive[k][2..]);
        p
    }
}

/// Draw the probe set for a configuration.
pub fn sample_probes(cfg: &RunConfig, eos: &dyn Eos) -> Result<ProbeSet> {
    let (lo, hi) = cfg.region.bounds(cfg.dimension);
    let u = eos.internal_energy();
    let thermal = eos.thermal();
    let primitive = sample_box(&lo, &hi, &cfg.sampler, |x| {
        let (v, theta) = (1.0 / x[0], x[1]);
        match eos.entropy_vt(v, theta) {
            Ok(s) => s.is_finite() && u.contains(&[v, s]) && thermal.contains(&[v, theta]),
            Err(_) => false,
        }
    })?;
    from_primitive(eos, primitive, cfg.sampler.describe())
}

/// Map primitive probes `(ρ, θ, v̄)` into every coordinate system.
pub fn from_primitive(eos: &dyn Eos, primitive: Vec<Vec<f64>>, sampler: String) -> Result<ProbeSet> {
    let rows: Vec<(Vec<f64>, Vec<f64>, ConservedState, Vec<f64>)> = primitive
        .par_iter()
        .map(|x| {
            let (rho, theta, vel) = (x[0], x[1], &x[2..]);
            let v = 1.0 / rho;
            let s = eos.entropy_vt(v, theta)?;
            let state = ConservedState::from_primitive(eos, rho, theta, vel)?;
            let mut density = vec![rho];
            density.extend(vel.iter().map(|c| rho * c));
            density.push(rho * s);
            Ok((vec![v, s], vec![v, theta], state, density))
        })
        .collect::<Result<_>>()?;
    let mut set = ProbeSet {
        primitive,
        vs: Vec::with_capacity(rows.len()),
        vt: Vec::with_capacity(rows.len()),
        states: Vec::with_capacity(rows.len()),
        conserved: Vec::with_capacity(rows.len()),
        density: Vec::with_capacity(rows.len()),
        sampler,
    };
    for (vs, vt, state, density) in rows {
        set.vs.push(vs);
        set.vt.push(vt);
        set.conserved.push(state.to_vec());
        set.states.push(state);
        set.density.push(density);
    }
    Ok(set)
}

pub fn primitive_labels(d: usize) -> Vec<String> {
    let mut v = vec!["rho".to_string(), "theta".to_string()];
    v.extend((1..=d).map(|i| format!("v{i}")));
    v
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("summary serializes")
}

fn condition_check(prefix: &str, c: &ConditionEntry, coords: &[Vec<f64>]) -> CheckResult {
    let name = format!("{prefix}: {}", c.name);
    let mut check = CheckResult::margins(name.clone(), coords, c.margins.clone(), 0.0);
    // Status follows the weak inequality; degenerate probes are recorded
    // in the details but do not fail the check.
    check.violations = c
        .violations
        .iter()
        .map(|v| ViolationEntry {
            condition: c.closed_form.clone().unwrap_or_else(|| name.clone()),
            probe: v.probe,
            coords: v.coords.clone(),
            margin: v.margin,
        })
        .collect();
    check.passed = c.holds();
    check.closed_form = c.closed_form.clone();
    check
}

fn stability_summary(r: &StabilityReport) -> Value {
    let conditions: Vec<Value> = r
        .conditions
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "closed_form": c.closed_form,
                "worst_margin": c.worst_margin,
                "violations": c.violations.len(),
                "degenerate": c.degenerate.len(),
            })
        })
        .collect();
    let mut counts = BTreeMap::new();
    for v in &r.per_probe {
        *counts.entry(format!("{v:?}")).or_insert(0usize) += 1;
    }
    json!({
        "provenance": r.provenance,
        "variables": r.variables,
        "verdict": r.verdict,
        "per_probe_counts": counts,
        "conditions": conditions,
        "identities": r.identities,
    })
}

fn region_summary(r: &RegionReport) -> Value {
    json!({
        "provenance": r.provenance,
        "sampler": r.sampler,
        "expected": r.expected,
        "counts": r.counts,
        "worst_margin": r.worst_margin,
        "uniform_bound": r.uniform_bound,
        "violations": r.violations.len(),
        "minors_disagree": r.probes.iter().filter(|p| !p.minors_agree).count(),
        "passed": r.passed,
    })
}

fn chain_summary(r: &ChainReport) -> Value {
    let stages: Vec<Value> = r
        .stages
        .iter()
        .map(|s| {
            json!({
                "index": s.index,
                "name": s.name,
                "kind": s.kind,
                "labels": s.labels,
                "expect": s.expect,
                "counts": s.counts,
                "worst_margin": s.worst_margin,
                "mismatches": s.mismatches.len(),
            })
        })
        .collect();
    json!({
        "chain": r.chain,
        "passed": r.passed,
        "first_mismatch": r.first_mismatch,
        "stages": stages,
    })
}

/// Definiteness sweep as a margin check: every probe must have the expected
/// class and a margin above `min_margin`.
fn sweep_check(name: &str, r: &RegionReport, expected: DefinitenessClass, min_margin: f64) -> CheckResult {
    let margins: Vec<f64> = r
        .probes
        .iter()
        .map(|p| if p.class == expected { p.margin } else { -p.margin })
        .collect();
    let coords: Vec<Vec<f64>> = r.probes.iter().map(|p| p.coords.clone()).collect();
    let mut c = CheckResult::margins(name, &coords, margins, min_margin);
    for v in &mut c.violations {
        let p = &r.probes[v.probe];
        v.condition = format!("{name}: class {} (expected {expected})", p.class);
    }
    c
}

fn stability(cfg: &RunConfig, eos: &dyn Eos, probes: &ProbeSet) -> Result<SuiteResult> {
    let u = eos.internal_energy();
    let energy = check_energy_stability(&u, &probes.vs, Some(eos))?;
    let vu: Vec<Vec<f64>> = probes
        .vs
        .par_iter()
        .map(|x| Ok(vec![x[0], u.value(x)?]))
        .collect::<Result<_>>()?;
    let entropy = check_entropy_stability(&eos.entropy()?, &vu)?;
    let measurable = check_measurable_stability(eos, &probes.vt)?;
    let gibbs = check_gibbs_and_maxwell(&u, eos, &probes.vs)?;

    let mut checks = Vec::new();
    for c in &energy.conditions {
        checks.push(condition_check("energy", c, &probes.vs));
    }
    for c in &entropy.conditions {
        checks.push(condition_check("entropy", c, &vu));
    }
    for c in &measurable.stability.conditions {
        checks.push(condition_check("measurable", c, &probes.vt));
    }
    for id in &energy.identities {
        checks.push(CheckResult::residual(
            format!("identity: {}", id.name),
            probes.len(),
            id.worst_residual,
            cfg.tolerances.identity,
        ));
    }
    let gibbs_worst = gibbs
        .pressure_residual
        .max(gibbs.temperature_residual)
        .max(gibbs.maxwell_residual);
    let mut g = CheckResult::residual("gibbs and maxwell", probes.len(), gibbs_worst, cfg.tolerances.gibbs);
    g.violations = gibbs
        .failures
        .iter()
        .map(|f| ViolationEntry {
            condition: "gibbs and maxwell".into(),
            probe: f.probe,
            coords: f.coords.clone(),
            margin: f.margin,
        })
        .collect();
    checks.push(g);
    let mismatches: Vec<ViolationEntry> = (0..probes.len())
        .filter(|&k| energy.per_probe[k].is_stable() != entropy.per_probe[k].is_stable())
        .map(|k| ViolationEntry {
            condition: format!(
                "energy {:?} vs entropy {:?}",
                energy.per_probe[k], entropy.per_probe[k]
            ),
            probe: k,
            coords: probes.vs[k].clone(),
            margin: -1.0,
        })
        .collect();
    checks.push(CheckResult::count("energy-entropy equivalence", probes.len(), mismatches));

    let mut details = BTreeMap::new();
    details.insert("energy".into(), stability_summary(&energy));
    details.insert("entropy".into(), stability_summary(&entropy));
    details.insert("measurable".into(), stability_summary(&measurable.stability));
    details.insert("gibbs".into(), to_value(&gibbs));
    Ok(SuiteResult::new(Suite::Stability.name(), checks, details))
}

fn chains(cfg: &RunConfig, eos: &dyn Eos, probes: &ProbeSet) -> Result<SuiteResult> {
    let n = probes.len().min(CHAIN_PROBES);
    let mut specs: Vec<ChainSpec> = named_chains()
        .iter()
        .filter_map(|(name, _)| named_chain(name, cfg.dimension))
        .collect();
    specs.extend(cfg.chains.iter().cloned());
    let start = eos.internal_energy();
    let mut checks = Vec::new();
    let mut details = BTreeMap::new();
    for spec in &specs {
        let extra = spec.extra_coords();
        let coords: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let p = probes.chain_start(k);
                let mut q = p[..2].to_vec();
                q.extend((0..extra).map(|i| p.get(2 + i).copied().unwrap_or(0.0)));
                q
            })
            .collect();
        let report = run_chain(spec, &start, &coords)?;
        let last = report.last();
        let mut c = CheckResult::margins(format!("chain {}", spec.name), &coords, last.margins.clone(), 0.0);
        c.violations = report
            .stages
            .iter()
            .filter(|s| !s.matched)
            .flat_map(|s| {
                let coords = &coords;
                s.mismatches.iter().map(move |&k| ViolationEntry {
                    condition: format!(
                        "{} stage {} {}: class {} (expected {:?})",
                        spec.name, s.index, s.name, s.classes[k], s.expect
                    ),
                    probe: k,
                    coords: coords[k].clone(),
                    margin: -s.margins[k],
                })
            })
            .collect();
        c.passed = report.passed;
        c.threshold = cfg.tolerances.min_margin.min(0.0);
        checks.push(c);
        details.insert(spec.name.clone(), chain_summary(&report));
    }
    Ok(SuiteResult::new(Suite::Chains.name(), checks, details))
}

fn euler_hessians(cfg: &RunConfig, shared: &Arc<dyn Eos>, probes: &ProbeSet) -> Result<SuiteResult> {
    let tol = &cfg.tolerances;
    let d = cfg.dimension;
    let eos = shared.as_ref();
    let model = EulerModel::new(Arc::clone(shared), d)?;
    let nd = DefinitenessClass::NegativeDefinite;
    let pd = DefinitenessClass::PositiveDefinite;
    let entropy = sweep_probes(
        &model.entropy,
        &probes.conserved,
        Some(nd),
        ClassifyPolicy::Equilibrated,
        &probes.sampler,
    )?;
    let energy_field = energy_density_ordered(eos, d)?;
    let energy = sweep_probes(&energy_field, &probes.density, Some(pd), ClassifyPolicy::Equilibrated, &probes.sampler)?;
    let mut checks = vec![
        sweep_check("entropy density negative definite", &entropy, nd, tol.min_margin),
        sweep_check("energy density positive definite", &energy, pd, tol.min_margin),
    ];
    let mismatches: Vec<ViolationEntry> = (0..probes.len())
        .filter(|&k| (entropy.probes[k].class == nd) != (energy.probes[k].class == pd))
        .map(|k| ViolationEntry {
            condition: format!(
                "entropy {} vs energy {}",
                entropy.probes[k].class, energy.probes[k].class
            ),
            probe: k,
            coords: probes.conserved[k].clone(),
            margin: -1.0,
        })
        .collect();
    checks.push(CheckResult::count("duality", probes.len(), mismatches));
    checks.extend(kinetic_checks(tol, probes)?);
    checks.push(route_check(tol, eos, d, probes)?);
    let mut details = BTreeMap::new();
    details.insert("entropy_density".into(), region_summary(&entropy));
    details.insert("energy_density".into(), region_summary(&energy));
    Ok(SuiteResult::new(Suite::EulerHessians.name(), checks, details))
}

fn kinetic_checks(tol: &Tolerances, probes: &ProbeSet) -> Result<Vec<CheckResult>> {
    let rows: Vec<(bool, f64)> = probes
        .states
        .par_iter()
        .map(|s| {
            let k = kinetic_density_hessian(s.rho, &s.momentum)?;
            let v = classify_hessian(&k.hessian, 0.0)?;
            let zero = v.eigenvalues.iter().filter(|l| l.abs() <= v.zero_band).count();
            let positive = v.eigenvalues.iter().filter(|l| **l > v.zero_band).count();
            Ok((zero == 1 && positive == v.eigenvalues.len() - 1, k.factorization_residual))
        })
        .collect::<Result<_>>()?;
    let rank: Vec<ViolationEntry> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.0)
        .map(|(k, _)| ViolationEntry {
            condition: "kinetic Hessian rank".into(),
            probe: k,
            coords: probes.density[k][..probes.density[k].len() - 1].to_vec(),
            margin: -1.0,
        })
        .collect();
    let coords: Vec<Vec<f64>> = probes.conserved.clone();
    let residuals: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(vec![
        CheckResult::count("kinetic rank", probes.len(), rank),
        CheckResult::residuals("kinetic factorization", &coords, &residuals, tol.kinetic_factorization),
    ])
}

fn route_check(tol: &Tolerances, eos: &dyn Eos, d: usize, probes: &ProbeSet) -> Result<CheckResult> {
    let (a, b) = entropy_density_routes(eos, d)?;
    let n = probes.len().min(ROUTE_PROBES);
    let coords = &probes.conserved[..n];
    let residuals: Vec<f64> = coords
        .par_iter()
        .map(|x| {
            let (ja, jb) = (a.jet(x)?, b.jet(x)?);
            Ok(rel_diff(ja.value, jb.value).max(rel_frobenius(&ja.hessian, &jb.hessian, 0.0)))
        })
        .collect::<Result<_>>()?;
    Ok(CheckResult::residuals("entropy density route agreement", coords, &residuals, tol.route_agreement))
}

fn symmetrizer(cfg: &RunConfig, shared: &Arc<dyn Eos>, probes: &ProbeSet) -> Result<SuiteResult> {
    let tol = &cfg.tolerances;
    let model = EulerModel::new(Arc::clone(shared), cfg.dimension)?;
    let n = probes.len().min(SYMMETRIZER_PROBES);
    let states = &probes.states[..n];
    let coords = &probes.conserved[..n];
    let systems: Vec<_> = states
        .par_iter()
        .map(|s| build_symmetrizer(&model, s))
        .collect::<Result<_>>()?;
    let col = |f: &dyn Fn(&thermoconvex::euler::SymmetrizerDiagnostics) -> f64| -> Vec<f64> {
        systems.iter().map(|s| f(&s.diagnostics)).collect()
    };
    let worst_of = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let mut checks = vec![
        CheckResult::residuals("L_ww symmetry", coords, &col(&|d| d.l_ww_asymmetry), tol.symmetry),
        CheckResult::residuals(
            "flux potential symmetry",
            coords,
            &col(&|d| worst_of(&d.flux_asymmetry)),
            tol.symmetry,
        ),
        CheckResult::margins(
            "L_ww positive definite",
            coords,
            systems
                .iter()
                .map(|s| {
                    let m = s.diagnostics.l_ww_margin;
                    if s.diagnostics.l_ww_class == DefinitenessClass::PositiveDefinite {
                        m
                    } else {
                        -m
                    }
                })
                .collect(),
            tol.min_margin,
        ),
        CheckResult::residuals("L_w = u", coords, &col(&|d| d.gradient_residual), tol.consistency),
        CheckResult::residuals(
            "L^i_w = f^i",
            coords,
            &col(&|d| worst_of(&d.flux_gradient_residual)),
            tol.consistency,
        ),
        CheckResult::residuals(
            "legendre identity",
            coords,
            &col(&|d| d.legendre_identity),
            tol.legendre_identity,
        ),
    ];
    let pair = entropy_pair_consistency(&model, states)?;
    let pair_res: Vec<f64> = pair.residuals.iter().map(|r| worst_of(r)).collect();
    checks.push(CheckResult::residuals("entropy pair consistency", coords, &pair_res, tol.consistency));
    let m = n.min(GODUNOV_PROBES);
    let g = godunov_chain(&model, &probes.states[..m])?;
    checks.push(CheckResult::residual("godunov potential", m, g.value_residual, tol.godunov));
    checks.push(CheckResult::residual("godunov main field", m, g.main_field_residual, tol.godunov));
    let mut chain_check = CheckResult::count("godunov chain definiteness", m, Vec::new());
    chain_check.passed = g.chain.passed;
    if let Some(k) = g.chain.first_mismatch {
        let s = &g.chain.stages[k];
        chain_check.violations = s
            .mismatches
            .iter()
            .map(|&p| ViolationEntry {
                condition: format!("godunov stage {} {}: class {}", k, s.name, s.classes[p]),
                probe: p,
                coords: probes.conserved[p].clone(),
                margin: -s.margins[p],
            })
            .collect();
        chain_check.worst = chain_check.violations.len() as f64;
    }
    checks.push(chain_check);

    let diag: Vec<Value> = systems
        .iter()
        .take(3)
        .map(|s| {
            json!({
                "state": s.state,
                "w": s.w,
                "l": s.l,
                "l_flux": s.l_flux,
                "diagnostics": s.diagnostics,
            })
        })
        .collect();
    let mut details = BTreeMap::new();
    details.insert("sample_systems".into(), Value::Array(diag));
    details.insert(
        "legendre_identity_scaled_worst".into(),
        json!(worst_of(&col(&|d| d.legendre_identity_scaled))),
    );
    details.insert(
        "godunov".into(),
        json!({
            "probes": m,
            "value_residual": g.value_residual,
            "main_field_residual": g.main_field_residual,
            "theta_slot_residual": g.theta_slot_residual,
            "chain": chain_summary(&g.chain),
        }),
    );
    Ok(SuiteResult::new(Suite::Symmetrizer.name(), checks, details))
}

fn relative_energy_suite(cfg: &RunConfig, eos: &dyn Eos, probes: &ProbeSet) -> Result<SuiteResult> {
    let field = energy_density_ordered(eos, cfg.dimension)?;
    let n = probes.len();
    let pair_coords: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut c = probes.density[k].clone();
            c.extend_from_slice(&probes.density[(k + n / 2 + 1) % n]);
            c
        })
        .collect();
    let m = cfg.dimension + 2;
    let margins: Vec<f64> = pair_coords
        .par_iter()
        .map(|c| {
            let (u1, u2) = (&c[..m], &c[m..]);
            let a = field.value(u1)?;
            let j = field.jet(u2)?;
            let lin: f64 = j.gradient.iter().zip(u1.iter().zip(u2)).map(|(g, (x, y))| g * (x - y)).sum();
            let r = a - j.value - lin;
            Ok(r / (a.abs() + j.value.abs() + lin.abs()))
        })
        .collect::<Result<_>>()?;
    let mut positive = CheckResult::margins("relative energy positive", &pair_coords, margins, 0.0);
    positive.per_probe.clear();
    let k = n.min(SELF_PAIRS);
    let self_res: Vec<f64> = probes.density[..k]
        .par_iter()
        .map(|u| {
            let j = field.jet(u)?;
            let r = thermoconvex::euler::bregman(&field, u, u)?;
            Ok(r.abs() / j.value.abs())
        })
        .collect::<Result<_>>()?;
    let self_check = CheckResult::residuals("relative energy self-pair", &probes.density[..k], &self_res, cfg.tolerances.self_pair);
    Ok(SuiteResult::new(
        Suite::RelativeEnergy.name(),
        vec![positive, self_check],
        BTreeMap::from([("pairs".to_string(), json!(n)), ("self_pairs".to_string(), json!(k))]),
    ))
}

/// Run one suite over a probe set.
pub fn run_suite(suite: Suite, cfg: &RunConfig, eos: &Arc<dyn Eos>, probes: &ProbeSet) -> Result<SuiteResult> {
    match suite {
        Suite::Stability => stability(cfg, eos.as_ref(), probes),
        Suite::Chains => chains(cfg, eos.as_ref(), probes),
        Suite::EulerHessians => euler_hessians(cfg, eos, probes),
        Suite::Symmetrizer => symmetrizer(cfg, eos, probes),
        Suite::RelativeEnergy => relative_energy_suite(cfg, eos.as_ref(), probes),
    }
}

/// Run every selected suite, sequentially, and assemble the report.
pub fn run_check(cfg: &RunConfig) -> std::result::Result<RunReport, CliError> {
    let t0 = Instant::now();
    let eos = cfg.eos.build().map_err(|e| CliError::Config(format!("eos: {e}")))?;
    let probes = sample_probes(cfg, eos.as_ref())?;
    let sampling = t0.elapsed().as_secs_f64();
    let mut suite_times = BTreeMap::new();
    let mut results = Vec::new();
    for &suite in &cfg.suites {
        let t = Instant::now();
        results.push(run_suite(suite, cfg, &eos, &probes)?);
        suite_times.insert(suite.name().to_string(), t.elapsed().as_secs_f64());
    }
    let summary = ProbeSummary {
        sampler: probes.sampler.clone(),
        count: probes.len(),
        variables: primitive_labels(cfg.dimension),
    };
    let mut report = RunReport::new(cfg.clone(), summary, probes.primitive.clone(), results);
    report.timings = Timings {
        total_seconds: t0.elapsed().as_secs_f64(),
        sampling_seconds: sampling,
        suites: suite_times,
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use thermoconvex::convexity::Sampler;

    fn small(preset: &str, count: usize) -> RunConfig {
        let mut c = crate::presets::preset(preset).unwrap();
        c.sampler = Sampler::Random { count, seed: 3 };
        c
    }

    #[test]
    fn probe_coordinates_agree() {
        let cfg = small("polytropic-desk", 10);
        let eos = cfg.eos.build().unwrap();
        let p = sample_probes(&cfg, eos.as_ref()).unwrap();
        assert_eq!(p.len(), 10);
        for k in 0..10 {
            assert!((p.vs[k][0] * p.primitive[k][0] - 1.0).abs() < 1e-15);
            assert_eq!(p.density[k][0], p.conserved[k][0]);
            assert_eq!(p.chain_start(k).len(), 5);
        }
    }

    #[test]
    fn negative_heat_coefficient_fails_stability() {
        let cfg = small("tait-negative-c", 20);
        let eos = cfg.eos.build().unwrap();
        let p = sample_probes(&cfg, eos.as_ref()).unwrap();
        let r = run_suite(Suite::Stability, &cfg, &eos, &p).unwrap();
        assert!(!r.passed);
        let c = r.check("energy: U_SS ≥ 0").unwrap();
        assert_eq!(c.closed_form.as_deref(), Some("U_SS = 1/C"));
        assert_eq!(c.violations.len(), 20);
        assert_eq!(c.violations[0].condition, "U_SS = 1/C");
    }
}
