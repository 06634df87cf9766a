//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use thermoconvex::convexity::{
    classify_hessian, gradient_monotonicity_test, sample_box, sweep_probes, ClassifyPolicy, DefinitenessClass,
    Sampler,
};
use thermoconvex::eos::{rel_diff, Eos, IdealPolytropicParams, PolytropicGas, TaitEos, TaitParams, VanDerWaals, VanDerWaalsParams};
use thermoconvex::euler::{
    bregman, build_symmetrizer, energy_density_ordered, entropy_pair_consistency, godunov_chain,
    kinetic_density_hessian, EulerModel,
};
use thermoconvex::field::builtin::{half_squared_norm, quartic};
use thermoconvex::linalg::rel_frobenius;
use thermoconvex::stability::{check_energy_stability, check_gibbs_and_maxwell, check_measurable_stability};
use thermoconvex::transforms::{
    add_kinetic, congruence::exchange_congruence, congruence::reciprocal_congruence, exchange, legendre_with,
    reciprocal, LegendreOptions,
};
use thermoconvex::{Jet2, ScalarField};
use thermoconvex_cli::config::RunConfig;
use thermoconvex_cli::presets::preset;
use thermoconvex_cli::suites::{sample_probes, ProbeSet};

type Outcome = Result<(bool, String), String>;

fn lift<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn desk_gas() -> Arc<dyn Eos> {
    Arc::new(PolytropicGas::new(IdealPolytropicParams::from_two(Some(1.0), None, None, Some(1.4)).unwrap(), 1.0, 0.0, 300.0).unwrap())
}

fn tait(c: Option<f64>) -> TaitEos {
    let mut p = TaitParams::new(7.15, 3.3e8, 8.4e4, 1e-3, 296.0, 293.15, 1e5, 145.0, 4180.0).unwrap();
    if let Some(c) = c {
        p = p.with_heat_coefficient(c).unwrap();
    }
    TaitEos::new(p).unwrap()
}

fn random_points(lo: &[f64], hi: &[f64], count: usize, seed: u64, field: &ScalarField) -> Result<Vec<Vec<f64>>, String> {
    lift(sample_box(lo, hi, &Sampler::Random { count, seed }, |x| field.contains(x)))
}

fn desk_config(d: usize, count: usize) -> RunConfig {
    let mut c = preset("polytropic-desk").unwrap();
    c.dimension = d;
    c.sampler = Sampler::Random { count, seed: 7 };
    c
}

fn desk_probes(d: usize, count: usize) -> Result<ProbeSet, String> {
    let cfg = desk_config(d, count);
    let eos = lift(cfg.eos.build())?;
    lift(sample_probes(&cfg, eos.as_ref()))
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn jet_distance(a: &Jet2, b: &Jet2) -> f64 {
    let g = (&a.gradient - &b.gradient).norm() / b.gradient.norm().max(f64::MIN_POSITIVE);
    rel_diff(a.value, b.value).max(g).max(rel_frobenius(&a.hessian, &b.hessian, 0.0))
}

fn c1_headline() -> Outcome {
    let cfg = preset("polytropic-desk").unwrap();
    let (report, secs) = single_thread(|| {
        let t = Instant::now();
        let eos = lift(cfg.eos.build())?;
        let probes = lift(sample_probes(&cfg, eos.as_ref()))?;
        let model = lift(EulerModel::new(eos, 3))?;
        let r = lift(sweep_probes(
            &model.entropy,
            &probes.conserved,
            Some(DefinitenessClass::NegativeDefinite),
            ClassifyPolicy::Equilibrated,
            "preset",
        ))?;
        Ok::<_, String>((r, t.elapsed().as_secs_f64()))
    })?;
    let nd = report.counts.get(&DefinitenessClass::NegativeDefinite).copied().unwrap_or(0);
    let ok = report.probes.len() >= 1000 && nd == report.probes.len() && report.worst_margin > 1e-6 && secs < 30.0;
    Ok((
        ok,
        format!(
            "{nd}/{} probes NegativeDefinite (5×5), worst margin {:.3e}, {secs:.2} s on one thread",
            report.probes.len(),
            report.worst_margin
        ),
    ))
}

fn c2_duality() -> Outcome {
    let cfg = preset("polytropic-desk").unwrap();
    let eos = lift(cfg.eos.build())?;
    let probes = lift(sample_probes(&cfg, eos.as_ref()))?;
    let model = lift(EulerModel::new(eos.clone(), 3))?;
    let pol = ClassifyPolicy::Equilibrated;
    let s = lift(sweep_probes(&model.entropy, &probes.conserved, None, pol, ""))?;
    let e = lift(sweep_probes(&lift(energy_density_ordered(eos.as_ref(), 3))?, &probes.density, None, pol, ""))?;
    let pd = e.probes.iter().filter(|p| p.class == DefinitenessClass::PositiveDefinite).count();
    let exceptions = (0..probes.len())
        .filter(|&k| {
            (s.probes[k].class == DefinitenessClass::NegativeDefinite)
                != (e.probes[k].class == DefinitenessClass::PositiveDefinite)
        })
        .count();
    Ok((
        pd == probes.len() && exceptions == 0,
        format!("{pd}/{} Ē Hessians PositiveDefinite, {exceptions} equivalence exceptions, worst margin {:.3e}", probes.len(), e.worst_margin),
    ))
}

fn c3_reciprocal_congruence() -> Outcome {
    let gas = desk_gas();
    let e = lift(add_kinetic(&gas.internal_energy(), 3))?;
    let e_rec = lift(reciprocal(&e, 1))?;
    let pe = random_points(&[0.1, -1.0, -3.0, -3.0, -3.0], &[10.0, 1.0, 3.0, 3.0, 3.0], 100, 11, &e)?;
    let t = tait(None);
    let u = t.internal_energy();
    let u_rec = lift(reciprocal(&u, 1))?;
    let pt = random_points(&[0.97e-3, 280.0], &[1.0e-3, 320.0], 100, 12, &u)?;
    let worst = |phi: &ScalarField, psi: &ScalarField, pts: &[Vec<f64>]| -> Result<f64, String> {
        pts.iter()
            .map(|x| lift(reciprocal_congruence(phi, psi, x, 1)).map(|c| c.relative_residual()))
            .try_fold(0.0f64, |m, r| r.map(|r| m.max(r)))
    };
    let (a, b) = (worst(&e, &e_rec, &pe)?, worst(&u, &u_rec, &pt)?);
    Ok((
        a < 1e-10 && b < 1e-10 && pe.len() >= 100 && pt.len() >= 100,
        format!("polytropic u+kinetic {a:.2e}, Tait u(v,s) {b:.2e} at 100 probes each"),
    ))
}

fn c4_exchange_congruence() -> Outcome {
    let gas = desk_gas();
    let u = gas.internal_energy();
    let s = lift(exchange(&u, 2))?;
    let pts = random_points(&[0.1, -1.0], &[10.0, 1.0], 100, 13, &u)?;
    let worst = pts
        .iter()
        .map(|x| lift(exchange_congruence(&u, &s, x, 2)).map(|c| c.relative_residual()))
        .try_fold(0.0f64, |m, r| r.map(|r| m.max(r)))?;
    let t = tait(None);
    let ut = t.internal_energy();
    let st = lift(exchange(&ut, 2))?;
    let pt = random_points(&[0.97e-3, 280.0], &[1.0e-3, 320.0], 100, 14, &ut)?;
    let worst_t = pt
        .iter()
        .map(|x| lift(exchange_congruence(&ut, &st, x, 2)).map(|c| c.relative_residual()))
        .try_fold(0.0f64, |m, r| r.map(|r| m.max(r)))?;
    Ok((
        worst < 1e-10 && worst_t < 1e-10,
        format!("u↔s exchange: polytropic {worst:.2e}, Tait {worst_t:.2e} at 100 probes each"),
    ))
}

fn c5_involutions() -> Outcome {
    let gas = desk_gas();
    let u = gas.internal_energy();
    let pts = random_points(&[0.1, -1.0], &[10.0, 1.0], 50, 15, &u)?;
    let l2 = lift(legendre_with(&lift(legendre_with(&u, &LegendreOptions::default()))?, &LegendreOptions::default()))?;
    let r2 = lift(reciprocal(&lift(reciprocal(&u, 1))?, 1))?;
    let x2 = lift(exchange(&lift(exchange(&u, 2))?, 2))?;
    let mut worst = [0.0f64; 3];
    for x in &pts {
        let src = lift(u.jet(x))?;
        for (i, f) in [&l2, &r2, &x2].iter().enumerate() {
            worst[i] = worst[i].max(jet_distance(&lift(f.jet(x))?, &src));
        }
    }
    Ok((
        worst.iter().all(|w| *w < 1e-9),
        format!(
            "legendre² {:.2e}, reciprocal² {:.2e}, exchange² {:.2e} at {} probes",
            worst[0],
            worst[1],
            worst[2],
            pts.len()
        ),
    ))
}

fn c6_legendre_identity() -> Outcome {
    let gas = desk_gas();
    let u = gas.internal_energy();
    let e = lift(add_kinetic(&u, 3))?;
    let mut worst = [0.0f64; 2];
    for (i, (phi, lo, hi)) in [
        (&u, vec![0.1, -1.0], vec![10.0, 1.0]),
        (&e, vec![0.1, -1.0, -3.0, -3.0, -3.0], vec![10.0, 1.0, 3.0, 3.0, 3.0]),
    ]
    .into_iter()
    .enumerate()
    {
        let psi = lift(legendre_with(phi, &LegendreOptions::default()))?;
        for x in random_points(&lo, &hi, 50, 16 + i as u64, phi)? {
            let j = lift(phi.jet(&x))?;
            let w: Vec<f64> = j.gradient.iter().copied().collect();
            let h = lift(psi.jet(&w))?.hessian;
            let n = w.len();
            worst[i] = worst[i].max((h * &j.hessian - DMatrix::<f64>::identity(n, n)).norm());
        }
    }
    let probes = desk_probes(3, 50)?;
    let model = lift(EulerModel::new(desk_gas(), 3))?;
    let mut euler = 0.0f64;
    for s in &probes.states {
        euler = euler.max(lift(build_symmetrizer(&model, s))?.diagnostics.legendre_identity);
    }
    Ok((
        worst[0] < 1e-8 && worst[1] < 1e-8 && euler < 1e-8,
        format!(
            "u(v,s) {:.2e}, e(v,s,v̄) {:.2e}, entropy density Φ {euler:.2e} at 50 probes each",
            worst[0], worst[1]
        ),
    ))
}

fn c7_gibbs() -> Outcome {
    let t = tait(None);
    let ut = t.internal_energy();
    let pt = random_points(&[0.97e-3, 250.0], &[1.0e-3, 340.0], 200, 17, &ut)?;
    let rt = lift(check_gibbs_and_maxwell(&ut, &t, &pt))?;
    let gas = desk_gas();
    let ug = gas.internal_energy();
    let pg = random_points(&[0.1, -1.0], &[10.0, 1.0], 200, 18, &ug)?;
    let rg = lift(check_gibbs_and_maxwell(&ug, gas.as_ref(), &pg))?;
    let worst = |r: &thermoconvex::stability::GibbsReport| {
        r.pressure_residual.max(r.temperature_residual).max(r.maxwell_residual)
    };
    Ok((
        rt.passed && rg.passed && worst(&rt) < 1e-12 && worst(&rg) < 1e-12,
        format!("Tait {:.2e}, polytropic {:.2e} at 200 probes each", worst(&rt), worst(&rg)),
    ))
}

fn c8_tait_switch() -> Outcome {
    let pos = tait(None);
    let u = pos.internal_energy();
    let lo = [0.97e-3, 280.0];
    let hi = [1.0e-3, 320.0];
    let pts = random_points(&lo, &hi, 200, 19, &u)?;
    let sweep = lift(sweep_probes(&u, &pts, Some(DefinitenessClass::PositiveDefinite), ClassifyPolicy::Equilibrated, ""))?;
    let neg = tait(Some(-4180.0 / 293.15));
    let un = neg.internal_energy();
    let pn = random_points(&lo, &hi, 200, 20, &un)?;
    let r = lift(check_energy_stability(&un, &pn, Some(&neg)))?;
    let c = r.condition("U_SS").ok_or("no U_SS condition")?;
    let named = c.closed_form.as_deref() == Some("U_SS = 1/C");
    Ok((
        sweep.passed && sweep.violations.is_empty() && named && c.violations.len() == pn.len(),
        format!(
            "C>0: {}/{} PositiveDefinite; C<0: \"{}\" violated at {}/{} probes",
            sweep.counts.get(&DefinitenessClass::PositiveDefinite).copied().unwrap_or(0),
            pts.len(),
            c.closed_form.as_deref().unwrap_or("?"),
            c.violations.len(),
            pn.len()
        ),
    ))
}

/// Newton on `(p_v, p_vv) = 0` with a central-difference Jacobian of the jets.
fn critical_point(eos: &dyn Eos) -> Result<(f64, f64), String> {
    let thermal = eos.thermal();
    let f = |x: &[f64]| -> Result<DVector<f64>, String> {
        let j = lift(thermal.jet(x))?;
        Ok(DVector::from_vec(vec![j.gradient[0], j.hessian[(0, 0)]]))
    };
    let mut x = vec![2.5, 0.25];
    for _ in 0..50 {
        let r = f(&x)?;
        let mut jac = DMatrix::zeros(2, 2);
        for k in 0..2 {
            let h = 1e-6 * x[k].abs();
            let (mut a, mut b) = (x.clone(), x.clone());
            a[k] += h;
            b[k] -= h;
            let col = (f(&a)? - f(&b)?) / (2.0 * h);
            jac.set_column(k, &col);
        }
        let dx = jac.lu().solve(&(-&r)).ok_or("singular Jacobian")?;
        x[0] += dx[0];
        x[1] += dx[1];
        if dx.norm() < 1e-14 * (x[0].abs() + x[1].abs()) {
            break;
        }
    }
    Ok((x[0], x[1]))
}

fn c9_spinodal() -> Outcome {
    let params = VanDerWaalsParams::new(1.0, 1.0, 1.0, 1.5).unwrap();
    let eos = VanDerWaals::new(params, 3.0, 0.0, 1.0).unwrap();
    let (vc, tc) = critical_point(&eos)?;
    let (vc_exact, tc_exact) = params.critical_point();
    let b = params.b;
    let sweep = |theta: f64| -> Result<Vec<usize>, String> {
        let n = 400;
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![1.1 * b + (20.0 * b - 1.1 * b) * (i as f64 + 0.5) / n as f64, theta])
            .collect();
        let r = lift(check_measurable_stability(&eos, &pts))?;
        let c = r.stability.condition("p_v").ok_or("no p_v condition")?;
        Ok(c.violations.iter().map(|v| v.probe).collect())
    };
    let below = sweep(0.9 * tc)?;
    let above = sweep(1.5 * tc)?;
    let contiguous = below.windows(2).all(|w| w[1] == w[0] + 1);
    let oracle_ok = rel_diff(tc, tc_exact) < 1e-8 && rel_diff(vc, vc_exact) < 1e-8;
    Ok((
        oracle_ok && !below.is_empty() && contiguous && above.is_empty(),
        format!(
            "oracle θ_c = {tc:.12} (v_c = {vc:.9}); 0.9θ_c: p_v ≥ 0 on {} contiguous grid points; 1.5θ_c: {} points",
            below.len(),
            above.len()
        ),
    ))
}

fn c10_kinetic() -> Outcome {
    let probes = desk_probes(3, 100)?;
    let mut rank_ok = 0;
    let mut worst = 0.0f64;
    for s in &probes.states {
        let k = lift(kinetic_density_hessian(s.rho, &s.momentum))?;
        let v = lift(classify_hessian(&k.hessian, 0.0))?;
        let zero = v.eigenvalues.iter().filter(|l| l.abs() <= v.zero_band).count();
        let pos = v.eigenvalues.iter().filter(|l| **l > v.zero_band).count();
        if zero == 1 && pos == 3 && v.eigenvalues.len() == 4 {
            rank_ok += 1;
        }
        worst = worst.max(k.factorization_residual);
    }
    Ok((
        rank_ok == probes.len() && worst < 1e-14,
        format!("{rank_ok}/{} states with one zero-band and three positive eigenvalues; factorization {worst:.2e}", probes.len()),
    ))
}

fn c11_symmetrization() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for d in [1usize, 3] {
        let probes = desk_probes(d, 50)?;
        let model = lift(EulerModel::new(desk_gas(), d))?;
        let (mut asym, mut grad, mut pd) = (0.0f64, 0.0f64, 0usize);
        for s in &probes.states {
            let sys = lift(build_symmetrizer(&model, s))?;
            let dg = &sys.diagnostics;
            asym = dg.flux_asymmetry.iter().fold(asym.max(dg.l_ww_asymmetry), |m, x| m.max(*x));
            grad = dg.flux_gradient_residual.iter().fold(grad.max(dg.gradient_residual), |m, x| m.max(*x));
            if dg.l_ww_class == DefinitenessClass::PositiveDefinite {
                pd += 1;
            }
        }
        let pair = lift(entropy_pair_consistency(&model, &probes.states))?.worst;
        ok &= asym < 1e-9 && grad < 1e-9 && pair < 1e-9 && pd == probes.len() && probes.len() >= 50;
        lines.push(format!(
            "d={d}: asymmetry {asym:.2e}, L_w/L^i_w {grad:.2e}, pair {pair:.2e}, PD {pd}/{}",
            probes.len()
        ));
    }
    Ok((ok, lines.join("; ")))
}

fn c12_godunov() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for d in [1usize, 3] {
        let probes = desk_probes(d, 20)?;
        let model = lift(EulerModel::new(desk_gas(), d))?;
        let g = lift(godunov_chain(&model, &probes.states))?;
        ok &= g.value_residual < 1e-8 && g.chain.passed;
        lines.push(format!(
            "d={d}: L residual {:.2e}, main field {:.2e} at {} probes",
            g.value_residual,
            g.main_field_residual,
            probes.len()
        ));
    }
    Ok((ok, lines.join("; ")))
}

fn c13_relative_energy() -> Outcome {
    let probes = desk_probes(3, 1000)?;
    let gas = desk_gas();
    let field = lift(energy_density_ordered(gas.as_ref(), 3))?;
    let n = probes.len();
    let mut positive = 0;
    for k in 0..n {
        let j = (k * 7919 + 13) % n;
        let j = if j == k { (k + 1) % n } else { j };
        if lift(bregman(&field, &probes.density[k], &probes.density[j]))? > 0.0 {
            positive += 1;
        }
    }
    let mut self_worst = 0.0f64;
    for u in &probes.density[..100] {
        let r = lift(bregman(&field, u, u))?;
        self_worst = self_worst.max(r.abs() / lift(field.value(u))?.abs());
    }
    let q = half_squared_norm(5);
    let pts = random_points(&[-5.0; 5], &[5.0; 5], 200, 21, &q)?;
    let mut quad = 0.0f64;
    for p in pts.chunks(2) {
        let r = lift(bregman(&q, &p[0], &p[1]))?;
        let exact = 0.5 * p[0].iter().zip(&p[1]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        quad = quad.max(rel_diff(r, exact));
    }
    Ok((
        positive == n && n == 1000 && self_worst < 1e-12 && quad < 1e-12,
        format!("{positive}/{n} pairs R_E > 0; self-pairs {self_worst:.2e}; quadratic fixture {quad:.2e}"),
    ))
}

fn c14_quartic() -> Outcome {
    let f = quartic();
    let pts = random_points(&[-2.0], &[2.0], 400, 22, &f)?;
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = pts.chunks(2).map(|p| (p[0].clone(), p[1].clone())).collect();
    let mono = lift(gradient_monotonicity_test(&f, &pairs))?;
    let class = lift(classify_hessian(&lift(f.jet(&[0.0]))?.hessian, 0.0))?.class;
    Ok((
        mono.passed && mono.strict && class == DefinitenessClass::PositiveSemiDefinite,
        format!(
            "strict gradient monotonicity on {} pairs: {}; Hessian at 0: {class}",
            pairs.len(),
            if mono.passed { "holds" } else { "fails" }
        ),
    ))
}

fn c15_determinism() -> Outcome {
    let cfg = preset("polytropic-desk").unwrap();
    let a = single_thread(|| thermoconvex_cli::run_check(&cfg)).map_err(|e| e.to_string())?;
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| thermoconvex_cli::run_check(&cfg))
        .map_err(|e| e.to_string())?;
    let (ja, jb) = (a.to_json(), b.to_json());
    Ok((
        ja == jb && a.to_csv() == b.to_csv() && a.verdict.passed,
        format!("full suite on 1 and 4 threads: {} report bytes, identical: {}", ja.len(), ja == jb),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 15] = [
        ("entropy density negative definite", c1_headline),
        ("energy density duality", c2_duality),
        ("reciprocal congruence", c3_reciprocal_congruence),
        ("exchange congruence", c4_exchange_congruence),
        ("involution round trips", c5_involutions),
        ("legendre hessian identity", c6_legendre_identity),
        ("gibbs and maxwell relations", c7_gibbs),
        ("tait convexity switch", c8_tait_switch),
        ("van der waals spinodal", c9_spinodal),
        ("kinetic density rank", c10_kinetic),
        ("symmetrization", c11_symmetrization),
        ("godunov chain", c12_godunov),
        ("relative energy", c13_relative_energy),
        ("quartic counterexample", c14_quartic),
        ("determinism", c15_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = match std::panic::catch_unwind(f) {
            Ok(Ok(r)) => r,
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        if !ok {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
