//! Implicit solves behind the Legendre and exchange transforms.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Jet2, ScalarField};

const EPS: f64 = f64::EPSILON;

/// Settings for the safeguarded scalar root finder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalarSolveSettings {
    pub rel_tol: f64,
    pub max_newton: usize,
    pub max_bisection: usize,
    pub max_expansions: usize,
}

impl Default for ScalarSolveSettings {
    fn default() -> Self {
        ScalarSolveSettings {
            rel_tol: 1e-12,
            max_newton: 50,
            max_bisection: 200,
            max_expansions: 80,
        }
    }
}

/// Settings for damped Newton on a gradient map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonSettings {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            rel_tol: 1e-12,
            max_iter: 50,
            max_backtracks: 40,
        }
    }
}

/// Solve `g(t) = target` for a strictly monotone `g`.
///
/// `g` returns the value and derivative at `t`; an `Err` means `t` is
/// outside the admissible interval. The search starts at `start`, expands
/// geometrically until the target is bracketed, then runs Newton steps that
/// fall back to bisection whenever they leave the bracket.
pub fn solve_monotone(
    g: impl Fn(f64) -> Result<(f64, f64)>,
    target: f64,
    start: f64,
    pivot: usize,
    settings: &ScalarSolveSettings,
) -> Result<f64> {
    let bracket_failure = || Error::BracketFailure { pivot, target };
    let (f0, d0) = g(start).map_err(|_| bracket_failure())?;
    if !(d0 != 0.0 && d0.is_finite()) {
        return Err(Error::MonotonicityViolation {
            pivot,
            derivative: d0,
        });
    }
    let sign = d0.signum();
    let check_sign = |d: f64| -> Result<()> {
        if d.signum() != sign || d == 0.0 || !d.is_finite() {
            Err(Error::MonotonicityViolation {
                pivot,
                derivative: d,
            })
        } else {
            Ok(())
        }
    };
    let converged = |t: f64, f: f64, d: f64| {
        let r = f - target;
        r.abs() <= settings.rel_tol * target.abs().max(f.abs())
            || (r / d).abs() <= 4.0 * EPS * t.abs().max(f64::MIN_POSITIVE)
    };
    if converged(start, f0, d0) {
        return Ok(start);
    }

    // Expand from `start` in the direction that reduces the residual.
    let mut a = start;
    let mut fa = f0 - target;
    let dir = -(fa.signum()) * sign;
    let mut step = (fa / d0).abs().max(EPS * start.abs().max(1.0));
    let mut b = None;
    for _ in 0..settings.max_expansions {
        let mut trial = step;
        let mut eval = None;
        for _ in 0..60 {
            match g(a + dir * trial) {
                Ok(v) => {
                    eval = Some(v);
                    break;
                }
                Err(_) => trial *= 0.5,
            }
        }
        let (ft, dt) = eval.ok_or_else(bracket_failure)?;
        check_sign(dt)?;
        let t = a + dir * trial;
        if converged(t, ft, dt) {
            return Ok(t);
        }
        let rt = ft - target;
        if rt.signum() != fa.signum() {
            b = Some((t, rt));
            break;
        }
        a = t;
        fa = rt;
        step = trial * 2.0;
    }
    let (b, fb) = b.ok_or_else(bracket_failure)?;

    let (mut lo, mut hi, mut rlo) = if a < b { (a, b, fa) } else { (b, a, fb) };
    let mut t = if fa.abs() < fb.abs() { a } else { b };
    let mut newton_steps = 0;
    let mut bisections = 0;
    loop {
        let (ft, dt) = g(t).map_err(|_| bracket_failure())?;
        check_sign(dt)?;
        if converged(t, ft, dt) {
            return Ok(t);
        }
        let rt = ft - target;
        if rt.signum() == rlo.signum() {
            lo = t;
            rlo = rt;
        } else {
            hi = t;
        }
        if hi - lo <= 4.0 * EPS * lo.abs().max(hi.abs()) {
            return Ok(t);
        }
        let newton = t - rt / dt;
        if newton > lo && newton < hi && newton_steps < settings.max_newton {
            newton_steps += 1;
            t = newton;
        } else if bisections < settings.max_bisection {
            bisections += 1;
            t = 0.5 * (lo + hi);
        } else {
            return Err(Error::NewtonDivergence {
                residual: rt.abs() / target.abs().max(ft.abs()),
                iterations: newton_steps + bisections,
            });
        }
    }
}

/// Solve `∇φ(u) = target` by damped Newton, trying each seed in turn.
/// Returns the solution and the jet of φ there.
pub fn solve_gradient_map(
    field: &ScalarField,
    target: &[f64],
    seeds: &[&[f64]],
    settings: &NewtonSettings,
) -> Result<(Vec<f64>, Jet2)> {
    let mut best_residual = f64::INFINITY;
    let mut last_err = None;
    for seed in seeds {
        match newton_from(field, target, seed, settings) {
            Ok(sol) => return Ok(sol),
            Err((e, res)) => {
                best_residual = best_residual.min(res);
                last_err = Some(e);
            }
        }
    }
    match last_err {
        Some(e @ Error::SingularHessian { .. }) => Err(e),
        Some(Error::NewtonDivergence { iterations, .. }) => Err(Error::NewtonDivergence {
            residual: best_residual,
            iterations,
        }),
        _ => Err(Error::NewtonDivergence {
            residual: best_residual,
            iterations: 0,
        }),
    }
}

fn newton_from(
    field: &ScalarField,
    target: &[f64],
    seed: &[f64],
    settings: &NewtonSettings,
) -> std::result::Result<(Vec<f64>, Jet2), (Error, f64)> {
    let n = target.len();
    let diverged = |res: f64, it: usize| {
        (
            Error::NewtonDivergence {
                residual: res,
                iterations: it,
            },
            res,
        )
    };
    let mut x = seed.to_vec();
    let mut jet = field.jet(&x).map_err(|_| diverged(f64::INFINITY, 0))?;
    // Component scale: the larger of the target, the gradient, and the
    // variation of the gradient across the current point, `Σ_j |H_ij x_j|`.
    // The last keeps zero targets meaningful without mixing units.
    let scale = |j: &Jet2, x: &[f64], i: usize| -> f64 {
        let spread: f64 = (0..n).map(|k| (j.hessian[(i, k)] * x[k]).abs()).sum();
        target[i].abs().max(j.gradient[i].abs()).max(spread)
    };
    let tnorm = target.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let scales: Vec<f64> = (0..n)
        .map(|i| scale(&jet, &x, i).max(1e-300_f64.max(1e-14 * tnorm)))
        .collect();
    let rel = |j: &Jet2, x: &[f64]| -> f64 {
        (0..n).fold(0.0f64, |m, i| {
            let r = j.gradient[i] - target[i];
            let s = scale(j, x, i);
            if r == 0.0 {
                m
            } else if s == 0.0 {
                f64::INFINITY
            } else {
                m.max(r.abs() / s)
            }
        })
    };
    let merit = |j: &Jet2| -> f64 {
        (0..n)
            .map(|i| ((j.gradient[i] - target[i]) / scales[i]).powi(2))
            .sum::<f64>()
    };
    for it in 0..settings.max_iter {
        let res = rel(&jet, &x);
        if res <= settings.rel_tol {
            return Ok((x, jet));
        }
        let r = DVector::from_fn(n, |i, _| jet.gradient[i] - target[i]);
        let step = match jet.hessian.clone().lu().solve(&(-r)) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => {
                return Err((
                    Error::SingularHessian {
                        condition: f64::INFINITY,
                    },
                    res,
                ))
            }
        };
        let stagnant = (0..n).all(|i| step[i].abs() <= 8.0 * EPS * x[i].abs().max(f64::MIN_POSITIVE));
        if stagnant {
            return if res <= 1e-9 {
                Ok((x, jet))
            } else {
                Err(diverged(res, it))
            };
        }
        let m0 = merit(&jet);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..settings.max_backtracks {
            let trial: Vec<f64> = (0..n).map(|i| x[i] + alpha * step[i]).collect();
            if let Ok(j) = field.jet(&trial) {
                if merit(&j) < m0 || rel(&j, &trial) <= settings.rel_tol {
                    accepted = Some((trial, j));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((xt, jt)) => {
                x = xt;
                jet = jt;
            }
            None => {
                return if res <= 1e-9 {
                    Ok((x, jet))
                } else {
                    Err(diverged(res, it))
                }
            }
        }
    }
    let res = rel(&jet, &x);
    if res <= settings.rel_tol {
        Ok((x, jet))
    } else {
        Err(diverged(res, settings.max_iter))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_root_of_cubic() {
        let g = |t: f64| Ok((t * t * t + t, 3.0 * t * t + 1.0));
        let t = solve_monotone(g, 10.0, 0.0, 0, &ScalarSolveSettings::default()).unwrap();
        assert!((t - 2.0).abs() < 1e-13);
    }

    #[test]
    fn root_near_domain_edge_with_backtracking() {
        // ln t = -20 with t > 0, starting far to the right.
        let g = |t: f64| {
            if t <= 0.0 {
                Err(Error::domain(&[t], "t > 0"))
            } else {
                Ok((t.ln(), 1.0 / t))
            }
        };
        let t = solve_monotone(g, -20.0, 5.0, 0, &ScalarSolveSettings::default()).unwrap();
        assert!((t.ln() + 20.0).abs() < 1e-11);
    }

    #[test]
    fn decreasing_function_and_failures() {
        let g = |t: f64| Ok((-t.exp(), -t.exp()));
        let t = solve_monotone(g, -3.0, 0.0, 0, &ScalarSolveSettings::default()).unwrap();
        assert!((t - 3f64.ln()).abs() < 1e-13);
        // atan never exceeds π/2
        let unreachable = solve_monotone(
            |t: f64| Ok((t.atan(), 1.0 / (1.0 + t * t))),
            2.0,
            0.0,
            0,
            &ScalarSolveSettings::default(),
        );
        assert!(matches!(unreachable, Err(Error::BracketFailure { .. })));
        let flat = solve_monotone(|_| Ok((1.0, 0.0)), 2.0, 0.0, 0, &ScalarSolveSettings::default());
        assert!(matches!(flat, Err(Error::MonotonicityViolation { .. })));
    }

    #[test]
    fn gradient_map_with_zero_target_component() {
        use crate::field::hyper::Scalar;
        use crate::field::{DomainSpec, ScalarField};
        // φ = e^x + ½(y − x)², ∇φ = (eˣ − (y − x), y − x).
        let f = ScalarField::from_expr(&["x", "y"], DomainSpec::unbounded(2), vec![0.0, 5.0], "test", |u| {
            let d = u[1] - u[0];
            u[0].exp() + d * d * 0.5
        })
        .unwrap();
        let seed = [0.0, 5.0];
        let (x, _) = solve_gradient_map(&f, &[2.0, 0.0], &[&seed], &NewtonSettings::default()).unwrap();
        assert!((x[0] - 2f64.ln()).abs() < 1e-12);
        assert!((x[1] - x[0]).abs() < 1e-12);
    }
}
