//! Projected gradient ascent for concave objectives on convex sets,
//! Barzilai–Borwein steps with Armijo backtracking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::linalg::{dot, norm_inf, sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentConfig {
    /// Stop when `‖P(x + ∇f) − x‖∞` falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Armijo sufficient-increase constant.
    pub armijo: f64,
    /// Accept a stall (no Armijo step found) once the stationarity
    /// residual is below this; quadrature noise floors the gradient.
    pub stall_tol: f64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            tol: 1e-10,
            max_iter: 100_000,
            armijo: 1e-4,
            stall_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AscentReport {
    pub iterations: usize,
    pub final_step: f64,
    /// `‖P(x + ∇f) − x‖∞` at the returned point.
    pub stationarity: f64,
    pub stalled: bool,
}

pub struct Problem<'a> {
    pub value: &'a dyn Fn(&[f64]) -> Result<ExtReal>,
    pub gradient: &'a dyn Fn(&[f64]) -> Result<Vec<f64>>,
    pub project: &'a dyn Fn(&[f64]) -> Result<Vec<f64>>,
}

/// Maximizes `value` over the set behind `project`, starting from the
/// projection of `x0`.
pub fn maximize(p: &Problem, x0: &[f64], cfg: &AscentConfig) -> Result<(Vec<f64>, ExtReal, AscentReport)> {
    let mut x = (p.project)(x0)?;
    let mut fx = (p.value)(&x)?;
    if !fx.is_finite() {
        return Err(Error::Precondition(format!("objective is {fx} at the starting point {x:?}")));
    }
    let mut g = (p.gradient)(&x)?;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut step = 1.0;
    for it in 0..cfg.max_iter {
        let r = stationarity(p, &x, &g)?;
        if r < cfg.tol {
            return Ok((x, fx, report(it, step, r, false)));
        }
        if let Some((xp, gp)) = &prev {
            let s = sub(&x, xp);
            let y = sub(&g, gp);
            let sy = -dot(&s, &y);
            if sy > 0.0 {
                step = (dot(&s, &s) / sy).clamp(1e-12, 1e12);
            }
        }
        let mut accepted = None;
        let mut a = step;
        for _ in 0..80 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + a * gi).collect();
            let xn = (p.project)(&trial)?;
            let dx = sub(&xn, &x);
            if norm_inf(&dx) == 0.0 {
                break;
            }
            let fnew = (p.value)(&xn)?;
            if let (Some(f0), Some(f1)) = (fx.finite(), fnew.finite()) {
                if f1 >= f0 + cfg.armijo * dot(&g, &dx) {
                    accepted = Some((xn, fnew, a));
                    break;
                }
            } else if fnew == ExtReal::PosInf {
                return Err(Error::Precondition(format!("objective is +∞ at {xn:?}")));
            }
            a *= 0.5;
        }
        let Some((xn, fnew, a)) = accepted else {
            if r < cfg.stall_tol {
                return Ok((x, fx, report(it, step, r, true)));
            }
            return Err(Error::ConvergenceFailure(format!(
                "line search failed at {x:?} with stationarity {r:e}"
            )));
        };
        let gn = (p.gradient)(&xn)?;
        prev = Some((std::mem::replace(&mut x, xn), std::mem::replace(&mut g, gn)));
        fx = fnew;
        step = a;
    }
    let r = stationarity(p, &x, &g)?;
    if r < cfg.stall_tol {
        return Ok((x, fx, report(cfg.max_iter, step, r, true)));
    }
    Err(Error::ConvergenceFailure(format!(
        "projected gradient hit the {} iteration cap (stationarity {r:e})",
        cfg.max_iter
    )))
}

fn stationarity(p: &Problem, x: &[f64], g: &[f64]) -> Result<f64> {
    let y: Vec<f64> = x.iter().zip(g).map(|(a, b)| a + b).collect();
    Ok(norm_inf(&sub(&(p.project)(&y)?, x)))
}

fn report(iterations: usize, final_step: f64, stationarity: f64, stalled: bool) -> AscentReport {
    AscentReport {
        iterations,
        final_step,
        stationarity,
        stalled,
    }
}
