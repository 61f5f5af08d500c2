//! Growth rate, relative rate of return and the numéraire portfolio.

use serde::{Deserialize, Serialize};

use crate::arbitrage::find_immediate_arbitrage;
use crate::constraints::{natural_constraints, null_space, ConstraintSet, NullSpaceBasis};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecConfig};
use crate::extended::ExtReal;
use crate::levy::integrate::{integrate_shaped, Integrand};
use crate::levy::triplet::small;
use crate::levy::{approximate, integrates_log, DensitySegment, LevyTriplet, SupportRegion, TailLaw};
use crate::linalg::{add, dot, norm, norm_inf, quad_form, sub, unit};
use crate::lowdisc::halton;
use crate::optimize::{maximize, AscentConfig, AscentReport, Problem};
use crate::quadrature::QuadConfig;

/// Barrier: portfolios must keep `1 + π⊤x ≥ δ` on the support.
pub const DOMAIN_DELTA: f64 = 1e-9;
const CAUCHY_TOL: f64 = 1e-7;
const MAX_LOG2_N: u32 = 10;
/// Stand-in for an infinite partial derivative inside the ascent.
const STEEP: f64 = 1e8;

const LOG_GROWTH: TailLaw = TailLaw {
    kappa: 0.0,
    power: 0.0,
    log_power: 1.0,
};
const LINEAR_GROWTH: TailLaw = TailLaw {
    kappa: 0.0,
    power: 1.0,
    log_power: 0.0,
};

fn ln1p_or_neg_inf(v: f64) -> f64 {
    if v <= -1.0 {
        f64::NEG_INFINITY
    } else {
        v.ln_1p()
    }
}

/// `𝔤(π) = π⊤b − ½π⊤cπ + ∫(log(1+π⊤x) − π⊤x 1_{|x|≤1}) ν(dx)`.
pub fn growth_rate(t: &LevyTriplet, pi: &[f64]) -> Result<ExtReal> {
    growth_rate_with(t, pi, &QuadConfig::default())
}

pub fn growth_rate_with(t: &LevyTriplet, pi: &[f64], cfg: &QuadConfig) -> Result<ExtReal> {
    dim_check(t, pi)?;
    let inf = t.nu.support_inf_linear(pi);
    if inf < -1.0 - 1e-12 || t.nu.atoms.iter().any(|a| dot(pi, &a.x) <= -1.0) {
        return Ok(ExtReal::NegInf);
    }
    let f = |x: &[f64]| {
        let v = dot(pi, x);
        ln1p_or_neg_inf(v) - v * small(x)
    };
    let growth = |dir: &[f64]| if dot(pi, dir) > 0.0 { LOG_GROWTH } else { TailLaw::FLAT };
    let beyond = |x: &[f64], e: f64| {
        let v = dot(pi, x);
        if v > 0.0 {
            v.ln() + e
        } else {
            f(x)
        }
    };
    let planes = [(pi.to_vec(), -1.0)];
    let integral = integrate_shaped(
        &t.nu,
        &Integrand {
            f: &f,
            origin_order: 2.0,
            growth: &growth,
            planes: &planes,
            beyond: Some(&beyond),
            exp_term: None,
            wave: None,
        },
        cfg,
    )?;
    Ok(integral.shift(dot(pi, &t.b) - 0.5 * quad_form(&t.c, pi, pi)))
}

/// `rel(π|ρ) = (π−ρ)⊤b − (π−ρ)⊤cρ + ∫((π−ρ)⊤x/(1+ρ⊤x) − (π−ρ)⊤x 1_{|x|≤1}) ν(dx)`.
pub fn rel_rate(t: &LevyTriplet, pi: &[f64], rho: &[f64]) -> Result<ExtReal> {
    rel_rate_with(t, pi, rho, &QuadConfig::default())
}

pub fn rel_rate_with(t: &LevyTriplet, pi: &[f64], rho: &[f64], cfg: &QuadConfig) -> Result<ExtReal> {
    dim_check(t, pi)?;
    dim_check(t, rho)?;
    let inf = t.nu.support_inf_linear(rho);
    if inf < -1.0 - 1e-12 {
        return Err(Error::Precondition(format!(
            "ν[ρ⊤x < −1] > 0 for ρ = {rho:?}; the relative rate is undefined"
        )));
    }
    let delta = sub(pi, rho);
    let mut total = ExtReal::Finite(dot(&delta, &t.b) - quad_form(&t.c, &delta, rho));
    // Jumps landing exactly on 1 + ρ⊤x = 0 with positive density.
    let mut edge = ExtReal::ZERO;
    if inf <= -1.0 + 1e-12 {
        for seg in &t.nu.densities {
            for (v, s) in touching_vertices(seg, rho) {
                if seg.family.density_at(s, &v) > 0.0 {
                    let sign = dot(&delta, &v);
                    let e = if sign > 0.0 {
                        ExtReal::PosInf
                    } else if sign < 0.0 {
                        ExtReal::NegInf
                    } else {
                        ExtReal::ZERO
                    };
                    edge = edge
                        .checked_add(e)
                        .ok_or_else(|| Error::UndecidableTail("relative rate has ±∞ parts".into()))?;
                }
            }
        }
    }
    if !edge.is_finite() {
        return Ok(edge);
    }
    let f = |x: &[f64]| {
        let dx = dot(&delta, x);
        let den = 1.0 + dot(rho, x);
        let ratio = if den > 0.0 {
            dx / den
        } else if dx > 0.0 {
            f64::INFINITY
        } else if dx < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        ratio - dx * small(x)
    };
    let growth = |dir: &[f64]| {
        if dot(rho, dir) <= 0.0 && dot(&delta, dir) != 0.0 {
            LINEAR_GROWTH
        } else {
            TailLaw::FLAT
        }
    };
    let planes = [(rho.to_vec(), -1.0)];
    let integral = integrate_shaped(
        &t.nu,
        &Integrand {
            f: &f,
            origin_order: 2.0,
            growth: &growth,
            planes: &planes,
            beyond: None,
            exp_term: None,
            wave: None,
        },
        cfg,
    )?;
    total = total
        .checked_add(integral)
        .ok_or_else(|| Error::UndecidableTail("relative rate has ±∞ parts".into()))?;
    Ok(total)
}

/// Support vertices (with their segment parameter) where `1 + ρ⊤x = 0`.
fn touching_vertices(seg: &DensitySegment, rho: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let hit = |v: &[f64]| (1.0 + dot(rho, v)).abs() <= 1e-12;
    match &seg.support {
        SupportRegion::Interval { lo, hi, .. } => [*lo, *hi]
            .into_iter()
            .filter(|s| s.is_finite() && hit(&[*s]))
            .map(|s| (vec![s], s))
            .collect(),
        SupportRegion::HalfLine {
            origin,
            direction,
            start,
        } => {
            let v: Vec<f64> = origin.iter().zip(direction).map(|(o, d)| o + start * d).collect();
            if hit(&v) {
                vec![(v, *start)]
            } else {
                Vec::new()
            }
        }
        _ => Vec::new(),
    }
}

/// Directional derivative of `𝔤` at `π` along `d`; equals `rel(π + d | π)`.
pub fn growth_rate_derivative(t: &LevyTriplet, pi: &[f64], d: &[f64]) -> Result<ExtReal> {
    rel_rate(t, &add(pi, d), pi)
}

/// `∇𝔤(π)` with infinite partials replaced by `±STEEP`.
fn gradient(t: &LevyTriplet, pi: &[f64], cfg: &QuadConfig) -> Result<Vec<f64>> {
    (0..t.dim)
        .map(|i| {
            Ok(match rel_rate_with(t, &add(pi, &unit(t.dim, i)), pi, cfg)? {
                ExtReal::Finite(v) => v.clamp(-STEEP, STEEP),
                ExtReal::PosInf => STEEP,
                ExtReal::NegInf => -STEEP,
            })
        })
        .collect()
}

/// `𝔤(π) − 𝔤(ρ)`, finite near `ρ` even when both growth rates are `+∞`.
pub fn relative_growth(t: &LevyTriplet, pi: &[f64], rho: &[f64], cfg: &QuadConfig) -> Result<ExtReal> {
    dim_check(t, pi)?;
    if t.nu.support_inf_linear(pi) < -1.0 - 1e-12 || t.nu.atoms.iter().any(|a| dot(pi, &a.x) <= -1.0) {
        return Ok(ExtReal::NegInf);
    }
    let delta = sub(pi, rho);
    let f = |x: &[f64]| ln1p_or_neg_inf(dot(pi, x)) - ln1p_or_neg_inf(dot(rho, x)) - dot(&delta, x) * small(x);
    let growth = |dir: &[f64]| {
        let (a, b) = (dot(pi, dir), dot(rho, dir));
        if (a > 0.0) == (b > 0.0) {
            TailLaw::FLAT
        } else {
            LOG_GROWTH
        }
    };
    let planes = [(pi.to_vec(), -1.0), (rho.to_vec(), -1.0)];
    let integral = integrate_shaped(
        &t.nu,
        &Integrand {
            f: &f,
            origin_order: 2.0,
            growth: &growth,
            planes: &planes,
            beyond: None,
            exp_term: None,
            wave: None,
        },
        cfg,
    )?;
    Ok(integral.shift(dot(&delta, &t.b) - 0.5 * quad_form(&t.c, pi, pi) + 0.5 * quad_form(&t.c, rho, rho)))
}

fn dim_check(t: &LevyTriplet, v: &[f64]) -> Result<()> {
    if v.len() != t.dim {
        return Err(Error::DimensionMismatch {
            expected: t.dim,
            got: v.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ApproxStep {
    pub n: u32,
    pub rho: Vec<f64>,
    pub growth_rate: ExtReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SolveMode {
    /// `ν` integrates the log; `𝔤` maximized directly.
    Direct,
    /// Approximating sequence met the Cauchy stop rule.
    Approximation,
    /// Approximating sequence hit the cap; finished by maximizing
    /// `𝔤(·) − 𝔤(ρ_cap)` on the original measure.
    ApproximationPolished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolverDiagnostics {
    pub mode: SolveMode,
    pub iterations: usize,
    pub final_step: f64,
    pub stationarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NumeraireResult {
    pub rho: Vec<f64>,
    pub growth_rate: ExtReal,
    pub kkt_residual: f64,
    #[serde(default)]
    pub approx_trace: Vec<ApproxStep>,
    pub diagnostics: SolverDiagnostics,
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NumeraireConfig {
    pub ascent: AscentConfig,
    pub quad: QuadConfig,
    pub exec: ExecConfig,
}

/// `C ∩ 𝔑⊥ ∩ {p : p⊤v ≥ −1 + δ on the support}`.
pub fn feasible_set(t: &LevyTriplet, c: &ConstraintSet, null: &NullSpaceBasis, delta: f64) -> ConstraintSet {
    let mut sets = match c {
        ConstraintSet::Intersection { sets } => sets.clone(),
        other => vec![other.clone()],
    };
    if !null.basis.is_empty() {
        let mut rows = Vec::new();
        for z in &null.basis {
            rows.push(z.clone());
            rows.push(z.iter().map(|v| -v).collect());
        }
        let n = rows.len();
        sets.push(ConstraintSet::Polyhedron {
            a_mat: rows,
            a: vec![0.0; n],
        });
    }
    let nc = natural_constraints(&t.nu);
    if !nc.is_everything() {
        sets.push(nc.shrunk(delta));
    }
    ConstraintSet::Intersection { sets }
}

/// `ρ = argmax 𝔤` over `C ∩ 𝔑⊥`, through the approximating sequence when
/// `ν` does not integrate the log.
pub fn solve_numeraire(t: &LevyTriplet, c: &ConstraintSet) -> Result<NumeraireResult> {
    solve_numeraire_with(t, c, &NumeraireConfig::default(), None)
}

pub fn solve_numeraire_with(
    t: &LevyTriplet,
    c: &ConstraintSet,
    cfg: &NumeraireConfig,
    start: Option<&[f64]>,
) -> Result<NumeraireResult> {
    let d = t.dim;
    t.validate()?;
    c.validate(d)?;
    let null = null_space(t);
    null.check_inside(c)?;
    let cert = find_immediate_arbitrage(t, &c.recession_cone(d)?, &null)?;
    if let Some(xi) = cert.witness() {
        return Err(Error::IaoPresent { xi: xi.to_vec() });
    }
    let feasible = feasible_set(t, c, &null, DOMAIN_DELTA);
    let x0 = start.map_or_else(|| vec![0.0; d], <[f64]>::to_vec);
    let mut trace = Vec::new();
    let (rho, report, mode) = if integrates_log(&t.nu)? {
        let (rho, _, rep) = ascend_growth(t, &feasible, &x0, cfg)?;
        (rho, rep, SolveMode::Direct)
    } else {
        let mut x = x0;
        let mut last: Option<(Vec<f64>, AscentReport)> = None;
        let mut done = None;
        for k in 0..=MAX_LOG2_N {
            let n = 1u32 << k;
            let tn = LevyTriplet {
                nu: approximate(&t.nu, n),
                ..t.clone()
            };
            let (rho_n, g_n, rep) = ascend_growth(&tn, &feasible, &x, cfg)?;
            trace.push(ApproxStep {
                n,
                rho: rho_n.clone(),
                growth_rate: g_n,
            });
            if let Some((prev, _)) = &last {
                if norm(&sub(&rho_n, prev)) < CAUCHY_TOL {
                    done = Some((rho_n.clone(), rep.clone()));
                }
            }
            x = rho_n.clone();
            last = Some((rho_n, rep));
            if done.is_some() {
                break;
            }
        }
        match done {
            Some((rho, rep)) => (rho, rep, SolveMode::Approximation),
            None => {
                let (anchor, _) = last.expect("at least one approximant");
                let (rho, rep) = polish(t, &feasible, &anchor, cfg)?;
                (rho, rep, SolveMode::ApproximationPolished)
            }
        }
    };
    let growth = growth_rate_with(t, &rho, &cfg.quad)?;
    let kkt = verify_numeraire_with(t, c, &rho, cfg.exec)?;
    Ok(NumeraireResult {
        rho,
        growth_rate: growth,
        kkt_residual: kkt,
        approx_trace: trace,
        diagnostics: SolverDiagnostics {
            mode,
            iterations: report.iterations,
            final_step: report.final_step,
            stationarity: report.stationarity,
        },
    })
}

fn ascend_growth(
    t: &LevyTriplet,
    feasible: &ConstraintSet,
    x0: &[f64],
    cfg: &NumeraireConfig,
) -> Result<(Vec<f64>, ExtReal, AscentReport)> {
    let value = |p: &[f64]| growth_rate_with(t, p, &cfg.quad);
    let grad = |p: &[f64]| gradient(t, p, &cfg.quad);
    let project = |p: &[f64]| feasible.project(p);
    maximize(
        &Problem {
            value: &value,
            gradient: &grad,
            project: &project,
        },
        x0,
        &cfg.ascent,
    )
}

fn polish(
    t: &LevyTriplet,
    feasible: &ConstraintSet,
    anchor: &[f64],
    cfg: &NumeraireConfig,
) -> Result<(Vec<f64>, AscentReport)> {
    let value = |p: &[f64]| relative_growth(t, p, anchor, &cfg.quad);
    let grad = |p: &[f64]| gradient(t, p, &cfg.quad);
    let project = |p: &[f64]| feasible.project(p);
    let (rho, _, rep) = maximize(
        &Problem {
            value: &value,
            gradient: &grad,
            project: &project,
        },
        anchor,
        &cfg.ascent,
    )?;
    Ok((rho, rep))
}

/// `sup rel(π|ρ)` over a deterministic sample of `C ∩ C₀`: probe points,
/// recession rays, Halton points and coordinate steps around `ρ`.
pub fn verify_numeraire(t: &LevyTriplet, c: &ConstraintSet, rho: &[f64]) -> Result<f64> {
    verify_numeraire_with(t, c, rho, ExecConfig::default())
}

pub fn verify_numeraire_with(t: &LevyTriplet, c: &ConstraintSet, rho: &[f64], exec: ExecConfig) -> Result<f64> {
    let sample = verification_sample(t, c, rho)?;
    let values = map_indexed(sample.len(), exec, |k| rel_rate(t, &sample[k], rho));
    let mut worst = 0.0f64;
    for v in values {
        worst = worst.max(v?.to_f64());
    }
    Ok(worst)
}

/// Points of `C ∩ C₀` used by [`verify_numeraire`].
pub fn verification_sample(t: &LevyTriplet, c: &ConstraintSet, rho: &[f64]) -> Result<Vec<Vec<f64>>> {
    let d = t.dim;
    let nc = natural_constraints(&t.nu);
    let mut sets = match c {
        ConstraintSet::Intersection { sets } => sets.clone(),
        other => vec![other.clone()],
    };
    if !nc.is_everything() {
        sets.push(nc.shrunk(0.0));
    }
    let target = ConstraintSet::Intersection { sets };
    let (points, rays) = c.probe_points(d)?;
    let radius = 1.0 + norm_inf(rho);
    let mut raw: Vec<Vec<f64>> = points;
    for r in &rays {
        for s in [0.1, 1.0, 10.0] {
            raw.push(rho.iter().zip(r).map(|(a, b)| a + s * b).collect());
        }
    }
    for i in 0..d {
        for h in [1e-3, 1e-1, 1.0] {
            for sgn in [1.0, -1.0] {
                let mut q = rho.to_vec();
                q[i] += sgn * h;
                raw.push(q);
            }
        }
    }
    for u in halton(1000, d) {
        raw.push(u.iter().zip(rho).map(|(v, r)| r + radius * (2.0 * v - 1.0)).collect());
    }
    let mut out = Vec::with_capacity(raw.len());
    for q in raw {
        let p = target.project(&q)?;
        if t.nu.support_inf_linear(&p) >= -1.0 - 1e-12 {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{Family, JumpMeasure};
    use approx::assert_abs_diff_eq;

    pub(crate) fn poly_1d() -> LevyTriplet {
        let nu = JumpMeasure::zero().with_density(DensitySegment::new(
            Family::PolynomialOnInterval {
                coeffs: vec![1.0, 1.0],
            },
            SupportRegion::interval(-1.0, 1.0),
        ));
        LevyTriplet::new(vec![1.0], vec![vec![0.0]], nu).unwrap()
    }

    #[test]
    fn poly_anchor_derivative() {
        let t = poly_1d();
        let d = growth_rate_derivative(&t, &[1.0], &[1.0]).unwrap();
        assert_abs_diff_eq!(d.to_f64(), 1.0 / 3.0, epsilon = 1e-10);
        let r = rel_rate(&t, &[0.0], &[1.0]).unwrap();
        assert_abs_diff_eq!(r.to_f64(), -1.0 / 3.0, epsilon = 1e-10);
        // 𝔤(1) = 1 + ∫(log(1+x) − x)(1+x)dx = 2 log 2 − 1/2 − 2/3 + 1
        let g = growth_rate(&t, &[1.0]).unwrap();
        assert_abs_diff_eq!(g.to_f64(), 0.719_627_694_453_223_9, epsilon = 1e-9);
        // At π = −1 the jump x = 1 wipes the wealth out with density 2.
        assert_eq!(growth_rate_derivative(&t, &[-1.0], &[1.0]).unwrap(), ExtReal::PosInf);
        assert_eq!(growth_rate(&t, &[1.5]).unwrap(), ExtReal::NegInf);
    }

    #[test]
    fn poly_numeraire_is_one() {
        let r = solve_numeraire(&poly_1d(), &ConstraintSet::Full).unwrap();
        assert_abs_diff_eq!(r.rho[0], 1.0, epsilon = 1e-6);
        assert!(r.kkt_residual <= 1e-6, "{}", r.kkt_residual);
        assert_eq!(r.diagnostics.mode, SolveMode::Direct);
    }

    #[test]
    fn bsm_closed_form() {
        let c = vec![vec![0.04, 0.01], vec![0.01, 0.09]];
        let b = vec![0.1, 0.05];
        let t = LevyTriplet::gaussian(b.clone(), c.clone()).unwrap();
        let r = solve_numeraire(&t, &ConstraintSet::Full).unwrap();
        let rho = crate::linalg::solve(&c, &b).unwrap();
        assert_abs_diff_eq!(r.rho[0], rho[0], epsilon = 1e-8);
        assert_abs_diff_eq!(r.rho[1], rho[1], epsilon = 1e-8);
        let g = growth_rate(&t, &rho).unwrap().to_f64();
        assert_abs_diff_eq!(g, 0.5 * dot(&b, &rho), epsilon = 1e-12);
    }

    #[test]
    fn constrained_bsm_sits_on_the_boundary() {
        let t = LevyTriplet::gaussian(vec![0.1], vec![vec![0.04]]).unwrap();
        let c = ConstraintSet::Box {
            lower: vec![0.0],
            upper: vec![1.0],
        };
        let r = solve_numeraire(&t, &c).unwrap();
        assert_abs_diff_eq!(r.rho[0], 1.0, epsilon = 1e-12);
        assert!(r.kkt_residual <= 1e-12);
        let r = solve_numeraire(&t, &ConstraintSet::singleton_zero(1)).unwrap();
        assert_eq!(r.rho, vec![0.0]);
        assert_eq!(r.kkt_residual, 0.0);
    }

    #[test]
    fn perturbed_numeraire_is_detected() {
        let t = poly_1d();
        let res = verify_numeraire(&t, &ConstraintSet::Full, &[0.9]).unwrap();
        assert!(res > 1e-3, "{res}");
    }

    #[test]
    fn iao_blocks_the_solver() {
        let t = LevyTriplet::new(
            vec![1.0],
            vec![vec![0.0]],
            JumpMeasure::from_atoms(vec![crate::levy::Atom::new(vec![1.0], 1.0)]),
        )
        .unwrap();
        assert!(matches!(solve_numeraire(&t, &ConstraintSet::Full), Err(Error::IaoPresent { .. })));
    }

    #[test]
    fn derivative_matches_rel_and_finite_differences() {
        let t = poly_1d();
        for &(p, q) in &[(0.2, 0.5), (-0.3, 0.1), (0.6, -0.4)] {
            let d = growth_rate_derivative(&t, &[p], &[q - p]).unwrap().to_f64();
            let r = rel_rate(&t, &[q], &[p]).unwrap().to_f64();
            assert_abs_diff_eq!(d, r, epsilon = 1e-12);
            let h = 1e-5;
            let fd = (growth_rate(&t, &[p + h]).unwrap().to_f64() - growth_rate(&t, &[p - h]).unwrap().to_f64())
                / (2.0 * h);
            let g1 = growth_rate_derivative(&t, &[p], &[1.0]).unwrap().to_f64();
            assert_abs_diff_eq!(fd, g1, epsilon = 1e-6);
        }
    }

    #[test]
    fn log_infinite_market_goes_through_the_approximation() {
        let nu = JumpMeasure::zero()
            .with_density(DensitySegment::new(
                Family::PolynomialOnInterval { coeffs: vec![1.0] },
                SupportRegion::interval(-1.0, 1.0),
            ))
            .with_density(DensitySegment::new(
                Family::PowerLogTail {
                    scale: 1.0,
                    log_exponent: 2.0,
                },
                SupportRegion::interval(1.0, f64::INFINITY),
            ));
        let t = LevyTriplet::new(vec![0.0], vec![vec![0.0]], nu).unwrap();
        let r = solve_numeraire(&t, &ConstraintSet::Full).unwrap();
        assert_eq!(r.approx_trace[0].n, 1);
        assert_abs_diff_eq!(r.approx_trace[0].rho[0], 0.698_184_628_288_199, epsilon = 1e-6);
        assert_abs_diff_eq!(r.rho[0], 0.915_822_291_494_887, epsilon = 1e-4);
        assert!(r.kkt_residual <= 1e-6, "{}", r.kkt_residual);
    }
}
