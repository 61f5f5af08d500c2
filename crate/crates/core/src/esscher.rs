//! Exponential tilting of Lévy laws, supermartingale drift conditions and
//! completeness.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arbitrage::find_immediate_arbitrage;
use crate::constraints::{natural_constraints, null_space, ConstraintSet};
use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::levy::integrate::{integrate_shaped, tails_integrable, Integrand};
use crate::levy::triplet::{linear_growth, small};
use crate::levy::{mean_rate, Atom, DensitySegment, Family, JumpMeasure, LevyTriplet, MeanRate, TailLaw};
use crate::linalg::{dot, kernel_and_complement, mat_vec, norm, norm_inf, quad_form, sub};
use crate::lp::{LinearProgram, LpOutcome};
use crate::optimize::{maximize, AscentConfig, Problem};
use crate::quadrature::QuadConfig;

/// Which `g` multiplies the tilt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GTag {
    #[default]
    Zero,
    /// `g(x) = (|x|² − 1)⁺`
    QuadraticTail,
}

impl GTag {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            GTag::Zero => 0.0,
            GTag::QuadraticTail => (dot(x, x) - 1.0).max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct EsscherParams {
    pub eta: Vec<f64>,
    pub g_tag: GTag,
    pub psi: f64,
}

impl EsscherParams {
    /// Fills in `ψ(η, g)`.
    pub fn new(t: &LevyTriplet, eta: Vec<f64>, g_tag: GTag) -> Result<Self> {
        let psi = psi(t, &eta, g_tag)?;
        Ok(EsscherParams { eta, g_tag, psi })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TransformedTriplet {
    pub triplet: LevyTriplet,
    pub source: LevyTriplet,
    pub params: EsscherParams,
}

/// Tilt exponent `−η⊤x − g(x)`.
fn tilt_exponent(eta: &[f64], g: GTag) -> impl Fn(&[f64]) -> f64 + '_ {
    move |x: &[f64]| -dot(eta, x) - g.eval(x)
}

/// Errors unless `∫ e^{−η⊤x−g} 1_{|x|>1} ν(dx) < ∞`.
pub fn check_tilt(t: &LevyTriplet, eta: &[f64], g: GTag) -> Result<()> {
    if eta.len() != t.dim {
        return Err(Error::DimensionMismatch {
            expected: t.dim,
            got: eta.len(),
        });
    }
    if g == GTag::QuadraticTail {
        return Ok(());
    }
    let growth = |dir: &[f64]| TailLaw {
        kappa: -dot(eta, dir),
        power: 0.0,
        log_power: 0.0,
    };
    if tails_integrable(&t.nu, &growth) {
        Ok(())
    } else {
        Err(Error::TiltNotIntegrable(format!(
            "e^(-η⊤x) with η = {eta:?} has an infinite mass tail"
        )))
    }
}

/// `ψ(η,g) = −η⊤b + ½η⊤cη + ∫(e^{−η⊤x−g(x)} − 1 + η⊤x 1_{|x|≤1}) ν(dx)`.
pub fn psi(t: &LevyTriplet, eta: &[f64], g: GTag) -> Result<f64> {
    check_tilt(t, eta, g)?;
    let h = tilt_exponent(eta, g);
    let f = |x: &[f64]| {
        if small(x) > 0.0 {
            h(x).exp_m1() + dot(eta, x)
        } else {
            -1.0
        }
    };
    let tail_exp = |x: &[f64]| if small(x) > 0.0 { f64::NEG_INFINITY } else { h(x) };
    let growth = |dir: &[f64]| {
        let k = -dot(eta, dir);
        if g == GTag::Zero && k > 0.0 {
            TailLaw {
                kappa: k,
                power: 0.0,
                log_power: 0.0,
            }
        } else {
            TailLaw::FLAT
        }
    };
    let v = integrate_shaped(
        &t.nu,
        &Integrand {
            f: &f,
            origin_order: 2.0,
            growth: &growth,
            planes: &[],
            beyond: None,
            exp_term: Some(&tail_exp),
            wave: None,
        },
        &QuadConfig::default(),
    )?;
    let v = v.shift(-dot(eta, &t.b) + 0.5 * quad_form(&t.c, eta, eta));
    v.finite()
        .ok_or_else(|| Error::TiltNotIntegrable(format!("ψ is {v} at η = {eta:?}")))
}

/// `ψ(η − iu, g)`; evaluates `e^{−η⊤x−g}` directly, so meant for atomic or
/// light-tailed measures.
pub fn psi_complex(t: &LevyTriplet, eta: &[f64], u: &[f64], g: GTag) -> Result<Complex64> {
    check_tilt(t, eta, g)?;
    let h = tilt_exponent(eta, g);
    let re = |x: &[f64]| {
        let ux = dot(u, x);
        let s = small(x);
        if s > 0.0 {
            // e^h cos − 1 + η⊤x, written to keep the O(|x|²) cancellation.
            let e = h(x).exp_m1();
            e * ux.cos() - 2.0 * (0.5 * ux).sin().powi(2) + dot(eta, x)
        } else {
            h(x).exp() * ux.cos() - 1.0
        }
    };
    let im = |x: &[f64]| {
        let ux = dot(u, x);
        h(x).exp() * ux.sin() - ux * small(x)
    };
    let growth = |dir: &[f64]| {
        let k = -dot(eta, dir);
        if g == GTag::Zero && k > 0.0 {
            TailLaw {
                kappa: k,
                power: 0.0,
                log_power: 0.0,
            }
        } else {
            TailLaw::FLAT
        }
    };
    let mut parts = [0.0; 2];
    for (slot, f) in parts.iter_mut().zip([&re as &dyn Fn(&[f64]) -> f64, &im]) {
        let v = integrate_shaped(
            &t.nu,
            &Integrand {
                f,
                origin_order: 2.0,
                growth: &growth,
                planes: &[],
                beyond: None,
                exp_term: None,
                wave: None,
            },
            &QuadConfig::default(),
        )?;
        *slot = v
            .finite()
            .ok_or_else(|| Error::TiltNotIntegrable(format!("complex ψ diverges at η = {eta:?}")))?;
    }
    let cu = mat_vec(&t.c, u);
    let re = parts[0] - dot(eta, &t.b) + 0.5 * quad_form(&t.c, eta, eta) - 0.5 * dot(u, &cu);
    let im = parts[1] + dot(u, &t.b) - dot(eta, &cu);
    Ok(Complex64::new(re, im))
}

/// Multiplies `base` by `e^{−η⊤x−g(x)}`, merging with an existing tilt when
/// at most one of the two carries the quadratic tail.
fn tilt_family(base: &Family, eta: &[f64], g: GTag) -> Family {
    let quad = g == GTag::QuadraticTail;
    if let Family::ExponentialTilt {
        eta: inner,
        quadratic_tail,
        base: inner_base,
    } = base
    {
        if !(quad && *quadratic_tail) {
            return Family::ExponentialTilt {
                eta: inner.iter().zip(eta).map(|(a, b)| a + b).collect(),
                quadratic_tail: quad || *quadratic_tail,
                base: inner_base.clone(),
            };
        }
    }
    Family::ExponentialTilt {
        eta: eta.to_vec(),
        quadratic_tail: quad,
        base: Box::new(base.clone()),
    }
}

/// `(b', c, ν')` with `ν' = e^{−η⊤x−g}ν` and
/// `b' = b − cη + ∫(e^{−η⊤x−g} − 1) x 1_{|x|≤1} ν(dx)`.
pub fn transform_triplet(t: &LevyTriplet, params: &EsscherParams) -> Result<TransformedTriplet> {
    let eta = &params.eta;
    let g = params.g_tag;
    check_tilt(t, eta, g)?;
    let h = tilt_exponent(eta, g);
    let ce = mat_vec(&t.c, eta);
    let mut b = sub(&t.b, &ce);
    for (i, bi) in b.iter_mut().enumerate() {
        let f = |x: &[f64]| if small(x) > 0.0 { h(x).exp_m1() * x[i] } else { 0.0 };
        let v = integrate_shaped(
            &t.nu,
            &Integrand {
                f: &f,
                origin_order: 2.0,
                growth: &|_| TailLaw::FLAT,
                planes: &[],
                beyond: None,
                exp_term: None,
                wave: None,
            },
            &QuadConfig::default(),
        )?;
        *bi += v
            .finite()
            .ok_or_else(|| Error::UndecidableTail("small-jump drift correction diverged".into()))?;
    }
    let nu = JumpMeasure {
        atoms: t
            .nu
            .atoms
            .iter()
            .map(|a| Atom::new(a.x.clone(), a.rate * h(&a.x).exp()))
            .collect(),
        densities: t
            .nu
            .densities
            .iter()
            .map(|s| DensitySegment {
                family: tilt_family(&s.family, eta, g),
                ..s.clone()
            })
            .collect(),
    };
    Ok(TransformedTriplet {
        triplet: LevyTriplet {
            dim: t.dim,
            b,
            c: t.c.clone(),
            nu,
        },
        source: t.clone(),
        params: params.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SupermartingaleCheck {
    pub holds: bool,
    /// Unit `p` in the admissible cone maximizing the drift.
    pub worst_direction: Option<Vec<f64>>,
    /// `sup p⊤m` over unit `p` in the cone (`+∞` for a divergent tail).
    pub worst_value: ExtReal,
}

const DRIFT_TOL: f64 = 1e-10;

/// Drift condition `p⊤b + ∫p⊤x 1_{|x|>1} ν(dx) ≤ 0` for every `p` in
/// `cl cone(C) ∩ cl cone(C₀)`.
pub fn is_supermartingale_measure(t: &LevyTriplet, c: &ConstraintSet) -> Result<SupermartingaleCheck> {
    t.validate()?;
    let d = t.dim;
    let mut sets = vec![
        c.closed_conic_hull(d)?,
        natural_constraints(&t.nu).conic_hull(),
    ];
    // Tails with no first moment.
    let one = |_: &[f64]| TailLaw {
        kappa: 0.0,
        power: 1.0,
        log_power: 0.0,
    };
    let mut divergent: Vec<Vec<Vec<f64>>> = Vec::with_capacity(t.nu.densities.len());
    for seg in &t.nu.densities {
        let dirs: Vec<Vec<f64>> = seg
            .tails()
            .into_iter()
            .filter(|dir| !seg.family.tail_law(dir).integrable_against(&one(dir)))
            .collect();
        divergent.push(dirs);
    }
    let k = ConstraintSet::Intersection { sets: sets.clone() };
    for dirs in &divergent {
        for dir in dirs {
            let p = k.project(dir)?;
            if norm(&p) > DRIFT_TOL {
                return Ok(SupermartingaleCheck {
                    holds: false,
                    worst_direction: Some(normalized(&p)),
                    worst_value: ExtReal::PosInf,
                });
            }
        }
    }
    // Every p left in the cone has p⊤dir ≤ 0 on the divergent tails; the
    // ones with p⊤dir < 0 get −∞ drift, so only the face p⊤dir = 0 matters.
    for dir in divergent.iter().flatten() {
        sets.push(ConstraintSet::Polyhedron {
            a_mat: vec![dir.clone(), dir.iter().map(|v| -v).collect()],
            a: vec![0.0, 0.0],
        });
    }
    let face = ConstraintSet::Intersection { sets };
    let m = reduced_mean(t, &divergent)?;
    let p = face.project(&m)?;
    let value = norm(&p);
    Ok(SupermartingaleCheck {
        holds: value <= DRIFT_TOL,
        worst_direction: (value > DRIFT_TOL).then(|| normalized(&p)),
        worst_value: ExtReal::Finite(value),
    })
}

fn normalized(p: &[f64]) -> Vec<f64> {
    let n = norm(p);
    p.iter().map(|v| v / n).collect()
}

/// `b + ∫ P x 1_{|x|>1} ν(dx)` with `P` removing, per segment, the span of
/// its divergent tail directions.
fn reduced_mean(t: &LevyTriplet, divergent: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
    let d = t.dim;
    let mut m = t.b.clone();
    for a in &t.nu.atoms {
        if small(&a.x) == 0.0 {
            for i in 0..d {
                m[i] += a.rate * a.x[i];
            }
        }
    }
    for (seg, dirs) in t.nu.densities.iter().zip(divergent) {
        let keep = if dirs.is_empty() {
            identity(d)
        } else {
            kernel_and_complement(dirs, d, 1e-12).0
        };
        let single = JumpMeasure {
            atoms: Vec::new(),
            densities: vec![seg.clone()],
        };
        for i in 0..d {
            let f = |x: &[f64]| {
                if small(x) > 0.0 {
                    return 0.0;
                }
                keep.iter().map(|q| q[i] * dot(q, x)).sum::<f64>()
            };
            let proj_row: Vec<f64> = (0..d).map(|j| keep.iter().map(|q| q[i] * q[j]).sum()).collect();
            let growth = linear_growth(&proj_row);
            let v = integrate_shaped(
                &single,
                &Integrand {
                    f: &f,
                    origin_order: 8.0,
                    growth: &growth,
                    planes: &[],
                    beyond: None,
                    exp_term: None,
                    wave: None,
                },
                &QuadConfig::default(),
            )?;
            m[i] += v
                .finite()
                .ok_or_else(|| Error::UndecidableTail("projected first moment diverged".into()))?;
        }
    }
    Ok(m)
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|i| crate::linalg::unit(d, i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MeasureGrade {
    /// Transformed mean vanishes: a martingale measure.
    Emm,
    /// Supermartingale but not martingale.
    StrictEsmm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NoEsmmReason {
    ImmediateArbitrage,
    /// Infinite horizon: the drift condition fails under the original law.
    DriftViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "outcome")]
pub enum EsmmOutcome {
    #[serde(rename_all = "camelCase")]
    Found {
        params: EsscherParams,
        grade: MeasureGrade,
        transformed_mean: MeanRate,
        validation: SupermartingaleCheck,
        /// `1 − exp(T·log E' e^{−η⊤X₁})` under the lightened law; absent
        /// when no optimization ran.
        utility: Option<f64>,
    },
    #[serde(rename_all = "camelCase")]
    NoEsmm { reason: NoEsmmReason, witness: Vec<f64> },
}

impl EsmmOutcome {
    pub fn params(&self) -> Option<&EsscherParams> {
        match self {
            EsmmOutcome::Found { params, .. } => Some(params),
            EsmmOutcome::NoEsmm { .. } => None,
        }
    }
}

/// `T = None` is the infinite horizon.
pub fn find_esmm(t: &LevyTriplet, cone: &ConstraintSet, horizon: Option<f64>) -> Result<EsmmOutcome> {
    find_esmm_with(t, cone, horizon, &AscentConfig::default())
}

pub fn find_esmm_with(
    t: &LevyTriplet,
    cone: &ConstraintSet,
    horizon: Option<f64>,
    ascent: &AscentConfig,
) -> Result<EsmmOutcome> {
    t.validate()?;
    let d = t.dim;
    cone.validate(d)?;
    if !cone.is_cone() {
        return Err(Error::UnsupportedVariant("find_esmm needs a cone".into()));
    }
    if let Some(h) = horizon {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {h}")));
        }
    }
    let null = null_space(t);
    null.check_inside(cone)?;
    let cert = find_immediate_arbitrage(t, cone, &null)?;
    if let Some(xi) = cert.witness() {
        return Ok(EsmmOutcome::NoEsmm {
            reason: NoEsmmReason::ImmediateArbitrage,
            witness: xi.to_vec(),
        });
    }
    let Some(horizon) = horizon else {
        // Infinite horizon: only the original law can serve.
        let check = is_supermartingale_measure(t, cone)?;
        if !check.holds {
            return Ok(EsmmOutcome::NoEsmm {
                reason: NoEsmmReason::DriftViolation,
                witness: check.worst_direction.unwrap_or_default(),
            });
        }
        return found(t, EsscherParams::new(t, vec![0.0; d], GTag::Zero)?, cone, None);
    };
    // Lightened law at η = 0 already a supermartingale measure.
    let zero_light = EsscherParams::new(t, vec![0.0; d], GTag::QuadraticTail)?;
    let light = transform_triplet(t, &zero_light)?;
    if is_supermartingale_measure(&light.triplet, cone)?.holds {
        return found(t, zero_light, cone, None);
    }
    if is_supermartingale_measure(t, cone)?.holds {
        return found(t, EsscherParams::new(t, vec![0.0; d], GTag::Zero)?, cone, None);
    }
    // max −log E' e^{−p⊤X₁} over cone ∩ cl cone(C₀) ∩ 𝔑⊥; the utility
    // 1 − exp(T·(·)) is a monotone transform of it.
    let psi0 = zero_light.psi;
    let mut sets = vec![cone.clone(), natural_constraints(&t.nu).conic_hull()];
    if !null.is_trivial() {
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
    let feasible = ConstraintSet::Intersection { sets };
    let value = |p: &[f64]| Ok(ExtReal::Finite(psi0 - psi(t, p, GTag::QuadraticTail)?));
    let gradient = |p: &[f64]| {
        let params = EsscherParams {
            eta: p.to_vec(),
            g_tag: GTag::QuadraticTail,
            psi: 0.0,
        };
        let tt = transform_triplet(t, &params)?;
        match mean_rate(&tt.triplet)? {
            MeanRate::Finite(m) => Ok(m),
            MeanRate::Divergent { .. } => Err(Error::UndecidableTail("lightened law lacks a mean".into())),
        }
    };
    let project = |p: &[f64]| feasible.project(p);
    let (eta, val, rep) = maximize(
        &Problem {
            value: &value,
            gradient: &gradient,
            project: &project,
        },
        &vec![0.0; d],
        ascent,
    )
    .map_err(|e| match e {
        Error::ConvergenceFailure(m) => Error::ConvergenceFailure(format!("exponential utility: {m}")),
        other => other,
    })?;
    if norm_inf(&eta) > 1e6 {
        return Err(Error::ConvergenceFailure(format!(
            "exponential-utility maximizer drifted to {eta:?} after {} steps",
            rep.iterations
        )));
    }
    let utility = 1.0 - (-horizon * val.to_f64()).exp();
    let params = EsscherParams::new(t, eta, GTag::QuadraticTail)?;
    found(t, params, cone, Some(utility))
}

fn found(t: &LevyTriplet, params: EsscherParams, cone: &ConstraintSet, utility: Option<f64>) -> Result<EsmmOutcome> {
    let tt = transform_triplet(t, &params)?;
    let validation = is_supermartingale_measure(&tt.triplet, cone)?;
    if !validation.holds {
        return Err(Error::ConvergenceFailure(format!(
            "transformed law violates the drift condition by {} along {:?}",
            validation.worst_value, validation.worst_direction
        )));
    }
    let transformed_mean = mean_rate(&tt.triplet)?;
    let grade = match &transformed_mean {
        MeanRate::Finite(m) if norm_inf(m) <= 1e-8 => MeasureGrade::Emm,
        _ => MeasureGrade::StrictEsmm,
    };
    Ok(EsmmOutcome::Found {
        params,
        grade,
        transformed_mean,
        validation,
        utility,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum IncompletenessReason {
    InfiniteSupport,
    SupportOutsideKernel,
    TooManyJumpPoints,
    ImmediateArbitrage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "verdict")]
pub enum Completeness {
    #[serde(rename_all = "camelCase")]
    Complete { kernel_dim: usize },
    #[serde(rename_all = "camelCase")]
    Incomplete {
        reason: IncompletenessReason,
        kernel_dim: usize,
    },
}

impl Completeness {
    pub fn is_complete(&self) -> bool {
        matches!(self, Completeness::Complete { .. })
    }
}

const KERNEL_TOL: f64 = 1e-10;

/// Completeness of the unconstrained market.
pub fn check_completeness(t: &LevyTriplet, c: &ConstraintSet) -> Result<Completeness> {
    if *c != ConstraintSet::Full {
        return Err(Error::ConstrainedMarket);
    }
    t.validate()?;
    let d = t.dim;
    let (kernel, _) = kernel_and_complement(&t.c, d, 1e-10);
    let k = kernel.len();
    let incomplete = |reason| Ok(Completeness::Incomplete { reason, kernel_dim: k });
    if !t.nu.densities.is_empty() {
        return incomplete(IncompletenessReason::InfiniteSupport);
    }
    let atoms: Vec<&Atom> = t.nu.atoms.iter().filter(|a| a.rate > 0.0).collect();
    let in_kernel = |x: &[f64]| {
        let proj: Vec<f64> = kernel
            .iter()
            .fold(vec![0.0; d], |acc, q| crate::linalg::axpy(&acc, dot(q, x), q));
        norm(&sub(x, &proj)) <= KERNEL_TOL * (1.0 + norm(x))
    };
    if atoms.iter().any(|a| !in_kernel(&a.x)) {
        return incomplete(IncompletenessReason::SupportOutsideKernel);
    }
    let mut points: Vec<&[f64]> = Vec::new();
    for a in &atoms {
        if !points.iter().any(|p| norm(&sub(p, &a.x)) <= KERNEL_TOL) {
            points.push(&a.x);
        }
    }
    if points.len() > k {
        return incomplete(IncompletenessReason::TooManyJumpPoints);
    }
    if k == 0 {
        return Ok(Completeness::Complete { kernel_dim: 0 });
    }
    // X^𝔎 = a t + compound Poisson, a = P_𝔎(b − Σ λ x 1_{|x|≤1}).
    let mut drift = t.b.clone();
    for a in &atoms {
        drift = crate::linalg::axpy(&drift, -a.rate * small(&a.x), &a.x);
    }
    let a_vec: Vec<f64> = kernel.iter().map(|q| dot(q, &drift)).collect();
    let coords: Vec<Vec<f64>> = points
        .iter()
        .map(|x| kernel.iter().map(|q| dot(q, x)).collect())
        .collect();
    if violates_3iii(&a_vec, &coords) {
        return incomplete(IncompletenessReason::ImmediateArbitrage);
    }
    Ok(Completeness::Complete { kernel_dim: k })
}

/// Whether some `ξ` has `ξ⊤a ≥ 0`, `ξ⊤x ≥ 0` on the points, with one of
/// them strict: `max ξ⊤a + Σ ξ⊤x` over the normalized cone is positive.
fn violates_3iii(a: &[f64], points: &[Vec<f64>]) -> bool {
    let k = a.len();
    let mut lp = LinearProgram::new(k);
    lp.free = vec![true; k];
    let mut total = a.to_vec();
    for p in points {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    lp.objective = total.iter().map(|v| -v).collect();
    let mut rows = vec![(a.iter().map(|v| -v).collect(), 0.0)];
    for p in points {
        rows.push((p.iter().map(|v| -v).collect(), 0.0));
    }
    rows.push((total.clone(), 1.0));
    lp.le = rows;
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => -value > 1e-9,
        LpOutcome::Unbounded => true,
        LpOutcome::Infeasible => false,
    }
}
