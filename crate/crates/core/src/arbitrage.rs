//! Immediate arbitrage opportunities: certificates for `ℑ ∩ K` over a cone
//! `K`, the increasing-profit decomposition, and the aggregated report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constraints::{null_space, ConstraintSet, LinearCone, NullSpaceBasis};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecConfig};
use crate::extended::ExtReal;
use crate::levy::integrate::{integrate_shaped, Integrand};
use crate::levy::triplet::small;
use crate::levy::{JumpMeasure, LevyTriplet, TailLaw};
use crate::linalg::{dot, kernel_and_complement, mat_vec, norm, norm_inf, scale};
use crate::lowdisc::sphere_grid;
use crate::lp::{LinearProgram, LpOutcome};
use crate::quadrature::QuadConfig;

const LP_TOL: f64 = 1e-9;
const DEFAULT_RESOLUTION: usize = 720;

/// How emptiness (or a witness) was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Method {
    ExactLp,
    #[serde(rename_all = "camelCase")]
    SphereGrid { resolution: usize },
}

/// Requested search strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMethod {
    /// LP whenever the cone is polyhedral, sphere grid otherwise.
    #[default]
    Auto,
    ExactLp,
    SphereGrid { resolution: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Verdict {
    Found { xi: Vec<f64> },
    Empty { method: Method, tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ArbitrageCertificate {
    pub verdict: Verdict,
    /// `ξ⊤b − ∫ ξ⊤x 1_{|x|≤1} ν(dx)` for the witness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_part: Option<f64>,
    /// Distance of the witness from `𝔑`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_distance: Option<f64>,
    pub method: Method,
}

impl ArbitrageCertificate {
    pub fn witness(&self) -> Option<&[f64]> {
        match &self.verdict {
            Verdict::Found { xi } => Some(xi),
            Verdict::Empty { .. } => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.witness().is_none()
    }
}

/// First-moment data of the small jumps. Segments of infinite variation
/// contribute no mean; instead their spanning vectors are `pinned`
/// (any IAO must be orthogonal to them).
#[derive(Debug, Clone, PartialEq)]
pub struct SmallJumpMean {
    pub mean: Vec<f64>,
    pub pinned: Vec<Vec<f64>>,
    finite_part: JumpMeasure,
}

pub fn small_jump_mean(nu: &JumpMeasure, d: usize) -> Result<SmallJumpMean> {
    let mut finite_part = JumpMeasure::from_atoms(nu.atoms.clone());
    let mut pinned = Vec::new();
    for seg in &nu.densities {
        if seg.touches_origin() && seg.family.origin_order() >= 2.0 - 1e-12 {
            pinned.extend(seg.support.spanning_vectors());
        } else {
            finite_part.densities.push(seg.clone());
        }
    }
    let mut mean = vec![0.0; d];
    for (i, m) in mean.iter_mut().enumerate() {
        let f = move |x: &[f64]| x[i] * small(x);
        *m = small_integral(&finite_part, &f)?;
    }
    Ok(SmallJumpMean {
        mean,
        pinned,
        finite_part,
    })
}

fn small_integral(nu: &JumpMeasure, f: &dyn Fn(&[f64]) -> f64) -> Result<f64> {
    let flat = |_: &[f64]| TailLaw::FLAT;
    let v = integrate_shaped(
        nu,
        &Integrand {
            f,
            origin_order: 1.0,
            growth: &flat,
            planes: &[],
            beyond: None,
            exp_term: None,
            wave: None,
        },
        &QuadConfig::default(),
    )?;
    v.finite()
        .ok_or_else(|| Error::UndecidableTail("small-jump mean of a finite-variation part".into()))
}

/// Conditions of the IAO definition evaluated at one vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IaoCheck {
    /// `‖c ξ‖∞`
    pub diffusion_residual: f64,
    /// `inf { ξ⊤x : x ∈ supp ν }`
    pub support_inf: f64,
    /// Compensated drift; absent when the jump condition already fails.
    pub drift: Option<ExtReal>,
    pub null_distance: f64,
    pub in_cone: bool,
}

impl IaoCheck {
    pub fn passes(&self) -> bool {
        self.diffusion_residual <= 1e-10
            && self.support_inf >= -1e-12
            && matches!(self.drift, Some(v) if v >= ExtReal::Finite(-1e-10))
            && self.null_distance >= 1e-8
            && self.in_cone
    }
}

/// Evaluates the IAO conditions for `xi` against `cone`.
pub fn check_iao(
    t: &LevyTriplet,
    cone: &ConstraintSet,
    null: &NullSpaceBasis,
    xi: &[f64],
) -> Result<IaoCheck> {
    let sjm = small_jump_mean(&t.nu, t.dim)?;
    check_with(t, &sjm, cone, null, xi)
}

fn check_with(
    t: &LevyTriplet,
    sjm: &SmallJumpMean,
    cone: &ConstraintSet,
    null: &NullSpaceBasis,
    xi: &[f64],
) -> Result<IaoCheck> {
    let diffusion_residual = norm_inf(&mat_vec(&t.c, xi));
    let support_inf = t.nu.support_inf_linear(xi).min(f64::MAX);
    let drift = if support_inf >= -1e-12 {
        Some(drift_part(t, sjm, xi)?)
    } else {
        None
    };
    Ok(IaoCheck {
        diffusion_residual,
        support_inf,
        drift,
        null_distance: null.distance(xi),
        in_cone: cone.contains_tol(xi, 1e-9) && cone.contains_tol(&scale(xi, 1e3), 1e-9),
    })
}

/// `ξ⊤b − ∫ ξ⊤x 1_{|x|≤1} ν(dx)` for `ξ` with nonnegative jumps.
fn drift_part(t: &LevyTriplet, sjm: &SmallJumpMean, xi: &[f64]) -> Result<ExtReal> {
    if sjm
        .pinned
        .iter()
        .any(|v| dot(v, xi).abs() > 1e-12 * norm(v).max(1.0) * norm(xi).max(1.0))
    {
        return Ok(ExtReal::NegInf);
    }
    let f = |x: &[f64]| dot(xi, x) * small(x);
    Ok(ExtReal::Finite(dot(xi, &t.b) - small_integral(&sjm.finite_part, &f)?))
}

/// Decides `ℑ ∩ cone = ∅` with the default strategy.
pub fn find_immediate_arbitrage(
    t: &LevyTriplet,
    cone: &ConstraintSet,
    null: &NullSpaceBasis,
) -> Result<ArbitrageCertificate> {
    find_immediate_arbitrage_with(t, cone, null, SearchMethod::Auto, ExecConfig::default())
}

pub fn find_immediate_arbitrage_with(
    t: &LevyTriplet,
    cone: &ConstraintSet,
    null: &NullSpaceBasis,
    method: SearchMethod,
    exec: ExecConfig,
) -> Result<ArbitrageCertificate> {
    let d = t.dim;
    cone.validate(d)?;
    if !cone.is_cone() {
        return Err(Error::Precondition(
            "arbitrage search expects a cone; pass the recession cone of the constraints".into(),
        ));
    }
    let sjm = small_jump_mean(&t.nu, d)?;
    let linear = cone.linear_cone(d);
    let chosen = match (method, &linear) {
        (SearchMethod::Auto, Ok(_)) | (SearchMethod::ExactLp, Ok(_)) => Method::ExactLp,
        (SearchMethod::Auto, Err(_)) => Method::SphereGrid {
            resolution: DEFAULT_RESOLUTION,
        },
        (SearchMethod::ExactLp, Err(_)) => {
            return Err(Error::UnsupportedVariant("exact LP search over a non-polyhedral cone".into()))
        }
        (SearchMethod::SphereGrid { resolution }, _) => Method::SphereGrid { resolution },
    };
    let found = match chosen {
        Method::ExactLp => {
            let lin = linear.expect("checked above");
            lp_search(t, &sjm, &lin, cone, null)?
        }
        Method::SphereGrid { resolution } => grid_search(t, &sjm, cone, null, resolution, exec)?,
    };
    Ok(match found {
        Some(xi) => {
            let check = check_with(t, &sjm, cone, null, &xi)?;
            if !check.passes() {
                return Err(Error::ConvergenceFailure(format!(
                    "candidate {xi:?} failed verification: {check:?}"
                )));
            }
            ArbitrageCertificate {
                verdict: Verdict::Found { xi },
                drift_part: check.drift.map(ExtReal::to_f64),
                null_distance: Some(check.null_distance),
                method: chosen,
            }
        }
        None => ArbitrageCertificate {
            verdict: Verdict::Empty {
                method: chosen,
                tolerance: match chosen {
                    Method::ExactLp => LP_TOL,
                    Method::SphereGrid { .. } => 1e-10,
                },
            },
            drift_part: None,
            null_distance: None,
            method: chosen,
        },
    })
}

/// Rows `r` with `r⊤ξ ≥ 0` for every IAO: support vertices and recession
/// directions, plus pinned directions (as equalities, returned separately).
fn jump_rows(nu: &JumpMeasure) -> Vec<Vec<f64>> {
    let (verts, dirs) = nu.support_geometry();
    verts.into_iter().chain(dirs).filter(|v| norm(v) > 0.0).collect()
}

/// Normalizes an IAO: drop the `𝔑` component when that stays in the cone,
/// then scale to unit length.
fn normalize(xi: &[f64], cone: &ConstraintSet, null: &NullSpaceBasis) -> Vec<f64> {
    let perp = null.project_perp(xi);
    let v = if cone.contains_tol(&perp, 1e-9) { perp } else { xi.to_vec() };
    let n = norm(&v);
    v.iter()
        .map(|x| {
            let y = x / n;
            if y.abs() < 1e-15 {
                0.0
            } else {
                y
            }
        })
        .collect()
}

fn lp_search(
    t: &LevyTriplet,
    sjm: &SmallJumpMean,
    lin: &LinearCone,
    cone: &ConstraintSet,
    null: &NullSpaceBasis,
) -> Result<Option<Vec<f64>>> {
    let d = t.dim;
    let n_lambda: usize = lin.generated.iter().map(Vec::len).sum();
    let mut base = LinearProgram::new(d + n_lambda);
    for f in base.free.iter_mut().take(d) {
        *f = true;
    }
    let pad = |v: &[f64]| {
        let mut r = v.to_vec();
        r.resize(d + n_lambda, 0.0);
        r
    };
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<f64>>();
    for row in &t.c {
        base.eq.push((pad(row), 0.0));
    }
    for v in &sjm.pinned {
        base.eq.push((pad(v), 0.0));
    }
    for v in jump_rows(&t.nu) {
        base.le.push((pad(&neg(&v)), 0.0));
    }
    let drift_dir: Vec<f64> = t.b.iter().zip(&sjm.mean).map(|(b, m)| b - m).collect();
    base.le.push((pad(&neg(&drift_dir)), 0.0));
    for row in &lin.le {
        base.le.push((pad(row), 0.0));
    }
    let mut offset = d;
    for rays in &lin.generated {
        // ξ − Σ λ_k r_k = 0
        for i in 0..d {
            let mut row = vec![0.0; d + n_lambda];
            row[i] = 1.0;
            for (k, r) in rays.iter().enumerate() {
                row[offset + k] = -r[i];
            }
            base.eq.push((row, 0.0));
        }
        offset += rays.len();
    }
    for e in &null.complement_basis {
        for s in [1.0, -1.0] {
            let mut lp = base.clone();
            lp.le.push((pad(&scale(e, -s)), -1.0));
            match lp.solve() {
                LpOutcome::Optimal { x, .. } => return Ok(Some(normalize(&x[..d], cone, null))),
                LpOutcome::Infeasible => {}
                LpOutcome::Unbounded => return Err(Error::LpUnbounded),
            }
        }
    }
    Ok(None)
}

fn grid_search(
    t: &LevyTriplet,
    sjm: &SmallJumpMean,
    cone: &ConstraintSet,
    null: &NullSpaceBasis,
    resolution: usize,
    exec: ExecConfig,
) -> Result<Option<Vec<f64>>> {
    let d = t.dim;
    // S = ker c ∩ 𝔑⊥ ∩ pinned⊥
    let mut rows: Vec<Vec<f64>> = t.c.clone();
    rows.extend(null.basis.iter().cloned());
    rows.extend(sjm.pinned.iter().cloned());
    let (s_basis, s_perp) = kernel_and_complement(&rows, d, 1e-10);
    if s_basis.is_empty() {
        return Ok(None);
    }
    let mut candidates: Vec<Vec<f64>> = sphere_grid(s_basis.len(), resolution)
        .into_iter()
        .map(|w| {
            let mut v = vec![0.0; d];
            for (c, b) in w.iter().zip(&s_basis) {
                for i in 0..d {
                    v[i] += c * b[i];
                }
            }
            v
        })
        .collect();
    for r in crate::constraints::cone_rays(cone, d) {
        let p = crate::linalg::project_span(&s_basis, &r);
        if norm(&p) > 1e-9 {
            candidates.push(scale(&p, 1.0 / norm(&p)));
        }
    }
    // Geometric part of the IAO conditions as a polyhedral cone, used to
    // snap grid points onto faces.
    let mut a_mat: Vec<Vec<f64>> = jump_rows(&t.nu)
        .iter()
        .map(|v| v.iter().map(|x| -x).collect())
        .collect();
    for v in &s_perp {
        a_mat.push(v.clone());
        a_mat.push(v.iter().map(|x| -x).collect());
    }
    let n_rows = a_mat.len();
    let snap = ConstraintSet::Intersection {
        sets: vec![
            cone.clone(),
            ConstraintSet::Polyhedron {
                a_mat,
                a: vec![0.0; n_rows],
            },
        ],
    };
    let evaluated = map_indexed(candidates.len(), exec, |k| -> Result<Vec<Vec<f64>>> {
        let u = &candidates[k];
        let mut passing = Vec::new();
        let mut tries = vec![u.clone()];
        if let Ok(p) = snap.project(u) {
            if norm(&p) > 1e-9 {
                tries.push(scale(&p, 1.0 / norm(&p)));
            }
        }
        for v in tries {
            if check_with(t, sjm, cone, null, &v)?.passes() {
                passing.push(normalize(&v, cone, null));
            }
        }
        Ok(passing)
    });
    let mut best: Option<Vec<f64>> = None;
    for r in evaluated {
        for v in r? {
            let better = match &best {
                None => true,
                Some(b) => lex_less(&v, b),
            };
            if better {
                best = Some(v);
            }
        }
    }
    Ok(best)
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-12 {
            return x < y;
        }
    }
    false
}

/// A jump the increasing wealth `W^ξ` takes, with its relative gain `ξ⊤x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProfitJump {
    pub x: Vec<f64>,
    pub rate: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IncreasingProfit {
    pub linear_drift: f64,
    pub jumps: Vec<ProfitJump>,
    /// Density segments on which `ξ⊤x > 0` somewhere (continuum of gains).
    pub density_segments: Vec<usize>,
}

/// Splits `W^ξ` into its linear drift and its increasing jump part.
pub fn increasing_profit_decomposition(t: &LevyTriplet, xi: &[f64]) -> Result<IncreasingProfit> {
    if xi.len() != t.dim {
        return Err(Error::DimensionMismatch {
            expected: t.dim,
            got: xi.len(),
        });
    }
    let null = null_space(t);
    let check = check_iao(t, &ConstraintSet::Full, &null, xi)?;
    if !check.passes() {
        return Err(Error::NotAnIao(format!("{check:?}")));
    }
    let linear_drift = check.drift.and_then(ExtReal::finite).unwrap_or(f64::NAN);
    Ok(IncreasingProfit {
        linear_drift,
        jumps: t
            .nu
            .atoms
            .iter()
            .map(|a| ProfitJump {
                x: a.x.clone(),
                rate: a.rate,
                gain: dot(xi, &a.x),
            })
            .collect(),
        density_segments: t
            .nu
            .densities
            .iter()
            .enumerate()
            .filter(|(_, s)| s.support.vertices().iter().chain(&s.support.recession_directions()).any(|v| dot(xi, v) > 0.0))
            .map(|(k, _)| k)
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "NUIP")]
    Nuip,
    #[serde(rename = "NUPBR")]
    Nupbr,
    #[serde(rename = "NA")]
    Na,
    #[serde(rename = "NFLVR")]
    Nflvr,
    #[serde(rename = "ESMM-exists")]
    EsmmExists,
    #[serde(rename = "numeraire-exists")]
    NumeraireExists,
    #[serde(rename = "ESMD-exists")]
    EsmdExists,
}

impl Condition {
    pub const ALL: [Condition; 7] = [
        Condition::Nuip,
        Condition::Nupbr,
        Condition::Na,
        Condition::Nflvr,
        Condition::EsmmExists,
        Condition::NumeraireExists,
        Condition::EsmdExists,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Status {
    Holds,
    Fails,
    NotDecidedHere,
}

impl Status {
    fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Holds
        } else {
            Status::Fails
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NflReport {
    pub horizon: Horizon,
    pub statuses: BTreeMap<Condition, Status>,
    /// Search over the recession cone of the constraints.
    pub certificate: ArbitrageCertificate,
    /// Search over the closed conic hull (non-conic constraints only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conic_hull_certificate: Option<ArbitrageCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_check: Option<crate::esscher::SupermartingaleCheck>,
    pub evidence: Vec<String>,
}

impl NflReport {
    pub fn status(&self, c: Condition) -> Status {
        self.statuses[&c]
    }

    /// Whether some no-free-lunch condition is known to fail.
    pub fn free_lunch(&self) -> bool {
        [Condition::Nuip, Condition::Nupbr, Condition::Na, Condition::Nflvr]
            .iter()
            .any(|c| self.statuses.get(c) == Some(&Status::Fails))
    }
}

/// Aggregates the certificates into the seven condition statuses.
pub fn nfl_report(t: &LevyTriplet, c: &ConstraintSet, horizon: Horizon) -> Result<NflReport> {
    nfl_report_with(t, c, horizon, ExecConfig::default())
}

pub fn nfl_report_with(t: &LevyTriplet, c: &ConstraintSet, horizon: Horizon, exec: ExecConfig) -> Result<NflReport> {
    let d = t.dim;
    t.validate()?;
    c.validate(d)?;
    let null = null_space(t);
    null.check_inside(c)?;
    let rec = c.recession_cone(d)?;
    let cert = find_immediate_arbitrage_with(t, &rec, &null, SearchMethod::Auto, exec)?;
    let no_iao = cert.is_empty();
    let mut statuses = BTreeMap::new();
    let mut evidence = Vec::new();
    let mut hull_cert = None;
    let mut drift_check = None;
    match &cert.verdict {
        Verdict::Found { xi } => evidence.push(format!("immediate arbitrage {xi:?} in the recession cone")),
        Verdict::Empty { method, .. } => {
            evidence.push(format!("no immediate arbitrage in the recession cone ({method:?})"))
        }
    }
    match horizon {
        Horizon::Finite(_) if c.is_cone() => {
            evidence.push("conic constraints: all conditions are equivalent".into());
            for k in Condition::ALL {
                statuses.insert(k, Status::from_bool(no_iao));
            }
        }
        Horizon::Finite(_) => {
            for k in [
                Condition::Nuip,
                Condition::Nupbr,
                Condition::NumeraireExists,
                Condition::EsmdExists,
            ] {
                statuses.insert(k, Status::from_bool(no_iao));
            }
            if no_iao {
                let hull = c.closed_conic_hull(d)?;
                let hc = find_immediate_arbitrage_with(t, &hull, &null, SearchMethod::Auto, exec)?;
                let esmm = if hc.is_empty() {
                    evidence.push("no immediate arbitrage in the closed conic hull: an ESMM exists".into());
                    Status::Holds
                } else {
                    evidence.push("immediate arbitrage in the closed conic hull: no ESMM".into());
                    Status::Fails
                };
                statuses.insert(Condition::EsmmExists, esmm);
                statuses.insert(Condition::Na, Status::NotDecidedHere);
                statuses.insert(Condition::Nflvr, Status::NotDecidedHere);
                hull_cert = Some(hc);
            } else {
                for k in [Condition::Na, Condition::Nflvr, Condition::EsmmExists] {
                    statuses.insert(k, Status::Fails);
                }
            }
        }
        Horizon::Infinite => {
            let check = crate::esscher::is_supermartingale_measure(t, c)?;
            let ok = check.holds;
            evidence.push(if ok {
                "drift condition holds on C ∩ C₀: the original measure is a supermartingale measure".into()
            } else {
                format!("drift condition violated in direction {:?}", check.worst_direction)
            });
            for k in [
                Condition::Nupbr,
                Condition::Na,
                Condition::Nflvr,
                Condition::EsmmExists,
                Condition::EsmdExists,
            ] {
                statuses.insert(k, Status::from_bool(ok));
            }
            statuses.insert(Condition::Nuip, Status::from_bool(no_iao));
            statuses.insert(Condition::NumeraireExists, Status::from_bool(no_iao));
            drift_check = Some(check);
        }
    }
    Ok(NflReport {
        horizon,
        statuses,
        certificate: cert,
        conic_hull_certificate: hull_cert,
        drift_check,
        evidence,
    })
}
