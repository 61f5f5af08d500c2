//! Integration against a jump measure: atom sums plus mapped adaptive
//! quadrature per density segment.
//!
//! Tails `[a, ∞)` use `s = a·e^u`, pieces ending at a singular origin use
//! `s = a·e^{-u}`, and in both cases `u = v/(1-v)` with `v ∈ (0, 1)`.
//! Densities and Jacobians are combined in log form so nothing overflows.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use super::measure::{DensitySegment, EvalPoint, Family, JumpMeasure, SupportRegion, TailLaw, X_CLAMP};
use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::linalg::{dot, norm};
use crate::quadrature::{self, QuadConfig};

/// Declared singularity structure of an integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum WeightClass {
    /// Bounded everywhere.
    Bounded,
    /// Bounded, and `O(|x|²)` at the origin.
    QuadraticNearZero,
    /// `O(|x|²)` at the origin, growing like `log|x|` in the tails.
    LogTail,
}

/// Integrand together with the asymptotics the quadrature must respect.
pub(crate) struct Integrand<'a> {
    pub f: &'a dyn Fn(&[f64]) -> f64,
    /// The integrand is `O(|x|^origin_order)` at the origin.
    pub origin_order: f64,
    /// Growth `e^{κs}·s^p·(log s)^q` along a tail with the given velocity.
    pub growth: &'a dyn Fn(&[f64]) -> TailLaw,
    /// Hyperplanes `w⊤x = level` where the integrand kinks or blows up.
    pub planes: &'a [(Vec<f64>, f64)],
    /// Evaluation beyond the clamp radius: `f(x·e^excess)` given the clamped
    /// `x` and `excess > 0`. Without it the clamped point is used.
    pub beyond: Option<&'a dyn Fn(&[f64], f64) -> f64>,
    /// Adds `exp(exp_term(x))` to `f`; the exponential is merged with the
    /// density in log form so it never overflows.
    pub exp_term: Option<&'a dyn Fn(&[f64]) -> f64>,
    /// Adds `cos(u⊤x)` or `sin(u⊤x)`. Kept apart from `f` so that tails
    /// can sum it between zeros instead of through the mapped rule.
    pub wave: Option<Wave<'a>>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Wave<'a> {
    pub freq: &'a [f64],
    pub sine: bool,
}

impl Wave<'_> {
    fn at_phase(self, theta: f64) -> f64 {
        if self.sine {
            theta.sin()
        } else {
            theta.cos()
        }
    }

    fn eval(self, x: &[f64]) -> f64 {
        self.at_phase(dot(self.freq, x))
    }
}

impl Integrand<'_> {
    /// `f(x)` plus the exponential term, in plain arithmetic.
    pub fn value(&self, x: &[f64]) -> f64 {
        let v = self.smooth(x);
        match self.exp_term {
            Some(h) => v + h(x).exp(),
            None => v,
        }
    }
}

impl Integrand<'_> {
    /// `f(x)` plus the wave, without the exponential term.
    fn smooth(&self, x: &[f64]) -> f64 {
        (self.f)(x) + self.wave.map_or(0.0, |w| w.eval(x))
    }
}

impl WeightClass {
    fn origin_order(self) -> f64 {
        match self {
            WeightClass::Bounded => 0.0,
            _ => 2.0,
        }
    }

    fn growth(self) -> TailLaw {
        match self {
            WeightClass::LogTail => TailLaw {
                kappa: 0.0,
                power: 0.0,
                log_power: 1.0,
            },
            _ => TailLaw::FLAT,
        }
    }
}

/// `∫ f dν` with the default tolerances (abs 1e-10, rel 1e-8).
pub fn integrate(nu: &JumpMeasure, f: impl Fn(&[f64]) -> f64, class: WeightClass) -> Result<ExtReal> {
    integrate_with_config(nu, f, class, &QuadConfig::default())
}

pub fn integrate_with_config(
    nu: &JumpMeasure,
    f: impl Fn(&[f64]) -> f64,
    class: WeightClass,
    cfg: &QuadConfig,
) -> Result<ExtReal> {
    let growth = class.growth();
    let ig = Integrand {
        f: &f,
        origin_order: class.origin_order(),
        growth: &|_| growth,
        planes: &[],
        beyond: None,
        exp_term: None,
        wave: None,
    };
    integrate_shaped(nu, &ig, cfg)
}

pub(crate) fn integrate_shaped(nu: &JumpMeasure, ig: &Integrand, cfg: &QuadConfig) -> Result<ExtReal> {
    let mut total = ExtReal::ZERO;
    let mut atom_sum = 0.0;
    for a in &nu.atoms {
        let v = ig.value(&a.x);
        if v.is_nan() {
            return Err(Error::InvalidInput(format!("integrand is NaN at atom {:?}", a.x)));
        }
        if v.is_infinite() {
            total = combine(total, ExtReal::from_f64(v))?;
        } else {
            atom_sum += a.rate * v;
        }
    }
    total = combine(total, ExtReal::Finite(atom_sum))?;
    for seg in &nu.densities {
        total = combine(total, integrate_segment(seg, ig, cfg)?)?;
    }
    Ok(total)
}

fn combine(a: ExtReal, b: ExtReal) -> Result<ExtReal> {
    a.checked_add(b)
        .ok_or_else(|| Error::UndecidableTail("integral has divergent parts of both signs".into()))
}

/// Piece of a one-parameter segment.
#[derive(Debug, Clone, Copy)]
enum Piece {
    Plain(f64, f64),
    /// `[a, ±∞)` with `a ≠ 0`, sign taken from `a`.
    Tail(f64),
    /// `(0, a]` or `[a, 0)` with singular density at `s = 0`.
    Origin(f64),
}

struct Param<'a> {
    seg: &'a DensitySegment,
    /// Jump size as a function of the parameter, written into `buf`.
    origin: Vec<f64>,
    velocity: Vec<f64>,
}

impl Param<'_> {
    /// Writes `x(s)` into `buf`; returns the clamped parameter when `|x(s)|`
    /// would exceed the clamp radius.
    fn point(&self, s: f64, buf: &mut Vec<f64>) -> Option<f64> {
        let vn = norm(&self.velocity);
        let lim = X_CLAMP / vn;
        let sc = s.clamp(-lim, lim);
        buf.clear();
        buf.extend(self.origin.iter().zip(&self.velocity).map(|(o, v)| o + sc * v));
        (sc != s).then_some(sc)
    }

    /// Integrand alone; its sign decides the direction of a divergence.
    fn integrand_at(&self, ig: &Integrand, s: f64) -> f64 {
        let mut x = Vec::with_capacity(self.origin.len());
        self.point(s, &mut x);
        ig.value(&x)
    }

    /// `F(s) = density(s)·f(x(s))` evaluated with `ln|s|` known exactly.
    fn weighted(&self, ig: &Integrand, s: f64, ln_abs_s: f64, ln_jac: f64) -> f64 {
        let mut x = Vec::with_capacity(self.origin.len());
        let clamped = self.point(s, &mut x);
        let lv = norm(&self.velocity).ln();
        let (norm_x, ln_norm_x, excess) = match clamped {
            Some(sc) => {
                let excess = ln_abs_s - sc.abs().ln();
                ((ln_abs_s + lv).exp(), ln_abs_s + lv, excess)
            }
            None => {
                let n = norm(&x);
                (n, n.ln(), 0.0)
            }
        };
        let p = EvalPoint {
            s,
            ln_abs_s,
            x: &x,
            norm_x,
            ln_norm_x,
        };
        let ld = self.seg.family.ln_density(&p) + ln_jac;
        if ld == f64::NEG_INFINITY {
            return 0.0;
        }
        let fx = match ig.beyond {
            Some(g) if excess > 0.0 => g(&x, excess),
            _ => ig.smooth(&x),
        };
        let ex = match ig.exp_term {
            Some(h) => (h(&x) + ld).exp(),
            None => 0.0,
        };
        if fx == 0.0 {
            return ex;
        }
        fx * ld.exp() + ex
    }
}

fn budget(seg: &DensitySegment, cfg: &QuadConfig) -> QuadConfig {
    let mut c = *cfg;
    if let Some(h) = seg.quadrature_hint {
        c.max_subdivisions = h.max_subdivisions.max(1);
    }
    c
}

fn integrate_segment(seg: &DensitySegment, ig: &Integrand, cfg: &QuadConfig) -> Result<ExtReal> {
    let cfg = budget(seg, cfg);
    match &seg.support {
        SupportRegion::Interval { lo, hi, .. } => {
            let param = Param {
                seg,
                origin: vec![0.0],
                velocity: vec![1.0],
            };
            let mut breaks = vec![0.0, 1.0, -1.0];
            for (w, level) in ig.planes {
                if w[0] != 0.0 {
                    breaks.push(level / w[0]);
                }
            }
            integrate_param(&param, *lo, *hi, &breaks, ig, &cfg)
        }
        SupportRegion::HalfLine {
            origin,
            direction,
            start,
        } => {
            let param = Param {
                seg,
                origin: origin.clone(),
                velocity: direction.clone(),
            };
            let mut breaks = vec![0.0, 1.0];
            // |o + s v| = 1
            let (aa, bb, cc) = (dot(direction, direction), 2.0 * dot(origin, direction), dot(origin, origin) - 1.0);
            let disc = bb * bb - 4.0 * aa * cc;
            if disc >= 0.0 {
                breaks.push((-bb - disc.sqrt()) / (2.0 * aa));
                breaks.push((-bb + disc.sqrt()) / (2.0 * aa));
            }
            for (w, level) in ig.planes {
                let wv = dot(w, direction);
                if wv != 0.0 {
                    breaks.push((level - dot(w, origin)) / wv);
                }
            }
            integrate_param(&param, *start, f64::INFINITY, &breaks, ig, &cfg)
        }
        SupportRegion::Box { lo, hi } => integrate_box(seg, lo, hi, ig, &cfg),
        SupportRegion::AtomCloud { .. } => Err(Error::InvalidInput("atom cloud used as density support".into())),
    }
}

fn integrate_param(
    param: &Param,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    ig: &Integrand,
    cfg: &QuadConfig,
) -> Result<ExtReal> {
    let family = &param.seg.family;
    let singular_origin = family.origin_order() > 0.0;
    let touches_origin = param.seg.touches_origin();

    // Divergence screening.
    let mut verdict = ExtReal::ZERO;
    if touches_origin && ig.origin_order - family.origin_order() <= -1.0 + 1e-12 {
        for side in [-1.0, 1.0] {
            if (side < 0.0 && lo < 0.0) || (side > 0.0 && hi > 0.0) {
                let probe = param.integrand_at(ig, side * 1e-8);
                verdict = combine(verdict, sign_to_inf(probe, "origin")?)?;
            }
        }
    }
    let mut tails = Vec::new();
    if hi == f64::INFINITY {
        tails.push((1.0, param.velocity.clone()));
    }
    if lo == f64::NEG_INFINITY {
        tails.push((-1.0, param.velocity.iter().map(|v| -v).collect()));
    }
    for (sign, dir) in &tails {
        let law = family.tail_law(dir);
        if !law.integrable_against(&(ig.growth)(dir)) {
            let probe = param.integrand_at(ig, sign * 1e12);
            verdict = combine(verdict, sign_to_inf(probe, "tail")?)?;
        }
    }
    if !verdict.is_finite() {
        return Ok(verdict);
    }

    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > lo && *b < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut pieces = Vec::new();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == f64::NEG_INFINITY {
            pieces.push(Piece::Tail(b));
        } else if b == f64::INFINITY {
            pieces.push(Piece::Tail(a));
        } else if singular_origin && a == 0.0 {
            pieces.push(Piece::Origin(b));
        } else if singular_origin && b == 0.0 {
            pieces.push(Piece::Origin(a));
        } else {
            pieces.push(Piece::Plain(a, b));
        }
    }

    let mut total = 0.0;
    for piece in pieces {
        let (val, err, ok) = match piece {
            Piece::Plain(a, b) => {
                let r = quadrature::integrate(|s| param.weighted(ig, s, s.abs().ln(), 0.0), a, b, &[], cfg);
                (r.value, r.error, r.converged)
            }
            Piece::Tail(a) | Piece::Origin(a) => {
                if a == 0.0 {
                    return Err(Error::InvalidInput("tail piece anchored at the origin".into()));
                }
                let outward = matches!(piece, Piece::Tail(_));
                let omega = ig.wave.map_or(0.0, |w| dot(w.freq, &param.velocity));
                if outward && omega != 0.0 {
                    let w = ig.wave.expect("wave present");
                    let rest = Integrand {
                        wave: None,
                        ..*ig
                    };
                    let (lo, hi) = if a > 0.0 { (a, f64::INFINITY) } else { (f64::NEG_INFINITY, a) };
                    let smooth = integrate_param(param, lo, hi, breaks, &rest, cfg)?;
                    let waved = wave_tail(param, w, a, cfg)?;
                    total += smooth.finite().ok_or_else(|| Error::UndecidableTail("smooth part of an oscillating tail".into()))? + waved;
                    continue;
                }
                let sign = a.signum();
                let ln_a = a.abs().ln();
                let r = quadrature::integrate(
                    |v| {
                        let u = v / (1.0 - v);
                        let ln_abs_s = if outward { ln_a + u } else { ln_a - u };
                        let s = sign * ln_abs_s.exp();
                        let ln_jac = ln_abs_s - 2.0 * (1.0 - v).ln();
                        param.weighted(ig, s, ln_abs_s, ln_jac)
                    },
                    0.0,
                    1.0,
                    &mapped_breaks(breaks, a, outward),
                    cfg,
                );
                (r.value, r.error, r.converged)
            }
        };
        if !ok && err > 10.0 * cfg.tolerance_for(val) {
            return Err(Error::QuadratureDivergence {
                region: format!("{piece:?}"),
                estimate: val,
                error: err,
            });
        }
        // Orientation: mapped pieces always integrate the positive measure.
        total += val;
    }
    Ok(ExtReal::Finite(total))
}

const WAVE_BLOCKS: usize = 400;

/// `∫ wave dν` over the tail beyond `a`, summed between consecutive zeros
/// of the wave and extrapolated with Wynn's epsilon algorithm.
fn wave_tail(param: &Param, w: Wave, a: f64, cfg: &QuadConfig) -> Result<f64> {
    let sigma = a.signum();
    let phi = dot(w.freq, &param.origin);
    let om = sigma * dot(w.freq, &param.velocity);
    let z0 = if w.sine { 0.0 } else { std::f64::consts::FRAC_PI_2 };
    let t0 = a.abs();
    let frac = (phi + om * t0 - z0) / std::f64::consts::PI;
    let delta = if om > 0.0 { frac.ceil() - frac } else { frac - frac.floor() };
    let h = std::f64::consts::PI / om.abs();
    let f = |x: &[f64]| w.eval(x);
    let flat = |_: &[f64]| TailLaw::FLAT;
    let ig = Integrand {
        f: &f,
        origin_order: 0.0,
        growth: &flat,
        planes: &[],
        beyond: None,
        exp_term: None,
        wave: None,
    };
    let block = |lo: f64, hi: f64| -> Result<f64> {
        let r = quadrature::integrate(|t| param.weighted(&ig, sigma * t, t.ln(), 0.0), lo, hi, &[], cfg);
        if !r.converged && r.error > 10.0 * cfg.tolerance_for(r.value) {
            return Err(Error::QuadratureDivergence {
                region: format!("wave block [{lo}, {hi}]"),
                estimate: r.value,
                error: r.error,
            });
        }
        Ok(r.value)
    };
    let t1 = t0 + delta * h;
    let mut sums = vec![if t1 > t0 { block(t0, t1)? } else { 0.0 }];
    let mut estimates: Vec<f64> = Vec::new();
    for k in 0..WAVE_BLOCKS {
        let lo = t1 + k as f64 * h;
        let last = *sums.last().expect("nonempty");
        sums.push(last + block(lo, lo + h)?);
        let e = wynn(&sums);
        estimates.push(e);
        let n = estimates.len();
        if n >= 8 {
            let tol = cfg.tolerance_for(e);
            let settled = estimates[n - 3..].windows(2).all(|p| (p[1] - p[0]).abs() <= tol);
            if settled {
                return Ok(e);
            }
        }
    }
    let n = estimates.len();
    Err(Error::QuadratureDivergence {
        region: format!("oscillating tail from {a}"),
        estimate: estimates[n - 1],
        error: (estimates[n - 1] - estimates[n - 2]).abs(),
    })
}

/// Wynn's epsilon extrapolation of a sequence of partial sums.
fn wynn(s: &[f64]) -> f64 {
    let mut prev = vec![0.0; s.len() + 1];
    let mut cur = s.to_vec();
    let mut best = *s.last().expect("nonempty");
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 {
                return if col % 2 == 0 { cur[i + 1] } else { best };
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        col += 1;
        if col % 2 == 0 {
            best = *cur.last().expect("nonempty");
        }
    }
    best
}

fn mapped_breaks(breaks: &[f64], a: f64, outward: bool) -> Vec<f64> {
    breaks
        .iter()
        .filter(|b| b.signum() == a.signum() && **b != 0.0)
        .filter_map(|b| {
            let r = (b / a).ln();
            let u = if outward { r } else { -r };
            (u > 0.0).then(|| u / (1.0 + u))
        })
        .collect()
}

fn sign_to_inf(probe: f64, where_: &str) -> Result<ExtReal> {
    if probe > 0.0 {
        Ok(ExtReal::PosInf)
    } else if probe < 0.0 {
        Ok(ExtReal::NegInf)
    } else {
        Err(Error::UndecidableTail(format!(
            "integrand vanishes at the {where_} probe of a non-integrable segment"
        )))
    }
}

/// Tensor-product integration over a bounded box, innermost coordinate last.
fn integrate_box(seg: &DensitySegment, lo: &[f64], hi: &[f64], ig: &Integrand, cfg: &QuadConfig) -> Result<ExtReal> {
    let inner = QuadConfig {
        abs_tol: cfg.abs_tol * 1e-2,
        ..*cfg
    };
    let failed = Cell::new(false);
    let ctx = BoxCtx {
        seg,
        lo,
        hi,
        ig,
        outer: cfg,
        inner: &inner,
        failed: &failed,
    };
    let v = ctx.level(&[]);
    if failed.get() {
        return Err(Error::QuadratureDivergence {
            region: format!("box {lo:?}..{hi:?}"),
            estimate: v,
            error: f64::NAN,
        });
    }
    Ok(ExtReal::Finite(v))
}

struct BoxCtx<'a> {
    seg: &'a DensitySegment,
    lo: &'a [f64],
    hi: &'a [f64],
    ig: &'a Integrand<'a>,
    outer: &'a QuadConfig,
    inner: &'a QuadConfig,
    failed: &'a Cell<bool>,
}

impl BoxCtx<'_> {
    fn leaf(&self, x: &[f64]) -> f64 {
        let ld = self.seg.family.ln_density(&EvalPoint::plain(f64::NAN, x));
        if ld == f64::NEG_INFINITY {
            0.0
        } else {
            let ex = self.ig.exp_term.map_or(0.0, |h| (h(x) + ld).exp());
            self.ig.smooth(x) * ld.exp() + ex
        }
    }

    fn level(&self, prefix: &[f64]) -> f64 {
        let k = prefix.len();
        let last = k + 1 == self.lo.len();
        let r2: f64 = prefix.iter().map(|v| v * v).sum();
        let mut breaks = vec![0.0, 1.0, -1.0];
        if r2 < 1.0 {
            breaks.push((1.0 - r2).sqrt());
            breaks.push(-(1.0 - r2).sqrt());
        }
        if last {
            for (w, lvl) in self.ig.planes {
                if w[k] != 0.0 {
                    breaks.push((lvl - dot(&w[..k], prefix)) / w[k]);
                }
            }
        }
        let cfg = if k == 0 { self.outer } else { self.inner };
        let r = quadrature::integrate(
            |t| {
                let mut x = prefix.to_vec();
                x.push(t);
                if last {
                    self.leaf(&x)
                } else {
                    self.level(&x)
                }
            },
            self.lo[k],
            self.hi[k],
            &breaks,
            cfg,
        );
        if !r.converged && r.error > 10.0 * cfg.tolerance_for(r.value) {
            self.failed.set(true);
        }
        r.value
    }
}

/// Whether `∫ f dν` over `|x| > 1` is finite, decided from the tail table.
pub(crate) fn tails_integrable(nu: &JumpMeasure, growth: &dyn Fn(&[f64]) -> TailLaw) -> bool {
    nu.densities.iter().all(|seg| {
        seg.tails()
            .iter()
            .all(|dir| seg.family.tail_law(dir).integrable_against(&growth(dir)))
    })
}

/// Density factor `f_n(x) = |x|^{-1/n}` on `|x| > 1`.
pub fn approximation_factor(x: &[f64], n: u32) -> f64 {
    let r = norm(x);
    if r <= 1.0 {
        1.0
    } else {
        r.powf(-1.0 / n as f64)
    }
}

pub(crate) fn damp_family(f: &Family, n: u32) -> Family {
    Family::TailDamped {
        power: 1.0 / n as f64,
        base: Box::new(f.clone()),
    }
}
