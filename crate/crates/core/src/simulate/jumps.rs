//! Exact samplers for the jumps of size above `ε`.
//!
//! One-parameter segments are tabulated in `w = ln|s|` (or `w = s` near a
//! regular origin): cell masses come from adaptive quadrature, a cell is
//! picked by inverse CDF and the point inside it by rejection against a
//! sampled envelope. Mass beyond `|s| = e^W_MAX` sits at that radius.

use rand::Rng;

use crate::error::{Error, Result};
use crate::levy::measure::EvalPoint;
use crate::levy::{DensitySegment, Family, SupportRegion};
use crate::linalg::{dot, norm};
use crate::quadrature::{integrate, QuadConfig};

const W_MAX: f64 = 690.0;
const CELLS: usize = 2048;
const BOX_CELLS: usize = 512;
const ENVELOPE_PROBES: usize = 17;
const ENVELOPE_SLACK: f64 = 1.25;

/// Range `sign·s`, `s ∈ [a, b]`, in the coordinate `w`.
#[derive(Debug, Clone, Copy)]
struct Piece {
    sign: f64,
    a: f64,
    b: f64,
    log: bool,
}

impl Piece {
    fn w_range(&self) -> (f64, f64) {
        if self.log {
            (self.a.ln(), if self.b.is_finite() { self.b.ln() } else { W_MAX })
        } else {
            (self.a, self.b)
        }
    }

    fn s_of(&self, w: f64) -> f64 {
        self.sign * if self.log { w.exp() } else { w }
    }
}

/// Tabulated law of one piece.
#[derive(Debug, Clone)]
pub(super) struct Table {
    piece: Piece,
    edges: Vec<f64>,
    cdf: Vec<f64>,
    envelope: Vec<f64>,
    /// Mass beyond `W_MAX` placed at the far end.
    far_mass: f64,
    mass: f64,
}

/// Sampler for one density segment restricted to `|x| > ε`.
#[derive(Debug, Clone)]
pub(crate) enum SegmentSampler {
    Line {
        origin: Vec<f64>,
        velocity: Vec<f64>,
        family: Family,
        tables: Vec<Table>,
        mass: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
        family: Family,
        /// Per-coordinate tables of the innermost product factors.
        factors: Vec<Table>,
        /// Upper bound of the modifier `density / product`.
        bound: f64,
        epsilon: f64,
        mass: f64,
    },
}

impl SegmentSampler {
    pub fn new(seg: &DensitySegment, epsilon: f64) -> Result<Self> {
        match &seg.support {
            SupportRegion::Interval { lo, hi, .. } => {
                let mut pieces = Vec::new();
                if *lo < -epsilon {
                    pieces.push((-1.0, epsilon.max(-hi), -lo));
                }
                if *hi > epsilon {
                    pieces.push((1.0, epsilon.max(*lo), *hi));
                }
                line(seg, vec![0.0], vec![1.0], &pieces)
            }
            SupportRegion::HalfLine {
                origin,
                direction,
                start,
            } => {
                // |o + s v| ≤ ε on [s₋, s₊].
                let aa = dot(direction, direction);
                let bb = 2.0 * dot(origin, direction);
                let cc = dot(origin, origin) - epsilon * epsilon;
                let disc = bb * bb - 4.0 * aa * cc;
                let mut ranges = Vec::new();
                if disc > 0.0 {
                    let (sm, sp) = ((-bb - disc.sqrt()) / (2.0 * aa), (-bb + disc.sqrt()) / (2.0 * aa));
                    if *start < sm {
                        ranges.push((*start, sm));
                    }
                    ranges.push((sp.max(*start), f64::INFINITY));
                } else {
                    ranges.push((*start, f64::INFINITY));
                }
                let mut pieces = Vec::new();
                for (a, b) in ranges {
                    if a < 0.0 {
                        pieces.push((-1.0, (-b).max(0.0), -a));
                    }
                    if b > 0.0 {
                        pieces.push((1.0, a.max(0.0), b));
                    }
                }
                line(seg, origin.clone(), direction.clone(), &pieces)
            }
            SupportRegion::Box { lo, hi } => boxed(seg, lo, hi, epsilon),
            SupportRegion::AtomCloud { .. } => Err(Error::InvalidInput("atom cloud used as density support".into())),
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            SegmentSampler::Line { mass, .. } | SegmentSampler::Box { mass, .. } => *mass,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            SegmentSampler::Line {
                origin,
                velocity,
                family,
                tables,
                mass,
            } => {
                let mut u = rng.random::<f64>() * mass;
                let mut pick = &tables[tables.len() - 1];
                for t in tables {
                    if u < t.mass {
                        pick = t;
                        break;
                    }
                    u -= t.mass;
                }
                let s = pick.sample(rng, &|s| line_log_density(family, origin, velocity, s));
                origin.iter().zip(velocity).map(|(o, v)| o + s * v).collect()
            }
            SegmentSampler::Box {
                lo,
                hi,
                family,
                factors,
                bound,
                epsilon,
                ..
            } => loop {
                let x: Vec<f64> = factors
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let f = innermost_factor(family, i);
                        t.sample(rng, &|s| scalar_log_density(f, s))
                    })
                    .collect();
                if norm(&x) <= *epsilon || x.iter().zip(lo.iter().zip(hi)).any(|(v, (l, h))| v < l || v > h) {
                    continue;
                }
                let p = EvalPoint::plain(0.0, &x);
                let ratio = (family.ln_density(&p) - product_ln_density(family, &x)).exp();
                if rng.random::<f64>() * bound <= ratio {
                    return x;
                }
            },
        }
    }
}

fn line(seg: &DensitySegment, origin: Vec<f64>, velocity: Vec<f64>, ranges: &[(f64, f64, f64)]) -> Result<SegmentSampler> {
    let singular = seg.family.origin_order() > 0.0;
    let mut tables = Vec::new();
    let ld = |s: f64| line_log_density(&seg.family, &origin, &velocity, s);
    for &(sign, a, b) in ranges {
        if b <= a {
            continue;
        }
        let mut parts = Vec::new();
        if a > 0.0 {
            parts.push(Piece { sign, a, b, log: true });
        } else if singular {
            return Err(Error::InvalidInput(
                "segment density is singular away from the origin".into(),
            ));
        } else if b <= 1.0 {
            parts.push(Piece { sign, a, b, log: false });
        } else {
            parts.push(Piece { sign, a, b: 1.0, log: false });
            parts.push(Piece { sign, a: 1.0, b, log: true });
        }
        for p in parts {
            let t = Table::build(p, CELLS, &ld)?;
            if t.mass > 0.0 {
                tables.push(t);
            }
        }
    }
    let mass = tables.iter().map(|t| t.mass).sum();
    Ok(SegmentSampler::Line {
        origin,
        velocity,
        family: seg.family.clone(),
        tables,
        mass,
    })
}

fn line_log_density(family: &Family, origin: &[f64], velocity: &[f64], s: f64) -> f64 {
    let x: Vec<f64> = origin.iter().zip(velocity).map(|(o, v)| o + s * v).collect();
    family.ln_density(&EvalPoint::plain(s, &x))
}

fn scalar_log_density(f: &Family, s: f64) -> f64 {
    f.ln_density(&EvalPoint::plain(s, std::slice::from_ref(&s)))
}

fn innermost_factor(f: &Family, i: usize) -> &Family {
    match f {
        Family::Product { factors } => &factors[i],
        Family::ExponentialTilt { base, .. } | Family::TailDamped { base, .. } => innermost_factor(base, i),
        other => other,
    }
}

fn product_ln_density(f: &Family, x: &[f64]) -> f64 {
    match f {
        Family::ExponentialTilt { base, .. } | Family::TailDamped { base, .. } => product_ln_density(base, x),
        other => other.ln_density(&EvalPoint::plain(0.0, x)),
    }
}

/// `sup` of `density / product` over the box: tilts peak at a vertex,
/// damping and the quadratic tail only shrink.
fn modifier_bound(f: &Family, lo: &[f64], hi: &[f64]) -> f64 {
    match f {
        Family::ExponentialTilt { eta, base, .. } => {
            let peak: f64 = eta
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(e, (l, h))| (-e * l).max(-e * h))
                .sum();
            peak.exp() * modifier_bound(base, lo, hi)
        }
        Family::TailDamped { base, .. } => modifier_bound(base, lo, hi),
        _ => 1.0,
    }
}

fn boxed(seg: &DensitySegment, lo: &[f64], hi: &[f64], epsilon: f64) -> Result<SegmentSampler> {
    let mut factors = Vec::with_capacity(lo.len());
    for i in 0..lo.len() {
        let f = innermost_factor(&seg.family, i).clone();
        let piece = Piece {
            sign: 1.0,
            a: lo[i],
            b: hi[i],
            log: false,
        };
        let t = Table::build(piece, BOX_CELLS, &|s| scalar_log_density(&f, s))?;
        if !(t.mass.is_finite() && t.mass > 0.0) {
            return Err(Error::InvalidInput("box factor without finite positive mass".into()));
        }
        factors.push(t);
    }
    let bound = modifier_bound(&seg.family, lo, hi);
    // Rate of the restricted law by quadrature of the full density.
    let single = crate::levy::JumpMeasure {
        atoms: Vec::new(),
        densities: vec![seg.clone()],
    };
    let mass = crate::levy::integrate_with_config(
        &single,
        |x: &[f64]| if norm(x) > epsilon { 1.0 } else { 0.0 },
        crate::levy::WeightClass::Bounded,
        &QuadConfig::default(),
    )?
    .finite()
    .ok_or_else(|| Error::InvalidInput("box density has infinite mass above ε".into()))?;
    Ok(SegmentSampler::Box {
        lo: lo.to_vec(),
        hi: hi.to_vec(),
        family: seg.family.clone(),
        factors,
        bound,
        epsilon,
        mass,
    })
}

impl Table {
    /// `ln_density` is in the segment parameter `s`.
    fn build(piece: Piece, cells: usize, ln_density: &dyn Fn(f64) -> f64) -> Result<Table> {
        let (w0, w1) = piece.w_range();
        let g = |w: f64| {
            let s = piece.s_of(w);
            let jac = if piece.log { w } else { 0.0 };
            (ln_density(s) + jac).exp()
        };
        let cfg = QuadConfig {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_subdivisions: 200,
        };
        let h = (w1 - w0) / cells as f64;
        let mut edges = Vec::with_capacity(cells + 1);
        let mut cdf = Vec::with_capacity(cells + 1);
        let mut envelope = Vec::with_capacity(cells);
        let mut acc = 0.0;
        cdf.push(0.0);
        edges.push(w0);
        for k in 0..cells {
            let (a, b) = (w0 + h * k as f64, if k + 1 == cells { w1 } else { w0 + h * (k + 1) as f64 });
            let r = integrate(g, a, b, &[], &cfg);
            if !r.value.is_finite() {
                return Err(Error::QuadratureDivergence {
                    region: format!("jump sampler cell [{a}, {b}]"),
                    estimate: r.value,
                    error: r.error,
                });
            }
            acc += r.value.max(0.0);
            cdf.push(acc);
            edges.push(b);
            let peak = (0..ENVELOPE_PROBES)
                .map(|j| g(a + (b - a) * j as f64 / (ENVELOPE_PROBES - 1) as f64))
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max);
            envelope.push(peak * ENVELOPE_SLACK);
        }
        let far_mass = if piece.log && !piece.b.is_finite() {
            // e^w overflows past ~709, so fit g ∝ w^{−p} on [W_MAX/2, W_MAX]
            // and integrate the fit.
            let (ga, gb) = (g(0.5 * W_MAX), g(W_MAX));
            if gb > 0.0 && ga > gb {
                let p = (ga / gb).ln() / 2f64.ln();
                if p > 1.0 {
                    gb * W_MAX / (p - 1.0)
                } else {
                    return Err(Error::QuadratureDivergence {
                        region: "jump sampler far tail".into(),
                        estimate: f64::INFINITY,
                        error: f64::NAN,
                    });
                }
            } else {
                0.0
            }
        } else {
            0.0
        };
        Ok(Table {
            piece,
            edges,
            mass: acc + far_mass,
            cdf,
            envelope,
            far_mass,
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, ln_density: &dyn Fn(f64) -> f64) -> f64 {
        let total = self.mass;
        let u = rng.random::<f64>() * total;
        let grid_mass = *self.cdf.last().expect("nonempty cdf");
        if u >= grid_mass && self.far_mass > 0.0 {
            return self.piece.s_of(W_MAX);
        }
        let k = match self.cdf.binary_search_by(|c| c.partial_cmp(&u).expect("finite cdf")) {
            Ok(i) => i.min(self.envelope.len() - 1),
            Err(i) => (i - 1).min(self.envelope.len() - 1),
        };
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        let m = self.envelope[k];
        for _ in 0..10_000 {
            let w = a + (b - a) * rng.random::<f64>();
            let s = self.piece.s_of(w);
            let jac = if self.piece.log { w } else { 0.0 };
            let gw = (ln_density(s) + jac).exp();
            if m <= 0.0 || rng.random::<f64>() * m <= gw {
                return s;
            }
        }
        self.piece.s_of(0.5 * (a + b))
    }
}
