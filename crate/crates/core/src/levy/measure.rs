//! Jump measures: finite atoms plus density segments drawn from a fixed
//! catalog of parametric families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Jump sizes beyond this magnitude are clamped before an integrand sees
/// them; densities and Jacobians are evaluated in log form and stay exact.
pub(crate) const X_CLAMP: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub x: Vec<f64>,
    pub rate: f64,
}

impl Atom {
    pub fn new(x: Vec<f64>, rate: f64) -> Self {
        Atom { x, rate }
    }
}

/// Support descriptor of one density segment (or of the atomic part).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub enum SupportRegion {
    /// One-dimensional interval; endpoints may be infinite.
    #[serde(rename_all = "camelCase")]
    Interval {
        #[serde(with = "crate::serde_ext::ext_f64")]
        lo: f64,
        #[serde(with = "crate::serde_ext::ext_f64")]
        hi: f64,
        #[serde(default)]
        lo_closed: bool,
        #[serde(default = "default_true")]
        hi_closed: bool,
    },
    /// Bounded box in `d` dimensions, carrying a product density.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Ray `{origin + s·direction : s ≥ start}` with a density in `s`.
    HalfLine {
        origin: Vec<f64>,
        direction: Vec<f64>,
        start: f64,
    },
    /// Finite point set; describes the support of the atomic part.
    AtomCloud { vertices: Vec<Vec<f64>> },
}

fn default_true() -> bool {
    true
}

impl SupportRegion {
    pub fn interval(lo: f64, hi: f64) -> Self {
        SupportRegion::Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: true,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            SupportRegion::Interval { .. } => Some(1),
            SupportRegion::Box { lo, .. } => Some(lo.len()),
            SupportRegion::HalfLine { origin, .. } => Some(origin.len()),
            SupportRegion::AtomCloud { vertices } => vertices.first().map(Vec::len),
        }
    }

    /// Finite extreme points of the closed region.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            SupportRegion::Interval { lo, hi, .. } => [*lo, *hi]
                .iter()
                .filter(|v| v.is_finite())
                .map(|&v| vec![v])
                .collect(),
            SupportRegion::Box { lo, hi } => {
                let d = lo.len();
                (0..1usize << d)
                    .map(|mask| {
                        (0..d)
                            .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                            .collect()
                    })
                    .collect()
            }
            SupportRegion::HalfLine {
                origin,
                direction,
                start,
            } => vec![origin.iter().zip(direction).map(|(o, d)| o + start * d).collect()],
            SupportRegion::AtomCloud { vertices } => vertices.clone(),
        }
    }

    /// Directions along which the region is unbounded.
    pub fn recession_directions(&self) -> Vec<Vec<f64>> {
        match self {
            SupportRegion::Interval { lo, hi, .. } => {
                let mut out = Vec::new();
                if *hi == f64::INFINITY {
                    out.push(vec![1.0]);
                }
                if *lo == f64::NEG_INFINITY {
                    out.push(vec![-1.0]);
                }
                out
            }
            SupportRegion::HalfLine { direction, .. } => vec![direction.clone()],
            _ => Vec::new(),
        }
    }

    /// `inf { p⊤x : x in region }`, `-inf` when unbounded below.
    pub fn inf_linear(&self, p: &[f64]) -> f64 {
        if self
            .recession_directions()
            .iter()
            .any(|d| dot(p, d) < 0.0)
        {
            return f64::NEG_INFINITY;
        }
        self.vertices()
            .iter()
            .map(|v| dot(p, v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Vectors spanning the linear hull of the region.
    pub fn spanning_vectors(&self) -> Vec<Vec<f64>> {
        let mut out = self.vertices();
        out.extend(self.recession_directions());
        if let SupportRegion::Box { lo, hi } = self {
            for i in 0..lo.len() {
                if hi[i] > lo[i] {
                    let mut e = vec![0.0; lo.len()];
                    e[i] = 1.0;
                    out.push(e);
                }
            }
        }
        if let SupportRegion::Interval { lo, hi, .. } = self {
            if hi > lo {
                out.push(vec![1.0]);
            }
        }
        out
    }

    pub fn is_bounded(&self) -> bool {
        self.recession_directions().is_empty()
    }
}

/// Scalar density families and the multiplicative modifiers produced by
/// measure changes and approximating sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "camelCase")]
pub enum Family {
    /// `Σ coeffs[k]·s^k`.
    PolynomialOnInterval { coeffs: Vec<f64> },
    /// `scale·|s|^{-exponent}`.
    PowerLawTail { scale: f64, exponent: f64 },
    /// `scale·|s|^{-1}·(log(1+|s|))^{-logExponent}`.
    #[serde(rename_all = "camelCase")]
    PowerLogTail { scale: f64, log_exponent: f64 },
    /// `exp(-η⊤x - g(x))·base`, with `g(x) = (|x|²-1)⁺` when `quadraticTail`.
    #[serde(rename_all = "camelCase")]
    ExponentialTilt {
        eta: Vec<f64>,
        #[serde(default)]
        quadratic_tail: bool,
        base: Box<Family>,
    },
    /// `|x|^{-power}·base` on `|x| > 1`.
    TailDamped { power: f64, base: Box<Family> },
    /// Product of scalar families over the coordinates of a box.
    Product { factors: Vec<Family> },
}

/// Where a density is evaluated. `ln_abs_s` and `ln_norm_x` stay exact when
/// `s` or `x` overflow.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EvalPoint<'a> {
    pub s: f64,
    pub ln_abs_s: f64,
    pub x: &'a [f64],
    pub norm_x: f64,
    pub ln_norm_x: f64,
}

impl<'a> EvalPoint<'a> {
    pub fn plain(s: f64, x: &'a [f64]) -> Self {
        let n = norm(x);
        EvalPoint {
            s,
            ln_abs_s: s.abs().ln(),
            x,
            norm_x: n,
            ln_norm_x: n.ln(),
        }
    }
}

/// Asymptotic law `exp(-κ|s|)·|s|^{-power}·(log|s|)^{-log_power}` of a
/// density (or the growth law of an integrand when the signs are flipped).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailLaw {
    pub kappa: f64,
    pub power: f64,
    pub log_power: f64,
}

impl TailLaw {
    pub const FLAT: TailLaw = TailLaw {
        kappa: 0.0,
        power: 0.0,
        log_power: 0.0,
    };

    /// Whether `∫^∞ density(s)·integrand(s) ds` is finite, with the integrand
    /// growing like `exp(γ s)·s^α·(log s)^β` given as `growth`.
    pub fn integrable_against(&self, growth: &TailLaw) -> bool {
        const EPS: f64 = 1e-12;
        let k = self.kappa - growth.kappa;
        if k == f64::INFINITY || k > EPS {
            return true;
        }
        if k < -EPS {
            return false;
        }
        let p = self.power - growth.power;
        if p > 1.0 + EPS {
            return true;
        }
        if p < 1.0 - EPS {
            return false;
        }
        self.log_power - growth.log_power > 1.0 + EPS
    }
}

impl Family {
    fn is_scalar(&self) -> bool {
        matches!(
            self,
            Family::PolynomialOnInterval { .. }
                | Family::PowerLawTail { .. }
                | Family::PowerLogTail { .. }
        )
    }

    /// Natural log of the density at `p` (`-inf` where it vanishes).
    pub(crate) fn ln_density(&self, p: &EvalPoint) -> f64 {
        match self {
            Family::PolynomialOnInterval { coeffs } => {
                let v = coeffs.iter().rev().fold(0.0, |acc, c| acc * p.s + c);
                if v > 0.0 {
                    v.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::PowerLawTail { scale, exponent } => scale.ln() - exponent * p.ln_abs_s,
            Family::PowerLogTail {
                scale,
                log_exponent,
            } => {
                // log(1+|s|) without overflow for huge |s|.
                let l = if p.ln_abs_s > 30.0 {
                    p.ln_abs_s + (-p.ln_abs_s).exp()
                } else {
                    p.s.abs().ln_1p()
                };
                scale.ln() - p.ln_abs_s - log_exponent * l.ln()
            }
            Family::ExponentialTilt {
                eta,
                quadratic_tail,
                base,
            } => {
                let mut v = base.ln_density(p) - dot(eta, p.x);
                if *quadratic_tail && p.norm_x > 1.0 {
                    v -= p.norm_x * p.norm_x - 1.0;
                }
                v
            }
            Family::TailDamped { power, base } => {
                let mut v = base.ln_density(p);
                if p.norm_x > 1.0 {
                    v -= power * p.ln_norm_x;
                }
                v
            }
            Family::Product { factors } => factors
                .iter()
                .zip(p.x)
                .map(|(f, &xi)| f.ln_density(&EvalPoint::plain(xi, std::slice::from_ref(&xi))))
                .sum(),
        }
    }

    pub fn density_at(&self, s: f64, x: &[f64]) -> f64 {
        self.ln_density(&EvalPoint::plain(s, x)).exp()
    }

    /// Tail law along the unit direction `dir` (in jump space) as `|s| → ∞`.
    pub fn tail_law(&self, dir: &[f64]) -> TailLaw {
        match self {
            Family::PolynomialOnInterval { coeffs } => {
                let deg = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
                TailLaw {
                    kappa: 0.0,
                    power: -(deg as f64),
                    log_power: 0.0,
                }
            }
            Family::PowerLawTail { exponent, .. } => TailLaw {
                kappa: 0.0,
                power: *exponent,
                log_power: 0.0,
            },
            Family::PowerLogTail { log_exponent, .. } => TailLaw {
                kappa: 0.0,
                power: 1.0,
                log_power: *log_exponent,
            },
            Family::ExponentialTilt {
                eta,
                quadratic_tail,
                base,
            } => {
                let mut t = base.tail_law(dir);
                if *quadratic_tail {
                    t.kappa = f64::INFINITY;
                } else {
                    t.kappa += dot(eta, dir);
                }
                t
            }
            Family::TailDamped { power, base } => {
                let mut t = base.tail_law(dir);
                t.power += power;
                t
            }
            Family::Product { .. } => TailLaw {
                kappa: f64::INFINITY,
                power: 0.0,
                log_power: 0.0,
            },
        }
    }

    /// Exponent `p` with density `~ |s|^{-p}` as `s → 0`.
    pub fn origin_order(&self) -> f64 {
        match self {
            Family::PolynomialOnInterval { coeffs } => {
                -(coeffs.iter().position(|c| *c != 0.0).unwrap_or(0) as f64)
            }
            Family::PowerLawTail { exponent, .. } => *exponent,
            Family::PowerLogTail { log_exponent, .. } => 1.0 + log_exponent,
            Family::ExponentialTilt { base, .. } | Family::TailDamped { base, .. } => {
                base.origin_order()
            }
            Family::Product { factors } => factors
                .iter()
                .map(Family::origin_order)
                .fold(0.0, f64::max),
        }
    }

    fn validate(&self, support: &SupportRegion, dim: usize) -> Result<()> {
        match self {
            Family::PolynomialOnInterval { coeffs } if coeffs.is_empty() => {
                Err(Error::InvalidInput("polynomial density without coefficients".into()))
            }
            Family::PowerLawTail { scale, .. } | Family::PowerLogTail { scale, .. }
                if *scale <= 0.0 || !scale.is_finite() =>
            {
                Err(Error::InvalidInput("density scale must be positive".into()))
            }
            Family::ExponentialTilt { eta, base, .. } => {
                if eta.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: eta.len(),
                    });
                }
                base.validate(support, dim)
            }
            Family::TailDamped { power, base } => {
                if *power < 0.0 {
                    return Err(Error::InvalidInput("tail damping power must be >= 0".into()));
                }
                base.validate(support, dim)
            }
            Family::Product { factors } => {
                if !matches!(support, SupportRegion::Box { .. }) || factors.len() != dim {
                    return Err(Error::InvalidInput(
                        "product densities need a box support with one factor per coordinate".into(),
                    ));
                }
                if factors.iter().any(|f| !f.is_scalar()) {
                    return Err(Error::InvalidInput("product factors must be scalar families".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn innermost_is_product(&self) -> bool {
        match self {
            Family::Product { .. } => true,
            Family::ExponentialTilt { base, .. } | Family::TailDamped { base, .. } => {
                base.innermost_is_product()
            }
            _ => false,
        }
    }
}

/// Per-segment quadrature budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct QuadratureHint {
    pub max_subdivisions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySegment {
    pub family: Family,
    pub support: SupportRegion,
    pub quadrature_hint: Option<QuadratureHint>,
}

impl DensitySegment {
    pub fn new(family: Family, support: SupportRegion) -> Self {
        DensitySegment {
            family,
            support,
            quadrature_hint: None,
        }
    }

    /// Unbounded ends of the segment, as the velocity `dx/ds` of the jump size
    /// in the segment parameter. Tail laws are expressed in `s`.
    pub(crate) fn tails(&self) -> Vec<Vec<f64>> {
        match &self.support {
            SupportRegion::HalfLine { direction, .. } => vec![direction.clone()],
            other => other.recession_directions(),
        }
    }

    /// Whether the segment accumulates mass at the origin.
    pub(crate) fn touches_origin(&self) -> bool {
        match &self.support {
            SupportRegion::Interval { lo, hi, .. } => *lo <= 0.0 && *hi >= 0.0,
            SupportRegion::Box { lo, hi } => lo.iter().zip(hi).all(|(l, h)| *l <= 0.0 && *h >= 0.0),
            SupportRegion::HalfLine {
                origin,
                direction,
                start,
            } => {
                // Closest approach of the ray to 0.
                let dd = dot(direction, direction);
                let s0 = (-dot(origin, direction) / dd).max(*start);
                let p: Vec<f64> = origin.iter().zip(direction).map(|(o, d)| o + s0 * d).collect();
                norm(&p) == 0.0
            }
            SupportRegion::AtomCloud { .. } => false,
        }
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        match self.support.dim() {
            Some(d) if d == dim => {}
            Some(d) => return Err(Error::DimensionMismatch { expected: dim, got: d }),
            None => return Err(Error::InvalidInput("empty support region".into())),
        }
        match &self.support {
            SupportRegion::Interval { lo, hi, .. } => {
                if lo.is_nan() || hi.is_nan() || lo >= hi {
                    return Err(Error::InvalidInput(format!("bad interval [{lo}, {hi}]")));
                }
                if self.family.innermost_is_product() {
                    return Err(Error::InvalidInput("product density on an interval".into()));
                }
            }
            SupportRegion::Box { lo, hi } => {
                if lo.len() != hi.len()
                    || lo
                        .iter()
                        .zip(hi)
                        .any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h))
                {
                    return Err(Error::InvalidInput(
                        "box supports must be bounded and non-degenerate".into(),
                    ));
                }
                if !self.family.innermost_is_product() {
                    return Err(Error::InvalidInput("box supports carry product densities".into()));
                }
            }
            SupportRegion::HalfLine {
                origin,
                direction,
                start,
            } => {
                if direction.len() != origin.len() || norm(direction) == 0.0 || !start.is_finite() {
                    return Err(Error::InvalidInput("bad half-line".into()));
                }
                if self.family.innermost_is_product() {
                    return Err(Error::InvalidInput("product density on a half-line".into()));
                }
            }
            SupportRegion::AtomCloud { .. } => {
                return Err(Error::InvalidInput(
                    "atom clouds describe atoms, not density segments".into(),
                ))
            }
        }
        self.family.validate(&self.support, dim)?;

        // Lévy integrability: ∫(1 ∧ |x|²) ν(dx) < ∞.
        if self.touches_origin() && self.family.origin_order() >= 3.0 - 1e-12 {
            return Err(Error::InvalidInput(
                "density is not a Lévy measure: ∫|x|² diverges at the origin".into(),
            ));
        }
        for dir in self.tails() {
            if !self.family.tail_law(&dir).integrable_against(&TailLaw::FLAT) {
                return Err(Error::InvalidInput(
                    "density is not a Lévy measure: infinite mass in the tail".into(),
                ));
            }
        }
        // Non-negativity spot check for polynomials.
        if let (Family::PolynomialOnInterval { coeffs }, SupportRegion::Interval { lo, hi, .. }) =
            (&self.family, &self.support)
        {
            let (a, b) = (lo.max(-1e6), hi.min(1e6));
            for k in 0..=200 {
                let s = a + (b - a) * k as f64 / 200.0;
                let v = coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c);
                if v < -1e-12 {
                    return Err(Error::InvalidInput(format!("polynomial density negative at {s}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct DensitySegmentRepr {
    family: String,
    #[serde(default)]
    params: serde_json::Value,
    support: SupportRegion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quadrature_hint: Option<QuadratureHint>,
}

impl Serialize for DensitySegment {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let tagged = serde_json::to_value(&self.family).map_err(serde::ser::Error::custom)?;
        let repr = DensitySegmentRepr {
            family: tagged["family"].as_str().unwrap_or_default().to_string(),
            params: tagged["params"].clone(),
            support: self.support.clone(),
            quadrature_hint: self.quadrature_hint,
        };
        repr.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DensitySegment {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(de)?;
        if let Some(obj) = value.as_object() {
            for key in obj.keys() {
                if !matches!(key.as_str(), "family" | "params" | "support" | "quadratureHint") {
                    return Err(serde::de::Error::custom(format!("unknown key `{key}` in density")));
                }
            }
        }
        let repr: DensitySegmentRepr =
            serde_json::from_value(value).map_err(serde::de::Error::custom)?;
        let family: Family = serde_json::from_value(serde_json::json!({
            "family": repr.family,
            "params": repr.params,
        }))
        .map_err(serde::de::Error::custom)?;
        Ok(DensitySegment {
            family,
            support: repr.support,
            quadrature_hint: repr.quadrature_hint,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpMeasure {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub densities: Vec<DensitySegment>,
}

impl JumpMeasure {
    pub fn zero() -> Self {
        JumpMeasure::default()
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> Self {
        JumpMeasure {
            atoms,
            densities: Vec::new(),
        }
    }

    pub fn with_density(mut self, seg: DensitySegment) -> Self {
        self.densities.push(seg);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.densities.is_empty()
    }

    pub fn is_atomic(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        for a in &self.atoms {
            if a.x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.x.len(),
                });
            }
            if !(a.rate > 0.0 && a.rate.is_finite()) {
                return Err(Error::InvalidInput(format!("atom rate must be positive, got {}", a.rate)));
            }
            if a.x.iter().all(|v| *v == 0.0) {
                return Err(Error::InvalidInput("atom at the origin".into()));
            }
            if a.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("atom location must be finite".into()));
            }
        }
        for seg in &self.densities {
            seg.validate(dim)?;
        }
        Ok(())
    }

    /// Support regions: one atom cloud for the atomic part, then one per segment.
    pub fn support_regions(&self) -> Vec<SupportRegion> {
        let mut out = Vec::new();
        if !self.atoms.is_empty() {
            out.push(SupportRegion::AtomCloud {
                vertices: self.atoms.iter().map(|a| a.x.clone()).collect(),
            });
        }
        out.extend(self.densities.iter().map(|s| s.support.clone()));
        out
    }

    /// `inf { p⊤x : x ∈ supp ν }`; `+inf` for the zero measure.
    pub fn support_inf_linear(&self, p: &[f64]) -> f64 {
        self.support_regions()
            .iter()
            .map(|r| r.inf_linear(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Extreme points and recession directions of the whole support.
    pub fn support_geometry(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let regions = self.support_regions();
        let verts = regions.iter().flat_map(|r| r.vertices()).collect();
        let dirs = regions.iter().flat_map(|r| r.recession_directions()).collect();
        (verts, dirs)
    }

    /// Scales every atom rate and density by `k > 0`.
    pub fn scaled(&self, k: f64) -> JumpMeasure {
        JumpMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.x.clone(), a.rate * k))
                .collect(),
            densities: self
                .densities
                .iter()
                .map(|s| DensitySegment {
                    family: scale_family(&s.family, k),
                    ..s.clone()
                })
                .collect(),
        }
    }
}

fn scale_family(f: &Family, k: f64) -> Family {
    match f {
        Family::PolynomialOnInterval { coeffs } => Family::PolynomialOnInterval {
            coeffs: coeffs.iter().map(|c| c * k).collect(),
        },
        Family::PowerLawTail { scale, exponent } => Family::PowerLawTail {
            scale: scale * k,
            exponent: *exponent,
        },
        Family::PowerLogTail {
            scale,
            log_exponent,
        } => Family::PowerLogTail {
            scale: scale * k,
            log_exponent: *log_exponent,
        },
        Family::ExponentialTilt {
            eta,
            quadratic_tail,
            base,
        } => Family::ExponentialTilt {
            eta: eta.clone(),
            quadratic_tail: *quadratic_tail,
            base: Box::new(scale_family(base, k)),
        },
        Family::TailDamped { power, base } => Family::TailDamped {
            power: *power,
            base: Box::new(scale_family(base, k)),
        },
        Family::Product { factors } => {
            let mut factors = factors.clone();
            if let Some(first) = factors.first_mut() {
                *first = scale_family(first, k);
            }
            Family::Product { factors }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_1d() -> DensitySegment {
        DensitySegment::new(
            Family::PolynomialOnInterval {
                coeffs: vec![1.0, 1.0],
            },
            SupportRegion::interval(-1.0, 1.0),
        )
    }

    #[test]
    fn polynomial_density_values() {
        let seg = poly_1d();
        assert!((seg.family.density_at(0.5, &[0.5]) - 1.5).abs() < 1e-15);
        assert_eq!(seg.family.density_at(-1.0, &[-1.0]), 0.0);
    }

    #[test]
    fn tail_table() {
        let log2 = Family::PowerLogTail {
            scale: 1.0,
            log_exponent: 2.0,
        };
        let t = log2.tail_law(&[1.0]);
        // total mass finite, log-moment infinite
        assert!(t.integrable_against(&TailLaw::FLAT));
        assert!(!t.integrable_against(&TailLaw {
            kappa: 0.0,
            power: 0.0,
            log_power: 1.0
        }));
        let tilted = Family::ExponentialTilt {
            eta: vec![0.0],
            quadratic_tail: true,
            base: Box::new(Family::PowerLawTail {
                scale: 1.0,
                exponent: 0.5,
            }),
        };
        assert!(tilted.tail_law(&[1.0]).integrable_against(&TailLaw {
            kappa: 50.0,
            power: -3.0,
            log_power: 0.0
        }));
    }

    #[test]
    fn rejects_non_levy_densities() {
        let seg = DensitySegment::new(
            Family::PowerLawTail {
                scale: 1.0,
                exponent: 3.5,
            },
            SupportRegion::interval(0.0, 1.0),
        );
        assert!(seg.validate(1).is_err());
        let heavy = DensitySegment::new(
            Family::PowerLawTail {
                scale: 1.0,
                exponent: 0.5,
            },
            SupportRegion::interval(1.0, f64::INFINITY),
        );
        assert!(heavy.validate(1).is_err());
        assert!(JumpMeasure::from_atoms(vec![Atom::new(vec![0.0], 1.0)])
            .validate(1)
            .is_err());
        assert!(JumpMeasure::from_atoms(vec![Atom::new(vec![1.0], -1.0)])
            .validate(1)
            .is_err());
    }

    #[test]
    fn support_infimum() {
        let nu = JumpMeasure::zero().with_density(poly_1d());
        assert_eq!(nu.support_inf_linear(&[1.0]), -1.0);
        assert_eq!(nu.support_inf_linear(&[-2.0]), -2.0);
        let tail = JumpMeasure::zero().with_density(DensitySegment::new(
            Family::PowerLawTail {
                scale: 1.0,
                exponent: 3.0,
            },
            SupportRegion::interval(1.0, f64::INFINITY),
        ));
        assert_eq!(tail.support_inf_linear(&[-1.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn segment_json_shape() {
        let json = r#"{"family":"polynomialOnInterval","params":{"coeffs":[1,1]},
            "support":{"interval":{"lo":-1,"hi":1}}}"#;
        let seg: DensitySegment = serde_json::from_str(json).unwrap();
        assert_eq!(seg, poly_1d());
        let back = serde_json::to_string(&seg).unwrap();
        let again: DensitySegment = serde_json::from_str(&back).unwrap();
        assert_eq!(again, seg);
        let bad = r#"{"family":"polynomialOnInterval","params":{"coeffs":[1]},"support":{"interval":{"lo":0,"hi":1}},"extra":1}"#;
        assert!(serde_json::from_str::<DensitySegment>(bad).is_err());
    }
}
