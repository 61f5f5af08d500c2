//! Lévy triplets and the closed-form functionals built on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrate::{damp_family, integrate_shaped, tails_integrable, Integrand, Wave};
use super::measure::{Atom, DensitySegment, JumpMeasure, TailLaw};
use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::linalg::{dot, norm, quad_form, sym_eigen};
use crate::quadrature::QuadConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LevyTriplet {
    #[serde(rename = "dimension")]
    pub dim: usize,
    pub b: Vec<f64>,
    pub c: Vec<Vec<f64>>,
    #[serde(default)]
    pub nu: JumpMeasure,
}

/// Indicator of the truncation region `|x| ≤ 1`.
#[inline]
pub fn small(x: &[f64]) -> f64 {
    if dot(x, x) <= 1.0 {
        1.0
    } else {
        0.0
    }
}

/// Growth of `|x|` along a tail velocity: linear unless the velocity is zero.
pub(crate) fn linear_growth(w: &[f64]) -> impl Fn(&[f64]) -> TailLaw + '_ {
    move |dir: &[f64]| TailLaw {
        kappa: 0.0,
        power: if dot(w, dir).abs() > 0.0 { 1.0 } else { 0.0 },
        log_power: 0.0,
    }
}

impl LevyTriplet {
    pub fn new(b: Vec<f64>, c: Vec<Vec<f64>>, nu: JumpMeasure) -> Result<Self> {
        let t = LevyTriplet { dim: b.len(), b, c, nu };
        t.validate()?;
        Ok(t)
    }

    /// Brownian motion with drift and no jumps.
    pub fn gaussian(b: Vec<f64>, c: Vec<Vec<f64>>) -> Result<Self> {
        LevyTriplet::new(b, c, JumpMeasure::zero())
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if self.b.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.b.len(),
            });
        }
        if self.c.len() != d || self.c.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput(format!("c must be {d}x{d}")));
        }
        if self.b.iter().chain(self.c.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("b and c must be finite".into()));
        }
        let scale = self.c.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..d {
            for j in 0..i {
                if (self.c[i][j] - self.c[j][i]).abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::InvalidInput("c must be symmetric".into()));
                }
            }
        }
        let (vals, _) = sym_eigen(&self.c);
        if vals.iter().any(|&l| l < -1e-12 * scale) {
            return Err(Error::InvalidInput("c must be positive semidefinite".into()));
        }
        self.nu.validate(d)
    }

    /// The triplet of `X_{kt}` as a process in `t`.
    pub fn time_scaled(&self, k: f64) -> LevyTriplet {
        LevyTriplet {
            dim: self.dim,
            b: self.b.iter().map(|v| v * k).collect(),
            c: self
                .c
                .iter()
                .map(|r| r.iter().map(|v| v * k).collect())
                .collect(),
            nu: self.nu.scaled(k),
        }
    }

    /// Triplet of the sum of two independent Lévy processes.
    pub fn sum(&self, other: &LevyTriplet) -> Result<LevyTriplet> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut nu = self.nu.clone();
        nu.atoms.extend(other.nu.atoms.iter().cloned());
        nu.densities.extend(other.nu.densities.iter().cloned());
        Ok(LevyTriplet {
            dim: self.dim,
            b: self.b.iter().zip(&other.b).map(|(x, y)| x + y).collect(),
            c: self
                .c
                .iter()
                .zip(&other.c)
                .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
                .collect(),
            nu,
        })
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }
}

/// `φ(u) = i u⊤b − u⊤cu/2 + ∫(e^{iu⊤x} − 1 − i u⊤x 1_{|x|≤1}) ν(dx)`.
pub fn char_exponent(t: &LevyTriplet, u: &[f64]) -> Result<Complex64> {
    char_exponent_with(t, u, &QuadConfig::default())
}

pub fn char_exponent_with(t: &LevyTriplet, u: &[f64], cfg: &QuadConfig) -> Result<Complex64> {
    t.check_dim(u)?;
    let re_f = |_: &[f64]| -1.0;
    let im_f = |x: &[f64]| -dot(u, x) * small(x);
    let flat = |_: &[f64]| TailLaw::FLAT;
    let part = |f: &dyn Fn(&[f64]) -> f64, sine: bool| {
        integrate_shaped(
            &t.nu,
            &Integrand {
                f,
                origin_order: 2.0,
                growth: &flat,
                planes: &[],
                beyond: None,
                exp_term: None,
                wave: Some(Wave { freq: u, sine }),
            },
            cfg,
        )
    };
    let re = part(&re_f, false)?;
    let im = part(&im_f, true)?;
    let (re, im) = match (re.finite(), im.finite()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::QuadratureDivergence {
                region: "characteristic exponent".into(),
                estimate: f64::NAN,
                error: f64::INFINITY,
            })
        }
    };
    Ok(Complex64::new(
        -0.5 * quad_form(&t.c, u, u) + re,
        dot(u, &t.b) + im,
    ))
}

/// Mean rate `b + ∫ x 1_{|x|>1} ν(dx)`, or the first segment whose tail
/// has no first moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MeanRate {
    Finite(Vec<f64>),
    #[serde(rename_all = "camelCase")]
    Divergent { segment: usize, direction: Vec<f64> },
}

impl MeanRate {
    pub fn finite(&self) -> Option<&[f64]> {
        match self {
            MeanRate::Finite(m) => Some(m),
            MeanRate::Divergent { .. } => None,
        }
    }
}

pub fn mean_rate(t: &LevyTriplet) -> Result<MeanRate> {
    let one = |_: &[f64]| TailLaw {
        kappa: 0.0,
        power: 1.0,
        log_power: 0.0,
    };
    for (k, seg) in t.nu.densities.iter().enumerate() {
        for dir in seg.tails() {
            if !seg.family.tail_law(&dir).integrable_against(&one(&dir)) {
                return Ok(MeanRate::Divergent {
                    segment: k,
                    direction: dir,
                });
            }
        }
    }
    let mut m = t.b.clone();
    for i in 0..t.dim {
        let f = |x: &[f64]| x[i] * (1.0 - small(x));
        let ei = crate::linalg::unit(t.dim, i);
        let growth = linear_growth(&ei);
        let v = integrate_shaped(
            &t.nu,
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
        m[i] += v.finite().ok_or_else(|| {
            Error::UndecidableTail("first moment tail classified finite but integrated infinite".into())
        })?;
    }
    Ok(MeanRate::Finite(m))
}

/// `log E e^{X_1} = b + c/2 + ∫(eˣ − 1 − x 1_{|x|≤1}) ν(dx)` for one-dimensional triplets.
pub fn log_exp_moment(t: &LevyTriplet) -> Result<ExtReal> {
    if t.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: t.dim,
        });
    }
    let f = |x: &[f64]| -1.0 - x[0] * small(x);
    let h = |x: &[f64]| x[0];
    let growth = |dir: &[f64]| {
        if dir[0] > 0.0 {
            TailLaw {
                kappa: dir[0],
                power: 0.0,
                log_power: 0.0,
            }
        } else {
            TailLaw {
                kappa: 0.0,
                power: 0.0,
                log_power: 0.0,
            }
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
            exp_term: Some(&h),
            wave: None,
        },
        &QuadConfig::default(),
    )?;
    Ok(v.shift(t.b[0] + 0.5 * t.c[0][0]))
}

/// Whether `∫ log(1+|x|) 1_{|x|>1} ν(dx) < ∞`, decided from the tail table.
pub fn integrates_log(nu: &JumpMeasure) -> Result<bool> {
    Ok(tails_integrable(nu, &|_| TailLaw {
        kappa: 0.0,
        power: 0.0,
        log_power: 1.0,
    }))
}

/// `ν_n(dx) = f_n(x) ν(dx)` with `f_n(x) = |x|^{-1/n}` on `|x| > 1`.
pub fn approximate(nu: &JumpMeasure, n: u32) -> JumpMeasure {
    assert!(n >= 1, "approximation index starts at 1");
    JumpMeasure {
        atoms: nu
            .atoms
            .iter()
            .map(|a| Atom::new(a.x.clone(), a.rate * super::integrate::approximation_factor(&a.x, n)))
            .collect(),
        densities: nu
            .densities
            .iter()
            .map(|s| DensitySegment {
                family: damp_family(&s.family, n),
                ..s.clone()
            })
            .collect(),
    }
}

/// Total jump intensity `ν(ℝᵈ)`, `+∞` for infinite activity.
pub fn total_mass(nu: &JumpMeasure) -> Result<ExtReal> {
    let zero_order = |_: &[f64]| TailLaw::FLAT;
    integrate_shaped(
        nu,
        &Integrand {
            f: &|_| 1.0,
            origin_order: 0.0,
            growth: &zero_order,
            planes: &[],
            beyond: None,
            exp_term: None,
            wave: None,
        },
        &QuadConfig::default(),
    )
}

/// Largest jump size norm in the support (`∞` when unbounded).
pub fn support_radius(nu: &JumpMeasure) -> f64 {
    let (verts, dirs) = nu.support_geometry();
    if !dirs.is_empty() {
        return f64::INFINITY;
    }
    verts.iter().map(|v| norm(v)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::measure::{Family, SupportRegion};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// `∫_0^u g(t) dt` by composite Simpson.
    fn simpson(g: impl Fn(f64) -> f64, u: f64) -> f64 {
        let n = 20_000;
        let h = u / n as f64;
        let mut acc = g(0.0) + g(u);
        for k in 1..n {
            acc += g(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn oscillating_power_tail_matches_sine_and_cosine_integrals() {
        // ν(dx) = x^{-2} dx on (1, ∞); by parts
        // ∫ (cos ux - 1) dν = cos u - u(π/2 - Si u) - 1 and ∫ sin ux dν = sin u - u Ci u.
        let t = LevyTriplet::new(
            vec![0.0],
            vec![vec![0.0]],
            JumpMeasure::zero().with_density(DensitySegment::new(
                Family::PowerLawTail {
                    scale: 1.0,
                    exponent: 2.0,
                },
                SupportRegion::interval(1.0, f64::INFINITY),
            )),
        )
        .unwrap();
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        for u in [-2.5, 0.3, 1.0, 7.0] {
            let a = f64::abs(u);
            let si = simpson(|x| if x == 0.0 { 1.0 } else { x.sin() / x }, a);
            let cin = simpson(|x| if x == 0.0 { 0.0 } else { (x.cos() - 1.0) / x }, a);
            let ci = EULER_GAMMA + a.ln() + cin;
            let re = a.cos() - a * (std::f64::consts::FRAC_PI_2 - si) - 1.0;
            let im = u.signum() * (a.sin() - a * ci);
            let z = char_exponent(&t, &[u]).unwrap();
            assert_abs_diff_eq!(z.re, re, epsilon = 1e-8);
            assert_abs_diff_eq!(z.im, im, epsilon = 1e-8);
        }
    }

    fn poly_1d() -> LevyTriplet {
        LevyTriplet::new(
            vec![1.0],
            vec![vec![0.0]],
            JumpMeasure::zero().with_density(DensitySegment::new(
                Family::PolynomialOnInterval {
                    coeffs: vec![1.0, 1.0],
                },
                SupportRegion::interval(-1.0, 1.0),
            )),
        )
        .unwrap()
    }

    fn atom_market(x: f64, rate: f64) -> LevyTriplet {
        LevyTriplet::new(
            vec![0.0],
            vec![vec![0.0]],
            JumpMeasure::from_atoms(vec![Atom::new(vec![x], rate)]),
        )
        .unwrap()
    }

    fn inverse_square_tail() -> LevyTriplet {
        LevyTriplet::new(
            vec![0.0],
            vec![vec![0.0]],
            JumpMeasure::zero().with_density(DensitySegment::new(
                Family::PowerLawTail {
                    scale: 1.0,
                    exponent: 2.0,
                },
                SupportRegion::interval(1.0, f64::INFINITY),
            )),
        )
        .unwrap()
    }

    #[test]
    fn char_exponent_basics() {
        let t = poly_1d();
        assert_eq!(char_exponent(&t, &[0.0]).unwrap(), Complex64::new(0.0, 0.0));
        let bm = LevyTriplet::gaussian(vec![0.0], vec![vec![1.0]]).unwrap();
        assert_abs_diff_eq!(char_exponent(&bm, &[1.0]).unwrap().re, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn poisson_char_exponent_matches_series() {
        // rate-2 Poisson with unit jumps, u = π: E e^{iπN} summed directly.
        let t = atom_market(1.0, 2.0);
        let phi = char_exponent(&t, &[std::f64::consts::PI]).unwrap();
        let mut cf = Complex64::new(0.0, 0.0);
        let mut p = (-2.0f64).exp();
        for k in 0..80 {
            cf += Complex64::from_polar(p, std::f64::consts::PI * k as f64);
            p *= 2.0 / (k + 1) as f64;
        }
        // b = 0 with a jump at |x| = 1 inside the truncation region
        let expected = cf.ln() - Complex64::new(0.0, -2.0 * std::f64::consts::PI);
        assert_abs_diff_eq!(phi.re, -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(phi.re, expected.re, epsilon = 1e-9);
    }

    #[test]
    fn mean_rate_cases() {
        let t = LevyTriplet::gaussian(vec![1.0, -2.0], vec![vec![0.0; 2]; 2]).unwrap();
        assert_eq!(mean_rate(&t).unwrap(), MeanRate::Finite(vec![1.0, -2.0]));
        assert_eq!(mean_rate(&atom_market(2.0, 3.0)).unwrap(), MeanRate::Finite(vec![6.0]));
        assert!(matches!(
            mean_rate(&inverse_square_tail()).unwrap(),
            MeanRate::Divergent { segment: 0, .. }
        ));
    }

    #[test]
    fn log_exp_moment_cases() {
        let mart = LevyTriplet::gaussian(vec![-0.5], vec![vec![1.0]]).unwrap();
        assert_abs_diff_eq!(log_exp_moment(&mart).unwrap().to_f64(), 0.0, epsilon = 1e-15);
        // Poisson(1): log Σ e^k e^{-1}/k! = e − 1, minus the truncation term 1·1 with b = 0
        let t = atom_market(1.0, 1.0);
        let series: f64 = {
            let mut s = 0.0;
            let mut term = (-1.0f64).exp();
            for k in 0..60 {
                s += term * (k as f64).exp();
                term /= (k + 1) as f64;
            }
            s.ln()
        };
        let v = log_exp_moment(&t).unwrap().to_f64();
        assert_abs_diff_eq!(v + 1.0, series, epsilon = 1e-9);
        assert_eq!(log_exp_moment(&inverse_square_tail()).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn log_integrability() {
        assert!(integrates_log(&poly_1d().nu).unwrap());
        let q = |q: f64| {
            JumpMeasure::zero().with_density(DensitySegment::new(
                Family::PowerLogTail {
                    scale: 1.0,
                    log_exponent: q,
                },
                SupportRegion::interval(1.0, f64::INFINITY),
            ))
        };
        assert!(!integrates_log(&q(1.0)).unwrap());
        assert!(!integrates_log(&q(2.0)).unwrap());
        assert!(integrates_log(&q(2.5)).unwrap());
        assert!(integrates_log(&approximate(&q(2.0), 1)).unwrap());
    }

    #[test]
    fn approximation_factors() {
        let nu = JumpMeasure::from_atoms(vec![Atom::new(vec![std::f64::consts::E], 1.0), Atom::new(vec![0.5], 1.0)]);
        let a = approximate(&nu, 1);
        assert_abs_diff_eq!(a.atoms[0].rate, (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(a.atoms[1].rate, 1.0);
        let expected = [0.1, 0.31622776601683794, 0.5623413251903491, 0.7498942093324559];
        for (n, e) in [1, 2, 4, 8].iter().zip(expected) {
            let a = approximate(&JumpMeasure::from_atoms(vec![Atom::new(vec![10.0], 1.0)]), *n);
            assert_abs_diff_eq!(a.atoms[0].rate, e, epsilon = 1e-15);
        }
    }

    fn arb_atoms() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-3.0..3.0f64, 0.1..2.0f64), 0..4)
            .prop_map(|v| v.into_iter().filter(|(x, _)| x.abs() > 1e-3).collect())
    }

    fn triplet_from(b: f64, c: f64, atoms: &[(f64, f64)]) -> LevyTriplet {
        LevyTriplet::new(
            vec![b],
            vec![vec![c]],
            JumpMeasure::from_atoms(atoms.iter().map(|(x, r)| Atom::new(vec![*x], *r)).collect()),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn hermitian_symmetry(b in -1.0..1.0f64, c in 0.0..1.0f64, atoms in arb_atoms(), u in -5.0..5.0f64) {
            let t = triplet_from(b, c, &atoms).sum(&poly_1d().time_scaled(0.5)).unwrap();
            let p = char_exponent(&t, &[u]).unwrap();
            let m = char_exponent(&t, &[-u]).unwrap();
            prop_assert!((p - m.conj()).norm() < 1e-9);
        }

        #[test]
        fn additivity(b1 in -1.0..1.0f64, b2 in -1.0..1.0f64, a1 in arb_atoms(), a2 in arb_atoms(), u in -4.0..4.0f64) {
            let t1 = triplet_from(b1, 0.3, &a1);
            let t2 = triplet_from(b2, 0.1, &a2);
            let s = t1.sum(&t2).unwrap();
            let lhs = char_exponent(&s, &[u]).unwrap();
            let rhs = char_exponent(&t1, &[u]).unwrap() + char_exponent(&t2, &[u]).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-9);
        }

        #[test]
        fn exp_moment_matches_compound_poisson_series(atoms in arb_atoms()) {
            // E e^{X_1} for compound Poisson = exp(Σ λ(e^x − 1)), compare the log.
            let t = triplet_from(0.0, 0.0, &atoms);
            let direct: f64 = atoms.iter().map(|(x, r)| r * (x.exp() - 1.0 - x * if x.abs() <= 1.0 { 1.0 } else { 0.0 })).sum();
            let v = log_exp_moment(&t).unwrap().to_f64();
            prop_assert!((v - direct).abs() < 1e-9);
        }

        #[test]
        fn approximation_never_increases(x in -50.0..50.0f64, n in 1u32..64) {
            let nu = JumpMeasure::from_atoms(vec![Atom::new(vec![x + 0.01], 1.0)]);
            let a = approximate(&nu, n);
            let b = approximate(&nu, n + 1);
            prop_assert!(a.atoms[0].rate <= 1.0);
            prop_assert!(a.atoms[0].rate <= b.atoms[0].rate + 1e-15);
        }
    }
}
