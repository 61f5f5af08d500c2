//! Monte Carlo paths of `X`, wealth processes and statistical verdicts.
//!
//! Paths come from `ChaCha8Rng::seed_from_u64(seed)` with the stream set to
//! the path index, so any subset of paths can be regenerated in any order.

mod jumps;
pub mod stats;
pub mod wealth;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecConfig};
use crate::levy::integrate::{integrate_shaped, Integrand};
use crate::levy::triplet::small;
use crate::levy::{JumpMeasure, LevyTriplet, TailLaw};
use crate::linalg::{norm, psd_factor};
use crate::quadrature::QuadConfig;
use jumps::SegmentSampler;

pub use stats::*;
pub use wealth::{wealth_path, Policy, WealthPath};

pub const GENERATOR: &str = "ChaCha8Rng(seed_from_u64(seed), stream = path index)";
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Simulation-ready form of a triplet.
#[derive(Debug, Clone)]
pub struct SimModel {
    pub triplet: LevyTriplet,
    pub epsilon: f64,
    /// `b − ∫x 1_{ε<|x|≤1} ν(dx)`: drift once jumps above `ε` are added raw.
    pub drift: Vec<f64>,
    /// `L` with `L L⊤ = c`.
    pub sigma: Vec<Vec<f64>>,
    atom_rates: Vec<f64>,
    segments: Vec<SegmentSampler>,
    total_rate: f64,
}

impl SimModel {
    pub fn new(t: &LevyTriplet, epsilon: f64) -> Result<Self> {
        t.validate()?;
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidInput(format!("truncation ε must lie in (0, 1], got {epsilon}")));
        }
        let d = t.dim;
        let sigma = psd_factor(&t.c, 1e-10).ok_or(Error::CholeskyFailure)?;
        let mut drift = t.b.clone();
        for a in &t.nu.atoms {
            for i in 0..d {
                drift[i] -= a.rate * a.x[i] * small(&a.x);
            }
        }
        for seg in &t.nu.densities {
            let single = JumpMeasure {
                atoms: Vec::new(),
                densities: vec![seg.clone()],
            };
            for (i, di) in drift.iter_mut().enumerate() {
                let f = |x: &[f64]| {
                    let r = norm(x);
                    if r > epsilon && r <= 1.0 {
                        x[i]
                    } else {
                        0.0
                    }
                };
                let v = integrate_shaped(
                    &single,
                    &Integrand {
                        f: &f,
                        origin_order: 8.0,
                        growth: &|_| TailLaw::FLAT,
                        planes: &[],
                        beyond: None,
                        exp_term: None,
                        wave: None,
                    },
                    &QuadConfig::default(),
                )?;
                *di -= v
                    .finite()
                    .ok_or_else(|| Error::UndecidableTail("compensator of the mid-size jumps".into()))?;
            }
        }
        let segments = t
            .nu
            .densities
            .iter()
            .map(|s| SegmentSampler::new(s, epsilon))
            .collect::<Result<Vec<_>>>()?;
        let atom_rates: Vec<f64> = t.nu.atoms.iter().map(|a| a.rate).collect();
        let total_rate = atom_rates.iter().sum::<f64>() + segments.iter().map(SegmentSampler::mass).sum::<f64>();
        if !total_rate.is_finite() {
            return Err(Error::InvalidInput("jump rate above ε is infinite".into()));
        }
        Ok(SimModel {
            triplet: t.clone(),
            epsilon,
            drift,
            sigma,
            atom_rates,
            segments,
            total_rate,
        })
    }

    pub fn dim(&self) -> usize {
        self.triplet.dim
    }

    /// Intensity of the simulated jumps.
    pub fn jump_rate(&self) -> f64 {
        self.total_rate
    }

    /// Stream-seeded generator for one path.
    pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }

    fn draw_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut u = rng.random::<f64>() * self.total_rate;
        for (a, r) in self.triplet.nu.atoms.iter().zip(&self.atom_rates) {
            if u < *r {
                return a.x.clone();
            }
            u -= r;
        }
        for s in &self.segments {
            if u < s.mass() {
                return s.sample(rng);
            }
            u -= s.mass();
        }
        // Rounding at the top end.
        match self.segments.last() {
            Some(s) => s.sample(rng),
            None => self.triplet.nu.atoms.last().expect("positive rate").x.clone(),
        }
    }

    /// Jumps on `(t0, t0 + len]`, sorted by time.
    fn draw_jumps<R: Rng + ?Sized>(&self, rng: &mut R, t0: f64, len: f64) -> Vec<(f64, Vec<f64>)> {
        let lam = self.total_rate * len;
        if lam <= 0.0 {
            return Vec::new();
        }
        let n = Poisson::new(lam).map(|p| p.sample(rng) as usize).unwrap_or(0);
        let mut times: Vec<f64> = (0..n).map(|_| t0 + len * (1.0 - rng.random::<f64>())).collect();
        times.sort_by(f64::total_cmp);
        times.into_iter().map(|t| (t, self.draw_jump(rng))).collect()
    }

    /// Drift plus Gaussian increment over `dt`.
    fn continuous<R: Rng + ?Sized>(&self, rng: &mut R, dt: f64) -> Vec<f64> {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let sq = dt.sqrt();
        (0..d)
            .map(|i| self.drift[i] * dt + sq * (0..d).map(|k| self.sigma[i][k] * z[k]).sum::<f64>())
            .collect()
    }

    /// Appends the piece `(t0, t0+len]` on `n_steps` uniform steps, with the
    /// extra grid points `marks` and every jump time inserted.
    fn extend<R: Rng + ?Sized>(&self, rng: &mut R, path: &mut SamplePath, len: f64, n_steps: usize, marks: &[f64]) {
        let t0 = *path.times.last().expect("path starts at 0");
        let mut grid: Vec<f64> = (1..=n_steps).map(|k| t0 + len * k as f64 / n_steps as f64).collect();
        grid.extend(marks.iter().copied().filter(|m| *m > t0 && *m < t0 + len));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let jumps = self.draw_jumps(rng, t0, len);
        let mut ji = 0;
        let mut last = t0;
        for g in grid {
            while ji < jumps.len() && jumps[ji].0 <= g {
                let (tj, ref x) = jumps[ji];
                if tj > last {
                    path.continuous.push(self.continuous(rng, tj - last));
                    path.times.push(tj);
                    last = tj;
                }
                path.jumps.push(JumpEvent {
                    step: path.times.len() - 1,
                    time: tj,
                    x: x.clone(),
                });
                ji += 1;
            }
            if g > last {
                path.continuous.push(self.continuous(rng, g - last));
                path.times.push(g);
                last = g;
            }
        }
    }

    /// One path on `[0, horizon]`.
    pub fn path(&self, horizon: f64, n_steps: usize, seed: u64, stream: u64, marks: &[f64]) -> SamplePath {
        let mut rng = Self::rng(seed, stream);
        let mut p = SamplePath::start(stream, self.dim());
        self.extend(&mut rng, &mut p, horizon, n_steps.max(1), marks);
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JumpEvent {
    /// Index into `times` of the jump instant.
    pub step: usize,
    pub time: f64,
    pub x: Vec<f64>,
}

/// `times[0] = 0`; `continuous[k]` is the drift + Gaussian increment over
/// `(times[k], times[k+1]]`; jumps happen at grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SamplePath {
    pub stream: u64,
    pub times: Vec<f64>,
    pub continuous: Vec<Vec<f64>>,
    pub jumps: Vec<JumpEvent>,
}

impl SamplePath {
    fn start(stream: u64, _d: usize) -> Self {
        SamplePath {
            stream,
            times: vec![0.0],
            continuous: Vec::new(),
            jumps: Vec::new(),
        }
    }

    /// `X` at every grid time.
    pub fn values(&self) -> Vec<Vec<f64>> {
        let d = self.continuous.first().map_or_else(
            || self.jumps.first().map_or(0, |j| j.x.len()),
            Vec::len,
        );
        let mut out = vec![vec![0.0; d]];
        let mut ji = 0;
        for (k, inc) in self.continuous.iter().enumerate() {
            let mut x: Vec<f64> = out[k].iter().zip(inc).map(|(a, b)| a + b).collect();
            while ji < self.jumps.len() && self.jumps[ji].step == k + 1 {
                for (xi, j) in x.iter_mut().zip(&self.jumps[ji].x) {
                    *xi += j;
                }
                ji += 1;
            }
            out.push(x);
        }
        out
    }

    pub fn terminal(&self) -> Vec<f64> {
        self.values().pop().unwrap_or_default()
    }

    /// Index of the grid point at time `t` (exact match).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|s| (*s - t).abs() <= 1e-12 * (1.0 + t.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PathBundle {
    pub horizon: f64,
    pub n_steps: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub generator: String,
    pub paths: Vec<SamplePath>,
}

/// `n_paths` paths of `X` on `[0, horizon]`.
pub fn sample_paths(
    t: &LevyTriplet,
    horizon: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
    epsilon: f64,
    exec: ExecConfig,
) -> Result<PathBundle> {
    check_horizon(horizon)?;
    let model = SimModel::new(t, epsilon)?;
    let paths = map_indexed(n_paths, exec, |k| model.path(horizon, n_steps, seed, k as u64, &[]));
    Ok(PathBundle {
        horizon,
        n_steps,
        seed,
        epsilon,
        generator: GENERATOR.into(),
        paths,
    })
}

fn check_horizon(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("simulation horizon must be positive and finite, got {h}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{char_exponent, Atom, DensitySegment, Family, SupportRegion};

    #[test]
    fn zero_triplet_gives_zero_paths() {
        let t = LevyTriplet::gaussian(vec![0.0], vec![vec![0.0]]).unwrap();
        let b = sample_paths(&t, 1.0, 8, 10, 1, DEFAULT_EPSILON, ExecConfig::default()).unwrap();
        for p in &b.paths {
            assert!(p.values().iter().all(|x| x[0] == 0.0));
        }
    }

    #[test]
    fn poisson_mean() {
        let lambda = 2.0;
        let t = LevyTriplet::new(
            vec![lambda],
            vec![vec![0.0]],
            JumpMeasure::from_atoms(vec![Atom::new(vec![1.0], lambda)]),
        )
        .unwrap();
        // b = λ cancels the compensator of the unit atom: X = N.
        let n = 20_000;
        let b = sample_paths(&t, 1.0, 4, n, 5, DEFAULT_EPSILON, ExecConfig::default()).unwrap();
        let mean = b.paths.iter().map(|p| p.terminal()[0]).sum::<f64>() / n as f64;
        assert!((mean - lambda).abs() < 3.0 * (lambda / n as f64).sqrt(), "{mean}");
        for p in &b.paths {
            let x = p.terminal()[0];
            assert!((x - x.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_characteristic_function() {
        let nu = JumpMeasure::from_atoms(vec![Atom::new(vec![-0.3], 1.5)]).with_density(DensitySegment::new(
            Family::PolynomialOnInterval { coeffs: vec![1.0, 1.0] },
            SupportRegion::interval(-1.0, 1.0),
        ));
        let t = LevyTriplet::new(vec![0.2], vec![vec![0.09]], nu).unwrap();
        let n = 40_000;
        let b = sample_paths(&t, 1.0, 2, n, 11, DEFAULT_EPSILON, ExecConfig::default()).unwrap();
        for u in [0.5, 1.0, 3.0] {
            let (mut re, mut im) = (0.0, 0.0);
            for p in &b.paths {
                let x = p.terminal()[0];
                re += (u * x).cos();
                im += (u * x).sin();
            }
            let want = char_exponent(&t, &[u]).unwrap().exp();
            let got = num_complex::Complex64::new(re / n as f64, im / n as f64);
            assert!((got - want).norm() < 4.0 / (n as f64).sqrt(), "u={u}: {got} vs {want}");
        }
    }

    #[test]
    fn reproducible_and_order_independent() {
        let t = LevyTriplet::new(
            vec![0.1],
            vec![vec![0.04]],
            JumpMeasure::from_atoms(vec![Atom::new(vec![0.5], 1.0)]),
        )
        .unwrap();
        let a = sample_paths(&t, 1.0, 4, 50, 9, DEFAULT_EPSILON, ExecConfig::sequential()).unwrap();
        let b = sample_paths(&t, 1.0, 4, 50, 9, DEFAULT_EPSILON, ExecConfig::parallel(Some(3))).unwrap();
        assert_eq!(a, b);
        let m = SimModel::new(&t, DEFAULT_EPSILON).unwrap();
        assert_eq!(m.path(1.0, 4, 9, 17, &[]), a.paths[17]);
    }

    #[test]
    fn jumps_sit_on_the_grid() {
        let t = LevyTriplet::new(
            vec![0.0],
            vec![vec![0.01]],
            JumpMeasure::from_atoms(vec![Atom::new(vec![0.5], 5.0)]),
        )
        .unwrap();
        let m = SimModel::new(&t, DEFAULT_EPSILON).unwrap();
        let p = m.path(2.0, 3, 1, 0, &[0.5]);
        assert!(p.index_of(0.5).is_some());
        assert!(p.times.windows(2).all(|w| w[0] < w[1]));
        for j in &p.jumps {
            assert_eq!(p.times[j.step], j.time);
        }
        assert_eq!(*p.times.last().unwrap(), 2.0);
    }

    #[test]
    fn non_psd_covariance_is_rejected() {
        let t = LevyTriplet {
            dim: 1,
            b: vec![0.0],
            c: vec![vec![-1.0]],
            nu: JumpMeasure::zero(),
        };
        assert!(SimModel::new(&t, DEFAULT_EPSILON).is_err());
    }
}
