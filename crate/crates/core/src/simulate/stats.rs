//! 3-standard-error verdicts and the demos built on simulated wealth.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{check_horizon, wealth_path, Policy, SamplePath, SimModel, DEFAULT_EPSILON, GENERATOR};
use crate::arbitrage::find_immediate_arbitrage;
use crate::constraints::{null_space, ConstraintSet};
use crate::error::{Error, Result};
use crate::esscher::{is_supermartingale_measure, EsscherParams};
use crate::exec::{map_indexed, ExecConfig};
use crate::levy::LevyTriplet;
use crate::linalg::dot;
use crate::numeraire::{rel_rate, solve_numeraire};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum StatVerdict {
    Consistent,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Checkpoint {
    pub time: f64,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulationReport {
    pub statistic: String,
    pub estimate: f64,
    pub std_error: f64,
    /// Bound the estimate is compared with.
    pub null_bound: f64,
    pub verdict: StatVerdict,
    pub sample_size: usize,
    pub seed: u64,
    pub generator: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<Checkpoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<(String, f64)>,
}

impl SimulationReport {
    fn new(statistic: &str, estimate: f64, std_error: f64, null_bound: f64, verdict: StatVerdict, n: usize, seed: u64) -> Self {
        SimulationReport {
            statistic: statistic.into(),
            estimate,
            std_error,
            null_bound,
            verdict,
            sample_size: n,
            seed,
            generator: GENERATOR.into(),
            checkpoints: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn consistent(&self) -> bool {
        self.verdict == StatVerdict::Consistent
    }
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Simulation knobs shared by the tests and demos.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub n_steps: usize,
    pub exec: ExecConfig,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            horizon: 1.0,
            n_paths: 100_000,
            seed: 1,
            epsilon: DEFAULT_EPSILON,
            n_steps: 4,
            exec: ExecConfig::default(),
        }
    }
}

/// `E[ratio_t] ≤ 1` at every checkpoint: violated when some mean exceeds 1
/// by more than 3 standard errors. `samples[k]` holds the ratios at
/// `times[k]`; the last checkpoint is reported as the estimate.
pub fn supermartingale_test(samples: &[Vec<f64>], times: &[f64], seed: u64) -> SimulationReport {
    let mut checkpoints = Vec::with_capacity(times.len());
    let mut violated = false;
    for (xs, &t) in samples.iter().zip(times) {
        let (m, se) = mean_se(xs);
        violated |= m - 1.0 > 3.0 * se;
        checkpoints.push(Checkpoint {
            time: t,
            estimate: m,
            std_error: se,
        });
    }
    let last = checkpoints.last().cloned().unwrap_or(Checkpoint {
        time: 0.0,
        estimate: 1.0,
        std_error: 0.0,
    });
    let mut r = SimulationReport::new(
        "E[ratio_T]",
        last.estimate,
        last.std_error,
        1.0,
        if violated { StatVerdict::Violated } else { StatVerdict::Consistent },
        samples.first().map_or(0, Vec::len),
        seed,
    );
    r.checkpoints = checkpoints;
    r
}

fn checkpoints(horizon: f64) -> [f64; 3] {
    [0.25 * horizon, 0.5 * horizon, horizon]
}

/// `W^π/W^ρ` at `T/4, T/2, T` for every `π`, on shared paths.
pub fn relative_wealth_tests(
    t: &LevyTriplet,
    pis: &[Vec<f64>],
    rho: &[f64],
    s: &SimSettings,
) -> Result<Vec<SimulationReport>> {
    check_horizon(s.horizon)?;
    let model = SimModel::new(t, s.epsilon)?;
    let marks = checkpoints(s.horizon);
    let per_path = map_indexed(s.n_paths, s.exec, |k| -> Result<Vec<[f64; 3]>> {
        let path = model.path(s.horizon, s.n_steps, s.seed, k as u64, &marks);
        let lr = log_at_marks(&path, &t.c, rho, &marks)?;
        pis.iter()
            .map(|pi| {
                let lp = log_at_marks(&path, &t.c, pi, &marks)?;
                Ok([(lp[0] - lr[0]).exp(), (lp[1] - lr[1]).exp(), (lp[2] - lr[2]).exp()])
            })
            .collect()
    });
    let per_path = per_path.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..pis.len())
        .map(|j| {
            let samples: Vec<Vec<f64>> = (0..3).map(|c| per_path.iter().map(|r| r[j][c]).collect()).collect();
            let mut r = supermartingale_test(&samples, &marks, s.seed);
            r.statistic = "E[W^pi_T / W^rho_T]".into();
            r
        })
        .collect())
}

fn log_at_marks(path: &SamplePath, c: &[Vec<f64>], pi: &[f64], marks: &[f64; 3]) -> Result<[f64; 3]> {
    let w = wealth_path(path, c, pi, Policy::ConstantVector)?;
    let mut out = [0.0; 3];
    for (o, &m) in out.iter_mut().zip(marks) {
        *o = w
            .log_at(m)
            .ok_or_else(|| Error::Precondition(format!("checkpoint {m} missing from the grid")))?;
    }
    Ok(out)
}

/// `n` portfolios around `ρ`, projected onto `C` and shrunk toward 0 until
/// no jump in the support costs more than 90% of wealth.
pub fn random_portfolios(t: &LevyTriplet, c: &ConstraintSet, rho: &[f64], n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = SimModel::rng(seed, u64::MAX);
    let radius = 1.0 + rho.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (0..n)
        .map(|_| {
            let q: Vec<f64> = rho
                .iter()
                .map(|r| r + radius * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let mut p = c.project(&q)?;
            let low = t.nu.support_inf_linear(&p);
            if low < -0.9 {
                let s = if low.is_finite() { 0.9 / -low } else { 0.0 };
                p.iter_mut().for_each(|v| *v *= s);
            }
            Ok(p)
        })
        .collect()
}

/// Paths of `W^ξ` must never decrease and end above 1 with positive
/// frequency.
pub fn increasing_profit_demo(t: &LevyTriplet, xi: &[f64], s: &SimSettings) -> Result<SimulationReport> {
    check_horizon(s.horizon)?;
    let model = SimModel::new(t, s.epsilon)?;
    let outcomes = map_indexed(s.n_paths, s.exec, |k| -> Result<bool> {
        let path = model.path(s.horizon, s.n_steps, s.seed, k as u64, &[]);
        let w = wealth_path(&path, &t.c, xi, Policy::ConstantVector)?;
        if let Some(i) = first_decrease(&w.log_wealth) {
            return Err(Error::MonotonicityViolation {
                path: k,
                time: w.times[i],
            });
        }
        Ok(w.terminal_log() > 0.0)
    });
    let ups: Vec<f64> = outcomes
        .into_iter()
        .map(|r| r.map(|b| if b { 1.0 } else { 0.0 }))
        .collect::<Result<_>>()?;
    let (p, se) = mean_se(&ups);
    Ok(SimulationReport::new(
        "P[W^xi_T > 1]",
        p,
        se,
        0.0,
        if p > 0.0 { StatVerdict::Consistent } else { StatVerdict::Violated },
        ups.len(),
        s.seed,
    ))
}

fn first_decrease(logw: &[f64]) -> Option<usize> {
    logw.windows(2)
        .position(|w| w[1] < w[0] - 1e-12 * (1.0 + w[0].abs()))
        .map(|i| i + 1)
}

/// Fraction of paths on which `W^π` never decreases.
pub fn monotone_fraction(t: &LevyTriplet, pi: &[f64], s: &SimSettings) -> Result<f64> {
    check_horizon(s.horizon)?;
    let model = SimModel::new(t, s.epsilon)?;
    let flags = map_indexed(s.n_paths, s.exec, |k| -> Result<bool> {
        let path = model.path(s.horizon, s.n_steps, s.seed, k as u64, &[]);
        Ok(first_decrease(&wealth_path(&path, &t.c, pi, Policy::ConstantVector)?.log_wealth).is_none())
    });
    let n = flags.len();
    let good = flags.into_iter().collect::<Result<Vec<_>>>()?.into_iter().filter(|b| *b).count();
    Ok(good as f64 / n.max(1) as f64)
}

const HORIZON_CAP_LOG2: u32 = 10;
const CHUNK_STEPS: usize = 64;

/// Runs `W^ρ` stopped at level `m` over horizons `1, 2, 4, …, 2^10` until
/// 99% of the paths have hit `m`.
pub fn infinite_horizon_free_lunch_demo(
    t: &LevyTriplet,
    c: &ConstraintSet,
    m: f64,
    s: &SimSettings,
) -> Result<SimulationReport> {
    if !(m > 1.0) {
        return Err(Error::InvalidInput(format!("target level must exceed 1, got {m}")));
    }
    let check = is_supermartingale_measure(t, c)?;
    if check.holds {
        return Err(Error::Precondition(
            "the law is already a supermartingale measure; no infinite-horizon free lunch".into(),
        ));
    }
    let d = t.dim;
    let null = null_space(t);
    if let Some(xi) = find_immediate_arbitrage(t, &c.recession_cone(d)?, &null)?.witness() {
        return Err(Error::IaoPresent { xi: xi.to_vec() });
    }
    let rho = solve_numeraire(t, c)?.rho;
    let model = SimModel::new(t, s.epsilon)?;
    let n_h = HORIZON_CAP_LOG2 as usize + 1;
    let cap = (1u64 << HORIZON_CAP_LOG2) as f64;
    let level = m.ln();
    let runs = map_indexed(s.n_paths, s.exec, |k| -> Result<(Option<f64>, Vec<f64>)> {
        let mut rng = SimModel::rng(s.seed, k as u64);
        let mut lw = 0.0;
        let mut at = vec![0.0; n_h];
        let mut hit = None;
        let mut t0 = 0.0;
        let mut next_h = 0usize;
        while t0 < cap {
            let mut chunk = SamplePath {
                stream: k as u64,
                times: vec![t0],
                continuous: Vec::new(),
                jumps: Vec::new(),
            };
            model.extend(&mut rng, &mut chunk, 1.0, CHUNK_STEPS, &[]);
            let rel = (m.ln() - lw).exp();
            let w = wealth_path(&chunk, &t.c, &rho, Policy::StopWhenWealthExceeds(rel))?;
            lw += w.terminal_log();
            t0 += 1.0;
            if let Some(ts) = w.stopped_at {
                hit = Some(ts);
            }
            while next_h < n_h && (1u64 << next_h) as f64 <= t0 {
                at[next_h] = lw;
                next_h += 1;
            }
            if hit.is_some() {
                break;
            }
        }
        for slot in at.iter_mut().skip(next_h) {
            *slot = lw;
        }
        Ok((hit, at))
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let n = runs.len() as f64;
    for h in 0..n_h {
        let horizon = (1u64 << h) as f64;
        let hits: Vec<f64> = runs
            .iter()
            .map(|(ht, _)| if ht.is_some_and(|x| x <= horizon) { 1.0 } else { 0.0 })
            .collect();
        let (p, se) = mean_se(&hits);
        if p >= 0.99 || h + 1 == n_h {
            let mean_w = runs.iter().map(|(_, at)| at[h].exp()).sum::<f64>() / n;
            if p < 0.99 {
                return Err(Error::HorizonCapReached {
                    horizon,
                    hit_fraction: p,
                });
            }
            let mut r = SimulationReport::new(
                "hit fraction of W^rho >= m",
                p,
                se,
                0.99,
                StatVerdict::Consistent,
                runs.len(),
                s.seed,
            );
            r.notes = vec![
                ("horizon".into(), horizon),
                ("level".into(), level.exp()),
                ("meanTerminalWealth".into(), mean_w),
                ("lowerBound".into(), m * p),
            ];
            r.notes.extend(rho.iter().enumerate().map(|(i, v)| (format!("rho[{i}]"), *v)));
            return Ok(r);
        }
    }
    unreachable!("the last horizon always returns")
}

/// `E Z_T = 1` for `Z_T = exp(−η⊤X_T − Σ g(ΔX) − Tψ)`.
pub fn esscher_martingale_test(t: &LevyTriplet, params: &EsscherParams, s: &SimSettings) -> Result<SimulationReport> {
    check_horizon(s.horizon)?;
    let model = SimModel::new(t, s.epsilon)?;
    let z = map_indexed(s.n_paths, s.exec, |k| {
        let path = model.path(s.horizon, 1, s.seed, k as u64, &[]);
        let x = path.terminal();
        let g: f64 = path.jumps.iter().map(|j| params.g_tag.eval(&j.x)).sum();
        (-dot(&params.eta, &x) - g - s.horizon * params.psi).exp()
    });
    let (m, se) = mean_se(&z);
    let ok = (m - 1.0).abs() <= 3.0 * se;
    Ok(SimulationReport::new(
        "E[Z_T]",
        m,
        se,
        1.0,
        if ok { StatVerdict::Consistent } else { StatVerdict::Violated },
        z.len(),
        s.seed,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GapEntry {
    pub pi: Vec<f64>,
    /// `T·rel(π|ρ) = log E[W^π_T/W^ρ_T]`.
    pub analytic: f64,
    /// Monte Carlo `E log(W^π_T/W^ρ_T)`.
    pub mc_log_mean: f64,
    pub mc_std_error: f64,
    pub consistent: bool,
}

/// Jensen check `T·rel(π|ρ) ≥ E log(W^π/W^ρ) − 3 SE`, both `≤ 0`.
pub fn log_optimality_gap(t: &LevyTriplet, rho: &[f64], pis: &[Vec<f64>], s: &SimSettings) -> Result<Vec<GapEntry>> {
    check_horizon(s.horizon)?;
    let model = SimModel::new(t, s.epsilon)?;
    let logs = map_indexed(s.n_paths, s.exec, |k| -> Result<Vec<f64>> {
        let path = model.path(s.horizon, 1, s.seed, k as u64, &[]);
        let lr = wealth_path(&path, &t.c, rho, Policy::ConstantVector)?.terminal_log();
        pis.iter()
            .map(|pi| Ok(wealth_path(&path, &t.c, pi, Policy::ConstantVector)?.terminal_log() - lr))
            .collect()
    });
    let logs = logs.into_iter().collect::<Result<Vec<_>>>()?;
    pis.iter()
        .enumerate()
        .map(|(j, pi)| {
            let analytic = s.horizon * rel_rate(t, pi, rho)?.to_f64();
            let xs: Vec<f64> = logs.iter().map(|r| r[j]).collect();
            let (m, se) = mean_se(&xs);
            let tol = 1e-6;
            let consistent = analytic >= m - 3.0 * se - tol && analytic <= tol && m <= 3.0 * se + tol;
            Ok(GapEntry {
                pi: pi.clone(),
                analytic,
                mc_log_mean: m,
                mc_std_error: se,
                consistent,
            })
        })
        .collect()
}
