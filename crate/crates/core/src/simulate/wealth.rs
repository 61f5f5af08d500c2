//! Wealth `W^π = ℰ(π·X)` along simulated paths, kept in log form.

use serde::{Deserialize, Serialize};

use super::SamplePath;
use crate::error::{Error, Result};
use crate::linalg::{dot, quad_form};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Policy {
    ConstantVector,
    /// Hold `π` until wealth first reaches `m`, then hold nothing.
    StopWhenWealthExceeds(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WealthPath {
    pub times: Vec<f64>,
    pub log_wealth: Vec<f64>,
    /// First grid time with `W ≥ m` under the stopping policy.
    pub stopped_at: Option<f64>,
}

impl WealthPath {
    pub fn wealth(&self) -> Vec<f64> {
        self.log_wealth.iter().map(|l| l.exp()).collect()
    }

    pub fn terminal_log(&self) -> f64 {
        *self.log_wealth.last().expect("wealth path starts at 0")
    }

    /// Log-wealth at an exact grid time.
    pub fn log_at(&self, t: f64) -> Option<f64> {
        self.times
            .iter()
            .position(|s| (*s - t).abs() <= 1e-12 * (1.0 + t.abs()))
            .map(|k| self.log_wealth[k])
    }
}

/// Log-wealth at every grid time: `π⊤ΔX^c − ½π⊤cπ Δt` between jumps and
/// `log(1 + π⊤ΔX)` at a jump.
pub fn wealth_path(path: &SamplePath, c: &[Vec<f64>], pi: &[f64], policy: Policy) -> Result<WealthPath> {
    let half_var = 0.5 * quad_form(c, pi, pi);
    let level = match policy {
        Policy::ConstantVector => f64::INFINITY,
        Policy::StopWhenWealthExceeds(m) => m.ln(),
    };
    let mut logw = Vec::with_capacity(path.times.len());
    logw.push(0.0);
    let mut active = level > 0.0;
    let mut stopped_at = (!active).then_some(0.0);
    let mut ji = 0;
    let mut lw = 0.0;
    for (k, inc) in path.continuous.iter().enumerate() {
        if active {
            let dt = path.times[k + 1] - path.times[k];
            lw += dot(pi, inc) - half_var * dt;
        }
        while ji < path.jumps.len() && path.jumps[ji].step == k + 1 {
            if active {
                let f = 1.0 + dot(pi, &path.jumps[ji].x);
                if f <= 0.0 || f.is_nan() {
                    return Err(Error::NonPositiveWealth {
                        path: path.stream as usize,
                        time: path.jumps[ji].time,
                    });
                }
                lw += f.ln();
            }
            ji += 1;
        }
        logw.push(lw);
        if active && lw >= level {
            active = false;
            stopped_at = Some(path.times[k + 1]);
        }
    }
    Ok(WealthPath {
        times: path.times.clone(),
        log_wealth: logw,
        stopped_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::JumpEvent;

    fn path_with_jump() -> SamplePath {
        SamplePath {
            stream: 0,
            times: vec![0.0, 0.5, 1.0],
            continuous: vec![vec![0.0], vec![0.0]],
            jumps: vec![JumpEvent {
                step: 1,
                time: 0.5,
                x: vec![-0.25],
            }],
        }
    }

    #[test]
    fn zero_portfolio_is_flat() {
        let w = wealth_path(&path_with_jump(), &[vec![0.3]], &[0.0], Policy::ConstantVector).unwrap();
        assert!(w.wealth().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn jump_halves_wealth() {
        let w = wealth_path(&path_with_jump(), &[vec![0.0]], &[2.0], Policy::ConstantVector).unwrap();
        assert!((w.wealth()[1] - 0.5).abs() < 1e-15);
        assert!(matches!(
            wealth_path(&path_with_jump(), &[vec![0.0]], &[4.0], Policy::ConstantVector),
            Err(Error::NonPositiveWealth { .. })
        ));
    }

    #[test]
    fn stopping_freezes_wealth() {
        let p = SamplePath {
            stream: 0,
            times: vec![0.0, 1.0, 2.0, 3.0],
            continuous: vec![vec![1.0], vec![1.0], vec![1.0]],
            jumps: Vec::new(),
        };
        let w = wealth_path(&p, &[vec![0.0]], &[1.0], Policy::StopWhenWealthExceeds(2.0)).unwrap();
        assert_eq!(w.stopped_at, Some(1.0));
        assert_eq!(w.log_wealth, vec![0.0, 1.0, 1.0, 1.0]);
    }
}
