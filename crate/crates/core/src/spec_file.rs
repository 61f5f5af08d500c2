//! On-disk market description: triplet, constraints, horizon and run options.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arbitrage::Horizon;
use crate::constraints::{null_space, ConstraintSet};
use crate::error::{Error, Result};
use crate::esscher::{EsscherParams, TransformedTriplet};
use crate::levy::LevyTriplet;

pub const SCHEMA_VERSION: &str = "1.0";

/// Origin of a transformed triplet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Provenance {
    pub source: LevyTriplet,
    pub params: EsscherParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AnalysisOptions {
    /// Solver tolerance override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_paths")]
    pub paths: usize,
    /// Small-jump truncation of the simulator.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    /// Target level of the infinite-horizon demo.
    #[serde(default = "default_level")]
    pub level: f64,
    /// Portfolios tested against the numéraire; random ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub portfolios: Option<Vec<Vec<f64>>>,
}

fn default_seed() -> u64 {
    1
}
fn default_paths() -> usize {
    100_000
}
fn default_epsilon() -> f64 {
    crate::simulate::DEFAULT_EPSILON
}
fn default_steps() -> usize {
    4
}
fn default_level() -> f64 {
    2.0
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            tol: None,
            seed: default_seed(),
            paths: default_paths(),
            epsilon: default_epsilon(),
            n_steps: default_steps(),
            max_iterations: None,
            level: default_level(),
            portfolios: None,
        }
    }
}

fn full() -> ConstraintSet {
    ConstraintSet::Full
}

fn default_horizon() -> Horizon {
    Horizon::Finite(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MarketSpecFile {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub market: LevyTriplet,
    #[serde(default = "full")]
    pub constraints: ConstraintSet,
    #[serde(default = "default_horizon")]
    pub horizon: Horizon,
    #[serde(default)]
    pub options: AnalysisOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl MarketSpecFile {
    pub fn new(market: LevyTriplet, constraints: ConstraintSet, horizon: Horizon) -> Self {
        MarketSpecFile {
            schema_version: SCHEMA_VERSION.into(),
            description: None,
            market,
            constraints,
            horizon,
            options: AnalysisOptions::default(),
            provenance: None,
        }
    }

    /// Spec of a transformed market, carrying its source and parameters.
    pub fn from_transformed(tt: &TransformedTriplet, constraints: ConstraintSet, horizon: Horizon) -> Self {
        let mut s = MarketSpecFile::new(tt.triplet.clone(), constraints, horizon);
        s.provenance = Some(Provenance {
            source: tt.source.clone(),
            params: tt.params.clone(),
        });
        s
    }

    /// Parses and validates; no numerics beyond structural checks.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MarketSpecFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))?;
        MarketSpecFile::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let major = self.schema_version.split('.').next().unwrap_or("");
        if major != "1" {
            return Err(Error::Schema(format!(
                "unsupported schemaVersion {:?}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        self.market.validate()?;
        let d = self.market.dim;
        self.constraints.validate(d)?;
        null_space(&self.market).check_inside(&self.constraints)?;
        if let Horizon::Finite(t) = self.horizon {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Schema(format!("finite horizon must be positive, got {t}")));
            }
        }
        let o = &self.options;
        if o.tol.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::Schema("options.tol must be positive".into()));
        }
        if !(o.epsilon > 0.0 && o.epsilon < 1.0) {
            return Err(Error::Schema("options.epsilon must lie in (0, 1)".into()));
        }
        if o.n_steps == 0 {
            return Err(Error::Schema("options.nSteps must be positive".into()));
        }
        if !(o.level > 1.0) {
            return Err(Error::Schema("options.level must exceed 1".into()));
        }
        if let Some(ps) = &o.portfolios {
            if let Some(p) = ps.iter().find(|p| p.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
        }
        if let Some(p) = &self.provenance {
            p.source.validate()?;
            if p.source.dim != d || p.params.eta.len() != d {
                return Err(Error::Schema("provenance dimension differs from the market".into()));
            }
        }
        Ok(())
    }

    /// Finite horizon, or 1 for infinite-horizon specs.
    pub fn simulation_horizon(&self) -> f64 {
        match self.horizon {
            Horizon::Finite(t) => t,
            Horizon::Infinite => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esscher::{transform_triplet, GTag};
    use crate::levy::{Atom, JumpMeasure};

    const POLY_1D: &str = r#"{
        "schemaVersion": "1.0",
        "market": {
            "dimension": 1, "b": [1.0], "c": [[0.0]],
            "nu": {"densities": [{"family": "polynomialOnInterval", "params": {"coeffs": [1.0, 1.0]},
                                  "support": {"interval": {"lo": -1.0, "hi": 1.0}}}]}
        },
        "constraints": {"type": "full"},
        "horizon": {"finite": 1.0}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let s = MarketSpecFile::from_json(POLY_1D).unwrap();
        assert_eq!(s.market.dim, 1);
        assert_eq!(s.options, AnalysisOptions::default());
        let back = MarketSpecFile::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn infinite_horizon_string() {
        let text = POLY_1D.replace(r#"{"finite": 1.0}"#, r#""infinite""#);
        assert_eq!(MarketSpecFile::from_json(&text).unwrap().horizon, Horizon::Infinite);
    }

    #[test]
    fn unknown_keys_rejected_everywhere() {
        for (from, to) in [
            (r#""schemaVersion""#, r#""colour": 1, "schemaVersion""#),
            (r#""dimension""#, r#""volatility": 1, "dimension""#),
            (r#""horizon": {"finite": 1.0}"#, r#""horizon": {"finite": 1.0}, "options": {"sed": 3}"#),
            (r#""type": "full""#, r#""type": "full", "extra": 0"#),
        ] {
            let text = POLY_1D.replacen(from, to, 1);
            assert!(matches!(MarketSpecFile::from_json(&text), Err(Error::Schema(_))), "{to}");
        }
    }

    #[test]
    fn structural_errors() {
        assert!(MarketSpecFile::from_json("{").is_err());
        let v2 = POLY_1D.replace("\"1.0\"", "\"2.0\"");
        assert!(matches!(MarketSpecFile::from_json(&v2), Err(Error::Schema(_))));
        let neg = POLY_1D.replace(r#"{"finite": 1.0}"#, r#"{"finite": -1.0}"#);
        assert!(MarketSpecFile::from_json(&neg).is_err());
        let dim = POLY_1D.replace(r#""b": [1.0]"#, r#""b": [1.0, 2.0]"#);
        assert!(MarketSpecFile::from_json(&dim).is_err());
    }

    #[test]
    fn transformed_triplet_keeps_provenance() {
        let t = LevyTriplet::new(
            vec![0.2],
            vec![vec![0.1]],
            JumpMeasure::from_atoms(vec![Atom::new(vec![0.5], 1.0)]),
        )
        .unwrap();
        let p = EsscherParams::new(&t, vec![0.4], GTag::Zero).unwrap();
        let tt = transform_triplet(&t, &p).unwrap();
        let s = MarketSpecFile::from_transformed(&tt, ConstraintSet::Full, Horizon::Finite(1.0));
        let back = MarketSpecFile::from_json(&s.to_json()).unwrap();
        let prov = back.provenance.unwrap();
        assert_eq!(prov.source, t);
        assert_eq!(prov.params, p);
        assert_eq!(back.market, tt.triplet);
    }
}
