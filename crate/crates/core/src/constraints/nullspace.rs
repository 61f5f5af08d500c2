//! Null investments and the model-enforced (natural) constraints.

use serde::{Deserialize, Serialize};

use super::ConstraintSet;
use crate::error::{Error, Result};
use crate::levy::{JumpMeasure, LevyTriplet};
use crate::linalg::{dot, kernel_and_complement, project_span, sub};

/// Orthonormal bases of `𝔑` and `𝔑⊥`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NullSpaceBasis {
    pub basis: Vec<Vec<f64>>,
    pub complement_basis: Vec<Vec<f64>>,
}

impl NullSpaceBasis {
    pub fn dim(&self) -> usize {
        self.basis.len() + self.complement_basis.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    /// Component of `p` in `𝔑`.
    pub fn project_null(&self, p: &[f64]) -> Vec<f64> {
        project_span(&self.basis, p)
    }

    /// Component of `p` in `𝔑⊥`.
    pub fn project_perp(&self, p: &[f64]) -> Vec<f64> {
        sub(p, &self.project_null(p))
    }

    pub fn distance(&self, p: &[f64]) -> f64 {
        crate::linalg::norm(&self.project_perp(p))
    }

    /// Checks `𝔑 ⊆ C` on `±ζ` scaled by 1 and 10³.
    pub fn check_inside(&self, c: &ConstraintSet) -> Result<()> {
        for z in &self.basis {
            for s in [1.0, -1.0, 1e3, -1e3] {
                let p: Vec<f64> = z.iter().map(|v| v * s).collect();
                if !c.contains_tol(&p, 1e-8) {
                    return Err(Error::Precondition(format!(
                        "null investment {z:?} is not admissible; constraints must contain 𝔑"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `𝔑 = {ζ : ζ⊤c = 0, ζ⊤x = 0 ν-a.e., ζ⊤b = 0}` from the kernel of the
/// stacked rows `[c; support spans; b⊤]`.
pub fn null_space(t: &LevyTriplet) -> NullSpaceBasis {
    let mut rows: Vec<Vec<f64>> = t.c.clone();
    for a in &t.nu.atoms {
        rows.push(a.x.clone());
    }
    for seg in &t.nu.densities {
        rows.extend(seg.support.spanning_vectors());
    }
    rows.push(t.b.clone());
    let (basis, complement_basis) = kernel_and_complement(&rows, t.dim, 1e-10);
    NullSpaceBasis {
        basis,
        complement_basis,
    }
}

/// `C₀ = {p : ν[p⊤x < −1] = 0}`.
pub fn natural_constraints_contains(nu: &JumpMeasure, p: &[f64]) -> bool {
    nu.support_inf_linear(p) >= -1.0 - 1e-12
}

/// Polyhedral description of `C₀`: `p⊤v ≥ −1` for the support's extreme
/// points, `p⊤d ≥ 0` for its recession directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NaturalConstraints {
    pub vertices: Vec<Vec<f64>>,
    pub directions: Vec<Vec<f64>>,
}

pub fn natural_constraints(nu: &JumpMeasure) -> NaturalConstraints {
    let (vertices, directions) = nu.support_geometry();
    NaturalConstraints { vertices, directions }
}

impl NaturalConstraints {
    pub fn contains(&self, p: &[f64]) -> bool {
        self.vertices.iter().all(|v| dot(p, v) >= -1.0 - 1e-12)
            && self.directions.iter().all(|d| dot(p, d) >= -1e-12)
    }

    /// `{p : p⊤v ≥ −1 + δ, p⊤d ≥ 0}` as a polyhedron (`δ = 0` gives `C₀`).
    pub fn shrunk(&self, delta: f64) -> ConstraintSet {
        let mut a_mat = Vec::new();
        let mut a = Vec::new();
        for v in &self.vertices {
            if v.iter().any(|x| *x != 0.0) {
                a_mat.push(v.iter().map(|x| -x).collect());
                a.push(1.0 - delta);
            }
        }
        for d in &self.directions {
            a_mat.push(d.iter().map(|x| -x).collect());
            a.push(0.0);
        }
        ConstraintSet::Polyhedron { a_mat, a }
    }

    /// `cl cone(C₀) = {p : p⊤d ≥ 0}` over the recession directions.
    pub fn conic_hull(&self) -> ConstraintSet {
        let a_mat: Vec<Vec<f64>> = self
            .directions
            .iter()
            .map(|d| d.iter().map(|x| -x).collect())
            .collect();
        let n = a_mat.len();
        ConstraintSet::Polyhedron { a_mat, a: vec![0.0; n] }
    }

    pub fn is_everything(&self) -> bool {
        self.vertices.iter().all(|v| v.iter().all(|x| *x == 0.0)) && self.directions.is_empty()
    }
}
