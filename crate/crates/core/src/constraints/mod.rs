//! Closed convex constraint sets and the cones derived from them.

pub mod nullspace;
pub mod qp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sub, unit};

pub use nullspace::{natural_constraints, natural_constraints_contains, null_space, NaturalConstraints, NullSpaceBasis};

const MEMBER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "camelCase", deny_unknown_fields)]
pub enum ConstraintSet {
    /// `ℝᵈ`
    Full,
    /// `ℝ₊ᵈ`
    Orthant,
    /// Per-coordinate bounds, infinite ones allowed.
    Box {
        #[serde(with = "crate::serde_ext::ext_f64::vec")]
        lower: Vec<f64>,
        #[serde(with = "crate::serde_ext::ext_f64::vec")]
        upper: Vec<f64>,
    },
    /// `{p : A p ≤ a}`
    Polyhedron {
        #[serde(rename = "A")]
        a_mat: Vec<Vec<f64>>,
        a: Vec<f64>,
    },
    /// Nonnegative combinations of the rays.
    Cone { rays: Vec<Vec<f64>> },
    /// `{p : p[x]² ≤ p[y]}`, other coordinates free.
    #[serde(rename_all = "camelCase")]
    Parabola {
        #[serde(default)]
        x_index: usize,
        #[serde(default = "one")]
        y_index: usize,
    },
    Intersection { sets: Vec<ConstraintSet> },
}

fn one() -> usize {
    1
}

impl ConstraintSet {
    pub fn parabola() -> Self {
        ConstraintSet::Parabola { x_index: 0, y_index: 1 }
    }

    pub fn singleton_zero(d: usize) -> Self {
        ConstraintSet::Box {
            lower: vec![0.0; d],
            upper: vec![0.0; d],
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let dim_err = |got| Err(Error::DimensionMismatch { expected: d, got });
        match self {
            ConstraintSet::Full | ConstraintSet::Orthant => Ok(()),
            ConstraintSet::Box { lower, upper } => {
                if lower.len() != d {
                    return dim_err(lower.len());
                }
                if upper.len() != d {
                    return dim_err(upper.len());
                }
                if lower.iter().zip(upper).any(|(l, u)| l.is_nan() || u.is_nan() || l > u || *l > 0.0 || *u < 0.0) {
                    return Err(Error::InvalidInput("box bounds must satisfy lower ≤ 0 ≤ upper".into()));
                }
                Ok(())
            }
            ConstraintSet::Polyhedron { a_mat, a } => {
                if a_mat.len() != a.len() {
                    return Err(Error::InvalidInput("polyhedron A and a have different lengths".into()));
                }
                if let Some(r) = a_mat.iter().find(|r| r.len() != d) {
                    return dim_err(r.len());
                }
                if a.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                    return Err(Error::InvalidInput("polyhedron must contain the origin (a ≥ 0)".into()));
                }
                Ok(())
            }
            ConstraintSet::Cone { rays } => {
                if let Some(r) = rays.iter().find(|r| r.len() != d) {
                    return dim_err(r.len());
                }
                Ok(())
            }
            ConstraintSet::Parabola { x_index, y_index } => {
                if *x_index >= d || *y_index >= d || x_index == y_index {
                    return Err(Error::InvalidInput("parabola indices out of range".into()));
                }
                Ok(())
            }
            ConstraintSet::Intersection { sets } => sets.iter().try_for_each(|s| s.validate(d)),
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.contains_tol(p, MEMBER_TOL)
    }

    pub fn contains_tol(&self, p: &[f64], tol: f64) -> bool {
        let scale = 1.0 + norm(p);
        match self {
            ConstraintSet::Full => true,
            ConstraintSet::Orthant => p.iter().all(|v| *v >= -tol * scale),
            ConstraintSet::Box { lower, upper } => p
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - tol * scale && *v <= u + tol * scale),
            ConstraintSet::Polyhedron { a_mat, a } => a_mat
                .iter()
                .zip(a)
                .all(|(r, ai)| dot(r, p) <= ai + tol * scale * (1.0 + norm(r))),
            ConstraintSet::Cone { rays } => match qp::project_cone(rays, p) {
                Ok(q) => norm(&sub(&q, p)) <= tol * scale,
                Err(_) => false,
            },
            ConstraintSet::Parabola { x_index, y_index } => {
                p[*x_index] * p[*x_index] <= p[*y_index] + tol * scale * scale
            }
            ConstraintSet::Intersection { sets } => sets.iter().all(|s| s.contains_tol(p, tol)),
        }
    }

    /// Whether the set is a cone (structurally).
    pub fn is_cone(&self) -> bool {
        match self {
            ConstraintSet::Full | ConstraintSet::Orthant | ConstraintSet::Cone { .. } => true,
            ConstraintSet::Box { lower, upper } => lower
                .iter()
                .chain(upper)
                .all(|v| *v == 0.0 || v.is_infinite()),
            ConstraintSet::Polyhedron { a, .. } => a.iter().all(|v| *v == 0.0),
            ConstraintSet::Parabola { .. } => false,
            ConstraintSet::Intersection { sets } => sets.iter().all(ConstraintSet::is_cone),
        }
    }

    /// `Č = ⋂_{a>0} a C`.
    pub fn recession_cone(&self, d: usize) -> Result<ConstraintSet> {
        Ok(match self {
            ConstraintSet::Full | ConstraintSet::Orthant | ConstraintSet::Cone { .. } => self.clone(),
            ConstraintSet::Box { lower, upper } => ConstraintSet::Box {
                lower: lower.iter().map(|l| if l.is_infinite() { *l } else { 0.0 }).collect(),
                upper: upper.iter().map(|u| if u.is_infinite() { *u } else { 0.0 }).collect(),
            },
            ConstraintSet::Polyhedron { a_mat, a } => ConstraintSet::Polyhedron {
                a_mat: a_mat.clone(),
                a: vec![0.0; a.len()],
            },
            ConstraintSet::Parabola { x_index, y_index } => {
                let mut lower = vec![f64::NEG_INFINITY; d];
                let mut upper = vec![f64::INFINITY; d];
                lower[*x_index] = 0.0;
                upper[*x_index] = 0.0;
                lower[*y_index] = 0.0;
                ConstraintSet::Box { lower, upper }
            }
            ConstraintSet::Intersection { sets } => ConstraintSet::Intersection {
                sets: sets.iter().map(|s| s.recession_cone(d)).collect::<Result<_>>()?,
            },
        })
    }

    /// Closure of the smallest cone containing the set.
    pub fn closed_conic_hull(&self, d: usize) -> Result<ConstraintSet> {
        Ok(match self {
            ConstraintSet::Full | ConstraintSet::Orthant | ConstraintSet::Cone { .. } => self.clone(),
            ConstraintSet::Box { lower, upper } => ConstraintSet::Box {
                lower: lower
                    .iter()
                    .map(|l| if *l < 0.0 { f64::NEG_INFINITY } else { 0.0 })
                    .collect(),
                upper: upper
                    .iter()
                    .map(|u| if *u > 0.0 { f64::INFINITY } else { 0.0 })
                    .collect(),
            },
            ConstraintSet::Polyhedron { a_mat, a } => {
                let rows: Vec<Vec<f64>> = a_mat
                    .iter()
                    .zip(a)
                    .filter(|(_, ai)| **ai == 0.0)
                    .map(|(r, _)| r.clone())
                    .collect();
                let n = rows.len();
                ConstraintSet::Polyhedron {
                    a_mat: rows,
                    a: vec![0.0; n],
                }
            }
            ConstraintSet::Parabola { y_index, .. } => {
                let mut lower = vec![f64::NEG_INFINITY; d];
                lower[*y_index] = 0.0;
                ConstraintSet::Box {
                    lower,
                    upper: vec![f64::INFINITY; d],
                }
            }
            ConstraintSet::Intersection { sets } => ConstraintSet::Intersection {
                sets: sets.iter().map(|s| s.closed_conic_hull(d)).collect::<Result<_>>()?,
            },
        })
    }

    /// Euclidean projection.
    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>> {
        match self {
            ConstraintSet::Full => Ok(p.to_vec()),
            ConstraintSet::Orthant => Ok(p.iter().map(|v| v.max(0.0)).collect()),
            ConstraintSet::Box { lower, upper } => Ok(p
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect()),
            ConstraintSet::Polyhedron { a_mat, a } => qp::project_polyhedron(a_mat, a, p),
            ConstraintSet::Cone { rays } => qp::project_cone(rays, p),
            ConstraintSet::Parabola { x_index, y_index } => {
                let (x, y) = qp::project_parabola(p[*x_index], p[*y_index]);
                let mut q = p.to_vec();
                q[*x_index] = x;
                q[*y_index] = y;
                Ok(q)
            }
            ConstraintSet::Intersection { sets } => dykstra(sets, p),
        }
    }

    /// Finite points and recession rays used to probe the set: box corners
    /// (infinite bounds replaced by 0), polyhedron vertices and extreme rays
    /// for small dimension, parabola boundary samples.
    pub fn probe_points(&self, d: usize) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let rays = cone_rays(&self.recession_cone(d)?, d);
        let points = match self {
            ConstraintSet::Full | ConstraintSet::Orthant | ConstraintSet::Cone { .. } => vec![vec![0.0; d]],
            ConstraintSet::Box { lower, upper } => {
                let fin = |v: f64| if v.is_finite() { v } else { 0.0 };
                let free: Vec<usize> = (0..d).filter(|&i| fin(lower[i]) != fin(upper[i])).collect();
                if free.len() > 12 {
                    vec![lower.iter().map(|v| fin(*v)).collect(), upper.iter().map(|v| fin(*v)).collect()]
                } else {
                    (0..1usize << free.len())
                        .map(|mask| {
                            let mut q: Vec<f64> = lower.iter().map(|v| fin(*v)).collect();
                            for (k, &i) in free.iter().enumerate() {
                                if mask >> k & 1 == 1 {
                                    q[i] = fin(upper[i]);
                                }
                            }
                            q
                        })
                        .collect()
                }
            }
            ConstraintSet::Polyhedron { a_mat, a } => polyhedron_vertices(a_mat, a, d),
            ConstraintSet::Parabola { x_index, y_index } => (-8..=8)
                .map(|k| {
                    let t = k as f64 / 4.0;
                    let mut q = vec![0.0; d];
                    q[*x_index] = t;
                    q[*y_index] = t * t;
                    q
                })
                .collect(),
            ConstraintSet::Intersection { sets } => {
                let mut pts = vec![vec![0.0; d]];
                for s in sets {
                    for q in s.probe_points(d)?.0 {
                        let proj = self.project(&q)?;
                        if !pts.iter().any(|r| norm(&sub(r, &proj)) < 1e-9) {
                            pts.push(proj);
                        }
                    }
                }
                pts
            }
        };
        Ok((points, rays))
    }

    /// Linear description of a polyhedral cone for the LP layer.
    pub fn linear_cone(&self, d: usize) -> Result<LinearCone> {
        if !self.is_cone() {
            return Err(Error::UnsupportedVariant("linear description of a non-cone".into()));
        }
        let mut out = LinearCone::default();
        self.collect_linear(d, &mut out)?;
        Ok(out)
    }

    fn collect_linear(&self, d: usize, out: &mut LinearCone) -> Result<()> {
        match self {
            ConstraintSet::Full => {}
            ConstraintSet::Orthant => out.le.extend((0..d).map(|i| neg(&unit(d, i)))),
            ConstraintSet::Box { lower, upper } => {
                for i in 0..d {
                    if lower[i] == 0.0 {
                        out.le.push(neg(&unit(d, i)));
                    }
                    if upper[i] == 0.0 {
                        out.le.push(unit(d, i));
                    }
                }
            }
            ConstraintSet::Polyhedron { a_mat, .. } => out.le.extend(a_mat.iter().cloned()),
            ConstraintSet::Cone { rays } => out.generated.push(rays.clone()),
            ConstraintSet::Parabola { .. } => {
                return Err(Error::UnsupportedVariant("parabola is not polyhedral".into()))
            }
            ConstraintSet::Intersection { sets } => {
                for s in sets {
                    s.collect_linear(d, out)?;
                }
            }
        }
        Ok(())
    }
}

/// `{ξ : le·ξ ≤ 0} ∩ ⋂_k cone(generated[k])`
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearCone {
    pub le: Vec<Vec<f64>>,
    pub generated: Vec<Vec<Vec<f64>>>,
}

fn neg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}

/// Dykstra's alternating projections onto an intersection.
fn dykstra(sets: &[ConstraintSet], p: &[f64]) -> Result<Vec<f64>> {
    let sets: Vec<&ConstraintSet> = sets.iter().filter(|s| !matches!(s, ConstraintSet::Full)).collect();
    if sets.is_empty() {
        return Ok(p.to_vec());
    }
    if sets.len() == 1 {
        return sets[0].project(p);
    }
    let slack = 1e-10 * (1.0 + norm(p));
    let d = p.len();
    let mut x = p.to_vec();
    let mut incr = vec![vec![0.0; d]; sets.len()];
    for _ in 0..10_000 {
        let prev = x.clone();
        for (k, s) in sets.iter().enumerate() {
            let y: Vec<f64> = x.iter().zip(&incr[k]).map(|(a, b)| a + b).collect();
            let z = s.project(&y)?;
            incr[k] = sub(&y, &z);
            x = z;
        }
        if norm(&sub(&x, &prev)) <= 1e-12 * (1.0 + norm(&x)) && sets.iter().all(|s| s.contains_tol(&x, slack)) {
            return Ok(x);
        }
    }
    Err(Error::ConvergenceFailure("Dykstra projection exceeded 10^4 sweeps".into()))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if out.len() > 20_000 {
            return;
        }
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Vertices of `{A p ≤ a}` by brute-force enumeration of active sets.
fn polyhedron_vertices(a_mat: &[Vec<f64>], a: &[f64], d: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; d]];
    for idx in combinations(a_mat.len(), d) {
        let m: Vec<Vec<f64>> = idx.iter().map(|&i| a_mat[i].clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| a[i]).collect();
        if let Some(x) = crate::linalg::solve(&m, &rhs) {
            if x.iter().all(|v| v.is_finite())
                && a_mat.iter().zip(a).all(|(r, ai)| dot(r, &x) <= ai + 1e-9)
                && !out.iter().any(|q| norm(&sub(q, &x)) < 1e-9)
            {
                out.push(x);
            }
        }
    }
    out
}

/// Generators (extreme rays plus both signs of lineality directions) of a
/// polyhedral cone, by enumeration; meant for small dimension.
pub fn cone_rays(cone: &ConstraintSet, d: usize) -> Vec<Vec<f64>> {
    if let ConstraintSet::Cone { rays } = cone {
        return rays.clone();
    }
    let lin = match cone.linear_cone(d) {
        Ok(l) if l.generated.is_empty() => l,
        _ => {
            // Fall back to sampling coordinate directions.
            return (0..d)
                .flat_map(|i| [unit(d, i), neg(&unit(d, i))])
                .filter(|v| cone.contains(v))
                .collect();
        }
    };
    let rows = lin.le;
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut push = |v: Vec<f64>| {
        let n = norm(&v);
        if n < 1e-12 {
            return;
        }
        let v: Vec<f64> = v.iter().map(|x| x / n).collect();
        if rows.iter().all(|r| dot(r, &v) <= 1e-10) && !out.iter().any(|q: &Vec<f64>| norm(&sub(q, &v)) < 1e-9) {
            out.push(v);
        }
    };
    // Lineality space L = ker G, then extreme rays of the pointed part: one
    // extra kernel dimension beyond L for some set of active rows.
    let (lineality, _) = crate::linalg::kernel_and_complement(&rows, d, 1e-10);
    for v in &lineality {
        push(v.clone());
        push(neg(v));
    }
    for k in 0..d {
        for idx in combinations(rows.len(), k) {
            let m: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
            let (ker, _) = crate::linalg::kernel_and_complement(&m, d, 1e-10);
            if ker.len() != lineality.len() + 1 {
                continue;
            }
            let best = ker
                .iter()
                .map(|v| sub(v, &crate::linalg::project_span(&lineality, v)))
                .max_by(|a, b| norm(a).total_cmp(&norm(b)));
            if let Some(v) = best {
                push(v.clone());
                push(neg(&v));
            }
        }
    }
    out
}
