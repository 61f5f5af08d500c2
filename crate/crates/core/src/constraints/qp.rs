//! Euclidean projections that need an iterative solver: polyhedra and
//! finitely generated cones (Lawson–Hanson NNLS) and the parabola `x² ≤ y`
//! (cubic normal equation).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::dot;

const MAX_ITER: usize = 10_000;

/// Least-squares solve of `m z = r` (minimum-norm for rank-deficient `m`).
fn lstsq(m: &DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
    let svd = m.clone().svd(true, true);
    svd.solve(r, 1e-12).unwrap_or_else(|_| DVector::zeros(m.ncols()))
}

/// Projection of `p` onto `{x : A x ≤ a}`, which must contain the origin.
/// Solved through its dual `min_{μ ≥ 0} ½ μ⊤AA⊤μ − μ⊤(Ap − a)`, then
/// `x = p − A⊤μ`.
pub fn project_polyhedron(a_mat: &[Vec<f64>], a: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    let d = p.len();
    let tol = 1e-12;
    if a_mat.iter().zip(a).all(|(row, ai)| dot(row, p) <= ai + tol) {
        return Ok(p.to_vec());
    }
    if a.iter().any(|ai| *ai < -tol) {
        return Err(Error::InvalidInput("polyhedron must contain the origin".into()));
    }
    let m = DMatrix::from_fn(a_mat.len(), d, |i, j| a_mat[i][j]);
    let h = DVector::from_iterator(a.len(), a_mat.iter().zip(a).map(|(row, ai)| dot(row, p) - ai));
    let mu = nnls_gram(&(&m * m.transpose()), &h)?;
    let shift = m.transpose() * mu;
    Ok((0..d).map(|j| p[j] - shift[j]).collect())
}

/// Lawson–Hanson non-negative least squares: `argmin_{λ ≥ 0} |R λ − p|`,
/// returning `R λ` where `R` has the `rays` as columns.
pub fn project_cone(rays: &[Vec<f64>], p: &[f64]) -> Result<Vec<f64>> {
    let d = p.len();
    let n = rays.len();
    if n == 0 {
        return Ok(vec![0.0; d]);
    }
    let r = DMatrix::from_fn(d, n, |i, j| rays[j][i]);
    let pv = DVector::from_column_slice(p);
    let lambda = nnls_gram(&(r.transpose() * &r), &(r.transpose() * pv))?;
    Ok((r * lambda).iter().copied().collect())
}

/// Lawson–Hanson on the normal equations: `argmin_{λ ≥ 0} ½λ⊤Qλ − λ⊤h`
/// for positive semidefinite `Q`.
fn nnls_gram(q: &DMatrix<f64>, h: &DVector<f64>) -> Result<DVector<f64>> {
    let n = h.len();
    let mut lambda = DVector::zeros(n);
    let mut passive = vec![false; n];
    // Columns whose entry would not move λ; cleared once λ changes.
    let mut stalled = vec![false; n];
    let tol = 1e-12 * (1.0 + h.amax()) * (1.0 + q.amax());
    for _ in 0..MAX_ITER {
        let w = h - q * &lambda;
        let pick = (0..n)
            .filter(|&j| !passive[j] && !stalled[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = pick else {
            return Ok(lambda);
        };
        passive[j] = true;
        let before = lambda.clone();
        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let qp = DMatrix::from_fn(idx.len(), idx.len(), |a, b| q[(idx[a], idx[b])]);
            let hp = DVector::from_iterator(idx.len(), idx.iter().map(|&k| h[k]));
            let z = lstsq(&qp, &hp);
            if z.iter().all(|v| *v > 0.0) {
                for (k, &col) in idx.iter().enumerate() {
                    lambda[col] = z[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &col) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let den = lambda[col] - z[k];
                    if den > 0.0 {
                        alpha = alpha.min(lambda[col] / den);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (k, &col) in idx.iter().enumerate() {
                lambda[col] += alpha * (z[k] - lambda[col]);
                if lambda[col] <= 1e-15 * (1.0 + lambda.amax()) {
                    lambda[col] = 0.0;
                    passive[col] = false;
                }
            }
            if idx.iter().all(|&c| !passive[c]) {
                break;
            }
        }
        if lambda == before {
            passive[j] = false;
            stalled[j] = true;
        } else {
            stalled.iter_mut().for_each(|s| *s = false);
        }
    }
    Err(Error::ConvergenceFailure("non-negative least squares exceeded the iteration cap".into()))
}

/// Projection of the planar point `(px, py)` onto `{x² ≤ y}`.
pub fn project_parabola(px: f64, py: f64) -> (f64, f64) {
    if px * px <= py {
        return (px, py);
    }
    // Boundary point (x, x²) with 2x³ + (1 − 2py)x − px = 0.
    let roots = real_cubic_roots(2.0, 0.0, 1.0 - 2.0 * py, -px);
    let mut best = (0.0, 0.0);
    let mut best_d = f64::INFINITY;
    for mut x in roots {
        for _ in 0..20 {
            let f = 2.0 * x * x * x + (1.0 - 2.0 * py) * x - px;
            let df = 6.0 * x * x + (1.0 - 2.0 * py);
            if df == 0.0 {
                break;
            }
            let nx = x - f / df;
            if (nx - x).abs() <= 1e-16 * (1.0 + x.abs()) {
                x = nx;
                break;
            }
            x = nx;
        }
        let dd = (x - px).powi(2) + (x * x - py).powi(2);
        if dd < best_d {
            best_d = dd;
            best = (x, x * x);
        }
    }
    best
}

/// Real roots of `a x³ + b x² + c x + d` (trigonometric / Cardano form).
fn real_cubic_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let (b, c, d) = (b / a, c / a, d / a);
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let shift = -b / 3.0;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
    } else if p == 0.0 {
        vec![shift]
    } else {
        let r = (-p / 3.0).sqrt();
        let phi = (3.0 * q / (2.0 * p) / r).clamp(-1.0, 1.0).acos();
        (0..3)
            .map(|k| 2.0 * r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + shift)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm, sub};
    use approx::assert_abs_diff_eq;

    #[test]
    fn far_points_land_on_the_right_facet() {
        let a_mat = vec![vec![-1.9402580161761256], vec![0.08649899435864784]];
        let a = vec![0.999999999, 0.999999999];
        for p in [-8.99e6, -5.0, 50.0, 1e3, 3e7] {
            let x = project_polyhedron(&a_mat, &a, &[p]).unwrap()[0];
            let want = if p < 0.0 { -a[0] / 1.9402580161761256 } else { a[1] / 0.08649899435864784 };
            assert_abs_diff_eq!(x, want, epsilon = 1e-9 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn redundant_rays_do_not_cycle() {
        let rays = vec![vec![1.0, 0.0], vec![1.0, 1e-17], vec![2.0, 0.0], vec![0.0, 1.0]];
        let x = project_cone(&rays, &[3.0, -1.0]).unwrap();
        assert_abs_diff_eq!(x[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn many_facets_match_a_fine_grid() {
        // 25 half-planes −p⊤x ≤ 1 from a grid of jump sizes.
        let vals = [-0.9, -0.5, 0.0, 0.7, 2.3];
        let mut a = Vec::new();
        for e in [0.1, 0.4, 0.7, 1.2, 2.3] {
            for f in vals {
                a.push(vec![-e, -f]);
            }
        }
        let b = vec![1.0; a.len()];
        for p in [[-10.0, -9.5], [-3.0, 4.0], [-6.0, -0.5]] {
            let x = project_polyhedron(&a, &b, &p).unwrap();
            assert!(a.iter().zip(&b).all(|(r, bi)| dot(r, &x) <= bi + 1e-10));
            let dist = norm(&sub(&x, &p));
            let mut best = f64::INFINITY;
            for i in -400..=400 {
                for j in -400..=400 {
                    let q = [i as f64 * 0.01, j as f64 * 0.01];
                    if a.iter().zip(&b).all(|(r, bi)| dot(r, &q) <= *bi) {
                        best = best.min(norm(&sub(&q, &p)));
                    }
                }
            }
            assert!(dist <= best + 1e-12 && dist >= best - 0.02, "{p:?}: {dist} vs {best}");
        }
    }

    #[test]
    fn polyhedron_simplex_projection() {
        // {x ≥ 0, y ≥ 0, x + y ≤ 1}
        let a = vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]];
        let b = vec![0.0, 0.0, 1.0];
        let x = project_polyhedron(&a, &b, &[2.0, 2.0]).unwrap();
        assert_abs_diff_eq!(x[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.5, epsilon = 1e-12);
        let x = project_polyhedron(&a, &b, &[-1.0, 3.0]).unwrap();
        assert_abs_diff_eq!(x[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-12);
        let x = project_polyhedron(&a, &b, &[0.2, 0.3]).unwrap();
        assert_eq!(x, vec![0.2, 0.3]);
    }

    #[test]
    fn cone_projection() {
        let rays = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        let x = project_cone(&rays, &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(x[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.5, epsilon = 1e-12);
        let x = project_cone(&rays, &[-1.0, -1.0]).unwrap();
        assert_abs_diff_eq!(x[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn parabola_projection_against_grid() {
        let (x, y) = project_parabola(0.0, -1.0);
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-12);
        for &(px, py) in &[(2.0, 0.5), (-1.5, -0.3), (0.3, 2.0), (3.0, 1.0)] {
            let (x, y) = project_parabola(px, py);
            let best = (0..=400_000)
                .map(|k| -4.0 + 8.0 * k as f64 / 400_000.0)
                .map(|t| (t - px).powi(2) + (t * t - py).powi(2))
                .fold(f64::INFINITY, f64::min);
            let got = (x - px).powi(2) + (y - py).powi(2);
            assert!(got <= best + 1e-9, "{px},{py}: {got} vs {best}");
        }
    }
}
