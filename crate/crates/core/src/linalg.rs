//! Small dense linear-algebra helpers on plain slices, plus the SVD and
//! eigen routines borrowed from nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], k: f64) -> Vec<f64> {
    a.iter().map(|x| x * k).collect()
}

/// `a + k·b`
pub fn axpy(a: &[f64], k: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + k * y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

pub fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `u⊤ m v`
pub fn quad_form(m: &[Vec<f64>], u: &[f64], v: &[f64]) -> f64 {
    dot(u, &mat_vec(m, v))
}

pub fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = 1.0;
    e
}

pub fn to_dmatrix(m: &[Vec<f64>]) -> DMatrix<f64> {
    let r = m.len();
    let c = m.first().map_or(0, Vec::len);
    DMatrix::from_fn(r, c, |i, j| m[i][j])
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Orthonormal bases of the kernel of the stacked `rows` (each of length `d`)
/// and of its orthogonal complement. Singular values at most `rel_tol` times
/// the largest count as zero.
pub fn kernel_and_complement(rows: &[Vec<f64>], d: usize, rel_tol: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    // Pad with zero rows so the SVD returns all of V.
    let n = rows.len().max(d);
    let m = DMatrix::from_fn(n, d, |i, j| rows.get(i).map_or(0.0, |r| r[j]));
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut kernel = Vec::new();
    let mut range = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let v: Vec<f64> = v_t.row(k).iter().copied().collect();
        if smax == 0.0 || s <= rel_tol * smax {
            kernel.push(v);
        } else {
            range.push(v);
        }
    }
    (kernel, range)
}

/// Projection of `p` onto the span of the orthonormal `basis`.
pub fn project_span(basis: &[Vec<f64>], p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    for e in basis {
        let k = dot(e, p);
        for (o, ei) in out.iter_mut().zip(e) {
            *o += k * ei;
        }
    }
    out
}

/// Symmetric eigen-decomposition, eigenvalues ascending.
pub fn sym_eigen(m: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = m.len();
    if d == 0 {
        return (Vec::new(), Vec::new());
    }
    let eig = SymmetricEigen::new(to_dmatrix(m));
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = idx
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (vals, vecs)
}

/// Square-root factor `L` with `L L⊤ = m` for a PSD matrix (singular allowed).
/// Returns `None` when an eigenvalue is below `-tol·‖m‖`.
pub fn psd_factor(m: &[Vec<f64>], tol: f64) -> Option<Vec<Vec<f64>>> {
    let d = m.len();
    let scale = m.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    let (vals, vecs) = sym_eigen(m);
    if vals.iter().any(|&l| l < -tol * scale.max(f64::MIN_POSITIVE)) {
        return None;
    }
    let mut l = vec![vec![0.0; d]; d];
    for (k, (lam, v)) in vals.iter().zip(&vecs).enumerate() {
        let s = lam.max(0.0).sqrt();
        for i in 0..d {
            l[i][k] = v[i] * s;
        }
    }
    Some(l)
}

/// Solves `m x = rhs` for square nonsingular `m`.
pub fn solve(m: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let lu = to_dmatrix(m).lu();
    lu.solve(&DVector::from_column_slice(rhs))
        .map(|x| x.iter().copied().collect())
}
