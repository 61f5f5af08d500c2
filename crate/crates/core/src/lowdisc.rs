//! Halton sequences and deterministic sphere grids.

use crate::linalg::norm;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Points `1..=n` of the `d`-dimensional Halton sequence in `[0,1)ᵈ`.
pub fn halton(n: usize, d: usize) -> Vec<Vec<f64>> {
    assert!(d <= PRIMES.len(), "Halton dimension capped at {}", PRIMES.len());
    (1..=n as u64)
        .map(|i| (0..d).map(|k| radical_inverse(i, PRIMES[k])).collect())
        .collect()
}

/// Deterministic unit vectors in `ℝᵏ`: `±1` for `k = 1`, `resolution`
/// equally spaced angles for `k = 2`, otherwise Halton points mapped
/// through the inverse normal CDF and normalized (`resolution^(k−1)` of them).
pub fn sphere_grid(k: usize, resolution: usize) -> Vec<Vec<f64>> {
    match k {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..resolution)
            .map(|j| {
                let a = 2.0 * std::f64::consts::PI * j as f64 / resolution as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let n = resolution.saturating_pow(k as u32 - 1).min(200_000);
            let mut out: Vec<Vec<f64>> = (0..k)
                .flat_map(|i| {
                    let mut e = vec![0.0; k];
                    e[i] = 1.0;
                    let mut f = vec![0.0; k];
                    f[i] = -1.0;
                    [e, f]
                })
                .collect();
            for p in halton(n, k) {
                let g: Vec<f64> = p.iter().map(|u| inverse_normal(*u)).collect();
                let r = norm(&g);
                if r > 1e-12 {
                    out.push(g.iter().map(|v| v / r).collect());
                }
            }
            out
        }
    }
}

/// Acklam's rational approximation of the standard normal quantile.
pub fn inverse_normal(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let p = p.clamp(1e-300, 1.0 - 1e-16);
    let lo = 0.02425;
    if p < lo {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p > 1.0 - lo {
        -inverse_normal(1.0 - p)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn van_der_corput() {
        let v: Vec<f64> = (1..=4).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
        assert_abs_diff_eq!(radical_inverse(5, 3), 2.0 / 3.0 + 1.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn sphere_points_are_unit() {
        for k in 1..=4 {
            for v in sphere_grid(k, 8) {
                assert_abs_diff_eq!(norm(&v), 1.0, epsilon = 1e-12);
            }
        }
        assert_eq!(sphere_grid(2, 8).len(), 8);
    }

    #[test]
    fn quantile_matches_known_values() {
        assert_abs_diff_eq!(inverse_normal(0.5), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(inverse_normal(0.975), 1.959963984540054, epsilon = 1e-8);
        assert_abs_diff_eq!(inverse_normal(0.001), -3.090232306167813, epsilon = 1e-8);
    }
}
