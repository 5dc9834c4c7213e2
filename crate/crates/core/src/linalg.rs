//! Small dense-vector helpers used throughout the crate.
//!
//! Problems here are desk scale (d rarely above 16), so plain `Vec<f64>`
//! arithmetic is sufficient; nalgebra is used only for the spectral and
//! eigenvalue computations behind operator-modulus checks.

use nalgebra::DMatrix;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `a + s * b`, elementwise.
pub(crate) fn add_scaled(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub(crate) fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Largest singular value of a square matrix given in row-major nested form.
pub(crate) fn spectral_norm(matrix: &[Vec<f64>]) -> f64 {
    let d = matrix.len();
    let m = DMatrix::from_fn(d, d, |i, j| matrix[i][j]);
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Smallest eigenvalue of the symmetric part (M + M^T)/2.
pub(crate) fn min_symmetric_eigenvalue(matrix: &[Vec<f64>]) -> f64 {
    let d = matrix.len();
    let m = DMatrix::from_fn(d, d, |i, j| 0.5 * (matrix[i][j] + matrix[j][i]));
    m.symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalue of the symmetric part of `A^T B` for square `A`, `B`.
pub(crate) fn min_coupling_eigenvalue(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let d = a.len();
    let ma = DMatrix::from_fn(d, d, |i, j| a[i][j]);
    let mb = DMatrix::from_fn(d, d, |i, j| b[i][j]);
    let p = ma.transpose() * mb;
    let sym = DMatrix::from_fn(d, d, |i, j| 0.5 * (p[(i, j)] + p[(j, i)]));
    sym.symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Least-squares line fit through `(x, y)` points.
///
/// Returns `(slope, intercept, r_squared)`. For a perfectly flat series the
/// slope is 0 and `r_squared` is reported as 1 (the fit is exact).
pub(crate) fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return (0.0, sy / n, 1.0);
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    (slope, intercept, r2)
}
