//! Thin wrappers over `faer` for the dense factorizations the pipeline needs.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Largest absolute entry.
pub fn max_abs(a: MatRef<'_, f64>) -> f64 {
    let mut m = 0.0_f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].abs());
        }
    }
    m
}

/// Maximum absolute row sum, an upper bound on the spectral radius.
pub fn norm_inf(a: MatRef<'_, f64>) -> f64 {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// max |A − Aᵀ| (or max |A + Aᵀ| when `anti`).
pub fn symmetry_defect(a: MatRef<'_, f64>, anti: bool) -> f64 {
    let sign = if anti { 1.0 } else { -1.0 };
    let mut d = 0.0_f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            d = d.max((a[(i, j)] + sign * a[(j, i)]).abs());
        }
    }
    d
}

pub fn mat_vec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![0.0; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let col = a.col(j);
        for (yi, &aij) in y.iter_mut().zip(col.iter()) {
            *yi += aij * xj;
        }
    }
    y
}

pub fn column(x: &[f64]) -> Mat<f64> {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn max_abs_vec(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.
pub fn symmetric_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::EigenSolver(format!("symmetric eigensolver: {e:?}")))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, evd.U().to_owned()))
}

/// Complex eigenvalues and (unit-norm) eigenvectors of a real square matrix.
pub fn general_eigen(a: MatRef<'_, f64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let evd = a
        .eigen()
        .map_err(|e| Error::EigenSolver(format!("nonsymmetric eigensolver: {e:?}")))?;
    let values: Vec<c64> = evd.S().column_vector().iter().copied().collect();
    let mut vectors = evd.U().to_owned();
    for j in 0..vectors.ncols() {
        let nrm = vectors.col(j).norm_l2();
        if nrm > 0.0 {
            for i in 0..vectors.nrows() {
                vectors[(i, j)] /= nrm;
            }
        }
    }
    Ok((values, vectors))
}

/// Full SVD: `(U, singular values descending, V)`.
pub fn svd(a: MatRef<'_, f64>) -> Result<(Mat<f64>, Vec<f64>, Mat<f64>)> {
    let s = a
        .svd()
        .map_err(|e| Error::EigenSolver(format!("svd: {e:?}")))?;
    Ok((
        s.U().to_owned(),
        s.S().column_vector().iter().copied().collect(),
        s.V().to_owned(),
    ))
}

pub fn singular_values(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    a.singular_values()
        .map_err(|e| Error::EigenSolver(format!("svd: {e:?}")))
}

/// Orthonormal basis for the column span of `a`, dropping directions whose
/// singular value falls below `rel_tol` times the largest.
pub fn orthonormal_basis(a: MatRef<'_, f64>, rel_tol: f64) -> Result<Mat<f64>> {
    if a.ncols() == 0 {
        return Ok(Mat::zeros(a.nrows(), 0));
    }
    let s = a
        .thin_svd()
        .map_err(|e| Error::EigenSolver(format!("svd: {e:?}")))?;
    let sv: Vec<f64> = s.S().column_vector().iter().copied().collect();
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&v| v > rel_tol * top).count();
    Ok(s.U().subcols(0, rank).to_owned())
}

/// Sine of the largest principal angle between span(`basis`) (orthonormal
/// columns) and span(`candidates`).
pub fn max_principal_sine(basis: MatRef<'_, f64>, candidates: MatRef<'_, f64>) -> Result<f64> {
    let cand = orthonormal_basis(candidates, 1e-12)?;
    if cand.ncols() == 0 {
        return Ok(0.0);
    }
    // Residual of the candidates after projection onto `basis`.
    let proj = basis * (basis.transpose() * &cand);
    let resid = &cand - &proj;
    let sv = singular_values(resid.as_ref())?;
    Ok(sv.first().copied().unwrap_or(0.0).min(1.0))
}

/// Solves `A y + μ k = b`, `kᵀ y = 0`: the solution of `A y = b` on the
/// orthogonal complement of a known (approximate) kernel vector `k`.
///
/// Returns `(y, μ)`; μ ≈ 0 when `b ⟂ k`.
pub fn bordered_solve(a: MatRef<'_, f64>, kernel: &[f64], rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(kernel.len(), n);
    assert_eq!(rhs.len(), n);
    let scale = norm_inf(a).max(f64::MIN_POSITIVE);
    let knorm = norm(kernel);
    if knorm == 0.0 {
        return Err(Error::KernelDegeneracy("zero kernel vector".into()));
    }
    // Scale the border so the system stays balanced.
    let w = scale / knorm;
    let bordered = Mat::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => a[(i, j)],
        (true, false) => w * kernel[i],
        (false, true) => w * kernel[j],
        (false, false) => 0.0,
    });
    let lu = bordered.partial_piv_lu();
    let mut b = Mat::zeros(n + 1, 1);
    for i in 0..n {
        b[(i, 0)] = rhs[i];
    }
    let x = lu.solve(&b);

    let u = lu.U();
    let (mut pmin, mut pmax) = (f64::INFINITY, 0.0_f64);
    for i in 0..n + 1 {
        let d = u[(i, i)].abs();
        pmin = pmin.min(d);
        pmax = pmax.max(d);
    }
    if pmin.is_nan() || pmin <= 1e-14 * pmax {
        return Err(Error::KernelDegeneracy(format!(
            "bordered system is singular (pivot ratio {:e})",
            pmin / pmax
        )));
    }
    let y: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::KernelDegeneracy("non-finite solution".into()));
    }
    let mu = w * x[(n, 0)];
    Ok((y, mu))
}

/// Symmetric 2×2 eigenvalues, ascending.
pub fn sym2_eigenvalues(a11: f64, a12: f64, a22: f64) -> [f64; 2] {
    let mean = 0.5 * (a11 + a22);
    let half_diff = 0.5 * (a11 - a22);
    let r = half_diff.hypot(a12);
    // The smaller-magnitude root comes from det / big, free of cancellation.
    let det = a11 * a22 - a12 * a12;
    let big = if mean >= 0.0 { mean + r } else { mean - r };
    let small = if big != 0.0 { det / big } else { mean - r };
    let mut v = [big, small];
    v.sort_by(|a, b| a.total_cmp(b));
    v
}
