//! Dense helpers: Gram-Schmidt orthonormalization with canonical fallback,
//! sorted SVD and SPD solves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TrtError};

const DEPENDENCE_TOL: f64 = 1e-12;
const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 60;

/// Orthonormal basis Q and coefficients R with Q R ≈ A.
#[derive(Debug, Clone)]
pub struct Orthonormalized {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

fn project_out(q: &DMatrix<f64>, accepted: usize, v: &mut DVector<f64>, coeffs: &mut [f64]) {
    for _pass in 0..2 {
        for (j, coeff) in coeffs.iter_mut().enumerate().take(accepted) {
            let c = q.column(j).dot(v);
            v.axpy(-c, &q.column(j), 1.0);
            *coeff += c;
        }
    }
}

/// Canonical vector with the largest residual against the accepted columns.
fn canonical_completion(q: &DMatrix<f64>, accepted: usize) -> DVector<f64> {
    let m = q.nrows();
    let mut best = DVector::zeros(m);
    let mut best_norm = -1.0;
    let mut scratch = vec![0.0; accepted];
    for k in 0..m {
        let mut e = DVector::zeros(m);
        e[k] = 1.0;
        project_out(q, accepted, &mut e, &mut scratch);
        let n = e.norm();
        if n > best_norm + 1e-12 {
            best_norm = n;
            best = e;
        }
        if best_norm > 0.9 {
            break;
        }
    }
    let mut again = best.clone();
    project_out(q, accepted, &mut again, &mut scratch);
    let n = again.norm();
    again / n
}

/// Orthonormalizes the columns of `a` in order.
///
/// Numerically dependent columns are replaced in place by canonical
/// directions. When `a` has more columns than rows, dependent columns are
/// skipped instead and the basis is completed at the end, so that the
/// result always spans every input column. The number of output columns is
/// `min(a.ncols(), a.nrows())`.
pub fn orthonormalize(a: &DMatrix<f64>) -> Orthonormalized {
    let (m, n) = a.shape();
    let out = n.min(m);
    let scale = (0..n).map(|j| a.column(j).norm()).fold(0.0, f64::max);
    let tol = DEPENDENCE_TOL * scale;
    let mut q = DMatrix::zeros(m, out);
    let mut r = DMatrix::zeros(out, n);
    let skip_mode = n > m;
    let mut accepted = 0;
    let mut coeffs = vec![0.0; out];

    for j in 0..n {
        if accepted == out {
            // basis is complete; remaining columns only contribute coefficients
            for i in 0..out {
                r[(i, j)] = q.column(i).dot(&a.column(j));
            }
            continue;
        }
        coeffs.iter_mut().for_each(|c| *c = 0.0);
        let mut v = a.column(j).into_owned();
        project_out(&q, accepted, &mut v, &mut coeffs);
        let norm = v.norm();
        for i in 0..accepted {
            r[(i, j)] = coeffs[i];
        }
        if norm > tol && norm > 0.0 {
            q.set_column(accepted, &(v / norm));
            r[(accepted, j)] = norm;
            accepted += 1;
        } else if !skip_mode {
            let e = canonical_completion(&q, accepted);
            q.set_column(accepted, &e);
            r[(accepted, j)] = e.dot(&a.column(j));
            accepted += 1;
        }
    }
    while accepted < out {
        let e = canonical_completion(&q, accepted);
        q.set_column(accepted, &e);
        accepted += 1;
    }
    Orthonormalized { q, r }
}

/// Largest entry of |QᵀQ − I|.
pub fn orthonormality_defect(q: &DMatrix<f64>) -> f64 {
    let g = q.transpose() * q;
    let mut d: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            d = d.max((g[(i, j)] - target).abs());
        }
    }
    d
}

/// Thin SVD with singular values sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

/// Thin SVD by one-sided Jacobi rotations, singular values descending.
/// Accurate on rank-deficient input; U is completed to orthonormal
/// columns where singular values vanish.
pub fn sorted_svd(a: &DMatrix<f64>) -> Result<SortedSvd> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(TrtError::InvalidState(
            "SVD input has non-finite entries".into(),
        ));
    }
    if a.nrows() < a.ncols() {
        let t = sorted_svd(&a.transpose())?;
        return Ok(SortedSvd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = DMatrix::identity(n, n);
    let negligible = (f64::EPSILON * a.norm()).powi(2);
    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        converged = true;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if alpha.min(beta) <= negligible
                    || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt()
                {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut w, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
    }
    if !converged {
        return Err(TrtError::Internal("Jacobi SVD did not converge".into()));
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = DMatrix::zeros(a.nrows(), n);
    let mut sv = DMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        if norms[src] > 0.0 {
            u.set_column(dst, &(w.column(src) / norms[src]));
        }
        sv.set_column(dst, &v.column(src));
        sigma.push(norms[src]);
    }
    let u = orthonormalize(&u).q;
    Ok(SortedSvd { u, sigma, v: sv })
}

fn rotate_columns(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let x = m[(i, p)];
        let y = m[(i, q)];
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

/// Solves `m x = rhs` for symmetric positive definite `m`.
pub fn spd_solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = nalgebra::Cholesky::new(m.clone()).ok_or_else(|| {
        TrtError::Internal("projected implicit operator is not positive definite".into())
    })?;
    Ok(chol.solve(rhs))
}

/// Block-diagonal matrix with a 1×1 leading block.
pub fn block_diag_scalar(s: f64, rest: &DMatrix<f64>) -> DMatrix<f64> {
    let k = rest.nrows() + 1;
    let mut out = DMatrix::zeros(k, rest.ncols() + 1);
    out[(0, 0)] = s;
    out.view_mut((1, 1), rest.shape()).copy_from(rest);
    out
}
