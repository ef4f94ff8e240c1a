//! Rank-adaptive asymptotic-preserving BUG integrator: AP basis
//! augmentation, Galerkin step in the augmented bases and a truncation
//! that keeps the first-moment direction untouched.

use nalgebra::{DMatrix, DVector};

use crate::bug_fixed::{check_state, galerkin_coefficients, k_step, l_step, BugStepReport};
use crate::error::{invalid_arg, Result};
use crate::full_scheme::{ap_vector, check_dt, interface_source, macro_update, Workspace};
use crate::linalg::{block_diag_scalar, orthonormalize, sorted_svd};
use crate::mesh::{LowRankMicroState, MacroState};

const DEGENERATE_AP_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct AugmentedFactors {
    pub x_hat: DMatrix<f64>,
    pub v_hat: DMatrix<f64>,
    pub m_hat: DMatrix<f64>,
    pub n_hat: DMatrix<f64>,
    pub w_ap: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationConfig {
    pub theta_rel: f64,
    pub max_rank: usize,
}

impl TruncationConfig {
    pub fn new(theta_rel: f64, max_rank: usize) -> Result<Self> {
        if !(theta_rel >= 0.0) || !theta_rel.is_finite() {
            return Err(invalid_arg(format!(
                "theta_rel must be nonnegative, got {theta_rel}"
            )));
        }
        if max_rank == 0 {
            return Err(invalid_arg("max_rank must be at least 1"));
        }
        Ok(Self {
            theta_rel,
            max_rank,
        })
    }

    /// theta_rel with max_rank = 2N.
    pub fn with_default_cap(theta_rel: f64, n_moments: usize) -> Result<Self> {
        Self::new(theta_rel, 2 * n_moments)
    }
}

/// Augmented dimension min(2r+1, N, Nx+1).
pub fn augmented_dim(rank: usize, ws: &Workspace) -> usize {
    (2 * rank + 1)
        .min(ws.n_moments())
        .min(ws.grid.n_interfaces())
}

fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks[0].nrows();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), b.shape()).copy_from(b);
        c += b.ncols();
    }
    out
}

fn basis_of(columns: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let q = orthonormalize(columns).q;
    if q.ncols() > dim {
        // wide inputs already span everything; keep the leading directions
        q.columns(0, dim).into_owned()
    } else {
        q
    }
}

pub fn augment_bases(
    state: &LowRankMicroState,
    macro_state: &MacroState,
    ws: &Workspace,
    dt: f64,
) -> Result<AugmentedFactors> {
    check_dt(dt)?;
    check_state(state, ws)?;
    let (k_new, _) = k_step(state, macro_state, ws, dt)?;
    let (l_new, _) = l_step(state, macro_state, ws, dt)?;
    let w_ap = ap_vector(macro_state, ws)?;
    let dim = augmented_dim(state.rank(), ws);

    let w_col = DMatrix::from_column_slice(w_ap.len(), 1, &w_ap);
    let x_hat = basis_of(&hstack(&[&w_col, &k_new, &state.x]), dim);
    let b_col = DMatrix::from_column_slice(ws.n_moments(), 1, ws.angular.b_vec.as_slice());
    let v_hat = basis_of(&hstack(&[&b_col, &l_new, &state.v]), dim);

    let m_hat = x_hat.transpose() * &state.x;
    let n_hat = v_hat.transpose() * &state.v;
    Ok(AugmentedFactors {
        x_hat,
        v_hat,
        m_hat,
        n_hat,
        w_ap,
    })
}

/// Galerkin step in the augmented bases, starting from M̂ Sⁿ N̂ᵀ.
pub fn galerkin_s_hat(
    aug: &AugmentedFactors,
    state_old: &LowRankMicroState,
    macro_state: &MacroState,
    ws: &Workspace,
    dt: f64,
) -> Result<DMatrix<f64>> {
    check_dt(dt)?;
    let source = interface_source(macro_state, ws)?;
    let s_tilde = &aug.m_hat * &state_old.s * aug.n_hat.transpose();
    galerkin_coefficients(&aug.x_hat, &aug.v_hat, &s_tilde, &source, ws, dt)
}

/// Intermediate factors of the truncation, exposed for verification.
#[derive(Debug, Clone)]
pub struct TruncationParts {
    pub s_ap: f64,
    pub x_ap: DVector<f64>,
    pub s_rem_hat: DMatrix<f64>,
    pub u_hat: DMatrix<f64>,
    pub w_hat: DMatrix<f64>,
    pub sigma_rem: Vec<f64>,
    pub r2: DMatrix<f64>,
    pub kept: usize,
    pub state: LowRankMicroState,
}

/// Number of retained remainder directions for a sorted spectrum.
pub fn truncation_rank(sigma: &[f64], theta_rel: f64) -> usize {
    if sigma.is_empty() {
        return 0;
    }
    let theta = theta_rel * sigma[0];
    let mut tail_sq: f64 = sigma.iter().map(|s| s * s).sum();
    for (r, s) in sigma.iter().enumerate() {
        tail_sq -= s * s;
        if tail_sq.max(0.0).sqrt() <= theta {
            return r + 1;
        }
    }
    sigma.len()
}

pub fn ap_truncate_parts(
    aug: &AugmentedFactors,
    s_hat: &DMatrix<f64>,
    cfg: &TruncationConfig,
) -> Result<TruncationParts> {
    let m = aug.x_hat.ncols();
    if s_hat.shape() != (m, m) || aug.v_hat.ncols() != m {
        return Err(invalid_arg(format!(
            "augmented coefficient shape {:?} does not match bases ({m} columns)",
            s_hat.shape()
        )));
    }
    let k_hat = &aug.x_hat * s_hat;
    let k_ap = k_hat.column(0).into_owned();
    let v_ap = aug.v_hat.column(0).into_owned();
    let n_rows = aug.x_hat.nrows();
    let rank_cap = n_rows.min(aug.v_hat.nrows()).min(cfg.max_rank);

    let rem_cols = m - 1;
    let (x_rem, s_rem_hat, u_hat, w_hat, sigma_rem, kept) = if rem_cols == 0 || rank_cap <= 1 {
        (
            DMatrix::zeros(n_rows, 0),
            DMatrix::zeros(rem_cols, rem_cols),
            DMatrix::zeros(rem_cols, 0),
            DMatrix::zeros(rem_cols, 0),
            Vec::new(),
            0,
        )
    } else {
        let k_rem = k_hat.columns(1, rem_cols).into_owned();
        let qr = orthonormalize(&k_rem);
        let svd = sorted_svd(&qr.r)?;
        let r_star = truncation_rank(&svd.sigma, cfg.theta_rel)
            .max(1)
            .min(rank_cap - 1);
        let u = svd.u.columns(0, r_star).into_owned();
        let w = svd.v.columns(0, r_star).into_owned();
        let x_rem = &qr.q * &u;
        (x_rem, qr.r, u, w, svd.sigma, r_star)
    };

    let k_norm = k_hat.norm();
    let ap_norm = k_ap.norm();
    let (x_ap, s_ap) = if ap_norm > DEGENERATE_AP_TOL * k_norm && ap_norm > 0.0 {
        (k_ap / ap_norm, ap_norm)
    } else {
        // any unit direction outside span(X_rem)
        let basis = orthonormalize(&hstack(&[&x_rem, &DMatrix::zeros(n_rows, 1)])).q;
        (basis.column(kept).into_owned(), 0.0)
    };

    let joined = hstack(&[
        &DMatrix::from_column_slice(n_rows, 1, x_ap.as_slice()),
        &x_rem,
    ]);
    let qr2 = orthonormalize(&joined);
    let s_rem = DMatrix::from_fn(kept, kept, |i, j| if i == j { sigma_rem[i] } else { 0.0 });
    let s_new = &qr2.r * block_diag_scalar(s_ap, &s_rem);
    let v_rem = aug.v_hat.columns(1, rem_cols).into_owned();
    let w_new = &v_rem * &w_hat;
    let v_new = hstack(&[
        &DMatrix::from_column_slice(v_ap.len(), 1, v_ap.as_slice()),
        &w_new,
    ]);
    let state = LowRankMicroState::new(qr2.q, s_new, v_new)?;
    Ok(TruncationParts {
        s_ap,
        x_ap,
        s_rem_hat,
        u_hat,
        w_hat,
        sigma_rem,
        r2: qr2.r,
        kept,
        state,
    })
}

pub fn ap_truncate(
    aug: &AugmentedFactors,
    s_hat: &DMatrix<f64>,
    cfg: &TruncationConfig,
) -> Result<LowRankMicroState> {
    Ok(ap_truncate_parts(aug, s_hat, cfg)?.state)
}

pub fn step_bug_adaptive(
    macro_state: &MacroState,
    state: &LowRankMicroState,
    ws: &Workspace,
    dt: f64,
    cfg: &TruncationConfig,
) -> Result<(MacroState, LowRankMicroState, BugStepReport)> {
    check_dt(dt)?;
    ws.check_macro(macro_state)?;
    check_state(state, ws)?;
    let aug = augment_bases(state, macro_state, ws, dt)?;
    let s_hat = galerkin_s_hat(&aug, state, macro_state, ws, dt)?;
    let next = ap_truncate(&aug, &s_hat, cfg)?;
    let macro_next = macro_update(macro_state, &next.first_moment(), ws, dt)?;
    let report = BugStepReport::of(&next, dt);
    Ok((macro_next, next, report))
}
