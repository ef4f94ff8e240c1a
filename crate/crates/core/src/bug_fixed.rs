//! Fixed-rank basis-update & Galerkin (BUG) integrator for the micro
//! variable, coupled to the macro h/T updates.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid_arg, Result, TrtError};
use crate::full_scheme::{check_dt, interface_source, macro_update, Workspace};
use crate::linalg::{orthonormalize, spd_solve};
use crate::mesh::{apply_diff_rows, DiffKind, LowRankMicroState, MacroState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BugStepReport {
    pub rank: usize,
    pub x_defect: f64,
    pub v_defect: f64,
    pub dt: f64,
}

impl BugStepReport {
    pub(crate) fn of(state: &LowRankMicroState, dt: f64) -> Self {
        let (x_defect, v_defect) = state.orthonormality_defects();
        Self {
            rank: state.rank(),
            x_defect,
            v_defect,
            dt,
        }
    }
}

pub(crate) fn check_state(state: &LowRankMicroState, ws: &Workspace) -> Result<()> {
    if state.x.nrows() != ws.grid.n_interfaces() || state.v.nrows() != ws.n_moments() {
        return Err(invalid_arg(format!(
            "low-rank factors X {:?}, V {:?} do not match grid/moments",
            state.x.shape(),
            state.v.shape()
        )));
    }
    if !state.is_finite() {
        return Err(TrtError::InvalidState(
            "low-rank factors have non-finite entries".into(),
        ));
    }
    Ok(())
}

/// Σ_j σ_j X_j X_jᵀ
pub(crate) fn sigma_gram(x: &DMatrix<f64>, ws: &Workspace) -> DMatrix<f64> {
    let mut sx = x.clone();
    for (j, mut row) in sx.row_iter_mut().enumerate() {
        row *= ws.sigma.at_interfaces[j];
    }
    x.transpose() * sx
}

/// Galerkin update of the coefficient matrix in fixed bases X, V starting
/// from S̃: (ε²/(cΔt) I + C) S = Xᵀ G(X S̃ Vᵀ) V.
pub(crate) fn galerkin_coefficients(
    x: &DMatrix<f64>,
    v: &DMatrix<f64>,
    s_tilde: &DMatrix<f64>,
    source: &[f64],
    ws: &Workspace,
    dt: f64,
) -> Result<DMatrix<f64>> {
    let shift = ws.shift(dt);
    let eps = ws.params.epsilon;
    let xt = x.transpose();
    let dmx = &xt * apply_diff_rows(DiffKind::DMinus, x, &ws.grid, ws.bc)?;
    let dpx = &xt * apply_diff_rows(DiffKind::DPlus, x, &ws.grid, ws.bc)?;
    let vt = v.transpose();
    let ap = &vt * &ws.angular.a_plus * v;
    let am = &vt * &ws.angular.a_minus * v;
    let xs = &xt * DVector::from_column_slice(source);
    let bv = ws.angular.b_vec.transpose() * v;

    let mut rhs = s_tilde * shift;
    rhs -= (dmx * s_tilde * ap + dpx * s_tilde * am) * eps;
    rhs -= xs * bv;
    let mut lhs = sigma_gram(x, ws);
    for i in 0..lhs.nrows() {
        lhs[(i, i)] += shift;
    }
    spd_solve(&lhs, &rhs)
}

/// K-step: returns K^{n+1} and an orthonormal basis of its columns.
pub fn k_step(
    state: &LowRankMicroState,
    macro_state: &MacroState,
    ws: &Workspace,
    dt: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_dt(dt)?;
    check_state(state, ws)?;
    let source = interface_source(macro_state, ws)?;
    k_step_with_source(state, &source, ws, dt)
}

fn k_step_with_source(
    state: &LowRankMicroState,
    source: &[f64],
    ws: &Workspace,
    dt: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let shift = ws.shift(dt);
    let eps = ws.params.epsilon;
    let v = &state.v;
    let k = &state.x * &state.s;
    let ap = v.transpose() * &ws.angular.a_plus * v;
    let am = v.transpose() * &ws.angular.a_minus * v;
    let dm = apply_diff_rows(DiffKind::DMinus, &k, &ws.grid, ws.bc)?;
    let dp = apply_diff_rows(DiffKind::DPlus, &k, &ws.grid, ws.bc)?;
    let bv = ws.angular.b_vec.transpose() * v;

    let mut k_new = &k * shift;
    k_new -= (dm * ap + dp * am) * eps;
    k_new -= DVector::from_column_slice(source) * bv;
    for (j, mut row) in k_new.row_iter_mut().enumerate() {
        row /= shift + ws.sigma.at_interfaces[j];
    }
    let x_new = orthonormalize(&k_new).q;
    Ok((k_new, x_new))
}

/// L-step: returns L^{n+1} and an orthonormal basis of its columns.
pub fn l_step(
    state: &LowRankMicroState,
    macro_state: &MacroState,
    ws: &Workspace,
    dt: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_dt(dt)?;
    check_state(state, ws)?;
    let source = interface_source(macro_state, ws)?;
    l_step_with_source(state, &source, ws, dt)
}

fn l_step_with_source(
    state: &LowRankMicroState,
    source: &[f64],
    ws: &Workspace,
    dt: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let shift = ws.shift(dt);
    let eps = ws.params.epsilon;
    let x = &state.x;
    let l = &state.v * state.s.transpose();
    let pm = apply_diff_rows(DiffKind::DMinus, x, &ws.grid, ws.bc)?.transpose() * x;
    let pp = apply_diff_rows(DiffKind::DPlus, x, &ws.grid, ws.bc)?.transpose() * x;
    let sx = DVector::from_column_slice(source).transpose() * x;

    let mut rhs = &l * shift;
    rhs -= (&ws.angular.a_plus * &l * pm + &ws.angular.a_minus * &l * pp) * eps;
    rhs -= &ws.angular.b_vec * sx;
    let mut lhs = sigma_gram(x, ws);
    for i in 0..lhs.nrows() {
        lhs[(i, i)] += shift;
    }
    // L (shift I + C) = rhs with symmetric C
    let l_new = spd_solve(&lhs, &rhs.transpose())?.transpose();
    let v_new = orthonormalize(&l_new).q;
    Ok((l_new, v_new))
}

/// S-step in the updated bases.
pub fn s_step(
    x_new: &DMatrix<f64>,
    v_new: &DMatrix<f64>,
    state_old: &LowRankMicroState,
    macro_state: &MacroState,
    ws: &Workspace,
    dt: f64,
) -> Result<DMatrix<f64>> {
    check_dt(dt)?;
    let source = interface_source(macro_state, ws)?;
    let s_tilde =
        x_new.transpose() * &state_old.x * &state_old.s * (state_old.v.transpose() * v_new);
    galerkin_coefficients(x_new, v_new, &s_tilde, &source, ws, dt)
}

/// One fixed-rank step: K and L from time-n data, then S, then h and T.
pub fn step_bug_fixed(
    macro_state: &MacroState,
    state: &LowRankMicroState,
    ws: &Workspace,
    dt: f64,
) -> Result<(MacroState, LowRankMicroState, BugStepReport)> {
    check_dt(dt)?;
    ws.check_macro(macro_state)?;
    check_state(state, ws)?;
    let source = interface_source(macro_state, ws)?;
    let (_, x_new) = k_step_with_source(state, &source, ws, dt)?;
    let (_, v_new) = l_step_with_source(state, &source, ws, dt)?;
    let s_tilde = x_new.transpose() * &state.x * &state.s * (state.v.transpose() * &v_new);
    let s_new = galerkin_coefficients(&x_new, &v_new, &s_tilde, &source, ws, dt)?;
    let next = LowRankMicroState::new(x_new, s_new, v_new)?;
    let macro_next = macro_update(macro_state, &next.first_moment(), ws, dt)?;
    let report = BugStepReport::of(&next, dt);
    Ok((macro_next, next, report))
}
