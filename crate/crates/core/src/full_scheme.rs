//! Full modal macro-micro finite volume scheme and the pieces of it that
//! the low-rank schemes reuse (interface source, macro update).

use nalgebra::{DMatrix, DVector};

use crate::angular::{norm_p1, AngularOperators};
use crate::error::{invalid_arg, Result, TrtError};
use crate::mesh::{
    apply_diff, apply_diff_rows, beta_fields, AbsorptionField, Boundary, DiffKind, FullMicroState,
    MacroState, PhysicalParams, StaggeredGrid,
};

/// Discretization data shared by every scheme.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub grid: StaggeredGrid,
    pub params: PhysicalParams,
    pub sigma: AbsorptionField,
    pub angular: AngularOperators,
    pub bc: Boundary,
}

impl Workspace {
    pub fn new(
        grid: StaggeredGrid,
        params: PhysicalParams,
        sigma: AbsorptionField,
        angular: AngularOperators,
        bc: Boundary,
    ) -> Result<Self> {
        if sigma.at_centers.len() != grid.n_cells {
            return Err(invalid_arg(format!(
                "absorption has {} cells, grid has {}",
                sigma.at_centers.len(),
                grid.n_cells
            )));
        }
        Ok(Self {
            grid,
            params,
            sigma,
            angular,
            bc,
        })
    }

    pub fn n_moments(&self) -> usize {
        self.angular.n_moments
    }

    /// ε²/(cΔt)
    pub fn shift(&self, dt: f64) -> f64 {
        let eps = self.params.epsilon;
        eps * eps / (self.params.c * dt)
    }

    pub(crate) fn check_macro(&self, macro_state: &MacroState) -> Result<()> {
        let n = self.grid.n_cells;
        if macro_state.temperature.len() != n || macro_state.h_meso.len() != n {
            return Err(invalid_arg("macro state length does not match the grid"));
        }
        if !macro_state.is_finite() {
            return Err(TrtError::InvalidState(
                "macro state has non-finite entries".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid_arg(format!("time step must be positive, got {dt}")));
    }
    Ok(())
}

/// s_{j} = β_{j} δ⁰(acT)_{j} + ε² δ⁰h_{j} at every interface.
pub fn interface_source(macro_state: &MacroState, ws: &Workspace) -> Result<Vec<f64>> {
    let p = &ws.params;
    let act: Vec<f64> = macro_state
        .temperature
        .iter()
        .map(|t| p.a_rad * p.c * t)
        .collect();
    let d_t = apply_diff(DiffKind::DeltaZeroInterfaces, &act, &ws.grid, ws.bc)?;
    let d_h = apply_diff(
        DiffKind::DeltaZeroInterfaces,
        &macro_state.h_meso,
        &ws.grid,
        ws.bc,
    )?;
    let (_, beta_i) = beta_fields(macro_state, p.emission, ws.bc);
    let eps2 = p.epsilon * p.epsilon;
    Ok((0..d_t.len())
        .map(|j| beta_i[j] * d_t[j] + eps2 * d_h[j])
        .collect())
}

/// Asymptotic direction (β/σ) δ⁰(acT) at every interface.
pub fn ap_vector(macro_state: &MacroState, ws: &Workspace) -> Result<Vec<f64>> {
    let p = &ws.params;
    let act: Vec<f64> = macro_state
        .temperature
        .iter()
        .map(|t| p.a_rad * p.c * t)
        .collect();
    let d_t = apply_diff(DiffKind::DeltaZeroInterfaces, &act, &ws.grid, ws.bc)?;
    let (_, beta_i) = beta_fields(macro_state, p.emission, ws.bc);
    Ok((0..d_t.len())
        .map(|j| beta_i[j] * d_t[j] / ws.sigma.at_interfaces[j])
        .collect())
}

/// Explicit part of the micro update applied to a dense g:
/// ε²/(cΔt) g − ε (D⁻g A⁺ + D⁺g A⁻) − s bᵀ.
pub fn micro_explicit_rhs(
    g: &DMatrix<f64>,
    source: &[f64],
    ws: &Workspace,
    dt: f64,
) -> Result<DMatrix<f64>> {
    let dm = apply_diff_rows(DiffKind::DMinus, g, &ws.grid, ws.bc)?;
    let dp = apply_diff_rows(DiffKind::DPlus, g, &ws.grid, ws.bc)?;
    let eps = ws.params.epsilon;
    let mut rhs = g * ws.shift(dt);
    rhs -= (dm * &ws.angular.a_plus + dp * &ws.angular.a_minus) * eps;
    let s = DVector::from_column_slice(source);
    rhs -= s * ws.angular.b_vec.transpose();
    Ok(rhs)
}

/// h- and T-updates given the new first moment g₁ at the interfaces.
pub fn macro_update(
    macro_state: &MacroState,
    g1_new: &[f64],
    ws: &Workspace,
    dt: f64,
) -> Result<MacroState> {
    let p = &ws.params;
    let d0 = apply_diff(DiffKind::DZeroCenters, g1_new, &ws.grid, ws.bc)?;
    let (beta_c, _) = beta_fields(macro_state, p.emission, ws.bc);
    let shift = ws.shift(dt);
    let alpha = p.alpha();
    let half_norm = 0.5 * norm_p1();
    let n = ws.grid.n_cells;
    let mut h = Vec::with_capacity(n);
    let mut t = Vec::with_capacity(n);
    for i in 0..n {
        let sigma = ws.sigma.at_centers[i];
        let hi = (shift * macro_state.h_meso[i] - half_norm * d0[i])
            / (shift + sigma * (1.0 + p.a_rad * alpha * beta_c[i]));
        h.push(hi);
        t.push(macro_state.temperature[i] + dt * alpha * sigma * hi);
    }
    Ok(MacroState {
        temperature: t,
        h_meso: h,
    })
}

/// Micro update of the full scheme (implicit absorption, explicit transport).
pub fn full_micro_update(
    macro_state: &MacroState,
    micro: &FullMicroState,
    ws: &Workspace,
    dt: f64,
) -> Result<DMatrix<f64>> {
    let source = interface_source(macro_state, ws)?;
    let mut g = micro_explicit_rhs(&micro.g, &source, ws, dt)?;
    let shift = ws.shift(dt);
    for (j, mut row) in g.row_iter_mut().enumerate() {
        row /= shift + ws.sigma.at_interfaces[j];
    }
    Ok(g)
}

/// One step of the full scheme in the order g → h → T.
pub fn step_full(
    macro_state: &MacroState,
    micro: &FullMicroState,
    ws: &Workspace,
    dt: f64,
) -> Result<(MacroState, FullMicroState)> {
    check_dt(dt)?;
    ws.check_macro(macro_state)?;
    if micro.g.shape() != (ws.grid.n_interfaces(), ws.n_moments()) {
        return Err(invalid_arg(format!(
            "micro state shape {:?} does not match ({}, {})",
            micro.g.shape(),
            ws.grid.n_interfaces(),
            ws.n_moments()
        )));
    }
    if micro.g.iter().any(|v| !v.is_finite()) {
        return Err(TrtError::InvalidState(
            "micro state has non-finite entries".into(),
        ));
    }
    let g = full_micro_update(macro_state, micro, ws, dt)?;
    let g1: Vec<f64> = g.column(0).iter().copied().collect();
    let next = macro_update(macro_state, &g1, ws, dt)?;
    Ok((next, FullMicroState { g }))
}
