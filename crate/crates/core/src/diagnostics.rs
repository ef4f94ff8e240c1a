//! CFL bound, energy and mass functionals, the Rosseland diffusion
//! reference solver and comparison norms.

use crate::angular::AngularOperators;
use crate::error::{invalid_arg, Result, TrtError};
use crate::mesh::{
    beta_fields, AbsorptionField, Boundary, MacroState, PhysicalParams, StaggeredGrid,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub energy: f64,
    pub mass: f64,
    pub rel_mass_error: f64,
    pub rank: usize,
    pub dt: f64,
}

/// Energy-stable step size and the quadrature node attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflBound {
    pub dt: f64,
    pub node: f64,
}

pub fn cfl_bound(
    params: &PhysicalParams,
    grid: &StaggeredGrid,
    angular: &AngularOperators,
    sigma: &AbsorptionField,
) -> Result<CflBound> {
    cfl_bound_raw(params.epsilon, params.c, grid.dx, angular, sigma.sigma_min)
}

pub(crate) fn cfl_bound_raw(
    epsilon: f64,
    c: f64,
    dx: f64,
    angular: &AngularOperators,
    sigma_min: f64,
) -> Result<CflBound> {
    if !(sigma_min > 0.0) {
        return Err(invalid_arg("sigma_min must be positive"));
    }
    let pref = 1.0 / (5.0 * c * angular.beta_n);
    let mut best: Option<CflBound> = None;
    for &mu in &angular.quadrature.nodes {
        if mu == 0.0 {
            continue;
        }
        let dt = pref * (2.0 * epsilon * dx / mu.abs() + sigma_min * dx * dx / (mu * mu));
        if best.is_none_or(|b| dt < b.dt) {
            best = Some(CflBound { dt, node: mu });
        }
    }
    best.ok_or_else(|| TrtError::Internal("no nonzero quadrature node".into()))
}

pub fn compute_cfl_dt(
    params: &PhysicalParams,
    grid: &StaggeredGrid,
    angular: &AngularOperators,
    sigma: &AbsorptionField,
) -> Result<f64> {
    Ok(cfl_bound(params, grid, angular, sigma)?.dt)
}

pub fn energy(
    macro_state: &MacroState,
    micro_norm_sq: f64,
    params: &PhysicalParams,
    grid: &StaggeredGrid,
) -> f64 {
    let eps2_c = params.epsilon * params.epsilon / params.c;
    let a = params.a_rad;
    let mut e = 0.0;
    for (&t, &h) in macro_state.temperature.iter().zip(&macro_state.h_meso) {
        let u = a * t + eps2_c * h;
        e += (u * u + 0.5 * a * params.c_nu * t * t) * grid.dx;
    }
    let micro_scale = params.epsilon / (std::f64::consts::SQRT_2 * params.c);
    e + micro_scale * micro_scale * micro_norm_sq
}

pub fn mass(macro_state: &MacroState, params: &PhysicalParams, grid: &StaggeredGrid) -> f64 {
    let eps2_c = params.epsilon * params.epsilon / params.c;
    macro_state
        .temperature
        .iter()
        .zip(&macro_state.h_meso)
        .map(|(&t, &h)| (params.a_rad * t + eps2_c * h + 0.5 * params.c_nu * t) * grid.dx)
        .sum()
}

pub fn relative_mass_error(m_n: f64, m_0: f64) -> Result<f64> {
    if m_0 == 0.0 {
        if m_n == 0.0 {
            return Ok(0.0);
        }
        return Err(invalid_arg(format!(
            "relative mass error undefined: initial mass is zero, current mass {m_n}"
        )));
    }
    Ok((m_n - m_0).abs() / m_0.abs())
}

/// Explicit Euler step of the discrete Rosseland diffusion equation.
pub fn rosseland_step(
    temperature: &[f64],
    params: &PhysicalParams,
    grid: &StaggeredGrid,
    sigma: &AbsorptionField,
    dt: f64,
    bc: Boundary,
) -> Result<Vec<f64>> {
    let n = grid.n_cells;
    if temperature.len() != n {
        return Err(invalid_arg("temperature length does not match the grid"));
    }
    if !(dt > 0.0) {
        return Err(invalid_arg(format!("time step must be positive, got {dt}")));
    }
    let m = MacroState::with_temperature(temperature.to_vec());
    let (beta_c, beta_i) = beta_fields(&m, params.emission, bc);
    let t_at = |k: isize| -> f64 {
        if k >= 0 && (k as usize) < n {
            temperature[k as usize]
        } else {
            match bc {
                Boundary::ZeroGhost => 0.0,
                Boundary::Periodic => temperature[k.rem_euclid(n as isize) as usize],
            }
        }
    };
    // with periodic wraparound the last cell couples through interface 0
    let face = |j: usize| -> (f64, f64) {
        match bc {
            Boundary::Periodic if j == n => (beta_i[0], sigma.at_interfaces[0]),
            _ => (beta_i[j], sigma.at_interfaces[j]),
        }
    };
    let a = params.a_rad;
    let pref = 2.0 * a * params.c / (3.0 * params.c_nu);
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (b_r, s_r) = face(i + 1);
        let (b_l, s_l) = face(i);
        let ti = temperature[i];
        let flux =
            b_r / s_r * (t_at(i as isize + 1) - ti) - b_l / s_l * (ti - t_at(i as isize - 1));
        let coeff = pref / (1.0 + 2.0 * a * beta_c[i] / params.c_nu);
        out.push(ti + dt * coeff * flux * inv_dx2);
    }
    Ok(out)
}

/// ‖u − v‖ / max(‖v‖, tiny) in the Δx-weighted L² norm.
pub fn l2_relative_difference(u: &[f64], v: &[f64], grid: &StaggeredGrid) -> Result<f64> {
    if u.len() != v.len() {
        return Err(invalid_arg(format!(
            "length mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let diff: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * grid.dx;
    let base: f64 = v.iter().map(|b| b * b).sum::<f64>() * grid.dx;
    Ok(diff.sqrt() / base.sqrt().max(f64::MIN_POSITIVE))
}
