//! Oracle comparisons on the hand-sized instances. Each returns the largest
//! absolute deviation between the library and the scalar oracle.

use nalgebra::DMatrix;

use trt_core::angular::build_angular_operators;
use trt_core::bug_fixed::{l_step, s_step};
use trt_core::diagnostics::rosseland_step;
use trt_core::mesh::{
    AbsorptionField, Boundary, FullMicroState, LowRankMicroState, MacroState, PhysicalParams,
    StaggeredGrid,
};
use trt_core::{step_full, Workspace};

use super::fixtures::*;
use super::oracles;

fn small_workspace(n_cells: usize, dx: f64, n: usize, eps: f64, sigma_c: Vec<f64>) -> Workspace {
    let grid = StaggeredGrid::new(0.0, dx * n_cells as f64, n_cells).unwrap();
    let sigma = AbsorptionField::from_centers(sigma_c).unwrap();
    Workspace::new(
        grid,
        PhysicalParams::unit(eps).unwrap(),
        sigma,
        build_angular_operators(n).unwrap(),
        Boundary::ZeroGhost,
    )
    .unwrap()
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Three cells, two moments, one full step.
pub fn step_full_instance(
    t: &[f64],
    h: &[f64],
    g: &[[f64; 2]],
    sigma_c: &[f64],
    eps: f64,
    dt: f64,
) -> f64 {
    let ws = small_workspace(3, 1.0, 2, eps, sigma_c.to_vec());
    let macro_state = MacroState {
        temperature: t.to_vec(),
        h_meso: h.to_vec(),
    };
    let micro = FullMicroState {
        g: DMatrix::from_fn(4, 2, |j, k| g[j][k]),
    };
    let (m, f) = step_full(&macro_state, &micro, &ws, dt).unwrap();
    let o = oracles::full_step_two_moments(t, h, g, sigma_c, &ws.sigma.at_interfaces, eps, 1.0, dt);
    let mut dev = max_dev(&m.temperature, &o.t).max(max_dev(&m.h_meso, &o.h));
    for j in 0..4 {
        for k in 0..2 {
            dev = dev.max((f.g[(j, k)] - o.g[j][k]).abs());
        }
    }
    dev
}

pub fn step_full_hand() -> f64 {
    step_full_instance(
        &[0.0, 1.0, 0.0],
        &[0.0; 3],
        &[[0.0; 2]; 4],
        &[1.0; 3],
        1.0,
        0.1,
    )
}

pub fn step_full_random(seed: u64) -> f64 {
    let mut r = rng(seed);
    let t: Vec<f64> = random_vec(&mut r, 3).iter().map(|v| 1.0 + v).collect();
    let h = random_vec(&mut r, 3);
    let g: Vec<[f64; 2]> = (0..4)
        .map(|_| {
            let v = random_vec(&mut r, 2);
            [v[0], v[1]]
        })
        .collect();
    let sigma: Vec<f64> = random_vec(&mut r, 3).iter().map(|v| 1.5 + v).collect();
    let eps = [1.0, 0.3, 1e-3][(seed % 3) as usize];
    step_full_instance(&t, &h, &g, &sigma, eps, 0.05)
}

/// Two cells (three interfaces), two moments, rank one.
pub fn l_step_instance(seed: u64) -> f64 {
    let mut r = rng(seed);
    let sigma_c: Vec<f64> = random_vec(&mut r, 2).iter().map(|v| 1.5 + v).collect();
    let eps = [1.0, 0.5, 1e-2][(seed % 3) as usize];
    let ws = small_workspace(2, 1.0, 2, eps, sigma_c);
    let x = random_orthonormal(&mut r, 3, 1);
    let v = random_orthonormal(&mut r, 2, 1);
    let s = random_vec(&mut r, 1)[0] * 3.0;
    let t: Vec<f64> = random_vec(&mut r, 2).iter().map(|v| 1.0 + v).collect();
    let h = random_vec(&mut r, 2);
    let state =
        LowRankMicroState::new(x.clone(), DMatrix::from_element(1, 1, s), v.clone()).unwrap();
    let macro_state = MacroState {
        temperature: t.clone(),
        h_meso: h.clone(),
    };
    let dt = 0.1;
    let (l, _) = l_step(&state, &macro_state, &ws, dt).unwrap();
    let si = &ws.sigma.at_interfaces;
    let o = oracles::l_step_rank_one(
        [x[0], x[1], x[2]],
        s,
        [v[0], v[1]],
        &t,
        &h,
        [si[0], si[1], si[2]],
        eps,
        1.0,
        dt,
    );
    (l[0] - o[0]).abs().max((l[1] - o[1]).abs())
}

/// Galerkin S-step on random bases against the dense projection.
pub fn s_step_instance(seed: u64, n_cells: usize, n: usize, rank: usize) -> f64 {
    let mut r = rng(seed);
    let sigma_c: Vec<f64> = random_vec(&mut r, n_cells)
        .iter()
        .map(|v| 1.5 + v)
        .collect();
    let eps = [1.0, 0.2, 1e-3][(seed % 3) as usize];
    let dx = 0.5;
    let ws = small_workspace(n_cells, dx, n, eps, sigma_c);
    let old = random_low_rank(&mut r, n_cells + 1, n, rank);
    let x_new = random_orthonormal(&mut r, n_cells + 1, rank);
    let v_new = random_orthonormal(&mut r, n, rank);
    let t: Vec<f64> = random_vec(&mut r, n_cells)
        .iter()
        .map(|v| 1.0 + v)
        .collect();
    let h = random_vec(&mut r, n_cells);
    let macro_state = MacroState {
        temperature: t.clone(),
        h_meso: h.clone(),
    };
    let dt = 0.07;
    let s = s_step(&x_new, &v_new, &old, &macro_state, &ws, dt).unwrap();
    let s_tilde = x_new.transpose() * &old.x * &old.s * old.v.transpose() * &v_new;
    let o = oracles::dense_projection(
        &x_new,
        &v_new,
        &s_tilde,
        &t,
        &h,
        &ws.sigma.at_interfaces,
        &ws.angular.a_plus,
        &ws.angular.a_minus,
        eps,
        dx,
        dt,
    );
    (s - o).amax()
}

pub fn rosseland_instance(t: &[f64], sigma_c: &[f64], dt: f64) -> f64 {
    let n = t.len();
    let grid = StaggeredGrid::new(0.0, n as f64, n).unwrap();
    let sigma = AbsorptionField::from_centers(sigma_c.to_vec()).unwrap();
    let out = rosseland_step(
        t,
        &PhysicalParams::unit(1.0).unwrap(),
        &grid,
        &sigma,
        dt,
        Boundary::ZeroGhost,
    )
    .unwrap();
    max_dev(&out, &oracles::rosseland(t, &sigma.at_interfaces, 1.0, dt))
}

pub fn rosseland_hand() -> f64 {
    let out = {
        let grid = StaggeredGrid::new(0.0, 3.0, 3).unwrap();
        let sigma = AbsorptionField::constant(&grid, 1.0).unwrap();
        rosseland_step(
            &[0.0, 1.0, 0.0],
            &PhysicalParams::unit(1.0).unwrap(),
            &grid,
            &sigma,
            0.1,
            Boundary::ZeroGhost,
        )
        .unwrap()
    };
    let hand = [1.0 / 45.0, 1.0 - 2.0 / 45.0, 1.0 / 45.0];
    max_dev(&out, &hand).max(rosseland_instance(&[0.0, 1.0, 0.0], &[1.0; 3], 0.1))
}

pub fn rosseland_random(seed: u64) -> f64 {
    let mut r = rng(seed);
    let n = 3 + (seed % 5) as usize;
    let t: Vec<f64> = random_vec(&mut r, n).iter().map(|v| 1.0 + v).collect();
    let sigma: Vec<f64> = random_vec(&mut r, n).iter().map(|v| 1.5 + v).collect();
    rosseland_instance(&t, &sigma, 0.05)
}

/// Relative deviation of the micro state after one step at ε = 1e-6 from
/// the limit −(β/σ) δ⁰(acT) bᵀ at interior interfaces, for the full,
/// fixed-rank and adaptive schemes.
pub fn ap_limit_defects(nx: usize, n: usize) -> [f64; 3] {
    use trt_core::bug_adaptive::{step_bug_adaptive, TruncationConfig};
    use trt_core::bug_fixed::step_bug_fixed;
    use trt_core::full_scheme::ap_vector;
    let ws = workspace(nx, n, 1e-6, Boundary::ZeroGhost);
    let temperature: Vec<f64> = ws
        .grid
        .centers
        .iter()
        .map(|&x| 1.0 + (-(x / 0.3).powi(2)).exp())
        .collect();
    let macro_state = MacroState::with_temperature(temperature);
    let w = ap_vector(&macro_state, &ws).unwrap();
    let target = -nalgebra::DVector::from_column_slice(&w) * ws.angular.b_vec.transpose();
    let dt = trt_core::diagnostics::compute_cfl_dt(&ws.params, &ws.grid, &ws.angular, &ws.sigma)
        .unwrap();
    let defect = |g: &DMatrix<f64>| {
        let inner = 1..nx;
        let scale = target.rows(1, nx - 1).amax();
        inner
            .map(|j| (g.row(j) - target.row(j)).amax())
            .fold(0.0, f64::max)
            / scale
    };
    let full = FullMicroState::zeros(nx + 1, n);
    let (_, g_full) = step_full(&macro_state, &full, &ws, dt).unwrap();
    let lr = LowRankMicroState::zeros(nx + 1, n, 1).unwrap();
    let (_, g_fixed, _) = step_bug_fixed(&macro_state, &lr, &ws, dt).unwrap();
    let cfg = TruncationConfig::with_default_cap(5e-2, n).unwrap();
    let (_, g_adapt, _) = step_bug_adaptive(&macro_state, &lr, &ws, dt, &cfg).unwrap();
    [
        defect(&g_full.g),
        defect(&g_fixed.to_dense()),
        defect(&g_adapt.to_dense()),
    ]
}
