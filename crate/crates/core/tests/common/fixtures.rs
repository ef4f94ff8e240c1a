use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use trt_core::angular::build_angular_operators;
use trt_core::linalg::orthonormalize;
use trt_core::mesh::{
    AbsorptionField, Boundary, LowRankMicroState, MacroState, PhysicalParams, StaggeredGrid,
};
use trt_core::Workspace;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut StdRng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_vec(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_orthonormal(rng: &mut StdRng, m: usize, k: usize) -> DMatrix<f64> {
    orthonormalize(&random_matrix(rng, m, k)).q
}

pub fn random_orthogonal(rng: &mut StdRng, k: usize) -> DMatrix<f64> {
    random_orthonormal(rng, k, k)
}

pub fn random_low_rank(
    rng: &mut StdRng,
    rows: usize,
    n_moments: usize,
    rank: usize,
) -> LowRankMicroState {
    let x = random_orthonormal(rng, rows, rank);
    let v = random_orthonormal(rng, n_moments, rank);
    let s = random_matrix(rng, rank, rank);
    LowRankMicroState::new(x, s, v).unwrap()
}

/// Workspace on [-1, 1] with a smooth, strictly positive absorption.
pub fn workspace(nx: usize, n_moments: usize, epsilon: f64, bc: Boundary) -> Workspace {
    let grid = StaggeredGrid::new(-1.0, 1.0, nx).unwrap();
    let sigma = AbsorptionField::from_fn(&grid, |x| 1.0 + 0.5 * (3.0 * x).sin().powi(2)).unwrap();
    Workspace::new(
        grid,
        PhysicalParams::unit(epsilon).unwrap(),
        sigma,
        build_angular_operators(n_moments).unwrap(),
        bc,
    )
    .unwrap()
}

/// Smooth bump centred in the domain, negligible near the ends.
pub fn smooth_macro(grid: &StaggeredGrid, rng: &mut StdRng) -> MacroState {
    let amp = rng.random_range(0.5..2.0);
    let shift = rng.random_range(-0.1..0.1);
    let width = rng.random_range(0.1..0.2);
    let h_amp = rng.random_range(-0.5..0.5);
    let len = grid.x_max - grid.x_min;
    let mid = 0.5 * (grid.x_min + grid.x_max);
    let bump = |x: f64| (-((x - mid - shift * len) / (width * len)).powi(2)).exp();
    MacroState {
        temperature: grid.centers.iter().map(|&x| amp * bump(x)).collect(),
        h_meso: grid.centers.iter().map(|&x| h_amp * bump(x)).collect(),
    }
}
