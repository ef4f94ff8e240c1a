//! Staggered grid, material data, solution containers and the finite
//! difference operators shared by all schemes.

use nalgebra::DMatrix;

use crate::angular::{orthonormal_legendre_all, QuadratureRule};
use crate::error::{invalid_arg, Result};
use crate::linalg::{orthonormality_defect, orthonormalize, sorted_svd};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emission {
    /// B(T) = a c T
    Linear,
    /// B(T) = a c T^4
    StefanBoltzmann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub epsilon: f64,
    pub c: f64,
    pub a_rad: f64,
    pub c_nu: f64,
    pub emission: Emission,
}

impl PhysicalParams {
    pub fn new(epsilon: f64, c: f64, a_rad: f64, c_nu: f64, emission: Emission) -> Result<Self> {
        for (name, v) in [
            ("epsilon", epsilon),
            ("c", c),
            ("a_rad", a_rad),
            ("c_nu", c_nu),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid_arg(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            epsilon,
            c,
            a_rad,
            c_nu,
            emission,
        })
    }

    /// Unit constants with the given scaling parameter and linear emission.
    pub fn unit(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 1.0, 1.0, 1.0, Emission::Linear)
    }

    pub fn alpha(&self) -> f64 {
        2.0 / self.c_nu
    }

    pub fn planck(&self, t: f64) -> f64 {
        match self.emission {
            Emission::Linear => self.a_rad * self.c * t,
            Emission::StefanBoltzmann => self.a_rad * self.c * t.powi(4),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub dx: f64,
    pub centers: Vec<f64>,
    pub interfaces: Vec<f64>,
}

impl StaggeredGrid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(invalid_arg("grid needs at least one cell"));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(invalid_arg(format!("invalid domain [{x_min}, {x_max}]")));
        }
        let dx = (x_max - x_min) / n_cells as f64;
        let interfaces: Vec<f64> = (0..=n_cells).map(|j| x_min + j as f64 * dx).collect();
        let centers = (0..n_cells)
            .map(|i| x_min + (i as f64 + 0.5) * dx)
            .collect();
        Ok(Self {
            x_min,
            x_max,
            n_cells,
            dx,
            centers,
            interfaces,
        })
    }

    pub fn n_interfaces(&self) -> usize {
        self.n_cells + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionField {
    pub at_centers: Vec<f64>,
    pub at_interfaces: Vec<f64>,
    pub sigma_min: f64,
}

impl AbsorptionField {
    pub fn from_fn(grid: &StaggeredGrid, sigma: impl Fn(f64) -> f64) -> Result<Self> {
        let at_centers = grid.centers.iter().map(|&x| sigma(x)).collect();
        let at_interfaces = grid.interfaces.iter().map(|&x| sigma(x)).collect();
        Self::from_parts(at_centers, at_interfaces)
    }

    /// Interface values are arithmetic means of neighbouring centers; the two
    /// boundary interfaces take their single neighbour.
    pub fn from_centers(at_centers: Vec<f64>) -> Result<Self> {
        let n = at_centers.len();
        if n == 0 {
            return Err(invalid_arg("absorption field needs at least one cell"));
        }
        let mut at_interfaces = Vec::with_capacity(n + 1);
        at_interfaces.push(at_centers[0]);
        for i in 1..n {
            at_interfaces.push(0.5 * (at_centers[i - 1] + at_centers[i]));
        }
        at_interfaces.push(at_centers[n - 1]);
        Self::from_parts(at_centers, at_interfaces)
    }

    pub fn constant(grid: &StaggeredGrid, sigma: f64) -> Result<Self> {
        Self::from_fn(grid, |_| sigma)
    }

    fn from_parts(at_centers: Vec<f64>, at_interfaces: Vec<f64>) -> Result<Self> {
        if at_interfaces.len() != at_centers.len() + 1 {
            return Err(invalid_arg("interface count must be center count + 1"));
        }
        let sigma_min = at_centers
            .iter()
            .chain(&at_interfaces)
            .copied()
            .fold(f64::INFINITY, f64::min);
        if !(sigma_min > 0.0)
            || at_centers
                .iter()
                .chain(&at_interfaces)
                .any(|s| !s.is_finite())
        {
            return Err(invalid_arg(
                "absorption must be positive and finite everywhere",
            ));
        }
        Ok(Self {
            at_centers,
            at_interfaces,
            sigma_min,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroState {
    pub temperature: Vec<f64>,
    pub h_meso: Vec<f64>,
}

impl MacroState {
    pub fn zeros(n_cells: usize) -> Self {
        Self {
            temperature: vec![0.0; n_cells],
            h_meso: vec![0.0; n_cells],
        }
    }

    pub fn with_temperature(temperature: Vec<f64>) -> Self {
        let n = temperature.len();
        Self {
            temperature,
            h_meso: vec![0.0; n],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.temperature
            .iter()
            .chain(&self.h_meso)
            .all(|v| v.is_finite())
    }
}

/// Dense micro variable; row j holds the N moments at interface j.
#[derive(Debug, Clone, PartialEq)]
pub struct FullMicroState {
    pub g: DMatrix<f64>,
}

impl FullMicroState {
    pub fn zeros(n_interfaces: usize, n_moments: usize) -> Self {
        Self {
            g: DMatrix::zeros(n_interfaces, n_moments),
        }
    }

    pub fn norm_sq(&self, grid: &StaggeredGrid) -> f64 {
        self.g.norm_squared() * grid.dx
    }
}

/// Factored micro variable g = X S Vᵀ.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankMicroState {
    pub x: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

impl LowRankMicroState {
    pub fn new(x: DMatrix<f64>, s: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        let r = x.ncols();
        if r == 0 || s.shape() != (r, r) || v.ncols() != r {
            return Err(invalid_arg(format!(
                "inconsistent factor shapes X {:?}, S {:?}, V {:?}",
                x.shape(),
                s.shape(),
                v.shape()
            )));
        }
        if r > x.nrows().min(v.nrows()) {
            return Err(invalid_arg(format!("rank {r} exceeds factor dimensions")));
        }
        Ok(Self { x, s, v })
    }

    /// Zero matrix in factored form: X starts with the normalized constant
    /// vector, V with the first moment direction.
    pub fn zeros(n_interfaces: usize, n_moments: usize, rank: usize) -> Result<Self> {
        if rank == 0 || rank > n_interfaces.min(n_moments) {
            return Err(invalid_arg(format!(
                "rank {rank} outside [1, {}]",
                n_interfaces.min(n_moments)
            )));
        }
        let mut seed_x = DMatrix::zeros(n_interfaces, rank);
        seed_x
            .column_mut(0)
            .fill(1.0 / (n_interfaces as f64).sqrt());
        let x = orthonormalize(&seed_x).q;
        let v = DMatrix::identity(n_moments, rank);
        Ok(Self {
            x,
            s: DMatrix::zeros(rank, rank),
            v,
        })
    }

    /// Best rank-`rank` approximation of a dense micro state.
    pub fn from_dense(g: &DMatrix<f64>, rank: usize) -> Result<Self> {
        let (m, n) = g.shape();
        if rank == 0 || rank > m.min(n) {
            return Err(invalid_arg(format!(
                "rank {rank} outside [1, {}]",
                m.min(n)
            )));
        }
        let svd = sorted_svd(g)?;
        let x = orthonormalize(&svd.u.columns(0, rank).into_owned()).q;
        let v = orthonormalize(&svd.v.columns(0, rank).into_owned()).q;
        let s = DMatrix::from_fn(rank, rank, |i, j| if i == j { svd.sigma[i] } else { 0.0 });
        Ok(Self { x, s, v })
    }

    pub fn rank(&self) -> usize {
        self.s.nrows()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.x * &self.s * self.v.transpose()
    }

    /// First moment g_1 at every interface.
    pub fn first_moment(&self) -> Vec<f64> {
        let w = &self.s * self.v.row(0).transpose();
        (&self.x * w).iter().copied().collect()
    }

    pub fn norm_sq(&self, grid: &StaggeredGrid) -> f64 {
        self.s.norm_squared() * grid.dx
    }

    pub fn orthonormality_defects(&self) -> (f64, f64) {
        (
            orthonormality_defect(&self.x),
            orthonormality_defect(&self.v),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.x
            .iter()
            .chain(self.s.iter())
            .chain(self.v.iter())
            .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    ZeroGhost,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffKind {
    /// interfaces → interfaces, (u_{j+1} − u_j)/Δx
    DPlus,
    /// interfaces → interfaces, (u_j − u_{j−1})/Δx
    DMinus,
    /// interfaces → centers, (u_{i+1/2} − u_{i−1/2})/Δx
    DZeroCenters,
    /// centers → interfaces, (u_{i+1} − u_i)/Δx
    DeltaZeroInterfaces,
}

fn diff_slice(kind: DiffKind, u: &[f64], out: &mut [f64], dx: f64, bc: Boundary) {
    let n = u.len();
    let inv = 1.0 / dx;
    let at = |k: isize| -> f64 {
        if k >= 0 && (k as usize) < n {
            u[k as usize]
        } else {
            match bc {
                Boundary::ZeroGhost => 0.0,
                Boundary::Periodic => u[k.rem_euclid(n as isize) as usize],
            }
        }
    };
    match kind {
        DiffKind::DPlus => {
            for j in 0..n {
                out[j] = (at(j as isize + 1) - u[j]) * inv;
            }
        }
        DiffKind::DMinus => {
            for j in 0..n {
                out[j] = (u[j] - at(j as isize - 1)) * inv;
            }
        }
        DiffKind::DZeroCenters => {
            for i in 0..n - 1 {
                out[i] = (u[i + 1] - u[i]) * inv;
            }
        }
        DiffKind::DeltaZeroInterfaces => {
            // interface j sits between centers j-1 and j
            for (j, o) in out.iter_mut().enumerate().take(n + 1) {
                *o = (at(j as isize) - at(j as isize - 1)) * inv;
            }
        }
    }
}

fn output_len(kind: DiffKind, input: usize, grid: &StaggeredGrid) -> Result<usize> {
    let expected_in = match kind {
        DiffKind::DPlus | DiffKind::DMinus | DiffKind::DZeroCenters => grid.n_interfaces(),
        DiffKind::DeltaZeroInterfaces => grid.n_cells,
    };
    if input != expected_in {
        return Err(invalid_arg(format!(
            "{kind:?} expects {expected_in} values, got {input}"
        )));
    }
    Ok(match kind {
        DiffKind::DPlus | DiffKind::DMinus => grid.n_interfaces(),
        DiffKind::DZeroCenters => grid.n_cells,
        DiffKind::DeltaZeroInterfaces => grid.n_interfaces(),
    })
}

/// Applies a difference operator to a spatial vector.
///
/// Periodic wraparound acts on the array the operator reads from, i.e. a
/// ring of Nx+1 interfaces or Nx centers.
pub fn apply_diff(
    kind: DiffKind,
    values: &[f64],
    grid: &StaggeredGrid,
    bc: Boundary,
) -> Result<Vec<f64>> {
    let len = output_len(kind, values.len(), grid)?;
    let mut out = vec![0.0; len];
    diff_slice(kind, values, &mut out, grid.dx, bc);
    Ok(out)
}

/// Applies a difference operator to every column of a matrix whose rows are
/// spatial positions.
pub fn apply_diff_rows(
    kind: DiffKind,
    values: &DMatrix<f64>,
    grid: &StaggeredGrid,
    bc: Boundary,
) -> Result<DMatrix<f64>> {
    let len = output_len(kind, values.nrows(), grid)?;
    let mut out = DMatrix::zeros(len, values.ncols());
    for k in 0..values.ncols() {
        diff_slice(
            kind,
            values.column(k).as_slice(),
            out.column_mut(k).as_mut_slice(),
            grid.dx,
            bc,
        );
    }
    Ok(out)
}

pub fn beta_of_t(t: f64, emission: Emission) -> f64 {
    match emission {
        Emission::Linear => 1.0,
        Emission::StefanBoltzmann => 4.0 * t * t * t,
    }
}

/// β at centers and at interfaces (mean of the neighbouring centers).
pub fn beta_fields(
    macro_state: &MacroState,
    emission: Emission,
    bc: Boundary,
) -> (Vec<f64>, Vec<f64>) {
    let t = &macro_state.temperature;
    let n = t.len();
    let centers: Vec<f64> = t.iter().map(|&v| beta_of_t(v, emission)).collect();
    let interfaces = match emission {
        Emission::Linear => vec![1.0; n + 1],
        Emission::StefanBoltzmann => {
            let ghost = |k: isize| -> f64 {
                if k >= 0 && (k as usize) < n {
                    centers[k as usize]
                } else {
                    match bc {
                        Boundary::ZeroGhost => 0.0,
                        Boundary::Periodic => centers[k.rem_euclid(n as isize) as usize],
                    }
                }
            };
            (0..=n)
                .map(|j| 0.5 * (ghost(j as isize - 1) + ghost(j as isize)))
                .collect()
        }
    };
    (centers, interfaces)
}

pub fn scalar_flux(macro_state: &MacroState, params: &PhysicalParams) -> Vec<f64> {
    let eps2 = params.epsilon * params.epsilon;
    macro_state
        .temperature
        .iter()
        .zip(&macro_state.h_meso)
        .map(|(&t, &h)| params.planck(t) + eps2 * h)
        .collect()
}

/// Macro-micro initial data from a kinetic particle density f(x, ς).
pub fn init_from_kinetic(
    f: impl Fn(f64, f64) -> f64,
    t0: impl Fn(f64) -> f64,
    grid: &StaggeredGrid,
    params: &PhysicalParams,
    n_moments: usize,
    quad: &QuadratureRule,
) -> Result<(MacroState, FullMicroState)> {
    let eps = params.epsilon;
    if !(eps > 0.0) {
        return Err(invalid_arg("epsilon must be positive"));
    }
    let legendre: Vec<Vec<f64>> = quad
        .nodes
        .iter()
        .map(|&mu| orthonormal_legendre_all(n_moments, mu))
        .collect();
    let mut g = DMatrix::zeros(grid.n_interfaces(), n_moments);
    for (j, &x) in grid.interfaces.iter().enumerate() {
        let samples: Vec<f64> = quad.nodes.iter().map(|&mu| f(x, mu)).collect();
        let mean = 0.5
            * quad
                .weights
                .iter()
                .zip(&samples)
                .map(|(w, s)| w * s)
                .sum::<f64>();
        for k in 0..n_moments {
            let m: f64 = (0..quad.count())
                .map(|q| quad.weights[q] * (samples[q] - mean) * legendre[q][k + 1])
                .sum();
            g[(j, k)] = m / eps;
        }
    }
    let temperature: Vec<f64> = grid.centers.iter().map(|&x| t0(x)).collect();
    let h_meso = grid
        .centers
        .iter()
        .zip(&temperature)
        .map(|(&x, &t)| {
            let mean = 0.5 * quad.integrate(|mu| f(x, mu));
            (mean - params.planck(t)) / (eps * eps)
        })
        .collect();
    Ok((
        MacroState {
            temperature,
            h_meso,
        },
        FullMicroState { g },
    ))
}
