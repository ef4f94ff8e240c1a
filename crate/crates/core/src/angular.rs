//! Legendre polynomials, Gauss-Legendre quadrature and the angular
//! transport matrices of the modal P_N system.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid_arg, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Evaluates the unnormalized Legendre pair (P̃_n(x), P̃_{n-1}(x)).
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

pub fn gauss_legendre(count: usize) -> Result<QuadratureRule> {
    if count == 0 {
        return Err(invalid_arg("quadrature needs at least one node"));
    }
    let n = count;
    let nf = n as f64;
    let half = n.div_ceil(2);
    let mut pos_nodes = Vec::with_capacity(half);
    let mut pos_weights = Vec::with_capacity(half);
    for i in 0..half {
        // i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        if n % 2 == 1 && i == half - 1 {
            x = 0.0;
        } else {
            for _ in 0..100 {
                let (p, pm1) = legendre_pair(n, x);
                let dp = nf * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= 1e-15 {
                    break;
                }
            }
        }
        let (p, pm1) = legendre_pair(n, x);
        let dp = if x == 0.0 {
            // P̃_n'(0) = n P̃_{n-1}(0)
            nf * pm1
        } else {
            nf * (x * p - pm1) / (x * x - 1.0)
        };
        pos_nodes.push(x);
        pos_weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..(n / 2) {
        nodes.push(-pos_nodes[i]);
        weights.push(pos_weights[i]);
    }
    for i in (0..half).rev() {
        nodes.push(pos_nodes[i]);
        weights.push(pos_weights[i]);
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Recurrence coefficient a_k = (k+1)/sqrt((2k+1)(2k+3)).
pub fn recurrence_coefficient(k: usize) -> f64 {
    let kf = k as f64;
    (kf + 1.0) / ((2.0 * kf + 1.0) * (2.0 * kf + 3.0)).sqrt()
}

/// Orthonormal Legendre values P_0(x), ..., P_max_k(x).
pub fn orthonormal_legendre_all(max_k: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_k + 1);
    out.push(std::f64::consts::FRAC_1_SQRT_2);
    if max_k == 0 {
        return out;
    }
    out.push((1.5f64).sqrt() * x);
    for k in 1..max_k {
        let next =
            (x * out[k] - recurrence_coefficient(k - 1) * out[k - 1]) / recurrence_coefficient(k);
        out.push(next);
    }
    out
}

pub fn orthonormal_legendre(k: usize, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(invalid_arg(format!(
            "legendre argument {x} outside [-1, 1]"
        )));
    }
    Ok(orthonormal_legendre_all(k, x)[k])
}

/// Flux, stabilization and source data of the N-moment system.
#[derive(Debug, Clone)]
pub struct AngularOperators {
    pub n_moments: usize,
    pub a: DMatrix<f64>,
    pub a_plus: DMatrix<f64>,
    pub a_minus: DMatrix<f64>,
    pub a_abs: DMatrix<f64>,
    pub t_mat: DMatrix<f64>,
    pub b_vec: DVector<f64>,
    pub a_vec: DVector<f64>,
    pub beta_n: f64,
    pub quadrature: QuadratureRule,
}

/// ‖P̃₁‖ = sqrt(2/3).
pub fn norm_p1() -> f64 {
    (2.0f64 / 3.0).sqrt()
}

pub fn build_angular_operators(n_moments: usize) -> Result<AngularOperators> {
    if n_moments == 0 {
        return Err(invalid_arg("n_moments must be at least 1"));
    }
    let n = n_moments;
    let quad = gauss_legendre(n + 1)?;
    let mut t_mat = DMatrix::zeros(n, n + 1);
    for (k, (&x, &w)) in quad.nodes.iter().zip(&quad.weights).enumerate() {
        let p = orthonormal_legendre_all(n, x);
        let sw = w.sqrt();
        for i in 0..n {
            t_mat[(i, k)] = sw * p[i + 1];
        }
    }
    let scaled = |f: &dyn Fn(f64) -> f64| {
        let mut tm = t_mat.clone();
        for (k, &x) in quad.nodes.iter().enumerate() {
            tm.column_mut(k).scale_mut(f(x));
        }
        &tm * t_mat.transpose()
    };
    let a = scaled(&|x| x);
    let a_abs = scaled(&|x: f64| x.abs());
    let a_plus = scaled(&|x: f64| 0.5 * (x + x.abs()));
    let a_minus = scaled(&|x: f64| 0.5 * (x - x.abs()));

    let mut b_vec = DVector::zeros(n);
    b_vec[0] = norm_p1();
    let a_vec = &b_vec / std::f64::consts::SQRT_2;
    let beta_n = quad
        .weights
        .iter()
        .map(|w| w * (n as f64 + 1.0))
        .fold(f64::MIN, f64::max);

    Ok(AngularOperators {
        n_moments: n,
        a,
        a_plus,
        a_minus,
        a_abs,
        t_mat,
        b_vec,
        a_vec,
        beta_n,
        quadrature: quad,
    })
}
