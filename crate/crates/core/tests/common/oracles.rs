//! Scalar transcriptions of the update formulas, independent of the
//! library's matrix assembly. Unit constants a = c = c_ν = 1, linear
//! emission and zero ghost values throughout.

use nalgebra::DMatrix;

/// Three-point Gauss rule and the first two orthonormal Legendre
/// polynomials written out by hand.
pub fn two_moment_flux() -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let r = (0.6f64).sqrt();
    let nodes = [-r, 0.0, r];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let p = |k: usize, x: f64| match k {
        0 => (1.5f64).sqrt() * x,
        _ => (2.5f64).sqrt() * (3.0 * x * x - 1.0) / 2.0,
    };
    let mut plus = [[0.0; 2]; 2];
    let mut minus = [[0.0; 2]; 2];
    for q in 0..3 {
        for i in 0..2 {
            for j in 0..2 {
                let base = weights[q] * p(i, nodes[q]) * p(j, nodes[q]);
                plus[i][j] += base * nodes[q].max(0.0);
                minus[i][j] += base * nodes[q].min(0.0);
            }
        }
    }
    (plus, minus)
}

fn at(u: &[f64], k: isize) -> f64 {
    if k < 0 || k as usize >= u.len() {
        0.0
    } else {
        u[k as usize]
    }
}

/// β δ⁰(T) + ε² δ⁰h at interface j (β = 1).
pub fn source(t: &[f64], h: &[f64], eps: f64, dx: f64, j: usize) -> f64 {
    let j = j as isize;
    (at(t, j) - at(t, j - 1)) / dx + eps * eps * (at(h, j) - at(h, j - 1)) / dx
}

pub struct OracleStep {
    pub t: Vec<f64>,
    pub h: Vec<f64>,
    pub g: Vec<[f64; 2]>,
}

/// One full step with two moments.
pub fn full_step_two_moments(
    t: &[f64],
    h: &[f64],
    g: &[[f64; 2]],
    sigma_c: &[f64],
    sigma_i: &[f64],
    eps: f64,
    dx: f64,
    dt: f64,
) -> OracleStep {
    let (ap, am) = two_moment_flux();
    let b1 = (2.0f64 / 3.0).sqrt();
    let shift = eps * eps / dt;
    let n_int = g.len();
    let gk = |j: isize, k: usize| -> f64 {
        if j < 0 || j as usize >= n_int {
            0.0
        } else {
            g[j as usize][k]
        }
    };
    let mut g_new = vec![[0.0; 2]; n_int];
    for j in 0..n_int {
        let ji = j as isize;
        let s = source(t, h, eps, dx, j);
        for k in 0..2 {
            let mut adv = 0.0;
            for m in 0..2 {
                let dminus = (gk(ji, m) - gk(ji - 1, m)) / dx;
                let dplus = (gk(ji + 1, m) - gk(ji, m)) / dx;
                adv += ap[k][m] * dminus + am[k][m] * dplus;
            }
            let bk = if k == 0 { b1 } else { 0.0 };
            g_new[j][k] = (shift * g[j][k] - eps * adv - bk * s) / (shift + sigma_i[j]);
        }
    }
    let n = t.len();
    let mut t_new = vec![0.0; n];
    let mut h_new = vec![0.0; n];
    for i in 0..n {
        let d0 = (g_new[i + 1][0] - g_new[i][0]) / dx;
        h_new[i] = (shift * h[i] - 0.5 * b1 * d0) / (shift + sigma_c[i] * (1.0 + 2.0));
        t_new[i] = t[i] + dt * 2.0 * sigma_c[i] * h_new[i];
    }
    OracleStep {
        t: t_new,
        h: h_new,
        g: g_new,
    }
}

/// Explicit Rosseland step.
pub fn rosseland(t: &[f64], sigma_i: &[f64], dx: f64, dt: f64) -> Vec<f64> {
    let coeff = (2.0 / 3.0) / (1.0 + 2.0);
    (0..t.len())
        .map(|i| {
            let k = i as isize;
            let flux = (at(t, k + 1) - t[i]) / sigma_i[i + 1] - (t[i] - at(t, k - 1)) / sigma_i[i];
            t[i] + dt * coeff * flux / (dx * dx)
        })
        .collect()
}

/// L-step for rank one and two moments on three interfaces.
pub fn l_step_rank_one(
    x: [f64; 3],
    s: f64,
    v: [f64; 2],
    t: &[f64],
    h: &[f64],
    sigma_i: [f64; 3],
    eps: f64,
    dx: f64,
    dt: f64,
) -> [f64; 2] {
    let (ap, am) = two_moment_flux();
    let b1 = (2.0f64 / 3.0).sqrt();
    let shift = eps * eps / dt;
    let xa = |j: isize| {
        if (0..3).contains(&j) {
            x[j as usize]
        } else {
            0.0
        }
    };
    let mut pm = 0.0;
    let mut pp = 0.0;
    let mut sx = 0.0;
    let mut c = 0.0;
    for j in 0..3isize {
        pm += (xa(j) - xa(j - 1)) / dx * xa(j);
        pp += (xa(j + 1) - xa(j)) / dx * xa(j);
        sx += source(t, h, eps, dx, j as usize) * xa(j);
        c += sigma_i[j as usize] * xa(j) * xa(j);
    }
    let l = [v[0] * s, v[1] * s];
    let mut out = [0.0; 2];
    for k in 0..2 {
        let adv =
            (ap[k][0] * l[0] + ap[k][1] * l[1]) * pm + (am[k][0] * l[0] + am[k][1] * l[1]) * pp;
        let bk = if k == 0 { b1 } else { 0.0 };
        out[k] = (shift * l[k] - eps * adv - bk * sx) / (shift + c);
    }
    out
}

/// Galerkin coefficients by forming the dense right-hand side entry by entry
/// and projecting it onto fixed bases.
pub fn dense_projection(
    x: &DMatrix<f64>,
    v: &DMatrix<f64>,
    s_tilde: &DMatrix<f64>,
    t: &[f64],
    h: &[f64],
    sigma_i: &[f64],
    a_plus: &DMatrix<f64>,
    a_minus: &DMatrix<f64>,
    eps: f64,
    dx: f64,
    dt: f64,
) -> DMatrix<f64> {
    let g = x * s_tilde * v.transpose();
    let (rows, n) = g.shape();
    let shift = eps * eps / dt;
    let b1 = (2.0f64 / 3.0).sqrt();
    let gk = |j: isize, k: usize| {
        if j < 0 || j as usize >= rows {
            0.0
        } else {
            g[(j as usize, k)]
        }
    };
    let mut full = DMatrix::zeros(rows, n);
    for j in 0..rows {
        let ji = j as isize;
        let s = source(t, h, eps, dx, j);
        for k in 0..n {
            let mut adv = 0.0;
            for m in 0..n {
                adv += a_plus[(k, m)] * (gk(ji, m) - gk(ji - 1, m)) / dx
                    + a_minus[(k, m)] * (gk(ji + 1, m) - gk(ji, m)) / dx;
            }
            let bk = if k == 0 { b1 } else { 0.0 };
            full[(j, k)] = shift * g[(j, k)] - eps * adv - bk * s;
        }
    }
    let rhs = x.transpose() * full * v;
    let r = x.ncols();
    let mut lhs = DMatrix::zeros(r, r);
    for p in 0..r {
        for q in 0..r {
            lhs[(p, q)] = (0..rows)
                .map(|j| sigma_i[j] * x[(j, p)] * x[(j, q)])
                .sum::<f64>();
        }
        lhs[(p, p)] += shift;
    }
    lhs.lu().solve(&rhs).expect("oracle system is singular")
}
