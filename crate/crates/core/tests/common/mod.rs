//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Staggered finite-difference discretization of the MIT-type radial system
/// (system 1, `k = kappa`) with `P = s^{1-m} p` at cell centres and
/// `D = s^{-m} d` at cell edges; second order in the cell size.
///
/// Returns all eigenvalues in `[-window, window]`, found by Sturm-sequence
/// bisection on the symmetrized tridiagonal matrix.
pub fn fd_mit_eigenvalues(kappa: f64, m: f64, n: usize, window: f64) -> Vec<f64> {
    let h = FRAC_PI_2 / n as f64;
    let xi: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let si: Vec<f64> = xi.iter().map(|x| FRAC_PI_2 - x).collect();
    let xh: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let sh: Vec<f64> = xh.iter().map(|x| FRAC_PI_2 - x).collect();
    // int_a^b s^p ds
    let cell = |p: f64, a: f64, b: f64| (b.powf(p + 1.0) - a.max(0.0).powf(p + 1.0)) / (p + 1.0);
    let mp: Vec<f64> = (0..n).map(|j| cell(2.0 - 2.0 * m, si[j + 1], si[j])).collect();
    let md: Vec<f64> = (1..=n).map(|i| cell(-2.0 * m, si[i] - h / 2.0, si[i] + h / 2.0)).collect();
    let cw: Vec<f64> = (0..n).map(|j| cell(1.0 - 2.0 * m, si[j + 1], si[j])).collect();
    let g = |s: f64| m * (1.0 / s - 1.0 / s.sin());
    // Unknowns p_0, d_1, p_1, d_2, ..., p_{n-1}, d_n.
    let dim = 2 * n;
    let mut diag = vec![0.0; dim];
    let mut mass = vec![0.0; dim];
    let mut off = vec![0.0; dim - 1];
    for j in 0..n {
        diag[2 * j] = -kappa / xh[j].sin() * mp[j];
        diag[2 * j + 1] = kappa / xi[j + 1].sin() * md[j];
        mass[2 * j] = mp[j];
        mass[2 * j + 1] = md[j];
        let gj = g(sh[j]);
        off[2 * j] = cw[j] * (1.0 / h + gj / 2.0);
        if j > 0 {
            off[2 * j - 1] = cw[j] * (-1.0 / h + gj / 2.0);
        }
    }
    let d: Vec<f64> = (0..dim).map(|i| diag[i] / mass[i]).collect();
    let e: Vec<f64> = (0..dim - 1).map(|i| off[i] / (mass[i] * mass[i + 1]).sqrt()).collect();
    tridiagonal_eigenvalues_in(&d, &e, -window, window)
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let prev = if q == 0.0 { f64::EPSILON } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

pub fn tridiagonal_eigenvalues_in(d: &[f64], e: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c_lo = sturm_count(d, e, lo);
    let c_hi = sturm_count(d, e, hi);
    (c_lo..c_hi)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..100 {
                let mid = 0.5 * (a + b);
                if sturm_count(d, e, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}
