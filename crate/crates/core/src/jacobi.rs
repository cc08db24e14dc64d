//! Orthonormal Jacobi polynomials on [-1, 1].
//!
//! `p_k^{(a,b)}` is orthonormal for the weight `(1-t)^a (1+t)^b`, `a, b > -1`,
//! and is generated by the symmetric three-term recurrence of the Jacobi
//! matrix, which stays stable for non-integer parameters.

use statrs::function::gamma::ln_gamma;

/// Diagonal entry `b_k` of the Jacobi matrix.
fn diag(k: usize, a: f64, b: f64) -> f64 {
    let k = k as f64;
    let s = 2.0 * k + a + b;
    if k == 0.0 {
        (b - a) / (a + b + 2.0)
    } else {
        (b * b - a * a) / (s * (s + 2.0))
    }
}

/// Off-diagonal entry `a_k` (k >= 1) of the Jacobi matrix.
fn offdiag(k: usize, a: f64, b: f64) -> f64 {
    let k = k as f64;
    let s = 2.0 * k + a + b;
    let num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
    let den = s * s * (s + 1.0) * (s - 1.0);
    if k == 1.0 {
        // s - 1 = a + b + 1 and k + a + b = a + b + 1 cancel; keeps a + b = -1 finite.
        (4.0 * (1.0 + a) * (1.0 + b) / ((a + b + 2.0).powi(2) * (a + b + 3.0))).sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// `p_0 = 1/sqrt(mu_0)` with `mu_0 = int (1-t)^a (1+t)^b dt`.
fn seed(a: f64, b: f64) -> f64 {
    let ln_mu = (a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
        - ln_gamma(a + b + 2.0);
    (-0.5 * ln_mu).exp()
}

/// Values `p_0(t), ..., p_{n-1}(t)` written into `out`.
pub fn values_into(a: f64, b: f64, t: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    out[0] = seed(a, b);
    if n == 1 {
        return;
    }
    out[1] = (t - diag(0, a, b)) * out[0] / offdiag(1, a, b);
    for k in 1..n - 1 {
        out[k + 1] = ((t - diag(k, a, b)) * out[k] - offdiag(k, a, b) * out[k - 1])
            / offdiag(k + 1, a, b);
    }
}

pub fn values(n: usize, a: f64, b: f64, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    values_into(a, b, t, &mut out);
    out
}

/// Values and first derivatives of `p_0 .. p_{n-1}` at `t`.
///
/// Uses `d/dt p_k^{(a,b)} = sqrt(k (k + a + b + 1)) p_{k-1}^{(a+1,b+1)}`.
pub fn values_and_derivatives(n: usize, a: f64, b: f64, t: f64) -> (Vec<f64>, Vec<f64>) {
    let p = values(n, a, b, t);
    let mut d = vec![0.0; n];
    if n > 1 {
        let q = values(n - 1, a + 1.0, b + 1.0, t);
        for k in 1..n {
            let kf = k as f64;
            d[k] = (kf * (kf + a + b + 1.0)).sqrt() * q[k - 1];
        }
    }
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gauss_quad::jacobi::GaussJacobi;

    #[test]
    fn orthonormal_under_gauss_jacobi() {
        for &(a, b) in &[(-0.5, 2.0), (1.5, 4.0), (0.0, 0.0), (7.0, 2.0)] {
            let rule = GaussJacobi::new(
                60.try_into().unwrap(),
                a.try_into().unwrap(),
                b.try_into().unwrap(),
            );
            let n = 40;
            let mut gram = vec![0.0; n * n];
            for &(t, w) in rule.as_node_weight_pairs() {
                let p = values(n, a, b, t);
                for i in 0..n {
                    for j in 0..n {
                        gram[i * n + j] += w * p[i] * p[j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let want: f64 = if i == j { 1.0 } else { 0.0 };
                    // Golub–Welsch nodes for large a lose ~1e-11 at high degree.
                    assert!((gram[i * n + j] - want).abs() < 1e-10, "a={a} b={b} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn matches_high_precision_reference() {
        // 40-digit reference values of the orthonormal polynomials at t = 0.3.
        let p = values(35, 7.0, 2.0, 0.3);
        assert!((p[34] - 2.099_628_068_134_630_8).abs() < 1e-12);
        assert!((p[25] + 0.071_384_020_897_860_625).abs() < 1e-13);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let (a, b) = (0.5, 2.0);
        let h = 1e-6;
        for &t in &[-0.7, 0.1, 0.9] {
            let (_, d) = values_and_derivatives(12, a, b, t);
            let up = values(12, a, b, t + h);
            let dn = values(12, a, b, t - h);
            for k in 0..12 {
                let fd = (up[k] - dn[k]) / (2.0 * h);
                assert!((fd - d[k]).abs() < 1e-6 * (1.0 + d[k].abs()));
            }
        }
    }
}
