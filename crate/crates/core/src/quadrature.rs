//! Quadrature rules on the radial interval and on [-1, 1].

use std::f64::consts::FRAC_PI_2;

use gauss_quad::legendre::GaussLegendre;

/// Double-exponential (tanh-sinh) rule on `x in [0, pi/2]` or a subinterval.
///
/// Both `x` and the boundary distance `s = pi/2 - x` are stored, each computed
/// without cancellation, so integrands singular like `s^p` (p > -1) at the
/// boundary are resolved to near machine precision. Nodes closer than
/// `1e-280` to either end are dropped to keep negative powers finite.
#[derive(Debug, Clone)]
pub struct DeRule {
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub w: Vec<f64>,
}

const DE_TMAX: f64 = 6.6;
const DE_FLOOR: f64 = 1e-280;

impl DeRule {
    pub fn new(h: f64) -> Self {
        Self::on(0.0, FRAC_PI_2, h)
    }

    /// Rule on `[a, b]` within `[0, pi/2]`; `s` stays exact near `b = pi/2`.
    pub fn on(a: f64, b: f64, h: f64) -> Self {
        assert!(h > 0.0 && h < 1.0, "step must lie in (0, 1)");
        assert!(0.0 <= a && a < b && b <= FRAC_PI_2, "interval must lie in [0, pi/2]");
        let half = 0.5 * (b - a);
        let gap = FRAC_PI_2 - b;
        let steps = (DE_TMAX / h).ceil() as i64;
        let mut x = Vec::with_capacity(2 * steps as usize + 1);
        let mut s = Vec::with_capacity(x.capacity());
        let mut w = Vec::with_capacity(x.capacity());
        for i in -steps..=steps {
            let t = i as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            let e = (-2.0 * u.abs()).exp();
            // half * (1 - |tanh u|) without cancellation
            let near = half * 2.0 * e / (1.0 + e);
            let (xi, si) = if u < 0.0 {
                (a + near, FRAC_PI_2 - a - near)
            } else {
                (b - near, gap + near)
            };
            if near < DE_FLOOR || xi < DE_FLOOR || si < DE_FLOOR {
                continue;
            }
            let wi = half * FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e)) * h;
            x.push(xi);
            s.push(si);
            w.push(wi);
        }
        DeRule { x, s, w }
    }

    /// Default rule used for Galerkin assembly with `n_basis` functions per component.
    pub fn for_basis(n_basis: usize) -> Self {
        let h = (1.0 / n_basis.max(8) as f64).min(0.05) * 0.5;
        Self::new(h)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Integral of `f(x, s)` over `[0, pi/2]`.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.x
            .iter()
            .zip(&self.s)
            .zip(&self.w)
            .map(|((&x, &s), &w)| w * f(x, s))
            .sum()
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(n.max(1).try_into().expect("nonzero degree"));
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Gauss–Legendre rule mapped to `[lo, hi]`.
pub fn gauss_legendre_on(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let (t, w) = gauss_legendre(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    (
        t.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&w| half * w).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn de_rule_integrates_boundary_singularities() {
        let rule = DeRule::new(0.02);
        let v = rule.integrate(|_, s| s.powf(-0.75));
        let exact = 4.0 * FRAC_PI_2.powf(0.25);
        assert!((v - exact).abs() < 1e-12 * exact);
        let v = rule.integrate(|x, _| x.sin().powi(2));
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (t, w) = gauss_legendre_on(6, 0.0, 2.0);
        let v: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(11)).sum();
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-10);
    }
}
