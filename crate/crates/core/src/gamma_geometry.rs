//! Dirac matrices, the spherical frame change, radial coordinates and the
//! spinor weight.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

pub type C64 = Complex64;
pub type Mat4 = Matrix4<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Minkowski metric diagonal, signature (+,-,-,-).
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

fn block(a: Matrix2<C64>, b: Matrix2<C64>, c: Matrix2<C64>, d: Matrix2<C64>) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&b);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&c);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&d);
    m
}

/// Pauli-type matrices in the ordering used throughout: sigma^1 is diagonal,
/// sigma^2 real off-diagonal, sigma^3 imaginary off-diagonal.
pub fn sigma(j: usize) -> Matrix2<C64> {
    match j {
        1 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        2 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        3 => Matrix2::new(ZERO, -I, I, ZERO),
        _ => panic!("sigma index must be 1, 2 or 3"),
    }
}

/// Dirac matrices in the Pauli–Dirac representation.
#[derive(Debug, Clone)]
pub struct GammaRep {
    pub gamma: [Mat4; 4],
    pub gamma5: Mat4,
    /// `-gamma^0 gamma^5`, real.
    pub q: Matrix4<f64>,
}

impl GammaRep {
    pub fn pauli_dirac() -> Self {
        let id = Matrix2::<C64>::identity();
        let z = Matrix2::<C64>::zeros();
        let g0 = block(id, z, z, -id);
        let gj = |j| block(z, sigma(j), -sigma(j), z);
        let gamma5 = block(z, id, id, z);
        let q = Matrix4::new(
            0.0, 0.0, -1.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0,
        );
        GammaRep {
            gamma: [g0, gj(1), gj(2), gj(3)],
            gamma5,
            q,
        }
    }

    /// Boundary matrix of the generalized bag condition with chiral angle `alpha`:
    /// `gamma^1 + i exp(i alpha gamma^5)`.
    pub fn b_alpha(&self, alpha: f64) -> Mat4 {
        let exp = Mat4::identity() * C64::from(alpha.cos()) + self.gamma5 * (I * alpha.sin());
        self.gamma[1] + exp * I
    }

    /// Largest entry of `{g^mu, g^nu} - 2 eta^{mu nu}` over all index pairs.
    pub fn anticommutator_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let ac = self.gamma[mu] * self.gamma[nu] + self.gamma[nu] * self.gamma[mu];
                let want = if mu == nu { 2.0 * METRIC[mu] } else { 0.0 };
                let d = ac - Mat4::identity() * C64::from(want);
                worst = worst.max(max_abs(&d));
            }
        }
        worst
    }

    /// Largest entry of `g5 g^mu + g^mu g5` over mu.
    pub fn gamma5_defect(&self) -> f64 {
        (0..4)
            .map(|mu| max_abs(&(self.gamma5 * self.gamma[mu] + self.gamma[mu] * self.gamma5)))
            .fold(0.0, f64::max)
    }

    /// Largest deviation from `g0` hermitian and `g^j` anti-hermitian.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = max_abs(&(self.gamma[0] - self.gamma[0].adjoint()));
        for j in 1..4 {
            worst = worst.max(max_abs(&(self.gamma[j] + self.gamma[j].adjoint())));
        }
        worst
    }
}

pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Cosmological constant and field mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    lambda: f64,
    mass: f64,
}

impl PhysicalParams {
    pub fn new(lambda: f64, mass: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("Lambda must be positive, got {lambda}")));
        }
        if !mass.is_finite() {
            return Err(Error::Config(format!("M must be finite, got {mass}")));
        }
        Ok(PhysicalParams { lambda, mass })
    }

    /// Parameters with `Lambda = 3`, where the reduced mass equals `M`.
    pub fn reduced(m: f64) -> Self {
        PhysicalParams { lambda: 3.0, mass: m }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Reduced mass `m = M sqrt(3/Lambda)`.
    pub fn m(&self) -> f64 {
        self.mass * (3.0 / self.lambda).sqrt()
    }

    /// `sqrt(Lambda/3)`: converts eigenvalues of the reduced operator to frequencies.
    pub fn time_scale(&self) -> f64 {
        (self.lambda / 3.0).sqrt()
    }

    /// `M^2 >= Lambda/12`, equivalently `|m| >= 1/2`.
    pub fn is_heavy(&self) -> bool {
        self.m().abs() >= 0.5
    }

    /// Mass threshold `sqrt(Lambda/12)`.
    pub fn bf_threshold(&self) -> f64 {
        (self.lambda / 12.0).sqrt()
    }
}

/// Radial coordinates: areal `r`, ball `rho` and compactified `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    R,
    Rho,
    X,
}

fn to_x(value: f64, from: Coord, params: &PhysicalParams) -> Result<f64> {
    match from {
        Coord::R => {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::Domain { coordinate: "r", value, domain: "[0, inf)" });
            }
            Ok(((params.lambda / 3.0).sqrt() * value).atan())
        }
        Coord::Rho => {
            if !(0.0..1.0).contains(&value) {
                return Err(Error::Domain { coordinate: "rho", value, domain: "[0, 1)" });
            }
            Ok(2.0 * value.atan())
        }
        Coord::X => {
            if !(0.0..FRAC_PI_2).contains(&value) {
                return Err(Error::Domain { coordinate: "x", value, domain: "[0, pi/2)" });
            }
            Ok(value)
        }
    }
}

/// Converts between `r`, `rho` and `x = arctan(sqrt(Lambda/3) r) = 2 arctan(rho)`.
pub fn coordinate_map(value: f64, from: Coord, to: Coord, params: &PhysicalParams) -> Result<f64> {
    let x = to_x(value, from, params)?;
    Ok(match to {
        Coord::X => x,
        Coord::Rho => (0.5 * x).tan(),
        Coord::R => x.tan() / (params.lambda / 3.0).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// `Phi = r (1 + Lambda r^2 / 3)^{1/4} psi` and its inverse.
pub fn spinor_weight_transform(
    psi: [C64; 4],
    r: f64,
    params: &PhysicalParams,
    direction: Direction,
) -> Result<[C64; 4]> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain { coordinate: "r", value: r, domain: "[0, inf)" });
    }
    let w = r * (1.0 + params.lambda * r * r / 3.0).powf(0.25);
    let f = match direction {
        Direction::Forward => w,
        Direction::Inverse => {
            if r == 0.0 {
                return Err(Error::SingularWeight);
            }
            1.0 / w
        }
    };
    Ok(psi.map(|z| z * f))
}

/// Frame change `S(theta, phi)` from the spherical to the Cartesian spinor frame.
pub fn s_matrix(theta: f64, phi: f64) -> Mat4 {
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let em = C64::from_polar(1.0, -0.5 * phi);
    let ep = C64::from_polar(1.0, 0.5 * phi);
    let p = C64::new(0.5, 0.5);
    let n = C64::new(0.5, -0.5);
    let b = Matrix2::new(
        p * (em * c + ep * s),
        p * (ep * c - em * s),
        n * (-em * c + ep * s),
        n * (ep * c + em * s),
    );
    let z = Matrix2::zeros();
    block(b, z, z, b)
}

/// Smooth test spinor on the unit ball with its Cartesian gradient.
pub trait BallSpinor {
    /// Value and `[d/dx1, d/dx2, d/dx3]` at a point with `|x| < 1`.
    fn eval(&self, x: [f64; 3]) -> ([C64; 4], [[C64; 4]; 3]);
}

/// `Psi = (1 - rho^2)^p * v` for a constant spinor `v`.
#[derive(Debug, Clone)]
pub struct RadialBump {
    pub power: f64,
    pub v: [C64; 4],
}

impl BallSpinor for RadialBump {
    fn eval(&self, x: [f64; 3]) -> ([C64; 4], [[C64; 4]; 3]) {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let base = (1.0 - r2).max(0.0);
        let f = base.powf(self.power);
        let df = if self.power == 0.0 { 0.0 } else { -2.0 * self.power * base.powf(self.power - 1.0) };
        let val = self.v.map(|z| z * f);
        let grad = [0, 1, 2].map(|j| self.v.map(|z| z * (df * x[j])));
        (val, grad)
    }
}

/// Worst margins of the two ball inequalities over a test family.
#[derive(Debug, Clone)]
pub struct CartesianReport {
    /// `sqrt(Lambda/12) ||H_M Psi||` per sample.
    pub lhs: Vec<f64>,
    /// `(|M| - sqrt(Lambda/12)) ||grad Psi||` per sample.
    pub rhs: Vec<f64>,
    /// Smallest relative margin `(lhs - rhs)/max(lhs, tiny)` of the elliptic estimate.
    pub elliptic_margin: f64,
    /// Smallest relative margin of `int |grad Psi|^2 - int |Psi|^2/(1-|x|^2)^2`.
    pub hardy_margin: f64,
}

struct BallIntegrals {
    h_norm2: f64,
    grad_norm2: f64,
    grad_flat2: f64,
    hardy_lhs: f64,
}

fn ball_integrals(psi: &dyn BallSpinor, params: &PhysicalParams, res: usize) -> BallIntegrals {
    let g = GammaRep::pauli_dirac();
    let (rho, wr) = gauss_legendre_on(res, 0.0, 1.0);
    let (ct, wt) = gauss_legendre_on(res, -1.0, 1.0);
    let nphi = 2 * res;
    let dphi = 2.0 * PI / nphi as f64;
    let mass_term = 2.0 * params.mass * (3.0 / params.lambda).sqrt();
    let mut out = BallIntegrals { h_norm2: 0.0, grad_norm2: 0.0, grad_flat2: 0.0, hardy_lhs: 0.0 };
    for (&r, &w_r) in rho.iter().zip(&wr) {
        let weight = 2.0 / (1.0 + r * r);
        for (&c, &w_c) in ct.iter().zip(&wt) {
            let st = (1.0 - c * c).sqrt();
            for k in 0..nphi {
                let phi = (k as f64 + 0.5) * dphi;
                let x = [r * st * phi.cos(), r * st * phi.sin(), r * c];
                let dv = w_r * w_c * dphi * r * r;
                let (val, grad) = psi.eval(x);
                // H_M Psi = i (1+rho^2)/2 g0 [ g^j d_j Psi + (2 i M sqrt(3/Lambda))/(1-rho^2) Psi ]
                let mut inner = [ZERO; 4];
                for j in 0..3 {
                    let gj = &g.gamma[j + 1];
                    for a in 0..4 {
                        for b in 0..4 {
                            inner[a] += gj[(a, b)] * grad[j][b];
                        }
                    }
                }
                let coef = I * (mass_term / (1.0 - r * r));
                for a in 0..4 {
                    inner[a] += coef * val[a];
                }
                let pref = I * (0.5 * (1.0 + r * r));
                let mut h2 = 0.0;
                for a in 0..4 {
                    let mut ha = ZERO;
                    for b in 0..4 {
                        ha += g.gamma[0][(a, b)] * inner[b];
                    }
                    h2 += (pref * ha).norm_sqr();
                }
                let gr2: f64 = grad.iter().flat_map(|gj| gj.iter()).map(|z| z.norm_sqr()).sum();
                let v2: f64 = val.iter().map(|z| z.norm_sqr()).sum();
                out.h_norm2 += weight * h2 * dv;
                out.grad_norm2 += weight * gr2 * dv;
                out.grad_flat2 += gr2 * dv;
                out.hardy_lhs += v2 / (1.0 - r * r).powi(2) * dv;
            }
        }
    }
    out
}

/// Checks the elliptic estimate `sqrt(L/12)||H_M Psi|| >= (|M| - sqrt(L/12))||grad Psi||`
/// and the ball Hardy inequality `int |Psi|^2/(1-|x|^2)^2 <= int |grad Psi|^2` by
/// spherical-coordinate quadrature at `resolution` and `2*resolution`.
pub fn verify_cartesian_identity(
    family: &[&dyn BallSpinor],
    params: &PhysicalParams,
    resolution: usize,
) -> Result<CartesianReport> {
    let thr = params.bf_threshold();
    if params.mass.abs() <= thr {
        return Err(Error::Regime(format!(
            "elliptic estimate needs |M| > sqrt(Lambda/12) = {thr}"
        )));
    }
    let mut report = CartesianReport {
        lhs: vec![],
        rhs: vec![],
        elliptic_margin: f64::INFINITY,
        hardy_margin: f64::INFINITY,
    };
    for psi in family {
        let coarse = ball_integrals(*psi, params, resolution);
        let fine = ball_integrals(*psi, params, 2 * resolution);
        for (a, b) in [(coarse.h_norm2, fine.h_norm2), (coarse.grad_flat2, fine.grad_flat2)] {
            if b > 0.0 && ((a - b) / b).abs() > 0.01 {
                return Err(Error::Resolution(format!(
                    "ball quadrature changed by {:.2e} under refinement",
                    ((a - b) / b).abs()
                )));
            }
        }
        let lhs = thr * fine.h_norm2.sqrt();
        let rhs = (params.mass.abs() - thr) * fine.grad_norm2.sqrt();
        report.lhs.push(lhs);
        report.rhs.push(rhs);
        if lhs > 0.0 {
            report.elliptic_margin = report.elliptic_margin.min((lhs - rhs) / lhs);
        }
        if fine.grad_flat2 > 0.0 {
            report.hardy_margin =
                report.hardy_margin.min((fine.grad_flat2 - fine.hardy_lhs) / fine.grad_flat2);
        }
    }
    Ok(report)
}

/// Radial form of the ball Hardy inequality:
/// `(int f^2 rho^2/(1-rho^2)^2, int rho^2 f'^2)` by Gauss–Legendre.
pub fn radial_hardy_sides(f: impl Fn(f64) -> (f64, f64), nodes: usize) -> (f64, f64) {
    let (rho, w) = gauss_legendre_on(nodes, 0.0, 1.0);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (&r, &w) in rho.iter().zip(&w) {
        let (v, d) = f(r);
        lhs += w * v * v * r * r / (1.0 - r * r).powi(2);
        rhs += w * r * r * d * d;
    }
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_round_trips() {
        let p = PhysicalParams::new(1.7, 0.3).unwrap();
        for &r in &[0.0, 0.1, 2.0, 40.0] {
            let rho = coordinate_map(r, Coord::R, Coord::Rho, &p).unwrap();
            let back = coordinate_map(rho, Coord::Rho, Coord::R, &p).unwrap();
            assert!((back - r).abs() < 1e-14 * (1.0 + r));
        }
        assert!(coordinate_map(1.0, Coord::Rho, Coord::X, &p).is_err());
        assert!(coordinate_map(-1.0, Coord::R, Coord::X, &p).is_err());
    }
}
