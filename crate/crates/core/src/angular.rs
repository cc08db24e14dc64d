//! Half-integer spin-weighted harmonics `T^l_{±1/2,n}` and coefficient-space
//! operators on the sphere.
//!
//! Half-integers are stored doubled (`two_l`, `two_n`) so index arithmetic is
//! exact. The harmonics are built from Wigner d-functions evaluated through
//! the Jacobi-polynomial representation; the Jacobi three-term recurrence
//! runs upward in the degree `l` with a normalized seed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gamma_geometry::C64;
use crate::jacobi;
use crate::quadrature::gauss_legendre;

const I: C64 = C64::new(0.0, 1.0);

/// Angular sector `(l, n)` with `l` a positive half-odd-integer and `l - |n|` a
/// non-negative integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    two_l: i32,
    two_n: i32,
}

impl ModeIndex {
    pub fn new(two_l: i32, two_n: i32) -> Result<Self> {
        if two_l < 1 || two_l % 2 == 0 {
            return Err(Error::Argument(format!("two_l must be a positive odd integer, got {two_l}")));
        }
        if two_n.abs() > two_l || (two_l - two_n.abs()) % 2 != 0 {
            return Err(Error::Argument(format!(
                "two_n = {two_n} incompatible with two_l = {two_l}"
            )));
        }
        Ok(ModeIndex { two_l, two_n })
    }

    /// Representative `n = l` of the degenerate family sharing one radial problem.
    pub fn from_kappa(kappa: u32) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::Argument("kappa must be at least 1".into()));
        }
        let two_l = 2 * kappa as i32 - 1;
        ModeIndex::new(two_l, two_l)
    }

    pub fn two_l(&self) -> i32 {
        self.two_l
    }

    pub fn two_n(&self) -> i32 {
        self.two_n
    }

    pub fn l(&self) -> f64 {
        self.two_l as f64 / 2.0
    }

    pub fn n(&self) -> f64 {
        self.two_n as f64 / 2.0
    }

    /// `kappa = l + 1/2`, a positive integer.
    pub fn kappa(&self) -> u32 {
        ((self.two_l + 1) / 2) as u32
    }

    /// Number of `n` values sharing this `l`: `2l + 1`.
    pub fn n_degeneracy(&self) -> u32 {
        (self.two_l + 1) as u32
    }

    /// All `(l, n)` with `2l <= two_l_max`, ordered by `l` then `n`.
    pub fn all_up_to(two_l_max: i32) -> Vec<ModeIndex> {
        let mut out = vec![];
        let mut two_l = 1;
        while two_l <= two_l_max {
            let mut two_n = -two_l;
            while two_n <= two_l {
                out.push(ModeIndex { two_l, two_n });
                two_n += 2;
            }
            two_l += 2;
        }
        out
    }
}

/// Spin weight `±1/2` of a harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Plus,
    Minus,
}

impl Spin {
    pub fn two_s(self) -> i32 {
        match self {
            Spin::Plus => 1,
            Spin::Minus => -1,
        }
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Plus => Spin::Minus,
            Spin::Minus => Spin::Plus,
        }
    }

    pub fn sign(self) -> f64 {
        self.two_s() as f64
    }

    pub fn parse(tag: &str) -> Result<Spin> {
        match tag {
            "+1/2" | "+" | "plus" => Ok(Spin::Plus),
            "-1/2" | "-" | "minus" => Ok(Spin::Minus),
            other => Err(Error::Argument(format!("invalid spin tag {other:?}"))),
        }
    }
}

/// `i^k` for any integer `k`.
pub fn i_pow(k: i32) -> C64 {
    match k.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// `sqrt((2j+1)/(4 pi)) d^j_{m' m}(beta)` from doubled indices.
///
/// With `k = j - max(|m|, |m'|)`, `a = |m - m'|`, `b = |m + m'|` the factorial
/// prefactors of the Jacobi form collapse against the Jacobi norm, leaving
/// `(-1)^lambda sqrt(2^{a+b+1}/(4 pi)) sin^a(beta/2) cos^b(beta/2) p_k^{(a,b)}(cos beta)`.
fn scaled_wigner_d(two_j: i32, two_mp: i32, two_m: i32, beta: f64) -> f64 {
    if two_mp.abs() > two_j || two_m.abs() > two_j {
        return 0.0;
    }
    let cands = [
        (two_j + two_m, 0),
        (two_j - two_m, 1),
        (two_j + two_mp, 2),
        (two_j - two_mp, 3),
    ];
    let (two_k, which) = cands.iter().copied().min_by_key(|c| c.0).unwrap();
    let k = (two_k / 2) as usize;
    let (a, lambda) = match which {
        0 => ((two_mp - two_m) / 2, (two_mp - two_m) / 2),
        1 => ((two_m - two_mp) / 2, 0),
        2 => ((two_m - two_mp) / 2, 0),
        _ => ((two_mp - two_m) / 2, (two_mp - two_m) / 2),
    };
    let b = (two_j - two_k) - a;
    let (a, b) = (a as f64, b as f64);
    let p = jacobi::values(k + 1, a, b, beta.cos());
    let sign = if lambda.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let half = 0.5 * beta;
    let norm = (0.5 * ((a + b + 1.0) * std::f64::consts::LN_2 - (4.0 * PI).ln())).exp();
    sign * norm
        * half.sin().powf(a)
        * half.cos().powf(b)
        * p[k]
}

/// Wigner `d^j_{m' m}(beta)` from doubled indices.
pub fn wigner_d(two_j: i32, two_mp: i32, two_m: i32, beta: f64) -> f64 {
    let norm = ((two_j as f64 + 1.0) / (4.0 * PI)).sqrt();
    scaled_wigner_d(two_j, two_mp, two_m, beta) / norm
}

/// `P^l_{s,n}(cos theta) = i^{s-n} sqrt((2l+1)/(4 pi)) d^l_{s,n}(theta)`.
pub fn p_function(mode: ModeIndex, spin: Spin, theta: f64) -> C64 {
    let two_s = spin.two_s();
    i_pow((two_s - mode.two_n) / 2) * scaled_wigner_d(mode.two_l, two_s, mode.two_n, theta)
}

/// `T^l_{s,n}(theta, phi) = e^{-i n phi} P^l_{s,n}(cos theta)`.
///
/// Accepts `phi` on the double cover `[0, 4 pi)`; `T(theta, phi + 2 pi) = -T`.
pub fn eval_t(mode: ModeIndex, spin: Spin, theta: f64, phi: f64) -> C64 {
    // Reduce phi to [0, 2pi) and track the sign so anti-periodicity is exact.
    let turns = (phi / (2.0 * PI)).floor();
    let reduced = phi - turns * 2.0 * PI;
    let flip = (turns as i64).rem_euclid(2) == 1;
    let phase = C64::from_polar(1.0, -0.5 * mode.two_n as f64 * reduced);
    let v = phase * p_function(mode, spin, theta);
    if flip {
        -v
    } else {
        v
    }
}

/// Closed form of the lowest harmonic with the constant `sqrt(3/(4 pi))`; not unit-normalized.
pub fn t_half_literal(theta: f64, phi: f64) -> C64 {
    (3.0 / (4.0 * PI)).sqrt() * C64::from_polar(1.0, -0.5 * phi) * (0.5 * theta).cos()
}

/// Closed form of `T^{1/2}_{1/2,1/2}` consistent with unit `L^2(S^2)` norm.
pub fn t_half_normalized(theta: f64, phi: f64) -> C64 {
    (1.0 / (2.0 * PI)).sqrt() * C64::from_polar(1.0, -0.5 * phi) * (0.5 * theta).cos()
}

/// Max residual over `thetas` of
/// `(d_theta + 1/(2 tan theta)) T_{±} = ±(n/sin theta) T_{±} - i (l + 1/2) T_{∓}`
/// with a central difference of step `h` for `d_theta`.
pub fn apply_equt(mode: ModeIndex, spin: Spin, thetas: &[f64], h: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &th in thetas {
        if th < 1e-3 || th > PI - 1e-3 {
            return Err(Error::Precondition(format!("theta = {th} too close to a pole")));
        }
        let f = |t: f64| p_function(mode, spin, t);
        let d = (f(th + h) - f(th - h)) / (2.0 * h);
        let lhs = d + f(th) * (0.5 / th.tan());
        let rhs = f(th) * (spin.sign() * mode.n() / th.sin())
            - I * (mode.kappa() as f64) * p_function(mode, spin.flip(), th);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Spherical harmonic `Y^l_m = e^{-i m phi} sqrt((2l+1)/(4 pi)) d^l_{m,0}(theta)`, zero for `|m| > l`.
pub fn y_lm(l: i32, m: i32, theta: f64, phi: f64) -> C64 {
    if m.abs() > l {
        return C64::new(0.0, 0.0);
    }
    C64::from_polar(1.0, -(m as f64) * phi) * scaled_wigner_d(2 * l, 2 * m, 0, theta)
}

/// Max pointwise residual of the four identities expressing half-angle
/// multiples of `T^{l+1/2}_{∓1/2, m-1/2}` through `Y^l_m` and `Y^l_{m-1}`:
///
/// ```text
/// e^{-iφ/2} cos(θ/2) T_{-} = i^m ν [ a (x3+1)/2 Y_m - b (x1-i x2)/2 Y_{m-1} ]
/// e^{+iφ/2} sin(θ/2) T_{-} = i^m ν [ a (x1+i x2)/2 Y_m - b (1-x3)/2 Y_{m-1} ]
/// e^{+iφ/2} cos(θ/2) T_{+} = i^{m-1} ν [ a (x1+i x2)/2 Y_m + b (x3+1)/2 Y_{m-1} ]
/// e^{-iφ/2} sin(θ/2) T_{+} = i^{m-1} ν [ a (1-x3)/2 Y_m + b (x1-i x2)/2 Y_{m-1} ]
/// ```
///
/// with `a = sqrt((l-m+1)/(l+1))`, `b = sqrt((l+m)/(l+1))`,
/// `ν = sqrt((2l+2)/(2l+1))` and `x = (sinθ cosφ, sinθ sinφ, cosθ)`.
/// `scale` multiplies both sides (0 gives the trivial identity).
pub fn wshs_crosscheck(l: i32, m: i32, n_theta: usize, n_phi: usize, scale: f64) -> Result<[f64; 4]> {
    if l < 0 || m < -l || m > l + 1 {
        return Err(Error::Argument(format!("need 0 <= l and -l <= m <= l+1, got l={l} m={m}")));
    }
    if 2 * l + 1 > 25 {
        return Err(Error::Argument("identities checked for l + 1/2 <= 25/2".into()));
    }
    let mode = ModeIndex::new(2 * l + 1, 2 * m - 1)?;
    let lf = l as f64;
    let mf = m as f64;
    let a = ((lf - mf + 1.0) / (lf + 1.0)).sqrt();
    let b = ((lf + mf) / (lf + 1.0)).sqrt();
    let nu = ((2.0 * lf + 2.0) / (2.0 * lf + 1.0)).sqrt();
    let mut worst = [0.0f64; 4];
    for it in 0..n_theta {
        let th = PI * (it as f64 + 0.5) / n_theta as f64;
        for ip in 0..n_phi {
            let ph = 2.0 * PI * ip as f64 / n_phi as f64;
            let (x1, x2, x3) = (th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
            let xp = C64::new(x1, x2);
            let xm = C64::new(x1, -x2);
            let ym = y_lm(l, m, th, ph);
            let ym1 = y_lm(l, m - 1, th, ph);
            let tm = eval_t(mode, Spin::Minus, th, ph);
            let tp = eval_t(mode, Spin::Plus, th, ph);
            let em = C64::from_polar(1.0, -0.5 * ph);
            let ep = C64::from_polar(1.0, 0.5 * ph);
            let (c, s) = ((0.5 * th).cos(), (0.5 * th).sin());
            let k0 = i_pow(m) * nu;
            let k1 = i_pow(m - 1) * nu;
            let pairs = [
                (em * c * tm, k0 * (ym * (a * (x3 + 1.0) / 2.0) - ym1 * xm * (b / 2.0))),
                (ep * s * tm, k0 * (ym * xp * (a / 2.0) - ym1 * (b * (1.0 - x3) / 2.0))),
                (ep * c * tp, k1 * (ym * xp * (a / 2.0) + ym1 * (b * (x3 + 1.0) / 2.0))),
                (em * s * tp, k1 * (ym * (a * (1.0 - x3) / 2.0) + ym1 * xm * (b / 2.0))),
            ];
            for (w, (lhs, rhs)) in worst.iter_mut().zip(pairs) {
                *w = w.max(((lhs - rhs) * scale).norm());
            }
        }
    }
    Ok(worst)
}

/// `∫_{S²} f dΩ` with Gauss–Legendre in `cos θ` and a uniform rule in `φ`
/// over the double cover `[0, 4π)`, halved.
pub fn sphere_quadrature(f: impl Fn(f64, f64) -> C64, n_theta: usize, n_phi: usize) -> C64 {
    let (t, w) = gauss_legendre(n_theta);
    let dphi = 4.0 * PI / n_phi as f64;
    let mut acc = C64::new(0.0, 0.0);
    for (&c, &wc) in t.iter().zip(&w) {
        let th = c.acos();
        let mut row = C64::new(0.0, 0.0);
        for k in 0..n_phi {
            row += f(th, k as f64 * dphi);
        }
        acc += row * wc;
    }
    acc * (0.5 * dphi)
}

/// Per-mode spinor coefficients `u^l_{j,n}`, components 1 and 3 in the
/// `T_{-1/2}` basis and 2 and 4 in the `T_{+1/2}` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularCoefficients {
    two_l_max: i32,
    data: BTreeMap<ModeIndex, [C64; 4]>,
}

impl AngularCoefficients {
    pub fn new(two_l_max: i32) -> Result<Self> {
        if two_l_max < 1 || two_l_max % 2 == 0 {
            return Err(Error::Config(format!(
                "two_l_max must be a positive odd integer, got {two_l_max}"
            )));
        }
        Ok(AngularCoefficients { two_l_max, data: BTreeMap::new() })
    }

    pub fn two_l_max(&self) -> i32 {
        self.two_l_max
    }

    pub fn set(&mut self, mode: ModeIndex, u: [C64; 4]) -> Result<()> {
        if mode.two_l > self.two_l_max {
            return Err(Error::Argument(format!(
                "mode two_l = {} exceeds truncation {}",
                mode.two_l, self.two_l_max
            )));
        }
        self.data.insert(mode, u);
        Ok(())
    }

    pub fn get(&self, mode: ModeIndex) -> [C64; 4] {
        self.data.get(&mode).copied().unwrap_or([C64::new(0.0, 0.0); 4])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModeIndex, &[C64; 4])> {
        self.data.iter()
    }

    fn map(&self, f: impl Fn(ModeIndex, [C64; 4]) -> [C64; 4]) -> Self {
        AngularCoefficients {
            two_l_max: self.two_l_max,
            data: self.data.iter().map(|(k, v)| (*k, f(*k, *v))).collect(),
        }
    }

    /// `⟨self, other⟩ = Σ u conj(v)`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.data
            .iter()
            .map(|(k, u)| {
                let v = other.get(*k);
                (0..4).map(|j| u[j] * v[j].conj()).sum::<C64>()
            })
            .sum()
    }
}

/// Angular Dirac action: per mode `(u1,u2,u3,u4) -> (l+1/2)(u4,u3,u2,u1)`.
pub fn angular_d_apply(c: &AngularCoefficients) -> AngularCoefficients {
    c.map(|mode, u| {
        let k = mode.kappa() as f64;
        [u[3] * k, u[2] * k, u[1] * k, u[0] * k]
    })
}

/// Orthogonal projector onto the positive (`positive = true`) or negative
/// spectral subspace of the angular Dirac action.
pub fn projector_k(positive: bool, c: &AngularCoefficients) -> AngularCoefficients {
    let s = if positive { 1.0 } else { -1.0 };
    c.map(|_, u| {
        [
            (u[0] + u[3] * s) * 0.5,
            (u[1] + u[2] * s) * 0.5,
            (u[2] + u[1] * s) * 0.5,
            (u[3] + u[0] * s) * 0.5,
        ]
    })
}

/// Isometry exchanging the `T_{+1/2}` and `T_{-1/2}` bases: `(u1,u2,u3,u4) -> (u2,u1,u4,u3)`.
pub fn j_map(c: &AngularCoefficients) -> AngularCoefficients {
    c.map(|_, u| [u[1], u[0], u[3], u[2]])
}

/// `(Σ_j Σ_{(l,n)} (l+1/2)^{2s} |u^l_{j,n}|²)^{1/2}`.
pub fn ws_norm(c: &AngularCoefficients, s: f64) -> f64 {
    c.data
        .iter()
        .map(|(mode, u)| {
            let w = (mode.kappa() as f64).powf(2.0 * s);
            w * u.iter().map(|z| z.norm_sqr()).sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wigner_d_low_order_closed_forms() {
        let b = 0.83;
        assert!((wigner_d(1, 1, 1, b) - (b / 2.0).cos()).abs() < 1e-14);
        assert!((wigner_d(1, 1, -1, b) + (b / 2.0).sin()).abs() < 1e-14);
        assert!((wigner_d(2, 0, 0, b) - b.cos()).abs() < 1e-14);
        assert!((wigner_d(2, 2, 0, b) + b.sin() / 2f64.sqrt()).abs() < 1e-14);
        assert!((wigner_d(2, 2, 2, b) - (1.0 + b.cos()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn mode_index_validation() {
        assert!(ModeIndex::new(2, 0).is_err());
        assert!(ModeIndex::new(3, 5).is_err());
        assert!(ModeIndex::new(3, 0).is_err());
        assert_eq!(ModeIndex::new(3, -1).unwrap().kappa(), 2);
        assert_eq!(ModeIndex::all_up_to(3).len(), 2 + 4);
    }
}
