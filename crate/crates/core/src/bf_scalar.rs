//! Scalar radial operators `h_l = -d²/dx² + (2-alpha)/cos²x + l(l+1)/sin²x`
//! on `(0, pi/2)`: positivity and Hardy bounds, Weyl endpoint
//! classification, and the self-adjoint extensions at `x = pi/2`.
//!
//! With `y = cos 2x` the functions `sin^a x cos^b x P(y)`, `a = l + 1`,
//! `b = 1/2 ± nu`, `nu = sqrt(9/4 - alpha)`, carry the exact endpoint powers,
//! and `h_l` acts on them as a polynomial operator in `y`. The `+` family
//! spans the Friedrichs (core) domain; the union of both families, cut by one
//! linear condition on the two leading boundary coefficients, spans the
//! domain of the extension with mixing angle `theta`.

use std::f64::consts::{FRAC_PI_2, LN_2};

use gauss_quad::jacobi::GaussJacobi;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jacobi;
use crate::quadrature::{gauss_legendre_on, DeRule};

/// Conformal value: the potential term `(2-alpha)/cos²x` vanishes.
pub const ALPHA_CONFORMAL: f64 = 2.0;
/// Below (or at) this value `x = pi/2` is in the limit point case.
pub const ALPHA_LOWER: f64 = 1.25;
/// Upper bound for positivity; beyond it the exponents become complex.
pub const ALPHA_UPPER: f64 = 2.25;

/// Width of the neighbourhood of `ALPHA_LOWER` decided by exact exponents.
const BORDERLINE: f64 = 1e-6;
/// Relative mass cut for the near-dependent union basis.
const UNION_MASS_CUT: f64 = 1e-13;

/// Mass coefficient and orbital index of one radial operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KgParams {
    pub alpha: f64,
    pub l: u32,
}

impl KgParams {
    pub fn new(alpha: f64, l: u32) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be finite, got {alpha}")));
        }
        Ok(KgParams { alpha, l })
    }

    /// `nu = sqrt(9/4 - alpha)`, `None` above the upper threshold.
    pub fn nu(&self) -> Option<f64> {
        (self.alpha <= ALPHA_UPPER).then(|| (ALPHA_UPPER - self.alpha).max(0.0).sqrt())
    }

    /// Potential `(2-alpha)/cos²x + l(l+1)/sin²x`, written with `s = pi/2 - x`.
    pub fn potential(&self, x: f64, s: f64) -> f64 {
        let ll = (self.l * (self.l + 1)) as f64;
        (2.0 - self.alpha) / (s.sin() * s.sin()) + ll / (x.sin() * x.sin())
    }
}

/// Which self-adjoint realization is discretized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryTreatment {
    /// Closure of compactly supported functions (Friedrichs extension when
    /// `x = pi/2` is limit circle).
    Core,
    /// Leading behaviour `c s^{1/2+nu} + c' s^{1/2-nu}` with `c' cos(theta) = c sin(theta)`.
    Extension(f64),
}

/// One basis family `kappa sin^a x cos^b x p_j(cos 2x)`.
#[derive(Debug, Clone, Copy)]
struct Family {
    b: f64,
    size: usize,
}

impl Family {
    fn jacobi_params(&self, a: f64) -> (f64, f64) {
        (a - 0.5, self.b - 0.5)
    }

    /// Normalization making the family orthonormal in `L²(0, pi/2)`.
    fn kappa(&self, a: f64) -> f64 {
        (0.5 * (a + self.b + 1.0) * LN_2).exp()
    }
}

/// Symmetric generalized eigenproblem `h v = lambda mass v` for one realization.
#[derive(Debug, Clone)]
pub struct KgMatrices {
    pub kg: KgParams,
    pub treatment: BoundaryTreatment,
    pub h: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    /// Relative asymmetry of `h` before symmetrization.
    pub symmetry_defect: f64,
}

fn regime_error(kg: &KgParams, what: &str) -> Error {
    Error::Regime(format!(
        "{what} requires {ALPHA_LOWER} < alpha < {ALPHA_UPPER}, got alpha = {}",
        kg.alpha
    ))
}

/// Assembles `h_l` on `n_basis` functions per family by exact Gauss–Jacobi quadrature.
pub fn assemble_hl(kg: KgParams, n_basis: usize, treatment: BoundaryTreatment) -> Result<KgMatrices> {
    if n_basis < 2 {
        return Err(Error::Config(format!("need at least 2 basis functions, got {n_basis}")));
    }
    let nu = kg.nu().ok_or_else(|| regime_error(&kg, "a real discretization"))?;
    let a = kg.l as f64 + 1.0;
    let families = match treatment {
        BoundaryTreatment::Core => vec![Family { b: 0.5 + nu, size: n_basis }],
        BoundaryTreatment::Extension(theta) => {
            if !(kg.alpha > ALPHA_LOWER && kg.alpha < ALPHA_UPPER) {
                return Err(regime_error(&kg, "a boundary extension"));
            }
            if !theta.is_finite() {
                return Err(Error::Config(format!("theta must be finite, got {theta}")));
            }
            vec![Family { b: 0.5 + nu, size: n_basis }, Family { b: 0.5 - nu, size: n_basis }]
        }
    };
    let dim: usize = families.iter().map(|f| f.size).sum();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let mut mass = DMatrix::<f64>::zeros(dim, dim);
    let mut row0 = 0;
    for fi in &families {
        let mut col0 = 0;
        for fj in &families {
            let (hb, mb) = block(a, fi, fj);
            h.view_mut((row0, col0), (fi.size, fj.size)).copy_from(&hb);
            mass.view_mut((row0, col0), (fi.size, fj.size)).copy_from(&mb);
            col0 += fj.size;
        }
        row0 += fi.size;
    }
    if let BoundaryTreatment::Extension(theta) = treatment {
        // Leading coefficients at x = pi/2 (y = -1): c from the + family, c' from the - family.
        let mut row = DVector::<f64>::zeros(dim);
        let mut off = 0;
        for (k, f) in families.iter().enumerate() {
            let (ja, jb) = f.jacobi_params(a);
            let at_end = jacobi::values(f.size, ja, jb, -1.0);
            let weight = if k == 0 { -theta.sin() } else { theta.cos() };
            for j in 0..f.size {
                row[off + j] = weight * f.kappa(a) * at_end[j];
            }
            off += f.size;
        }
        let e = complement(&row);
        h = e.transpose() * h * &e;
        mass = e.transpose() * mass * &e;
    }
    let norm = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let symmetry_defect = (&h - h.transpose()).iter().fold(0.0f64, |m, v| m.max(v.abs())) / norm.max(f64::MIN_POSITIVE);
    let h = (&h + h.transpose()) * 0.5;
    let mass = (&mass + mass.transpose()) * 0.5;
    Ok(KgMatrices { kg, treatment, h, mass, symmetry_defect })
}

/// Blocks `<phi_i, h phi_j>` and `<phi_i, phi_j>` between two families.
fn block(a: f64, fi: &Family, fj: &Family) -> (DMatrix<f64>, DMatrix<f64>) {
    let bbar = 0.5 * (fi.b + fj.b);
    // ∫ sin^{2a} cos^{2 bbar} f(y) dx = 2^{-(a + bbar - 1)} / 4 ∫ (1-y)^{a-1/2} (1+y)^{bbar-1/2} f dy
    let scale = fi.kappa(a) * fj.kappa(a) * (-(a + bbar - 1.0) * LN_2).exp() / 4.0;
    let nodes = fi.size + fj.size + 2;
    let rule = GaussJacobi::new(
        nodes.try_into().expect("positive node count"),
        (a - 0.5).try_into().expect("jacobi parameter above -1"),
        (bbar - 0.5).try_into().expect("jacobi parameter above -1"),
    );
    let (ia, ib) = fi.jacobi_params(a);
    let (ja, jb) = fj.jacobi_params(a);
    let mut h = DMatrix::<f64>::zeros(fi.size, fj.size);
    let mut m = DMatrix::<f64>::zeros(fi.size, fj.size);
    for &(y, w) in rule.as_node_weight_pairs() {
        let pi = jacobi::values(fi.size, ia, ib, y);
        let (pj, dj) = jacobi::values_and_derivatives(fj.size, ja, jb, y);
        let d2j = second_derivatives(fj.size, ja, jb, y);
        for j in 0..fj.size {
            // h (g P) = g [ -4(1-y²) P'' + 4((a-b) + (a+b+1) y) P' + (a+b)² P ]
            let lp = -4.0 * (1.0 - y * y) * d2j[j]
                + 4.0 * ((a - fj.b) + (a + fj.b + 1.0) * y) * dj[j]
                + (a + fj.b).powi(2) * pj[j];
            for i in 0..fi.size {
                h[(i, j)] += w * scale * pi[i] * lp;
                m[(i, j)] += w * scale * pi[i] * pj[j];
            }
        }
    }
    (h, m)
}

/// Second derivatives of the orthonormal Jacobi polynomials.
fn second_derivatives(n: usize, a: f64, b: f64, t: f64) -> Vec<f64> {
    let mut d2 = vec![0.0; n];
    if n > 2 {
        let q = jacobi::values(n - 2, a + 2.0, b + 2.0, t);
        for k in 2..n {
            let kf = k as f64;
            d2[k] = (kf * (kf + a + b + 1.0) * (kf - 1.0) * (kf + a + b + 2.0)).sqrt() * q[k - 2];
        }
    }
    d2
}

/// Orthonormal basis of the complement of `row`, as columns.
fn complement(row: &DVector<f64>) -> DMatrix<f64> {
    let n = row.len();
    let r = row / row.norm();
    let proj = DMatrix::<f64>::identity(n, n) - &r * r.transpose();
    let eig = proj.symmetric_eigen();
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    DMatrix::from_fn(n, keep.len(), |i, c| eig.eigenvectors[(i, keep[c])])
}

/// Eigenvalues of `h v = lambda mass v`, ascending, by canonical orthogonalization.
pub fn generalized_eigenvalues(mats: &KgMatrices) -> Result<Vec<f64>> {
    let me = mats.mass.clone().symmetric_eigen();
    let top = me.eigenvalues.max();
    if !(top > 0.0 && top.is_finite()) {
        return Err(Error::Numeric("mass matrix is not positive".into()));
    }
    let keep: Vec<usize> = (0..me.eigenvalues.len()).filter(|&i| me.eigenvalues[i] > UNION_MASS_CUT * top).collect();
    let x = DMatrix::from_fn(mats.mass.nrows(), keep.len(), |i, c| {
        me.eigenvectors[(i, keep[c])] / me.eigenvalues[keep[c]].sqrt()
    });
    let reduced = x.transpose() * &mats.h * &x;
    let sym = (&reduced + reduced.transpose()) * 0.5;
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("eigen-solver produced non-finite values".into()));
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Lowest `count` eigenvalues of the core (Friedrichs) realization.
pub fn core_spectrum(kg: KgParams, n_basis: usize, count: usize) -> Result<Vec<f64>> {
    let mats = assemble_hl(kg, n_basis, BoundaryTreatment::Core)?;
    Ok(generalized_eigenvalues(&mats)?.into_iter().take(count).collect())
}

/// Lowest `count` eigenvalues of the extension with mixing angle `theta`.
pub fn extension_spectrum(kg: KgParams, theta: f64, n_basis: usize, count: usize) -> Result<Vec<f64>> {
    let mats = assemble_hl(kg, n_basis, BoundaryTreatment::Extension(theta))?;
    Ok(generalized_eigenvalues(&mats)?.into_iter().take(count).collect())
}

/// Lower bound `min(9/4 - alpha, 1/4)` of the Rayleigh quotient.
pub fn positivity_floor(alpha: f64) -> f64 {
    (ALPHA_UPPER - alpha).min(0.25)
}

/// Smooth compactly supported radial test function of orbital index `l`:
/// a sum of bumps `amp * exp(1 - 1/(1 - r²))`, `r = (x - centre)/width`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpSample {
    pub l: u32,
    pub bumps: Vec<(f64, f64, f64)>,
}

impl BumpSample {
    /// Value and derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for &(c, w, amp) in &self.bumps {
            let r = (x - c) / w;
            if r.abs() < 1.0 {
                let q = 1.0 - r * r;
                let e = (1.0 - 1.0 / q).exp();
                v += amp * e;
                d += amp * e * (-2.0 * r / (q * q)) / w;
            }
        }
        (v, d)
    }

    /// Closed support `[lo, hi]` inside `(0, pi/2)`.
    pub fn support(&self) -> (f64, f64) {
        let lo = self.bumps.iter().map(|b| b.0 - b.1).fold(f64::INFINITY, f64::min);
        let hi = self.bumps.iter().map(|b| b.0 + b.1).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// `count` random superpositions of 1–4 bumps with `l <= l_max`, reproducible from `seed`.
pub fn random_bump_samples(count: usize, l_max: u32, seed: u64) -> Vec<BumpSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.random_range(1..=4);
            let bumps = (0..k)
                .map(|_| {
                    let lo = rng.random_range(1e-3..1.4);
                    let hi = rng.random_range(lo + 0.05..FRAC_PI_2 - 1e-4);
                    (0.5 * (lo + hi), 0.5 * (hi - lo), rng.random_range(-1.0..1.0))
                })
                .collect();
            BumpSample { l: rng.random_range(0..=l_max), bumps }
        })
        .collect()
}

/// `(<h_l f, f>, ‖f‖²)` by composite Gauss–Legendre over the support.
pub fn quadratic_form(alpha: f64, f: &BumpSample) -> (f64, f64) {
    let kg = KgParams { alpha, l: f.l };
    let (lo, hi) = f.support();
    let (lo, hi) = (lo.max(0.0), hi.min(FRAC_PI_2));
    let panels = 64;
    let h = (hi - lo) / panels as f64;
    let (mut e, mut n) = (0.0, 0.0);
    for p in 0..panels {
        let (xs, ws) = gauss_legendre_on(16, lo + p as f64 * h, lo + (p + 1) as f64 * h);
        for (&x, &w) in xs.iter().zip(&ws) {
            let (v, d) = f.eval(x);
            e += w * (d * d + kg.potential(x, FRAC_PI_2 - x) * v * v);
            n += w * v * v;
        }
    }
    (e, n)
}

/// Smallest Rayleigh quotient `<h f, f>/‖f‖²` over the samples.
pub fn positivity_check(alpha: f64, samples: &[BumpSample]) -> Result<f64> {
    if alpha > ALPHA_UPPER {
        return Err(Error::Regime(format!("positivity needs alpha <= {ALPHA_UPPER}, got {alpha}")));
    }
    let mut worst = f64::INFINITY;
    for f in samples {
        let (e, n) = quadratic_form(alpha, f);
        if !(n > 0.0) {
            return Err(Error::Precondition("Rayleigh quotient of the zero function is undefined".into()));
        }
        worst = worst.min(e / n);
    }
    Ok(worst)
}

/// Largest ratio `∫ phi²/cos²x / (4 ∫ phi'²)` over functions vanishing at
/// `x = pi/2`; `phi(x, s)` returns value and `x`-derivative. Zero functions are skipped.
pub fn hardy_trig_check(samples: &[&dyn Fn(f64, f64) -> (f64, f64)]) -> f64 {
    let rule = DeRule::new(0.01);
    let mut worst: f64 = 0.0;
    for phi in samples {
        let lhs = rule.integrate(|x, s| {
            (phi(x, s).0 / s.sin()).powi(2)
        });
        let rhs = 4.0 * rule.integrate(|x, s| phi(x, s).1.powi(2));
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    worst
}

/// Near-optimal Hardy profile `s^{1/2 + eps}`: value and `x`-derivative.
pub fn hardy_power_profile(eps: f64) -> impl Fn(f64, f64) -> (f64, f64) {
    move |_x, s| (s.powf(0.5 + eps), -(0.5 + eps) * s.powf(eps - 0.5))
}

/// Weyl alternative at a singular endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeylClass {
    LimitPoint,
    LimitCircle,
}

impl WeylClass {
    pub fn tag(self) -> &'static str {
        match self {
            WeylClass::LimitPoint => "limit_point",
            WeylClass::LimitCircle => "limit_circle",
        }
    }
}

/// Classification of both endpoints of `h_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylReport {
    /// Endpoint `x = pi/2`.
    pub boundary: WeylClass,
    /// Endpoint `x = 0`.
    pub centre: WeylClass,
    /// True when `alpha` is within `1e-6` of `5/4` and the exact exponents decided.
    pub borderline: bool,
    /// Richardson-extrapolated tail `∫ u²` of the less regular solution at
    /// `x = pi/2` (infinite when it diverges).
    pub boundary_tail: f64,
}

impl WeylReport {
    /// Unique self-adjoint realization iff both endpoints are limit point.
    pub fn essentially_self_adjoint(&self) -> bool {
        self.boundary == WeylClass::LimitPoint && self.centre == WeylClass::LimitPoint
    }
}

/// Initial value and derivative of one Frobenius branch at distance `d`.
type Branch = Box<dyn Fn(f64) -> (f64, f64)>;

/// Tail test on `[delta/1024, delta]`: integrates `u'' = V u` outward from the
/// Frobenius start and inspects the dyadic increments of `∫ u²`.
/// Returns `(square integrable, extrapolated tail, increment ratio)`.
fn tail_test(branch: &Branch, v: &dyn Fn(f64) -> f64) -> (bool, f64, f64) {
    const DELTA: f64 = 1e-2;
    const LEVELS: usize = 10;
    const STEPS: usize = 400;
    let d_min = DELTA / 1024.0;
    // RK4 in t = ln d: y = u, z = du/dd; dy/dt = d z, dz/dt = d V(d) y.
    let (mut y, mut z) = branch(d_min);
    let dt = LN_2 / STEPS as f64;
    let rhs = |t: f64, y: f64, z: f64| {
        let d = t.exp();
        (d * z, d * v(d) * y)
    };
    let mut increments = vec![0.0; LEVELS];
    let mut t = d_min.ln();
    for level in 0..LEVELS {
        // Simpson on the RK4 nodes of this dyadic shell.
        let mut acc = 0.0;
        for _ in 0..STEPS {
            let f0 = y * y * t.exp();
            let (k1y, k1z) = rhs(t, y, z);
            let (k2y, k2z) = rhs(t + 0.5 * dt, y + 0.5 * dt * k1y, z + 0.5 * dt * k1z);
            let (k3y, k3z) = rhs(t + 0.5 * dt, y + 0.5 * dt * k2y, z + 0.5 * dt * k2z);
            let (k4y, k4z) = rhs(t + dt, y + dt * k3y, z + dt * k3z);
            let ym = y + 0.5 * dt * (k1y + k2y) * 0.5;
            y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            z += dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
            let f1 = y * y * (t + dt).exp();
            let fm = ym * ym * (t + 0.5 * dt).exp();
            acc += dt / 6.0 * (f0 + 4.0 * fm + f1);
            t += dt;
        }
        // Shells ordered from the endpoint outward; store nearest-first.
        increments[level] = acc;
    }
    // increments[0] is the shell nearest the endpoint.
    let ratio = increments[0] / increments[1];
    let far: f64 = increments.iter().sum();
    if ratio < 1.0 {
        (true, far + increments[0] * ratio / (1.0 - ratio), ratio)
    } else {
        (false, f64::INFINITY, ratio)
    }
}

/// Decides the Weyl alternative at both endpoints by integrating the two
/// Frobenius solutions of `h_l u = 0` and testing square integrability.
pub fn weyl_classify(kg: KgParams) -> Result<WeylReport> {
    let kgc = kg;
    let v_boundary = move |d: f64| kgc.potential(FRAC_PI_2 - d, d);
    let v_centre = move |d: f64| kgc.potential(d, FRAC_PI_2 - d);
    // Less regular branch at pi/2.
    let weak: Branch = match kg.nu() {
        Some(nu) if nu > 0.0 => Box::new(move |d: f64| (d.powf(0.5 - nu), (0.5 - nu) * d.powf(-0.5 - nu))),
        Some(_) => Box::new(|d: f64| (d.sqrt() * d.ln(), (0.5 * d.ln() + 1.0) / d.sqrt())),
        None => {
            let mu = (kg.alpha - ALPHA_UPPER).sqrt();
            Box::new(move |d: f64| {
                let ph = mu * d.ln();
                (d.sqrt() * ph.sin(), (0.5 * ph.sin() + mu * ph.cos()) / d.sqrt())
            })
        }
    };
    let borderline = (kg.alpha - ALPHA_LOWER).abs() < BORDERLINE;
    let (integrable, tail, _) = tail_test(&weak, &v_boundary);
    let boundary = if borderline {
        // s^{1/2-nu} is square integrable iff nu < 1.
        if kg.alpha > ALPHA_LOWER {
            WeylClass::LimitCircle
        } else {
            WeylClass::LimitPoint
        }
    } else if integrable {
        WeylClass::LimitCircle
    } else {
        WeylClass::LimitPoint
    };
    let l = kg.l as f64;
    let singular: Branch = Box::new(move |d: f64| (d.powf(-l), -l * d.powf(-l - 1.0)));
    let (centre_integrable, _, _) = tail_test(&singular, &v_centre);
    let centre = if centre_integrable { WeylClass::LimitCircle } else { WeylClass::LimitPoint };
    Ok(WeylReport { boundary, centre, borderline, boundary_tail: tail })
}

/// The function `sqrt(cos x / (1 + sin x)) = sqrt(tan(s/2))` and its
/// `x`-derivative, evaluated in `s = pi/2 - x` to avoid cancellation.
pub fn zero_energy_function(x: f64) -> (f64, f64) {
    let half = 0.5 * (FRAC_PI_2 - x);
    let f = half.tan().sqrt();
    let c = half.cos();
    (f, -1.0 / (4.0 * f * c * c))
}

/// `E(f) = ∫ f'² + (2 - alpha) f²/cos²x` at `alpha = 9/4` for the zero-energy
/// function, by `n_nodes`-point Gauss–Legendre on a boundary-graded split.
pub fn zero_energy_form(n_nodes: usize) -> f64 {
    let mut acc = 0.0;
    let mut edges = vec![0.0, 1.0];
    let mut e = 1.0;
    while FRAC_PI_2 - e > 1e-12 {
        e = FRAC_PI_2 - 0.5 * (FRAC_PI_2 - e);
        edges.push(e);
    }
    for w in edges.windows(2) {
        let (xs, ws) = gauss_legendre_on(n_nodes, w[0], w[1]);
        for (&x, &wt) in xs.iter().zip(&ws) {
            let (f, d) = zero_energy_function(x);
            let c = (FRAC_PI_2 - x).sin();
            acc += wt * (d * d - 0.25 * f * f / (c * c));
        }
    }
    acc
}
