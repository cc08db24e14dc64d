//! Reduced radial Dirac system of one angular mode on `x in (0, pi/2)`.
//!
//! With `kappa = l + 1/2`, `m` the reduced mass and `s = pi/2 - x`:
//!
//! ```text
//! f1 =  i u3' + (kappa/sin x) u4 - (m/cos x) u1
//! f2 = -i u4' + (kappa/sin x) u3 - (m/cos x) u2
//! f3 =  i u1' + (kappa/sin x) u2 + (m/cos x) u3
//! f4 = -i u2' + (kappa/sin x) u1 + (m/cos x) u4
//! ```
//!
//! For `0 < |m| < 1/2` every element of the maximal domain behaves near the
//! boundary like `s^{-m}(a-, b-, -i a-, i b-) + s^{m}(a+, b+, i a+, -i b+)`
//! plus `o(sqrt(s))`; the boundary amplitudes `(a-, b-, a+, b+)` are the
//! per-mode image of the trace map.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::angular::ModeIndex;
use crate::error::{Error, Result};
use crate::gamma_geometry::{PhysicalParams, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Chebyshev–Gauss nodes mapped to `(0, pi/2)` with Fejér weights and the
/// barycentric differentiation matrix.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub x: Vec<f64>,
    /// `pi/2 - x`, computed without cancellation.
    pub s: Vec<f64>,
    pub weights: Vec<f64>,
    pub diff: DMatrix<f64>,
}

impl RadialGrid {
    pub fn new(n: usize) -> Result<Arc<Self>> {
        if n < 4 {
            return Err(Error::Config(format!("radial grid needs at least 4 nodes, got {n}")));
        }
        let theta: Vec<f64> = (0..n).map(|j| (2 * j + 1) as f64 * PI / (2 * n) as f64).collect();
        let x: Vec<f64> = theta.iter().map(|t| FRAC_PI_2 * (0.5 * t).sin().powi(2)).collect();
        let s: Vec<f64> = theta.iter().map(|t| FRAC_PI_2 * (0.5 * t).cos().powi(2)).collect();
        let weights = theta
            .iter()
            .map(|&t| {
                let tail: f64 = (1..=n / 2)
                    .map(|k| (2.0 * k as f64 * t).cos() / (4.0 * (k * k) as f64 - 1.0))
                    .sum();
                (2.0 / n as f64) * (1.0 - 2.0 * tail) * (PI / 4.0)
            })
            .collect();
        let bary: Vec<f64> = theta
            .iter()
            .enumerate()
            .map(|(j, t)| if j % 2 == 0 { t.sin() } else { -t.sin() })
            .collect();
        let mut diff = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                if i != j {
                    let v = (bary[j] / bary[i]) / (x[i] - x[j]);
                    diff[(i, j)] = v;
                    row += v;
                }
            }
            diff[(i, i)] = -row;
        }
        Ok(Arc::new(RadialGrid { x, s, weights, diff }))
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Number of boundary-adjacent nodes used for amplitude fits.
    pub fn n_fit(&self) -> usize {
        (self.len() / 8).max(16).min(self.len())
    }

    fn derivative(&self, v: &[C64]) -> Vec<C64> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| v[j] * self.diff[(i, j)]).sum())
            .collect()
    }
}

/// Four complex radial profiles of one mode on a grid.
#[derive(Debug, Clone)]
pub struct RadialModeState {
    pub mode: ModeIndex,
    pub params: PhysicalParams,
    pub grid: Arc<RadialGrid>,
    pub u: [Vec<C64>; 4],
}

impl RadialModeState {
    pub fn zeros(mode: ModeIndex, params: PhysicalParams, grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        RadialModeState { mode, params, grid, u: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]) }
    }

    /// Samples `f(x, s)` at the grid nodes.
    pub fn from_fn(
        mode: ModeIndex,
        params: PhysicalParams,
        grid: Arc<RadialGrid>,
        f: impl Fn(f64, f64) -> [C64; 4],
    ) -> Self {
        let mut st = Self::zeros(mode, params, grid.clone());
        for i in 0..grid.len() {
            let v = f(grid.x[i], grid.s[i]);
            for j in 0..4 {
                st.u[j][i] = v[j];
            }
        }
        st
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.mode != other.mode {
            return Err(Error::Argument(format!(
                "states belong to different modes {:?} and {:?}",
                self.mode, other.mode
            )));
        }
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.x != other.grid.x {
            return Err(Error::Shape("states live on different grids".into()));
        }
        Ok(())
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: C64, other: &Self, beta: C64) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for j in 0..4 {
            for i in 0..self.grid.len() {
                out.u[j][i] = alpha * self.u[j][i] + beta * other.u[j][i];
            }
        }
        Ok(out)
    }

    /// `⟨self, other⟩ = Σ_j ∫ u_j conj(v_j) dx` by the grid rule.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_same(other)?;
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..4 {
            for i in 0..self.grid.len() {
                acc += self.u[j][i] * other.u[j][i].conj() * self.grid.weights[i];
            }
        }
        Ok(acc)
    }
}

/// `sum_j int |u_j|^2 dx`.
pub fn charge_norm(state: &RadialModeState) -> f64 {
    let g = &state.grid;
    (0..g.len())
        .map(|i| g.weights[i] * state.u.iter().map(|c| c[i].norm_sqr()).sum::<f64>())
        .sum()
}

/// Collocation action of the reduced hamiltonian on the grid.
pub fn apply_hm(state: &RadialModeState) -> Result<RadialModeState> {
    let g = &state.grid;
    let n = g.len();
    if state.u.iter().any(|c| c.len() != n) {
        return Err(Error::Shape(format!("profiles must have {n} samples")));
    }
    let k = state.mode.kappa() as f64;
    let m = state.params.m();
    let d: Vec<Vec<C64>> = state.u.iter().map(|c| g.derivative(c)).collect();
    let u = &state.u;
    let mut out = RadialModeState::zeros(state.mode, state.params, g.clone());
    for i in 0..n {
        let ks = k / g.x[i].sin();
        let mc = m / g.s[i].sin();
        out.u[0][i] = I * d[2][i] + u[3][i] * ks - u[0][i] * mc;
        out.u[1][i] = -I * d[3][i] + u[2][i] * ks - u[1][i] * mc;
        out.u[2][i] = I * d[0][i] + u[1][i] * ks + u[2][i] * mc;
        out.u[3][i] = -I * d[1][i] + u[0][i] * ks + u[3][i] * mc;
    }
    Ok(out)
}

/// Dense collocation matrix of the hamiltonian, unknowns ordered
/// component-major `(u1[0..n], u2[..], u3[..], u4[..])`.
pub fn collocation_matrix(mode: ModeIndex, params: &PhysicalParams, grid: &RadialGrid) -> DMatrix<C64> {
    let n = grid.len();
    let k = mode.kappa() as f64;
    let m = params.m();
    let mut h = DMatrix::<C64>::zeros(4 * n, 4 * n);
    // (row component, column component, derivative coefficient)
    for &(r, c, a) in &[(0usize, 2usize, I), (1, 3, -I), (2, 0, I), (3, 1, -I)] {
        for i in 0..n {
            for j in 0..n {
                h[(r * n + i, c * n + j)] += a * grid.diff[(i, j)];
            }
        }
    }
    for i in 0..n {
        let ks = C64::from(k / grid.x[i].sin());
        let mc = m / grid.s[i].sin();
        for &(r, c) in &[(0usize, 3usize), (1, 2), (2, 1), (3, 0)] {
            h[(r * n + i, c * n + i)] += ks;
        }
        for (r, sgn) in [(0usize, -1.0), (1, -1.0), (2, 1.0), (3, 1.0)] {
            h[(r * n + i, r * n + i)] += C64::from(sgn * mc);
        }
    }
    h
}

/// Mode-space image of `gamma^5`: `(u1, u2, u3, u4) -> (u3, u4, u1, u2)`.
pub fn gamma5_mode_matrix(n: usize) -> DMatrix<C64> {
    let mut p = DMatrix::<C64>::zeros(4 * n, 4 * n);
    for (r, c) in [(0usize, 2usize), (1, 3), (2, 0), (3, 1)] {
        for i in 0..n {
            p[(r * n + i, c * n + i)] = C64::new(1.0, 0.0);
        }
    }
    p
}

/// Boundary amplitudes of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticData {
    pub a_minus: C64,
    pub b_minus: C64,
    pub a_plus: C64,
    pub b_plus: C64,
    /// Relative RMS residual of the boundary fits.
    pub fit_residual: f64,
}

impl AsymptoticData {
    pub fn new(a_minus: C64, b_minus: C64, a_plus: C64, b_plus: C64) -> Self {
        AsymptoticData { a_minus, b_minus, a_plus, b_plus, fit_residual: 0.0 }
    }

    pub fn zero() -> Self {
        Self::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    }

    /// Stacked `(a-, b-, a+, b+)`.
    pub fn as_array(&self) -> [C64; 4] {
        [self.a_minus, self.b_minus, self.a_plus, self.b_plus]
    }

    pub fn from_array(v: [C64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    /// Amplitudes of `gamma^5 Phi` read at mass `-m`.
    pub fn chiral_exchange(&self) -> Self {
        Self::new(I * self.a_plus, -I * self.b_plus, -I * self.a_minus, I * self.b_minus)
    }
}

fn check_light(m: f64) -> Result<()> {
    if m == 0.0 {
        return Err(Error::Precondition("boundary amplitudes need m != 0".into()));
    }
    if m.abs() >= 0.5 {
        return Err(Error::Regime(format!("|m| = {} is not below the threshold 1/2", m.abs())));
    }
    Ok(())
}

/// Exponent window refused by the amplitude fit around `|m| = 1/2`.
pub const FIT_EXCLUSION: f64 = 0.02;
/// Largest accepted condition number of the column-scaled fit matrix.
pub const FIT_MAX_COND: f64 = 1e8;
/// Terms kept in each Frobenius series `s^{∓m + j}`, `j < FIT_TERMS`.
pub const FIT_TERMS: usize = 5;

/// Least-squares fit of the boundary amplitudes on the last `n_fit` nodes.
///
/// Each polarization combination (`u1 ± i u3`, `u2 ∓ i u4`) is fitted
/// against both Frobenius series `s^{-m+j}` and `s^{m+j}`; the leading
/// coefficient of the relevant series gives twice the amplitude.
pub fn extract_asymptotics(state: &RadialModeState) -> Result<AsymptoticData> {
    let m = state.params.m();
    if m.abs() >= 0.5 {
        return Ok(AsymptoticData::zero());
    }
    check_light(m)?;
    if (m.abs() - 0.5).abs() < FIT_EXCLUSION {
        return Err(Error::IllConditioned { cond: f64::INFINITY });
    }
    let g = &state.grid;
    let nf = g.n_fit();
    let rows: Vec<usize> = (g.len() - nf..g.len()).collect();
    let ncol = 2 * FIT_TERMS;
    let mut a = DMatrix::<f64>::zeros(nf, ncol);
    for (r, &i) in rows.iter().enumerate() {
        let s = g.s[i];
        for j in 0..FIT_TERMS {
            a[(r, j)] = s.powf(-m + j as f64);
            a[(r, FIT_TERMS + j)] = s.powf(m + j as f64);
        }
    }
    let scale: Vec<f64> = (0..ncol).map(|c| a.column(c).norm()).collect();
    for c in 0..ncol {
        a.column_mut(c).scale_mut(1.0 / scale[c]);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = smax / smin;
    if !(cond < FIT_MAX_COND) {
        return Err(Error::IllConditioned { cond });
    }
    let u = &state.u;
    let combos: [Box<dyn Fn(usize) -> C64>; 4] = [
        Box::new(|i| u[0][i] + I * u[2][i]),
        Box::new(|i| u[1][i] - I * u[3][i]),
        Box::new(|i| u[0][i] - I * u[2][i]),
        Box::new(|i| u[1][i] + I * u[3][i]),
    ];
    let mut amps = [C64::new(0.0, 0.0); 4];
    let mut res2 = 0.0;
    let mut data2 = 0.0;
    for (k, combo) in combos.iter().enumerate() {
        let y: Vec<C64> = rows.iter().map(|&i| combo(i)).collect();
        let yr = DVector::from_iterator(nf, y.iter().map(|z| z.re));
        let yi = DVector::from_iterator(nf, y.iter().map(|z| z.im));
        let cr = svd.solve(&yr, 0.0).map_err(|e| Error::Numeric(e.to_string()))?;
        let ci = svd.solve(&yi, 0.0).map_err(|e| Error::Numeric(e.to_string()))?;
        res2 += (&a * &cr - &yr).norm_squared() + (&a * &ci - &yi).norm_squared();
        data2 += yr.norm_squared() + yi.norm_squared();
        let col = if k < 2 { 0 } else { FIT_TERMS };
        amps[k] = C64::new(cr[col], ci[col]) / scale[col] * 0.5;
    }
    let mut out = AsymptoticData::new(amps[0], amps[1], amps[2], amps[3]);
    out.fit_residual = if data2 > 0.0 { (res2 / data2).sqrt() } else { 0.0 };
    Ok(out)
}

/// Smooth cutoff `f(t) = exp(1 - 1/(1 - t^2))` on `[0, 1)`, zero beyond; `f(0) = 1`.
pub fn cutoff(t: f64) -> f64 {
    let t = t.abs();
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Derivative of [`cutoff`].
pub fn cutoff_derivative(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - t * t;
        -2.0 * t / (q * q) * cutoff(t)
    }
}

/// State `f(s/width) [ s^{-m}(a-, b-, -i a-, i b-) + s^{m}(a+, b+, i a+, -i b+) ]`.
pub fn synthesize_from_asymptotics(
    mode: ModeIndex,
    params: PhysicalParams,
    grid: Arc<RadialGrid>,
    amps: &AsymptoticData,
    cutoff_width: f64,
) -> Result<RadialModeState> {
    let m = params.m();
    check_light(m)?;
    if !(cutoff_width > 0.0 && cutoff_width <= FRAC_PI_2) {
        return Err(Error::Argument(format!("cutoff width must lie in (0, pi/2], got {cutoff_width}")));
    }
    let v = synthesis_profile(m, amps);
    Ok(RadialModeState::from_fn(mode, params, grid, |_, s| {
        let f = cutoff(s / cutoff_width);
        let (lo, hi) = (s.powf(-m) * f, s.powf(m) * f);
        std::array::from_fn(|j| v[0][j] * lo + v[1][j] * hi)
    }))
}

/// Polarization vectors of the `s^{-m}` and `s^{m}` branches.
pub fn synthesis_profile(_m: f64, amps: &AsymptoticData) -> [[C64; 4]; 2] {
    let (am, bm, ap, bp) = (amps.a_minus, amps.b_minus, amps.a_plus, amps.b_plus);
    [[am, bm, -I * am, I * bm], [ap, bp, I * ap, -I * bp]]
}

/// Bilinear boundary form `2(a- conj(a'+) - a+ conj(a'-) + b- conj(b'+) - b+ conj(b'-))`,
/// equal to `⟨H a, b⟩ - ⟨a, H b⟩` for the inner product linear in its first slot.
pub fn boundary_form(a: &AsymptoticData, b: &AsymptoticData) -> C64 {
    (a.a_minus * b.a_plus.conj() - a.a_plus * b.a_minus.conj() + a.b_minus * b.b_plus.conj()
        - a.b_plus * b.b_minus.conj())
        * 2.0
}

/// `2 ⟨Γ a, Q Γ b⟩` with the stacked amplitudes `(a-, b-, a+, b+)`, the
/// matrix `Q = -gamma^0 gamma^5` and the inner product linear in its first slot.
pub fn q_pairing(a: &AsymptoticData, b: &AsymptoticData) -> C64 {
    let q = crate::gamma_geometry::GammaRep::pauli_dirac().q;
    let (va, vb) = (a.as_array(), b.as_array());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..4 {
        let qb: C64 = (0..4).map(|j| vb[j] * q[(i, j)]).sum();
        acc += va[i] * qb.conj();
    }
    acc * 2.0
}

/// Boundary pairing of two states computed from their fitted amplitudes.
///
/// Returns the value of `⟨H a, b⟩ - ⟨a, H b⟩`; this equals `-2⟨Γa, QΓb⟩`
/// (see [`q_pairing`]). Identically zero for `|m| >= 1/2`.
pub fn green_pairing(a: &RadialModeState, b: &RadialModeState) -> Result<C64> {
    a.check_same(b)?;
    let m = a.params.m();
    if m.abs() >= 0.5 {
        return Ok(C64::new(0.0, 0.0));
    }
    if m == 0.0 {
        return Err(Error::Precondition("the boundary pairing needs m != 0".into()));
    }
    let ga = extract_asymptotics(a)?;
    let gb = extract_asymptotics(b)?;
    Ok(boundary_form(&ga, &gb))
}

/// Which end of the interval a decay fit looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayEnd {
    /// `x -> pi/2`, exponent in `s = pi/2 - x`.
    Boundary,
    /// `x -> 0`, exponent in `x`.
    Center,
}

/// Fitted exponent `p` of `|u(x)| ~ C d^p (1 + c d)` with `d` the distance to the chosen end.
///
/// Uses the `n_fit` nodes closest to that end; the linear correction term
/// absorbs the first sub-leading power so the slope is not biased by it.
pub fn boundary_decay_check(state: &RadialModeState, end: DecayEnd) -> Result<f64> {
    let g = &state.grid;
    let nf = g.n_fit();
    let idx: Vec<usize> = match end {
        DecayEnd::Boundary => (g.len() - nf..g.len()).collect(),
        DecayEnd::Center => (0..nf).collect(),
    };
    let mut rows = vec![];
    for &i in &idx {
        let d = match end {
            DecayEnd::Boundary => g.s[i],
            DecayEnd::Center => g.x[i],
        };
        let amp = state.u.iter().map(|c| c[i].norm_sqr()).sum::<f64>().sqrt();
        if amp > 0.0 && amp.is_finite() {
            rows.push((d, amp));
        }
    }
    if rows.len() < 6 {
        return Err(Error::Resolution(format!(
            "only {} usable nodes in the decay window",
            rows.len()
        )));
    }
    let a = DMatrix::from_fn(rows.len(), 3, |r, c| match c {
        0 => rows[r].0.ln(),
        1 => 1.0,
        _ => rows[r].0,
    });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1.ln()));
    let sol = a.svd(true, true).solve(&y, 0.0).map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(sol[0])
}
