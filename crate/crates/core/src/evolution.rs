//! Unitary mode evolution by eigenfunction expansion, the chirality observable
//! and its Cesàro mean, and the causal comparison of two boundary dynamics.
//!
//! A state is a list of per-mode coefficient vectors over converged
//! eigenpairs. Evolution multiplies coefficient `k` by
//! `exp(i lambda_k sqrt(Lambda/3) t)`; there is no time stepping.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::Arc;

use rayon::prelude::*;

use crate::boundary::BoundaryCondition;
use crate::error::{Error, Result};
use crate::galerkin;
use crate::gamma_geometry::{PhysicalParams, C64};
use crate::quadrature::{gauss_legendre_on, DeRule};
use crate::radial::{RadialGrid, RadialModeState};
use crate::spectrum::SpectralResult;

/// Radial initial data of one mode: `(x, s) -> (u1, u2, u3, u4)`.
pub type Profile<'a> = &'a (dyn Fn(f64, f64) -> [C64; 4] + Sync);

/// Relative reconstruction error above which a projection is rejected.
pub const RECONSTRUCTION_TOL: f64 = 0.01;

/// Step of the tanh-sinh rule used for projections and observables.
const PROJECTION_STEP: f64 = 0.004;

/// Fraction of the data norm allowed outside the declared support radius.
const SUPPORT_TOL: f64 = 1e-6;

/// Coefficients of one mode on its eigenbasis.
#[derive(Debug, Clone)]
pub struct ModeExpansion {
    pub spectrum: Arc<SpectralResult>,
    pub coeffs: Vec<C64>,
    /// `‖sum c_k Psi_k - Psi_0‖ / ‖Psi_0‖` at projection time (0 for zero data).
    pub reconstruction_error: f64,
}

/// Expansion of a multi-mode state; evolution only rotates phases.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub params: PhysicalParams,
    pub bc: BoundaryCondition,
    pub modes: Vec<ModeExpansion>,
}

/// Eigenvectors sampled on a rule, `table[i][k]`, with the rule weights.
struct Sampled {
    rule: DeRule,
    table: Vec<Vec<[C64; 4]>>,
}

impl Sampled {
    fn new(spectrum: &SpectralResult, rule: DeRule) -> Self {
        let table = spectrum.sample(&rule.x, &rule.s);
        Sampled { rule, table }
    }

    /// Profile `sum_k c_k Psi_k` at every node.
    fn combine(&self, c: &[C64]) -> Vec<[C64; 4]> {
        self.table
            .iter()
            .map(|row| {
                let mut u = [C64::new(0.0, 0.0); 4];
                for (ck, v) in c.iter().zip(row) {
                    for j in 0..4 {
                        u[j] += ck * v[j];
                    }
                }
                u
            })
            .collect()
    }
}

fn dot4(a: &[C64; 4], b: &[C64; 4]) -> C64 {
    (0..4).map(|j| a[j].conj() * b[j]).sum()
}

fn weighted_norm2(w: &[f64], u: &[[C64; 4]]) -> f64 {
    w.iter().zip(u).map(|(w, u)| w * dot4(u, u).re).sum()
}

/// Pointwise chirality density `2 Im(conj(u1) u3 + conj(u2) u4)`, i.e.
/// `conj(a) . C b` with `C` the hermitian matrix below, evaluated for `a = b`.
fn chirality_form(a: &[C64; 4], b: &[C64; 4]) -> C64 {
    // C = [[0,0,-i,0],[0,0,0,-i],[i,0,0,0],[0,i,0,0]]
    let i = C64::new(0.0, 1.0);
    a[0].conj() * (-i * b[2]) + a[1].conj() * (-i * b[3]) + a[2].conj() * (i * b[0]) + a[3].conj() * (i * b[1])
}

fn check_family(spectra: &[Arc<SpectralResult>]) -> Result<(PhysicalParams, BoundaryCondition)> {
    let first = spectra.first().ok_or_else(|| Error::Argument("at least one mode is required".into()))?;
    for s in spectra {
        if s.params != first.params || s.bc != first.bc {
            return Err(Error::Argument("all modes must share parameters and boundary condition".into()));
        }
        if s.is_empty() {
            return Err(Error::Precondition(format!("mode kappa={} has no converged eigenpairs", s.mode.kappa())));
        }
    }
    Ok((first.params, first.bc))
}

/// Gaussian initial data `f = sin^kappa(x) exp(-((x - centre)/width)^2)` with
/// the regular centre structure of mode `kappa`: system fields
/// `P1 = D1 = w1 f` and `P2 = -D2 = w2 f`.
pub fn gaussian_data(kappa: u32, centre: f64, width: f64, weights: [C64; 2]) -> impl Fn(f64, f64) -> [C64; 4] + Sync {
    move |x, _s| {
        let f = x.sin().powi(kappa as i32) * (-((x - centre) / width).powi(2)).exp();
        let (a, b) = (weights[0] * f, weights[1] * f);
        galerkin::systems_to_u(&[a, a, b, -b])
    }
}

/// Projects per-mode initial profiles on the eigenbases by quadrature.
///
/// Fails with [`Error::UnderResolved`] when any mode's relative
/// reconstruction error exceeds [`RECONSTRUCTION_TOL`].
pub fn project_initial_data(spectra: &[Arc<SpectralResult>], data: &[Profile]) -> Result<EvolutionState> {
    let (params, bc) = check_family(spectra)?;
    if spectra.len() != data.len() {
        return Err(Error::Argument(format!("{} modes but {} profiles", spectra.len(), data.len())));
    }
    let modes = spectra
        .par_iter()
        .zip(data.par_iter())
        .map(|(spec, f)| project_mode(spec, *f))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvolutionState { params, bc, modes })
}

fn project_mode(spec: &Arc<SpectralResult>, f: Profile) -> Result<ModeExpansion> {
    let sampled = Sampled::new(spec, DeRule::new(PROJECTION_STEP));
    let w = &sampled.rule.w;
    let values: Vec<[C64; 4]> = sampled.rule.x.iter().zip(&sampled.rule.s).map(|(&x, &s)| f(x, s)).collect();
    if values.iter().flatten().any(|z| !z.is_finite()) {
        return Err(Error::Precondition("initial data is not finite on the quadrature nodes".into()));
    }
    let coeffs: Vec<C64> = (0..spec.len())
        .map(|k| (0..w.len()).map(|i| w[i] * dot4(&sampled.table[i][k], &values[i])).sum())
        .collect();
    let norm2 = weighted_norm2(w, &values);
    let reconstruction_error = if norm2 == 0.0 {
        0.0
    } else {
        let rec = sampled.combine(&coeffs);
        let diff: Vec<[C64; 4]> =
            rec.iter().zip(&values).map(|(a, b)| std::array::from_fn(|j| a[j] - b[j])).collect();
        (weighted_norm2(w, &diff) / norm2).sqrt()
    };
    if reconstruction_error > RECONSTRUCTION_TOL {
        return Err(Error::UnderResolved(reconstruction_error));
    }
    Ok(ModeExpansion { spectrum: spec.clone(), coeffs, reconstruction_error })
}

impl EvolutionState {
    /// Builds a state directly from coefficients (e.g. a chosen superposition).
    pub fn from_coefficients(spectra: &[Arc<SpectralResult>], coeffs: Vec<Vec<C64>>) -> Result<Self> {
        let (params, bc) = check_family(spectra)?;
        if spectra.len() != coeffs.len() {
            return Err(Error::Argument("one coefficient vector per mode is required".into()));
        }
        let modes = spectra
            .iter()
            .zip(coeffs)
            .map(|(s, c)| {
                if c.len() != s.len() {
                    return Err(Error::Argument(format!("mode has {} eigenpairs, got {} coefficients", s.len(), c.len())));
                }
                Ok(ModeExpansion { spectrum: s.clone(), coeffs: c, reconstruction_error: 0.0 })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvolutionState { params, bc, modes })
    }

    /// Angular frequency of eigenvalue `lambda`.
    fn omega(&self, lambda: f64) -> f64 {
        lambda * self.params.time_scale()
    }

    /// The state at time `t`; exact up to rounding of the phases.
    pub fn evolve(&self, t: f64) -> EvolutionState {
        let modes = self
            .modes
            .iter()
            .map(|m| ModeExpansion {
                coeffs: m
                    .coeffs
                    .iter()
                    .zip(&m.spectrum.eigenvalues)
                    .map(|(c, &l)| c * C64::from_polar(1.0, self.omega(l) * t))
                    .collect(),
                ..m.clone()
            })
            .collect();
        EvolutionState { modes, ..self.clone() }
    }

    /// Charge `sum |c_k|^2` (the L² norm squared of the expansion).
    pub fn charge(&self) -> f64 {
        self.modes.iter().flat_map(|m| &m.coeffs).map(|c| c.norm_sqr()).sum()
    }

    /// Radial profile of mode `i` at `(x, s)`.
    pub fn profile(&self, i: usize, x: f64, s: f64) -> [C64; 4] {
        let m = &self.modes[i];
        let mut u = [C64::new(0.0, 0.0); 4];
        for (k, c) in m.coeffs.iter().enumerate() {
            let v = m.spectrum.eval_u(k, x, s);
            for j in 0..4 {
                u[j] += c * v[j];
            }
        }
        u
    }

    /// All mode profiles sampled on a collocation grid.
    pub fn to_states(&self, grid: &Arc<RadialGrid>) -> Vec<RadialModeState> {
        self.modes
            .iter()
            .map(|m| {
                let table = m.spectrum.sample(&grid.x, &grid.s);
                let mut st = RadialModeState::zeros(m.spectrum.mode, self.params, grid.clone());
                for (i, row) in table.iter().enumerate() {
                    for (c, v) in m.coeffs.iter().zip(row) {
                        for j in 0..4 {
                            st.u[j][i] += c * v[j];
                        }
                    }
                }
                st
            })
            .collect()
    }

    /// Position-space charge `sum_modes ∫ |u|^2 dx` by tanh-sinh quadrature.
    pub fn charge_by_quadrature(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let s = Sampled::new(&m.spectrum, DeRule::new(PROJECTION_STEP));
                weighted_norm2(&s.rule.w, &s.combine(&m.coeffs))
            })
            .sum()
    }
}

/// `Psi(t)` for a projected state: phases only, so the charge is invariant.
pub fn evolve(state: &EvolutionState, t: f64) -> EvolutionState {
    state.evolve(t)
}

/// Chirality `sum_modes 2 Im ∫ (conj(u1) u3 + conj(u2) u4) dx` of sampled profiles.
///
/// Uses the grid's Fejér weights, which converge only algebraically for the
/// `s^{-m}` boundary behaviour; [`ChiralityMatrices::observable`] is exact
/// to quadrature precision for expanded states.
pub fn chiral_observable(profiles: &[RadialModeState]) -> f64 {
    profiles
        .iter()
        .map(|st| {
            let g = &st.grid;
            (0..g.len())
                .map(|i| {
                    let u: [C64; 4] = std::array::from_fn(|j| st.u[j][i]);
                    g.weights[i] * chirality_form(&u, &u).re
                })
                .sum::<f64>()
        })
        .sum()
}

/// Chirality matrices `G[q][p] = <Psi_q, C Psi_p>` of every mode, by quadrature.
#[derive(Debug, Clone)]
pub struct ChiralityMatrices {
    pub modes: Vec<Vec<Vec<C64>>>,
}

impl ChiralityMatrices {
    pub fn new(state: &EvolutionState) -> Self {
        let modes = state
            .modes
            .par_iter()
            .map(|m| {
                let s = Sampled::new(&m.spectrum, DeRule::new(PROJECTION_STEP));
                let n = m.spectrum.len();
                (0..n)
                    .map(|q| {
                        (0..n)
                            .map(|p| {
                                (0..s.rule.len())
                                    .map(|i| s.rule.w[i] * chirality_form(&s.table[i][q], &s.table[i][p]))
                                    .sum()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ChiralityMatrices { modes }
    }

    /// Largest diagonal entry `|<Psi_k, C Psi_k>|`.
    pub fn max_diagonal(&self) -> f64 {
        self.modes
            .iter()
            .flat_map(|g| (0..g.len()).map(move |k| g[k][k].norm()))
            .fold(0.0, f64::max)
    }

    /// Chirality of `state` evaluated in coefficient space.
    pub fn observable(&self, state: &EvolutionState) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (g, m) in self.modes.iter().zip(&state.modes) {
            for (q, cq) in m.coeffs.iter().enumerate() {
                for (p, cp) in m.coeffs.iter().enumerate() {
                    acc += cq.conj() * cp * g[q][p];
                }
            }
        }
        acc.re
    }
}

/// How the Cesàro mean is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CesaroMethod {
    /// Composite Gauss–Legendre quadrature of the observable in time.
    DirectQuadrature,
    /// Term-by-term time integral of the expansion.
    ClosedForm,
}

/// `(1/T) ∫_0^T chirality(Psi(t)) dt`.
pub fn cesaro_average(
    state: &EvolutionState,
    chi: &ChiralityMatrices,
    t_end: f64,
    method: CesaroMethod,
) -> Result<f64> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Argument(format!("averaging time must be positive, got {t_end}")));
    }
    match method {
        CesaroMethod::ClosedForm => Ok(cesaro_closed_form(state, chi, t_end)),
        CesaroMethod::DirectQuadrature => {
            let w_max = state
                .modes
                .iter()
                .flat_map(|m| &m.spectrum.eigenvalues)
                .map(|&l| state.omega(l).abs())
                .fold(0.0, f64::max);
            // Panels short against the fastest beat; 24 points per panel.
            let panels = ((2.0 * w_max * t_end / 3.0).ceil() as usize).max(1);
            let h = t_end / panels as f64;
            let sum: f64 = (0..panels)
                .into_par_iter()
                .map(|j| {
                    let (ts, ws) = gauss_legendre_on(24, j as f64 * h, (j + 1) as f64 * h);
                    ts.iter().zip(&ws).map(|(&t, &w)| w * chi.observable(&state.evolve(t))).sum::<f64>()
                })
                .sum();
            Ok(sum / t_end)
        }
    }
}

fn cesaro_closed_form(state: &EvolutionState, chi: &ChiralityMatrices, t_end: f64) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for (g, m) in chi.modes.iter().zip(&state.modes) {
        let lam = &m.spectrum.eigenvalues;
        for (q, cq) in m.coeffs.iter().enumerate() {
            for (p, cp) in m.coeffs.iter().enumerate() {
                let d = state.omega(lam[p] - lam[q]);
                let avg = if (d * t_end).abs() < 1e-12 {
                    C64::new(1.0, 0.0)
                } else {
                    (C64::from_polar(1.0, d * t_end) - 1.0) / C64::new(0.0, d * t_end)
                };
                acc += cq.conj() * cp * g[q][p] * avg;
            }
        }
    }
    acc.re
}

/// Constant `C` of the bound `|cesaro_average(T)| <= C / T`.
pub fn cesaro_bound(state: &EvolutionState, chi: &ChiralityMatrices) -> f64 {
    let mut c = 0.0;
    for (g, m) in chi.modes.iter().zip(&state.modes) {
        let lam = &m.spectrum.eigenvalues;
        for (q, cq) in m.coeffs.iter().enumerate() {
            for (p, cp) in m.coeffs.iter().enumerate() {
                let d = state.omega(lam[p] - lam[q]).abs();
                if d > 1e-12 {
                    c += 2.0 * (cq * cp * g[q][p]).norm() / d;
                }
            }
        }
    }
    c
}

/// Region `rho <= tan(pi/4 - |t| sqrt(Lambda/12))` determined by the data alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalRegion {
    pub t: f64,
    rho_max: Option<f64>,
}

impl CausalRegion {
    pub fn new(t: f64, params: &PhysicalParams) -> Self {
        let arg = FRAC_PI_4 - t.abs() * (params.lambda() / 12.0).sqrt();
        CausalRegion { t, rho_max: (arg > 0.0).then(|| arg.tan()) }
    }

    /// Ball radius bound, `None` when the region is empty.
    pub fn rho_max(&self) -> Option<f64> {
        self.rho_max
    }

    /// The same bound in the compact radial coordinate `x = 2 atan(rho)`.
    pub fn x_max(&self) -> Option<f64> {
        self.rho_max.map(|r| 2.0 * r.atan())
    }
}

/// Discrepancies between two boundary dynamics, relative to `‖psi_0‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalReport {
    pub t: f64,
    pub rho_max: f64,
    /// L² difference over `rho <= rho_max`.
    pub inside: f64,
    /// L² difference over the complement.
    pub outside: f64,
    /// Worst reconstruction error of the two projections.
    pub reconstruction_error: f64,
}

/// Evolves the same data under two boundary conditions and compares inside
/// and outside the causal region at time `t`.
///
/// `rho0` is the declared support radius of the data; it must lie inside
/// the region and the data must be negligible beyond it.
pub fn causal_compare(
    data: &[Profile],
    spectra_a: &[Arc<SpectralResult>],
    spectra_b: &[Arc<SpectralResult>],
    rho0: f64,
    t: f64,
) -> Result<CausalReport> {
    let (params, _) = check_family(spectra_a)?;
    check_family(spectra_b)?;
    let m = params.m().abs();
    if !(m > 0.0 && m < 0.5) {
        return Err(Error::Regime(format!(
            "causal comparison needs 0 < |m| < 1/2 (0 < |M| < {}), got m = {m}",
            params.bf_threshold()
        )));
    }
    let region = CausalRegion::new(t, &params);
    let x_max = region
        .x_max()
        .ok_or_else(|| Error::Config(format!("the causal region is empty at t = {t}")))?;
    let x0 = 2.0 * rho0.atan();
    if !(rho0 > 0.0) || x0 >= x_max {
        return Err(Error::Config(format!(
            "support radius {rho0} must be positive and below rho_max = {}",
            region.rho_max().unwrap_or(0.0)
        )));
    }
    let full = DeRule::new(PROJECTION_STEP);
    let tail = DeRule::on(x0, FRAC_PI_2, PROJECTION_STEP);
    for f in data {
        let total: f64 = full.integrate(|x, s| dot4(&f(x, s), &f(x, s)).re);
        let beyond: f64 = tail.integrate(|x, s| dot4(&f(x, s), &f(x, s)).re);
        if beyond > SUPPORT_TOL * SUPPORT_TOL * total {
            return Err(Error::Config(format!(
                "initial data is not supported in rho <= {rho0} (relative tail {:.1e})",
                (beyond / total).sqrt()
            )));
        }
    }
    let a = project_initial_data(spectra_a, data)?.evolve(t);
    let b = project_initial_data(spectra_b, data)?.evolve(t);
    let reconstruction_error = a
        .modes
        .iter()
        .chain(&b.modes)
        .map(|m| m.reconstruction_error)
        .fold(0.0, f64::max);
    let norm0: f64 = data.iter().map(|f| full.integrate(|x, s| dot4(&f(x, s), &f(x, s)).re)).sum();
    let scale = norm0.sqrt().max(f64::MIN_POSITIVE);
    Ok(CausalReport {
        t,
        rho_max: region.rho_max().unwrap_or(0.0),
        inside: region_discrepancy(&a, &b, 0.0, x_max)? / scale,
        outside: region_discrepancy(&a, &b, x_max, FRAC_PI_2)? / scale,
        reconstruction_error,
    })
}

/// `‖Psi_a - Psi_b‖` over `x in [x_lo, x_hi]`, summed over modes.
pub fn region_discrepancy(a: &EvolutionState, b: &EvolutionState, x_lo: f64, x_hi: f64) -> Result<f64> {
    if a.modes.len() != b.modes.len() || a.modes.iter().zip(&b.modes).any(|(p, q)| p.spectrum.mode != q.spectrum.mode) {
        return Err(Error::Argument("states must expand the same modes".into()));
    }
    if !(0.0 <= x_lo && x_lo <= x_hi && x_hi <= FRAC_PI_2) {
        return Err(Error::Argument(format!("invalid region [{x_lo}, {x_hi}]")));
    }
    if x_lo == x_hi {
        return Ok(0.0);
    }
    let rule = DeRule::on(x_lo, x_hi, PROJECTION_STEP);
    let total: f64 = a
        .modes
        .par_iter()
        .zip(b.modes.par_iter())
        .map(|(ma, mb)| {
            let ua = Sampled::new(&ma.spectrum, rule.clone()).combine(&ma.coeffs);
            let ub = Sampled::new(&mb.spectrum, rule.clone()).combine(&mb.coeffs);
            let d: Vec<[C64; 4]> = ua.iter().zip(&ub).map(|(p, q)| std::array::from_fn(|j| p[j] - q[j])).collect();
            weighted_norm2(&rule.w, &d)
        })
        .sum();
    Ok(total.sqrt())
}
