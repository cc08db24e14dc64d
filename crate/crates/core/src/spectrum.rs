//! Per-mode eigenvalue problems: assembly under a boundary condition,
//! eigen-solution with residual and two-grid filtering, sweeps over modes
//! and convergence studies.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::angular::ModeIndex;
use crate::boundary::{constraint_rows, BoundaryCondition};
use crate::error::{Error, Result};
use crate::galerkin::{self, Family, ModeBasis, SystemSpec};
use crate::gamma_geometry::{PhysicalParams, C64};
use crate::quadrature::DeRule;
use crate::radial::{RadialGrid, RadialModeState};

/// Boundary behaviour of the trial space in the heavy regime.
///
/// Every choice describes the same (unique) self-adjoint operator; agreement
/// of the resulting spectra is the numerical signature of essential
/// self-adjointness. Only `Exact` trial functions lie in the operator domain,
/// so only for it are L² residuals meaningful; the generic decays are
/// filtered by two-grid agreement alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryDecay {
    /// Trial functions carry the exact leading exponent `s^{|m|}`.
    Exact,
    /// Trial functions vanish like `s^{1/2}`.
    Sqrt,
    /// Trial functions vanish like `s`.
    Linear,
}

impl BoundaryDecay {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "exact" => Ok(BoundaryDecay::Exact),
            "sqrt" => Ok(BoundaryDecay::Sqrt),
            "linear" => Ok(BoundaryDecay::Linear),
            _ => Err(Error::Config(format!("unknown boundary decay '{tag}' (exact|sqrt|linear)"))),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            BoundaryDecay::Exact => "exact",
            BoundaryDecay::Sqrt => "sqrt",
            BoundaryDecay::Linear => "linear",
        }
    }
}

/// Discretization and filtering settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Radial resolution; at least 16.
    pub n_nodes: usize,
    /// Eigenpairs reported per mode.
    pub n_eigs: usize,
    /// Largest accepted relative residual `‖H u - lambda u‖/‖u‖`.
    pub accept_tol: f64,
    /// Eigenvalues closer than this to zero are rejected as spurious.
    pub gap_tol: f64,
    /// Relative agreement required between the grid and its refinement.
    pub rel_tol: f64,
    pub heavy_decay: BoundaryDecay,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_nodes: 128,
            n_eigs: 8,
            accept_tol: 1e-8,
            gap_tol: 1e-6,
            rel_tol: 1e-8,
            heavy_decay: BoundaryDecay::Exact,
        }
    }
}

/// Largest trial-family size in the light regime.
pub const LIGHT_MAX_BASIS: usize = 96;
/// Largest trial-family size for the generic heavy decays; the stretched
/// polynomial variable loses accuracy to rounding beyond this.
pub const STRETCHED_MAX_BASIS: usize = 40;

/// Trial functions per family for a radial resolution `n_nodes`.
pub fn basis_size(n_nodes: usize, stretched: bool) -> usize {
    let cap = if stretched { STRETCHED_MAX_BASIS } else { LIGHT_MAX_BASIS };
    (n_nodes / 2).clamp(8, cap)
}

fn light_families(mit: bool, m: f64, size: usize) -> (Vec<Family>, Vec<Family>) {
    let (gp, gd) = if mit { (1.0 - m, -m) } else { (m, 1.0 + m) };
    (vec![Family { gamma: gp, q: 1.0, size }], vec![Family { gamma: gd, q: 1.0, size }])
}

/// Size of the secondary family in the generalized trial spaces; larger
/// secondary families make the union nearly linearly dependent.
fn union_size(size: usize) -> usize {
    (size / 8).clamp(4, 12)
}

/// Residual floor for the generalized families: their union trial space
/// resolves eigenvalues to ~1e-12 but eigenfunctions only to ~1e-4 in the
/// graph norm, so those pairs are accepted on two-grid agreement.
pub const GENERALIZED_RESIDUAL_FLOOR: f64 = 1e-3;

/// Trial space for a mode under a boundary condition.
pub fn mode_basis(
    mode: ModeIndex,
    params: &PhysicalParams,
    bc: &BoundaryCondition,
    size: usize,
    decay: BoundaryDecay,
) -> Result<ModeBasis> {
    bc.validate_regime(params)?;
    let m = params.m();
    let system = |k_sign: f64, (p, d): (Vec<Family>, Vec<Family>)| SystemSpec { k_sign, p, d };
    let systems = match bc {
        // The square-integrable branch is s^{|m|}: chiral-type for m > 0, MIT-type for m < 0.
        BoundaryCondition::Dirichlet if decay == BoundaryDecay::Exact => [
            system(1.0, light_families(m < 0.0, m, size)),
            system(-1.0, light_families(m < 0.0, m, size)),
        ],
        BoundaryCondition::Dirichlet => {
            let gamma = if decay == BoundaryDecay::Sqrt { 0.5 } else { 1.0 };
            let f = Family { gamma, q: 4.0, size };
            [system(1.0, (vec![f], vec![f])), system(-1.0, (vec![f], vec![f]))]
        }
        BoundaryCondition::Mit => [
            system(1.0, light_families(true, m, size)),
            system(-1.0, light_families(true, m, size)),
        ],
        BoundaryCondition::Chiral => [
            system(1.0, light_families(false, m, size)),
            system(-1.0, light_families(false, m, size)),
        ],
        // a- + i b- = 0 removes the s^{-m} branch of system 1, a+ - i b+ = 0
        // the s^{m} branch of system 2.
        BoundaryCondition::Aps => [
            system(1.0, light_families(false, m, size)),
            system(-1.0, light_families(true, m, size)),
        ],
        BoundaryCondition::GenAPlus(_) | BoundaryCondition::GenAMinus(_) => {
            let union = || {
                let (p1, d1) = light_families(true, m, size);
                let (p2, d2) = light_families(false, m, union_size(size));
                ([p1, p2].concat(), [d1, d2].concat())
            };
            [system(1.0, union()), system(-1.0, union())]
        }
    };
    Ok(ModeBasis { kappa: mode.kappa() as f64, m, systems })
}

/// Discretized hamiltonian of one mode under one boundary condition.
#[derive(Debug, Clone)]
pub struct ModeMatrix {
    pub mode: ModeIndex,
    pub params: PhysicalParams,
    pub bc: BoundaryCondition,
    pub n_nodes: usize,
    pub basis: Arc<ModeBasis>,
    /// Galerkin hamiltonian in the constrained coordinates.
    pub h: DMatrix<C64>,
    /// Gram matrix in the constrained coordinates.
    pub mass: DMatrix<C64>,
    /// Raw coordinates of the constrained basis (`dof × n'`).
    pub embed: DMatrix<C64>,
    /// `max |A - A*| / max |A|` of the orthonormalized hamiltonian.
    pub hermiticity_defect: f64,
    eig: Option<(Vec<f64>, DMatrix<C64>)>,
}

/// Directions of the Gram matrix below this relative size are dropped.
const MASS_CUT: f64 = 1e-13;

/// Rows over the raw coordinates implementing the amplitude relations of `bc`.
fn raw_constraints(basis: &ModeBasis, rows: &[[C64; 4]]) -> Vec<DVector<C64>> {
    // (p-, q-, p+, q+) functionals; a = (p + q)/2, b = -i (p - q)/2.
    let f = basis.amplitude_functionals();
    let i = C64::new(0.0, 1.0);
    rows.iter()
        .map(|r| {
            let cp_m = (r[0] - i * r[1]) * 0.5;
            let cq_m = (r[0] + i * r[1]) * 0.5;
            let cp_p = (r[2] - i * r[3]) * 0.5;
            let cq_p = (r[2] + i * r[3]) * 0.5;
            DVector::from_fn(basis.dof(), |k, _| {
                cp_m * f[0][k] + cq_m * f[1][k] + cp_p * f[2][k] + cq_p * f[3][k]
            })
        })
        .collect()
}

/// Assembles the hamiltonian of one mode.
///
/// Local conditions (MIT, chiral, APS, Dirichlet) are built into the trial
/// families; the generalized families use the union of both light families
/// and impose the two amplitude relations as linear constraints.
pub fn assemble_mode_matrix(
    mode: ModeIndex,
    params: &PhysicalParams,
    bc: &BoundaryCondition,
    cfg: &SolverConfig,
) -> Result<ModeMatrix> {
    if cfg.n_nodes < 16 {
        return Err(Error::Config(format!("radial resolution must be at least 16, got {}", cfg.n_nodes)));
    }
    let size = basis_size(cfg.n_nodes, stretched(bc, cfg));
    assemble_with_size(mode, params, bc, cfg, size)
}

fn stretched(bc: &BoundaryCondition, cfg: &SolverConfig) -> bool {
    matches!(bc, BoundaryCondition::Dirichlet) && cfg.heavy_decay != BoundaryDecay::Exact
}

fn assemble_with_size(
    mode: ModeIndex,
    params: &PhysicalParams,
    bc: &BoundaryCondition,
    cfg: &SolverConfig,
    size: usize,
) -> Result<ModeMatrix> {
    let rows = constraint_rows(bc, mode, params)?;
    let basis = mode_basis(mode, params, bc, size, cfg.heavy_decay)?;
    let rule = DeRule::for_basis(size);
    let raw = basis.assemble(&rule);
    let h = raw.h.map(C64::from);
    let mass = raw.mass.map(C64::from);
    let n = basis.dof();
    let embed = match bc {
        BoundaryCondition::GenAPlus(_) | BoundaryCondition::GenAMinus(_) => {
            galerkin::null_space(&raw_constraints(&basis, &rows), n)
        }
        _ => DMatrix::identity(n, n),
    };
    let h = embed.adjoint() * h * &embed;
    let mass = embed.adjoint() * mass * &embed;
    let (vals, vecs, defect) = galerkin::generalized_eigen(&h, &mass, MASS_CUT)?;
    Ok(ModeMatrix {
        mode,
        params: *params,
        bc: *bc,
        n_nodes: cfg.n_nodes,
        basis: Arc::new(basis),
        h,
        mass,
        embed,
        hermiticity_defect: defect,
        eig: Some((vals, vecs)),
    })
}

/// Eigenpairs of one mode.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub mode: ModeIndex,
    pub params: PhysicalParams,
    pub bc: BoundaryCondition,
    pub n_nodes: usize,
    /// Eigenvalues sorted by `|lambda|`, negative first on ties.
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Agreement with the refined discretization within `rel_tol`.
    pub converged: Vec<bool>,
    /// Number of `n` values sharing each eigenvalue: `2l + 1`.
    pub multiplicity: u32,
    pub hermiticity_defect: f64,
    pub basis: Arc<ModeBasis>,
    /// Raw coordinates of the eigenvectors, normalized to `‖u‖ = 1`.
    pub coeffs: DMatrix<C64>,
}

/// Orders by modulus, negative first when the moduli agree to `1e-9`.
fn order_key(a: f64, b: f64) -> std::cmp::Ordering {
    if (a.abs() - b.abs()).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0) {
        a.total_cmp(&b)
    } else {
        a.abs().total_cmp(&b.abs())
    }
}

struct Candidates {
    values: Vec<f64>,
    residuals: Vec<f64>,
    /// Raw coordinates, `M`-normalized.
    coeffs: DMatrix<C64>,
}

fn candidates(mat: &ModeMatrix) -> Result<Candidates> {
    let (vals, vecs) = match &mat.eig {
        Some(e) => e.clone(),
        None => {
            let (v, w, _) = galerkin::generalized_eigen(&mat.h, &mat.mass, MASS_CUT)?;
            (v, w)
        }
    };
    let coeffs = &mat.embed * vecs;
    let size = mat.basis.systems[0].p[0].size;
    let rule = DeRule::for_basis(size);
    let tables = mat.basis.node_tables(&rule);
    let residuals = mat.basis.residuals(&tables, &coeffs, &vals);
    Ok(Candidates { values: vals, residuals, coeffs })
}

/// Solves a mode matrix and keeps the `n_want` smallest-modulus pairs that
/// pass the residual filter and agree with a refined discretization.
pub fn eigen_solve(mat: &ModeMatrix, n_want: usize, cfg: &SolverConfig) -> Result<SpectralResult> {
    let cand = candidates(mat)?;
    let size = mat.basis.systems[0].p[0].size;
    let refined_size = size + (size / 4).max(4);
    let refined = assemble_with_size(mat.mode, &mat.params, &mat.bc, cfg, refined_size)?;
    let (ref_vals, _) = refined.eig.clone().expect("assembled with eigen-decomposition");

    let mut order: Vec<usize> = (0..cand.values.len()).collect();
    order.sort_by(|&a, &b| order_key(cand.values[a], cand.values[b]));
    let mut picked = vec![];
    let mut converged = vec![];
    let mut best_residual = f64::INFINITY;
    for &i in &order {
        let lam = cand.values[i];
        best_residual = best_residual.min(cand.residuals[i]);
        let tol = match mat.bc {
            BoundaryCondition::GenAPlus(_) | BoundaryCondition::GenAMinus(_) => {
                cfg.accept_tol.max(GENERALIZED_RESIDUAL_FLOOR)
            }
            _ => cfg.accept_tol,
        };
        let residual_ok = stretched(&mat.bc, cfg) || cand.residuals[i] <= tol;
        if !residual_ok || lam.abs() < cfg.gap_tol {
            continue;
        }
        let agree = ref_vals
            .iter()
            .any(|&r| (r - lam).abs() <= cfg.rel_tol * lam.abs().max(1.0));
        if !agree {
            continue;
        }
        picked.push(i);
        converged.push(agree);
        if picked.len() == n_want {
            break;
        }
    }
    if picked.is_empty() {
        return Err(Error::Pollution(format!(
            "no eigenpair of mode kappa={} passed the filters (best residual {best_residual:.2e}); increase the resolution",
            mat.mode.kappa()
        )));
    }
    let mut coeffs = DMatrix::<C64>::zeros(cand.coeffs.nrows(), picked.len());
    for (c, &i) in picked.iter().enumerate() {
        // ∫|P|^2 + |D|^2 = 1 gives ‖u‖^2 = 1/4.
        coeffs.set_column(c, &(cand.coeffs.column(i) * C64::from(2.0)));
    }
    Ok(SpectralResult {
        mode: mat.mode,
        params: mat.params,
        bc: mat.bc,
        n_nodes: mat.n_nodes,
        eigenvalues: picked.iter().map(|&i| cand.values[i]).collect(),
        residuals: picked.iter().map(|&i| cand.residuals[i]).collect(),
        converged,
        multiplicity: mat.mode.n_degeneracy(),
        hermiticity_defect: mat.hermiticity_defect,
        basis: mat.basis.clone(),
        coeffs,
    })
}

/// Assemble and solve one mode.
pub fn solve_mode(
    mode: ModeIndex,
    params: &PhysicalParams,
    bc: &BoundaryCondition,
    cfg: &SolverConfig,
) -> Result<SpectralResult> {
    let mat = assemble_mode_matrix(mode, params, bc, cfg)?;
    eigen_solve(&mat, cfg.n_eigs, cfg)
}

/// Unfiltered eigenvalues of one mode (all candidates, sorted by modulus).
pub fn raw_eigenvalues(mat: &ModeMatrix) -> Result<Vec<f64>> {
    let mut v = match &mat.eig {
        Some((v, _)) => v.clone(),
        None => galerkin::generalized_eigen(&mat.h, &mat.mass, MASS_CUT)?.0,
    };
    v.sort_by(|a, b| order_key(*a, *b));
    Ok(v)
}

impl SpectralResult {
    /// Spinor profile `(u1..u4)` of eigenpair `k` at `x` (`s = pi/2 - x`).
    pub fn eval_u(&self, k: usize, x: f64, s: f64) -> [C64; 4] {
        let c: Vec<C64> = self.coeffs.column(k).iter().copied().collect();
        let (fields, _) = self.basis.eval_systems(&c, x, s);
        galerkin::systems_to_u(&fields)
    }

    /// Profile and hamiltonian image of eigenpair `k` at `x`.
    pub fn eval_u_and_hu(&self, k: usize, x: f64, s: f64) -> ([C64; 4], [C64; 4]) {
        let c: Vec<C64> = self.coeffs.column(k).iter().copied().collect();
        let (fields, images) = self.basis.eval_systems(&c, x, s);
        (galerkin::systems_to_u(&fields), galerkin::systems_to_u(&images))
    }

    /// All eigenvectors at the points `(x[i], s[i])`: `out[i][k]` is the profile
    /// of eigenpair `k` at point `i`.
    pub fn sample(&self, x: &[f64], s: &[f64]) -> Vec<Vec<[C64; 4]>> {
        x.iter()
            .zip(s)
            .map(|(&x, &s)| {
                let (field, vals) = self.basis.basis_values(x, s);
                (0..self.coeffs.ncols())
                    .map(|k| {
                        let mut f = [C64::new(0.0, 0.0); 4];
                        for (row, (&tag, &v)) in field.iter().zip(&vals).enumerate() {
                            f[tag] += self.coeffs[(row, k)] * v;
                        }
                        galerkin::systems_to_u(&f)
                    })
                    .collect()
            })
            .collect()
    }

    /// Eigenvector `k` sampled on a collocation grid.
    pub fn to_state(&self, k: usize, grid: Arc<RadialGrid>) -> RadialModeState {
        RadialModeState::from_fn(self.mode, self.params, grid, |x, s| self.eval_u(k, x, s))
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Solves every mode `kappa = 1 ..= (two_l_max + 1)/2` in parallel; results
/// are returned in mode order and do not depend on the thread count.
pub fn spectrum_sweep(
    params: &PhysicalParams,
    bc: &BoundaryCondition,
    two_l_max: i32,
    cfg: &SolverConfig,
) -> Result<Vec<SpectralResult>> {
    if two_l_max < 1 || two_l_max % 2 == 0 {
        return Err(Error::Config(format!("two_l_max must be a positive odd integer, got {two_l_max}")));
    }
    bc.validate_regime(params)?;
    let kappas: Vec<u32> = (1..=((two_l_max + 1) / 2) as u32).collect();
    kappas
        .par_iter()
        .map(|&k| solve_mode(ModeIndex::from_kappa(k)?, params, bc, cfg))
        .collect()
}

/// Eigenvalues over a sequence of resolutions with successive differences.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub n_nodes: Vec<usize>,
    /// `values[g][k]`: eigenvalue `k` on grid `g`.
    pub values: Vec<Vec<f64>>,
    /// `cauchy[g][k] = |values[g+1][k] - values[g][k]|`.
    pub cauchy: Vec<Vec<f64>>,
}

/// Runs the solver at each resolution and reports Cauchy differences of the
/// first `n_eigs` eigenvalues.
pub fn convergence_study(
    mode: ModeIndex,
    params: &PhysicalParams,
    bc: &BoundaryCondition,
    grids: &[usize],
    cfg: &SolverConfig,
) -> Result<ConvergenceTable> {
    if grids.len() < 3 {
        return Err(Error::Config("a convergence study needs at least three resolutions".into()));
    }
    let values = grids
        .iter()
        .map(|&n| {
            let c = SolverConfig { n_nodes: n, ..*cfg };
            solve_mode(mode, params, bc, &c).map(|r| r.eigenvalues)
        })
        .collect::<Result<Vec<_>>>()?;
    let k = values.iter().map(Vec::len).min().unwrap_or(0);
    let cauchy: Vec<Vec<f64>> = values
        .windows(2)
        .map(|w| (0..k).map(|j| (w[1][j] - w[0][j]).abs()).collect())
        .collect();
    let first = cauchy.first().and_then(|c| c.first()).copied().unwrap_or(0.0);
    let last = cauchy.last().and_then(|c| c.first()).copied().unwrap_or(0.0);
    if last > 1e-6 && last > 100.0 * first {
        return Err(Error::Numeric(format!(
            "eigenvalues diverge under refinement ({first:.2e} -> {last:.2e})"
        )));
    }
    Ok(ConvergenceTable { n_nodes: grids.to_vec(), values, cauchy })
}
