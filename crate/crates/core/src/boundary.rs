//! Boundary conditions at the conformal boundary and their per-mode
//! realization as linear relations among the amplitudes `(a-, b-, a+, b+)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angular::ModeIndex;
use crate::error::{Error, Result};
use crate::gamma_geometry::{GammaRep, PhysicalParams, C64};
use crate::radial::{self, AsymptoticData, RadialGrid};

/// Largest accepted hermiticity defect of a generalized `A` matrix.
pub const HERMITIAN_TOL: f64 = 1e-13;

/// Boundary condition family.
///
/// The generalized families act mode-diagonally with a constant 2×2
/// matrix on the amplitude pairs `(a, b)`:
/// `GenAPlus(A)` imposes `(a-, b-) = A (a+, b+)` and `GenAMinus(A)` imposes
/// `(a+, b+) = A (a-, b-)`. Both are self-adjoint only for hermitian `A`;
/// use [`BoundaryCondition::gen_a_plus`]/[`BoundaryCondition::gen_a_minus`]
/// to get that checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet,
    Mit,
    Chiral,
    Aps,
    GenAPlus(Matrix2<C64>),
    GenAMinus(Matrix2<C64>),
}

/// Homogeneous relations `row · (a-, b-, a+, b+) = 0`.
pub type ConstraintRows = Vec<[C64; 4]>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

fn hermitian_defect(a: &Matrix2<C64>) -> f64 {
    (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl BoundaryCondition {
    pub fn gen_a_plus(a: Matrix2<C64>) -> Result<Self> {
        Self::check_hermitian(&a)?;
        Ok(BoundaryCondition::GenAPlus(a))
    }

    pub fn gen_a_minus(a: Matrix2<C64>) -> Result<Self> {
        Self::check_hermitian(&a)?;
        Ok(BoundaryCondition::GenAMinus(a))
    }

    fn check_hermitian(a: &Matrix2<C64>) -> Result<()> {
        let d = hermitian_defect(a);
        if d > HERMITIAN_TOL {
            return Err(Error::Config(format!("generalized A must be hermitian (defect {d:.3e})")));
        }
        Ok(())
    }

    /// Short lowercase tag used in file names and tables.
    pub fn tag(&self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Mit => "mit",
            BoundaryCondition::Chiral => "chiral",
            BoundaryCondition::Aps => "aps",
            BoundaryCondition::GenAPlus(_) => "genA+",
            BoundaryCondition::GenAMinus(_) => "genA-",
        }
    }

    /// Checks that the condition is meaningful at this mass.
    ///
    /// Dirichlet (no boundary freedom) needs `|m| >= 1/2`; every other
    /// family needs `0 < |m| < 1/2`.
    pub fn validate_regime(&self, params: &PhysicalParams) -> Result<()> {
        let m = params.m();
        let threshold = params.bf_threshold();
        let heavy = params.is_heavy();
        match self {
            BoundaryCondition::Dirichlet if !heavy => Err(Error::Regime(format!(
                "dirichlet needs M^2 >= Lambda/12, i.e. |M| >= {threshold:.6} (got M = {})",
                params.mass()
            ))),
            BoundaryCondition::Dirichlet => Ok(()),
            _ if heavy => Err(Error::Regime(format!(
                "{} needs M^2 < Lambda/12, i.e. |M| < {threshold:.6} (got M = {}); use dirichlet",
                self.tag(),
                params.mass()
            ))),
            _ if m == 0.0 => Err(Error::Regime(format!("{} needs M != 0", self.tag()))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::GenAPlus(a) | BoundaryCondition::GenAMinus(a) => write!(
                f,
                "{}:{},{},{},{}",
                self.tag(),
                a[(0, 0)].re,
                a[(0, 1)].re,
                a[(0, 1)].im,
                a[(1, 1)].re
            ),
            _ => f.write_str(self.tag()),
        }
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    /// Grammar: `dirichlet | mit | chiral | aps | genA+:a11,a12re,a12im,a22 | genA-:...`.
    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        match spec.to_ascii_lowercase().as_str() {
            "dirichlet" => return Ok(BoundaryCondition::Dirichlet),
            "mit" => return Ok(BoundaryCondition::Mit),
            "chiral" => return Ok(BoundaryCondition::Chiral),
            "aps" | "maps" => return Ok(BoundaryCondition::Aps),
            _ => {}
        }
        let (head, body) = spec
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("unknown boundary condition '{spec}'")))?;
        let vals = body
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("bad number in '{spec}': {e}")))?;
        if vals.len() != 4 || vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!(
                "'{spec}' needs four finite reals a11,a12re,a12im,a22"
            )));
        }
        let a12 = C64::new(vals[1], vals[2]);
        let a = Matrix2::new(C64::from(vals[0]), a12, a12.conj(), C64::from(vals[3]));
        match head {
            "genA+" | "gena+" => Self::gen_a_plus(a),
            "genA-" | "gena-" => Self::gen_a_minus(a),
            _ => Err(Error::Config(format!("unknown boundary condition '{head}'"))),
        }
    }
}

/// Per-mode constraint rows over `(a-, b-, a+, b+)`.
///
/// The rows do not depend on the mode; `mode` is accepted so callers can
/// treat mode-dependent families uniformly.
pub fn constraint_rows(
    bc: &BoundaryCondition,
    _mode: ModeIndex,
    params: &PhysicalParams,
) -> Result<ConstraintRows> {
    bc.validate_regime(params)?;
    Ok(rows_unchecked(bc))
}

fn rows_unchecked(bc: &BoundaryCondition) -> ConstraintRows {
    match bc {
        BoundaryCondition::Dirichlet => vec![],
        BoundaryCondition::Mit => vec![[ZERO, ZERO, ONE, ZERO], [ZERO, ZERO, ZERO, ONE]],
        BoundaryCondition::Chiral => vec![[ONE, ZERO, ZERO, ZERO], [ZERO, ONE, ZERO, ZERO]],
        BoundaryCondition::Aps => vec![[ZERO, ZERO, ONE, -I], [ONE, I, ZERO, ZERO]],
        BoundaryCondition::GenAPlus(a) => vec![
            [ONE, ZERO, -a[(0, 0)], -a[(0, 1)]],
            [ZERO, ONE, -a[(1, 0)], -a[(1, 1)]],
        ],
        BoundaryCondition::GenAMinus(a) => vec![
            [-a[(0, 0)], -a[(0, 1)], ONE, ZERO],
            [-a[(1, 0)], -a[(1, 1)], ZERO, ONE],
        ],
    }
}

/// Rows of the condition `K+ (Id + gamma^1) Phi = o(sqrt(s))`, derived per mode.
///
/// Each branch `s^{∓m}` contributes its polarization vector; `gamma^1`
/// acts on mode coefficients by the same matrix as on spinors (it preserves
/// the `T_{∓1/2}` slots), and `K+` is the per-mode projector. The nonzero
/// rows of the products are returned.
pub fn maps_rows() -> ConstraintRows {
    let g = GammaRep::pauli_dirac();
    let op = nalgebra::Matrix4::<C64>::identity() + g.gamma[1];
    let half = C64::from(0.5);
    #[rustfmt::skip]
    let kplus = nalgebra::Matrix4::new(
        half, ZERO, ZERO, half,
        ZERO, half, half, ZERO,
        ZERO, half, half, ZERO,
        half, ZERO, ZERO, half,
    );
    let k = kplus * op;
    // Polarizations (a-, b-) -> (a-, b-, -i a-, i b-) and (a+, b+) -> (a+, b+, i a+, -i b+).
    let minus = [[ONE, ZERO], [ZERO, ONE], [-I, ZERO], [ZERO, I]];
    let plus = [[ONE, ZERO], [ZERO, ONE], [I, ZERO], [ZERO, -I]];
    let mut rows = vec![];
    for (offset, pol) in [(0usize, minus), (2, plus)] {
        for r in 0..4 {
            let mut row = [ZERO; 4];
            for c in 0..2 {
                row[offset + c] = (0..4).map(|j| k[(r, j)] * pol[j][c]).sum();
            }
            if row.iter().any(|z| z.norm() > 1e-14) {
                rows.push(row);
            }
        }
    }
    rows
}

/// Numerical rank of a set of rows (modified Gram–Schmidt, tolerance `1e-12`).
pub fn row_rank(rows: &[[C64; 4]]) -> usize {
    orthonormal_basis(rows.iter().copied()).len()
}

fn orthonormal_basis(rows: impl Iterator<Item = [C64; 4]>) -> Vec<[C64; 4]> {
    let mut basis: Vec<[C64; 4]> = vec![];
    for mut v in rows {
        for e in &basis {
            let p: C64 = (0..4).map(|j| v[j] * e[j].conj()).sum();
            for j in 0..4 {
                v[j] -= p * e[j];
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-12 {
            basis.push(v.map(|z| z / n));
        }
    }
    basis
}

/// Orthonormal basis of the amplitude vectors satisfying all rows.
pub fn admissible_amplitudes(rows: &[[C64; 4]]) -> Vec<[C64; 4]> {
    // row · z = ⟨z, conj(row)⟩, so the admissible space is the orthogonal complement of conj(rows).
    let conj_rows = orthonormal_basis(rows.iter().map(|r| r.map(|z| z.conj())));
    let units = (0..4).map(|k| {
        let mut e = [ZERO; 4];
        e[k] = ONE;
        e
    });
    let all = orthonormal_basis(conj_rows.iter().copied().chain(units));
    all[conj_rows.len()..].to_vec()
}

/// Transforms rows so they act on exchanged amplitudes `E z`, where `E` is the chiral exchange.
pub fn exchange_rows(rows: &[[C64; 4]]) -> ConstraintRows {
    // E z = (i a+, -i b+, -i a-, i b-); with r' · (E z) = r · z we need r' = r E^{-1}.
    // E^{-1} (a'-, b'-, a'+, b'+) = (i a'+, -i b'+, -i a'-, i b'-).
    rows.iter()
        .map(|r| [r[2] * I, r[3] * -I, r[0] * -I, r[1] * I])
        .collect()
}

/// Whether two row sets span the same space.
pub fn row_equivalent(a: &[[C64; 4]], b: &[[C64; 4]]) -> bool {
    let ra = row_rank(a);
    let rb = row_rank(b);
    let joint: Vec<[C64; 4]> = a.iter().chain(b).copied().collect();
    ra == rb && row_rank(&joint) == ra
}

/// Outcome of a boundary symmetry check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    /// Largest `|⟨H a, b⟩ - ⟨a, H b⟩| / (‖a‖‖b‖)` over the sampled pairs.
    pub worst: f64,
    pub samples: usize,
}

/// Default cutoff width used when synthesizing boundary states.
pub const SYNTH_CUTOFF: f64 = 0.8;

/// Samples random admissible amplitude pairs, synthesizes states and
/// evaluates the Green boundary pairing, normalized by the state norms.
///
/// Vacuous (zero) for Dirichlet and for the heavy regime.
pub fn symmetry_check(
    bc: &BoundaryCondition,
    mode: ModeIndex,
    params: &PhysicalParams,
    n_samples: usize,
    seed: u64,
) -> Result<SymmetryReport> {
    if matches!(bc, BoundaryCondition::Dirichlet) || params.is_heavy() {
        return Ok(SymmetryReport { worst: 0.0, samples: n_samples });
    }
    if params.m() == 0.0 {
        return Err(Error::Regime("symmetry check needs M != 0".into()));
    }
    let rows = rows_unchecked(bc);
    let basis = admissible_amplitudes(&rows);
    let grid: Arc<RadialGrid> = RadialGrid::new(256)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let mut z = [ZERO; 4];
        for e in &basis {
            let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            for j in 0..4 {
                z[j] += c * e[j];
            }
        }
        AsymptoticData::from_array(z)
    };
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let za = draw(&mut rng);
        let zb = draw(&mut rng);
        let a = radial::synthesize_from_asymptotics(mode, *params, grid.clone(), &za, SYNTH_CUTOFF)?;
        let b = radial::synthesize_from_asymptotics(mode, *params, grid.clone(), &zb, SYNTH_CUTOFF)?;
        let norm = (radial::charge_norm(&a) * radial::charge_norm(&b)).sqrt();
        if norm == 0.0 {
            continue;
        }
        let p = radial::green_pairing(&a, &b)?;
        worst = worst.max(p.norm() / norm);
    }
    Ok(SymmetryReport { worst, samples: n_samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_grammar() {
        assert_eq!("MIT".parse::<BoundaryCondition>().unwrap(), BoundaryCondition::Mit);
        let bc: BoundaryCondition = "genA+:1,0.5,-0.25,2".parse().unwrap();
        match bc {
            BoundaryCondition::GenAPlus(a) => {
                assert_eq!(a[(0, 1)], C64::new(0.5, -0.25));
                assert_eq!(a[(1, 0)], C64::new(0.5, 0.25));
            }
            _ => panic!("wrong family"),
        }
        assert!("genA-:1,2".parse::<BoundaryCondition>().is_err());
        assert!("robin".parse::<BoundaryCondition>().is_err());
        let back: BoundaryCondition = bc.to_string().parse().unwrap();
        assert_eq!(back, bc);
    }

    #[test]
    fn admissible_space_is_the_null_space() {
        for bc in [BoundaryCondition::Mit, BoundaryCondition::Aps, BoundaryCondition::Chiral] {
            let rows = rows_unchecked(&bc);
            let basis = admissible_amplitudes(&rows);
            assert_eq!(basis.len(), 2);
            for z in &basis {
                for r in &rows {
                    let v: C64 = (0..4).map(|j| r[j] * z[j]).sum();
                    assert!(v.norm() < 1e-14);
                }
            }
        }
    }
}
