//! Galerkin discretization of one angular mode.
//!
//! Writing `S = sin x`, `C = cos x = sin s`, the radial system splits into
//! two real 2×2 systems. System 1 acts on `P = A - iB`, `D = A + iB` with
//! `A = u1 + i u2`, `B = u3 - i u4`; system 2 on `A = u1 - i u2`,
//! `B = u3 + i u4`. Both read
//!
//! ```text
//! lambda P = -k P/S + D' - m D/C
//! lambda D = -P' - m P/C + k D/S
//! ```
//!
//! with `k = +kappa` (system 1) or `k = -kappa` (system 2). Near the boundary
//! `D1 ≈ 2 p- s^{-m}`, `P1 ≈ 2 p+ s^{m}`, `D2 ≈ 2 q- s^{-m}`, `P2 ≈ 2 q+ s^{m}`
//! with `p = a + i b` and `q = a - i b` built from the boundary amplitudes.
//!
//! Trial functions are `sin^kappa(x) s^gamma p_j(tau)` with `p_j` orthonormal
//! Jacobi polynomials in `tau = 1 - 2 (s/(pi/2))^{1/q}`; the exponent `gamma`
//! fixes the boundary behaviour of every function in the family, so each
//! boundary condition is built into the trial space.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gamma_geometry::C64;
use crate::jacobi;
use crate::quadrature::DeRule;

/// A family of trial functions with fixed boundary exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Family {
    /// Exponent of `s = pi/2 - x` shared by all members.
    pub gamma: f64,
    /// Stretch of the polynomial variable towards the boundary (1 = none).
    pub q: f64,
    pub size: usize,
}

impl Family {
    fn jacobi_params(&self, kappa: f64) -> (f64, f64) {
        (2.0 * self.q * self.gamma + self.q - 1.0, 2.0 * kappa)
    }
}

/// Trial families of one decoupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    /// `+1` for system 1, `-1` for system 2.
    pub k_sign: f64,
    pub p: Vec<Family>,
    pub d: Vec<Family>,
}

impl SystemSpec {
    pub fn dof(&self) -> usize {
        self.p.iter().chain(&self.d).map(|f| f.size).sum()
    }
}

/// `1/s - 1/sin s` without cancellation.
fn inv_diff(s: f64) -> f64 {
    if s < 1e-2 {
        let z2 = s * s;
        -s * (1.0 / 6.0 + z2 * (7.0 / 360.0 + z2 * 31.0 / 15120.0))
    } else {
        1.0 / s - 1.0 / s.sin()
    }
}

/// Values `phi_j(x)` and `(sigma d/dx - m/C) phi_j(x)` of a family at one point.
///
/// The singular parts `s^{gamma-1}` of the two terms are combined analytically
/// so they cancel exactly when `sigma gamma + m = 0`.
pub fn family_eval(
    fam: &Family,
    kappa: f64,
    sigma: f64,
    m: f64,
    x: f64,
    s: f64,
    vals: &mut [f64],
    ops: &mut [f64],
) {
    let n = fam.size;
    let (a, b) = fam.jacobi_params(kappa);
    let sig = (s / FRAC_PI_2).powf(1.0 / fam.q);
    let tau = 1.0 - 2.0 * sig;
    let dtau = 2.0 * sig / (fam.q * s);
    let (sx, cx) = x.sin_cos();
    let sk = sx.powf(kappa);
    let w = sk * s.powf(fam.gamma);
    let w_cot = kappa * cx * sx.powf(kappa - 1.0) * s.powf(fam.gamma);
    let w_s = sk * s.powf(fam.gamma - 1.0);
    let c_sing = sigma * fam.gamma + m;
    let r = inv_diff(s);
    let (p, dp) = jacobi::values_and_derivatives(n, a, b, tau);
    for j in 0..n {
        vals[j] = w * p[j];
        let mut op = sigma * (w_cot * p[j] + w * dp[j] * dtau) + m * w * p[j] * r;
        if c_sing != 0.0 {
            op -= c_sing * w_s * p[j];
        }
        ops[j] = op;
    }
}

/// Sampled trial functions of one slot on a quadrature rule.
struct SlotTable {
    /// `dof × nodes` values.
    vals: DMatrix<f64>,
    /// `dof × nodes` images under the slot's first-order operator.
    ops: DMatrix<f64>,
}

fn slot_table(fams: &[Family], kappa: f64, sigma: f64, m: f64, x: &[f64], s: &[f64]) -> SlotTable {
    let dof: usize = fams.iter().map(|f| f.size).sum();
    let n = x.len();
    let mut vals = DMatrix::zeros(dof, n);
    let mut ops = DMatrix::zeros(dof, n);
    let max = fams.iter().map(|f| f.size).max().unwrap_or(0);
    let (mut v, mut o) = (vec![0.0; max], vec![0.0; max]);
    for i in 0..n {
        let mut row = 0;
        for f in fams {
            family_eval(f, kappa, sigma, m, x[i], s[i], &mut v[..f.size], &mut o[..f.size]);
            for j in 0..f.size {
                vals[(row + j, i)] = v[j];
                ops[(row + j, i)] = o[j];
            }
            row += f.size;
        }
    }
    SlotTable { vals, ops }
}

/// `A diag(w) B^T`.
fn weighted_product(a: &DMatrix<f64>, w: &[f64], b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut aw = a.clone();
    for (j, &wj) in w.iter().enumerate() {
        aw.column_mut(j).scale_mut(wj);
    }
    aw * b.transpose()
}

/// Radial trial space of one mode: both systems and their families.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBasis {
    pub kappa: f64,
    pub m: f64,
    pub systems: [SystemSpec; 2],
}

/// Stiffness and mass matrices in the raw (unconstrained) coordinates.
#[derive(Debug, Clone)]
pub struct RawMatrices {
    pub h: DMatrix<f64>,
    pub mass: DMatrix<f64>,
}

impl ModeBasis {
    pub fn dof(&self) -> usize {
        self.systems.iter().map(SystemSpec::dof).sum()
    }

    /// Offset of system `sys` and of its `D` slot inside the coordinate vector.
    pub fn offsets(&self, sys: usize) -> (usize, usize) {
        let start: usize = self.systems[..sys].iter().map(SystemSpec::dof).sum();
        let np: usize = self.systems[sys].p.iter().map(|f| f.size).sum();
        (start, start + np)
    }

    /// Block-diagonal Galerkin matrices `⟨phi_i, H phi_j⟩` and `⟨phi_i, phi_j⟩`.
    pub fn assemble(&self, rule: &DeRule) -> RawMatrices {
        let n = self.dof();
        let mut h = DMatrix::zeros(n, n);
        let mut mass = DMatrix::zeros(n, n);
        for (sys, spec) in self.systems.iter().enumerate() {
            let k = spec.k_sign * self.kappa;
            let tp = slot_table(&spec.p, self.kappa, -1.0, self.m, &rule.x, &rule.s);
            let td = slot_table(&spec.d, self.kappa, 1.0, self.m, &rule.x, &rule.s);
            let w_inv_sin: Vec<f64> = rule.w.iter().zip(&rule.x).map(|(w, x)| w / x.sin()).collect();
            let (p0, d0) = self.offsets(sys);
            let (np, nd) = (tp.vals.nrows(), td.vals.nrows());
            let pp = weighted_product(&tp.vals, &w_inv_sin, &tp.vals) * -k;
            let dd = weighted_product(&td.vals, &w_inv_sin, &td.vals) * k;
            let pd = weighted_product(&tp.vals, &rule.w, &td.ops);
            let dp = weighted_product(&td.vals, &rule.w, &tp.ops);
            h.view_mut((p0, p0), (np, np)).copy_from(&pp);
            h.view_mut((d0, d0), (nd, nd)).copy_from(&dd);
            h.view_mut((p0, d0), (np, nd)).copy_from(&pd);
            h.view_mut((d0, p0), (nd, np)).copy_from(&dp);
            mass.view_mut((p0, p0), (np, np))
                .copy_from(&weighted_product(&tp.vals, &rule.w, &tp.vals));
            mass.view_mut((d0, d0), (nd, nd))
                .copy_from(&weighted_product(&td.vals, &rule.w, &td.vals));
        }
        RawMatrices { h, mass }
    }

    /// Leading boundary coefficient functionals in raw coordinates.
    ///
    /// Returns the rows giving `(p-, q-, p+, q+)`: half the coefficient of
    /// `s^{-m}` in `D1`, `D2` and of `s^{m}` in `P1`, `P2`.
    pub fn amplitude_functionals(&self) -> [DVector<f64>; 4] {
        let n = self.dof();
        let mut out: [DVector<f64>; 4] = std::array::from_fn(|_| DVector::zeros(n));
        for (sys, spec) in self.systems.iter().enumerate() {
            let (p0, d0) = self.offsets(sys);
            for (slot_start, fams, target_gamma, idx) in
                [(d0, &spec.d, -self.m, sys), (p0, &spec.p, self.m, 2 + sys)]
            {
                let mut row = slot_start;
                for f in fams.iter() {
                    if (f.gamma - target_gamma).abs() < 1e-14 {
                        let (a, b) = f.jacobi_params(self.kappa);
                        let at_boundary = jacobi::values(f.size, a, b, 1.0);
                        for j in 0..f.size {
                            out[idx][row + j] = 0.5 * at_boundary[j];
                        }
                    }
                    row += f.size;
                }
            }
        }
        out
    }

    /// Evaluates `(P1, D1, P2, D2)` and their hamiltonian images at one point
    /// for the raw coordinate vector `c`.
    pub fn eval_systems(&self, c: &[C64], x: f64, s: f64) -> ([C64; 4], [C64; 4]) {
        let mut fields = [C64::new(0.0, 0.0); 4];
        let mut images = [C64::new(0.0, 0.0); 4];
        let max = self
            .systems
            .iter()
            .flat_map(|sp| sp.p.iter().chain(&sp.d))
            .map(|f| f.size)
            .max()
            .unwrap_or(0);
        let (mut v, mut o) = (vec![0.0; max], vec![0.0; max]);
        for (sys, spec) in self.systems.iter().enumerate() {
            let k = spec.k_sign * self.kappa;
            let (p0, d0) = self.offsets(sys);
            let mut p = C64::new(0.0, 0.0);
            let mut d = C64::new(0.0, 0.0);
            let mut lp = C64::new(0.0, 0.0);
            let mut ld = C64::new(0.0, 0.0);
            for (start, fams, sigma) in [(p0, &spec.p, -1.0), (d0, &spec.d, 1.0)] {
                let mut row = start;
                for f in fams.iter() {
                    family_eval(f, self.kappa, sigma, self.m, x, s, &mut v[..f.size], &mut o[..f.size]);
                    for j in 0..f.size {
                        if sigma < 0.0 {
                            p += c[row + j] * v[j];
                            lp += c[row + j] * o[j];
                        } else {
                            d += c[row + j] * v[j];
                            ld += c[row + j] * o[j];
                        }
                    }
                    row += f.size;
                }
            }
            let inv_sin = 1.0 / x.sin();
            fields[2 * sys] = p;
            fields[2 * sys + 1] = d;
            images[2 * sys] = -p * k * inv_sin + ld;
            images[2 * sys + 1] = lp + d * k * inv_sin;
        }
        (fields, images)
    }
}

impl ModeBasis {
    /// All trial-function values at one point, in coefficient order, tagged
    /// with the system field `[P1, D1, P2, D2]` they contribute to.
    pub fn basis_values(&self, x: f64, s: f64) -> (Vec<usize>, Vec<f64>) {
        let mut field = vec![0; self.dof()];
        let mut vals = vec![0.0; self.dof()];
        let mut scratch = vec![0.0; self.dof()];
        for (sys, spec) in self.systems.iter().enumerate() {
            let (p0, d0) = self.offsets(sys);
            for (start, fams, sigma, tag) in [(p0, &spec.p, -1.0, 2 * sys), (d0, &spec.d, 1.0, 2 * sys + 1)] {
                let mut row = start;
                for f in fams.iter() {
                    let end = row + f.size;
                    family_eval(f, self.kappa, sigma, self.m, x, s, &mut vals[row..end], &mut scratch[..f.size]);
                    field[row..end].fill(tag);
                    row = end;
                }
            }
        }
        (field, vals)
    }
}

/// Sampled trial functions of every slot, reused across eigenpairs.
pub struct NodeTables {
    slots: Vec<(SlotTable, SlotTable)>,
    w: Vec<f64>,
    inv_sin: Vec<f64>,
}

impl ModeBasis {
    pub fn node_tables(&self, rule: &DeRule) -> NodeTables {
        let slots = self
            .systems
            .iter()
            .map(|spec| {
                (
                    slot_table(&spec.p, self.kappa, -1.0, self.m, &rule.x, &rule.s),
                    slot_table(&spec.d, self.kappa, 1.0, self.m, &rule.x, &rule.s),
                )
            })
            .collect();
        NodeTables { slots, w: rule.w.clone(), inv_sin: rule.x.iter().map(|x| 1.0 / x.sin()).collect() }
    }

    /// Relative L² residuals `‖H v - lambda v‖ / ‖v‖` of the columns of `coeffs`.
    pub fn residuals(&self, tables: &NodeTables, coeffs: &DMatrix<C64>, lambdas: &[f64]) -> Vec<f64> {
        let nodes = tables.w.len();
        let ncol = coeffs.ncols();
        let mut res2 = vec![0.0; ncol];
        let mut norm2 = vec![0.0; ncol];
        for (sys, (tp, td)) in tables.slots.iter().enumerate() {
            let k = self.systems[sys].k_sign * self.kappa;
            let (p0, d0) = self.offsets(sys);
            let (np, nd) = (tp.vals.nrows(), td.vals.nrows());
            let cp = coeffs.rows(p0, np);
            let cd = coeffs.rows(d0, nd);
            let to_c = |m: &DMatrix<f64>| m.map(C64::from);
            let p = to_c(&tp.vals).transpose() * cp;
            let lp = to_c(&tp.ops).transpose() * cp;
            let d = to_c(&td.vals).transpose() * cd;
            let ld = to_c(&td.ops).transpose() * cd;
            for c in 0..ncol {
                for i in 0..nodes {
                    let ks = k * tables.inv_sin[i];
                    let hp = -p[(i, c)] * ks + ld[(i, c)] - p[(i, c)] * lambdas[c];
                    let hd = lp[(i, c)] + d[(i, c)] * ks - d[(i, c)] * lambdas[c];
                    res2[c] += tables.w[i] * (hp.norm_sqr() + hd.norm_sqr());
                    norm2[c] += tables.w[i] * (p[(i, c)].norm_sqr() + d[(i, c)].norm_sqr());
                }
            }
        }
        res2.iter().zip(&norm2).map(|(r, n)| (r / n).sqrt()).collect()
    }
}

/// `(u1, u2, u3, u4)` from the system fields `(P1, D1, P2, D2)`.
pub fn systems_to_u(f: &[C64; 4]) -> [C64; 4] {
    let i = C64::new(0.0, 1.0);
    let a1 = (f[0] + f[1]) * 0.5;
    let b1 = i * (f[0] - f[1]) * 0.5;
    let a2 = (f[2] + f[3]) * 0.5;
    let b2 = i * (f[2] - f[3]) * 0.5;
    [
        (a1 + a2) * 0.5,
        (-i * a1 + i * a2) * 0.5,
        (b1 + b2) * 0.5,
        (i * b1 - i * b2) * 0.5,
    ]
}

/// `(P1, D1, P2, D2)` from `(u1, u2, u3, u4)`.
pub fn u_to_systems(u: &[C64; 4]) -> [C64; 4] {
    let i = C64::new(0.0, 1.0);
    let a1 = u[0] + i * u[1];
    let b1 = u[2] - i * u[3];
    let a2 = u[0] - i * u[1];
    let b2 = u[2] + i * u[3];
    [a1 - i * b1, a1 + i * b1, a2 - i * b2, a2 + i * b2]
}

/// Basis of the null space of `rows` (each of length `n`) by Gaussian
/// elimination with full pivoting; returns an `n × (n - rank)` matrix.
pub fn null_space(rows: &[DVector<C64>], n: usize) -> DMatrix<C64> {
    let mut a = DMatrix::<C64>::zeros(rows.len(), n);
    for (r, row) in rows.iter().enumerate() {
        a.row_mut(r).copy_from(&row.transpose());
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut pivots: Vec<(usize, usize)> = vec![];
    let mut used_rows = vec![false; rows.len()];
    loop {
        let mut best = (0.0, 0, 0);
        for r in 0..rows.len() {
            if used_rows[r] {
                continue;
            }
            for c in 0..n {
                let v = a[(r, c)].norm();
                if v > best.0 {
                    best = (v, r, c);
                }
            }
        }
        if best.0 <= 1e-12 * scale {
            break;
        }
        let (_, pr, pc) = best;
        used_rows[pr] = true;
        let piv = a[(pr, pc)];
        let prow = a.row(pr).clone_owned() / piv;
        a.row_mut(pr).copy_from(&prow);
        for r in 0..rows.len() {
            if r != pr {
                let f = a[(r, pc)];
                if f.norm() > 0.0 {
                    let upd = a.row(r) - prow.clone() * f;
                    a.row_mut(r).copy_from(&upd);
                }
            }
        }
        pivots.push((pr, pc));
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|p| p.1).collect();
    let free: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let mut z = DMatrix::<C64>::zeros(n, free.len());
    for (k, &fc) in free.iter().enumerate() {
        z[(fc, k)] = C64::new(1.0, 0.0);
        for &(pr, pc) in &pivots {
            z[(pc, k)] = -a[(pr, fc)];
        }
    }
    z
}

/// Hermitian generalized eigenproblem `H v = lambda M v` by canonical
/// orthogonalization: directions of `M` below `rel_cut` times its largest
/// eigenvalue are discarded.
///
/// Returns eigenvalues, eigenvectors in the input coordinates (columns,
/// `M`-orthonormal) and the relative hermiticity defect of the reduced matrix.
pub fn generalized_eigen(
    h: &DMatrix<C64>,
    m: &DMatrix<C64>,
    rel_cut: f64,
) -> Result<(Vec<f64>, DMatrix<C64>, f64)> {
    let me = m.clone().symmetric_eigen();
    let top = me.eigenvalues.max();
    if !(top > 0.0 && top.is_finite()) {
        return Err(Error::Numeric("mass matrix is not positive".into()));
    }
    let keep: Vec<usize> = (0..me.eigenvalues.len()).filter(|&i| me.eigenvalues[i] > rel_cut * top).collect();
    if keep.is_empty() {
        return Err(Error::Numeric("mass matrix has no usable directions".into()));
    }
    let mut x = DMatrix::<C64>::zeros(m.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let scale = 1.0 / me.eigenvalues[i].sqrt();
        x.set_column(c, &(me.eigenvectors.column(i) * C64::from(scale)));
    }
    let reduced = x.adjoint() * h * &x;
    let norm = reduced.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let defect = (&reduced - reduced.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
        / norm.max(f64::MIN_POSITIVE);
    let sym = (&reduced + reduced.adjoint()) * C64::from(0.5);
    let eig = sym.symmetric_eigen();
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("eigen-solver produced non-finite values".into()));
    }
    let vectors = x * eig.eigenvectors;
    Ok((eig.eigenvalues.iter().copied().collect(), vectors, defect))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_maps_are_inverse() {
        let u = [C64::new(0.3, -1.0), C64::new(2.0, 0.5), C64::new(-0.7, 0.1), C64::new(0.0, 1.5)];
        let back = systems_to_u(&u_to_systems(&u));
        for j in 0..4 {
            assert!((back[j] - u[j]).norm() < 1e-15);
        }
    }

    #[test]
    fn null_space_is_annihilated() {
        let n = 6;
        let r1 = DVector::from_fn(n, |i, _| C64::new(i as f64, 1.0));
        let r2 = DVector::from_fn(n, |i, _| C64::new(1.0, -(i as f64) * 0.5));
        let z = null_space(&[r1.clone(), r2.clone()], n);
        assert_eq!(z.ncols(), 4);
        for c in 0..4 {
            let col = z.column(c);
            assert!((r1.transpose() * col)[0].norm() < 1e-13);
            assert!((r2.transpose() * col)[0].norm() < 1e-13);
        }
    }
}
