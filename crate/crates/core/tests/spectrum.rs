mod common;

use adsdirac::angular::ModeIndex;
use adsdirac::boundary::BoundaryCondition;
use adsdirac::gamma_geometry::{PhysicalParams, C64};
use adsdirac::radial::{boundary_decay_check, extract_asymptotics, DecayEnd, RadialGrid};
use adsdirac::spectrum::*;
use nalgebra::Matrix2;

/// Lowest eigenvalues (system 1, ascending) of the staggered finite-difference
/// oracle at 4096 cells, MIT type, m = 1/4, frozen from `common::fd_mit_eigenvalues`.
const FD_MIT_M025: [&[f64]; 3] = [
    &[-8.249995931367796, -6.249998148352455, -4.249999371796031, -2.2499998960182594, 1.2499999953331251,
      3.249999722710559, 5.249998897974397, 7.249997226823341],
    &[-7.2499977956134725, -5.249999202058486, -3.2499998503564234, 2.249999992969898, 4.2499996233047295,
      6.249998642559264, 8.249996756502327],
    &[-8.249997395194839, -6.249999011615328, -4.249999799765487, 3.249999990278379, 5.249999515535164,
      7.249998359518205],
];

fn mode(k: u32) -> ModeIndex {
    ModeIndex::from_kappa(k).unwrap()
}

fn cfg(n_nodes: usize, n_eigs: usize) -> SolverConfig {
    SolverConfig { n_nodes, n_eigs, ..SolverConfig::default() }
}

/// Closed-form spectrum `±(kappa + 1/2 + shift + j)`, sorted by modulus with
/// the negative member of each pair first.
fn ladder(kappa: f64, shift: f64, count: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..count)
        .flat_map(|j| {
            let e = kappa + 0.5 + shift + j as f64;
            [e, -e]
        })
        .collect();
    v.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    v
}

fn nearest(values: &[f64], x: f64) -> f64 {
    values.iter().copied().min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs())).unwrap()
}

#[test]
fn fd_fixture_is_reproducible() {
    let v = common::fd_mit_eigenvalues(2.0, 0.25, 4096, 9.0);
    assert_eq!(v.len(), FD_MIT_M025[1].len());
    for (a, b) in v.iter().zip(FD_MIT_M025[1]) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn mit_agrees_with_finite_difference_oracle() {
    let p = PhysicalParams::reduced(0.25);
    for k in 1..=3u32 {
        let r = solve_mode(mode(k), &p, &BoundaryCondition::Mit, &cfg(128, 12)).unwrap();
        let mut fd: Vec<f64> = FD_MIT_M025[k as usize - 1].to_vec();
        fd.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        for &f in fd.iter().take(5) {
            let g = nearest(&r.eigenvalues, f);
            assert!((g - f).abs() < 1e-6 * f.abs(), "kappa={k}: {g} vs {f}");
        }
    }
}

#[test]
fn local_conditions_reproduce_closed_forms() {
    for (bc, m, shift) in [
        (BoundaryCondition::Mit, 0.25, -0.25),
        (BoundaryCondition::Mit, 0.1, -0.1),
        (BoundaryCondition::Chiral, 0.25, 0.25),
        (BoundaryCondition::Chiral, -0.3, -0.3),
    ] {
        let r = solve_mode(mode(2), &PhysicalParams::reduced(m), &bc, &cfg(64, 8)).unwrap();
        let want = ladder(2.0, shift, 8);
        for (g, w) in r.eigenvalues.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9, "{bc} m={m}: {g} vs {w}");
        }
        assert!(r.residuals.iter().all(|&x| x < 1e-8));
        assert!(r.hermiticity_defect < 1e-10);
    }
}

#[test]
fn chiral_exchange_relates_mit_and_chiral_spectra() {
    for m in [0.25, 0.4, -0.2] {
        let a = solve_mode(mode(1), &PhysicalParams::reduced(m), &BoundaryCondition::Mit, &cfg(64, 8)).unwrap();
        let b = solve_mode(mode(1), &PhysicalParams::reduced(-m), &BoundaryCondition::Chiral, &cfg(64, 8)).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-9, "m={m}: {x} vs {y}");
        }
    }
}

#[test]
fn aps_spectrum_is_the_union_of_the_two_families() {
    let r = solve_mode(mode(1), &PhysicalParams::reduced(0.25), &BoundaryCondition::Aps, &cfg(64, 6)).unwrap();
    // Spectrally asymmetric: negative branch -(1.25 + j), -(1.75 + j); positive branch 2.25 + j, 2.75 + j.
    let want = [-1.25, -1.75, 2.25, 2.75, -3.25, -3.75];
    for w in want {
        assert!((nearest(&r.eigenvalues, w) - w).abs() < 1e-9, "{w} missing: {:?}", r.eigenvalues);
    }
}

#[test]
fn spectral_gap_and_separation_of_conditions() {
    let p = PhysicalParams::reduced(0.25);
    let lowest_positive = |bc: BoundaryCondition| {
        let r = solve_mode(mode(1), &p, &bc, &cfg(64, 6)).unwrap();
        assert!(r.eigenvalues.iter().all(|x| x.abs() > 0.1));
        r.eigenvalues.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min)
    };
    let (mit, chi, aps) =
        (lowest_positive(BoundaryCondition::Mit), lowest_positive(BoundaryCondition::Chiral), lowest_positive(BoundaryCondition::Aps));
    assert!((mit - 1.25).abs() < 1e-9 && (chi - 1.75).abs() < 1e-9 && (aps - 2.25).abs() < 1e-9);
    assert!((mit - chi).abs() > 1e-3 && (mit - aps).abs() > 1e-3 && (chi - aps).abs() > 1e-3);
}

#[test]
fn eigenvalue_counting_grows_with_the_cutoff() {
    let r = solve_mode(mode(1), &PhysicalParams::reduced(0.25), &BoundaryCondition::Mit, &cfg(128, 40)).unwrap();
    let count = |c: f64| r.eigenvalues.iter().filter(|x| x.abs() <= c).count();
    // Exact count: 2 * #{j >= 0 : 1.25 + j <= c}.
    assert_eq!(count(5.0), 8);
    assert_eq!(count(10.0), 18);
    assert_eq!(count(15.0), 28);
}

#[test]
fn heavy_dirichlet_spectrum_and_decay_independence() {
    let p = PhysicalParams::reduced(0.75);
    let exact = solve_mode(mode(1), &p, &BoundaryCondition::Dirichlet, &cfg(64, 6)).unwrap();
    let want = ladder(1.0, 0.75, 3);
    for (g, w) in exact.eigenvalues.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9, "{g} vs {w}");
    }
    let by_decay = |d: BoundaryDecay| {
        let c = SolverConfig { heavy_decay: d, ..cfg(128, 4) };
        solve_mode(mode(1), &p, &BoundaryCondition::Dirichlet, &c).unwrap().eigenvalues
    };
    let (a, b) = (by_decay(BoundaryDecay::Sqrt), by_decay(BoundaryDecay::Linear));
    for ((x, y), w) in a.iter().zip(&b).zip(&want) {
        assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        assert!((x - w).abs() < 1e-8);
    }
}

#[test]
fn generalized_condition_with_zero_matrix_matches_mit() {
    let p = PhysicalParams::reduced(0.25);
    let bc = BoundaryCondition::gen_a_minus(Matrix2::zeros()).unwrap();
    let r = solve_mode(mode(1), &p, &bc, &cfg(64, 6)).unwrap();
    for (g, w) in r.eigenvalues.iter().zip(ladder(1.0, -0.25, 3)) {
        assert!((g - w).abs() < 1e-8, "{g} vs {w}");
    }
}

#[test]
fn generalized_condition_is_self_adjoint_and_converges() {
    let p = PhysicalParams::reduced(0.25);
    let a = Matrix2::new(C64::new(0.7, 0.0), C64::new(0.3, -0.4), C64::new(0.3, 0.4), C64::new(-1.2, 0.0));
    let bc = BoundaryCondition::gen_a_plus(a).unwrap();
    let r1 = solve_mode(mode(1), &p, &bc, &cfg(64, 4)).unwrap();
    let r2 = solve_mode(mode(1), &p, &bc, &cfg(96, 4)).unwrap();
    assert!(r1.hermiticity_defect < 1e-6);
    for (x, y) in r1.eigenvalues.iter().zip(&r2.eigenvalues) {
        assert!((x - y).abs() < 1e-8, "{x} vs {y}");
    }
}

#[test]
fn eigenvectors_satisfy_the_boundary_condition_and_decay() {
    let p = PhysicalParams::reduced(0.25);
    let r = solve_mode(mode(1), &p, &BoundaryCondition::Mit, &cfg(64, 4)).unwrap();
    let grid = RadialGrid::new(256).unwrap();
    for k in 0..r.len() {
        let st = r.to_state(k, grid.clone());
        let amps = extract_asymptotics(&st).unwrap();
        // MIT forbids the leading a_+, b_+ combinations in this representation's reduction.
        let lead = amps.a_minus.norm().max(amps.b_minus.norm()).max(amps.a_plus.norm()).max(amps.b_plus.norm());
        assert!(lead > 1e-3);
        let slope = boundary_decay_check(&st, DecayEnd::Boundary).unwrap();
        assert!((slope.abs() - 0.25).abs() < 0.05, "slope {slope}");
        let centre = boundary_decay_check(&st, DecayEnd::Center).unwrap();
        assert!((centre - 1.0).abs() < 0.05, "centre slope {centre}");
        // Real radial profiles carry no chirality.
        let chi: f64 = (0..grid.len())
            .map(|i| 2.0 * grid.weights[i] * (st.u[0][i].conj() * st.u[2][i] + st.u[1][i].conj() * st.u[3][i]).im)
            .sum();
        assert!(chi.abs() < 1e-10, "chirality {chi}");
    }
}

#[test]
fn sweep_is_ordered_deterministic_and_validated() {
    let p = PhysicalParams::reduced(0.25);
    let c = cfg(32, 4);
    let a = spectrum_sweep(&p, &BoundaryCondition::Mit, 5, &c).unwrap();
    let b = spectrum_sweep(&p, &BoundaryCondition::Mit, 5, &c).unwrap();
    assert_eq!(a.len(), 3);
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        assert_eq!(x.mode.kappa(), i as u32 + 1);
        assert_eq!(x.multiplicity, 2 * (i as u32 + 1));
        assert_eq!(x.eigenvalues, y.eigenvalues);
    }
    assert!(spectrum_sweep(&p, &BoundaryCondition::Mit, 4, &c).is_err());
    assert!(spectrum_sweep(&p, &BoundaryCondition::Mit, -1, &c).is_err());
    let e = spectrum_sweep(&p, &BoundaryCondition::Dirichlet, 1, &c).unwrap_err();
    assert_eq!(e.exit_code(), 3);
    assert!(assemble_mode_matrix(mode(1), &p, &BoundaryCondition::Mit, &cfg(8, 4)).is_err());
}

#[test]
fn convergence_study_reports_cauchy_differences() {
    let t = convergence_study(
        mode(1),
        &PhysicalParams::reduced(0.25),
        &BoundaryCondition::Mit,
        &[32, 48, 64],
        &cfg(32, 4),
    )
    .unwrap();
    assert_eq!(t.values.len(), 3);
    assert!(t.cauchy.iter().flatten().all(|&d| d < 1e-9));
    assert!(convergence_study(mode(1), &PhysicalParams::reduced(0.25), &BoundaryCondition::Mit, &[32, 48], &cfg(32, 4)).is_err());
}
