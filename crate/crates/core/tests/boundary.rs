use adsdirac::angular::ModeIndex;
use adsdirac::boundary::*;
use adsdirac::gamma_geometry::{PhysicalParams, C64};
use adsdirac::radial::AsymptoticData;
use nalgebra::Matrix2;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn mode() -> ModeIndex {
    ModeIndex::from_kappa(1).unwrap()
}

fn hermitian() -> Matrix2<C64> {
    Matrix2::new(c(0.7, 0.0), c(0.3, -0.4), c(0.3, 0.4), c(-1.2, 0.0))
}

#[test]
fn zero_generalized_matrices_reduce_to_local_conditions() {
    let p = PhysicalParams::reduced(0.25);
    let zero = Matrix2::zeros();
    let plus = constraint_rows(&BoundaryCondition::gen_a_plus(zero).unwrap(), mode(), &p).unwrap();
    let minus = constraint_rows(&BoundaryCondition::gen_a_minus(zero).unwrap(), mode(), &p).unwrap();
    assert!(row_equivalent(&plus, &constraint_rows(&BoundaryCondition::Chiral, mode(), &p).unwrap()));
    assert!(row_equivalent(&minus, &constraint_rows(&BoundaryCondition::Mit, mode(), &p).unwrap()));
}

#[test]
fn aps_rows_annihilate_the_reference_vector() {
    let rows = constraint_rows(&BoundaryCondition::Aps, mode(), &PhysicalParams::reduced(0.25)).unwrap();
    let z = [c(0.0, -1.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)];
    for r in &rows {
        let v: C64 = (0..4).map(|j| r[j] * z[j]).sum();
        assert!(v.norm() < 1e-15);
    }
}

#[test]
fn ranks_and_admissible_dimensions() {
    let p = PhysicalParams::reduced(0.25);
    let all = [
        BoundaryCondition::Mit,
        BoundaryCondition::Chiral,
        BoundaryCondition::Aps,
        BoundaryCondition::gen_a_plus(hermitian()).unwrap(),
        BoundaryCondition::gen_a_minus(hermitian()).unwrap(),
    ];
    for bc in all {
        let rows = constraint_rows(&bc, mode(), &p).unwrap();
        assert_eq!(row_rank(&rows), 2, "{bc}");
        assert_eq!(admissible_amplitudes(&rows).len(), 2, "{bc}");
    }
    let heavy = PhysicalParams::reduced(0.75);
    let rows = constraint_rows(&BoundaryCondition::Dirichlet, mode(), &heavy).unwrap();
    assert!(rows.is_empty());
}

#[test]
fn regime_mismatch_names_the_threshold() {
    let light = PhysicalParams::new(3.0, 0.25).unwrap();
    let err = constraint_rows(&BoundaryCondition::Dirichlet, mode(), &light).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("0.5"));
    let heavy = PhysicalParams::new(12.0, 1.5).unwrap();
    assert!(constraint_rows(&BoundaryCondition::Mit, mode(), &heavy).is_err());
    assert!(constraint_rows(&BoundaryCondition::Mit, mode(), &PhysicalParams::reduced(0.0)).is_err());
}

#[test]
fn maps_rows_are_row_equivalent_to_aps() {
    let maps = maps_rows();
    let aps = constraint_rows(&BoundaryCondition::Aps, mode(), &PhysicalParams::reduced(0.25)).unwrap();
    assert!(row_equivalent(&maps, &aps));
}

#[test]
fn chiral_exchange_maps_mit_to_chiral() {
    let p = PhysicalParams::reduced(0.25);
    let q = PhysicalParams::reduced(-0.25);
    let mit = constraint_rows(&BoundaryCondition::Mit, mode(), &p).unwrap();
    let chi = constraint_rows(&BoundaryCondition::Chiral, mode(), &q).unwrap();
    assert!(row_equivalent(&exchange_rows(&mit), &chi));
    let aps = constraint_rows(&BoundaryCondition::Aps, mode(), &p).unwrap();
    assert!(row_equivalent(&exchange_rows(&aps), &aps));
    // Amplitude-level check of the same statement.
    for z in admissible_amplitudes(&mit) {
        let e = AsymptoticData::from_array(z).chiral_exchange().as_array();
        for r in &chi {
            let v: C64 = (0..4).map(|j| r[j] * e[j]).sum();
            assert!(v.norm() < 1e-14);
        }
    }
}

#[test]
fn hermitian_families_are_symmetric_and_the_control_is_not() {
    let p = PhysicalParams::reduced(0.25);
    for bc in [
        BoundaryCondition::Mit,
        BoundaryCondition::Chiral,
        BoundaryCondition::Aps,
        BoundaryCondition::gen_a_plus(hermitian()).unwrap(),
        BoundaryCondition::gen_a_minus(hermitian()).unwrap(),
    ] {
        let r = symmetry_check(&bc, mode(), &p, 20, 3).unwrap();
        assert!(r.worst < 1e-6, "{bc}: {}", r.worst);
    }
    let bad = Matrix2::new(c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.1), c(0.0, 0.0));
    assert!(BoundaryCondition::gen_a_plus(bad).is_err());
    let r = symmetry_check(&BoundaryCondition::GenAPlus(bad), mode(), &p, 20, 3).unwrap();
    assert!(r.worst > 1e-2, "{}", r.worst);
}
