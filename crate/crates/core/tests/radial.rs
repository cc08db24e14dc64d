use std::f64::consts::{FRAC_PI_2, PI};

use adsdirac::angular::ModeIndex;
use adsdirac::gamma_geometry::{PhysicalParams, C64};
use adsdirac::quadrature::gauss_legendre_on;
use adsdirac::radial::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: C64 = C64::new(0.0, 1.0);

fn kappa1() -> ModeIndex {
    ModeIndex::from_kappa(1).unwrap()
}

#[test]
fn grid_invariants() {
    let g = RadialGrid::new(64).unwrap();
    assert!(g.x.windows(2).all(|w| w[0] < w[1]));
    assert!(g.x.iter().all(|&x| x > 0.0 && x < FRAC_PI_2));
    assert!((g.weights.iter().sum::<f64>() - FRAC_PI_2).abs() < 1e-12);
    assert!(g.weights.iter().all(|&w| w > 0.0));
    for i in 0..64 {
        let row: f64 = (0..64).map(|j| g.diff[(i, j)]).sum();
        assert!(row.abs() < 1e-12);
        assert!((g.x[i] + g.s[i] - FRAC_PI_2).abs() < 1e-15);
    }
}

#[test]
fn charge_norm_of_simple_profiles() {
    let g = RadialGrid::new(48).unwrap();
    let p = PhysicalParams::reduced(0.25);
    let one = RadialModeState::from_fn(kappa1(), p, g.clone(), |_, _| {
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
    });
    assert!((charge_norm(&one) - FRAC_PI_2).abs() < 1e-12);
    let sine = RadialModeState::from_fn(kappa1(), p, g.clone(), |x, _| {
        [C64::new(x.sin(), 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
    });
    assert!((charge_norm(&sine) - PI / 4.0).abs() < 1e-12);
    assert_eq!(charge_norm(&RadialModeState::zeros(kappa1(), p, g)), 0.0);
}

#[test]
fn massless_kernel_profile_is_annihilated() {
    let g = RadialGrid::new(64).unwrap();
    let st = RadialModeState::from_fn(kappa1(), PhysicalParams::reduced(0.0), g, |x, _| {
        let t = (0.5 * x).tan();
        [C64::new(t, 0.0), -I * t, C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
    });
    let out = apply_hm(&st).unwrap();
    assert!((charge_norm(&out) / charge_norm(&st)).sqrt() < 1e-10);
}

#[test]
fn manufactured_solution_matches_analytic_action() {
    // u = (sin^2 x cos x, i sin x cos^2 x, sin^3 x, 0); derivatives by hand.
    let (k, m) = (1.0, 0.25);
    let g = RadialGrid::new(64).unwrap();
    let st = RadialModeState::from_fn(kappa1(), PhysicalParams::reduced(m), g.clone(), |x, _| {
        let (s, c) = x.sin_cos();
        [C64::new(s * s * c, 0.0), I * s * c * c, C64::new(s * s * s, 0.0), C64::new(0.0, 0.0)]
    });
    let out = apply_hm(&st).unwrap();
    for i in 0..g.len() {
        let (s, c) = g.x[i].sin_cos();
        let u1 = C64::new(s * s * c, 0.0);
        let u2 = I * s * c * c;
        let u3 = C64::new(s * s * s, 0.0);
        let d1 = C64::new(2.0 * s * c * c - s * s * s, 0.0);
        let d2 = I * (c * c * c - 2.0 * s * s * c);
        let d3 = C64::new(3.0 * s * s * c, 0.0);
        let want = [
            I * d3 - m / c * u1,
            k / s * u3 - m / c * u2,
            I * d1 + k / s * u2 + m / c * u3,
            -I * d2 + k / s * u1,
        ];
        for j in 0..4 {
            assert!((out.u[j][i] - want[j]).norm() < 1e-9, "component {j} node {i}");
        }
    }
}

#[test]
fn gamma5_conjugation_flips_the_mass() {
    let g = RadialGrid::new(24).unwrap();
    let mode = ModeIndex::from_kappa(2).unwrap();
    let h = collocation_matrix(mode, &PhysicalParams::reduced(0.3), &g);
    let hm = collocation_matrix(mode, &PhysicalParams::reduced(-0.3), &g);
    let p = gamma5_mode_matrix(g.len());
    let d = (&p * h * &p - hm).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(d < 1e-13);
}

#[test]
fn asymptotic_round_trip() {
    let g = RadialGrid::new(256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for &m in &[0.25, 0.1, 0.4, -0.3] {
        let p = PhysicalParams::reduced(m);
        for _ in 0..5 {
            let z: [C64; 4] =
                std::array::from_fn(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let amps = AsymptoticData::from_array(z);
            let st = synthesize_from_asymptotics(kappa1(), p, g.clone(), &amps, 0.8).unwrap();
            let got = extract_asymptotics(&st).unwrap().as_array();
            for j in 0..4 {
                assert!((got[j] - z[j]).norm() < 1e-6, "m={m} j={j} {:?} {:?}", got[j], z[j]);
            }
        }
    }
    let unit = AsymptoticData::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    let st = synthesize_from_asymptotics(kappa1(), PhysicalParams::reduced(0.25), g.clone(), &unit, 0.8).unwrap();
    let got = extract_asymptotics(&st).unwrap();
    assert!((got.a_minus - 1.0).norm() < 1e-6 && got.b_minus.norm() < 1e-6);
    let zero = RadialModeState::zeros(kappa1(), PhysicalParams::reduced(0.25), g);
    assert_eq!(extract_asymptotics(&zero).unwrap().as_array(), [C64::new(0.0, 0.0); 4]);
}

#[test]
fn fit_refuses_the_threshold_neighbourhood() {
    let g = RadialGrid::new(128).unwrap();
    let st = RadialModeState::zeros(kappa1(), PhysicalParams::reduced(0.49), g.clone());
    assert!(extract_asymptotics(&st).is_err());
    let heavy = RadialModeState::zeros(kappa1(), PhysicalParams::reduced(0.75), g.clone());
    assert_eq!(extract_asymptotics(&heavy).unwrap().fit_residual, 0.0);
    let amps = AsymptoticData::zero();
    assert!(synthesize_from_asymptotics(kappa1(), PhysicalParams::reduced(0.75), g, &amps, 0.8).is_err());
}

/// Synthesized profile and its exact hamiltonian image at boundary distance `s`.
fn exact_pair(k: f64, m: f64, amps: &AsymptoticData, w: f64, s: f64) -> ([C64; 4], [C64; 4]) {
    let v = synthesis_profile(m, amps);
    let f = cutoff(s / w);
    let fp = cutoff_derivative(s / w) / w;
    let (lo, hi) = (s.powf(-m), s.powf(m));
    let (dlo, dhi) = (-m * s.powf(-m - 1.0), m * s.powf(m - 1.0));
    let u: [C64; 4] = std::array::from_fn(|j| v[0][j] * lo * f + v[1][j] * hi * f);
    // d/dx = -d/ds
    let du: [C64; 4] =
        std::array::from_fn(|j| -(v[0][j] * (dlo * f + lo * fp) + v[1][j] * (dhi * f + hi * fp)));
    let x = FRAC_PI_2 - s;
    let ks = k / x.sin();
    let mc = m / s.sin();
    let h = [
        I * du[2] + ks * u[3] - mc * u[0],
        -I * du[3] + ks * u[2] - mc * u[1],
        I * du[0] + ks * u[1] + mc * u[2],
        -I * du[1] + ks * u[0] + mc * u[3],
    ];
    (u, h)
}

/// `⟨H a, b⟩ - ⟨a, H b⟩` by composite Gauss–Legendre on geometric panels in `s`.
fn commutator_by_quadrature(k: f64, m: f64, a: &AsymptoticData, b: &AsymptoticData, w: f64) -> (C64, f64, f64) {
    let mut edges = vec![w];
    while *edges.last().unwrap() > 1e-13 {
        let e = *edges.last().unwrap() * 0.5;
        edges.push(e);
    }
    let mut acc = C64::new(0.0, 0.0);
    let (mut na, mut nb) = (0.0, 0.0);
    for p in edges.windows(2) {
        let (s, wts) = gauss_legendre_on(20, p[1], p[0]);
        for (&s, &wt) in s.iter().zip(&wts) {
            let (ua, ha) = exact_pair(k, m, a, w, s);
            let (ub, hb) = exact_pair(k, m, b, w, s);
            for j in 0..4 {
                acc += wt * (ha[j] * ub[j].conj() - ua[j] * hb[j].conj());
                na += wt * ua[j].norm_sqr();
                nb += wt * ub[j].norm_sqr();
            }
        }
    }
    (acc, na.sqrt(), nb.sqrt())
}

#[test]
fn green_pairing_matches_commutator() {
    let m = 0.25;
    let p = PhysicalParams::reduced(m);
    let g = RadialGrid::new(256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let mut draw = || {
            AsymptoticData::from_array(std::array::from_fn(|_| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }))
        };
        let (za, zb) = (draw(), draw());
        let a = synthesize_from_asymptotics(kappa1(), p, g.clone(), &za, 0.8).unwrap();
        let b = synthesize_from_asymptotics(kappa1(), p, g.clone(), &zb, 0.8).unwrap();
        let pairing = green_pairing(&a, &b).unwrap();
        let (comm, na, nb) = commutator_by_quadrature(1.0, m, &za, &zb, 0.8);
        assert!((pairing - comm).norm() < 1e-5 * na * nb, "{pairing} vs {comm}");
        // The Q-matrix form carries the opposite sign with this gamma^5.
        assert!((q_pairing(&za, &zb) + comm).norm() < 1e-8 * na * nb);
    }
}

#[test]
fn heavy_regime_pairing_vanishes() {
    let p = PhysicalParams::reduced(0.75);
    let g = RadialGrid::new(64).unwrap();
    let a = RadialModeState::from_fn(kappa1(), p, g.clone(), |x, s| {
        let v = x.sin() * s.sqrt();
        [C64::new(v, 0.0), I * v, C64::new(0.0, 0.0), C64::new(v, v)]
    });
    assert_eq!(green_pairing(&a, &a).unwrap(), C64::new(0.0, 0.0));
}

#[test]
fn mismatched_modes_are_rejected() {
    let p = PhysicalParams::reduced(0.25);
    let g = RadialGrid::new(32).unwrap();
    let a = RadialModeState::zeros(kappa1(), p, g.clone());
    let b = RadialModeState::zeros(ModeIndex::from_kappa(2).unwrap(), p, g);
    assert!(matches!(green_pairing(&a, &b), Err(adsdirac::Error::Argument(_))));
}
