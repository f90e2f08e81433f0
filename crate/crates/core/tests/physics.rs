use std::f64::consts::PI;

use lambda_memory::control::{ControlEnvelope, GaussianControl};
use lambda_memory::dynamics::{
    absorption_sanity, check_convergence, efficiency, lorentzian_filter_transmission, simulate_storage,
    MemoryParams, SolverConfig,
};
use proptest::prelude::*;

fn fast() -> SolverConfig {
    SolverConfig::new(60, 4e-3, (-3.0, 6.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn efficiency_bounded_and_energy_conserved(
        ld in 0.0f64..2.0,
        lg in -2.0f64..0.5,
        theta in 0.1f64..(8.0 * PI),
        delay in -2.0f64..3.0,
        fwhm in 0.2f64..3.0,
    ) {
        let m = MemoryParams::new(10f64.powf(ld), 10f64.powf(lg)).unwrap();
        let ctrl: ControlEnvelope = GaussianControl::new(theta, delay, fwhm).unwrap().into();
        let out = simulate_storage(m, &ctrl, &fast().refined_for(&ctrl)).unwrap();
        let eta = out.efficiency();
        prop_assert!((0.0..=1.0).contains(&eta));
        let total = (out.stored_energy + out.transmitted_energy + out.polarization_energy) / out.input_energy;
        prop_assert!(total <= 1.0 + 1e-3, "energy budget {}", total);
    }

    #[test]
    fn zero_control_never_stores(ld in 0.0f64..2.0, lg in -2.0f64..0.5) {
        let m = MemoryParams::new(10f64.powf(ld), 10f64.powf(lg)).unwrap();
        prop_assert!(efficiency(m, &ControlEnvelope::Zero, &fast()).unwrap() < 1e-10);
    }

    #[test]
    fn zero_depth_never_stores(lg in -2.0f64..0.5, theta in 0.1f64..(8.0 * PI)) {
        let m = MemoryParams::new(0.0, 10f64.powf(lg)).unwrap();
        let ctrl = GaussianControl::new(theta, 0.0, 1.0).unwrap().into();
        prop_assert!(efficiency(m, &ctrl, &fast()).unwrap() < 1e-10);
    }
}

#[test]
fn empty_medium_transmits_everything() {
    let m = MemoryParams::new(0.0, 0.5).unwrap();
    assert!((absorption_sanity(m, &SolverConfig::default()).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn transmission_matches_spectral_oracle() {
    for d in [1.0, 10.0, 50.0] {
        for g in [0.01, 0.1, 1.5] {
            let m = MemoryParams::new(d, g).unwrap();
            let sim = absorption_sanity(m, &SolverConfig::default()).unwrap();
            let oracle = lorentzian_filter_transmission(m);
            assert!((sim - oracle).abs() < 1e-3, "d={d} g={g}: {sim} vs {oracle}");
        }
    }
}

#[test]
fn transparent_for_narrow_lines() {
    let m = MemoryParams::new(50.0, 0.01).unwrap();
    let t = absorption_sanity(m, &SolverConfig::default()).unwrap();
    assert!(t > 0.3, "{t}");
    assert!((t - lorentzian_filter_transmission(m)).abs() < 1e-3);
}

#[test]
fn default_resolution_is_converged() {
    let m = MemoryParams::new(50.0, 1.5).unwrap();
    let ctrl = GaussianControl::new(8.0 * PI, -0.365, 1.64).unwrap().into();
    assert!(check_convergence(m, &ctrl, &SolverConfig::default()).unwrap().delta < 1e-3);
    let zero = MemoryParams::new(0.0, 1.5).unwrap();
    assert!(check_convergence(zero, &ctrl, &SolverConfig::default()).unwrap().delta < 1e-12);
    assert!(check_convergence(m, &ControlEnvelope::Zero, &SolverConfig::default()).unwrap().delta < 1e-10);
}
