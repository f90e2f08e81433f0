use std::f64::consts::PI;

use lambda_memory::control::{
    chebyshev_knots, overlap_fidelity, overlap_fidelity_with, pulse_area, ControlEnvelope, GaussianControl,
    SplineControl,
};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chebyshev_knots_symmetric_and_ascending(n in 2usize..200, a in -5.0f64..0.0, w in 0.1f64..10.0) {
        let b = a + w;
        let k = chebyshev_knots(n, (a, b)).unwrap();
        prop_assert_eq!(k.len(), n);
        prop_assert_eq!((k[0], k[n - 1]), (a, b));
        prop_assert!(k.windows(2).all(|p| p[0] < p[1]));
        let mid = 0.5 * (a + b);
        for i in 0..n {
            prop_assert!(((k[i] - mid) + (k[n - 1 - i] - mid)).abs() < 1e-12 * (1.0 + w));
        }
    }

    #[test]
    fn spline_interpolates_and_stays_non_negative(values in prop::collection::vec(0.0f64..10.0, 4..40)) {
        let knots = chebyshev_knots(values.len(), (-2.0, 6.0)).unwrap();
        let s = SplineControl::new(knots.clone(), values.clone()).unwrap();
        for (t, v) in knots.iter().zip(&values) {
            prop_assert!((s.rabi(*t) - v).abs() < 1e-12);
        }
        for k in 0..=400 {
            prop_assert!(s.rabi(-2.5 + 9.0 * k as f64 / 400.0) >= 0.0);
        }
        prop_assert_eq!(s.rabi(-2.0001), 0.0);
        prop_assert_eq!(s.rabi(6.0001), 0.0);
    }

    #[test]
    fn gaussian_area_round_trip(theta in 0.01f64..(10.0 * PI), fwhm in 0.05f64..3.0, delay in -2.0f64..3.0) {
        let c = GaussianControl::new(theta, delay, fwhm).unwrap();
        let area = pulse_area(&c.into(), (-50.0, 50.0));
        prop_assert!((area - theta).abs() < 1e-6 * theta.max(1.0));
    }

    #[test]
    fn fidelity_symmetric_and_scale_invariant(
        t1 in 0.5f64..20.0, d1 in -1.0f64..2.0, w1 in 0.2f64..3.0,
        t2 in 0.5f64..20.0, d2 in -1.0f64..2.0, w2 in 0.2f64..3.0,
        re in -3.0f64..3.0, im in -3.0f64..3.0,
    ) {
        prop_assume!(re.abs() + im.abs() > 0.1);
        let c1: ControlEnvelope = GaussianControl::new(t1, d1, w1).unwrap().into();
        let c2: ControlEnvelope = GaussianControl::new(t2, d2, w2).unwrap().into();
        let f12 = overlap_fidelity(&c1, &c2).unwrap();
        let f21 = overlap_fidelity(&c2, &c1).unwrap();
        prop_assert!((f12 - f21).abs() < 1e-10);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f12));
        let k = Complex64::new(re, im);
        let mut breaks: Vec<f64> = [-40.0, 40.0, d1, d2].into();
        breaks.sort_by(f64::total_cmp);
        let scaled = overlap_fidelity_with(
            |t| k * Complex64::new(c1.rabi(t), 0.0),
            |t| Complex64::new(c2.rabi(t), 0.0),
            &breaks,
        ).unwrap();
        prop_assert!((scaled - f12).abs() < 1e-10);
    }
}

#[test]
fn offset_gaussians_have_analytic_fidelity() {
    // Equal-width pulses exp(-τ²/σ²) offset by δ: F = |⟨a|b⟩|²/(‖a‖²‖b‖²) = exp(-δ²/σ²).
    for (delta, fwhm) in [(0.3, 1.0), (1.0, 0.5), (0.05, 2.0), (2.0, 3.0)] {
        let a = GaussianControl::new(PI, 0.0, fwhm).unwrap();
        let b = GaussianControl::new(2.0 * PI, delta, fwhm).unwrap();
        let s = a.sigma();
        let expected = (-delta * delta / (s * s)).exp();
        let f = overlap_fidelity(&a.into(), &b.into()).unwrap();
        assert!((f - expected).abs() < 1e-6, "δ={delta}: {f} vs {expected}");
    }
}
