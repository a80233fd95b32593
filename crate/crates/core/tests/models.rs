use std::f64::consts::PI;

use num_complex::Complex64;
use qtomo_core::hamiltonian_dynamics::*;
use qtomo_core::model_library::*;
use qtomo_core::tomography::{coherent_tomogram, xi_matrix, TomogramFrame};
use qtomo_core::{constant_fn, scalar_fn, CVector, Error, ScalarFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn modulated() -> ParametricOscillator {
    ParametricOscillator::new(
        1.2,
        scalar_fn(|t| 1.0 + 0.1 * t.sin()),
        scalar_fn(|t| 0.3 * (1.5 * t).cos()),
        0.9,
    )
    .unwrap()
}

#[test]
fn oscillator_parts_agree_with_generic_pipeline() {
    let sys = modulated();
    let frame = sys.frame();
    let h = sys.hamiltonian().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut times: Vec<f64> = (0..100).map(|_| rng.gen_range(0.0..3.0)).collect();
    times.sort_by(f64::total_cmp);
    let opts = PropagationOptions::with_dt(1e-3);
    let generic = evolve_modes(&h, &frame, &times, opts).unwrap();
    let special = oscillator_states(&sys, &times, opts).unwrap();
    for (g, s) in generic.samples.iter().zip(&special) {
        let (mu, nu) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let tf = TomogramFrame::new(vec![mu], vec![nu]).unwrap();
        let parts = oscillator_tomogram_parts(&sys, g.invariants.t, &tf, opts).unwrap();
        let xi = xi_matrix(&g.invariants, &tf).unwrap().xi[(0, 0)];
        assert!((parts.xi - xi).norm() < 1e-9);
        assert!((parts.sigma - 0.81 * xi.norm_sqr()).abs() < 1e-9);
        let alpha = CVector::from_element(1, Complex64::new(0.3, -0.2));
        let gt = coherent_tomogram(&g.invariants, &tf, &alpha).unwrap();
        assert!((parts.x0(alpha[0]) - gt.x0[0]).abs() < 1e-9);
        assert!((s.invariants.lambda_p[(0, 0)] - g.invariants.lambda_p[(0, 0)]).norm() < 1e-9);
        assert!((s.invariants.lambda_x[(0, 0)] - g.invariants.lambda_x[(0, 0)]).norm() < 1e-9);
        assert!((s.invariants.delta[0] - g.invariants.delta[0]).norm() < 1e-9);
        assert!((s.phase_integral - g.phase_integral).abs() < 1e-9);
        assert!((s.sqrt_det_ratio - g.sqrt_det_ratio).norm() < 1e-9);
    }
}

#[test]
fn oscillator_sigma_at_specific_point() {
    let sys = ParametricOscillator::new(1.0, scalar_fn(|t| 1.0 + 0.1 * t.sin()), constant_fn(0.0), 1.0).unwrap();
    let tf = TomogramFrame::new(vec![0.5], vec![0.5]).unwrap();
    let opts = PropagationOptions::with_dt(1e-3);
    let parts = oscillator_tomogram_parts(&sys, 1.3, &tf, opts).unwrap();
    let inv = oscillator_invariants(&sys, 1.3, opts).unwrap();
    let xi = xi_matrix(&inv, &tf).unwrap().xi[(0, 0)];
    assert!((parts.sigma - xi.norm_sqr()).abs() < 1e-12);
}

#[test]
fn harmonic_sigma_closed_form_and_period() {
    let (m, w, hb) = (0.8, 1.7, 1.3);
    let sys = ParametricOscillator::harmonic(m, w, hb).unwrap();
    let opts = PropagationOptions::default();
    for (mu, nu) in [(1.0, 0.0), (0.3, -0.8), (0.0, 1.0)] {
        let tf = TomogramFrame::new(vec![mu], vec![nu]).unwrap();
        let at0 = oscillator_tomogram_parts(&sys, 0.0, &tf, opts).unwrap().sigma;
        assert!((at0 - hb / (2.0 * m * w) * (mu * mu + m * m * w * w * nu * nu)).abs() < 1e-14);
        for t in [0.4, 1.9] {
            let a = oscillator_tomogram_parts(&sys, t, &tf, opts).unwrap().sigma;
            let b = oscillator_tomogram_parts(&sys, t + 2.0 * PI / w, &tf, opts)
                .unwrap()
                .sigma;
            assert!((a - b).abs() < 1e-13);
        }
    }
}

#[test]
fn wronskian_is_conserved() {
    let sys = modulated();
    for t in [0.5, 2.0, 6.0] {
        let e = oscillator_epsilon(&sys, t, PropagationOptions::with_dt(1e-3)).unwrap();
        assert!((e.wronskian() - 1.0).abs() < 1e-9, "t = {t}");
    }
}

#[test]
fn nonpositive_frequency_is_rejected() {
    let sys = ParametricOscillator::new(1.0, scalar_fn(|t| 1.0 - t), constant_fn(0.0), 1.0).unwrap();
    assert!(matches!(
        oscillator_invariants(&sys, 2.0, PropagationOptions::with_dt(1e-2)),
        Err(Error::InvalidParameter(_))
    ));
    assert!(ParametricOscillator::harmonic(-1.0, 1.0, 1.0).is_err());
}

fn squeezed(field: ScalarFn) -> ChargedParticle {
    // a_p = i e^{r}/√2, a_x = e^{−r}/√2
    let r = 0.4f64;
    let s = 0.5f64.sqrt();
    ChargedParticle::new(1.5, field, 1.0, I * s * r.exp(), Complex64::new(s * (-r).exp(), 0.0)).unwrap()
}

#[test]
fn particle_matches_generic_propagation() {
    let fields: [ScalarFn; 3] = [constant_fn(0.0), constant_fn(1.0), scalar_fn(f64::sin)];
    let times: Vec<f64> = (0..=8).map(|k| 0.25 * k as f64).collect();
    for field in fields {
        let sys = squeezed(field);
        let frame = sys.frame();
        let generic = evolve_modes(
            &sys.hamiltonian().unwrap(),
            &frame,
            &times,
            PropagationOptions::with_dt(1e-3),
        )
        .unwrap();
        for g in &generic.samples {
            let s = particle_state(&sys, g.invariants.t).unwrap();
            assert!((s.invariants.lambda_p[(0, 0)] - g.invariants.lambda_p[(0, 0)]).norm() < 1e-9);
            assert!((s.invariants.lambda_x[(0, 0)] - g.invariants.lambda_x[(0, 0)]).norm() < 1e-9);
            assert!((s.invariants.delta[0] - g.invariants.delta[0]).norm() < 1e-9);
            assert!((s.phase_integral - g.phase_integral).abs() < 1e-9);
            assert!((s.sqrt_det_ratio - g.sqrt_det_ratio).norm() < 1e-9);
        }
    }
}

#[test]
fn particle_parts_agree_with_generic_pipeline() {
    let sys = squeezed(scalar_fn(|t| (2.0 * t).cos()));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let t = rng.gen_range(0.0..3.0);
        let tf = TomogramFrame::new(vec![rng.gen_range(-2.0..2.0)], vec![rng.gen_range(-2.0..2.0)]).unwrap();
        let parts = particle_tomogram_parts(&sys, t, &tf).unwrap();
        let inv = particle_invariants(&sys, t).unwrap();
        let xi = xi_matrix(&inv, &tf).unwrap().xi[(0, 0)];
        assert!((parts.xi - xi).norm() < 1e-12);
        let alpha = CVector::from_element(1, Complex64::new(-0.4, 0.7));
        let g = coherent_tomogram(&inv, &tf, &alpha).unwrap();
        assert!((parts.sigma - g.sigma[(0, 0)]).abs() < 1e-12 * parts.sigma.max(1.0));
        assert!((parts.x0(alpha[0]) - g.x0[0]).abs() < 1e-12 * g.x0[0].abs().max(1.0));
    }
}

#[test]
fn free_particle_spreads_quadratically() {
    let sys = squeezed(constant_fn(0.0));
    let tf = TomogramFrame::position(1);
    let s = 0.5f64.sqrt();
    let (a_p, a_x) = (I * s * 0.4f64.exp(), s * (-0.4f64).exp());
    for t in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let sigma = particle_tomogram_parts(&sys, t, &tf).unwrap().sigma;
        let expect = (a_p - a_x * t / 1.5).norm_sqr();
        assert!((sigma - expect).abs() <= 1e-10 * expect);
    }
}

#[test]
fn particle_at_time_zero_is_the_frame() {
    let sys = squeezed(scalar_fn(f64::cos));
    let inv = particle_invariants(&sys, 0.0).unwrap();
    assert!(check_symplectic_properties(&inv).max_residual() < 1e-14);
    assert_eq!(inv.delta[0], Complex64::new(0.0, 0.0));
}
