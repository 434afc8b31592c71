mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use mscale_lab::hermite::{eval_hermite_functions, HermiteBasis};
use mscale_lab::spectral::{
    band_energy, coeff_a, energy, evaluate_spectral, project_initial, Branch, FnSpectrum, Indicator,
    ScaleSpec, SpectralOperator, SpectralState,
};
use mscale_lab::Exec;

fn indicator() -> Indicator {
    Indicator {
        half_width: 5.0,
        value: Complex64::new(1.0, 0.0),
    }
}

#[test]
fn indicator_projection_matches_panel_quadrature() {
    let basis = HermiteBasis::covering(100, 10.0).unwrap();
    let proj = project_initial(&basis, &indicator(), Exec::default()).unwrap();
    // 400 panels of 24 Gauss–Legendre points on [-5, 5]
    let rule = mscale_lab::quadrature::gauss_legendre_rule(24).unwrap();
    let lambda = basis.lambda();
    let oracle: Vec<f64> = mscale_lab::quadrature::integrate_panels(&rule, -5.0, 5.0, 400, |xi| {
        nalgebra::DVector::from_vec(eval_hermite_functions(lambda * xi, 100).unwrap())
    })
    .as_slice()
    .iter()
    .map(|v| v * lambda)
    .collect();
    for k in 0..=100 {
        assert!((proj.state.u_plus[k] - oracle[k]).abs() < 1e-6, "k={k}");
        assert_eq!(proj.state.u_minus[k], 0.0);
    }
}

#[test]
fn coefficient_support_grows_with_scales() {
    let xi: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
    let mut last = (0.0, 0.0);
    for s in 0..=6 {
        let spec = ScaleSpec::pow2(s, 1).unwrap();
        let values: Vec<f64> = xi.iter().map(|&x| coeff_a(&[x], Branch::Minus, &spec)).collect();
        let max = values.iter().cloned().fold(0.0, f64::max);
        let support = 0.01 * values.iter().filter(|&&v| v > 1e-3).count() as f64;
        assert!(max >= last.0 && support >= last.1, "s={s}");
        last = (max, support);
    }
}

#[test]
fn more_scales_drain_the_mid_band_faster() {
    let basis = HermiteBasis::covering(100, 10.0).unwrap();
    let proj = project_initial(&basis, &indicator(), Exec::default()).unwrap();
    let e0 = band_energy(&proj.state, &basis, 2.0, 5.0).unwrap();
    let mut previous = f64::INFINITY;
    for s in [0, 3, 5] {
        let op = SpectralOperator::assemble(basis, &ScaleSpec::pow2(s, 1).unwrap(), Exec::default()).unwrap();
        let stepper = op.stepper(1e-3).unwrap();
        let mut st = proj.state.clone();
        for _ in 0..200 {
            st = stepper.step(&st);
        }
        let frac = band_energy(&st, &basis, 2.0, 5.0).unwrap() / e0;
        assert!(frac < previous, "s={s}: {frac} !< {previous}");
        previous = frac;
    }
}

#[test]
fn synthesis_matches_basis() {
    // at λ = √2 both parts are single basis functions
    let basis = HermiteBasis::new(30, std::f64::consts::SQRT_2).unwrap();
    let f = FnSpectrum(|xi: f64| Complex64::new((-xi * xi).exp(), xi * (-xi * xi).exp()));
    let proj = project_initial(&basis, &f, Exec::Sequential).unwrap();
    assert!(!proj.resolution_warning);
    let grid = [-2.0, -0.5, 0.0, 0.7, 3.0];
    let prof = evaluate_spectral(&proj.state, &basis, &grid, Exec::Sequential);
    for (i, &xi) in grid.iter().enumerate() {
        assert!((prof.real[i] - basis.synthesize(proj.state.u_plus.as_slice(), xi)).abs() < 1e-14);
        assert!((prof.real[i] - (-xi * xi).exp()).abs() < 1e-10);
        assert!((prof.imag[i] - xi * (-xi * xi).exp()).abs() < 1e-10);
    }
}

#[test]
fn under_resolved_projection_warns() {
    let basis = HermiteBasis::new(10, 1.0).unwrap();
    let proj = project_initial(&basis, &indicator(), Exec::Sequential).unwrap();
    assert!(proj.resolution_warning);
}

#[test]
fn zero_initial_data_stays_zero() {
    let basis = HermiteBasis::new(40, 1.2).unwrap();
    let op = SpectralOperator::assemble(basis, &ScaleSpec::pow2(3, 1).unwrap(), Exec::Sequential).unwrap();
    let stepper = op.stepper(1e-2).unwrap();
    let mut st = SpectralState::zeros(&basis);
    for _ in 0..50 {
        st = stepper.step(&st);
    }
    assert_eq!(energy(&st), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_never_increases(
        s in 0usize..6,
        log_dt in -4.0f64..0.0,
        seed_coeffs in proptest::collection::vec(-1.0f64..1.0, 62),
    ) {
        let basis = HermiteBasis::new(30, 1.3).unwrap();
        let op = SpectralOperator::assemble(basis, &ScaleSpec::pow2(s, 1).unwrap(), Exec::Sequential).unwrap();
        let stepper = op.stepper(10f64.powf(log_dt)).unwrap();
        let mut st = SpectralState::zeros(&basis);
        for k in 0..31 {
            st.u_plus[k] = seed_coeffs[k];
            st.u_minus[k] = seed_coeffs[31 + k];
        }
        let mut e = energy(&st);
        for _ in 0..40 {
            st = stepper.step(&st);
            let next = energy(&st);
            prop_assert!(next <= e * (1.0 + 1e-13));
            e = next;
        }
    }
}
