use noisemix::coeffs::{solve_coefficient, CoefficientKind, TimeGrid};
use noisemix::dynamics::{fidelity_lambda, fidelity_qubit, propagate_lambda, propagate_qubit, DensityMatrix, PureState};
use noisemix::kernels::{KernelSpec, OuParams};
use noisemix::Cx;

fn kernels() -> Vec<KernelSpec<f64>> {
    let beta = OuParams::new(1.0, 0.1).unwrap();
    vec![
        KernelSpec::Ou(beta),
        KernelSpec::MarkovDephasedOu { beta, dephasing_strength: 4.0 },
        KernelSpec::Composite { beta: OuParams::new(1.0, 0.3).unwrap(), alpha: OuParams::new(1.0, 0.1).unwrap() },
    ]
}

#[test]
fn qubit_closed_form_matches_master_equation() {
    let grid = TimeGrid::with_horizon(1e-3, 8.0).unwrap();
    for kernel in kernels() {
        let f = solve_coefficient(&kernel, 1.0, grid, CoefficientKind::TwoLevelF).unwrap();
        for (theta, phi) in [(0.3, 0.0), (1.2, 2.0), (2.9, -1.0)] {
            let psi = PureState::bloch(theta, phi);
            let closed = fidelity_qubit(psi.upper_population(), &f).unwrap();
            let rho = propagate_qubit(&f, &DensityMatrix::from_pure(&psi), 1.0).unwrap();
            for (n, state) in rho.states.iter().enumerate() {
                let reference = psi.free_evolved(1.0, grid.time(n));
                let diff = (state.expectation(&reference) - closed.values[n]).abs();
                assert!(diff <= 1e-6, "{}: diff {diff} at t = {}", kernel.name(), grid.time(n));
            }
            assert!(rho.max_trace_drift() <= 1e-9);
            assert!(rho.max_hermiticity_deviation() <= 1e-9);
        }
    }
}

#[test]
fn lambda_closed_form_matches_master_equation() {
    let grid = TimeGrid::with_horizon(1e-3, 8.0).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = PureState::lambda(Cx::new(h, 0.0), Cx::new(0.0, h), Cx::new(0.0, 0.0)).unwrap();
    for kernel in kernels() {
        let q = solve_coefficient(&kernel, 1.0, grid, CoefficientKind::ThreeLevelQ).unwrap();
        let closed = fidelity_lambda(&psi, &q).unwrap();
        let rho = propagate_lambda(&q, &DensityMatrix::from_pure(&psi)).unwrap();
        let sup = rho
            .states
            .iter()
            .zip(&closed.values)
            .map(|(s, c)| (s.expectation(&psi) - c).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 1e-6, "{}: {sup}", kernel.name());
    }
}
