mod common;

use common::*;
use landweber::solver::{inertial_landweber_step, landweber_step};
use landweber::{convergence_bound, run, CVector, Complex64, InertialSchedule, LinearOperator, SolverConfig, SpectralBounds};
use rand::Rng;

fn exact_bounds_oracle(h: &nalgebra::DMatrix<Complex64>, omega: f64) -> SpectralBounds {
    let eig = gram_eigenvalues(h);
    SpectralBounds::user(omega * eig[0], omega * eig[eig.len() - 1]).unwrap()
}

#[test]
fn scalar_hand_values() {
    let op = LinearOperator::diagonal(&[2.0]);
    let y = CVector::from_real(&[4.0]);
    let x = CVector::zeros(1);
    assert!((landweber_step(&op, &y, &x, 0.1).unwrap()[0].re - 0.8).abs() < 1e-15);
    assert!((inertial_landweber_step(&op, &y, &x, 0.1, 2.0).unwrap()[0].re - 1.6).abs() < 1e-15);
}

#[test]
fn unit_factor_reproduces_plain_step_bit_for_bit() {
    let mut r = rng(31);
    for _ in 0..100 {
        let (m, n) = (r.random_range(1..10), r.random_range(1..10));
        let op = LinearOperator::dense(random_matrix(&mut r, m, n)).unwrap();
        let y = CVector::new(random_vec(&mut r, m));
        let x = CVector::new(random_vec(&mut r, n));
        let w = r.random_range(0.01..0.5);
        assert_eq!(
            landweber_step(&op, &y, &x, w).unwrap(),
            inertial_landweber_step(&op, &y, &x, w, 1.0).unwrap()
        );
    }
}

#[test]
fn constant_schedule_reproduces_plain_trajectory() {
    let mut r = rng(32);
    let h = random_matrix(&mut r, 12, 8);
    let op = LinearOperator::dense(h).unwrap();
    let y = CVector::new(random_vec(&mut r, 12));
    let w = 0.02;
    let sched = InertialSchedule::constant(1.0);
    let out = run(&SolverConfig::new(&op, &y, w, &sched).max_iter(40)).unwrap();
    let mut x = CVector::zeros(8);
    for _ in 0..40 {
        x = landweber_step(&op, &y, &x, w).unwrap();
    }
    assert_eq!(out.final_iterate, x);
}

#[test]
fn least_squares_solution_is_a_fixed_point() {
    let mut r = rng(33);
    for _ in 0..10 {
        let n = r.random_range(2..10);
        let h = random_matrix(&mut r, n + 4, n);
        let y = random_vec(&mut r, n + 4);
        let xs = CVector::new(least_squares(&h, &y));
        let omega = 1.0 / gram_eigenvalues(&h)[n - 1];
        let bounds = exact_bounds_oracle(&h, omega);
        let op = LinearOperator::dense(h).unwrap();
        let y = CVector::new(y);
        for sched in [InertialSchedule::constant(1.0), InertialSchedule::chebyshev(&bounds, 8).unwrap()] {
            let out = run(&SolverConfig::new(&op, &y, omega, &sched)
                .max_iter(50)
                .initial(xs.clone())
                .reference(&xs)
                .record_every(1))
            .unwrap();
            for h in &out.history {
                assert!(h.error_norm.unwrap() <= 1e-9 * xs.norm().max(1.0), "k = {}: {:e}", h.k, h.error_norm.unwrap());
            }
        }
    }
}

#[test]
fn end_of_period_errors_obey_contraction_bound() {
    let mut r = rng(34);
    for _ in 0..20 {
        let n = 8;
        let h = random_matrix(&mut r, n, n);
        let y = random_vec(&mut r, n);
        let xs = CVector::new(gauss_solve(&h, &y));
        let omega = 1.0 / gram_eigenvalues(&h)[n - 1];
        let bounds = exact_bounds_oracle(&h, omega);
        let op = LinearOperator::dense(h).unwrap();
        let y = CVector::new(y);
        for t in [2usize, 4, 8] {
            let sched = InertialSchedule::chebyshev(&bounds, t).unwrap();
            let u = convergence_bound(&bounds, t).unwrap().value;
            let out = run(&SolverConfig::new(&op, &y, omega, &sched)
                .max_iter(5 * t)
                .initial(CVector::zeros(n))
                .reference(&xs)
                .record_every(1))
            .unwrap();
            let e0 = out.history[0].error_norm.unwrap();
            let mut prev = e0;
            for l in 1..=5 {
                let e = out.history[l * t].error_norm.unwrap();
                assert!(e <= u.powi(l as i32) * e0 * (1.0 + 1e-6), "T = {t}, ℓ = {l}");
                assert!(e <= prev * (1.0 + 1e-9), "end-of-period error increased");
                prev = e;
            }
        }
    }
}

#[test]
fn identity_operator_is_solved_in_one_step() {
    let y = CVector::new(vec![Complex64::new(1.0, -1.0), Complex64::new(0.5, 2.0)]);
    let op = LinearOperator::identity(2);
    let sched = InertialSchedule::constant(1.0);
    let out = run(&SolverConfig::new(&op, &y, 1.0, &sched).max_iter(1).initial(CVector::zeros(2))).unwrap();
    assert_eq!(out.final_iterate, y);
    assert_eq!(out.history.last().unwrap().residual_norm, 0.0);
}

#[test]
fn oversized_step_is_reported_as_divergence() {
    let op = LinearOperator::diagonal(&[3.0, 1.0]);
    let y = CVector::from_real(&[1.0, 1.0]);
    let sched = InertialSchedule::constant(1.0);
    let err = run(&SolverConfig::new(&op, &y, 1.0, &sched).max_iter(5000)).unwrap_err();
    assert!(matches!(err, landweber::Error::Diverged { .. }));
}
