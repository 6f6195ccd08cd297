mod common;

use common::*;
use multibump_core::prelude::*;
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn gradient_matches_central_differences() {
    let s = setup(&DomainSpec::ball(vec![0.0, 0.0], 2.0), &WeightSpec::cusp_radial(2), 65);
    let spec = NonlinearitySpec::logistic(10.0, 1.0);
    let trunc = truncate_nonlinearity(&spec).unwrap();
    let c = s.decomposition.components.iter().max_by_key(|c| c.len()).unwrap();
    let energy = assemble_energy(c, &s.field, &trunc, &s.grid);
    assert!(energy.len() >= 500);
    let mut rng = StdRng::seed_from_u64(7);
    let delta = 1e-6 * spec.s_star;
    for _ in 0..10 {
        let u: Vec<f64> = (0..energy.len())
            .map(|_| -spec.beta_star + rng.random::<f64>() * (spec.s_star + 1.0 + spec.beta_star))
            .collect();
        let v: Vec<f64> = (0..energy.len()).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut g = vec![0.0; energy.len()];
        energy.gradient(&u, &mut g);
        let shift = |t: f64| -> Vec<f64> { u.iter().zip(&v).map(|(a, b)| a + t * b).collect() };
        let fd = (energy.value(&shift(delta)) - energy.value(&shift(-delta))) / (2.0 * delta);
        let exact: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((fd - exact).abs() / exact.abs() < 1e-5, "fd {fd} exact {exact}");
    }
}

#[test]
fn energy_vanishes_at_zero_and_is_coercive() {
    let s = setup(&DomainSpec::unit_box(2), &one(), 33);
    let spec = NonlinearitySpec::logistic(30.0, 1.0);
    let trunc = truncate_nonlinearity(&spec).unwrap();
    let c = &s.decomposition.components[0];
    let energy = assemble_energy(c, &s.field, &trunc, &s.grid);
    let zero = vec![0.0; energy.len()];
    assert_eq!(energy.value(&zero), 0.0);
    let mut g = vec![1.0; energy.len()];
    energy.gradient(&zero, &mut g);
    assert!(g.iter().all(|&x| x == 0.0));
    let eig = dirichlet_lambda1(c, &s.grid, &EigenOptions::default()).unwrap();
    let big: Vec<f64> = eig.e1.iter().map(|e| 1e3 * spec.s_star * e).collect();
    assert!(energy.value(&big) > 0.0);
    let small: Vec<f64> = eig.e1.iter().map(|e| 1e-3 * e).collect();
    assert!(energy.value(&small) < 0.0);
}

/// Damped fixed-point iteration `u <- (1 - t) u + t K^{-1} (h^2 f*(u))` with a
/// dense factorization of the five-point matrix.
fn fixed_point_oracle(m: usize, h: f64, gamma: f64, s_star: f64) -> Vec<f64> {
    let n = m * m;
    let mut k = DMatrix::zeros(n, n);
    for j in 0..m {
        for i in 0..m {
            let p = j * m + i;
            k[(p, p)] = 4.0;
            if i > 0 {
                k[(p, p - 1)] = -1.0;
            }
            if i + 1 < m {
                k[(p, p + 1)] = -1.0;
            }
            if j > 0 {
                k[(p, p - m)] = -1.0;
            }
            if j + 1 < m {
                k[(p, p + m)] = -1.0;
            }
        }
    }
    let chol = k.cholesky().unwrap();
    let f = |s: f64| if s >= s_star { 0.0 } else { gamma * s.abs() * (1.0 - s / s_star) };
    let mut u = DVector::from_element(n, 0.5 * s_star);
    for _ in 0..20_000 {
        let rhs = u.map(|s| h * h * f(s));
        let next = 0.5 * &u + 0.5 * chol.solve(&rhs);
        let change = (&next - &u).amax();
        u = next;
        if change < 1e-15 {
            break;
        }
    }
    u.as_slice().to_vec()
}

#[test]
fn minimizer_matches_fixed_point_oracle() {
    let s = setup(&DomainSpec::unit_box(2), &one(), 33);
    let spec = NonlinearitySpec::logistic(30.0, 1.0);
    let bump = solve_all(&s, &spec).remove(0);
    assert!(bump.energy < 0.0);
    assert!(bump.min_u >= -1e-8 && bump.max_u <= 1.0 + 1e-8 && bump.max_u > 0.0);
    let oracle = fixed_point_oracle(31, s.grid.spacing(), 30.0, 1.0);
    // interior nodes of the unit box are scanned in the same order as the oracle
    let diff = bump.values.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-4, "{diff}");
}

#[test]
fn refuses_to_seed_when_the_slope_gate_fails() {
    let s = setup(&DomainSpec::unit_box(2), &one(), 33);
    let spec = NonlinearitySpec::logistic(10.0, 1.0);
    let trunc = truncate_nonlinearity(&spec).unwrap();
    let c = &s.decomposition.components[0];
    let eig = dirichlet_lambda1(c, &s.grid, &EigenOptions::default()).unwrap();
    let f2 = check_hypothesis_f2(c, &s.field, eig.lambda1, spec.gamma);
    assert!(!f2.verdict);
    let energy = assemble_energy(c, &s.field, &trunc, &s.grid);
    let err = minimize_energy(&energy, &eig, &f2, &s.grid, &SolverOptions::default()).unwrap_err();
    assert_eq!(err.hypothesis(), Some(Hypothesis::F2));
}

#[test]
fn joint_scaling_of_weight_and_nonlinearity() {
    let domain = DomainSpec::ball(vec![0.0, 0.0], 2.0);
    let weight = WeightSpec::cusp_radial(2);
    let spec = NonlinearitySpec::logistic(10.0, 1.0);
    let base = solve_all(&setup(&domain, &weight, 65), &spec);
    let scaled = solve_all(&setup(&domain, &weight.scaled(2.0), 65), &spec.scaled(2.0));
    for (a, b) in base.iter().zip(&scaled) {
        let diff = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-8, "{diff}");
        assert!((b.energy - 2.0 * a.energy).abs() <= 1e-10 * a.energy.abs());
    }
}
