#![allow(dead_code)]

use std::sync::Arc;

use multibump_core::prelude::*;
use multibump_core::weights::PowerFactor;

pub struct Setup {
    pub grid: Grid,
    pub field: WeightField,
    pub zero: ZeroSet,
    pub decomposition: Decomposition,
}

pub fn setup(domain: &DomainSpec, weight: &WeightSpec, n: usize) -> Setup {
    let grid = build_grid(domain, n).unwrap();
    let field = evaluate_weight(weight, &grid).unwrap();
    let zero = detect_zero_set(&field, &grid, field.eps_zero());
    let decomposition = decompose_components(&grid, &zero).unwrap();
    Setup { grid, field, zero, decomposition }
}

pub fn one() -> WeightSpec {
    WeightSpec::Constant { value: 1.0 }
}

pub fn sphere(center: &[f64], radius: f64, power: f64) -> PowerFactor {
    PowerFactor::Sphere { center: center.to_vec(), radius, power }
}

/// Three nested zero circles in the disk of radius 2.
pub fn rings() -> (DomainSpec, WeightSpec) {
    let o = [0.0, 0.0];
    let weight = WeightSpec::ProductOfPowers {
        scale: 0.5,
        factors: vec![sphere(&o, 0.5, 0.5), sphere(&o, 1.0, 0.5), sphere(&o, 1.5, 0.5)],
    };
    (DomainSpec::ball(o.to_vec(), 2.0), weight)
}

/// Disk of radius 2 with a hole, cut by three zero circles.
pub fn holed_disk() -> (DomainSpec, WeightSpec) {
    let level = Arc::new(|x: &[f64]| {
        let outer = (x[0] * x[0] + x[1] * x[1]).sqrt() - 2.0;
        let hole = 0.2 - ((x[0] + 0.9).powi(2) + x[1] * x[1]).sqrt();
        outer.max(hole)
    });
    let domain = DomainSpec::Implicit {
        lower: vec![-2.0, -2.0],
        upper: vec![2.0, 2.0],
        level,
        description: "disk of radius 2 minus a disk of radius 0.2 at (-0.9, 0)".into(),
    };
    let weight = WeightSpec::ProductOfPowers {
        scale: 1.0,
        factors: vec![sphere(&[-0.5, 0.0], 1.0, 0.5), sphere(&[-0.2, 0.0], 0.3, 0.5), sphere(&[1.2, 0.0], 0.4, 0.5)],
    };
    (domain, weight)
}

pub fn solve_all(s: &Setup, spec: &NonlinearitySpec) -> Vec<BumpSolution> {
    let trunc = truncate_nonlinearity(spec).unwrap();
    s.decomposition
        .components
        .iter()
        .map(|c| {
            let eig = dirichlet_lambda1(c, &s.grid, &EigenOptions::default()).unwrap();
            let f2 = check_hypothesis_f2(c, &s.field, eig.lambda1, spec.gamma);
            let energy = assemble_energy(c, &s.field, &trunc, &s.grid);
            minimize_energy(&energy, &eig, &f2, &s.grid, &SolverOptions::default()).unwrap()
        })
        .collect()
}
