mod common;

use common::*;
use multibump_core::prelude::*;
use multibump_core::weights::PowerFactor;

#[test]
fn cusp_weight_on_disk_of_radius_two() {
    let s = setup(&DomainSpec::ball(vec![0.0, 0.0], 2.0), &WeightSpec::cusp_radial(2), 129);
    let d = &s.decomposition;
    assert_eq!(d.chi, 2);
    assert_eq!(d.j_counts.get(&1), Some(&1));
    assert_eq!(d.j_counts.get(&2), Some(&1));
}

#[test]
fn holed_disk_with_three_circles() {
    let (domain, weight) = holed_disk();
    let s = setup(&domain, &weight, 129);
    let d = &s.decomposition;
    assert_eq!(d.chi, 4);
    assert_eq!(d.j_counts.get(&1), Some(&2));
    assert_eq!(d.j_counts.get(&2), None);
    assert_eq!(d.j_counts.get(&3), Some(&2));
}

#[test]
fn nested_rings_give_four_components() {
    let (domain, weight) = rings();
    let s = setup(&domain, &weight, 129);
    assert_eq!(s.decomposition.chi, 4);
    assert_eq!(s.decomposition.j_counts.get(&1), Some(&1));
    assert_eq!(s.decomposition.j_counts.get(&2), Some(&3));
}

#[test]
fn decomposition_partitions_free_nodes() {
    let (domain, weight) = holed_disk();
    let s = setup(&domain, &weight, 65);
    let mut owner = vec![0usize; s.grid.len()];
    for c in &s.decomposition.components {
        assert!(!c.shell.is_empty());
        for &p in &c.nodes {
            owner[p] += 1;
        }
    }
    for p in 0..s.grid.len() {
        let free = s.grid.class(p) == NodeClass::Interior && !s.zero.contains(p);
        assert_eq!(owner[p], usize::from(free), "node {p}");
    }
    let total: usize = s.decomposition.j_counts.values().sum();
    assert_eq!(total, s.decomposition.chi);
}

#[test]
fn ids_are_stable_across_runs() {
    let (domain, weight) = holed_disk();
    let a = setup(&domain, &weight, 65).decomposition;
    let b = setup(&domain, &weight, 65).decomposition;
    assert_eq!(a, b);
}

#[test]
fn segment_zero_set_reaching_the_boundary_is_rejected() {
    let grid = build_grid(&DomainSpec::unit_box(2), 65).unwrap();
    let weight = WeightSpec::ProductOfPowers {
        scale: 1.0,
        factors: vec![PowerFactor::Plane { normal: vec![0.0, 1.0], offset: 0.5, power: 0.5 }],
    };
    let field = evaluate_weight(&weight, &grid).unwrap();
    let zero = detect_zero_set(&field, &grid, field.eps_zero());
    assert!(zero.touches_domain_boundary);
    let err = decompose_components(&grid, &zero).unwrap_err();
    assert_eq!(err.hypothesis(), Some(Hypothesis::A1));
}

#[test]
fn constant_weight_has_one_component_bounded_by_the_domain() {
    let s = setup(&DomainSpec::ball(vec![0.0, 0.0], 1.0), &one(), 33);
    assert_eq!(s.decomposition.chi, 1);
    let c = &s.decomposition.components[0];
    assert!(c.shell.iter().all(|&p| s.grid.class(p) == NodeClass::Boundary));
}
