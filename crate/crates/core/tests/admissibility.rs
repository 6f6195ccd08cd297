use multibump_core::prelude::*;

fn cusp_report(n: usize) -> AdmissibilityReport {
    assess_admissibility(
        &DomainSpec::ball(vec![0.0, 0.0], 2.0),
        &WeightSpec::cusp_radial(2),
        n,
        &AdmissibilityOptions::default(),
    )
    .unwrap()
}

#[test]
fn cusp_weight_is_admissible_and_stable() {
    let r = cusp_report(129);
    assert_eq!(r.verdict, Verdict::Admissible);
    assert!(r.a2_estimate.is_finite() && r.a2_estimate >= 1.0);
    assert!((r.a2_growth - 1.0).abs() <= 0.10, "{}", r.a2_growth);
    // near r = 1 and r = 2 the weight vanishes like a square root, so 1/a is in L^t only for t < 2
    let row = r.lt_norms.iter().find(|row| row.t == 1.5).unwrap();
    assert!(row.stable && row.fine.is_finite(), "{row:?}");
    assert!(r.best_t.unwrap() > r.n_over_2);
}

#[test]
fn quadratic_point_zero_diverges() {
    let r = assess_admissibility(
        &DomainSpec::unit_box(2),
        &WeightSpec::quadratic_point(vec![0.5, 0.5]),
        129,
        &AdmissibilityOptions::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::ViolatesA2);
    assert!(r.a2_divergent);
    let half = r.lt_norms.iter().find(|row| row.t == r.n_over_2).unwrap();
    assert!(!half.stable);
    assert!(r.best_t.is_none());
    let growth = r.lt_norms.iter().map(|row| row.growth).fold(r.a2_growth, f64::max);
    assert!(growth > 2.0, "{growth}");
}

#[test]
fn lt_norm_of_a_constant() {
    let grid = build_grid(&DomainSpec::ball(vec![0.0, 0.0], 1.0), 129).unwrap();
    let c = 4.0;
    let field = evaluate_weight(&WeightSpec::Constant { value: c }, &grid).unwrap();
    for t in [1.0, 1.5, 3.0] {
        let cells = (0..grid.cell_count()).filter(|&k| grid.cell_inside(k)).count();
        let area = cells as f64 * grid.node_volume();
        let expected = area.powf(1.0 / t) / c;
        let got = estimate_lt_norm(&field, &grid, t);
        assert!((got - expected).abs() <= 1e-12 * expected, "t = {t}: {got} vs {expected}");
        let exact = std::f64::consts::PI.powf(1.0 / t) / c;
        assert!((got - exact).abs() <= 0.02 * exact);
    }
}
