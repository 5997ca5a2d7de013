use latproj::function_spaces::{
    build_eval_space, build_l2_space, cauchy_distance, cauchy_element, cauchy_tolerance,
    exact_cauchy_distance_sq, QuadratureGrid, QuadratureRule,
};
use latproj::property_harness::{classify_instance, Consistency, Side, TrialConfig};

#[test]
fn constructed_spaces_classify_as_lattice() {
    let cfg = TrialConfig::new(2_000, 1, 1e-7);
    let l2 = build_l2_space(&QuadratureGrid::composite_simpson(16).unwrap()).unwrap();
    let eval = build_eval_space(16).unwrap();
    for os in [l2, eval] {
        let c = classify_instance(&os, &cfg).unwrap();
        assert_eq!(c.side, Side::Lattice);
        assert_eq!(c.verdict, Consistency::Consistent);
    }
}

#[test]
fn sampled_positive_part_is_pointwise_clipping() {
    let grid = QuadratureGrid::composite_simpson(64).unwrap();
    let os = build_l2_space(&grid).unwrap();
    let f = grid.sample(|r| (7.0 * r).sin() - 0.3);
    let pos = os.order().pos_part(&f.to_vector().unwrap()).unwrap();
    for (p, v) in pos.as_slice().iter().zip(&f.values) {
        assert_eq!(*p, v.max(0.0));
    }
}

#[test]
fn cauchy_rows_meet_tolerance_and_refine_monotonically() {
    let grids: Vec<QuadratureGrid> = [4096, 8192, 16384, 32768]
        .iter()
        .map(|&n| QuadratureGrid::simpson_with_nodes(n).unwrap())
        .collect();
    let mut n = 1;
    while n <= 64 {
        let exact = exact_cauchy_distance_sq(n, 2 * n);
        assert!((exact - 1.0 / (12.0 * n as f64)).abs() <= 1e-15);
        let errs: Vec<f64> = grids
            .iter()
            .map(|g| (cauchy_distance(g, n, 2 * n).unwrap().powi(2) - exact).abs())
            .collect();
        assert!(errs[0] <= cauchy_tolerance(grids[0].len()), "n = {n}: {errs:?}");
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "n = {n}: {errs:?}");
        n *= 2;
    }
}

#[test]
fn ramps_clip_outside_unit_interval() {
    let grid = QuadratureGrid::new(
        vec![-0.5, 0.0, 0.5, 1.0],
        vec![0.5; 4],
        QuadratureRule::CompositeSimpson,
    )
    .unwrap();
    assert_eq!(cauchy_element(&grid, 1).unwrap().values, vec![0.0, 0.0, 0.5, 1.0]);
    assert_eq!(cauchy_element(&grid, 4).unwrap().values, vec![0.0, 0.0, 1.0, 1.0]);
}
