//! Cross-module invariants: scheme agreement, exact time accounting, the
//! ENO stencil-selection rule, and config-parsing totality.

mod common;

use common::{Rng, SEED};
use hjdp::dynamics::{Integrator1d, OptMode};
use hjdp::grid::{build_grid, neighbor_value, GridAxes, GridSpec};
use hjdp::hj_solver::{solve_pde, PdeSolveOptions};
use hjdp::io::parse_config;
use hjdp::numerics::{eno2, Scheme};
use hjdp::shapes::sphere_sdf;
use hjdp::ValueField;

fn line_axes(n: usize) -> GridAxes {
    build_grid(GridSpec::new(vec![-1.0], vec![1.0], vec![n], vec![false])).unwrap()
}

#[test]
fn upwind_and_eno2_agree_on_the_integrator_tube() {
    // Smooth initial data (the tube solution stays C^1), so both schemes
    // track the same solution to first order in dx.
    let axes = line_axes(401);
    let dx = axes.spacing()[0];
    let initial = ValueField::from_fn(&axes, |x| x[0] * x[0] - 0.25);
    let model = Integrator1d::new(1.0, OptMode::Min);

    let mut upwind = PdeSolveOptions::new(0.5);
    upwind.scheme = Scheme::Upwind1;
    let mut eno = PdeSolveOptions::new(0.5);
    eno.scheme = Scheme::Eno2;
    let a = solve_pde(initial.clone(), &axes, &model, &upwind).unwrap();
    let b = solve_pde(initial, &axes, &model, &eno).unwrap();

    // The solution is 2-Lipschitz on this domain: budget 5 * dx * 2.
    let mut max_diff = 0.0f64;
    for (x, y) in a.final_field().data().iter().zip(b.final_field().data()) {
        max_diff = max_diff.max((x - y).abs());
    }
    assert!(
        max_diff < 10.0 * dx,
        "schemes differ by {max_diff}, budget {}",
        10.0 * dx
    );

    // Both track the analytic tube min over the reachable interval.
    let mut max_err = 0.0f64;
    for (i, v) in b.final_field().data().iter().enumerate() {
        let x = axes.coords(0)[i];
        let exact = (x.abs() - 0.5).max(0.0).powi(2) - 0.25;
        max_err = max_err.max((v - exact).abs());
    }
    assert!(max_err < 10.0 * dx, "eno2 error {max_err} vs analytic tube");
}

#[test]
fn elapsed_time_reaches_the_horizon_exactly() {
    let axes = line_axes(101);
    let target = sphere_sdf(&axes, &[0.0], 0.25).unwrap();
    let model = Integrator1d::new(1.0, OptMode::Min);
    // An awkward save interval still lands checkpoints and horizon exactly.
    let mut options = PdeSolveOptions::new(0.5);
    options.save_every = Some(0.07);
    let solution = solve_pde(target, &axes, &model, &options).unwrap();
    assert_eq!(solution.final_field().time(), 0.5);
    let times: Vec<f64> = solution.checkpoints.iter().map(|c| c.time()).collect();
    for (k, t) in times[..times.len() - 1].iter().enumerate() {
        assert_eq!(*t, 0.07 * (k + 1) as f64);
    }
}

#[test]
fn eno2_always_selects_the_smaller_second_difference() {
    // Independent reimplementation of the candidate stencils; the scheme's
    // output must match the smaller-magnitude choice at every node.
    let axes = line_axes(41);
    let h = axes.spacing()[0];
    let field = ValueField::from_fn(&axes, |x| (x[0].abs() - 0.3).max(-0.2 * x[0] - 0.1));
    let v = |i: isize| -> f64 {
        if (0..41).contains(&i) {
            field.data()[i as usize]
        } else if i < 0 {
            neighbor_value(&field, &axes, 0, &[0], i)
        } else {
            neighbor_value(&field, &axes, 0, &[40], i - 40)
        }
    };
    for i in 0..41isize {
        let dd = |a: isize, b: isize, c: isize| (v(c) - 2.0 * v(b) + v(a)) / (h * h);
        let left_candidates = (dd(i - 2, i - 1, i), dd(i - 1, i, i + 1));
        let right_candidates = (dd(i - 1, i, i + 1), dd(i, i + 1, i + 2));
        let pick = |(a, b): (f64, f64)| if a.abs() <= b.abs() { a } else { b };
        let expect_left = (v(i) - v(i - 1)) / h + 0.5 * h * pick(left_candidates);
        let expect_right = (v(i + 1) - v(i)) / h - 0.5 * h * pick(right_candidates);
        let pair = eno2(&field, &axes, 0, &[i as usize]);
        assert!((pair.left - expect_left).abs() < 1e-12, "node {i}");
        assert!((pair.right - expect_right).abs() < 1e-12, "node {i}");
        // The selected correction is never larger than the rejected one.
        assert!(
            pick(left_candidates).abs() <= left_candidates.0.abs().max(left_candidates.1.abs())
        );
    }
}

#[test]
fn config_parsing_is_total_on_random_bytes() {
    let mut rng = Rng::new(SEED ^ 0x06);
    for _ in 0..100 {
        let len = rng.index(200);
        let bytes: Vec<u8> = (0..len).map(|_| (rng.next_u64() & 0xff) as u8).collect();
        let text = String::from_utf8_lossy(&bytes).into_owned();
        // Must return a structured error, never panic.
        let _ = parse_config(&text);
    }
    // Truncations of a valid config are all handled too.
    let valid = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/integrator_brt.json"),
    )
    .unwrap();
    for cut in 0..valid.len() {
        let _ = parse_config(&valid[..cut]);
    }
    assert!(parse_config(&valid).is_ok());
}

#[test]
fn brs_is_contained_in_brt() {
    let axes = line_axes(201);
    let target = sphere_sdf(&axes, &[0.3], 0.2).unwrap();
    let model = Integrator1d::new(1.0, OptMode::Min);
    let mut brs_options = PdeSolveOptions::new(0.4);
    brs_options.tube_mode = false;
    let brs = solve_pde(target.clone(), &axes, &model, &brs_options).unwrap();
    let brt = solve_pde(target, &axes, &model, &PdeSolveOptions::new(0.4)).unwrap();
    for (s, t) in brs
        .final_field()
        .data()
        .iter()
        .zip(brt.final_field().data())
    {
        assert!(t <= s, "tube must lie below the set field");
    }
}
