use noma_sop::experiments::{
    distance_sensitivity, optimal_alpha, presets, run_sweep, write_sweep_csv, Evaluator, Objective, Scenario,
    SnrSpec,
};
use noma_sop::{DecodingOrder, Method, SecrecyTargets, SimulationConfig, SystemParams, User};

fn distance_params(d2: f64) -> SystemParams {
    SystemParams::new(1.0, 3.0, 40.0, d2, 1e7, 0.1).unwrap()
}

fn eval() -> Evaluator {
    Evaluator::default()
}

#[test]
fn optimal_allocation_is_interior_for_each_user() {
    let t = SecrecyTargets::new(1.0, 0.5).unwrap();
    for user in User::BOTH {
        let best = optimal_alpha(&eval(), Method::Analytic, DecodingOrder::D2, Objective::User(user), &t, &distance_params(100.0), 201).unwrap();
        let feasible: Vec<usize> = (0..best.grid.len()).filter(|&i| best.objective[i] < 1.0).collect();
        assert!(best.index > feasible[0] && best.index < *feasible.last().unwrap(), "{user}: {}", best.alpha);
    }
}

#[test]
fn coarse_grid_brackets_fine_optimum() {
    let t = SecrecyTargets::new(1.0, 0.5).unwrap();
    for objective in [Objective::User(User::Near), Objective::User(User::Far), Objective::Both] {
        let coarse = optimal_alpha(&eval(), Method::Analytic, DecodingOrder::D2, objective, &t, &distance_params(100.0), 11).unwrap();
        let fine = optimal_alpha(&eval(), Method::Analytic, DecodingOrder::D2, objective, &t, &distance_params(100.0), 101).unwrap();
        assert!((coarse.alpha - fine.alpha).abs() <= 1.0 / 12.0 + 1e-12, "{objective:?}: {} vs {}", coarse.alpha, fine.alpha);
        assert!(fine.sop.value <= coarse.sop.value + 1e-12);
    }
}

#[test]
fn symmetric_users_have_mirrored_optima() {
    let p = SystemParams::new(1.0, 3.0, 100.0, 100.0, 1e7, 0.0).unwrap();
    let t = SecrecyTargets::new(0.5, 0.5).unwrap();
    let n = 101;
    let near = optimal_alpha(&eval(), Method::Analytic, DecodingOrder::D2, Objective::User(User::Near), &t, &p, n).unwrap();
    let far = optimal_alpha(&eval(), Method::Analytic, DecodingOrder::D2, Objective::User(User::Far), &t, &p, n).unwrap();
    assert!((near.alpha - (1.0 - far.alpha)).abs() <= 1.0 / (n + 1) as f64 + 1e-12, "{} {}", near.alpha, far.alpha);
    // The whole curves mirror each other.
    for i in 0..n {
        assert!((near.objective[i] - far.objective[n - 1 - i]).abs() < 1e-6, "{i}");
    }
}

#[test]
fn min_max_objective_dominates_both_users() {
    let t = SecrecyTargets::new(1.0, 0.5).unwrap();
    let p = distance_params(100.0);
    let both = optimal_alpha(&eval(), Method::Analytic, DecodingOrder::D2, Objective::Both, &t, &p, 101).unwrap();
    for user in User::BOTH {
        let one = optimal_alpha(&eval(), Method::Analytic, DecodingOrder::D2, Objective::User(user), &t, &p, 101).unwrap();
        assert!(both.sop.value >= one.sop.value);
        assert_eq!(one.objective.len(), both.objective.len());
        assert!(one.objective.iter().zip(&both.objective).all(|(a, b)| a <= b));
    }
}

#[test]
fn ties_go_to_the_smaller_allocation() {
    // Coarse simulation at high SNR sees no outage over a wide range of alpha.
    let p = SystemParams::from_received_snr_db(1.0, 3.0, 50.0, 100.0, 60.0, 0.1).unwrap();
    let t = SecrecyTargets::new(0.5, 0.5).unwrap();
    let coarse = Evaluator {
        simulation: SimulationConfig::new(50, 1),
        ..Evaluator::default()
    };
    let best = optimal_alpha(&coarse, Method::MonteCarlo, DecodingOrder::D2, Objective::User(User::Near), &t, &p, 21).unwrap();
    assert_eq!(best.sop.value, 0.0);
    let first_zero = best.objective.iter().position(|&v| v == 0.0).unwrap();
    assert!(best.objective.iter().filter(|&&v| v == 0.0).count() > 1);
    assert_eq!(best.index, first_zero);
}

#[test]
fn far_user_distance_has_opposite_effects() {
    let spec = noma_sop::SweepSpec {
        grid: vec![0.4],
        series: Some((noma_sop::experiments::Axis::D2, vec![60.0, 80.0, 100.0])),
        ..presets::distance_tradeoff()
    };
    let rows = distance_sensitivity(&spec, &eval()).unwrap();
    assert_eq!(rows.len(), 3);
    let s = |i: usize, u: User| rows[i].cell(&spec, Method::Analytic, DecodingOrder::D2, u).unwrap().value;
    for i in 0..2 {
        assert!(s(i, User::Near) - s(i + 1, User::Near) > 1e-3);
        assert!(s(i + 1, User::Far) - s(i, User::Far) > 1e-3);
    }
    // Transmit SNR stays put while the far user moves.
    assert!(rows.iter().all(|r| (r.point.rho_t_db - 70.0).abs() < 1e-9));
}

#[test]
fn every_figure_preset_runs() {
    let quick = Evaluator {
        simulation: SimulationConfig::new(5_000, 2),
        ..Evaluator::default()
    };
    for (spec, rows) in [
        (presets::threshold_validation(), 40),
        (presets::asymptotic_convergence(), 11),
        (presets::decoding_orders(), 25),
        (presets::distance_tradeoff(), 3 * 201),
    ] {
        let out = run_sweep(&spec, &quick).unwrap();
        assert_eq!(out.len(), rows);
        let cols = spec.columns().len();
        assert!(out.iter().all(|r| r.cells.len() == cols));
    }
}

#[test]
fn sweeps_are_byte_reproducible() {
    let spec = presets::decoding_orders();
    let e = Evaluator {
        simulation: SimulationConfig::new(20_000, 77),
        ..Evaluator::default()
    };
    let render = |exec| {
        let e = Evaluator { execution: exec, ..e };
        let mut buf = Vec::new();
        write_sweep_csv(&spec, &run_sweep(&spec, &e).unwrap(), &mut buf).unwrap();
        buf
    };
    let a = render(noma_sop::Execution::Parallel);
    assert_eq!(a, render(noma_sop::Execution::Parallel));
    assert_eq!(a, render(noma_sop::Execution::Sequential));
}

#[test]
fn rows_follow_series_then_grid_order() {
    let spec = presets::threshold_validation();
    let points = spec.points();
    assert_eq!(points[0].snr, SnrSpec::ReceivedDb(10.0));
    assert_eq!(points[20].snr, SnrSpec::ReceivedDb(20.0));
    assert!(points[..20].windows(2).all(|w| w[0].threshold_near < w[1].threshold_near));
    let _: Scenario = points[0];
}
