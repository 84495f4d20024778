use smwave_core::sm::{generate_lebesgue, generate_wiener, generate_zero};
use smwave_core::wave::{DalembertSign, Diffusion, Drift, Forcing, Profile};
use smwave_core::*;

fn on_common_nodes(coarse: &SolutionField, fine: &SolutionField) -> f64 {
    let (ri, rm) = (
        (fine.times().len() - 1) / (coarse.times().len() - 1),
        (fine.xs().len() - 1) / (coarse.xs().len() - 1),
    );
    let mut worst: f64 = 0.0;
    for i in 0..coarse.times().len() {
        for m in 0..coarse.xs().len() {
            assert!((coarse.times()[i] - fine.times()[i * ri]).abs() < 1e-14);
            assert!((coarse.xs()[m] - fine.xs()[m * rm]).abs() < 1e-12);
            worst = worst.max((coarse.values()[[i, m]] - fine.values()[[i * ri, m * rm]]).abs());
        }
    }
    worst
}

fn damped(v0: f64) -> WaveProblem {
    let mut p = WaveProblem::new(1.0);
    p.v0 = Profile::Constant { value: v0 };
    p.drift = Drift::Linear {
        constant: 0.0,
        y_coefficient: 0.0,
        v_coefficient: -1.0,
    };
    p
}

#[test]
fn stochastic_term_examples() {
    let part = Partition::new(128).unwrap();
    let lebesgue = generate_lebesgue(part);
    let exp = expand(&lebesgue, 6);
    let mut p = WaveProblem::new(1.0);
    p.sigma = Diffusion::Constant { value: 1.0 };
    p.lipschitz_sigma = 0.0;
    let grid = SolverGrid::new(1.0 / 8.0, 14, -1.0, 1.0, 5);
    let solver = WaveSolver::new(&p, &grid, part).unwrap();
    for t in [0.0, 0.25, 0.5, 0.875] {
        let want = 0.5 * t * t;
        let path = solver
            .stochastic_term(Forcing::Path(&lebesgue), t, 0.3)
            .unwrap();
        assert!((path - want).abs() < 1e-14);
        for j in 0..=6 {
            let f = Forcing::new(ForcingMode::FourierPartial(j), None, Some(&exp)).unwrap();
            assert!((solver.stochastic_term(f, t, 0.3).unwrap() - want).abs() < 1e-13);
        }
    }
    // Non-node times are fine for the series modes.
    let f = Forcing::new(ForcingMode::Fejer(3), None, Some(&exp)).unwrap();
    assert!(
        (solver.stochastic_term(f, 0.3001, -0.2).unwrap() - 0.5 * 0.3001f64.powi(2)).abs() < 1e-13
    );
    assert!(solver
        .stochastic_term(Forcing::Path(&lebesgue), 0.3001, 0.0)
        .is_err());

    let silent = WaveSolver::new(&WaveProblem::new(1.0), &grid, part).unwrap();
    let wiener = generate_wiener(part, 3);
    let wexp = expand(&wiener, 4);
    for mode in [
        ForcingMode::SmPath,
        ForcingMode::FourierPartial(4),
        ForcingMode::Fejer(2),
    ] {
        let term = silent
            .stochastic_field(Forcing::new(mode, Some(&wiener), Some(&wexp)).unwrap())
            .unwrap();
        assert!(term.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn no_coupling_converges_in_one_sweep() {
    let part = Partition::new(64).unwrap();
    let mut p = WaveProblem::new(2.0);
    p.u0 = Profile::Polynomial {
        coefficients: vec![0.5, 0.0, -1.0],
    };
    p.v0 = Profile::sine();
    let grid = SolverGrid::new(0.25, 6, -1.0, 1.0, 11);
    let solver = WaveSolver::new(&p, &grid, part).unwrap();
    let field = solver
        .solve(
            Forcing::Path(&generate_zero(part)),
            &SolverOptions::default(),
        )
        .unwrap();
    assert_eq!(field.iterations_used(), 1);
    assert_eq!(field.residual(), 0.0);
    for (i, &t) in field.times().iter().enumerate() {
        for (m, &x) in field.xs().iter().enumerate() {
            assert_eq!(field.values()[[i, m]], solver.dalembert_at(t, x).unwrap());
        }
    }
}

#[test]
fn minus_sign_loses_the_initial_condition() {
    let part = Partition::new(16).unwrap();
    let mut p = WaveProblem::new(1.0);
    p.u0 = Profile::sine();
    p.sign = DalembertSign::Minus;
    let grid = SolverGrid::new(0.25, 4, 0.0, 1.0, 5);
    let field = solve(
        &p,
        &grid,
        &generate_zero(part),
        None,
        ForcingMode::SmPath,
        &SolverOptions::default(),
    )
    .unwrap();
    assert!(field.values().row(0).iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn damped_solution_matches_a_four_times_finer_grid() {
    let coarse_grid = SolverGrid::new(0.25, 12, -0.5, 0.5, 9);
    let fine_grid = SolverGrid::new(0.25, 48, -0.5, 0.5, 33);
    let options = SolverOptions::default();
    let coarse = solve(
        &damped(1.0),
        &coarse_grid,
        &generate_zero(Partition::new(64).unwrap()),
        None,
        ForcingMode::SmPath,
        &options,
    )
    .unwrap();
    let fine = solve(
        &damped(1.0),
        &fine_grid,
        &generate_zero(Partition::new(256).unwrap()),
        None,
        ForcingMode::SmPath,
        &options,
    )
    .unwrap();
    let gap = on_common_nodes(&coarse, &fine);
    assert!(gap <= 1e-4, "coarse vs fine: {gap}");
}

#[test]
fn refinement_differences_decrease() {
    let mut p = WaveProblem::new(1.0);
    p.u0 = Profile::sine();
    p.sigma = Diffusion::half_one_plus_sine();
    p.lipschitz_sigma = 0.5;
    p.drift = Drift::Sine {
        amplitude: 0.8,
        frequency: 2.0,
    };
    p.lipschitz_f = 1.6;
    let options = SolverOptions::default();
    let fields: Vec<SolutionField> = (0..4)
        .map(|r| {
            let part = Partition::new(32 << r).unwrap();
            let grid = SolverGrid::new(0.25, 3 << r, -1.0, 1.0, (4 << r) + 1);
            solve(
                &p,
                &grid,
                &generate_lebesgue(part),
                None,
                ForcingMode::SmPath,
                &options,
            )
            .unwrap()
        })
        .collect();
    let diffs: Vec<f64> = fields
        .windows(2)
        .map(|w| on_common_nodes(&w[0], &w[1]))
        .collect();
    assert!(diffs[1] < diffs[0] && diffs[2] < diffs[1], "{diffs:?}");
    // First order or better: each halving at least shrinks the change by a third.
    assert!(
        diffs[2] <= 0.67 * diffs[1] && diffs[1] <= 0.67 * diffs[0],
        "{diffs:?}"
    );
}

#[test]
fn picard_residuals_do_not_grow() {
    let part = Partition::new(128).unwrap();
    let mut p = WaveProblem::new(1.5);
    p.u0 = Profile::sine();
    p.sigma = Diffusion::Constant { value: 0.7 };
    p.lipschitz_sigma = 0.0;
    p.drift = Drift::Sine {
        amplitude: 2.0,
        frequency: 1.5,
    };
    p.lipschitz_f = 3.0;
    let grid = SolverGrid::new(1.0 / 8.0, 14, -1.0, 1.0, 17);
    let field = solve(
        &p,
        &grid,
        &generate_wiener(part, 8),
        None,
        ForcingMode::SmPath,
        &SolverOptions::default(),
    )
    .unwrap();
    let h = field.residual_history();
    assert!(h.len() > 3);
    assert!(field.residual() <= 1e-10);
    for w in h[1..].windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{h:?}");
    }
}

#[test]
fn custom_functions_match_presets() {
    let part = Partition::new(64).unwrap();
    let path = generate_wiener(part, 4);
    let grid = SolverGrid::new(0.25, 6, -1.0, 1.0, 9);
    let mut preset = WaveProblem::new(1.0);
    preset.u0 = Profile::sine();
    preset.v0 = Profile::Constant { value: 0.2 };
    preset.sigma = Diffusion::half_one_plus_sine();
    preset.lipschitz_sigma = 0.5;
    preset.drift = Drift::Sine {
        amplitude: 0.5,
        frequency: 1.0,
    };
    preset.lipschitz_f = 0.5;
    let mut custom = preset.clone();
    custom.u0 = Profile::custom(f64::sin);
    custom.v0 = Profile::custom(|_| 0.2);
    custom.sigma = Diffusion::custom(|_, y: f64| 0.5 * (1.0 + y.sin()));
    custom.drift = Drift::custom(|_, _, v: f64| 0.5 * v.sin());
    let options = SolverOptions::default();
    let a = solve(&preset, &grid, &path, None, ForcingMode::SmPath, &options).unwrap();
    let b = solve(&custom, &grid, &path, None, ForcingMode::SmPath, &options).unwrap();
    assert!(sup_error(&a, &b).unwrap() < 1e-9);
}

#[test]
fn drift_needs_and_gets_a_wider_window() {
    let part = Partition::new(64).unwrap();
    let grid = SolverGrid::new(0.25, 6, -0.25, 0.25, 3);
    let solver = WaveSolver::new(&damped(1.0), &grid, part).unwrap();
    let cg = solver.compute_grid();
    assert!(cg.x_min <= grid.x_min - 0.75 && cg.x_max >= grid.x_max + 0.75);
    assert!((solver.dependence_margin() - 0.75).abs() < 1e-15);
    let single = SolverGrid::new(0.25, 6, 0.0, 0.0, 1);
    assert!(matches!(
        WaveSolver::new(&damped(1.0), &single, part),
        Err(Error::Configuration(_))
    ));
    assert!(WaveSolver::new(&WaveProblem::new(1.0), &single, part).is_ok());
}

#[test]
fn invalid_problems_are_rejected_before_solving() {
    let part = Partition::new(16).unwrap();
    let grid = SolverGrid::new(0.25, 4, 0.0, 1.0, 5);
    let mut p = WaveProblem::new(1.0);
    p.sigma = Diffusion::half_one_plus_sine();
    p.lipschitz_sigma = 0.1;
    assert!(matches!(
        WaveSolver::new(&p, &grid, part),
        Err(Error::SpecValidation(_))
    ));
    let mut p = WaveProblem::new(1.0);
    p.beta_sigma = 1.2;
    assert!(matches!(
        WaveSolver::new(&p, &grid, part),
        Err(Error::Parameter { .. })
    ));
    let p = WaveProblem::new(1.0);
    let bad = SolverGrid::new(0.3, 4, 0.0, 1.0, 5);
    assert!(matches!(
        WaveSolver::new(&p, &bad, part),
        Err(Error::Alignment(_))
    ));
    let zero_tol = SolverOptions {
        tolerance: 0.0,
        max_iter: 10,
    };
    assert!(solve(
        &p,
        &grid,
        &generate_zero(part),
        None,
        ForcingMode::SmPath,
        &zero_tol
    )
    .is_err());
}
