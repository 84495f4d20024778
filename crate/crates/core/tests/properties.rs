use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use smwave_core::integral::{
    dyadic_levels, dyadic_version, master_bound, DyadicSchemeConfig, HolderData,
};
use smwave_core::sm::{generate_fbm, generate_wiener};
use smwave_core::wave::{Diffusion, Profile};
use smwave_core::*;

fn wiener(level: u32, seed: u64) -> StochasticMeasurePath {
    generate_wiener(Partition::dyadic(level).unwrap(), seed)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measure_is_additive(seed in any::<u64>(), a in 0usize..=64, b in 0usize..=64, c in 0usize..=64) {
        let path = wiener(6, seed);
        let mut v = [a, b, c];
        v.sort();
        let [s, t, u] = v.map(|i| i as f64 / 64.0);
        let whole = path.measure_of(s, u).unwrap();
        let parts = path.measure_of(s, t).unwrap() + path.measure_of(t, u).unwrap();
        prop_assert!(close(whole, parts, 1e-13));
    }

    #[test]
    fn coarsening_keeps_aligned_masses(seed in any::<u64>(), level in 1u32..6, k in 0usize..=32) {
        let path = wiener(7, seed);
        let coarse = path.coarsen(Partition::dyadic(level).unwrap()).unwrap();
        let cells = 1usize << level;
        let t = (k % (cells + 1)) as f64 / cells as f64;
        prop_assert!(close(coarse.measure_of(0.0, t).unwrap(), path.measure_of(0.0, t).unwrap(), 1e-13));
    }

    #[test]
    fn parseval_and_conjugate_symmetry(seed in any::<u64>(), level in 2u32..9) {
        let path = wiener(level, seed);
        let n = path.n_cells();
        let exp = expand(&path, n - 1);
        let energy: f64 = (0..n as i64).map(|k| exp.coefficient(k).norm_sqr()).sum();
        let direct: f64 = path.increments().iter().map(|x| x * x).sum::<f64>() * n as f64;
        prop_assert!((energy - direct).abs() <= 1e-10 * direct);
        for k in 0..n as i64 {
            prop_assert_eq!(exp.coefficient(-k), exp.coefficient(k).conj());
        }
    }

    #[test]
    fn expansion_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), alpha in -3.0..3.0f64, beta in -3.0..3.0f64) {
        let (x, y) = (wiener(7, s1), wiener(7, s2));
        let combo = x.linear_combination(alpha, &y, beta).unwrap();
        let (ex, ey, ec) = (expand(&x, 20), expand(&y, 20), expand(&combo, 20));
        for k in 0..=20i64 {
            let want = ex.coefficient(k) * alpha + ey.coefficient(k) * beta;
            prop_assert!((ec.coefficient(k) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn rotation_is_a_phase(seed in any::<u64>(), shift in 0usize..128) {
        let path = wiener(7, seed);
        let n = path.n_cells();
        let (e, r) = (expand(&path, 16), expand(&path.rotated(shift), 16));
        for k in 0..=16i64 {
            let phase = Complex64::from_polar(1.0, -2.0 * PI * ((k as usize * shift) % n) as f64 / n as f64);
            prop_assert!((r.coefficient(k) - e.coefficient(k) * phase).norm() < 1e-12);
        }
    }

    #[test]
    fn sums_are_periodic_and_fejer_forms_agree(seed in any::<u64>(), j in 0usize..40, t in 0.0..1.0f64) {
        let exp = expand(&wiener(8, seed), 40);
        let s = exp.partial_sum(j, t).unwrap();
        prop_assert!(close(s, exp.partial_sum(j, t + 1.0).unwrap(), 1e-11));
        let kernel = exp.fejer_sum(j, t).unwrap();
        let average = exp.fejer_sum_by_averaging(j, t).unwrap();
        let scale: f64 = (0..=j as i64).map(|k| exp.coefficient(k).norm()).sum();
        prop_assert!((kernel - average).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn telescope_is_exact_and_majorant_holds(
        seed in any::<u64>(),
        beta in 0.55..1.0f64,
        shift in 0.0..1.0f64,
        k in 1usize..=256,
        eps in 0.05..0.6f64,
        fractional in any::<bool>(),
    ) {
        let p = Partition::new(256).unwrap();
        let path = if fractional { generate_fbm(p, 0.7, seed).unwrap() } else { generate_wiener(p, seed) };
        let g = move |s: f64| (s - shift).abs().powf(beta) - 0.3;
        let t = k as f64 / 256.0;
        let levels = dyadic_levels(&g, &path, t, 8).unwrap();
        prop_assert_eq!(dyadic_version(g, &path, t, 8).unwrap().to_bits(), levels[8].to_bits());
        let r = master_bound(g, &path, t, &DyadicSchemeConfig::new(8, eps), HolderData::new(1.0, beta)).unwrap();
        prop_assert!(r.value <= r.bound, "{} > {}", r.value, r.bound);
    }

    #[test]
    fn solution_is_linear_in_the_path(seed in any::<u64>(), alpha in -4.0..4.0f64) {
        let part = Partition::new(64).unwrap();
        let mut problem = WaveProblem::new(1.3);
        problem.sigma = Diffusion::half_one_plus_sine();
        problem.lipschitz_sigma = 0.5;
        let grid = SolverGrid::new(0.25, 6, -1.0, 1.0, 7);
        let path = generate_wiener(part, seed);
        let scaled = path.scaled(alpha);
        let options = SolverOptions::default();
        for (mode, k) in [(ForcingMode::SmPath, 0), (ForcingMode::FourierPartial(5), 5), (ForcingMode::Fejer(5), 5)] {
            let (e1, e2) = (expand(&path, k), expand(&scaled, k));
            let u = solve(&problem, &grid, &path, Some(&e1), mode, &options).unwrap();
            let v = solve(&problem, &grid, &scaled, Some(&e2), mode, &options).unwrap();
            // Relative to the field's size: single nodes can cancel to ~0.
            let scale = v.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (a, b) in u.values().iter().zip(v.values().iter()) {
                prop_assert!((alpha * a - b).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn first_row_is_the_initial_profile(seed in any::<u64>(), amplitude in -2.0..2.0f64, phase in 0.0..6.0f64) {
        let part = Partition::new(32).unwrap();
        let mut problem = WaveProblem::new(0.8);
        problem.u0 = Profile::Sine { amplitude, frequency: 1.5, phase };
        problem.v0 = Profile::Constant { value: 0.3 };
        problem.sigma = Diffusion::Constant { value: 1.0 };
        problem.lipschitz_sigma = 0.0;
        let grid = SolverGrid::new(0.25, 3, -1.0, 1.0, 9);
        let field = solve(&problem, &grid, &generate_wiener(part, seed), None, ForcingMode::SmPath, &SolverOptions::default()).unwrap();
        for (m, &x) in field.xs().iter().enumerate() {
            prop_assert_eq!(field.values()[[0, m]], problem.u0.eval(x));
        }
    }
}
