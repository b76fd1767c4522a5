use hvp_model::bench::{performance_profile, tau_grid};
use hvp_model::cg::truncated_cg;
use hvp_model::linesearch::{cubic_search_with, LsStatus};
use hvp_model::newton_model::{descent_safeguard, SafeguardMode};
use hvp_model::rng::{unit_ball_sample, RngStream};
use hvp_model::sampling::radius;
use hvp_model::types::{alpha_from_sym, alpha_len, sym_from_alpha};
use hvp_model::{Matrix, Vector};
use proptest::prelude::*;

fn symmetrize(entries: &[f64], n: usize) -> Matrix {
    let m = Matrix::from_row_slice(n, n, entries);
    (&m + m.transpose()) * 0.5
}

proptest! {
    #[test]
    fn ball_samples_lie_in_the_unit_ball(seed in any::<u64>(), n in 1usize..50) {
        let mut rng = RngStream::new(seed);
        for _ in 0..8 {
            let s = unit_ball_sample(&mut rng, n);
            prop_assert_eq!(s.len(), n);
            prop_assert!(s.norm() <= 1.0 + 1e-12);
            prop_assert!(s.norm() > 0.0);
        }
    }

    #[test]
    fn packed_symmetric_round_trip_is_bitwise(
        (n, alpha) in (2usize..9).prop_flat_map(|n| {
            (Just(n), prop::collection::vec(-1e6..1e6f64, alpha_len(n)))
        })
    ) {
        let h = sym_from_alpha(&alpha, n);
        let back = alpha_from_sym(&h);
        prop_assert_eq!(alpha.len(), back.len());
        for (a, b) in alpha.iter().zip(&back) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn safeguarded_directions_are_steep_enough(
        (n, dn, g) in (2usize..8).prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(-100.0..100.0f64, n),
                prop::collection::vec(-100.0..100.0f64, n),
            )
        }),
        always in any::<bool>()
    ) {
        let dn = Vector::from_vec(dn);
        let g = Vector::from_vec(g);
        prop_assume!(g.norm() > 1e-6);
        let mode = if always { SafeguardMode::Always } else { SafeguardMode::Deficit };
        let d = descent_safeguard(&dn, &g, 0.95, mode).unwrap();
        prop_assert!(d.norm() > 0.0);
        let cos = -g.dot(&d) / (g.norm() * d.norm());
        prop_assert!(cos >= 0.95 - 1e-9, "cos = {cos}");
    }

    #[test]
    fn cg_exits_with_descent_within_n_iterations(
        (n, entries, g) in (2usize..10).prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(-5.0..5.0f64, n * n),
                prop::collection::vec(-10.0..10.0f64, n),
            )
        })
    ) {
        let a = symmetrize(&entries, n);
        let g = Vector::from_vec(g);
        prop_assume!(g.norm() > 1e-6);
        let res = truncated_cg(|v| &a * v, &g, 0.5, n as u64);
        prop_assert!(g.dot(&res.d) < 0.0);
        prop_assert!(res.iters <= n as u64);
    }

    #[test]
    fn sampling_radius_is_always_clamped(
        (n, x, xp) in (1usize..12).prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(-1e8..1e8f64, n),
                prop::collection::vec(-1e8..1e8f64, n),
            )
        })
    ) {
        let r = radius(&Vector::from_vec(x), &Vector::from_vec(xp));
        prop_assert!((1e-4..=1e-2).contains(&r));
    }

    #[test]
    fn profile_curves_are_monotone_and_bounded(
        (rows, cols, cells) in (1usize..5, 1usize..4).prop_flat_map(|(r, c)| {
            let cell = prop_oneof![3 => 1.0..1e4f64, 1 => Just(f64::INFINITY)];
            (Just(r), Just(c), prop::collection::vec(cell, r * c))
        })
    ) {
        let t: Vec<Vec<f64>> = (0..rows).map(|i| cells[i * cols..(i + 1) * cols].to_vec()).collect();
        let solvers: Vec<String> = (0..cols).map(|j| format!("s{j}")).collect();
        let labels: Vec<String> = (0..rows).map(|i| format!("p{i}")).collect();
        let taus = tau_grid(&t);
        if let Ok(curves) = performance_profile(&t, &solvers, &taus, &labels) {
            for c in curves {
                prop_assert!(c.rho.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(c.rho.iter().all(|&r| (0.0..=1.0).contains(&r)));
            }
        } else {
            // rejected tables are exactly those no solver finished
            prop_assert!(t.iter().all(|row| row.iter().all(|v| v.is_infinite())));
        }
    }

    #[test]
    fn backtracking_trials_shrink_within_the_clamp(
        q in 0.1..50.0f64,
        m in 0.05..20.0f64
    ) {
        // strongly convex quadratic with minimum at m
        let phi0 = 0.0;
        let dphi0 = -2.0 * q * m;
        let mut trials: Vec<f64> = Vec::new();
        let res = cubic_search_with(
            |a| {
                trials.push(a);
                q * (a - m) * (a - m) - q * m * m
            },
            phi0,
            dphi0,
            1e-4,
            1e-10,
        )
        .unwrap();
        prop_assert_eq!(res.status, LsStatus::Success);
        prop_assert!(res.f_new <= phi0 + 1e-4 * res.alpha * dphi0);
        prop_assert!((trials[0] - 1.0).abs() < 1e-15);
        for w in trials.windows(2) {
            let ratio = w[1] / w[0];
            prop_assert!((0.1 - 1e-12..=0.5 + 1e-12).contains(&ratio), "ratio = {ratio}");
            prop_assert!(w[1] < w[0]);
        }
    }
}
