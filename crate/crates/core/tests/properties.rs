mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trough_sched::oracle::{oracle_mec, oracle_mtm};
use trough_sched::{
    feasibility_check, solve_max_energy, solve_min_turns, GridAxes, IrradianceGrid, MecParams,
    MtmParams, PathKind,
};

const KINDS: [PathKind; 2] = [PathKind::General, PathKind::NoLeft];

fn small_grid() -> impl Strategy<Value = IrradianceGrid> {
    (2usize..=5, 2usize..=5).prop_flat_map(|(c, r)| {
        prop::collection::vec(0u8..=9, c * r).prop_map(move |w| {
            IrradianceGrid::new(
                c,
                r,
                w.into_iter().map(f64::from).collect(),
                GridAxes::default(),
            )
            .unwrap()
        })
    })
}

fn medium_grid() -> impl Strategy<Value = IrradianceGrid> {
    (2usize..=12, 2usize..=12).prop_flat_map(|(c, r)| {
        prop::collection::vec(0u8..=9, c * r).prop_map(move |w| {
            IrradianceGrid::new(
                c,
                r,
                w.into_iter().map(f64::from).collect(),
                GridAxes::default(),
            )
            .unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solvers_match_oracle(grid in small_grid(), u1 in 0u8..=9, width in 0u8..=9, start in 0usize..5) {
        let start = start % grid.n_cols();
        let (u1, u2) = (f64::from(u1), f64::from(u1 + width));
        for kind in KINDS {
            let p = MtmParams { u1, u2, start_col: start, kind };
            let got = solve_min_turns(&grid, &p).unwrap().map(|s| s.counts.turns);
            prop_assert_eq!(got, oracle_mtm(&grid, u1, u2, kind, start).unwrap());
            prop_assert_eq!(feasibility_check(&grid, &p), got.is_some());
            for b in 0..=4 {
                let sol = solve_max_energy(&grid, &MecParams::new(b, kind).starting_at(start)).unwrap();
                prop_assert_eq!(sol.weight_sum, oracle_mec(&grid, b, kind, start).unwrap());
            }
        }
    }

    #[test]
    fn min_turns_monotone_in_u1(grid in medium_grid(), u2 in 5u8..=9) {
        for kind in KINDS {
            let mut last: Option<usize> = Some(0);
            for u1 in 0..=u2 {
                let got = solve_min_turns(&grid, &MtmParams::new(f64::from(u1), f64::from(u2), kind))
                    .unwrap()
                    .map(|s| s.counts.movements);
                match (last, got) {
                    (Some(a), Some(b)) => prop_assert!(b >= a),
                    (None, Some(_)) => prop_assert!(false, "feasibility is not a prefix"),
                    _ => {}
                }
                last = got;
            }
        }
    }

    #[test]
    fn general_dominates_no_left(grid in medium_grid(), u1 in 0u8..=9, budget in 0usize..8) {
        let u1 = f64::from(u1);
        let g = solve_min_turns(&grid, &MtmParams::new(u1, 9.0, PathKind::General)).unwrap();
        let n = solve_min_turns(&grid, &MtmParams::new(u1, 9.0, PathKind::NoLeft)).unwrap();
        if let Some(n) = &n {
            prop_assert!(g.as_ref().unwrap().counts.turns <= n.counts.turns);
        }
        let g = solve_max_energy(&grid, &MecParams::new(budget, PathKind::General)).unwrap();
        let n = solve_max_energy(&grid, &MecParams::new(budget, PathKind::NoLeft)).unwrap();
        prop_assert!(g.energy >= n.energy);
    }

    #[test]
    fn energy_monotone_and_bounded(grid in medium_grid(), start in 0usize..12) {
        let start = start % grid.n_cols();
        for kind in KINDS {
            let mut last = f64::NEG_INFINITY;
            for b in 0..=grid.n_rows() {
                let sol = solve_max_energy(&grid, &MecParams::new(b, kind).starting_at(start)).unwrap();
                prop_assert!(sol.energy >= last);
                prop_assert!(sol.weight_sum <= grid.row_max_sum());
                prop_assert!(sol.counts.movements <= b);
                prop_assert!(sol.counts.turns <= 2 * b);
                prop_assert_eq!(sol.path.validate(&grid), Ok(()));
                last = sol.energy;
            }
        }
    }

    #[test]
    fn solutions_report_their_own_energy(grid in medium_grid(), budget in 0usize..6, u1 in 0u8..=4) {
        for kind in KINDS {
            let sol = solve_max_energy(&grid, &MecParams::new(budget, kind)).unwrap();
            prop_assert_eq!(sol.energy, sol.path.energy(&grid));
            prop_assert_eq!(sol.weight_sum, sol.path.weight_sum(&grid));
            prop_assert_eq!(sol.counts, sol.path.counts());
            if let Some(m) = solve_min_turns(&grid, &MtmParams::new(f64::from(u1), 9.0, kind)).unwrap() {
                prop_assert_eq!(m.energy, m.path.energy(&grid));
                prop_assert_eq!(m.counts, m.path.counts());
                prop_assert_eq!(m.path.validate(&grid), Ok(()));
            }
        }
    }

    #[test]
    fn scaling_is_equivariant(grid in medium_grid(), budget in 0usize..6, pow in -3i32..4) {
        let f = 2f64.powi(pow);
        let scaled = grid.scaled(f).unwrap();
        for kind in KINDS {
            let a = solve_max_energy(&grid, &MecParams::new(budget, kind)).unwrap();
            let b = solve_max_energy(&scaled, &MecParams::new(budget, kind)).unwrap();
            prop_assert_eq!(b.energy, f * a.energy);
            let a = solve_min_turns(&grid, &MtmParams::new(3.0, 9.0, kind)).unwrap();
            let b = solve_min_turns(&scaled, &MtmParams::new(3.0 * f, 9.0 * f, kind)).unwrap();
            prop_assert_eq!(a.map(|s| s.counts.turns), b.map(|s| s.counts.turns));
        }
    }

    #[test]
    fn random_paths_are_valid_and_consistent(seed in any::<u64>(), cols in 2usize..9, rows in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = common::random_grid(&mut rng, cols, rows, 0.5);
        for kind in KINDS {
            let start = rand::Rng::gen_range(&mut rng, 0..cols);
            let path = common::random_path(&mut rng, &grid, kind, start);
            prop_assert_eq!(path.validate(&grid), Ok(()));
            // one parked cell per row below the top
            prop_assert_eq!(path.vertical_points().len(), rows - 1);
            let trimmed = path.without_terminal_rotation();
            prop_assert_eq!(trimmed.validate(&grid), Ok(()));
            prop_assert_eq!(trimmed.energy(&grid), path.energy(&grid));
            let c = path.counts();
            prop_assert_eq!(c.turns, c.waypoints - 2);
            let segments = c.waypoints - 1;
            let first_vertical = path.waypoints[0].0 == path.waypoints[1].0;
            let expected = if first_vertical { segments / 2 } else { segments.div_ceil(2) };
            prop_assert_eq!(c.movements, expected);
        }
    }
}
