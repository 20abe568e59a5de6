//! Experiment drivers: band-threshold sweeps, budget sweeps, split-horizon
//! forecast runs and randomized oracle certification.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irradiance::{GridAxes, IrradianceGrid};
use crate::mec::{min_moves_for_fraction_from, solve_max_energy, MecParams};
use crate::mtm::{feasibility_check, solve_min_turns, MtmParams};
use crate::oracle::{oracle_mec, oracle_mtm};
use crate::path::PathKind;

fn elapsed_ms(clock: Instant) -> f64 {
    clock.elapsed().as_secs_f64() * 1e3
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// The swept value: `u1` or a movement budget.
    pub param: f64,
    /// Movements (threshold sweep) or energy (budget sweep); `None` if infeasible.
    pub objective: Option<f64>,
    /// Energy of the returned path.
    pub energy: Option<f64>,
    pub feasible: bool,
    pub wall_time_ms: f64,
}

fn check_ascending<T: PartialOrd + Copy>(values: &[T], what: &str) -> Result<()> {
    if values
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt()))
    {
        return Err(Error::Validation(format!("{what} must be ascending")));
    }
    Ok(())
}

/// Minimum movements for each lower threshold `u1` with `u2` fixed.
pub fn sweep_u1(
    grid: &IrradianceGrid,
    u2: f64,
    u1_values: &[f64],
    kind: PathKind,
) -> Result<Vec<SweepRow>> {
    check_ascending(u1_values, "u1 values")?;
    u1_values
        .iter()
        .map(|&u1| {
            let clock = Instant::now();
            // a band with u1 > u2 is empty: recorded as infeasible
            let sol = if u1 > u2 {
                None
            } else {
                solve_min_turns(grid, &MtmParams::new(u1, u2, kind))?
            };
            let wall_time_ms = elapsed_ms(clock);
            Ok(SweepRow {
                param: u1,
                objective: sol.as_ref().map(|s| s.counts.movements as f64),
                energy: sol.as_ref().map(|s| s.energy),
                feasible: sol.is_some(),
                wall_time_ms,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovesSweep {
    pub rows: Vec<SweepRow>,
    /// Smallest budget whose energy is within 1% of the largest budget's.
    pub plateau_onset: Option<usize>,
}

/// Optimal energy for each movement budget.
pub fn sweep_moves(
    grid: &IrradianceGrid,
    moves_values: &[usize],
    kind: PathKind,
) -> Result<MovesSweep> {
    check_ascending(moves_values, "movement budgets")?;
    let rows = moves_values
        .iter()
        .map(|&m| {
            let clock = Instant::now();
            let sol = solve_max_energy(grid, &MecParams::new(m, kind))?;
            Ok(SweepRow {
                param: m as f64,
                objective: Some(sol.energy),
                energy: Some(sol.energy),
                feasible: true,
                wall_time_ms: elapsed_ms(clock),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let plateau_onset = rows.last().and_then(|last| {
        let top = last.energy.unwrap_or(0.0);
        rows.iter()
            .find(|r| r.energy.unwrap_or(0.0) >= 0.99 * top)
            .map(|r| r.param as usize)
    });
    Ok(MovesSweep {
        rows,
        plateau_onset,
    })
}

/// Writes `param,objective,feasible,time_ms`. Infeasible objectives and
/// suppressed timings are left empty.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W, timings: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::io("sweep csv", std::io::Error::other(e.to_string()));
    w.write_record(["param", "objective", "feasible", "time_ms"])
        .map_err(io)?;
    for r in rows {
        w.write_record([
            r.param.to_string(),
            r.objective.map(|o| o.to_string()).unwrap_or_default(),
            r.feasible.to_string(),
            if timings {
                format!("{:.3}", r.wall_time_ms)
            } else {
                String::new()
            },
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("sweep csv", e))
}

/// Where interval `b > 1` of a forecast run starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalStart {
    /// At the column where the previous interval ended.
    #[default]
    Chained,
    /// At column 0.
    Reset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WholeDay {
    pub energy: f64,
    pub movements: usize,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalResult {
    /// Vertex rows `start_row..=end_row`; the cells collected are rows
    /// `start_row..end_row`.
    pub start_row: usize,
    pub end_row: usize,
    pub start_col: usize,
    pub final_col: usize,
    pub energy: f64,
    pub movements: usize,
    pub wall_time_ms: f64,
    pub energy_95: f64,
    pub movements_95: usize,
    pub wall_time_95_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastAggregate {
    pub total_energy: f64,
    pub total_movements: usize,
    pub total_energy_95: f64,
    pub total_movements_95: usize,
    /// Sum of the per-interval solve times at the full budget.
    pub intervals_wall_time_ms: f64,
    pub reduction_vs_whole_day_pct: f64,
    pub reduction_vs_intervals_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub k: usize,
    pub per_interval_budget: usize,
    pub fraction: f64,
    pub kind: PathKind,
    pub interval_start: IntervalStart,
    /// Divisor already applied to the grid weights; energies are reported in
    /// grid units.
    pub energy_scale: f64,
    pub whole_day: WholeDay,
    pub intervals: Vec<IntervalResult>,
    pub aggregate: ForecastAggregate,
}

impl ForecastReport {
    /// Zeroes every wall time, leaving only deterministic content.
    pub fn without_timings(mut self) -> Self {
        self.whole_day.wall_time_ms = 0.0;
        self.aggregate.intervals_wall_time_ms = 0.0;
        for iv in &mut self.intervals {
            iv.wall_time_ms = 0.0;
            iv.wall_time_95_ms = 0.0;
        }
        self
    }

    /// One summary row in the column order
    /// `MEC, Time (s), MEC, Moves, Time (s), 95% Energy, Moves`.
    pub fn write_table_csv<W: Write>(&self, out: W, timings: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::io("forecast csv", std::io::Error::other(e.to_string()));
        w.write_record([
            "whole_day_mec",
            "whole_day_time_s",
            "fi_mec",
            "fi_moves",
            "fi_time_s",
            "fi_95_energy",
            "fi_95_moves",
        ])
        .map_err(io)?;
        let secs = |ms: f64| {
            if timings {
                format!("{:.3}", ms / 1e3)
            } else {
                String::new()
            }
        };
        let a = &self.aggregate;
        w.write_record([
            self.whole_day.energy.to_string(),
            secs(self.whole_day.wall_time_ms),
            a.total_energy.to_string(),
            a.total_movements.to_string(),
            secs(a.intervals_wall_time_ms),
            a.total_energy_95.to_string(),
            a.total_movements_95.to_string(),
        ])
        .map_err(io)?;
        w.flush().map_err(|e| Error::io("forecast csv", e))
    }
}

/// Splits the `n_rows - 1` cell rows into `k` contiguous bands, the first
/// `(n_rows - 1) % k` of them one row longer. Returns vertex-row ranges
/// `(start, end)`; consecutive bands share their boundary row.
pub fn partition_rows(n_rows: usize, k: usize) -> Result<Vec<(usize, usize)>> {
    if k == 0 || k > n_rows / 2 {
        return Err(Error::Partition(format!(
            "cannot split {n_rows} rows into {k} intervals (need 1 <= k <= {})",
            n_rows / 2
        )));
    }
    let cells = n_rows - 1;
    let (base, extra) = (cells / k, cells % k);
    let mut bands = Vec::with_capacity(k);
    let mut start = 0;
    for b in 0..k {
        let end = start + base + usize::from(b < extra);
        bands.push((start, end));
        start = end;
    }
    Ok(bands)
}

/// Solves the whole day once and then `k` consecutive row bands
/// independently, each with the same budget, and finds in every band the
/// fewest movements reaching `fraction` of that band's optimum.
pub fn forecast_run(
    grid: &IrradianceGrid,
    k: usize,
    per_interval_budget: usize,
    fraction: f64,
    kind: PathKind,
    interval_start: IntervalStart,
) -> Result<ForecastReport> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Validation(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let bands = partition_rows(grid.n_rows(), k)?;

    let clock = Instant::now();
    let whole = solve_max_energy(grid, &MecParams::new(per_interval_budget, kind))?;
    let whole_day = WholeDay {
        energy: whole.energy,
        movements: whole.counts.movements,
        wall_time_ms: elapsed_ms(clock),
    };

    let mut intervals = Vec::with_capacity(k);
    let mut col = 0usize;
    for (start_row, end_row) in bands {
        let band = grid.row_band(start_row, end_row)?;
        let start_col = match interval_start {
            IntervalStart::Chained => col,
            IntervalStart::Reset => 0,
        };
        let clock = Instant::now();
        let sol = solve_max_energy(
            &band,
            &MecParams::new(per_interval_budget, kind).starting_at(start_col),
        )?;
        let wall_time_ms = elapsed_ms(clock);
        let search = min_moves_for_fraction_from(
            &band,
            &sol,
            kind,
            fraction,
            per_interval_budget,
            start_col,
        )?;
        col = sol.path.final_col();
        intervals.push(IntervalResult {
            start_row,
            end_row,
            start_col,
            final_col: col,
            energy: sol.energy,
            movements: sol.counts.movements,
            wall_time_ms,
            energy_95: search.solution.energy,
            movements_95: search.solution.counts.movements,
            wall_time_95_ms: search.wall_time_ms,
        });
    }

    let total_energy = intervals.iter().map(|i| i.energy).sum();
    let total_movements: usize = intervals.iter().map(|i| i.movements).sum();
    let total_energy_95 = intervals.iter().map(|i| i.energy_95).sum();
    let total_movements_95: usize = intervals.iter().map(|i| i.movements_95).sum();
    let reduction = |from: usize| {
        if from == 0 {
            0.0
        } else {
            100.0 * (from as f64 - total_movements_95 as f64) / from as f64
        }
    };
    let aggregate = ForecastAggregate {
        total_energy,
        total_movements,
        total_energy_95,
        total_movements_95,
        intervals_wall_time_ms: intervals.iter().map(|i| i.wall_time_ms).sum(),
        reduction_vs_whole_day_pct: reduction(whole_day.movements),
        reduction_vs_intervals_pct: reduction(total_movements),
    };
    Ok(ForecastReport {
        k,
        per_interval_budget,
        fraction,
        kind,
        interval_start,
        energy_scale: grid.axes().scale,
        whole_day,
        intervals,
        aggregate,
    })
}

/// Random grid with integer weights `0..=9` and sides in `2..=max_side`.
pub fn random_small_grid(rng: &mut impl Rng, max_side: usize) -> IrradianceGrid {
    let cols = rng.gen_range(2..=max_side);
    let rows = rng.gen_range(2..=max_side);
    let weights = (0..cols * rows)
        .map(|_| f64::from(rng.gen_range(0u8..=9)))
        .collect();
    IrradianceGrid::new(cols, rows, weights, GridAxes::default()).expect("valid random grid")
}

/// Disagreement found by [`certify_trial`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub seed: u64,
    pub check: String,
    pub solver: String,
    pub oracle: String,
}

/// Solver-versus-oracle comparison on one random grid drawn from `seed`:
/// both kinds, a band drawn from the grid's own weights and a random start
/// column for the minimum-turn problem, and budgets `0..=4` for the
/// maximum-energy problem.
pub fn certify_trial(seed: u64, max_side: usize) -> Result<Vec<Mismatch>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = random_small_grid(&mut rng, max_side);
    let mut values: Vec<f64> = (0..grid.n_rows())
        .flat_map(|j| grid.row(j).to_vec())
        .collect();
    values.sort_by(f64::total_cmp);
    let mut a = values[rng.gen_range(0..values.len())];
    let mut b = values[rng.gen_range(0..values.len())];
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let start_col = rng.gen_range(0..grid.n_cols());
    let mut out = Vec::new();
    for kind in [PathKind::General, PathKind::NoLeft] {
        for start in [0, start_col] {
            let params = MtmParams {
                u1: a,
                u2: b,
                start_col: start,
                kind,
            };
            let solver = solve_min_turns(&grid, &params)?.map(|s| s.counts.turns);
            let oracle = oracle_mtm(&grid, a, b, kind, start)?;
            let check = feasibility_check(&grid, &params);
            if solver != oracle || check != oracle.is_some() {
                out.push(Mismatch {
                    seed,
                    check: format!("mtm {kind} u1={a} u2={b} start={start}"),
                    solver: format!("{solver:?}"),
                    oracle: format!("{oracle:?} (feasibility_check={check})"),
                });
            }
            for budget in 0..=4 {
                let sol =
                    solve_max_energy(&grid, &MecParams::new(budget, kind).starting_at(start))?;
                let best = oracle_mec(&grid, budget, kind, start)?;
                if sol.weight_sum != best || sol.counts.movements > budget {
                    out.push(Mismatch {
                        seed,
                        check: format!("mec {kind} budget={budget} start={start}"),
                        solver: format!("{} ({} moves)", sol.weight_sum, sol.counts.movements),
                        oracle: best.to_string(),
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_a() -> IrradianceGrid {
        IrradianceGrid::from_rows(
            &[vec![1.0, 5.0, 1.0], vec![1.0, 5.0, 1.0], vec![0.0; 3]],
            GridAxes::default(),
        )
        .unwrap()
    }

    #[test]
    fn sweep_u1_example() {
        let rows = sweep_u1(&grid_a(), 5.0, &[0.0, 2.0, 6.0], PathKind::NoLeft).unwrap();
        let moves: Vec<Option<f64>> = rows.iter().map(|r| r.objective).collect();
        assert_eq!(moves, vec![Some(0.0), Some(1.0), None]);
        assert_eq!(rows[1].energy, Some(10.0));

        let rows = sweep_u1(&grid_a(), 9.0, &[0.0, 2.0, 6.0], PathKind::NoLeft).unwrap();
        let moves: Vec<Option<f64>> = rows.iter().map(|r| r.objective).collect();
        assert_eq!(moves, vec![Some(0.0), Some(1.0), None]);
        assert!(!rows[2].feasible);
    }

    #[test]
    fn sweep_u1_above_global_max_is_infeasible() {
        let g = grid_a();
        let top = g.global_max();
        let rows = sweep_u1(&g, top + 2.0, &[top + 1.0], PathKind::General).unwrap();
        assert!(!rows[0].feasible);
        assert!(sweep_u1(&g, 5.0, &[2.0, 1.0], PathKind::General).is_err());
    }

    #[test]
    fn sweep_moves_example() {
        let s = sweep_moves(&grid_a(), &[0, 1, 2], PathKind::NoLeft).unwrap();
        let e: Vec<Option<f64>> = s.rows.iter().map(|r| r.energy).collect();
        assert_eq!(e, vec![Some(2.0), Some(10.0), Some(10.0)]);
        assert_eq!(s.plateau_onset, Some(1));

        let flat = IrradianceGrid::new(3, 4, vec![2.0; 12], GridAxes::default()).unwrap();
        let s = sweep_moves(&flat, &[0, 1, 2, 3], PathKind::General).unwrap();
        assert!(s.rows.iter().all(|r| r.energy == Some(6.0)));
        assert_eq!(s.plateau_onset, Some(0));
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = sweep_u1(&grid_a(), 9.0, &[0.0, 6.0], PathKind::NoLeft).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "param,objective,feasible,time_ms\n0,0,true,\n6,,false,\n"
        );
    }

    #[test]
    fn partition_examples() {
        assert_eq!(partition_rows(11, 2).unwrap(), vec![(0, 5), (5, 10)]);
        assert_eq!(
            partition_rows(12, 3).unwrap(),
            vec![(0, 4), (4, 8), (8, 11)]
        );
        assert_eq!(partition_rows(12, 1).unwrap(), vec![(0, 11)]);
        assert!(matches!(partition_rows(10, 6), Err(Error::Partition(_))));
        assert!(matches!(partition_rows(10, 0), Err(Error::Partition(_))));
    }

    #[test]
    fn forecast_single_interval_matches_whole_day() {
        let g = grid_a();
        let r = forecast_run(&g, 1, 1, 0.95, PathKind::NoLeft, IntervalStart::Chained).unwrap();
        assert_eq!(r.intervals.len(), 1);
        assert_eq!(r.intervals[0].energy, r.whole_day.energy);
        assert_eq!(r.intervals[0].movements, r.whole_day.movements);
    }

    #[test]
    fn forecast_full_fraction_keeps_movements() {
        let rows: Vec<Vec<f64>> = (0..9)
            .map(|j| (0..5).map(|i| if i == j / 2 { 4.0 } else { 1.0 }).collect())
            .collect();
        let g = IrradianceGrid::from_rows(&rows, GridAxes::default()).unwrap();
        let r = forecast_run(&g, 2, 3, 1.0, PathKind::NoLeft, IntervalStart::Chained).unwrap();
        for iv in &r.intervals {
            assert_eq!(iv.movements_95, iv.movements);
            assert_eq!(iv.energy_95, iv.energy);
        }
        assert_eq!(r.intervals[1].start_col, r.intervals[0].final_col);
        let reset = forecast_run(&g, 2, 3, 1.0, PathKind::NoLeft, IntervalStart::Reset).unwrap();
        assert_eq!(reset.intervals[1].start_col, 0);
    }

    #[test]
    fn forecast_rejects_bad_inputs() {
        let g = grid_a();
        assert!(forecast_run(&g, 2, 1, 0.95, PathKind::NoLeft, IntervalStart::Chained).is_err());
        assert!(forecast_run(&g, 1, 1, 0.0, PathKind::NoLeft, IntervalStart::Chained).is_err());
    }

    #[test]
    fn certify_small_seeds() {
        for seed in 0..20 {
            assert_eq!(certify_trial(seed, 4).unwrap(), vec![], "seed {seed}");
        }
    }
}
