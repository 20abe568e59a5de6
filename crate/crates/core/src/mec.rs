//! Maximum energy collection under a rotation budget.
//!
//! For every vertex and exact turn count `k` the solver keeps the best weight
//! sum of a path arriving vertically (`V`), from the left (`R`, rightward
//! motion) or from the right (`L`, general paths only):
//!
//! ```text
//! V[i,j,k] = max(V[i,j-1,k], R[i,j-1,k-1], L[i,j-1,k-1]) + w[i][j-1]
//! R[i,j,k] = max(R[i-1,j,k], V[i-1,j,k-1])
//! L[i,j,k] = max(L[i+1,j,k], V[i+1,j,k-1])
//! ```
//!
//! Rows are processed bottom-up (V, then R ascending, then L descending), so
//! only two rows of values are live. Reconstruction uses one byte of
//! predecessor choices per `(vertex, k)`. A path arriving at row `j` has made
//! at most `2j` turns, which bounds the `k` range per row.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irradiance::IrradianceGrid;
use crate::path::{GridPath, PathCounts, PathKind, Vertex};

const UNREACHABLE: f64 = f64::NEG_INFINITY;

/// Unit in which a budget is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetUnit {
    /// Horizontal segments (tracker rotations).
    #[default]
    Movements,
    /// Turn points of the path, endpoints included.
    Waypoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MecParams {
    pub moves_budget: usize,
    pub unit: BudgetUnit,
    pub start_col: usize,
    pub kind: PathKind,
}

impl MecParams {
    pub fn new(moves_budget: usize, kind: PathKind) -> Self {
        MecParams {
            moves_budget,
            unit: BudgetUnit::Movements,
            start_col: 0,
            kind,
        }
    }

    pub fn starting_at(mut self, start_col: usize) -> Self {
        self.start_col = start_col;
        self
    }

    pub fn validate(&self, grid: &IrradianceGrid) -> Result<()> {
        if self.start_col >= grid.n_cols() {
            return Err(Error::Validation(format!(
                "start column {} outside 0..{}",
                self.start_col,
                grid.n_cols()
            )));
        }
        if self.unit == BudgetUnit::Waypoints && self.moves_budget < 2 {
            return Err(Error::Validation(
                "a waypoint budget below 2 admits no path".into(),
            ));
        }
        Ok(())
    }

    /// Largest admissible turn count. With `b` movements a path ending in a
    /// vertical segment has `2b - 1` or `2b` turns; `w` waypoints allow
    /// `w - 2` turns.
    pub fn turn_cap(&self) -> usize {
        match self.unit {
            BudgetUnit::Movements => 2 * self.moves_budget,
            BudgetUnit::Waypoints => self.moves_budget.saturating_sub(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MecSolution {
    pub path: GridPath,
    pub counts: PathCounts,
    pub energy: f64,
    pub weight_sum: f64,
}

/// How a path arrives at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arrival {
    Vertical,
    Right,
    Left,
}

/// Full value tables, kept only on request.
#[derive(Debug, Clone)]
pub struct MecTables {
    first_col: usize,
    width: usize,
    stride: usize,
    v: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
    left: Vec<Vec<f64>>,
}

impl MecTables {
    /// Best weight sum reaching `(col, row)` with exactly `turns` turns, or
    /// `None` when no such path exists.
    pub fn value(&self, arrival: Arrival, col: usize, row: usize, turns: usize) -> Option<f64> {
        if col < self.first_col || col >= self.first_col + self.width || turns >= self.stride {
            return None;
        }
        let rows = match arrival {
            Arrival::Vertical => &self.v,
            Arrival::Right => &self.right,
            Arrival::Left => &self.left,
        };
        let x = *rows
            .get(row)?
            .get((col - self.first_col) * self.stride + turns)?;
        (x != UNREACHABLE).then_some(x)
    }
}

// choice byte layout
const V_FROM_RIGHT: u8 = 0b01;
const V_FROM_LEFT: u8 = 0b10;
const V_MASK: u8 = 0b11;
const R_FROM_V: u8 = 0b100;
const L_FROM_V: u8 = 0b1000;

struct Dp {
    general: bool,
    start: usize,
    first_col: usize,
    cap: usize,
    choices: Vec<u8>,
    row_offset: Vec<usize>,
}

impl Dp {
    #[inline]
    fn kmax(&self, row: usize) -> usize {
        self.cap.min(2 * row)
    }

    #[inline]
    fn choice(&self, col: usize, row: usize, k: usize) -> u8 {
        let c = col - self.first_col;
        self.choices[self.row_offset[row] + c * (self.kmax(row) + 1) + k]
    }
}

/// Best no-left path under the budget.
pub fn solve_mec_nl(grid: &IrradianceGrid, params: &MecParams) -> Result<MecSolution> {
    if params.kind != PathKind::NoLeft {
        return Err(Error::Validation(
            "solve_mec_nl requires kind = no_left".into(),
        ));
    }
    run(grid, params, false).map(|(s, _)| s)
}

/// Best general path under the budget.
pub fn solve_mec(grid: &IrradianceGrid, params: &MecParams) -> Result<MecSolution> {
    if params.kind != PathKind::General {
        return Err(Error::Validation(
            "solve_mec requires kind = general".into(),
        ));
    }
    run(grid, params, false).map(|(s, _)| s)
}

/// Dispatches on `params.kind`.
pub fn solve_max_energy(grid: &IrradianceGrid, params: &MecParams) -> Result<MecSolution> {
    run(grid, params, false).map(|(s, _)| s)
}

/// Like [`solve_max_energy`] but also returns every row of the value tables.
/// Memory grows with `rows * cols * budget`; meant for debugging.
pub fn solve_max_energy_traced(
    grid: &IrradianceGrid,
    params: &MecParams,
) -> Result<(MecSolution, MecTables)> {
    run(grid, params, true).map(|(s, t)| (s, t.expect("tables retained")))
}

#[allow(clippy::needless_range_loop)]
fn run(
    grid: &IrradianceGrid,
    params: &MecParams,
    retain: bool,
) -> Result<(MecSolution, Option<MecTables>)> {
    grid.validate()?;
    params.validate(grid)?;
    let general = params.kind == PathKind::General;
    let start = params.start_col;
    let n_rows = grid.n_rows();
    let first_col = if general { 0 } else { start };
    let width = grid.n_cols() - first_col;
    // no path can use more than 2 * (n_rows - 1) turns
    let cap = params.turn_cap().min(2 * (n_rows - 1));
    let stride = cap + 1;

    let mut row_offset = Vec::with_capacity(n_rows + 1);
    let mut total = 0usize;
    for j in 0..n_rows {
        row_offset.push(total);
        total += width * (cap.min(2 * j) + 1);
    }
    let mut dp = Dp {
        general,
        start,
        first_col,
        cap,
        choices: vec![0u8; total],
        row_offset,
    };

    let cells = width * stride;
    let mut v_prev = vec![UNREACHABLE; cells];
    let mut r_prev = vec![UNREACHABLE; cells];
    let mut l_prev = vec![UNREACHABLE; if general { cells } else { 0 }];
    let mut v_cur = v_prev.clone();
    let mut r_cur = r_prev.clone();
    let mut l_cur = l_prev.clone();

    // row 0: the origin is a vertical state with no turns; sliding along the
    // bottom row away from it is free
    let s = start - first_col;
    v_prev[s * stride] = 0.0;
    for c in s + 1..width {
        r_prev[c * stride] = 0.0;
    }
    if general {
        for c in 0..s {
            l_prev[c * stride] = 0.0;
        }
    }

    let mut trace = retain.then(|| MecTables {
        first_col,
        width,
        stride,
        v: vec![v_prev.clone()],
        right: vec![r_prev.clone()],
        left: vec![l_prev.clone()],
    });

    for j in 1..n_rows {
        let kmax = dp.kmax(j);
        let kmax_below = dp.kmax(j - 1);
        let below = &grid.row(j - 1)[first_col..];
        let base = dp.row_offset[j];
        let ch = &mut dp.choices[base..base + width * (kmax + 1)];

        // vertical arrivals from row j - 1
        for c in 0..width {
            let w = below[c];
            let o = c * stride;
            let co = c * (kmax + 1);
            for k in 0..=kmax {
                let mut best = if k <= kmax_below {
                    v_prev[o + k]
                } else {
                    UNREACHABLE
                };
                let mut pick = 0u8;
                if k >= 1 {
                    let r = r_prev[o + k - 1];
                    if r > best {
                        best = r;
                        pick = V_FROM_RIGHT;
                    }
                    if general {
                        let l = l_prev[o + k - 1];
                        if l > best {
                            best = l;
                            pick = V_FROM_LEFT;
                        }
                    }
                }
                v_cur[o + k] = if best == UNREACHABLE {
                    UNREACHABLE
                } else {
                    best + w
                };
                ch[co + k] = pick;
            }
        }

        // rightward arrivals, ascending columns
        r_cur[..stride].fill(UNREACHABLE);
        for c in 1..width {
            let o = c * stride;
            let p = o - stride;
            let co = c * (kmax + 1);
            r_cur[o] = UNREACHABLE;
            for k in 1..=kmax {
                let turn = v_cur[p + k - 1];
                let cont = r_cur[p + k];
                if turn >= cont && turn != UNREACHABLE {
                    r_cur[o + k] = turn;
                    ch[co + k] |= R_FROM_V;
                } else {
                    r_cur[o + k] = cont;
                }
            }
        }

        // leftward arrivals, descending columns
        if general {
            let last = (width - 1) * stride;
            l_cur[last..last + stride].fill(UNREACHABLE);
            for c in (0..width - 1).rev() {
                let o = c * stride;
                let p = o + stride;
                let co = c * (kmax + 1);
                l_cur[o] = UNREACHABLE;
                for k in 1..=kmax {
                    let turn = v_cur[p + k - 1];
                    let cont = l_cur[p + k];
                    if turn >= cont && turn != UNREACHABLE {
                        l_cur[o + k] = turn;
                        ch[co + k] |= L_FROM_V;
                    } else {
                        l_cur[o + k] = cont;
                    }
                }
            }
        }

        if let Some(t) = trace.as_mut() {
            t.v.push(v_cur.clone());
            t.right.push(r_cur.clone());
            t.left.push(l_cur.clone());
        }
        std::mem::swap(&mut v_prev, &mut v_cur);
        std::mem::swap(&mut r_prev, &mut r_cur);
        std::mem::swap(&mut l_prev, &mut l_cur);
    }

    // top row: best value; ties go to fewer turns, vertical arrival, then
    // smaller column
    let top = n_rows - 1;
    let kmax = dp.kmax(top);
    let mut best: Option<(f64, usize, Arrival, usize)> = None;
    for k in 0..=kmax {
        for (arrival, table) in [
            (Arrival::Vertical, &v_prev),
            (Arrival::Right, &r_prev),
            (Arrival::Left, &l_prev),
        ] {
            if table.is_empty() {
                continue;
            }
            for c in 0..width {
                let x = table[c * stride + k];
                if x == UNREACHABLE {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((b, bk, ba, bc)) => x > b || (x == b && (k, arrival, c) < (bk, ba, bc)),
                };
                if better {
                    best = Some((x, k, arrival, c));
                }
            }
        }
    }
    let (weight_sum, k, arrival, c) = best.expect("the straight ascent is always reachable");
    let path = dp.rebuild(c + first_col, top, k, arrival, params.kind);
    debug_assert_eq!(path.weight_sum(grid), weight_sum);
    let counts = path.counts();
    let solution = MecSolution {
        energy: grid.eps_deg() * weight_sum,
        weight_sum,
        counts,
        path,
    };
    Ok((solution, trace))
}

impl Dp {
    fn rebuild(
        &self,
        col: usize,
        row: usize,
        k: usize,
        arrival: Arrival,
        kind: PathKind,
    ) -> GridPath {
        let (mut i, mut j, mut k, mut a) = (col, row, k, arrival);
        let mut walk: Vec<Vertex> = vec![(i, j)];
        while j > 0 {
            let ch = self.choice(i, j, k);
            match a {
                Arrival::Vertical => {
                    j -= 1;
                    match ch & V_MASK {
                        V_FROM_RIGHT => {
                            k -= 1;
                            a = Arrival::Right;
                        }
                        V_FROM_LEFT => {
                            k -= 1;
                            a = Arrival::Left;
                        }
                        _ => {}
                    }
                }
                Arrival::Right => {
                    i -= 1;
                    if ch & R_FROM_V != 0 {
                        k -= 1;
                        a = Arrival::Vertical;
                    }
                }
                Arrival::Left => {
                    i += 1;
                    if ch & L_FROM_V != 0 {
                        k -= 1;
                        a = Arrival::Vertical;
                    }
                }
            }
            walk.push((i, j));
        }
        // bottom row: horizontal states slide back to the origin
        while i != self.start {
            i = if i < self.start { i + 1 } else { i - 1 };
            walk.push((i, 0));
        }
        debug_assert!(self.general || walk.iter().all(|v| v.0 >= self.first_col));
        walk.reverse();
        GridPath::from_walk(kind, &walk)
    }
}

/// Result of searching the smallest budget reaching an energy fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionSearch {
    pub moves: usize,
    pub solution: MecSolution,
    pub reference_energy: f64,
    pub wall_time_ms: f64,
}

/// Smallest budget `b <= ref_budget` whose optimum collects at least
/// `fraction` of the optimum at `ref_budget`. Optimal energy is
/// non-decreasing in the budget, so a binary search suffices.
pub fn min_moves_for_fraction(
    grid: &IrradianceGrid,
    kind: PathKind,
    fraction: f64,
    ref_budget: usize,
    start_col: usize,
) -> Result<FractionSearch> {
    let reference = solve_max_energy(
        grid,
        &MecParams::new(ref_budget, kind).starting_at(start_col),
    )?;
    min_moves_for_fraction_from(grid, &reference, kind, fraction, ref_budget, start_col)
}

/// [`min_moves_for_fraction`] with the `ref_budget` optimum already solved.
pub fn min_moves_for_fraction_from(
    grid: &IrradianceGrid,
    reference: &MecSolution,
    kind: PathKind,
    fraction: f64,
    ref_budget: usize,
    start_col: usize,
) -> Result<FractionSearch> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Validation(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let clock = Instant::now();
    let target = fraction * reference.energy;
    let (mut lo, mut hi) = (0usize, ref_budget);
    let mut witness = reference.clone();
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let sol = solve_max_energy(grid, &MecParams::new(mid, kind).starting_at(start_col))?;
        if sol.energy >= target {
            hi = mid;
            witness = sol;
        } else {
            lo = mid + 1;
        }
    }
    Ok(FractionSearch {
        moves: lo,
        solution: witness,
        reference_energy: reference.energy,
        wall_time_ms: clock.elapsed().as_secs_f64() * 1e3,
    })
}
