//! Minimum-rotation tracking under an irradiance band.
//!
//! Both solvers keep, for every vertex, the fewest turns needed to reach it
//! arriving vertically (`v`) or horizontally (`h`, split into rightward and
//! leftward arrivals in the general case). A unit vertical step out of a
//! vertex is allowed only if that vertex's weight lies in `[u1, u2]`.
//! Unreachable states are `None`. Work per vertex is constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irradiance::IrradianceGrid;
use crate::path::{GridPath, PathCounts, PathKind, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtmParams {
    pub u1: f64,
    pub u2: f64,
    pub start_col: usize,
    pub kind: PathKind,
}

impl MtmParams {
    pub fn new(u1: f64, u2: f64, kind: PathKind) -> Self {
        MtmParams {
            u1,
            u2,
            start_col: 0,
            kind,
        }
    }

    pub fn validate(&self, grid: &IrradianceGrid) -> Result<()> {
        if self.u1.is_nan() || self.u2.is_nan() || self.u1 > self.u2 {
            return Err(Error::Validation(format!(
                "band requires u1 <= u2, got u1={} u2={}",
                self.u1, self.u2
            )));
        }
        if self.start_col >= grid.n_cols() {
            return Err(Error::Validation(format!(
                "start column {} outside 0..{}",
                self.start_col,
                grid.n_cols()
            )));
        }
        Ok(())
    }

    #[inline]
    fn admits(&self, w: f64) -> bool {
        self.u1 <= w && w <= self.u2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtmSolution {
    pub path: GridPath,
    pub counts: PathCounts,
    pub energy: f64,
}

impl MtmSolution {
    fn from_path(path: GridPath, grid: &IrradianceGrid) -> Self {
        MtmSolution {
            counts: path.counts(),
            energy: path.energy(grid),
            path,
        }
    }
}

type Turns = Option<u32>;

#[inline]
fn plus_one(t: Turns) -> Turns {
    t.map(|x| x + 1)
}

#[inline]
fn min_turns(a: Turns, b: Turns) -> Turns {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum State {
    Vertical,
    Right,
    Left,
}

/// Per-vertex turn tables, row-major.
struct Tables {
    n_cols: usize,
    v: Vec<Turns>,
    right: Vec<Turns>,
    left: Vec<Turns>,
}

impl Tables {
    fn new(grid: &IrradianceGrid, with_left: bool) -> Self {
        let n = grid.n_cols() * grid.n_rows();
        Tables {
            n_cols: grid.n_cols(),
            v: vec![None; n],
            right: vec![None; n],
            left: if with_left { vec![None; n] } else { Vec::new() },
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        j * self.n_cols + i
    }

    fn get(&self, state: State, i: usize, j: usize) -> Turns {
        let k = self.at(i, j);
        match state {
            State::Vertical => self.v[k],
            State::Right => self.right[k],
            State::Left => self.left.get(k).copied().flatten(),
        }
    }
}

/// Minimum-turn path with no leftward rotation, or `None` if no path keeps
/// every vertical point inside the band.
#[allow(clippy::needless_range_loop)]
pub fn solve_mtm_nl(grid: &IrradianceGrid, params: &MtmParams) -> Result<Option<MtmSolution>> {
    grid.validate()?;
    params.validate(grid)?;
    if params.kind != PathKind::NoLeft {
        return Err(Error::Validation(
            "solve_mtm_nl requires kind = no_left".into(),
        ));
    }
    let start = params.start_col;
    let (n_cols, n_rows) = (grid.n_cols(), grid.n_rows());
    let mut t = Tables::new(grid, false);

    // row 0: the origin holds both states at zero turns; sliding right from
    // it costs nothing
    for i in start..n_cols {
        let k = t.at(i, 0);
        t.right[k] = Some(0);
    }
    let o = t.at(start, 0);
    t.v[o] = Some(0);

    for j in 1..n_rows {
        let below = grid.row(j - 1);
        let mut any = false;
        for i in start..n_cols {
            let here = t.at(i, j);
            let down = t.at(i, j - 1);
            if params.admits(below[i]) {
                t.v[here] = min_turns(plus_one(t.right[down]), t.v[down]);
                any |= t.v[here].is_some();
            }
            if i > start {
                let prev = here - 1;
                t.right[here] = min_turns(t.right[prev], plus_one(t.v[prev]));
            }
        }
        if !any {
            return Ok(None);
        }
    }
    Ok(extract(grid, &t, params).map(|p| MtmSolution::from_path(p, grid)))
}

/// Minimum-turn path allowing rotation in both directions.
///
/// Within a row a path moves exclusively right or exclusively left before
/// climbing, so each row is swept three times: vertical arrivals from the row
/// below, then rightward arrivals in ascending column order starting after
/// the leftmost vertically-reached column, then leftward arrivals in
/// descending order starting before the rightmost one.
#[allow(clippy::needless_range_loop)]
pub fn solve_mtm(grid: &IrradianceGrid, params: &MtmParams) -> Result<Option<MtmSolution>> {
    grid.validate()?;
    params.validate(grid)?;
    if params.kind != PathKind::General {
        return Err(Error::Validation(
            "solve_mtm requires kind = general".into(),
        ));
    }
    let start = params.start_col;
    let (n_cols, n_rows) = (grid.n_cols(), grid.n_rows());
    let mut t = Tables::new(grid, true);

    for i in 0..n_cols {
        let k = t.at(i, 0);
        if i >= start {
            t.right[k] = Some(0);
        }
        if i <= start {
            t.left[k] = Some(0);
        }
    }
    let o = t.at(start, 0);
    t.v[o] = Some(0);

    for j in 1..n_rows {
        let below = grid.row(j - 1);
        let mut reached = None::<(usize, usize)>;
        for i in 0..n_cols {
            if !params.admits(below[i]) {
                continue;
            }
            let here = t.at(i, j);
            let down = t.at(i, j - 1);
            let from_h = plus_one(min_turns(t.right[down], t.left[down]));
            t.v[here] = min_turns(from_h, t.v[down]);
            if t.v[here].is_some() {
                reached = Some(reached.map_or((i, i), |(lo, _)| (lo, i)));
            }
        }
        let Some((lo, hi)) = reached else {
            return Ok(None);
        };
        for i in lo + 1..n_cols {
            let here = t.at(i, j);
            t.right[here] = min_turns(plus_one(t.v[here - 1]), t.right[here - 1]);
        }
        for i in (0..hi).rev() {
            let here = t.at(i, j);
            t.left[here] = min_turns(plus_one(t.v[here + 1]), t.left[here + 1]);
        }
    }
    Ok(extract(grid, &t, params).map(|p| MtmSolution::from_path(p, grid)))
}

/// Dispatches on `params.kind`.
pub fn solve_min_turns(grid: &IrradianceGrid, params: &MtmParams) -> Result<Option<MtmSolution>> {
    match params.kind {
        PathKind::General => solve_mtm(grid, params),
        PathKind::NoLeft => solve_mtm_nl(grid, params),
    }
}

fn extract(grid: &IrradianceGrid, t: &Tables, params: &MtmParams) -> Option<GridPath> {
    let top = grid.top_row();
    let states: &[State] = match params.kind {
        PathKind::General => &[State::Vertical, State::Right, State::Left],
        PathKind::NoLeft => &[State::Vertical, State::Right],
    };
    // fewest turns, then vertical arrival, then smallest column
    let (_, state, col) = (0..grid.n_cols())
        .flat_map(|i| states.iter().map(move |&s| (i, s)))
        .filter_map(|(i, s)| t.get(s, i, top).map(|turns| (turns, s, i)))
        .min()?;
    Some(rebuild(t, params, col, top, state))
}

fn rebuild(t: &Tables, params: &MtmParams, col: usize, row: usize, state: State) -> GridPath {
    let start = params.start_col;
    let (mut i, mut j, mut s) = (col, row, state);
    let mut walk: Vec<Vertex> = vec![(i, j)];
    loop {
        if j == 0 {
            // row-0 horizontal states come straight from the origin
            while i < start {
                i += 1;
                walk.push((i, 0));
            }
            while i > start {
                i -= 1;
                walk.push((i, 0));
            }
            break;
        }
        let cur = t.get(s, i, j);
        match s {
            State::Vertical => {
                j -= 1;
                s = if t.get(State::Vertical, i, j) == cur {
                    State::Vertical
                } else if plus_one(t.get(State::Right, i, j)) == cur {
                    State::Right
                } else {
                    State::Left
                };
            }
            State::Right => {
                i -= 1;
                s = if plus_one(t.get(State::Vertical, i, j)) == cur {
                    State::Vertical
                } else {
                    State::Right
                };
            }
            State::Left => {
                i += 1;
                s = if plus_one(t.get(State::Vertical, i, j)) == cur {
                    State::Vertical
                } else {
                    State::Left
                };
            }
        }
        walk.push((i, j));
    }
    walk.reverse();
    GridPath::from_walk(params.kind, &walk)
}

/// Direct feasibility test used to cross-check the solvers.
///
/// General paths can reach any column of a row, so every row below the top
/// needs one in-band cell. No-left paths need a non-decreasing choice of
/// in-band columns starting at `start_col`; taking the smallest admissible
/// column each row is optimal.
pub fn feasibility_check(grid: &IrradianceGrid, params: &MtmParams) -> bool {
    let rows = 0..grid.top_row();
    match params.kind {
        PathKind::General => rows
            .into_iter()
            .all(|j| grid.row(j).iter().any(|&w| params.admits(w))),
        PathKind::NoLeft => {
            let mut col = params.start_col;
            for j in rows {
                match (col..grid.n_cols()).find(|&c| params.admits(grid.weight(c, j))) {
                    Some(c) => col = c,
                    None => return false,
                }
            }
            true
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irradiance::GridAxes;

    fn grid(rows: &[&[f64]]) -> IrradianceGrid {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        IrradianceGrid::from_rows(&rows, GridAxes::default()).unwrap()
    }

    fn grid_a() -> IrradianceGrid {
        grid(&[&[1.0, 5.0, 1.0], &[1.0, 5.0, 1.0], &[0.0, 0.0, 0.0]])
    }

    fn grid_b() -> IrradianceGrid {
        grid(&[&[1.0, 1.0, 9.0], &[9.0, 1.0, 1.0], &[0.0, 0.0, 0.0]])
    }

    #[test]
    fn no_left_band_example() {
        let sol = solve_mtm_nl(&grid_a(), &MtmParams::new(2.0, 5.0, PathKind::NoLeft))
            .unwrap()
            .unwrap();
        assert_eq!(sol.path.waypoints, vec![(0, 0), (1, 0), (1, 2)]);
        assert_eq!(sol.counts.movements, 1);
        assert_eq!(sol.counts.turns, 1);
        assert_eq!(sol.energy, 10.0);
    }

    #[test]
    fn empty_band_is_infeasible() {
        let p = MtmParams::new(6.0, 9.0, PathKind::NoLeft);
        assert!(solve_mtm_nl(&grid_a(), &p).unwrap().is_none());
        assert!(!feasibility_check(&grid_a(), &p));
    }

    #[test]
    fn constant_grid_straight_ascent() {
        let g = IrradianceGrid::new(4, 6, vec![2.5; 24], GridAxes::default()).unwrap();
        for start in 0..4 {
            let mut p = MtmParams::new(0.0, 2.5, PathKind::NoLeft);
            p.start_col = start;
            let sol = solve_mtm_nl(&g, &p).unwrap().unwrap();
            assert_eq!(sol.path.waypoints, vec![(start, 0), (start, 5)]);
            p.kind = PathKind::General;
            let sol = solve_mtm(&g, &p).unwrap().unwrap();
            assert_eq!(sol.counts.movements, 0);
        }
    }

    #[test]
    fn general_band_example() {
        let g = grid_b();
        let sol = solve_mtm(&g, &MtmParams::new(5.0, 9.0, PathKind::General))
            .unwrap()
            .unwrap();
        assert_eq!(
            sol.path.waypoints,
            vec![(0, 0), (2, 0), (2, 1), (0, 1), (0, 2)]
        );
        assert_eq!(sol.counts.movements, 2);
        assert_eq!(sol.counts.turns, 3);
        assert!(
            solve_mtm_nl(&g, &MtmParams::new(5.0, 9.0, PathKind::NoLeft))
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn unbounded_band_needs_no_movement() {
        for g in [grid_a(), grid_b()] {
            let sol = solve_mtm(&g, &MtmParams::new(0.0, f64::INFINITY, PathKind::General))
                .unwrap()
                .unwrap();
            assert_eq!(sol.counts.movements, 0);
        }
    }

    #[test]
    fn general_start_column_can_go_left() {
        // only column 0 is admissible; start at column 2
        let g = grid(&[&[7.0, 1.0, 1.0], &[7.0, 1.0, 1.0], &[0.0; 3]]);
        let mut p = MtmParams::new(5.0, 9.0, PathKind::General);
        p.start_col = 2;
        let sol = solve_mtm(&g, &p).unwrap().unwrap();
        assert_eq!(sol.path.waypoints, vec![(2, 0), (0, 0), (0, 2)]);
        p.kind = PathKind::NoLeft;
        assert!(solve_mtm_nl(&g, &p).unwrap().is_none());
    }

    #[test]
    fn parameter_errors() {
        let g = grid_a();
        assert!(solve_mtm_nl(&g, &MtmParams::new(3.0, 2.0, PathKind::NoLeft)).is_err());
        let mut p = MtmParams::new(0.0, 1.0, PathKind::NoLeft);
        p.start_col = 3;
        assert!(solve_mtm_nl(&g, &p).is_err());
        assert!(solve_mtm(&g, &MtmParams::new(0.0, 1.0, PathKind::NoLeft)).is_err());
        assert!(solve_mtm_nl(&g, &MtmParams::new(0.0, 1.0, PathKind::General)).is_err());
    }

    #[test]
    fn feasibility_examples() {
        // row 0 admits only column 2, row 1 only column 0
        let g = grid_b();
        let p = MtmParams::new(5.0, 9.0, PathKind::General);
        assert!(feasibility_check(&g, &p));
        assert!(!feasibility_check(
            &g,
            &MtmParams {
                kind: PathKind::NoLeft,
                ..p
            }
        ));

        let g = grid(&[&[3.0, 0.0], &[3.0, 0.0], &[3.0, 0.0]]);
        for kind in [PathKind::General, PathKind::NoLeft] {
            assert!(feasibility_check(&g, &MtmParams::new(3.0, 3.0, kind)));
        }

        let g = grid(&[&[3.0, 3.0], &[0.0, 0.0], &[3.0, 3.0], &[3.0, 3.0]]);
        for kind in [PathKind::General, PathKind::NoLeft] {
            assert!(!feasibility_check(&g, &MtmParams::new(3.0, 3.0, kind)));
        }
    }
}
