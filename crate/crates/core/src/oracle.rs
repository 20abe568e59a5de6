//! Exhaustive enumeration of restricted collector paths on small grids.
//!
//! Test oracle only: it shares nothing with the dynamic programs beyond the
//! path model, and refuses grids beyond [`EnumLimits`].

use crate::error::{Error, Result};
use crate::irradiance::IrradianceGrid;
use crate::path::{GridPath, PathKind, Vertex};

pub const MAX_ENUM_SIDE: usize = 6;
pub const MAX_ENUM_MOVEMENTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumLimits {
    pub max_cols: usize,
    pub max_rows: usize,
    pub max_movements: usize,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits {
            max_cols: MAX_ENUM_SIDE,
            max_rows: MAX_ENUM_SIDE,
            max_movements: MAX_ENUM_MOVEMENTS,
        }
    }
}

impl EnumLimits {
    fn check(&self, grid: &IrradianceGrid, start_col: usize) -> Result<()> {
        if self.max_cols > MAX_ENUM_SIDE
            || self.max_rows > MAX_ENUM_SIDE
            || self.max_movements > MAX_ENUM_MOVEMENTS
        {
            return Err(Error::Size(format!(
                "limits {self:?} exceed the hard caps ({MAX_ENUM_SIDE} per side, {MAX_ENUM_MOVEMENTS} movements)"
            )));
        }
        if grid.n_cols() > self.max_cols || grid.n_rows() > self.max_rows {
            return Err(Error::Size(format!(
                "grid is {} x {}, limit is {} x {}",
                grid.n_cols(),
                grid.n_rows(),
                self.max_cols,
                self.max_rows
            )));
        }
        if start_col >= grid.n_cols() {
            return Err(Error::Validation(format!(
                "start column {start_col} outside 0..{}",
                grid.n_cols()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    Vertical,
    Horizontal,
}

struct Enumerator<'a> {
    grid: &'a IrradianceGrid,
    kind: PathKind,
    start_col: usize,
    max_movements: usize,
    stack: Vec<Vertex>,
    out: Vec<GridPath>,
}

impl Enumerator<'_> {
    fn emit(&mut self) {
        self.out
            .push(GridPath::new(self.kind, self.start_col, self.stack.clone()));
    }

    fn horizontal_targets(&self, col: usize) -> Vec<usize> {
        (0..self.grid.n_cols())
            .filter(|&c| c != col && (self.kind == PathKind::General || c > col))
            .collect()
    }

    fn extend(&mut self, last: Option<Axis>, movements: usize) {
        let (col, row) = *self.stack.last().expect("non-empty stack");
        let top = self.grid.top_row();
        if row == top {
            self.emit();
        }
        if last != Some(Axis::Vertical) && row < top {
            for r in row + 1..=top {
                self.stack.push((col, r));
                self.extend(Some(Axis::Vertical), movements);
                self.stack.pop();
            }
        }
        if last != Some(Axis::Horizontal) && movements < self.max_movements {
            for c in self.horizontal_targets(col) {
                self.stack.push((c, row));
                self.extend(Some(Axis::Horizontal), movements + 1);
                self.stack.pop();
            }
        }
    }
}

/// Every valid path of `kind` from `(start_col, 0)` to the top row with at
/// most `limits.max_movements` horizontal segments.
pub fn enumerate_paths(
    grid: &IrradianceGrid,
    kind: PathKind,
    limits: EnumLimits,
    start_col: usize,
) -> Result<Vec<GridPath>> {
    limits.check(grid, start_col)?;
    let mut e = Enumerator {
        grid,
        kind,
        start_col,
        max_movements: limits.max_movements,
        stack: vec![(start_col, 0)],
        out: Vec::new(),
    };
    e.extend(None, 0);
    Ok(e.out)
}

fn in_band(path: &GridPath, grid: &IrradianceGrid, u1: f64, u2: f64) -> bool {
    path.vertical_points().into_iter().all(|(i, j)| {
        let w = grid.weight(i, j);
        u1 <= w && w <= u2
    })
}

/// Minimum turn count over all band-respecting paths, `None` if none exist.
pub fn oracle_mtm(
    grid: &IrradianceGrid,
    u1: f64,
    u2: f64,
    kind: PathKind,
    start_col: usize,
) -> Result<Option<usize>> {
    // one horizontal segment per row at most, so this cap is exhaustive
    let limits = EnumLimits {
        max_movements: grid.n_rows().min(MAX_ENUM_MOVEMENTS),
        ..EnumLimits::default()
    };
    let paths = enumerate_paths(grid, kind, limits, start_col)?;
    Ok(paths
        .iter()
        .filter(|p| in_band(p, grid, u1, u2))
        .map(|p| p.counts().turns)
        .min())
}

/// Best path found by exhaustive search under a movement budget.
pub fn oracle_mec_path(
    grid: &IrradianceGrid,
    moves_budget: usize,
    kind: PathKind,
    start_col: usize,
) -> Result<GridPath> {
    let limits = EnumLimits {
        max_movements: moves_budget.min(grid.n_rows()).min(MAX_ENUM_MOVEMENTS),
        ..EnumLimits::default()
    };
    let paths = enumerate_paths(grid, kind, limits, start_col)?;
    let best = paths
        .into_iter()
        .map(|p| (p.weight_sum(grid), p))
        .fold(None::<(f64, GridPath)>, |best, (s, p)| match best {
            Some((b, _)) if b >= s => best,
            _ => Some((s, p)),
        })
        .expect("the straight ascent always exists");
    Ok(best.1)
}

/// Maximal vertical-point weight sum under a movement budget.
pub fn oracle_mec(
    grid: &IrradianceGrid,
    moves_budget: usize,
    kind: PathKind,
    start_col: usize,
) -> Result<f64> {
    Ok(oracle_mec_path(grid, moves_budget, kind, start_col)?.weight_sum(grid))
}
