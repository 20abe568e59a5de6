//! Restricted collector paths on the grid: turn-point representation,
//! structural validation, vertical points, energy and movement counts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::irradiance::IrradianceGrid;

/// Whether the tracker may rotate backward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    General,
    NoLeft,
}

impl fmt::Display for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathKind::General => write!(f, "general"),
            PathKind::NoLeft => write!(f, "no_left"),
        }
    }
}

/// A grid vertex as `(col, row)`.
pub type Vertex = (usize, usize);

/// Turn points of a path from `(start_col, 0)` to the top row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPath {
    pub kind: PathKind,
    pub start_col: usize,
    pub waypoints: Vec<Vertex>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCounts {
    pub waypoints: usize,
    /// Horizontal segments, i.e. tracker rotations.
    pub movements: usize,
    /// Interior waypoints where the path changes axis.
    pub turns: usize,
}

/// First clause of the path definition that a path breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathViolation {
    TooShort,
    Bounds { index: usize, vertex: Vertex },
    Start { found: Vertex, expected: Vertex },
    End { row: usize, top: usize },
    Repeated { index: usize },
    Diagonal { index: usize },
    Monotonicity { index: usize },
    Kind { index: usize },
    Redundancy { index: usize },
}

impl fmt::Display for PathViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathViolation::TooShort => write!(f, "path needs at least two waypoints"),
            PathViolation::Bounds { index, vertex } => {
                write!(
                    f,
                    "bounds violation: waypoint {index} {vertex:?} is off the grid"
                )
            }
            PathViolation::Start { found, expected } => {
                write!(
                    f,
                    "start violation: path starts at {found:?}, expected {expected:?}"
                )
            }
            PathViolation::End { row, top } => {
                write!(
                    f,
                    "end violation: path ends on row {row}, expected top row {top}"
                )
            }
            PathViolation::Repeated { index } => {
                write!(f, "repeated waypoint at index {index}")
            }
            PathViolation::Diagonal { index } => {
                write!(f, "segment ending at waypoint {index} is not axis-aligned")
            }
            PathViolation::Monotonicity { index } => {
                write!(
                    f,
                    "monotonicity violation: row decreases at waypoint {index}"
                )
            }
            PathViolation::Kind { index } => {
                write!(
                    f,
                    "kind violation: leftward segment ending at waypoint {index}"
                )
            }
            PathViolation::Redundancy { index } => {
                write!(
                    f,
                    "redundancy violation: waypoint {index} is collinear with its neighbours"
                )
            }
        }
    }
}

impl std::error::Error for PathViolation {}

impl GridPath {
    pub fn new(kind: PathKind, start_col: usize, waypoints: Vec<Vertex>) -> Self {
        GridPath {
            kind,
            start_col,
            waypoints,
        }
    }

    /// Builds the turn-point form of a walk given as adjacent grid vertices.
    /// Repeated vertices are dropped and collinear runs merged.
    pub fn from_walk(kind: PathKind, walk: &[Vertex]) -> Self {
        let mut points: Vec<Vertex> = Vec::with_capacity(walk.len());
        for &v in walk {
            if points.last() == Some(&v) {
                continue;
            }
            if points.len() >= 2 {
                let a = points[points.len() - 2];
                let b = points[points.len() - 1];
                if (a.0 == b.0 && b.0 == v.0) || (a.1 == b.1 && b.1 == v.1) {
                    points.pop();
                }
            }
            points.push(v);
        }
        let start_col = points.first().map_or(0, |v| v.0);
        GridPath::new(kind, start_col, points)
    }

    /// Checks the path against every structural clause on `grid`.
    pub fn validate(&self, grid: &IrradianceGrid) -> Result<(), PathViolation> {
        let w = &self.waypoints;
        if w.len() < 2 {
            return Err(PathViolation::TooShort);
        }
        if let Some((index, &vertex)) = w
            .iter()
            .enumerate()
            .find(|(_, v)| v.0 >= grid.n_cols() || v.1 >= grid.n_rows())
        {
            return Err(PathViolation::Bounds { index, vertex });
        }
        let expected = (self.start_col, 0);
        if w[0] != expected {
            return Err(PathViolation::Start {
                found: w[0],
                expected,
            });
        }
        let last_row = w[w.len() - 1].1;
        if last_row != grid.top_row() {
            return Err(PathViolation::End {
                row: last_row,
                top: grid.top_row(),
            });
        }
        for (k, pair) in w.windows(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            let index = k + 1;
            if a == b {
                return Err(PathViolation::Repeated { index });
            }
            if a.0 != b.0 && a.1 != b.1 {
                return Err(PathViolation::Diagonal { index });
            }
            if b.1 < a.1 {
                return Err(PathViolation::Monotonicity { index });
            }
            if self.kind == PathKind::NoLeft && b.0 < a.0 {
                return Err(PathViolation::Kind { index });
            }
        }
        for (k, t) in w.windows(3).enumerate() {
            if (t[0].0 == t[1].0 && t[1].0 == t[2].0) || (t[0].1 == t[1].1 && t[1].1 == t[2].1) {
                return Err(PathViolation::Redundancy { index: k + 1 });
            }
        }
        Ok(())
    }

    /// Vertices on vertical segments, excluding each segment's upper endpoint,
    /// in path order (which is also row order).
    pub fn vertical_points(&self) -> Vec<Vertex> {
        let mut out = Vec::new();
        for pair in self.waypoints.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a.0 == b.0 && b.1 > a.1 {
                out.extend((a.1..b.1).map(|row| (a.0, row)));
            }
        }
        out
    }

    /// Sum of weights over vertical points.
    pub fn weight_sum(&self, grid: &IrradianceGrid) -> f64 {
        self.vertical_points()
            .into_iter()
            .fold(0.0, |acc, (i, j)| acc + grid.weight(i, j))
    }

    /// Collected energy: `eps * sum of vertical-point weights`.
    pub fn energy(&self, grid: &IrradianceGrid) -> f64 {
        grid.eps_deg() * self.weight_sum(grid)
    }

    pub fn counts(&self) -> PathCounts {
        let w = &self.waypoints;
        let movements = w.windows(2).filter(|p| p[0].1 == p[1].1).count();
        let turns = w
            .windows(3)
            .filter(|t| (t[0].0 == t[1].0) != (t[1].0 == t[2].0))
            .count();
        PathCounts {
            waypoints: w.len(),
            movements,
            turns,
        }
    }

    /// Column of the final waypoint.
    pub fn final_col(&self) -> usize {
        self.waypoints.last().map_or(self.start_col, |v| v.0)
    }

    /// Every grid vertex the path passes through, in order.
    pub fn expanded(&self) -> Vec<Vertex> {
        let mut out = Vec::new();
        if let Some(&first) = self.waypoints.first() {
            out.push(first);
        }
        for pair in self.waypoints.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let mut cur = a;
            while cur != b {
                cur = (step_toward(cur.0, b.0), step_toward(cur.1, b.1));
                out.push(cur);
            }
        }
        out
    }

    /// Drops a trailing horizontal segment on the top row; energy is unchanged.
    pub fn without_terminal_rotation(&self) -> GridPath {
        let mut out = self.clone();
        let n = out.waypoints.len();
        if n >= 2 && out.waypoints[n - 1].1 == out.waypoints[n - 2].1 {
            out.waypoints.pop();
        }
        out
    }

    pub fn record(&self, grid: &IrradianceGrid) -> PathRecord {
        PathRecord {
            kind: self.kind,
            start_col: self.start_col,
            waypoints: self.waypoints.iter().map(|&(i, j)| [i, j]).collect(),
            counts: self.counts(),
            energy: self.energy(grid),
        }
    }
}

fn step_toward(from: usize, to: usize) -> usize {
    match from.cmp(&to) {
        std::cmp::Ordering::Less => from + 1,
        std::cmp::Ordering::Greater => from - 1,
        std::cmp::Ordering::Equal => from,
    }
}

/// JSON form of a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub kind: PathKind,
    pub start_col: usize,
    pub waypoints: Vec<[usize; 2]>,
    pub counts: PathCounts,
    pub energy: f64,
}

/// Perfect-tracking baseline from column 0: for every row `j` below the top
/// the path crosses to row `j + 1` at the row's argmax column (ties go to the
/// smallest column).
pub fn reference_tracking_path(grid: &IrradianceGrid) -> GridPath {
    let mut walk: Vec<Vertex> = vec![(0, 0)];
    let mut col = 0usize;
    for j in 0..grid.top_row() {
        let row = grid.row(j);
        let best = row
            .iter()
            .enumerate()
            .fold(0, |b, (i, w)| if *w > row[b] { i } else { b });
        if best != col {
            walk.push((best, j));
            col = best;
        }
        walk.push((col, j + 1));
    }
    GridPath::from_walk(PathKind::General, &walk)
}
