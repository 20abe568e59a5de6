//! Weighted grid graph over (tracker angle × sun time).
//!
//! Column `i` is a tracker-angle sample, row `j` a sun-time sample; row 0 is
//! the start of the day. `weight(i, j)` is the irradiance on the half-open
//! cell `[x_i, x_i + eps) × [y_j, y_j + eps)`, constant over the cell.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis metadata stored alongside the weight matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxes {
    /// Angular cell size in degrees.
    pub eps_deg: f64,
    /// Angle of column 0 in degrees.
    pub sca_start_deg: f64,
    /// Duration of one row in minutes.
    pub time_step_min: f64,
    /// Divisor already applied to the raw irradiance values.
    pub scale: f64,
}

impl Default for GridAxes {
    fn default() -> Self {
        GridAxes {
            eps_deg: 1.0,
            sca_start_deg: 0.0,
            time_step_min: 1.0,
            scale: 1.0,
        }
    }
}

impl GridAxes {
    fn validate(&self) -> Result<()> {
        if !(self.eps_deg.is_finite() && self.eps_deg > 0.0) {
            return Err(Error::Validation(format!(
                "eps_deg must be positive, got {}",
                self.eps_deg
            )));
        }
        if !self.sca_start_deg.is_finite() {
            return Err(Error::Validation("sca_start_deg must be finite".into()));
        }
        if !(self.time_step_min.is_finite() && self.time_step_min > 0.0) {
            return Err(Error::Validation(format!(
                "time_step_min must be positive, got {}",
                self.time_step_min
            )));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::Validation(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        Ok(())
    }
}

/// Rectangular matrix of non-negative cell weights plus axis metadata.
///
/// Immutable once built, so a single grid can be shared by concurrent solves.
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceGrid {
    n_cols: usize,
    n_rows: usize,
    axes: GridAxes,
    // row-major: weights[j * n_cols + i]
    weights: Vec<f64>,
}

impl IrradianceGrid {
    /// Builds a grid from row-major weights (`weights[j * n_cols + i]`).
    pub fn new(n_cols: usize, n_rows: usize, weights: Vec<f64>, axes: GridAxes) -> Result<Self> {
        let grid = IrradianceGrid {
            n_cols,
            n_rows,
            axes,
            weights,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Builds a grid without checking invariants. Every consumer that writes
    /// or solves re-checks with [`IrradianceGrid::validate`].
    #[doc(hidden)]
    pub fn new_unchecked(n_cols: usize, n_rows: usize, weights: Vec<f64>, axes: GridAxes) -> Self {
        IrradianceGrid {
            n_cols,
            n_rows,
            axes,
            weights,
        }
    }

    /// Builds a grid from a list of rows, `rows[j][i] = w[i][j]`.
    pub fn from_rows(rows: &[Vec<f64>], axes: GridAxes) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some((j, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_cols) {
            return Err(Error::Dimension(format!(
                "row {j} has {} values, expected {n_cols}",
                r.len()
            )));
        }
        let weights = rows.iter().flatten().copied().collect();
        Self::new(n_cols, n_rows, weights, axes)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cols < 2 || self.n_rows < 2 {
            return Err(Error::Dimension(format!(
                "grid must be at least 2x2, got {} cols x {} rows",
                self.n_cols, self.n_rows
            )));
        }
        if self.weights.len() != self.n_cols * self.n_rows {
            return Err(Error::Dimension(format!(
                "expected {} weights for {} cols x {} rows, got {}",
                self.n_cols * self.n_rows,
                self.n_cols,
                self.n_rows,
                self.weights.len()
            )));
        }
        if let Some(k) = self
            .weights
            .iter()
            .position(|w| !(w.is_finite() && *w >= 0.0))
        {
            return Err(Error::Validation(format!(
                "weight at col {}, row {} is {} (must be finite and >= 0)",
                k % self.n_cols,
                k / self.n_cols,
                self.weights[k]
            )));
        }
        self.axes.validate()
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn axes(&self) -> &GridAxes {
        &self.axes
    }

    #[inline]
    pub fn eps_deg(&self) -> f64 {
        self.axes.eps_deg
    }

    /// `w[col][row]`.
    #[inline]
    pub fn weight(&self, col: usize, row: usize) -> f64 {
        self.weights[row * self.n_cols + col]
    }

    /// All weights of one row, indexed by column.
    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.weights[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn top_row(&self) -> usize {
        self.n_rows - 1
    }

    /// Largest weight in the grid.
    pub fn global_max(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Sum over rows `0..n_rows-1` of the row maximum: the weight collected by
    /// perfect tracking, an upper bound for any path.
    pub fn row_max_sum(&self) -> f64 {
        (0..self.n_rows - 1)
            .map(|j| self.row(j).iter().copied().fold(0.0, f64::max))
            .sum()
    }

    /// Copy of the grid with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let weights = self.weights.iter().map(|w| w * factor).collect();
        Self::new(self.n_cols, self.n_rows, weights, self.axes)
    }

    /// Sub-grid over vertex rows `first..=last`, all columns.
    pub fn row_band(&self, first: usize, last: usize) -> Result<Self> {
        if last >= self.n_rows || last <= first {
            return Err(Error::Dimension(format!(
                "row band {first}..={last} is not a valid band of {} rows",
                self.n_rows
            )));
        }
        let weights = self.weights[first * self.n_cols..(last + 1) * self.n_cols].to_vec();
        Self::new(self.n_cols, last - first + 1, weights, self.axes)
    }
}

/// Largest weight of `grid`.
pub fn global_max(grid: &IrradianceGrid) -> f64 {
    grid.global_max()
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads a headerless CSV matrix (one line per row, one field per column)
/// plus its key-value metadata file.
pub fn load_grid(matrix_path: &Path, meta_path: &Path) -> Result<IrradianceGrid> {
    let meta_text = read_to_string(meta_path)?;
    let axes: GridAxes = toml::from_str(&meta_text).map_err(|e| Error::Schema {
        path: meta_path.to_path_buf(),
        message: e.message().to_string(),
    })?;

    let file = fs::File::open(matrix_path).map_err(|e| Error::io(matrix_path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut n_cols = None;
    let mut n_rows = 0usize;
    let mut weights = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            path: matrix_path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            column: 0,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(n_rows as u64 + 1, |p| p.line());
        let expected = *n_cols.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Dimension(format!(
                "{}: line {line} has {} fields, expected {expected}",
                matrix_path.display(),
                record.len()
            )));
        }
        for (c, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                path: matrix_path.to_path_buf(),
                line,
                column: c + 1,
                message: format!("not a number: {field:?}"),
            })?;
            weights.push(value);
        }
        n_rows += 1;
    }
    IrradianceGrid::new(n_cols.unwrap_or(0), n_rows, weights, axes)
}

/// Writes the matrix and metadata files read by [`load_grid`]. Values are
/// written in shortest round-trip decimal form, so loading is bit-exact.
pub fn save_grid(grid: &IrradianceGrid, matrix_path: &Path, meta_path: &Path) -> Result<()> {
    grid.validate()?;

    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(matrix_path)
        .map_err(|e| csv_io(matrix_path, e))?;
    for j in 0..grid.n_rows() {
        writer
            .write_record(grid.row(j).iter().map(|w| w.to_string()))
            .map_err(|e| csv_io(matrix_path, e))?;
    }
    writer.flush().map_err(|e| Error::io(matrix_path, e))?;

    let meta = toml::to_string(grid.axes()).expect("axes serialize to toml");
    fs::write(meta_path, meta).map_err(|e| Error::io(meta_path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Parameters of a synthetic clear/cloudy day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_cols: usize,
    pub n_rows: usize,
    /// Midday direct-normal irradiance peak, before `axes.scale` is applied.
    pub peak_dni: f64,
    /// Half-width, in columns, of the acceptance plateau around the aligned column.
    pub acceptance_halfwidth_cols: usize,
    /// Width, in columns, of the linear falloff beyond the plateau.
    pub falloff_cols: usize,
    /// Relative drop from the aligned column to the plateau edge. Zero gives a
    /// perfectly flat top; a small positive value makes the aligned column the
    /// unique row maximum.
    pub plateau_crown: f64,
    /// `(start_row, end_row, attenuation)`: rows `start_row..end_row` have
    /// their DNI multiplied by `attenuation`.
    pub cloud_events: Vec<(usize, usize, f64)>,
    /// Amplitude of multiplicative per-cell jitter in `[0, 1]`; zero disables it.
    pub jitter: f64,
    pub rng_seed: u64,
    pub axes: GridAxes,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_cols: 161,
            n_rows: 840,
            peak_dni: 900.0,
            acceptance_halfwidth_cols: 3,
            falloff_cols: 6,
            plateau_crown: 0.01,
            cloud_events: Vec::new(),
            jitter: 0.0,
            rng_seed: 0,
            axes: GridAxes {
                eps_deg: 1.0,
                sca_start_deg: 10.0,
                time_step_min: 1.0,
                scale: 1000.0,
            },
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_cols < 2 || self.n_rows < 2 {
            return Err(Error::Dimension(format!(
                "synthetic grid must be at least 2x2, got {} x {}",
                self.n_cols, self.n_rows
            )));
        }
        if !(self.peak_dni.is_finite() && self.peak_dni > 0.0) {
            return Err(Error::Validation("peak_dni must be positive".into()));
        }
        if self.acceptance_halfwidth_cols == 0 || self.falloff_cols == 0 {
            return Err(Error::Validation(
                "acceptance_halfwidth_cols and falloff_cols must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.plateau_crown) {
            return Err(Error::Validation("plateau_crown must lie in [0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.jitter) {
            return Err(Error::Validation("jitter must lie in [0, 1]".into()));
        }
        for &(start, end, att) in &self.cloud_events {
            if start >= end || end > self.n_rows {
                return Err(Error::Validation(format!(
                    "cloud event rows {start}..{end} outside [0, {})",
                    self.n_rows
                )));
            }
            if !(0.0..=1.0).contains(&att) {
                return Err(Error::Validation(format!(
                    "cloud attenuation {att} outside [0, 1]"
                )));
            }
        }
        self.axes.validate()
    }

    /// Column aligned with the sun at row `j`: rows map linearly onto columns.
    pub fn align(&self, j: usize) -> usize {
        let span_rows = self.n_rows - 1;
        (j * (self.n_cols - 1) + span_rows / 2) / span_rows
    }

    /// Symmetric bell over the day, exactly zero at both edges.
    pub fn bell(&self, j: usize) -> f64 {
        if j == 0 || j >= self.n_rows - 1 {
            return 0.0;
        }
        (PI * j as f64 / (self.n_rows - 1) as f64).sin()
    }

    pub fn dni(&self, j: usize) -> f64 {
        let clouds: f64 = self
            .cloud_events
            .iter()
            .filter(|(s, e, _)| (*s..*e).contains(&j))
            .map(|(_, _, a)| a)
            .product();
        self.peak_dni * self.bell(j) * clouds
    }

    /// Acceptance kernel as a function of column distance from alignment.
    pub fn kernel(&self, distance: usize) -> f64 {
        let half = self.acceptance_halfwidth_cols;
        if distance <= half {
            1.0 - self.plateau_crown * distance as f64 / half as f64
        } else if distance < half + self.falloff_cols {
            let edge = 1.0 - self.plateau_crown;
            edge * (1.0 - (distance - half) as f64 / self.falloff_cols as f64)
        } else {
            0.0
        }
    }
}

/// Synthesizes a day: `w[i][j] = DNI(j) * kernel(|i - align(j)|)`, optionally
/// jittered, divided by `axes.scale`.
pub fn synth_day(config: &SynthConfig) -> Result<IrradianceGrid> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut weights = Vec::with_capacity(config.n_cols * config.n_rows);
    for j in 0..config.n_rows {
        let dni = config.dni(j);
        let center = config.align(j);
        for i in 0..config.n_cols {
            let mut w = dni * config.kernel(i.abs_diff(center));
            if config.jitter > 0.0 {
                w *= 1.0 - config.jitter * rng.gen::<f64>();
            }
            weights.push(w / config.axes.scale);
        }
    }
    IrradianceGrid::new(config.n_cols, config.n_rows, weights, config.axes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_a_rows() -> Vec<Vec<f64>> {
        vec![vec![1.0, 5.0, 1.0], vec![1.0, 5.0, 1.0]]
    }

    fn small_synth() -> SynthConfig {
        SynthConfig {
            n_cols: 21,
            n_rows: 60,
            peak_dni: 800.0,
            acceptance_halfwidth_cols: 2,
            falloff_cols: 3,
            axes: GridAxes::default(),
            ..SynthConfig::default()
        }
    }

    #[test]
    fn global_max_examples() {
        let g = IrradianceGrid::from_rows(&grid_a_rows(), GridAxes::default()).unwrap();
        assert_eq!(g.n_cols(), 3);
        assert_eq!(g.n_rows(), 2);
        assert_eq!(g.weight(1, 0), 5.0);
        assert_eq!(global_max(&g), 5.0);
        assert_eq!(global_max(&g.scaled(2.0).unwrap()), 10.0);

        let zero = IrradianceGrid::new(3, 3, vec![0.0; 9], GridAxes::default()).unwrap();
        assert_eq!(global_max(&zero), 0.0);
    }

    #[test]
    fn invariants_rejected() {
        let axes = GridAxes::default();
        assert!(matches!(
            IrradianceGrid::new(1, 1, vec![1.0], axes),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            IrradianceGrid::new(2, 2, vec![1.0; 3], axes),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            IrradianceGrid::new(2, 2, vec![1.0, f64::NAN, 0.0, 0.0], axes),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            IrradianceGrid::new(2, 2, vec![1.0, -1.0, 0.0, 0.0], axes),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            IrradianceGrid::from_rows(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0]], axes),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn row_band_extracts_rows() {
        let rows: Vec<Vec<f64>> = (0..5).map(|j| vec![j as f64, 10.0 + j as f64]).collect();
        let g = IrradianceGrid::from_rows(&rows, GridAxes::default()).unwrap();
        let band = g.row_band(2, 4).unwrap();
        assert_eq!(band.n_rows(), 3);
        assert_eq!(band.weight(1, 0), 12.0);
        assert!(g.row_band(3, 3).is_err());
        assert!(g.row_band(3, 5).is_err());
    }

    #[test]
    fn synth_aligned_column_is_row_argmax() {
        let cfg = small_synth();
        let g = synth_day(&cfg).unwrap();
        // the edge rows are all zero
        for j in 1..cfg.n_rows - 1 {
            let row = g.row(j);
            let best = row
                .iter()
                .enumerate()
                .fold(0, |b, (i, w)| if *w > row[b] { i } else { b });
            assert_eq!(best, cfg.align(j), "row {j}");
        }
        let aligns: Vec<usize> = (0..cfg.n_rows).map(|j| cfg.align(j)).collect();
        assert!(aligns.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(aligns[0], 0);
        assert_eq!(*aligns.last().unwrap(), cfg.n_cols - 1);
    }

    #[test]
    fn synth_linear_in_peak() {
        let cfg = small_synth();
        let doubled = SynthConfig {
            peak_dni: 2.0 * cfg.peak_dni,
            ..cfg.clone()
        };
        let a = synth_day(&cfg).unwrap();
        let b = synth_day(&doubled).unwrap();
        for j in 0..cfg.n_rows {
            for i in 0..cfg.n_cols {
                assert_eq!(b.weight(i, j), 2.0 * a.weight(i, j));
            }
        }
    }

    #[test]
    fn synth_deterministic_and_bounded() {
        let cfg = SynthConfig {
            jitter: 0.3,
            rng_seed: 42,
            cloud_events: vec![(10, 20, 0.4), (15, 30, 0.5)],
            ..small_synth()
        };
        let a = synth_day(&cfg).unwrap();
        let b = synth_day(&cfg).unwrap();
        assert_eq!(a, b);
        let other = synth_day(&SynthConfig {
            rng_seed: 43,
            ..cfg.clone()
        })
        .unwrap();
        assert_ne!(a, other);
        for j in 0..cfg.n_rows {
            for &w in a.row(j) {
                assert!((0.0..=cfg.peak_dni).contains(&w));
            }
        }
        // edges of the day are dark
        assert!(a.row(0).iter().all(|w| *w == 0.0));
        assert!(a.row(cfg.n_rows - 1).iter().all(|w| *w == 0.0));
    }

    #[test]
    fn synth_config_rejects_bad_clouds() {
        let cfg = SynthConfig {
            cloud_events: vec![(50, 70, 0.5)],
            ..small_synth()
        };
        assert!(synth_day(&cfg).is_err());
        let cfg = SynthConfig {
            cloud_events: vec![(5, 7, 1.5)],
            ..small_synth()
        };
        assert!(synth_day(&cfg).is_err());
    }

    #[test]
    fn kernel_shape() {
        let cfg = SynthConfig {
            acceptance_halfwidth_cols: 2,
            falloff_cols: 4,
            plateau_crown: 0.0,
            ..SynthConfig::default()
        };
        assert_eq!(cfg.kernel(0), 1.0);
        assert_eq!(cfg.kernel(2), 1.0);
        assert_eq!(cfg.kernel(4), 0.5);
        assert_eq!(cfg.kernel(6), 0.0);
        assert_eq!(cfg.kernel(100), 0.0);
    }
}
