#![allow(dead_code)]

use rand::Rng;
use trough_sched::{GridAxes, GridPath, IrradianceGrid, PathKind, SynthConfig};

/// Random valid path: on each row an optional rotation, then one step up;
/// optionally a final rotation on the top row.
pub fn random_path(
    rng: &mut impl Rng,
    grid: &IrradianceGrid,
    kind: PathKind,
    start: usize,
) -> GridPath {
    let n = grid.n_cols();
    let mut walk = vec![(start, 0)];
    let mut col = start;
    for j in 0..=grid.top_row() {
        if rng.gen_bool(0.4) {
            let lo = if kind == PathKind::NoLeft { col } else { 0 };
            let target = rng.gen_range(lo..n);
            if target != col {
                walk.push((target, j));
                col = target;
            }
        }
        if j < grid.top_row() {
            walk.push((col, j + 1));
        }
    }
    GridPath::from_walk(kind, &walk)
}

pub fn random_grid(rng: &mut impl Rng, cols: usize, rows: usize, eps: f64) -> IrradianceGrid {
    let weights = (0..cols * rows)
        .map(|_| f64::from(rng.gen_range(0u8..=9)))
        .collect();
    let axes = GridAxes {
        eps_deg: eps,
        ..GridAxes::default()
    };
    IrradianceGrid::new(cols, rows, weights, axes).unwrap()
}

/// Small synthetic day with clouds and jitter drawn from `seed`.
pub fn synthetic(seed: u64, cols: usize, rows: usize) -> IrradianceGrid {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let clouds = (0..rng.gen_range(0..3))
        .map(|_| {
            let a = rng.gen_range(0..rows);
            let b = rng.gen_range(a + 1..=rows);
            (a, b, rng.gen_range(0.1..0.9))
        })
        .collect();
    let cfg = SynthConfig {
        n_cols: cols,
        n_rows: rows,
        acceptance_halfwidth_cols: rng.gen_range(1..4),
        falloff_cols: rng.gen_range(1..6),
        cloud_events: clouds,
        jitter: 0.3,
        rng_seed: seed,
        ..SynthConfig::default()
    };
    trough_sched::synth_day(&cfg).unwrap()
}
