//! Wear-aware scheduling of a single-axis parabolic-trough tracker.
//!
//! The day is discretized into a grid of (tracker angle × sun time) cells with
//! constant irradiance. A tracking schedule is a staircase path from the
//! morning position to the end of the day: vertical segments collect energy
//! while the tracker is parked, horizontal segments are rotations. Two exact
//! dynamic programs are provided:
//!
//! * [`mtm`]: fewest rotations such that every parked cell lies in an
//!   irradiance band `[u1, u2]`;
//! * [`mec`]: most energy under a rotation budget.
//!
//! [`oracle`] enumerates all paths on tiny grids to certify both, and
//! [`harness`] runs threshold sweeps, budget sweeps and split-horizon
//! forecast experiments.

pub mod cli;
pub mod error;
pub mod harness;
pub mod irradiance;
pub mod mec;
pub mod mtm;
pub mod oracle;
pub mod path;

pub use error::{Error, Result};
pub use irradiance::{
    global_max, load_grid, save_grid, synth_day, GridAxes, IrradianceGrid, SynthConfig,
};
pub use mec::{
    min_moves_for_fraction, solve_max_energy, solve_mec, solve_mec_nl, BudgetUnit, MecParams,
    MecSolution,
};
pub use mtm::{
    feasibility_check, solve_min_turns, solve_mtm, solve_mtm_nl, MtmParams, MtmSolution,
};
pub use path::{reference_tracking_path, GridPath, PathCounts, PathKind, PathViolation};
