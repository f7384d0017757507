//! Finite-volume discretization on a uniform 1-D grid with no-flux boundaries.

mod grid;
mod scheme;
mod simulate;

pub use grid::{Grid1D, StateField};
pub use scheme::{face_flux, step, StepOutput};
pub use simulate::{simulate, SeriesRow, TimeConfig, Trajectory};
