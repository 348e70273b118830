//! Frequency grids, the remainder representation and the weighted sup norms.

mod equation;
mod grid;
mod interp;
mod io;
mod norms;
mod profile;

pub use equation::Equation;
pub use grid::{FrequencyGrid, GridSpec};
pub use interp::Pchip;
pub use io::{read_profile, write_profile, Sidecar};
pub use norms::{distance, japanese, weighted_norm_y, weighted_norm_z, y_norm_of, z_norm_of, NormReport};
pub use profile::{Branch, Origin, Profile, Tail};
