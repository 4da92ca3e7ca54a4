//! Pseudo-spectral simulation of periodic two-dimensional capillary-gravity
//! water waves in conformal (Riemann) coordinates, with the weighted energy
//! functionals used to compare two solutions in the vanishing surface tension
//! limit.

pub mod bracket;
pub mod energies;
pub mod error;
pub mod exec;
pub mod initial_data;
pub mod pair;
pub mod spectral;
pub mod waterwave;

pub use error::{Error, Result};
pub use exec::Exec;
pub use spectral::{make_grid, Field, SpectralGrid};
