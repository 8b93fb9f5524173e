//! The continuum side: cumulants, the Lévy process `ξ`, Lamperti transforms
//! and cell systems of the growth-fragmentation.
//!
//! Daughters start with exactly the mass lost by their mother. The discrete
//! cell systems of the peeling give daughters one more unit of perimeter;
//! that convention lives in [`crate::layers`].

pub mod cells;
pub mod cumulants;
pub mod jumps;
pub mod levy;
pub mod quad;

pub use cells::{simulate_cell_system, Cell, CellConfig, CellEngine, CellSystem};
pub use cumulants::{kappa, kappa_integral, psi, psi_prime0};
pub use jumps::JumpSampler;
pub use levy::{expm1_ratio, lamperti, mass_along, sample_xi_at, sample_xi_pair, simulate_xi, Band, Index, LampertiPath, LevyConfig, LevyPath};
