//! Matrix-level sweeping preconditioners for the two-dimensional Helmholtz
//! equation `Δu + k²u = f` on the unit square.

pub mod linalg;
pub mod assembly;
pub mod harness;
pub mod mesh;
pub mod partition;
pub mod precond;
pub mod transmission;

pub use num_complex::Complex64 as C64;
