//! Radial discretisation of functions on ℝ².

pub mod basis;
pub mod bessel;
pub mod field;
pub mod grid;
pub mod interp;
pub mod io;
pub mod ops;

pub use basis::ModalBasis;
pub use field::RadialField;
pub use grid::{make_grid, GridKind, GridSpec, RadialGrid, MIN_NODES};
pub use ops::{gradient, h1_norms, hankel_transform, integrate, laplacian, Direction, H1Norms};
