//! Joint spectra of Hermitian matrix pairs.

pub mod almost;
pub mod decompose;
pub mod eigen;
pub mod error;
pub mod exterior;
pub mod gallery;
pub mod io;
pub mod matrix;
pub mod pencil;
pub mod plot;
pub mod poly;
pub mod roots;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Real, C};
pub use decompose::{DecomposeOptions, DecompositionReport, Verdict};
pub use matrix::{CMatrix, Hermitian};
pub use poly::{BiPoly, Line, PolyDisk};

pub type Matrix = CMatrix<f64>;
pub type HermitianMatrix = Hermitian<f64>;
pub type Polynomial = BiPoly<f64>;
pub type Matrix32 = CMatrix<f32>;
pub type HermitianMatrix32 = Hermitian<f32>;
pub type Polynomial32 = BiPoly<f32>;
