//! Spectral laboratory on the periodic torus.
//!
//! Fields live on a uniform lattice over `[0, L)^n`. Everything else is built
//! on Fourier multipliers: Poisson and heat semigroups, fractional powers of
//! the Laplacian, Riesz transforms and the Leray projector. On top of that sit
//! Campanato/BMO/Q norms of traces, Carleson-box norms of semigroup extensions,
//! a corpus of seeded test functions, an equivalence harness, and a small
//! pseudospectral Navier-Stokes solver in mild (Duhamel) form.

pub mod boxes;
pub mod corpus;
pub mod error;
pub mod extensions;
mod fft;
pub mod grid;
pub mod io;
pub mod norms;
pub mod ns3d;
pub mod quadrature;
pub mod spectral;
pub mod verify;

pub use boxes::{BallRadius, BoxFamily, BoxSpec};
pub use error::{Error, Result};
pub use extensions::{ExtensionStack, SemigroupKind};
pub use grid::{Field, SpectralField, TorusGrid};
pub use quadrature::TimeMesh;
