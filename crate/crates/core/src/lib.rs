//! Exact symbolic machinery for generalized finite and affine W-algebras
//! attached to pairs of partitions (λ, μ): pyramid combinatorics, the
//! centralizer 𝔞 = 𝔤^e with its μ-gradation, PBW arithmetic in U(𝔞) with
//! reduction modulo I_{λ,μ}, explicit generator families for the principal
//! and minimal shapes of μ, a λ-bracket calculus over ℚ\[k\], and the BRST
//! complexes with their differentials and verification reports.
//!
//! Everything is exact: scalars are arbitrary-precision rationals, vertex
//! coefficients are polynomials in the level symbol `k`.

pub mod error;
pub mod scalar;

pub mod pyramid;

mod linalg;

pub mod centralizer;
pub mod uea;

pub mod finite_w;

pub mod vertex;

pub mod brst;

pub mod axioms;

pub mod text;

pub use error::{Error, Result};
pub use pyramid::Pyramid;
