//! Exact moment computations and bias diagnostics for three kinds of
//! coefficient families: elliptic-curve traces in one-parameter families,
//! Dirichlet character sums, and holomorphic cusp form data.
//!
//! Everything that can be an integer identity is computed in integer
//! arithmetic (`i64`/`i128`, exact rationals) and cross-checked against an
//! independent brute-force route. Floats appear only where the quantity is
//! genuinely real: normalized error terms, Bessel values, Hecke eigenvalues,
//! logarithmic densities.
//!
//! Module map:
//! - [`modular`]: primality, Legendre symbols, complete character sums,
//!   two-square / a²+3b² decompositions, power-residue classes, prime tables.
//! - [`elliptic`]: one-parameter Weierstrass families, brute-force and
//!   semi-analytic moments, closed forms, bias sweeps.
//! - [`constant_j`]: families with constant j-invariant 0 / 1728, where
//!   traces come in finitely many values per prime.
//! - [`dirichlet`]: character groups, second-moment identities, prime-race
//!   statistics, torsion subfamilies, convolutions.
//! - [`petersson`]: Kloosterman/Ramanujan sums, Bessel averages, the
//!   discriminant cusp form, dimension and prime-sum skeletons.

pub mod constant_j;
pub mod dirichlet;
pub mod elliptic;
pub mod error;
pub mod modular;
pub mod petersson;

pub use error::{Error, Result};
