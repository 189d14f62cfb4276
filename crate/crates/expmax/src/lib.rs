//! Numerical laboratory for non-centered Hardy-Littlewood maximal operators
//! under the exponential measure `dμ = exp(-|x|₁) dx` restricted to the open
//! positive orthant, and its Laguerre-type generalizations.
//!
//! The crate is organized around five concerns:
//!
//! * [`geometry`] — metric balls (diamonds / Euclidean balls / cubes),
//!   minimizing points, cone rotations, slices and shadows;
//! * [`measure`] — log-domain measure values, exact cube products, slice
//!   quadrature and seeded importance-sampled Monte Carlo;
//! * [`maximal`] — discretized maximal operators on grid functions with a
//!   pruned candidate search, norms and weak-type functionals;
//! * [`counterexamples`] — the swept cube/ball families and the diamond
//!   witness whose weak-type functionals blow up;
//! * [`oracle`] — numerical certificates for the geometric lemmas behind the
//!   `L^p` bounds (root formulas, covering parallelepipeds, slicing decay);
//! * [`experiments`] — orchestrated sweeps producing reproducible tables.

pub mod counterexamples;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod logdomain;
pub mod maximal;
pub mod measure;
pub mod oracle;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
