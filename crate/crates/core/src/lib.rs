//! Computational backend for class groups of imaginary quadratic fields,
//! Heegner points on modular curves, Dirichlet L-data, Dedekind eta
//! invariants, root numbers, and heights on modular elliptic curves.
//!
//! The crate is organized around desk-scale numerical verification: every
//! analytic quantity is available through at least two independent routes
//! (a smoothed sum and a closed form, a series and a finite difference, a
//! limit and an exact formula), and the test suite holds the routes against
//! each other at stated tolerances.

pub mod dirichlet_l;
pub mod elliptic_curve;
pub mod error;
pub mod eta_kronecker;
pub mod heegner_points;
pub mod modular_param;
pub mod numeric;
pub mod quadclass;
pub mod root_number;

pub use error::{Error, Result};
