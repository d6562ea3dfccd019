//! Numerical toolkit for the first two Dirichlet eigenvalues of geodesic
//! balls and hemisphere-contained domains on the n-sphere.
//!
//! The pieces fit together as follows: [`radial`] evaluates the radial
//! solution family u_m(θ; λ) of the separated Laplacian; [`ball`] turns it
//! into eigenvalues of polar caps by shooting; [`perturbation`] provides the
//! analytic derivatives of the rescaled eigenvalues; [`profile`] builds the
//! comparison functions p, q, g, B used by the gap bound; [`rearrange`] and
//! [`chiti`] handle decreasing rearrangements and the one-crossing
//! eigenfunction comparison; [`mesh`], [`fem`], and [`domain`] provide a
//! desk-scale Dirichlet eigensolver on S² and the end-to-end gap/ratio
//! verdicts for general domains.

pub mod ball;
pub mod bessel;
pub mod chiti;
pub mod domain;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod ode;
pub mod perturbation;
pub mod profile;
pub mod quad;
pub mod radial;
pub mod rearrange;
pub mod roots;

pub use error::{Error, Result};
