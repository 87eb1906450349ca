//! Thermodynamics of random combinatorial partition models.
//!
//! Four models of a dilute Bose gas are treated through the occupation
//! numbers of cycles (loops) of each length: the ideal reference gas, the
//! cycle mean-field model (CMF), the particle mean-field model (PMF), and the
//! Huang–Yang–Luttinger model (HYL). The crate evaluates the large-deviation
//! rate functionals of the empirical cycle counts, locates their zeros,
//! derives pressures, free energies, critical parameters and condensate
//! densities in closed form, and cross-checks everything with finite-volume
//! Monte Carlo sampling.
//!
//! ```
//! use bose_ldp::model::ModelParams;
//! use bose_ldp::thermo::pressure_ideal;
//!
//! // At beta = 1/(4*pi) and alpha = 0 the cycle weights are q_k = k^(-5/2),
//! // so the ideal-gas pressure is zeta(5/2)/beta.
//! let beta = 1.0 / (4.0 * std::f64::consts::PI);
//! let params = ModelParams::new(3, beta, 0.0);
//! let p = pressure_ideal(&params).unwrap();
//! assert!((p * beta - 1.341_487_257_250_917).abs() < 1e-12);
//! ```

pub mod cli;
pub mod error;
pub mod mc;
pub mod model;
pub mod solvers;
pub mod special;
pub mod thermo;

pub use error::{Error, Result};

// The guide's code blocks run as doc-tests here, since mdbook cannot test
// snippets that depend on the crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/index.md")]
    mod index {}
    #[doc = include_str!("../../../book/src/special-functions.md")]
    mod special_functions {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/thermodynamics.md")]
    mod thermodynamics {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
