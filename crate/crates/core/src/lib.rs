//! Dephased discrete-time quantum walks.
//!
//! Builds the one-step maps of a flux-threaded three-site ring and of a coined
//! walk on a line, reduces them to classical Markov matrices or Liouvillian
//! superoperators, and analyses their relaxation spectra: Floquet exponents,
//! biorthogonal eigenvectors, level crossings and exceptional points.
//!
//! ```
//! use oqw::transitions::{locate_crossing, TransitionOrder, WalkFamily};
//!
//! let ring = WalkFamily::ring(1.0, 1.0, 0.5, std::f64::consts::PI / 3.0)?;
//! let report = locate_crossing(&ring, (0.6, 0.9), 1.0)?;
//! assert_eq!(report.order, TransitionOrder::SecondOrder);
//! assert!((report.beta_c.unwrap() - 0.7413).abs() < 1e-3);
//! # Ok::<(), oqw::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod channels;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod models;
pub mod spectral;
pub mod transitions;

pub use error::{Error, Result};
