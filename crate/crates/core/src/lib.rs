//! Computational ergodic theory on Bratteli diagrams.
//!
//! The crate decides unique ergodicity of quasi-product cocycles on the
//! path space of a Bratteli diagram, builds the associated Markov
//! measures, and solves the Perron-Frobenius and Ruelle transfer-operator
//! eigenproblems by the same variation-contraction argument.
//!
//! Layout:
//!
//! - [`diagram`]: leveled diagrams, finite paths, telescoping.
//! - [`cocycle`]: edge weights, transition matrices `A_n`, log-scaled
//!   partition functions `u_n`, Markovianizations `B_n`, expectations.
//! - [`contraction`]: the variation seminorm and contraction coefficients.
//! - [`ergodicity`]: the variation test and the divergent-series test.
//! - [`measures`]: states of the dimension group and Markov measures.
//! - [`spectral`]: primitivity and Perron-Frobenius power iteration.
//! - [`sft`]: subshifts of finite type and the Ruelle operator.
//! - [`formats`]: the JSON file formats shared with the command line.
//!
//! Everything works on finite truncations; infinite paths are never
//! materialized.
//!
//! ```
//! use ergodic_core::{families, ergodicity};
//!
//! let system = families::stationary_complete(2, &[1.0, 2.0, 3.0, 1.5], 40).unwrap();
//! let verdict = ergodicity::check_variation_condition(&system, 0, 40, 1e-8).unwrap();
//! assert_eq!(verdict.status, ergodicity::Status::UniqueAtTolerance);
//! ```

pub mod cocycle;
pub mod contraction;
pub mod diagram;
mod error;
pub mod ergodicity;
pub mod families;
pub mod formats;
pub mod linalg;
pub mod measures;
pub mod sft;
pub mod spectral;

pub use cocycle::{CylinderFunction, WeightedSystem};
pub use contraction::MarkovianMatrix;
pub use diagram::{BratteliDiagram, Edge, FinitePath, Telescoped, ValidationReport, Violation};
pub use error::{Error, Result};
pub use ergodicity::{ErgodicityVerdict, Status};
pub use measures::{MarkovMeasure, StateOptions, StateSequence};
pub use sft::{RuelleMatrix, SftSystem};
pub use spectral::PerronResult;



