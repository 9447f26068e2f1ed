//! Quantum discord and Markovian-classicality toolkit.
//!
//! States are dense complex matrices tagged with a tensor-product
//! factorization. On top of that sit the correlation measures (mutual
//! information, one-way classical correlations and discord, locally
//! inaccessible information flow, laziness), regrouping of tensor factors
//! into coarser structures, unitary and GKSL dynamics, and a set of canned
//! scenarios that wire everything together into pass/fail verdicts.
//!
//! All entropies are in nats and ħ = 1.

pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod matrix_json;
pub mod operators;
pub mod random;
pub mod scenario_file;
pub mod scenarios;
pub mod state;
pub mod structures;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use state::{DensityOperator, HilbertFactorization, PureState};
