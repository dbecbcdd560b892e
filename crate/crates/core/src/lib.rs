//! Exact statevector experiments on subsystem typicality, decoherence and
//! einselection in finite-dimensional quantum systems.
//!
//! - [`hilbert`]: tensor-product spaces, states, density matrices, partial trace.
//! - [`haar`]: seeded Haar states, GUE Hamiltonians, dense unitary evolution.
//! - [`central_spin`]: the central spin model and its closed-form decoherence factor.
//! - [`diagnostics`]: trace distance, purity, entropy, Bloch vectors.
//! - [`experiments`]: Monte Carlo and trajectory harnesses.
//! - [`cli`]: command-line front end and output files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod central_spin;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod haar;
pub mod hilbert;
pub mod stats;

pub use error::{Error, Result};
