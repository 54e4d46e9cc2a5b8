//! Steady states of translation-invariant free-fermion circuits with weak
//! measurements.
//!
//! Each circuit layer acts on the coherent-state amplitude `f(k)` of every
//! momentum mode as a Möbius map. Whether the map at `k` has a stable fixed
//! point or keeps rotating decides whether that mode contributes to the
//! volume-law entanglement of the steady state:
//!
//! - [`mobius`]: layer and round transfer matrices, fixed points, criticality.
//! - [`models`]: the log-law and volume-law circuits in closed form.
//! - [`steady`]: `f_n(k)`, time-averaged symbols, Fourier coefficients, phases.
//! - [`entanglement`]: Majorana correlation matrices, entropies, slopes, exponents.
//! - [`ed`]: dense statevector reference for small chains.
//! - [`cli`]: batch sweeps writing CSV and JSON.

// `!(a < b)` is used on purpose so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ed;
pub mod entanglement;
pub mod error;
pub mod jacobi;
pub mod mobius;
pub mod models;
pub mod quadrature;
pub mod steady;

pub use error::{Error, Result};
pub use mobius::{
    compose_round, layer_mobius, Criticality, LayerKind, LayerSpec, MobiusMatrix, ProjectiveAmplitude, RoundSpec,
    TransferMatrix,
};
pub use models::{critical_window, lambda_c_loglaw, lambda_c_volume, CriticalWindow, LogLawParams, VolumeParams};
pub use steady::{averaged_symbols, classify_phase, MomentumGrid, Phase, SymbolPair, UAverage};
