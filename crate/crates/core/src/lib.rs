//! Software reproduction of digital quantum simulation of the singly excited
//! open Tavis-Cummings model.
//!
//! The crate is organised as a pipeline:
//!
//! * [`model`] solves the cavity-QED dynamics exactly, both in the
//!   single-excitation subspace and with a full Lindblad integrator.
//! * [`circuit`] synthesizes the `2N+1`-gate emulation circuit from a target
//!   population distribution and executes circuits ideally.
//! * [`transpiler`] lowers circuits to trapped-ion (`MS_XX` / `ZZ`) and
//!   superconducting (`CZ`, linear chain) gate sets.
//! * [`noise`] executes compiled circuits on a density-matrix simulator with
//!   calibrated gate noise.
//! * [`mitigation`] implements postselection, identical-emitter averaging,
//!   randomized compiling and identity-insertion extrapolation.
//! * [`analysis`] scores simulated dynamics against the exact solution.
//! * [`harness`] wires everything into reproducible time-sweep experiments.
//!
//! Conventions used throughout: qubit 0 is the least significant bit of every
//! basis index and the rightmost character of every bitstring; rates are
//! angular (rad/ns) and times are in ns.

pub mod analysis;
pub mod circuit;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mitigation;
pub mod model;
pub mod noise;
pub mod rng;
pub mod transpiler;


pub use analysis::{hellinger, mean_hellinger, Spectrum, TimeSeries};
pub use circuit::{Circuit, Counts, Gate, GateKind, Role};
pub use error::{Error, Result};
pub use noise::{FidelityTable, NoiseModel};
pub use transpiler::{GateSetSpec, TranspileOptions};
pub use model::{PopulationDistribution, SingleExcitationState, TcParams};


