//! Continuous-time quantum walks of photon pairs in coupled waveguide lattices.
//!
//! The crate models two situations:
//!
//! * a **linear** (passive) array injected with an externally prepared two-photon
//!   state, where both photons propagate under the same single-photon unitary, and
//! * a **nonlinear** array pumped by a classical beam, where photon pairs are
//!   created by parametric down-conversion everywhere along the array and the output
//!   is the coherent sum of linear walks started at every longitudinal position.
//!
//! On top of the forward models sit the observables ([`analysis`]) and an
//! inverse-design engine ([`design`]) that searches aperiodic coupling profiles and
//! pump distributions for maximally entangled target states.
//!
//! Everything is `no_std` with `alloc`. File formats, the CLI and parallel drivers
//! live in the companion `qwalk` crate.
//!
//! Conventions: waveguides are labelled by signed integers centred on the array
//! (`-n̄..=n̄` for an odd count), the coupled-mode Hamiltonian has positive
//! off-diagonal couplings and zero diagonal, and propagation is `U(z) = exp(+iHz)`,
//! so a photon tunnelling to a neighbour picks up a factor `+i`.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod bessel;
pub mod design;
mod error;
pub mod lattice;
pub mod linalg;
pub mod linear_walk;
pub mod matrix;
pub mod nonlinear_walk;
pub mod quadrature;
mod roots;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use analysis::{
    best_fidelity, correlation, nonclassicality, sample_counts, schmidt_coefficients,
    schmidt_number, similarity, CorrelationMatrix, NonClassicalityReport,
};
pub use design::{
    objective, optimize, robustness_sweep, DesignParams, DesignProblem, DesignResult,
    OptimizerSettings, RobustnessStats, TargetKind, TargetState,
};
pub use lattice::{
    hamiltonian, propagator, single_photon_amplitude_infinite, LatticeModes, LatticeSpec,
    Propagator,
};
pub use linear_walk::{
    propagate_linear, propagate_linear_split, stabilization_threshold_linear, BiphotonState,
    InputSpec, Photons, WalkMode,
};
pub use matrix::{CMatrix, Matrix, RMatrix};
pub use nonlinear_walk::{
    marginal_evolution, spdc_state, spdc_state_fixed, spdc_state_momentum,
    stabilization_threshold_nonlinear, MarginalSample, MomentumState, PumpProfile, SpdcOutput,
    SpdcSettings,
};
