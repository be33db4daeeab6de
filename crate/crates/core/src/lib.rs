//! Quantum transport on a one-lead Aharonov-Bohm ring.
//!
//! The system is a circular loop attached to a single semi-infinite wire.
//! The loop holds up to two rectangular barriers separated by a
//! zero-potential well and is threaded by a magnetic flux that enters the
//! problem only through phase factors in the junction matching conditions.
//! Everything is worked in dimensionless units with `hbar = 1` and `2m = 1`,
//! so an incident energy `E` corresponds to the lead wavevector `k = sqrt(E)`.
//!
//! With a single lead and a real potential the ring reflects all incident
//! flux, `|R| = 1`, and the physics lives entirely in the phase of the
//! reflection amplitude. The crate computes `R` by solving the 7x7 junction
//! matching system ([`solver`]), turns its energy-dependent phase into the
//! Wigner delay time by numerical differentiation ([`phase_time`]), provides
//! closed-form references for the single-barrier ring ([`analytic`]), and
//! runs parameter sweeps with CSV output and resonance detection ([`sweep`]).

pub mod analytic;
pub mod error;
pub mod phase_time;
pub mod ring;
pub mod solver;
pub mod sweep;

pub use error::RingError;
pub use num_complex::Complex64;
pub use phase_time::{phase_time, principal_phase, unwrap_phases, PhaseTimeResult};
pub use ring::{total_flux_phase, wavevector, ComplexWavevector, RingSpec};
pub use solver::{
    assemble, evaluate_wavefunction, reflection, residual, solve, BoundarySystem, Region,
    ScatteringSolution,
};
pub use sweep::{
    point, scan_flux, scan_length, scan_resonance, scan_well, PointResult, ResonancePeak, SweepRow,
    SweepSeries,
};
