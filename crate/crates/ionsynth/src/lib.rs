//! Pulse-sequence compiler and multi-fidelity simulator for arbitrary
//! two-mode motional quantum states of a single trapped ion.
//!
//! A target state over the two vibration modes of a 2D trap is specified by
//! a complex coefficient table `C[m][n]` with phonon caps `M`, `N`. The
//! [`planner`] compiles it into at most `(M+1)(N+1)` resonant sideband
//! pulses, each depositing exactly one coefficient; the [`simulator`]
//! executes the sequence at three fidelity tiers (analytic pair rotations,
//! exact resonant-Hamiltonian blocks, and full time-dependent integration of
//! the interaction-picture drive) and scores the result against the target.
//!
//! Units: `hbar = 1` and the base Raman coupling `omega` sets the time
//! scale, so trap frequencies are expressed as multiples of the coupling
//! strength and durations in units of its inverse.

pub mod cli;
pub mod coupling;
pub mod error;
pub mod fock;
pub mod planner;
pub mod simulator;
pub mod spectrum;

pub use coupling::{SidebandCoupling, TrapConfig};
pub use error::Error;
pub use fock::{ElectronicLevel, JLIndex, ModeIndex, StateVector, TargetSpec};
pub use planner::{Pulse, PulseSequence, SchemeComparison};
pub use simulator::{SimOptions, SimResult, SimTier};
pub use spectrum::{SeparationReport, SidebandLine};
