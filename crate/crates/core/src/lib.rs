//! Linear-regulator based synchronization of positive multi-agent systems.
//!
//! Every agent runs the same positive (Metzler) linear dynamics `ẋᵢ = A xᵢ + B uᵢ`
//! and is coupled to its neighbours through the relative state
//! `ζᵢ = Σⱼ wᵢⱼ (xᵢ − xⱼ)`. The local feedback `uᵢ = −ρ K ζᵢ` uses a gain `K`
//! obtained from a linear program, which keeps every input inside the
//! proportional bound `|uᵢ| ≤ E|ζᵢ|`.
//!
//! The crate is `no_std` (it needs `alloc`) and contains:
//!
//! * [`matrix`]: dense matrices, Metzler predicates, Kronecker products,
//!   the matrix exponential, a Jacobi eigensolver and an RK4 integrator;
//! * [`lp`]: a two-phase dense simplex solver with Bland's rule;
//! * [`graph`]: undirected weighted graphs, Laplacians, spectra and generators;
//! * [`regulator`]: the linear regulator LP and gain extraction;
//! * [`protocol`]: hypothesis checks, per-mode Hurwitz certificates and the
//!   positivity analysis of the synchronization protocol;
//! * [`sim`]: closed-loop simulation and synchronization metrics.
#![no_std]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

mod error;
pub mod graph;
pub mod lp;
pub mod matrix;
pub mod protocol;
pub mod regulator;
pub mod sim;

pub use error::{Error, Result};
pub use graph::{Graph, SpectralSummary};
pub use lp::{LinearProgram, LpOutcome, LpStatus};
pub use matrix::{CsrMatrix, Matrix, Trajectory, Vector};
pub use protocol::{Positivity, ProtocolCertificate, ProtocolConfig};
pub use regulator::{AgentDynamics, RegulatorSolution};
pub use sim::{InitialCondition, SimConfig, SyncMetrics};
