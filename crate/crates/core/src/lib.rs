//! Numerics for the anisotropic Lipkin–Meshkov–Glick model
//! H = ε0 [Jz + γx/(2J−1) Jx² + γy/(2J−1) Jy²]:
//! exact parity-resolved spectra, the classical limit on the Bloch sphere,
//! Husimi/Wehrl phase-space diagnostics and quench dynamics compared with
//! the truncated Wigner approximation.

pub mod classical;
pub mod coherent;
pub mod dynamics;
pub mod error;
pub mod ode;
pub mod phase_space;
pub mod quad;
pub mod spectral;
pub mod spin;
pub mod tridiag;

pub use classical::{Branch, ClassicalTrajectory, FixedPoint, PhasePoint, Sector, SectorLabel};
pub use coherent::CoherentState;
pub use dynamics::{QuenchConfig, QuenchResult, Scenario, ScenarioKind, TwaConfig};
pub use error::{LmgError, Result};
pub use phase_space::{GridSpec, HusimiField, McConfig, WehrlConvention, WehrlResult};
pub use spectral::{CrossingKind, CrossingPrediction, GapPair, GapRecord, SpectralData};
pub use spin::{CouplingParams, Parity, ParityBlock, SpinSpace};
