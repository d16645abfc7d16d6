//! Classical limit on the Bloch sphere in the canonical (Q, P) chart.

mod branches;
mod dos;
mod ebk;
mod energy;
mod fixed_points;
mod flow;
mod phase_point;
mod sector;

pub use branches::{level_set_roots, trajectory_branches, Branch, ClassicalTrajectory, DEFAULT_BRANCH_SAMPLES};
pub use dos::{semiclassical_count, semiclassical_dos, DosModel, DosValue, DIVERGENCE_CAP};
pub use ebk::{ebk_action, ebk_levels, ebk_sum_rule, EbkLevel};
pub use energy::{
    anisotropy, classical_energy, coherent_energy_offset, degenerate_discriminant_energy, discriminant,
    energy_gradient, energy_hessian,
};
pub use fixed_points::{find_fixed_points, FixedPoint, Stability};
pub use flow::{flow, flow_with, hamiltonian_rhs, FlowOptions, FlowResult};
pub use phase_point::PhasePoint;
pub use sector::{classify_sector, CriticalEnergy, CriticalKind, Sector, SectorLabel};
