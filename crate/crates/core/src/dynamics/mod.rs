//! Wave dynamics `x'' = -L x` on a network: closed-form mode expansion,
//! time stepping, oscillation energies and centralities, and eps sweeps.

pub mod analysis;
pub mod centrality;
pub mod energy;
pub mod integrate;
pub mod modal;
pub mod sweep;

pub use analysis::{estimate_beat_frequency, fit_growth_rate, modal_amplitudes, trajectory_amplitudes, GrowthFit};
pub use centrality::{betweenness_weights, link_betweenness, oscillation_centrality, UndirectedGraph};
pub use energy::{node_energies, total_energy_series, write_energy_csv, EnergyReport};
pub use integrate::{integrate_numeric, stability_bound, write_trajectory_csv, Trajectory, DIVERGENCE_THRESHOLD};
pub use modal::{modal_solve, InitialCondition, ModalSolution, ZeroMode};
pub use sweep::{epsilon_sweep, SweepError, SweepRecord};
