//! Synthetic scenarios, noise injection and Monte Carlo statistics.

pub mod bound;
pub mod monte_carlo;
pub mod noise;
pub mod scenario;
pub mod stats;

pub use bound::intersection_error_bound;
pub use monte_carlo::{child_seed, run_monte_carlo, run_sweep, TrialRecord};
pub use noise::{inject_noise, perturb_frames, NoiseSpec};
pub use scenario::{
    generate_arc_scenario, generate_scenario, synthesize_observations, Scenario, ScenarioSpec, Trajectory,
};
pub use stats::{aggregate_stats, TrialStatistics};
