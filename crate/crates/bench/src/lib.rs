//! Fixtures shared by the benchmarks.

pub use hopca;

use hopca::{simulate, Scenario, SimScenarioSpec, Tensor3};

/// Observed tensor of a two-component simulation.
pub fn fixture(scenario: Scenario, seed: u64) -> Tensor3 {
    simulate(&SimScenarioSpec::new(scenario, 2, seed)).expect("valid scenario").x
}
