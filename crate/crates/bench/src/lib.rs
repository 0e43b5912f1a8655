//! Shared fixtures for the criterion benches.

use std::collections::BTreeMap;

use bellsim_core::{
    build_bell_circuit, sample_counts, Circuit, ExperimentSpec, Implementation,
    JointDistribution, OutcomeCounts,
};

/// Builds the measurement circuit for one setting pair of the standard
/// experiment.
pub fn setting_circuit(n: usize, implementation: Implementation, x: u8, y: u8) -> Circuit {
    let spec = ExperimentSpec::new(n, implementation, x, y).expect("valid benchmark spec");
    build_bell_circuit(&spec).expect("benchmark circuit builds")
}

/// Samples all four setting pairs and assembles the joint distribution an
/// analysis pass would consume.
pub fn sampled_joint(n: usize, shots: u64, seed: u64) -> JointDistribution {
    let mut counts: BTreeMap<(u8, u8), OutcomeCounts> = BTreeMap::new();
    for (x, y) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let circuit = setting_circuit(n, Implementation::Unitary, x, y);
        let tally = sample_counts(&circuit, shots, seed ^ u64::from(x) << 8 ^ u64::from(y))
            .expect("sampling succeeds");
        counts.insert((x, y), tally);
    }
    JointDistribution::from_counts(n, &counts).expect("counts assemble")
}
