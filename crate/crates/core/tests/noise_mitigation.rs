//! End-to-end behavior of the noise channels and the two mitigation knobs:
//! readout unfolding and dynamical decoupling of scheduled idle windows.

mod common;

use std::collections::BTreeMap;

use bellsim_core::bell::JointDistribution;
use bellsim_core::circuits::{
    build_bell_circuit, DurationTable, ExperimentSpec, Implementation,
};
use bellsim_core::noise::{
    build_confusion, simplex_project, NoiseModel, NoisySampler, ReadoutError,
};
use bellsim_core::statevector::{exact_distribution, run_shot, OutcomeCounts};
use bellsim_core::ShotRng;
use common::ideal_izg_direct;

const SETTINGS: [(u8, u8); 4] = [(1, 1), (1, 2), (2, 1), (2, 2)];

fn quiet_model() -> NoiseModel {
    NoiseModel {
        p1: 0.0,
        p2: 0.0,
        readout: ReadoutError::symmetric(0.0),
        per_qubit_readout: None,
        idle_dephasing_rate: 0.0,
        durations: DurationTable::default(),
        dd_factor: 0.25,
    }
}

fn setting_seed(seed: u64, x: u8, y: u8) -> u64 {
    seed.wrapping_mul(4).wrapping_add(2 * (x as u64 - 1) + (y as u64 - 1))
}

/// Samples all four settings and evaluates the ordering functional.
fn noisy_izg(
    n: usize,
    implementation: Implementation,
    model: &NoiseModel,
    dd: bool,
    shots: u64,
    seed: u64,
) -> f64 {
    let mut all = BTreeMap::new();
    for (x, y) in SETTINGS {
        let circuit =
            build_bell_circuit(&ExperimentSpec::new(n, implementation, x, y).unwrap()).unwrap();
        let sampler = NoisySampler::new(&circuit, model, dd).unwrap();
        let counts = sampler.sample_counts(shots, setting_seed(seed, x, y)).unwrap();
        all.insert((x, y), counts);
    }
    JointDistribution::from_counts(n, &all).unwrap().izg().izg
}

#[test]
fn two_qubit_depolarizing_degrades_the_functional_monotonically() {
    let shots = 50_000u64;
    let mut values = Vec::new();
    for p2 in [0.0, 0.01, 0.03] {
        let model = NoiseModel {
            p2,
            ..quiet_model()
        };
        values.push(noisy_izg(2, Implementation::Unitary, &model, false, shots, 11));
    }
    assert!(
        values[0] > values[1] && values[1] > values[2],
        "expected strictly decreasing: {values:?}"
    );
    // The clean end of the sweep should sit near the ideal value.
    assert!((values[0] - ideal_izg_direct(4)).abs() < 0.05, "{}", values[0]);
}

#[test]
fn readout_unfolding_recovers_the_functional() {
    let n = 2;
    let shots = 10_000u64;
    let eps = 0.02;
    let model = NoiseModel {
        readout: ReadoutError::symmetric(eps),
        ..quiet_model()
    };
    let ideal = ideal_izg_direct(1 << n);

    let mut improvements = 0;
    let mut raw_errors = Vec::new();
    let mut mitigated_errors = Vec::new();
    for seed in 0..20u64 {
        let mut raw_counts = BTreeMap::new();
        let mut mitigated = BTreeMap::new();
        for (x, y) in SETTINGS {
            let circuit = build_bell_circuit(
                &ExperimentSpec::new(n, Implementation::Unitary, x, y).unwrap(),
            )
            .unwrap();
            let sampler = NoisySampler::new(&circuit, &model, false).unwrap();
            let counts = sampler.sample_counts(shots, setting_seed(seed, x, y)).unwrap();
            let confusion = build_confusion(&circuit, &model).unwrap();
            let unfolded = simplex_project(&confusion.mitigate(&counts).unwrap());
            raw_counts.insert((x, y), counts);
            mitigated.insert((x, y), unfolded);
        }
        let raw = JointDistribution::from_counts(n, &raw_counts).unwrap().izg().izg;
        let fixed = JointDistribution::from_outcome_probabilities(n, &mitigated)
            .unwrap()
            .izg()
            .izg;
        raw_errors.push((raw - ideal).abs());
        mitigated_errors.push((fixed - ideal).abs());
        if (fixed - ideal).abs() < (raw - ideal).abs() {
            improvements += 1;
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(
        improvements >= 16,
        "unfolding helped on only {improvements}/20 seeds \
         (raw {:.4}, mitigated {:.4})",
        mean(&raw_errors),
        mean(&mitigated_errors)
    );
    assert!(mean(&mitigated_errors) < mean(&raw_errors));
}

#[test]
fn full_decoupling_factor_zero_recovers_noiseless_shots_exactly() {
    // Idle dephasing is the only active channel; a zero decoupling factor
    // must reproduce the noiseless per-shot strings bit for bit.
    let model = NoiseModel {
        idle_dephasing_rate: 0.5,
        dd_factor: 0.0,
        ..quiet_model()
    };
    let circuit =
        build_bell_circuit(&ExperimentSpec::new(3, Implementation::Dynamic, 1, 1).unwrap())
            .unwrap();
    let sampler = NoisySampler::new(&circuit, &model, true).unwrap();
    for shot in 0..200u64 {
        let rng = ShotRng::new(41, shot);
        let noisy = sampler.run_shot(&rng).unwrap();
        let clean = run_shot(&circuit, &rng).unwrap();
        assert_eq!(noisy, clean, "shot {shot}");
    }

    // With decoupling off the channel actually dephases. The rate is chosen
    // so each party's feed-forward gap flips with probability well below 1:
    // at probability one the two flips would always fire together, and a
    // correlated flip commutes back through the diagonal stages onto the
    // entangled pair, where it is an exact symmetry and leaves every shot
    // unchanged. Single-sided flips are what show up.
    let partial = NoiseModel {
        idle_dephasing_rate: 0.04,
        ..model
    };
    let undecoupled = NoisySampler::new(&circuit, &partial, false).unwrap();
    let a = undecoupled.sample_counts(500, 41).unwrap();
    let mut b = OutcomeCounts::default();
    for shot in 0..500u64 {
        b.record(run_shot(&circuit, &ShotRng::new(41, shot)).unwrap());
    }
    assert_ne!(a.counts, b.counts);
}

#[test]
fn decoupling_recovers_part_of_the_idle_dephasing_loss() {
    // Feed-forward wait times are where the dynamic circuit idles; the
    // decoupled runs should score reliably higher across paired seeds.
    let model = NoiseModel {
        idle_dephasing_rate: 4e-3,
        dd_factor: 0.25,
        ..quiet_model()
    };
    let shots = 2000u64;
    let mut diffs = Vec::new();
    for seed in 0..20u64 {
        let with_dd = noisy_izg(3, Implementation::Dynamic, &model, true, shots, seed);
        let without = noisy_izg(3, Implementation::Dynamic, &model, false, shots, seed);
        diffs.push(with_dd - without);
    }
    let m = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / m;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let t = mean / (var / m).sqrt();
    // One-sided paired t at the 5% level, 19 degrees of freedom.
    assert!(
        t > 1.7291,
        "decoupling benefit not significant: mean diff {mean:.5}, t {t:.2}"
    );
}

#[test]
fn unfolding_inverts_the_confusion_push_through() {
    // Exact distribution -> confusion -> unfolding should return the input,
    // including with per-qubit readout asymmetries.
    let circuit =
        build_bell_circuit(&ExperimentSpec::new(2, Implementation::Dynamic, 2, 2).unwrap())
            .unwrap();
    let model = NoiseModel {
        per_qubit_readout: Some(vec![
            ReadoutError { eps01: 0.03, eps10: 0.01 },
            ReadoutError { eps01: 0.008, eps10: 0.05 },
            ReadoutError::symmetric(0.02),
            ReadoutError { eps01: 0.0, eps10: 0.04 },
        ]),
        ..quiet_model()
    };
    let exact = exact_distribution(&circuit).unwrap();
    let confusion = build_confusion(&circuit, &model).unwrap();
    let observed = confusion.apply(&exact).unwrap();
    let recovered = confusion.mitigate_probabilities(&observed).unwrap();
    for (key, &p) in &exact {
        let q = recovered.get(key).copied().unwrap_or(0.0);
        assert!((p - q).abs() < 1e-8, "{key}: {p} vs {q}");
    }
}
