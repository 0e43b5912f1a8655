//! State-vector circuit simulation with mid-circuit measurement and
//! classical feed-forward, plus the analysis pipeline for a two-party
//! high-dimensional Bell test: entangled-register preparation, coherent and
//! measurement-based Fourier transforms, ordering-functional evaluation,
//! pairwise CHSH marginals, gate/idle/readout noise with error mitigation,
//! and finite-statistics p-value bounds.

pub mod bell;
pub mod circuits;
pub mod error;
pub mod noise;
pub mod rng;
pub mod stats;
pub mod statevector;

pub use bell::{chsh_max, izg_to_id, BellResult, JointDistribution, PairwiseMarginal};
pub use circuits::{
    build_bell_circuit, build_dqft, build_phase_layer, build_qft, build_state_prep,
    count_resources, DurationTable, ExperimentSpec, Implementation, MeasurementSetting, Party,
    ResourceReport, Tilt,
};
pub use error::SimError;
pub use noise::{
    build_confusion, compute_idle_schedule, default_noise_model, noisy_run_shot,
    simplex_project, ConfusionOperator, IdleSchedule, NoiseModel, NoisySampler, ReadoutError,
};
pub use rng::ShotRng;
pub use stats::{
    bentkus_pvalue, cglmp_score_rule, pvalue_curve, score_trials, zg_score_rule, ScoreRule,
    ScoreSummary, TrialRecord,
};
pub use statevector::{
    apply_instruction, exact_distribution, run_shot, sample_counts, Circuit, Instruction,
    OutcomeCounts, OutcomeSource, StateVector,
};
