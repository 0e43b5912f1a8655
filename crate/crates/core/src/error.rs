use thiserror::Error;

/// Everything that can go wrong in the simulator and analysis pipeline.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("instruction uses the same qubit {0} twice")]
    DuplicateOperands(usize),

    #[error("classical bit {0} out of range ({1} declared)")]
    ClassicalBitOutOfRange(usize, usize),

    #[error("classical bit {0} read before any measurement wrote it")]
    UnwrittenClassicalBit(usize),

    #[error("qubit {0} is final-measured more than once")]
    DoubleFinalMeasurement(usize),

    #[error("final measurement map positions are not a permutation of 0..{0}")]
    BadMeasurementMap(usize),

    #[error("state norm drifted to {norm:.17} (kernel bug, |norm-1| > {tolerance:.1e})")]
    NormDrift { norm: f64, tolerance: f64 },

    #[error("supported register size is 1..={max}, got {requested}")]
    RegisterTooLarge { requested: usize, max: usize },

    #[error("qubits per party must lie in 1..=8, got {0}")]
    PartySizeOutOfRange(usize),

    #[error("dynamic measurement circuits need at least 2 qubits per party, got {0}")]
    DynamicTooSmall(usize),

    #[error("measurement setting index must be 1 or 2, got {0}")]
    BadSettingIndex(u8),

    #[error("tilt qubit index {index} out of range for {n} qubits per party")]
    TiltQubitOutOfRange { index: usize, n: usize },

    #[error("outcome dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("exact enumeration supports at most {max} mid-circuit measurements, circuit has {found}")]
    TooManyMeasurements { found: usize, max: usize },

    #[error("branch enumeration exceeded the cap of {0} branches")]
    BranchExplosion(usize),

    #[error("missing counts for setting (x={x}, y={y})")]
    MissingSetting { x: u8, y: u8 },

    #[error("bitstring {string:?} has length {found}, expected {expected}")]
    MalformedBitstring {
        string: String,
        found: usize,
        expected: usize,
    },

    #[error("outcome {outcome} out of range for dimension {d}")]
    OutcomeOutOfRange { outcome: usize, d: usize },

    #[error("marginal pair index ({i}, {j}) out of range for {n} qubits per party")]
    PairOutOfRange { i: usize, j: usize, n: usize },

    #[error("pairwise marginals need a power-of-two dimension, got {0}")]
    NotPowerOfTwo(usize),

    #[error("distribution table for setting (x={x}, y={y}) sums to {sum:.12}, not 1")]
    NotNormalized { x: u8, y: u8, sum: f64 },

    #[error("negative probability {value:.3e} at (a={a}, b={b}, x={x}, y={y})")]
    NegativeProbability {
        value: f64,
        a: usize,
        b: usize,
        x: u8,
        y: u8,
    },

    #[error("degenerate score rule: gamma-hat = {0} lies outside (0, 1)")]
    DegenerateScoreRule(f64),

    #[error("p-value needs at least one trial")]
    NoTrials,

    #[error("probability {name} = {value} outside [0, 1]")]
    BadProbability { name: &'static str, value: f64 },

    #[error("readout mitigation support is empty")]
    EmptySupport,

    #[error("counts contain bitstring {0:?} outside the mitigation support")]
    OutsideSupport(String),

    #[error(
        "mitigation solver stalled at residual {residual:.3e} after {iterations} iterations \
         (tolerance {tolerance:.1e}); confusion matrix is ill-conditioned"
    )]
    SolverDiverged {
        residual: f64,
        tolerance: f64,
        iterations: usize,
    },

    #[error("angle grid is empty")]
    EmptyAngleGrid,

    #[error("shots must be at least 1")]
    NoShots,
}
