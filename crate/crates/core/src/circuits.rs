//! Circuit builders for the high-dimensional Bell experiment.
//!
//! Each party holds `n` qubits encoding a d = 2^n outcome. Alice owns
//! physical qubits `0..n`, Bob owns `n..2n`. Within a party, logical qubit
//! `j` (1-based) is physical `base + j - 1` and carries weight `2^(j-1)` in
//! the *phase-layer* indexing; the transform's output digit ordering is the
//! bit reversal of that, which we absorb into the outcome map instead of
//! emitting SWAP networks: the outcome character at party position `p`
//! (0-based, most significant first) always reads physical qubit `base + p`.
//!
//! Alice applies the forward transform, Bob the inverse (all transform
//! phase angles negated). The measurement stage comes in two flavors:
//! `Unitary` (coherent transform, terminal readout) and `Dynamic` (each
//! qubit measured early, remaining phases applied conditionally on the
//! recorded bit).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::statevector::{Circuit, Instruction, OutcomeSource};

/// Largest per-party register: 2n must fit the simulator comfortably.
pub const MAX_PARTY_QUBITS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    /// First physical qubit of the party's block.
    pub fn base(self, n: usize) -> usize {
        match self {
            Party::Alice => 0,
            Party::Bob => n,
        }
    }
}

/// One of the two measurement settings per party. The angle parameter is the
/// fraction (in units of the outcome dimension) by which the party's value
/// register is phase-shifted before the transform; all four values are exact
/// binary fractions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    party: Party,
    index: u8,
}

impl MeasurementSetting {
    pub fn new(party: Party, index: u8) -> Result<Self, SimError> {
        if index != 1 && index != 2 {
            return Err(SimError::BadSettingIndex(index));
        }
        Ok(MeasurementSetting { party, index })
    }

    pub fn alice(index: u8) -> Result<Self, SimError> {
        Self::new(Party::Alice, index)
    }

    pub fn bob(index: u8) -> Result<Self, SimError> {
        Self::new(Party::Bob, index)
    }

    pub fn party(self) -> Party {
        self.party
    }

    pub fn index(self) -> u8 {
        self.index
    }

    /// Alice: 0 and 1/2. Bob: 1/4 and -1/4.
    pub fn angle_parameter(self) -> f64 {
        match (self.party, self.index) {
            (Party::Alice, 1) => 0.0,
            (Party::Alice, 2) => 0.5,
            (Party::Bob, 1) => 0.25,
            (Party::Bob, 2) => -0.25,
            _ => unreachable!("constructor enforces index"),
        }
    }
}

/// How the measurement transform is realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Implementation {
    /// Coherent transform followed by a terminal readout.
    Unitary,
    /// Measure-as-you-go: two-qubit phases become classically conditioned
    /// single-qubit phases (no two-qubit gate in the measurement stage).
    Dynamic,
}

/// Optional coherent error injected right after state preparation: a Y-axis
/// rotation by `theta` on one qubit of one party.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tilt {
    pub party: Party,
    /// 1-based logical qubit index within the party.
    pub qubit: usize,
    pub theta: f64,
}

/// Everything needed to build one Bell-test circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub n: usize,
    pub implementation: Implementation,
    pub alice_setting: MeasurementSetting,
    pub bob_setting: MeasurementSetting,
    pub tilt: Option<Tilt>,
}

impl ExperimentSpec {
    pub fn new(
        n: usize,
        implementation: Implementation,
        x: u8,
        y: u8,
    ) -> Result<Self, SimError> {
        let spec = ExperimentSpec {
            n,
            implementation,
            alice_setting: MeasurementSetting::alice(x)?,
            bob_setting: MeasurementSetting::bob(y)?,
            tilt: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_tilt(mut self, tilt: Tilt) -> Result<Self, SimError> {
        self.tilt = Some(tilt);
        self.validate()?;
        Ok(self)
    }

    /// Outcome dimension d = 2^n.
    pub fn dimension(&self) -> usize {
        1 << self.n
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n == 0 || self.n > MAX_PARTY_QUBITS {
            return Err(SimError::PartySizeOutOfRange(self.n));
        }
        if self.implementation == Implementation::Dynamic && self.n < 2 {
            return Err(SimError::DynamicTooSmall(self.n));
        }
        if self.alice_setting.party() != Party::Alice || self.bob_setting.party() != Party::Bob {
            return Err(SimError::BadSettingIndex(0));
        }
        if let Some(tilt) = self.tilt {
            if tilt.qubit == 0 || tilt.qubit > self.n {
                return Err(SimError::TiltQubitOutOfRange {
                    index: tilt.qubit,
                    n: self.n,
                });
            }
        }
        Ok(())
    }
}

/// Maximally entangled pair of n-qubit registers: H + CNOT per qubit pair,
/// giving (1/sqrt(d)) * sum_k |k>_A |k>_B.
pub fn build_state_prep(n: usize) -> Result<Vec<Instruction>, SimError> {
    if n == 0 || n > MAX_PARTY_QUBITS {
        return Err(SimError::PartySizeOutOfRange(n));
    }
    let mut instructions = Vec::with_capacity(2 * n);
    for q in 0..n {
        instructions.push(Instruction::H { qubit: q });
        instructions.push(Instruction::Cnot {
            control: q,
            target: n + q,
        });
    }
    Ok(instructions)
}

/// Diagonal phase layer |k> -> exp(2*pi*i*k*angle/d) |k> on one party's
/// block, one Phase gate per qubit.
pub fn build_phase_layer(n: usize, base: usize, angle_parameter: f64) -> Vec<Instruction> {
    let d = (1usize << n) as f64;
    (0..n)
        .map(|p| Instruction::Phase {
            qubit: base + p,
            phi: 2.0 * PI * ((1u64 << p) as f64) * angle_parameter / d,
        })
        .collect()
}

/// Coherent Fourier transform on one party's block (`inverse` negates every
/// controlled-phase angle). The usual terminal bit reversal is absorbed into
/// the outcome map, so none is emitted here.
pub fn build_qft(n: usize, base: usize, inverse: bool) -> Vec<Instruction> {
    let sign = if inverse { -1.0 } else { 1.0 };
    let mut instructions = Vec::with_capacity(n + n * (n - 1) / 2);
    for q in (1..=n).rev() {
        instructions.push(Instruction::H {
            qubit: base + q - 1,
        });
        for jp in (1..q).rev() {
            instructions.push(Instruction::ControlledPhase {
                control: base + jp - 1,
                target: base + q - 1,
                phi: sign * 2.0 * PI / ((1u64 << (q + 1 - jp)) as f64),
            });
        }
    }
    instructions
}

/// A dynamic transform block plus the classical bit each qubit's result
/// landed in.
#[derive(Clone, Debug)]
pub struct DqftBlock {
    pub instructions: Vec<Instruction>,
    /// (physical qubit, classical bit) for every measured qubit.
    pub qubit_to_bit: Vec<(usize, usize)>,
}

/// Measurement-based Fourier transform: each qubit gets H, is measured, and
/// the phases it would have controlled are applied to the remaining qubits
/// conditioned on the recorded bit. Equivalent to [`build_qft`] followed by
/// readout, with zero two-qubit gates. Classical bit for physical qubit
/// `base + p` is `first_bit + p`.
pub fn build_dqft(n: usize, base: usize, inverse: bool, first_bit: usize) -> DqftBlock {
    let sign = if inverse { -1.0 } else { 1.0 };
    let mut instructions = Vec::new();
    let mut qubit_to_bit = Vec::with_capacity(n);
    for q in (1..=n).rev() {
        let qubit = base + q - 1;
        let bit = first_bit + q - 1;
        instructions.push(Instruction::H { qubit });
        instructions.push(Instruction::Measure { qubit, bit });
        qubit_to_bit.push((qubit, bit));
        for jp in (1..q).rev() {
            instructions.push(Instruction::ConditionalPhase {
                target: base + jp - 1,
                phi: sign * 2.0 * PI / ((1u64 << (q + 1 - jp)) as f64),
                bit,
            });
        }
    }
    DqftBlock {
        instructions,
        qubit_to_bit,
    }
}

/// Full Bell-test circuit: state prep, optional tilt, per-party phase
/// layers, then the chosen measurement stage. The outcome bitstring is
/// Alice's digits (most significant first) followed by Bob's.
pub fn build_bell_circuit(spec: &ExperimentSpec) -> Result<Circuit, SimError> {
    spec.validate()?;
    let n = spec.n;
    let num_qubits = 2 * n;
    let mut instructions = build_state_prep(n)?;

    if let Some(tilt) = spec.tilt {
        instructions.push(Instruction::Ry {
            qubit: tilt.party.base(n) + tilt.qubit - 1,
            theta: tilt.theta,
        });
    }

    instructions.extend(build_phase_layer(
        n,
        Party::Alice.base(n),
        spec.alice_setting.angle_parameter(),
    ));
    instructions.extend(build_phase_layer(
        n,
        Party::Bob.base(n),
        spec.bob_setting.angle_parameter(),
    ));

    let (num_classical_bits, final_measurement_map) = match spec.implementation {
        Implementation::Unitary => {
            instructions.extend(build_qft(n, Party::Alice.base(n), false));
            instructions.extend(build_qft(n, Party::Bob.base(n), true));
            let map = (0..num_qubits)
                .map(|p| (OutcomeSource::Qubit(p), p))
                .collect();
            (0, map)
        }
        Implementation::Dynamic => {
            let alice = build_dqft(n, Party::Alice.base(n), false, 0);
            let bob = build_dqft(n, Party::Bob.base(n), true, n);
            instructions.extend(alice.instructions);
            instructions.extend(bob.instructions);
            let map = (0..num_qubits)
                .map(|p| (OutcomeSource::ClassicalBit(p), p))
                .collect();
            (num_qubits, map)
        }
    };

    let circuit = Circuit {
        num_qubits,
        num_classical_bits,
        instructions,
        final_measurement_map,
    };
    circuit.validate()?;
    Ok(circuit)
}

/// Hardware-flavored durations used for the runtime estimate, in arbitrary
/// time units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DurationTable {
    pub one_qubit: f64,
    pub two_qubit: f64,
    pub measurement: f64,
    pub feed_forward: f64,
}

impl Default for DurationTable {
    fn default() -> Self {
        DurationTable {
            one_qubit: 1.0,
            two_qubit: 2.0,
            measurement: 10.0,
            feed_forward: 1.0,
        }
    }
}

impl DurationTable {
    pub fn of(&self, instr: &Instruction) -> f64 {
        match instr {
            Instruction::H { .. }
            | Instruction::X { .. }
            | Instruction::Ry { .. }
            | Instruction::Phase { .. } => self.one_qubit,
            Instruction::ControlledPhase { .. } | Instruction::Cnot { .. } => self.two_qubit,
            Instruction::Measure { .. } => self.measurement,
            Instruction::ConditionalPhase { .. } => self.feed_forward,
        }
    }
}

/// Static cost summary of one circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub num_qubits: usize,
    pub num_instructions: usize,
    pub one_qubit_gates: usize,
    pub two_qubit_gates: usize,
    pub mid_circuit_measurements: usize,
    pub feed_forward_operations: usize,
    /// Unit-weight longest dependency chain over the instruction list
    /// (qubit overlaps plus classical write-to-read edges).
    pub depth: usize,
    /// Duration-weighted critical path; adds one terminal readout layer
    /// when the outcome map reads live qubits.
    pub estimated_runtime: f64,
}

/// Returns per-instruction dependency predecessors: instructions sharing a
/// qubit, plus the Measure feeding each ConditionalPhase.
pub(crate) fn dependency_edges(circuit: &Circuit) -> Vec<Vec<usize>> {
    let mut last_on_qubit: Vec<Option<usize>> = vec![None; circuit.num_qubits];
    let mut writer_of_bit: Vec<Option<usize>> = vec![None; circuit.num_classical_bits];
    let mut preds = vec![Vec::new(); circuit.instructions.len()];
    for (i, instr) in circuit.instructions.iter().enumerate() {
        for q in instr.qubits() {
            if let Some(p) = last_on_qubit[q] {
                preds[i].push(p);
            }
            last_on_qubit[q] = Some(i);
        }
        match *instr {
            Instruction::Measure { bit, .. } => writer_of_bit[bit] = Some(i),
            Instruction::ConditionalPhase { bit, .. } => {
                if let Some(w) = writer_of_bit[bit] {
                    if !preds[i].contains(&w) {
                        preds[i].push(w);
                    }
                }
            }
            _ => {}
        }
    }
    preds
}

pub fn count_resources(circuit: &Circuit, durations: &DurationTable) -> ResourceReport {
    let mut one_qubit_gates = 0;
    let mut two_qubit_gates = 0;
    let mut mid_circuit_measurements = 0;
    let mut feed_forward_operations = 0;
    for instr in &circuit.instructions {
        match instr {
            Instruction::H { .. }
            | Instruction::X { .. }
            | Instruction::Ry { .. }
            | Instruction::Phase { .. } => one_qubit_gates += 1,
            Instruction::ControlledPhase { .. } | Instruction::Cnot { .. } => {
                two_qubit_gates += 1
            }
            Instruction::Measure { .. } => mid_circuit_measurements += 1,
            Instruction::ConditionalPhase { .. } => feed_forward_operations += 1,
        }
    }

    let preds = dependency_edges(circuit);
    let mut level = vec![0usize; circuit.instructions.len()];
    let mut finish = vec![0.0f64; circuit.instructions.len()];
    let mut depth = 0;
    let mut runtime = 0.0f64;
    for i in 0..circuit.instructions.len() {
        let lvl = preds[i].iter().map(|&p| level[p]).max().unwrap_or(0) + 1;
        let start = preds[i]
            .iter()
            .map(|&p| finish[p])
            .fold(0.0f64, f64::max);
        level[i] = lvl;
        finish[i] = start + durations.of(&circuit.instructions[i]);
        depth = depth.max(lvl);
        runtime = runtime.max(finish[i]);
    }
    if circuit
        .final_measurement_map
        .iter()
        .any(|(s, _)| matches!(s, OutcomeSource::Qubit(_)))
    {
        runtime += durations.measurement;
    }

    ResourceReport {
        num_qubits: circuit.num_qubits,
        num_instructions: circuit.instructions.len(),
        one_qubit_gates,
        two_qubit_gates,
        mid_circuit_measurements,
        feed_forward_operations,
        depth,
        estimated_runtime: runtime,
    }
}
