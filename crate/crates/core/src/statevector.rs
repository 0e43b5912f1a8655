//! Dense state-vector simulation with mid-circuit measurement and
//! classically conditioned gates.
//!
//! Conventions fixed here and relied on everywhere else:
//! * physical qubit `q` is bit `q` of the basis-state index (qubit 0 = LSB);
//! * outcome bitstrings are written most-significant digit first, with the
//!   digit positions given by [`Circuit::final_measurement_map`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::rng::{DrawStream, ShotRng};

/// Register sizes beyond this are refused outright.
pub const MAX_QUBITS: usize = 20;
/// Branches lighter than this are dropped during exact enumeration.
pub const BRANCH_PRUNE_WEIGHT: f64 = 1e-14;
/// Hard cap on enumerated measurement branches.
pub const DEFAULT_BRANCH_CAP: usize = 1 << 24;
/// Exact enumeration refuses circuits with more mid-circuit measurements.
pub const MAX_ENUMERATED_MEASUREMENTS: usize = 24;
/// Norm drift beyond this is reported as a kernel bug.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// One gate or measurement. Angles are radians.
#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    H { qubit: usize },
    X { qubit: usize },
    Ry { qubit: usize, theta: f64 },
    Phase { qubit: usize, phi: f64 },
    ControlledPhase { control: usize, target: usize, phi: f64 },
    Cnot { control: usize, target: usize },
    /// Projective measurement of `qubit`, result recorded in classical bit `bit`.
    Measure { qubit: usize, bit: usize },
    /// Applies `Phase(target, phi)` iff classical bit `bit` reads 1.
    ConditionalPhase { target: usize, phi: f64, bit: usize },
}

impl Instruction {
    /// Qubits the instruction acts on.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Instruction::H { qubit }
            | Instruction::X { qubit }
            | Instruction::Ry { qubit, .. }
            | Instruction::Phase { qubit, .. }
            | Instruction::Measure { qubit, .. }
            | Instruction::ConditionalPhase { target: qubit, .. } => vec![qubit],
            Instruction::ControlledPhase {
                control, target, ..
            }
            | Instruction::Cnot { control, target } => vec![control, target],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(
            self,
            Instruction::ControlledPhase { .. } | Instruction::Cnot { .. }
        )
    }
}

/// Where an outcome digit comes from: a live qubit read out at the end, or a
/// classical bit written by a mid-circuit measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeSource {
    Qubit(usize),
    ClassicalBit(usize),
}

/// An ordered instruction list plus the map assembling the outcome bitstring.
///
/// `final_measurement_map` pairs each outcome source with its position in the
/// outcome bitstring (position 0 = leftmost character). Builders emit the
/// most significant digit of each party at the lowest position.
#[derive(Clone, Debug)]
pub struct Circuit {
    pub num_qubits: usize,
    pub num_classical_bits: usize,
    pub instructions: Vec<Instruction>,
    pub final_measurement_map: Vec<(OutcomeSource, usize)>,
}

impl Circuit {
    /// Structural validation: index ranges, classical-bit causality, the
    /// final map being a position permutation with no doubly-read qubit.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.num_qubits == 0 || self.num_qubits > MAX_QUBITS {
            return Err(SimError::RegisterTooLarge {
                requested: self.num_qubits,
                max: MAX_QUBITS,
            });
        }
        let mut written = vec![false; self.num_classical_bits];
        for instr in &self.instructions {
            let qs = instr.qubits();
            for &q in &qs {
                if q >= self.num_qubits {
                    return Err(SimError::QubitOutOfRange {
                        index: q,
                        num_qubits: self.num_qubits,
                    });
                }
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(SimError::DuplicateOperands(qs[0]));
            }
            match *instr {
                Instruction::Measure { bit, .. } => {
                    if bit >= self.num_classical_bits {
                        return Err(SimError::ClassicalBitOutOfRange(
                            bit,
                            self.num_classical_bits,
                        ));
                    }
                    written[bit] = true;
                }
                Instruction::ConditionalPhase { bit, .. } => {
                    if bit >= self.num_classical_bits {
                        return Err(SimError::ClassicalBitOutOfRange(
                            bit,
                            self.num_classical_bits,
                        ));
                    }
                    if !written[bit] {
                        return Err(SimError::UnwrittenClassicalBit(bit));
                    }
                }
                _ => {}
            }
        }
        let mut seen_positions = vec![false; self.final_measurement_map.len()];
        let mut read_qubits = vec![false; self.num_qubits];
        for &(source, pos) in &self.final_measurement_map {
            if pos >= seen_positions.len() || seen_positions[pos] {
                return Err(SimError::BadMeasurementMap(self.final_measurement_map.len()));
            }
            seen_positions[pos] = true;
            match source {
                OutcomeSource::Qubit(q) => {
                    if q >= self.num_qubits {
                        return Err(SimError::QubitOutOfRange {
                            index: q,
                            num_qubits: self.num_qubits,
                        });
                    }
                    if read_qubits[q] {
                        return Err(SimError::DoubleFinalMeasurement(q));
                    }
                    read_qubits[q] = true;
                }
                OutcomeSource::ClassicalBit(c) => {
                    if c >= self.num_classical_bits {
                        return Err(SimError::ClassicalBitOutOfRange(
                            c,
                            self.num_classical_bits,
                        ));
                    }
                    if !written[c] {
                        return Err(SimError::UnwrittenClassicalBit(c));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn count_measurements(&self) -> usize {
        self.instructions
            .iter()
            .filter(|i| matches!(i, Instruction::Measure { .. }))
            .count()
    }

    /// Line-oriented text form: one instruction per line, angles to 12
    /// significant digits, then the outcome map. Used for debugging and
    /// golden tests.
    pub fn to_text(&self) -> String {
        fn angle(a: f64) -> String {
            format!("{:.11e}", a)
        }
        let mut out = String::new();
        let _ = writeln!(out, "qubits {}", self.num_qubits);
        let _ = writeln!(out, "cbits {}", self.num_classical_bits);
        for instr in &self.instructions {
            let line = match *instr {
                Instruction::H { qubit } => format!("H {qubit}"),
                Instruction::X { qubit } => format!("X {qubit}"),
                Instruction::Ry { qubit, theta } => format!("RY {qubit} {}", angle(theta)),
                Instruction::Phase { qubit, phi } => format!("PHASE {qubit} {}", angle(phi)),
                Instruction::ControlledPhase {
                    control,
                    target,
                    phi,
                } => format!("CPHASE {control} {target} {}", angle(phi)),
                Instruction::Cnot { control, target } => format!("CNOT {control} {target}"),
                Instruction::Measure { qubit, bit } => format!("MEASURE {qubit} c{bit}"),
                Instruction::ConditionalPhase { target, phi, bit } => {
                    format!("CPHASE_IF {target} c{bit} {}", angle(phi))
                }
            };
            let _ = writeln!(out, "{line}");
        }
        let mut map = self.final_measurement_map.clone();
        map.sort_by_key(|&(_, pos)| pos);
        for (source, pos) in map {
            let src = match source {
                OutcomeSource::Qubit(q) => format!("q{q}"),
                OutcomeSource::ClassicalBit(c) => format!("c{c}"),
            };
            let _ = writeln!(out, "map {src} -> {pos}");
        }
        out
    }
}

/// Raw measurement tallies for one circuit at one setting.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub counts: BTreeMap<String, u64>,
    pub total_shots: u64,
}

impl OutcomeCounts {
    pub fn record(&mut self, outcome: String) {
        *self.counts.entry(outcome).or_insert(0) += 1;
        self.total_shots += 1;
    }

    pub fn merge(mut self, other: OutcomeCounts) -> OutcomeCounts {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self.total_shots += other.total_shots;
        self
    }

    /// Normalized frequencies.
    pub fn frequencies(&self) -> BTreeMap<String, f64> {
        let total = self.total_shots as f64;
        self.counts
            .iter()
            .map(|(k, &v)| (k.clone(), v as f64 / total))
            .collect()
    }
}

/// Dense complex amplitude vector over `num_qubits` qubits.
#[derive(Clone, Debug)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0> on `num_qubits` qubits.
    pub fn new_zero(num_qubits: usize) -> Result<Self, SimError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(SimError::RegisterTooLarge {
                requested: num_qubits,
                max: MAX_QUBITS,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<(), SimError> {
        if q >= self.num_qubits {
            Err(SimError::QubitOutOfRange {
                index: q,
                num_qubits: self.num_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Applies an arbitrary single-qubit matrix [[m00, m01], [m10, m11]].
    fn apply_single(&mut self, q: usize, m: [Complex64; 4]) {
        let step = 1usize << q;
        let low_mask = step - 1;
        for i in 0..self.amps.len() / 2 {
            let s0 = ((i & !low_mask) << 1) | (i & low_mask);
            let s1 = s0 | step;
            let a0 = self.amps[s0];
            let a1 = self.amps[s1];
            self.amps[s0] = m[0] * a0 + m[1] * a1;
            self.amps[s1] = m[2] * a0 + m[3] * a1;
        }
    }

    pub fn apply_h(&mut self, q: usize) -> Result<(), SimError> {
        self.check_qubit(q)?;
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single(q, [h, h, h, -h]);
        Ok(())
    }

    pub fn apply_x(&mut self, q: usize) -> Result<(), SimError> {
        self.check_qubit(q)?;
        let step = 1usize << q;
        let low_mask = step - 1;
        for i in 0..self.amps.len() / 2 {
            let s0 = ((i & !low_mask) << 1) | (i & low_mask);
            self.amps.swap(s0, s0 | step);
        }
        Ok(())
    }

    pub fn apply_y(&mut self, q: usize) -> Result<(), SimError> {
        self.check_qubit(q)?;
        let i = Complex64::new(0.0, 1.0);
        let zero = Complex64::new(0.0, 0.0);
        self.apply_single(q, [zero, -i, i, zero]);
        Ok(())
    }

    pub fn apply_z(&mut self, q: usize) -> Result<(), SimError> {
        self.check_qubit(q)?;
        let step = 1usize << q;
        for (s, amp) in self.amps.iter_mut().enumerate() {
            if s & step != 0 {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    pub fn apply_ry(&mut self, q: usize, theta: f64) -> Result<(), SimError> {
        self.check_qubit(q)?;
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = Complex64::new((theta / 2.0).sin(), 0.0);
        self.apply_single(q, [c, -s, s, c]);
        Ok(())
    }

    pub fn apply_phase(&mut self, q: usize, phi: f64) -> Result<(), SimError> {
        self.check_qubit(q)?;
        let step = 1usize << q;
        let w = Complex64::from_polar(1.0, phi);
        for (s, amp) in self.amps.iter_mut().enumerate() {
            if s & step != 0 {
                *amp *= w;
            }
        }
        Ok(())
    }

    pub fn apply_controlled_phase(
        &mut self,
        control: usize,
        target: usize,
        phi: f64,
    ) -> Result<(), SimError> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(SimError::DuplicateOperands(control));
        }
        let mask = (1usize << control) | (1usize << target);
        let w = Complex64::from_polar(1.0, phi);
        for (s, amp) in self.amps.iter_mut().enumerate() {
            if s & mask == mask {
                *amp *= w;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<(), SimError> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(SimError::DuplicateOperands(control));
        }
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for s in 0..self.amps.len() {
            if s & cmask != 0 && s & tmask == 0 {
                self.amps.swap(s, s | tmask);
            }
        }
        Ok(())
    }

    /// Probability of reading 1 on `q`.
    pub fn probability_of_one(&self, q: usize) -> Result<f64, SimError> {
        self.check_qubit(q)?;
        let step = 1usize << q;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(s, _)| s & step != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects `q` onto `bit` and renormalizes; `prob` is that branch's
    /// probability (already computed by the caller).
    pub fn collapse(&mut self, q: usize, bit: bool, prob: f64) -> Result<(), SimError> {
        self.check_qubit(q)?;
        let step = 1usize << q;
        let scale = 1.0 / prob.sqrt();
        for (s, amp) in self.amps.iter_mut().enumerate() {
            if (s & step != 0) == bit {
                *amp *= Complex64::new(scale, 0.0);
            } else {
                *amp = Complex64::new(0.0, 0.0);
            }
        }
        Ok(())
    }

    fn check_norm(&self) -> Result<(), SimError> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            Err(SimError::NormDrift {
                norm,
                tolerance: NORM_TOLERANCE,
            })
        } else {
            Ok(())
        }
    }

    /// Samples a basis state from |amplitude|^2 using one uniform draw.
    pub fn sample_basis_state(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (s, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            if p > 0.0 {
                last_nonzero = s;
                acc += p;
                if u < acc {
                    return s;
                }
            }
        }
        // Rounding left acc slightly below 1; attribute the sliver to the
        // last outcome with support.
        last_nonzero
    }
}

/// Applies one instruction in place. Measurements draw from `draws`
/// (draw 0 of the instruction), record into `bits`, and renormalize.
/// Never renormalizes unitaries: drift beyond [`NORM_TOLERANCE`] is an error.
pub fn apply_instruction(
    state: &mut StateVector,
    instr: &Instruction,
    bits: &mut [Option<bool>],
    draws: &mut DrawStream<'_>,
) -> Result<(), SimError> {
    match *instr {
        Instruction::H { qubit } => state.apply_h(qubit)?,
        Instruction::X { qubit } => state.apply_x(qubit)?,
        Instruction::Ry { qubit, theta } => state.apply_ry(qubit, theta)?,
        Instruction::Phase { qubit, phi } => state.apply_phase(qubit, phi)?,
        Instruction::ControlledPhase {
            control,
            target,
            phi,
        } => state.apply_controlled_phase(control, target, phi)?,
        Instruction::Cnot { control, target } => state.apply_cnot(control, target)?,
        Instruction::Measure { qubit, bit } => {
            if bit >= bits.len() {
                return Err(SimError::ClassicalBitOutOfRange(bit, bits.len()));
            }
            let p1 = state.probability_of_one(qubit)?;
            let u = draws.next_uniform();
            let outcome = u < p1;
            let prob = if outcome { p1 } else { 1.0 - p1 };
            state.collapse(qubit, outcome, prob)?;
            bits[bit] = Some(outcome);
        }
        Instruction::ConditionalPhase { target, phi, bit } => {
            let value = bits
                .get(bit)
                .copied()
                .flatten()
                .ok_or(SimError::UnwrittenClassicalBit(bit))?;
            if value {
                state.apply_phase(target, phi)?;
            }
        }
    }
    state.check_norm()
}

/// Builds the outcome bitstring from the final state sample and the recorded
/// classical bits, per the circuit's measurement map.
pub fn assemble_outcome(
    circuit: &Circuit,
    basis_state: usize,
    bits: &[Option<bool>],
) -> Result<String, SimError> {
    let mut chars = vec![b'?'; circuit.final_measurement_map.len()];
    for &(source, pos) in &circuit.final_measurement_map {
        let bit = match source {
            OutcomeSource::Qubit(q) => (basis_state >> q) & 1 == 1,
            OutcomeSource::ClassicalBit(c) => bits
                .get(c)
                .copied()
                .flatten()
                .ok_or(SimError::UnwrittenClassicalBit(c))?,
        };
        chars[pos] = if bit { b'1' } else { b'0' };
    }
    Ok(String::from_utf8(chars).expect("ascii"))
}

fn run_shot_unchecked(circuit: &Circuit, rng: &ShotRng) -> Result<String, SimError> {
    let mut state = StateVector::new_zero(circuit.num_qubits)?;
    let mut bits = vec![None; circuit.num_classical_bits];
    for (idx, instr) in circuit.instructions.iter().enumerate() {
        let mut draws = rng.stream(idx as u64);
        apply_instruction(&mut state, instr, &mut bits, &mut draws)?;
    }
    // The terminal readout owns the draw slot one past the last instruction.
    let needs_final_sample = circuit
        .final_measurement_map
        .iter()
        .any(|(s, _)| matches!(s, OutcomeSource::Qubit(_)));
    let basis_state = if needs_final_sample {
        let mut draws = rng.stream(circuit.instructions.len() as u64);
        state.sample_basis_state(draws.next_uniform())
    } else {
        0
    };
    assemble_outcome(circuit, basis_state, &bits)
}

/// Executes one shot and returns the outcome bitstring. Deterministic given
/// the `rng` coordinates (seed, shot index).
pub fn run_shot(circuit: &Circuit, rng: &ShotRng) -> Result<String, SimError> {
    circuit.validate()?;
    run_shot_unchecked(circuit, rng)
}

/// Samples `shots` independent shots (parallel over shots) and tallies them.
/// Bit-identical output for equal `(circuit, shots, seed)` regardless of the
/// number of worker threads.
pub fn sample_counts(
    circuit: &Circuit,
    shots: u64,
    seed: u64,
) -> Result<OutcomeCounts, SimError> {
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    circuit.validate()?;
    (0..shots)
        .into_par_iter()
        .try_fold(OutcomeCounts::default, |mut acc, shot| {
            let outcome = run_shot_unchecked(circuit, &ShotRng::new(seed, shot))?;
            acc.record(outcome);
            Ok(acc)
        })
        .try_reduce(OutcomeCounts::default, |a, b| Ok(a.merge(b)))
}

/// Exact outcome distribution by enumerating both branches of every
/// mid-circuit measurement (branch weights multiply; branches and final
/// outcome entries below [`BRANCH_PRUNE_WEIGHT`] are dropped).
pub fn exact_distribution(circuit: &Circuit) -> Result<BTreeMap<String, f64>, SimError> {
    exact_distribution_with_cap(circuit, DEFAULT_BRANCH_CAP)
}

pub fn exact_distribution_with_cap(
    circuit: &Circuit,
    branch_cap: usize,
) -> Result<BTreeMap<String, f64>, SimError> {
    circuit.validate()?;
    let measurements = circuit.count_measurements();
    if measurements > MAX_ENUMERATED_MEASUREMENTS {
        return Err(SimError::TooManyMeasurements {
            found: measurements,
            max: MAX_ENUMERATED_MEASUREMENTS,
        });
    }

    struct Branch {
        state: StateVector,
        weight: f64,
        bits: Vec<Option<bool>>,
        pc: usize,
    }

    let mut distribution: BTreeMap<String, f64> = BTreeMap::new();
    let mut branch_count = 1usize;
    let mut stack = vec![Branch {
        state: StateVector::new_zero(circuit.num_qubits)?,
        weight: 1.0,
        bits: vec![None; circuit.num_classical_bits],
        pc: 0,
    }];

    while let Some(mut branch) = stack.pop() {
        let mut pruned = false;
        while branch.pc < circuit.instructions.len() {
            let instr = &circuit.instructions[branch.pc];
            branch.pc += 1;
            match *instr {
                Instruction::Measure { qubit, bit } => {
                    let p1 = branch.state.probability_of_one(qubit)?;
                    let p0 = 1.0 - p1;
                    let w1 = branch.weight * p1;
                    let w0 = branch.weight * p0;
                    if w1 >= BRANCH_PRUNE_WEIGHT {
                        branch_count += 1;
                        if branch_count > branch_cap {
                            return Err(SimError::BranchExplosion(branch_cap));
                        }
                        let mut state = branch.state.clone();
                        state.collapse(qubit, true, p1)?;
                        let mut bits = branch.bits.clone();
                        bits[bit] = Some(true);
                        stack.push(Branch {
                            state,
                            weight: w1,
                            bits,
                            pc: branch.pc,
                        });
                    }
                    if w0 >= BRANCH_PRUNE_WEIGHT {
                        branch.state.collapse(qubit, false, p0)?;
                        branch.bits[bit] = Some(false);
                        branch.weight = w0;
                    } else {
                        pruned = true;
                        break;
                    }
                }
                ref unitary => {
                    // Reuse the shot executor for everything non-branching;
                    // the draw stream is never touched by unitaries.
                    let rng = ShotRng::new(0, 0);
                    let mut draws = rng.stream(0);
                    apply_instruction(&mut branch.state, unitary, &mut branch.bits, &mut draws)?;
                }
            }
        }
        if pruned {
            continue;
        }
        for (s, amp) in branch.state.amplitudes().iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let key = assemble_outcome(circuit, s, &branch.bits)?;
            *distribution.entry(key).or_insert(0.0) += branch.weight * p;
        }
    }

    // Outcomes carrying less than the prune weight are floating-point dust
    // (e.g. a nominally-zero amplitude of ~1e-16 squares to ~1e-32).
    distribution.retain(|_, p| *p >= BRANCH_PRUNE_WEIGHT);
    let total: f64 = distribution.values().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(SimError::NormDrift {
            norm: total,
            tolerance: 1e-10,
        });
    }
    Ok(distribution)
}
