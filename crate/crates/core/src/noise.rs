//! Hardware-flavored noise: stochastic Pauli errors after gates, Z-dephasing
//! during scheduled idle time, and readout bit flips — plus readout-error
//! mitigation (restricted-support confusion inversion) and simplex
//! projection.
//!
//! Draw-slot discipline (see [`crate::rng`]): within each instruction's
//! stream, draw 0 belongs to the operation itself (measurement collapse, or
//! the terminal basis-state sample at the reserved index one past the last
//! instruction); noise consumes slots from 1 upward in a fixed order, and a
//! zero-probability event skips its slot without sampling, so a model with
//! all rates zero reproduces the noiseless sampler bit for bit.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{dependency_edges, DurationTable};
use crate::error::SimError;
use crate::rng::{DrawStream, ShotRng};
use crate::statevector::{
    assemble_outcome, Circuit, Instruction, OutcomeCounts, OutcomeSource, StateVector,
};

/// Asymmetric readout-flip probabilities: `eps01` misreads a true 0 as 1,
/// `eps10` misreads a true 1 as 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutError {
    pub eps01: f64,
    pub eps10: f64,
}

impl ReadoutError {
    pub fn symmetric(eps: f64) -> Self {
        ReadoutError {
            eps01: eps,
            eps10: eps,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        for (name, value) in [("eps01", self.eps01), ("eps10", self.eps10)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SimError::BadProbability {
                    name,
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Stochastic noise model applied on top of any circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability after every single-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after every two-qubit gate.
    pub p2: f64,
    /// Readout flips applied once per measurement (global default).
    pub readout: ReadoutError,
    /// Optional per-qubit override, indexed by physical qubit.
    #[serde(default)]
    pub per_qubit_readout: Option<Vec<ReadoutError>>,
    /// Z-flip probability per unit of scheduled idle time.
    pub idle_dephasing_rate: f64,
    /// Gate durations feeding the idle schedule.
    #[serde(default)]
    pub durations: DurationTable,
    /// Multiplier on idle dephasing when dynamical decoupling is on.
    pub dd_factor: f64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, value) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("dd_factor", self.dd_factor),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SimError::BadProbability {
                    name,
                    value,
                });
            }
        }
        if self.idle_dephasing_rate < 0.0 || !self.idle_dephasing_rate.is_finite() {
            return Err(SimError::BadProbability {
                name: "idle_dephasing_rate",
                value: self.idle_dephasing_rate,
            });
        }
        self.readout.validate()?;
        if let Some(table) = &self.per_qubit_readout {
            for r in table {
                r.validate()?;
            }
        }
        Ok(())
    }

    fn readout_for(&self, qubit: usize) -> ReadoutError {
        match &self.per_qubit_readout {
            Some(table) => table.get(qubit).copied().unwrap_or(self.readout),
            None => self.readout,
        }
    }
}

/// Baseline rates loosely modeled on a current superconducting device.
pub fn default_noise_model() -> NoiseModel {
    NoiseModel {
        p1: 2e-4,
        p2: 5e-3,
        readout: ReadoutError::symmetric(7.2e-3),
        per_qubit_readout: None,
        idle_dephasing_rate: 4e-3,
        durations: DurationTable::default(),
        dd_factor: 0.25,
    }
}

/// Idle windows extracted from an as-late-as-possible schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct IdleSchedule {
    /// Per instruction: (qubit, idle duration) windows ending right before
    /// that instruction. Only interior windows appear — time before a
    /// qubit's first instruction is spent in |0> where dephasing is inert,
    /// and time after its last operation cannot affect any outcome.
    pub gaps_before: Vec<Vec<(usize, f64)>>,
    /// Critical-path duration of the instruction list.
    pub total_duration: f64,
}

/// Schedules measurements and feed-forward in real time (at their earliest
/// feasible slots — classical control fires a conditional at fixed latency
/// after its trigger, it cannot defer it) and slides every unitary as late
/// as dependencies allow, which defers state preparation until needed.
/// Idle windows are what remains: qubits holding quantum data between two
/// pinned rounds.
pub fn compute_idle_schedule(circuit: &Circuit, durations: &DurationTable) -> IdleSchedule {
    let n = circuit.instructions.len();
    let preds = dependency_edges(circuit);
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, ps) in preds.iter().enumerate() {
        for &p in ps {
            succs[p].push(i);
        }
    }

    let mut asap_start = vec![0.0f64; n];
    let mut asap_finish = vec![0.0f64; n];
    let mut total = 0.0f64;
    for i in 0..n {
        let start = preds[i]
            .iter()
            .map(|&p| asap_finish[p])
            .fold(0.0f64, f64::max);
        asap_start[i] = start;
        asap_finish[i] = start + durations.of(&circuit.instructions[i]);
        total = total.max(asap_finish[i]);
    }

    let mut late_start = vec![0.0f64; n];
    for i in (0..n).rev() {
        let pinned = matches!(
            circuit.instructions[i],
            Instruction::Measure { .. } | Instruction::ConditionalPhase { .. }
        );
        late_start[i] = if pinned {
            asap_start[i]
        } else {
            let late_finish = succs[i]
                .iter()
                .map(|&s| late_start[s])
                .fold(total, f64::min);
            late_finish - durations.of(&circuit.instructions[i])
        };
    }

    let mut gaps_before: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut prev_on_qubit: Vec<Option<usize>> = vec![None; circuit.num_qubits];
    for (i, instr) in circuit.instructions.iter().enumerate() {
        for q in instr.qubits() {
            if let Some(p) = prev_on_qubit[q] {
                let prev_finish = late_start[p] + durations.of(&circuit.instructions[p]);
                let gap = late_start[i] - prev_finish;
                if gap > 1e-12 {
                    gaps_before[i].push((q, gap));
                }
            }
            prev_on_qubit[q] = Some(i);
        }
    }
    IdleSchedule {
        gaps_before,
        total_duration: total,
    }
}

/// Precomputed noisy executor for one circuit.
pub struct NoisySampler<'a> {
    circuit: &'a Circuit,
    model: &'a NoiseModel,
    dd_enabled: bool,
    schedule: IdleSchedule,
}

impl<'a> NoisySampler<'a> {
    pub fn new(
        circuit: &'a Circuit,
        model: &'a NoiseModel,
        dd_enabled: bool,
    ) -> Result<Self, SimError> {
        circuit.validate()?;
        model.validate()?;
        if let Some(table) = &model.per_qubit_readout {
            if table.len() != circuit.num_qubits {
                return Err(SimError::BadProbability {
                    name: "per_qubit_readout length",
                    value: table.len() as f64,
                });
            }
        }
        let schedule = compute_idle_schedule(circuit, &model.durations);
        Ok(NoisySampler {
            circuit,
            model,
            dd_enabled,
            schedule,
        })
    }

    fn idle_scale(&self) -> f64 {
        if self.dd_enabled {
            self.model.dd_factor
        } else {
            1.0
        }
    }

    /// Applies one of the 3 non-identity Paulis with total probability `p`,
    /// consuming exactly one draw slot when p > 0.
    fn depolarize_one(
        state: &mut StateVector,
        qubit: usize,
        p: f64,
        draws: &mut DrawStream<'_>,
    ) -> Result<(), SimError> {
        if p <= 0.0 {
            draws.skip();
            return Ok(());
        }
        let u = draws.next_uniform();
        if u < p {
            match ((u / p) * 3.0) as usize {
                0 => state.apply_x(qubit)?,
                1 => state.apply_y(qubit)?,
                _ => state.apply_z(qubit)?,
            }
        }
        Ok(())
    }

    /// Applies one of the 15 non-identity two-qubit Paulis with total
    /// probability `p`, consuming exactly one draw slot when p > 0.
    fn depolarize_two(
        state: &mut StateVector,
        q1: usize,
        q2: usize,
        p: f64,
        draws: &mut DrawStream<'_>,
    ) -> Result<(), SimError> {
        if p <= 0.0 {
            draws.skip();
            return Ok(());
        }
        let u = draws.next_uniform();
        if u < p {
            let which = (((u / p) * 15.0) as usize).min(14) + 1; // 1..=15
            for (q, code) in [(q1, which % 4), (q2, which / 4)] {
                match code {
                    1 => state.apply_x(q)?,
                    2 => state.apply_y(q)?,
                    3 => state.apply_z(q)?,
                    _ => {}
                }
            }
        }
        Ok(())
    }

    fn maybe_flip(
        &self,
        qubit: usize,
        true_bit: bool,
        draws: &mut DrawStream<'_>,
    ) -> bool {
        let readout = self.model.readout_for(qubit);
        let eps = if true_bit {
            readout.eps10
        } else {
            readout.eps01
        };
        if eps <= 0.0 {
            draws.skip();
            return true_bit;
        }
        let u = draws.next_uniform();
        if u < eps {
            !true_bit
        } else {
            true_bit
        }
    }

    pub fn run_shot(&self, rng: &ShotRng) -> Result<String, SimError> {
        let mut state = StateVector::new_zero(self.circuit.num_qubits)?;
        let mut bits = vec![None; self.circuit.num_classical_bits];
        let idle_scale = self.idle_scale();
        for (idx, instr) in self.circuit.instructions.iter().enumerate() {
            let mut noise_draws = rng.stream(idx as u64);
            noise_draws.skip(); // slot 0 is the operation's own draw

            // Idle dephasing accumulated since each operand's previous use.
            for &(qubit, gap) in &self.schedule.gaps_before[idx] {
                let p = (self.model.idle_dephasing_rate * gap * idle_scale).min(1.0);
                if p <= 0.0 {
                    noise_draws.skip();
                    continue;
                }
                if noise_draws.next_uniform() < p {
                    state.apply_z(qubit)?;
                }
            }

            match *instr {
                Instruction::Measure { qubit, bit } => {
                    let p1 = state.probability_of_one(qubit)?;
                    let mut op_draw = rng.stream(idx as u64);
                    let true_bit = op_draw.next_uniform() < p1;
                    let prob = if true_bit { p1 } else { 1.0 - p1 };
                    state.collapse(qubit, true_bit, prob)?;
                    // The device collapses by the true bit but records (and
                    // feeds forward) the possibly flipped readout.
                    bits[bit] = Some(self.maybe_flip(qubit, true_bit, &mut noise_draws));
                }
                Instruction::ConditionalPhase { target, phi, bit } => {
                    let value = bits
                        .get(bit)
                        .copied()
                        .flatten()
                        .ok_or(SimError::UnwrittenClassicalBit(bit))?;
                    if value {
                        state.apply_phase(target, phi)?;
                        Self::depolarize_one(&mut state, target, self.model.p1, &mut noise_draws)?;
                    }
                }
                Instruction::H { qubit } => {
                    state.apply_h(qubit)?;
                    Self::depolarize_one(&mut state, qubit, self.model.p1, &mut noise_draws)?;
                }
                Instruction::X { qubit } => {
                    state.apply_x(qubit)?;
                    Self::depolarize_one(&mut state, qubit, self.model.p1, &mut noise_draws)?;
                }
                Instruction::Ry { qubit, theta } => {
                    state.apply_ry(qubit, theta)?;
                    Self::depolarize_one(&mut state, qubit, self.model.p1, &mut noise_draws)?;
                }
                Instruction::Phase { qubit, phi } => {
                    state.apply_phase(qubit, phi)?;
                    Self::depolarize_one(&mut state, qubit, self.model.p1, &mut noise_draws)?;
                }
                Instruction::ControlledPhase {
                    control,
                    target,
                    phi,
                } => {
                    state.apply_controlled_phase(control, target, phi)?;
                    Self::depolarize_two(&mut state, control, target, self.model.p2, &mut noise_draws)?;
                }
                Instruction::Cnot { control, target } => {
                    state.apply_cnot(control, target)?;
                    Self::depolarize_two(&mut state, control, target, self.model.p2, &mut noise_draws)?;
                }
            }
        }

        // Terminal readout at the reserved instruction index: slot 0 samples
        // the basis state, later slots flip each live-qubit digit.
        let needs_final = self
            .circuit
            .final_measurement_map
            .iter()
            .any(|(s, _)| matches!(s, OutcomeSource::Qubit(_)));
        let basis_state = if needs_final {
            let mut draws = rng.stream(self.circuit.instructions.len() as u64);
            let sampled = state.sample_basis_state(draws.next_uniform());
            let mut flipped = sampled;
            for &(source, _) in &self.circuit.final_measurement_map {
                if let OutcomeSource::Qubit(q) = source {
                    let true_bit = (sampled >> q) & 1 == 1;
                    if self.maybe_flip(q, true_bit, &mut draws) != true_bit {
                        flipped ^= 1 << q;
                    }
                }
            }
            flipped
        } else {
            0
        };
        assemble_outcome(self.circuit, basis_state, &bits)
    }

    /// Parallel tally over shots, bit-identical for equal (shots, seed).
    pub fn sample_counts(&self, shots: u64, seed: u64) -> Result<OutcomeCounts, SimError> {
        if shots == 0 {
            return Err(SimError::NoShots);
        }
        (0..shots)
            .into_par_iter()
            .try_fold(OutcomeCounts::default, |mut acc, shot| {
                acc.record(self.run_shot(&ShotRng::new(seed, shot))?);
                Ok(acc)
            })
            .try_reduce(OutcomeCounts::default, |a, b| Ok(a.merge(b)))
    }
}

/// One noisy shot without keeping the sampler around.
pub fn noisy_run_shot(
    circuit: &Circuit,
    model: &NoiseModel,
    dd_enabled: bool,
    rng: &ShotRng,
) -> Result<String, SimError> {
    NoisySampler::new(circuit, model, dd_enabled)?.run_shot(rng)
}

/// Tensor-product readout confusion: one column-stochastic 2x2 factor per
/// outcome digit, `m[recorded][true]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionOperator {
    /// Number of outcome digits.
    n_bits: usize,
    /// Factor per digit position (position 0 = leftmost character).
    factors: Vec<[[f64; 2]; 2]>,
}

/// Largest outcome register the dense tensor sweep will handle.
const MAX_CONFUSION_BITS: usize = 16;
/// L1 residual at which the iterative unfolding stops.
const MITIGATION_TOLERANCE: f64 = 1e-8;

/// Builds the confusion operator for a circuit under a model: each outcome
/// digit inherits the readout error of the physical qubit it was read from.
pub fn build_confusion(
    circuit: &Circuit,
    model: &NoiseModel,
) -> Result<ConfusionOperator, SimError> {
    circuit.validate()?;
    model.validate()?;
    let n_bits = circuit.final_measurement_map.len();
    if n_bits == 0 {
        return Err(SimError::EmptySupport);
    }
    if n_bits > MAX_CONFUSION_BITS {
        return Err(SimError::RegisterTooLarge {
            requested: n_bits,
            max: MAX_CONFUSION_BITS,
        });
    }
    // Which physical qubit produced each classical bit.
    let mut bit_source = vec![None; circuit.num_classical_bits];
    for instr in &circuit.instructions {
        if let Instruction::Measure { qubit, bit } = *instr {
            bit_source[bit] = Some(qubit);
        }
    }
    let mut factors = vec![[[0.0; 2]; 2]; n_bits];
    for &(source, pos) in &circuit.final_measurement_map {
        let qubit = match source {
            OutcomeSource::Qubit(q) => q,
            OutcomeSource::ClassicalBit(c) => {
                bit_source[c].ok_or(SimError::UnwrittenClassicalBit(c))?
            }
        };
        let r = model.readout_for(qubit);
        factors[pos] = [[1.0 - r.eps01, r.eps10], [r.eps01, 1.0 - r.eps10]];
    }
    Ok(ConfusionOperator { n_bits, factors })
}

impl ConfusionOperator {
    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn from_factors(factors: Vec<[[f64; 2]; 2]>) -> Result<Self, SimError> {
        if factors.is_empty() {
            return Err(SimError::EmptySupport);
        }
        if factors.len() > MAX_CONFUSION_BITS {
            return Err(SimError::RegisterTooLarge {
                requested: factors.len(),
                max: MAX_CONFUSION_BITS,
            });
        }
        Ok(ConfusionOperator {
            n_bits: factors.len(),
            factors,
        })
    }

    fn key_to_index(&self, key: &str) -> Result<usize, SimError> {
        if key.len() != self.n_bits || !key.bytes().all(|c| c == b'0' || c == b'1') {
            return Err(SimError::MalformedBitstring {
                string: key.into(),
                found: key.len(),
                expected: self.n_bits,
            });
        }
        Ok(key
            .bytes()
            .fold(0usize, |v, c| (v << 1) | (c - b'0') as usize))
    }

    fn index_to_key(&self, mut index: usize) -> String {
        let mut chars = vec![b'0'; self.n_bits];
        for pos in (0..self.n_bits).rev() {
            chars[pos] = b'0' + (index & 1) as u8;
            index >>= 1;
        }
        String::from_utf8(chars).expect("ascii")
    }

    /// Dense tensor application of all per-digit factors to a full vector
    /// indexed like [`index_to_key`] (char 0 = most significant bit).
    fn apply_dense(&self, vec: &mut [f64]) {
        let n = self.n_bits;
        for (pos, m) in self.factors.iter().enumerate() {
            let step = 1usize << (n - 1 - pos);
            let low_mask = step - 1;
            for i in 0..vec.len() / 2 {
                let s0 = ((i & !low_mask) << 1) | (i & low_mask);
                let s1 = s0 | step;
                let t0 = vec[s0];
                let t1 = vec[s1];
                vec[s0] = m[0][0] * t0 + m[0][1] * t1;
                vec[s1] = m[1][0] * t0 + m[1][1] * t1;
            }
        }
    }

    /// Pushes a true distribution through the confusion (recorded = M true).
    pub fn apply(&self, dist: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>, SimError> {
        let mut full = vec![0.0f64; 1 << self.n_bits];
        for (key, &p) in dist {
            full[self.key_to_index(key)?] += p;
        }
        self.apply_dense(&mut full);
        Ok(full
            .into_iter()
            .enumerate()
            .filter(|&(_, p)| p != 0.0)
            .map(|(i, p)| (self.index_to_key(i), p))
            .collect())
    }

    /// Unfolds observed frequencies into a quasi-probability vector on the
    /// observed support: solves (M restricted to support) q = p by damped
    /// Jacobi iteration, matrix-free via dense tensor sweeps.
    pub fn mitigate_probabilities(
        &self,
        observed: &BTreeMap<String, f64>,
    ) -> Result<BTreeMap<String, f64>, SimError> {
        if observed.is_empty() {
            return Err(SimError::EmptySupport);
        }
        let support: Vec<usize> = observed
            .keys()
            .map(|k| self.key_to_index(k))
            .collect::<Result<_, _>>()?;
        let p_hat: Vec<f64> = observed.values().copied().collect();

        // Diagonal of the restricted matrix: product of per-digit diagonal
        // entries for that bit pattern.
        let diag: Vec<f64> = support
            .iter()
            .map(|&s| {
                (0..self.n_bits)
                    .map(|pos| {
                        let bit = (s >> (self.n_bits - 1 - pos)) & 1;
                        self.factors[pos][bit][bit]
                    })
                    .product()
            })
            .collect();
        if diag.iter().any(|&d| d <= 0.0) {
            return Err(SimError::SolverDiverged {
                residual: f64::INFINITY,
                tolerance: MITIGATION_TOLERANCE,
                iterations: 0,
            });
        }

        let mut q = p_hat.clone();
        let mut full = vec![0.0f64; 1 << self.n_bits];
        let max_iterations = 100 + 10 * support.len();
        let mut residual = f64::INFINITY;
        for _ in 0..max_iterations {
            // A q via scatter -> dense apply -> gather.
            full.iter_mut().for_each(|v| *v = 0.0);
            for (&s, &v) in support.iter().zip(&q) {
                full[s] = v;
            }
            self.apply_dense(&mut full);
            residual = 0.0;
            for i in 0..support.len() {
                let r = p_hat[i] - full[support[i]];
                residual += r.abs();
                q[i] += r / diag[i];
            }
            if residual <= MITIGATION_TOLERANCE {
                return Ok(support
                    .iter()
                    .zip(&q)
                    .map(|(&s, &v)| (self.index_to_key(s), v))
                    .collect());
            }
        }
        Err(SimError::SolverDiverged {
            residual,
            tolerance: MITIGATION_TOLERANCE,
            iterations: max_iterations,
        })
    }

    /// [`mitigate_probabilities`](Self::mitigate_probabilities) on raw counts.
    pub fn mitigate(&self, counts: &OutcomeCounts) -> Result<BTreeMap<String, f64>, SimError> {
        if counts.total_shots == 0 {
            return Err(SimError::NoShots);
        }
        self.mitigate_probabilities(&counts.frequencies())
    }
}

/// Euclidean projection of a real vector onto the probability simplex
/// (sorting construction).
pub fn simplex_project_slice(values: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if v - candidate > 0.0 {
            tau = candidate;
        }
    }
    values.iter().map(|&v| (v - tau).max(0.0)).collect()
}

/// Projects a quasi-distribution onto the simplex over its own support.
pub fn simplex_project(quasi: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let values: Vec<f64> = quasi.values().copied().collect();
    let projected = simplex_project_slice(&values);
    quasi
        .keys()
        .cloned()
        .zip(projected)
        .collect()
}
