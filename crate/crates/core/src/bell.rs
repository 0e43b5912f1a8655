//! Bell-functional evaluation on two-party, two-setting, d-outcome data.
//!
//! The central object is the collection of four conditional distributions
//! p(a, b | x, y) for settings x, y in {1, 2} and outcomes a, b in 0..d.
//! From it we evaluate the ordering-based functional (four order
//! probabilities, local bound 2), its rescaled form (local bound 2,
//! quantum maximum growing with d), and pairwise qubit CHSH marginals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::statevector::OutcomeCounts;

/// Four conditional outcome tables p(a, b | x, y), each row-major `a * d + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    d: usize,
    tables: [Vec<f64>; 4],
}

/// Ordering functional value with its four constituent probabilities and the
/// rescaled form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellResult {
    /// 1 - P(A1<B1) - P(A2<B2) + P(A2<B1) + P(A1<=B2); at most 2 classically.
    pub izg: f64,
    /// Affine rescaling (2d/(d-1)) * (izg - 2) + 2; also at most 2 classically.
    pub i_d: f64,
    pub p_a1_lt_b1: f64,
    pub p_a2_lt_b2: f64,
    pub p_a2_lt_b1: f64,
    pub p_a1_le_b2: f64,
}

/// CHSH correlators of one qubit pair, indexed `(x-1)*2 + (y-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMarginal {
    /// 1-based character position within Alice's outcome block.
    pub i: usize,
    /// 1-based character position within Bob's outcome block.
    pub j: usize,
    pub e: [f64; 4],
}

/// Tolerance for "each setting's table sums to one".
const NORMALIZATION_TOLERANCE: f64 = 1e-6;

fn idx(x: u8, y: u8) -> usize {
    (x as usize - 1) * 2 + (y as usize - 1)
}

impl JointDistribution {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn probability(&self, x: u8, y: u8, a: usize, b: usize) -> f64 {
        self.tables[idx(x, y)][a * self.d + b]
    }

    pub fn table(&self, x: u8, y: u8) -> &[f64] {
        &self.tables[idx(x, y)]
    }

    /// Validates and wraps four row-major tables (index `(x-1)*2+(y-1)`).
    pub fn from_tables(d: usize, tables: [Vec<f64>; 4]) -> Result<Self, SimError> {
        if d < 2 {
            return Err(SimError::DimensionTooSmall(d));
        }
        for (t, table) in tables.iter().enumerate() {
            let (x, y) = (t as u8 / 2 + 1, t as u8 % 2 + 1);
            if table.len() != d * d {
                return Err(SimError::NotNormalized {
                    x,
                    y,
                    sum: table.len() as f64,
                });
            }
            let mut sum = 0.0;
            for (cell, &p) in table.iter().enumerate() {
                if p < 0.0 {
                    return Err(SimError::NegativeProbability {
                        value: p,
                        a: cell / d,
                        b: cell % d,
                        x,
                        y,
                    });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(SimError::NotNormalized { x, y, sum });
            }
        }
        Ok(JointDistribution { d, tables })
    }

    /// Builds the four tables by evaluating `p(x, y, a, b)`.
    pub fn from_probabilities(
        d: usize,
        p: impl Fn(u8, u8, usize, usize) -> f64,
    ) -> Result<Self, SimError> {
        let build = |x: u8, y: u8| -> Vec<f64> {
            let mut t = vec![0.0; d * d];
            for a in 0..d {
                for b in 0..d {
                    t[a * d + b] = p(x, y, a, b);
                }
            }
            t
        };
        Self::from_tables(d, [build(1, 1), build(1, 2), build(2, 1), build(2, 2)])
    }

    /// Parses per-setting outcome tallies. Keys are 2n-character bitstrings,
    /// Alice's digits first, most significant first within each party.
    pub fn from_counts(
        n: usize,
        counts: &BTreeMap<(u8, u8), OutcomeCounts>,
    ) -> Result<Self, SimError> {
        let weighted = |x: u8, y: u8| -> Result<Vec<(String, f64)>, SimError> {
            let c = counts
                .get(&(x, y))
                .ok_or(SimError::MissingSetting { x, y })?;
            if c.total_shots == 0 {
                return Err(SimError::NoShots);
            }
            let total = c.total_shots as f64;
            Ok(c.counts
                .iter()
                .map(|(k, &v)| (k.clone(), v as f64 / total))
                .collect())
        };
        let mut tables = Vec::with_capacity(4);
        for (x, y) in [(1u8, 1u8), (1, 2), (2, 1), (2, 2)] {
            tables.push(table_from_weighted(n, &weighted(x, y)?)?);
        }
        let mut it = tables.into_iter();
        Self::from_tables(
            1 << n,
            [
                it.next().unwrap(),
                it.next().unwrap(),
                it.next().unwrap(),
                it.next().unwrap(),
            ],
        )
    }

    /// Same as [`from_counts`](Self::from_counts) for exact probability maps.
    pub fn from_outcome_probabilities(
        n: usize,
        dists: &BTreeMap<(u8, u8), BTreeMap<String, f64>>,
    ) -> Result<Self, SimError> {
        let mut tables = Vec::with_capacity(4);
        for (x, y) in [(1u8, 1u8), (1, 2), (2, 1), (2, 2)] {
            let map = dists
                .get(&(x, y))
                .ok_or(SimError::MissingSetting { x, y })?;
            let weighted: Vec<(String, f64)> =
                map.iter().map(|(k, &p)| (k.clone(), p)).collect();
            tables.push(table_from_weighted(n, &weighted)?);
        }
        let mut it = tables.into_iter();
        Self::from_tables(
            1 << n,
            [
                it.next().unwrap(),
                it.next().unwrap(),
                it.next().unwrap(),
                it.next().unwrap(),
            ],
        )
    }

    /// P(A_x < B_y) (strict) or P(A_x <= B_y).
    pub fn prob_ordered(&self, x: u8, y: u8, strict: bool) -> f64 {
        let table = &self.tables[idx(x, y)];
        let mut total = 0.0;
        for a in 0..self.d {
            for b in 0..self.d {
                let ordered = if strict { a < b } else { a <= b };
                if ordered {
                    total += table[a * self.d + b];
                }
            }
        }
        total
    }

    /// Evaluates the ordering functional and its rescaled form.
    pub fn izg(&self) -> BellResult {
        let p_a1_lt_b1 = self.prob_ordered(1, 1, true);
        let p_a2_lt_b2 = self.prob_ordered(2, 2, true);
        let p_a2_lt_b1 = self.prob_ordered(2, 1, true);
        let p_a1_le_b2 = self.prob_ordered(1, 2, false);
        let izg = 1.0 - p_a1_lt_b1 - p_a2_lt_b2 + p_a2_lt_b1 + p_a1_le_b2;
        BellResult {
            izg,
            i_d: izg_to_id(izg, self.d),
            p_a1_lt_b1,
            p_a2_lt_b2,
            p_a2_lt_b1,
            p_a1_le_b2,
        }
    }

    /// Direct evaluation of the rescaled functional as a single weighted sum
    /// over outcome offsets k = (a - b) mod d. Agrees with
    /// `izg_to_id(self.izg().izg, d)` on every no-signaling distribution.
    pub fn id_compact(&self) -> f64 {
        let d = self.d;
        let dm1 = (d - 1) as f64;
        let mut total = 0.0;
        for x in 1..=2u8 {
            for y in 1..=2u8 {
                let table = &self.tables[idx(x, y)];
                for a in 0..d {
                    for b in 0..d {
                        let k = (a + d - b) % d;
                        let eps = match (x, y) {
                            (1, 1) | (2, 2) => -2.0 * k as f64 / dm1,
                            (2, 1) => 2.0 * k as f64 / dm1,
                            (1, 2) => 2.0 * (((k + d - 1) % d) as f64) / dm1,
                            _ => unreachable!(),
                        };
                        total += eps * table[a * d + b];
                    }
                }
            }
        }
        total
    }

    /// Alice's marginal under setting pair (x, y).
    pub fn marginal_a(&self, x: u8, y: u8) -> Vec<f64> {
        let table = &self.tables[idx(x, y)];
        (0..self.d)
            .map(|a| (0..self.d).map(|b| table[a * self.d + b]).sum())
            .collect()
    }

    /// Bob's marginal under setting pair (x, y).
    pub fn marginal_b(&self, x: u8, y: u8) -> Vec<f64> {
        let table = &self.tables[idx(x, y)];
        (0..self.d)
            .map(|b| (0..self.d).map(|a| table[a * self.d + b]).sum())
            .collect()
    }

    /// CHSH correlators of the qubit pair at character positions (i, j) of
    /// the two outcome blocks (1-based; position 1 = most significant digit).
    /// Requires d to be a power of two.
    pub fn pairwise_marginal(&self, i: usize, j: usize) -> Result<PairwiseMarginal, SimError> {
        if !self.d.is_power_of_two() {
            return Err(SimError::NotPowerOfTwo(self.d));
        }
        let n = self.d.trailing_zeros() as usize;
        if i == 0 || i > n || j == 0 || j > n {
            return Err(SimError::PairOutOfRange { i, j, n });
        }
        let mut e = [0.0f64; 4];
        for x in 1..=2u8 {
            for y in 1..=2u8 {
                let table = &self.tables[idx(x, y)];
                let mut corr = 0.0;
                for a in 0..self.d {
                    let bit_a = (a >> (n - i)) & 1;
                    for b in 0..self.d {
                        let bit_b = (b >> (n - j)) & 1;
                        let sign = if bit_a == bit_b { 1.0 } else { -1.0 };
                        corr += sign * table[a * self.d + b];
                    }
                }
                e[idx(x, y)] = corr;
            }
        }
        Ok(PairwiseMarginal { i, j, e })
    }
}

fn table_from_weighted(n: usize, weighted: &[(String, f64)]) -> Result<Vec<f64>, SimError> {
    let d = 1usize << n;
    let mut table = vec![0.0f64; d * d];
    for (key, w) in weighted {
        if key.len() != 2 * n || !key.bytes().all(|c| c == b'0' || c == b'1') {
            return Err(SimError::MalformedBitstring {
                string: key.clone(),
                found: key.len(),
                expected: 2 * n,
            });
        }
        let value = |s: &str| s.bytes().fold(0usize, |v, c| (v << 1) | (c - b'0') as usize);
        let a = value(&key[..n]);
        let b = value(&key[n..]);
        table[a * d + b] += w;
    }
    Ok(table)
}

/// Affine rescaling between the two functional normalizations:
/// I_d = (2d/(d-1)) * (izg - 2) + 2.
pub fn izg_to_id(izg: f64, d: usize) -> f64 {
    let d = d as f64;
    2.0 * d / (d - 1.0) * (izg - 2.0) + 2.0
}

/// Maximum CHSH value of one pairwise marginal over the four sign choices.
pub fn chsh_max(marginal: &PairwiseMarginal) -> f64 {
    let e = marginal.e;
    let (e11, e12, e21, e22) = (e[0], e[1], e[2], e[3]);
    [
        e11 + e12 + e21 - e22,
        e11 + e12 - e21 + e22,
        e11 - e12 + e21 + e22,
        -e11 + e12 + e21 + e22,
    ]
    .into_iter()
    .map(f64::abs)
    .fold(0.0, f64::max)
}
