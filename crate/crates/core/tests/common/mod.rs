//! Shared oracles for the integration tests. Everything here is computed
//! independently of the library's evaluation paths: closed-form target
//! distributions, brute-force enumerations, and small generators.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Phase-shift parameter of each setting (exact binary fractions).
pub fn angle_parameter(party_is_alice: bool, index: u8) -> f64 {
    match (party_is_alice, index) {
        (true, 1) => 0.0,
        (true, 2) => 0.5,
        (false, 1) => 0.25,
        (false, 2) => -0.25,
        _ => panic!("bad setting index"),
    }
}

/// Closed-form outcome distribution of the ideal experiment:
/// p(a, b | x, y) = sin^2(pi s) / (d^3 sin^2(pi (a - b + s) / d)) with
/// s = alpha_x + beta_y. The shift s is never an integer, so the
/// denominator never vanishes.
pub fn ideal_probability(d: usize, x: u8, y: u8, a: usize, b: usize) -> f64 {
    let s = angle_parameter(true, x) + angle_parameter(false, y);
    let df = d as f64;
    let num = (PI * s).sin().powi(2);
    let den = (PI * (a as f64 - b as f64 + s) / df).sin().powi(2);
    num / (df.powi(3) * den)
}

/// Ordering functional straight from the closed form, bypassing the
/// library's table types entirely.
pub fn ideal_izg_direct(d: usize) -> f64 {
    let sum_over = |x: u8, y: u8, keep: &dyn Fn(usize, usize) -> bool| -> f64 {
        let mut total = 0.0;
        for a in 0..d {
            for b in 0..d {
                if keep(a, b) {
                    total += ideal_probability(d, x, y, a, b);
                }
            }
        }
        total
    };
    1.0 - sum_over(1, 1, &|a, b| a < b) - sum_over(2, 2, &|a, b| a < b)
        + sum_over(2, 1, &|a, b| a < b)
        + sum_over(1, 2, &|a, b| a <= b)
}

/// Total variation distance between two string-keyed distributions.
pub fn tv_distance(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> f64 {
    let mut keys: Vec<&String> = p.keys().collect();
    for k in q.keys() {
        if !p.contains_key(k) {
            keys.push(k);
        }
    }
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Tiny deterministic generator (64-bit xorshift*), independent of the
/// library's sampling RNG.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Random mixture of local deterministic strategies: always no-signaling
/// (and in fact local). Tables indexed [(x-1)*2+(y-1)][a*d+b].
pub fn random_local_mixture(d: usize, components: usize, rng: &mut TestRng) -> [Vec<f64>; 4] {
    let mut tables = [
        vec![0.0; d * d],
        vec![0.0; d * d],
        vec![0.0; d * d],
        vec![0.0; d * d],
    ];
    let weights: Vec<f64> = (0..components).map(|_| rng.uniform() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let (a1, a2, b1, b2) = (rng.below(d), rng.below(d), rng.below(d), rng.below(d));
        let lambda = w / total;
        tables[0][a1 * d + b1] += lambda;
        tables[1][a1 * d + b2] += lambda;
        tables[2][a2 * d + b1] += lambda;
        tables[3][a2 * d + b2] += lambda;
    }
    tables
}

/// Random normalized-but-otherwise-arbitrary tables (generally signaling).
pub fn random_normalized_tables(d: usize, rng: &mut TestRng) -> [Vec<f64>; 4] {
    let mut tables = [
        vec![0.0; d * d],
        vec![0.0; d * d],
        vec![0.0; d * d],
        vec![0.0; d * d],
    ];
    for t in &mut tables {
        let mut sum = 0.0;
        for cell in t.iter_mut() {
            *cell = rng.uniform() + 1e-9;
            sum += *cell;
        }
        for cell in t.iter_mut() {
            *cell /= sum;
        }
    }
    tables
}
