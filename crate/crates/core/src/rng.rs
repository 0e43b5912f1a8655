//! Counter-based random streams for reproducible shot sampling.
//!
//! Every random decision in a shot is addressed by the coordinates
//! (global seed, shot index, instruction index, draw index) and produced by
//! stateless mixing, so the same coordinates always yield the same draw no
//! matter which thread executes the shot or whether unrelated draws (e.g.
//! noise draws that a noiseless run never makes) are skipped.  Measurement
//! always consumes draw 0 of its instruction; noise draws start at 1.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random source for a single shot, keyed by (seed, shot index).
#[derive(Clone, Copy, Debug)]
pub struct ShotRng {
    key: u64,
}

impl ShotRng {
    pub fn new(seed: u64, shot: u64) -> Self {
        let key = splitmix64(splitmix64(seed) ^ shot.wrapping_mul(0xA24B_AED4_963E_E407));
        ShotRng { key }
    }

    fn mix(&self, instr: u64, draw: u64) -> u64 {
        splitmix64(splitmix64(self.key ^ instr.wrapping_mul(0x9FB2_1C65_1E98_DF25)) ^ draw)
    }

    /// Uniform draw in [0, 1) with 53-bit resolution.
    pub fn uniform(&self, instr: u64, draw: u64) -> f64 {
        (self.mix(instr, draw) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Sequential draw stream for one instruction execution.
    pub fn stream(&self, instr: u64) -> DrawStream<'_> {
        DrawStream {
            rng: self,
            instr,
            next: 0,
        }
    }
}

/// Hands out the draws of one instruction in order (0, 1, 2, ...).
pub struct DrawStream<'a> {
    rng: &'a ShotRng,
    instr: u64,
    next: u64,
}

impl DrawStream<'_> {
    pub fn next_uniform(&mut self) -> f64 {
        let u = self.rng.uniform(self.instr, self.next);
        self.next += 1;
        u
    }

    /// Skip a draw slot without sampling (keeps later draw indices aligned
    /// when a zero-probability event needs no randomness).
    pub fn skip(&mut self) {
        self.next += 1;
    }
}
