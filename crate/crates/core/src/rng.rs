//! Counter-based random streams.
//!
//! Every sample is a pure function of `(master_seed, stream_id, position)`:
//! the Philox4x32-10 block cipher is keyed with the master seed and applied
//! to a 128-bit counter whose upper half is the stream id. Replication `r`
//! always reads stream `r`, so the result of an experiment does not depend on
//! how replications are scheduled across threads.

use crate::error::{Error, Result};

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;
const PHILOX_ROUNDS: usize = 10;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// One Philox4x32-10 block.
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..PHILOX_ROUNDS {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A single-owner random stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngState {
    key: u64,
    stream: u64,
    block: u64,
    buf: [u32; 4],
    pos: usize,
}

/// Opens stream `stream_id` of the generator keyed by `master_seed`.
pub fn make_rng(master_seed: u64, stream_id: u64) -> RngState {
    RngState {
        key: master_seed,
        stream: stream_id,
        block: 0,
        buf: [0; 4],
        pos: 4,
    }
}

impl RngState {
    pub fn master_seed(&self) -> u64 {
        self.key
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Derives an independent child stream for a separate purpose (rewards,
    /// reservoir, policy noise). The child only depends on this stream's
    /// identity, never on how far it has been consumed.
    pub fn fork(&self, lane: u64) -> RngState {
        RngState {
            key: splitmix64(self.key ^ splitmix64(lane.wrapping_add(0x5EED))),
            stream: self.stream,
            block: 0,
            buf: [0; 4],
            pos: 4,
        }
    }

    fn refill(&mut self) {
        let counter = [
            self.block as u32,
            (self.block >> 32) as u32,
            self.stream as u32,
            (self.stream >> 32) as u32,
        ];
        self.buf = philox4x32(counter, [self.key as u32, (self.key >> 32) as u32]);
        self.block = self.block.wrapping_add(1);
        self.pos = 0;
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        if self.pos == 4 {
            self.refill();
        }
        let v = self.buf[self.pos];
        self.pos += 1;
        v
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let lo = u64::from(self.next_u32());
        let hi = u64::from(self.next_u32());
        (hi << 32) | lo
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Draws 1 with probability `p`.
    pub fn sample_bernoulli(&mut self, p: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain("p", p, "a probability in [0, 1]"));
        }
        Ok(self.bernoulli_unchecked(p))
    }

    #[inline]
    pub(crate) fn bernoulli_unchecked(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Standard normal draw (Box-Muller, cosine branch only).
    pub fn sample_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    #[test]
    fn philox_known_answers() {
        assert_eq!(
            philox4x32([0; 4], [0; 2]),
            [0x6627_e8d5, 0xe169_c58d, 0xbc57_ac4c, 0x9b00_dbd8]
        );
        assert_eq!(
            philox4x32([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f_276d, 0x41c8_3b0e, 0xa20b_c7c6, 0x6d54_51fd]
        );
        assert_eq!(
            philox4x32(
                [0x243f_6a88, 0x85a3_08d3, 0x1319_8a2e, 0x0370_7344],
                [0xa409_3822, 0x299f_31d0]
            ),
            [0xd16c_fe09, 0x94fd_cceb, 0x5001_e420, 0x2412_6ea1]
        );
    }

    #[test]
    fn same_seed_and_stream_repeat() {
        let mut a = make_rng(1, 0);
        let mut b = make_rng(1, 0);
        let xs: Vec<u64> = (0..1000).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..1000).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = make_rng(1, 0);
        let mut b = make_rng(1, 1);
        let same = (0..1000).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn fork_ignores_consumption() {
        let mut a = make_rng(9, 3);
        let fresh = a.fork(2);
        a.next_u64();
        assert_eq!(a.fork(2), fresh);
        assert_ne!(a.fork(1), fresh);
    }

    #[test]
    fn uniform_mean_on_stream_7() {
        let mut rng = make_rng(1, 7);
        let n = 1_000_000;
        let mean = (0..n).map(|_| rng.uniform()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn bernoulli_edges_and_frequency() {
        let mut rng = make_rng(4, 0);
        assert!((0..10_000).all(|_| !rng.sample_bernoulli(0.0).unwrap()));
        assert!((0..10_000).all(|_| rng.sample_bernoulli(1.0).unwrap()));
        let n = 100_000;
        let hits = (0..n).filter(|_| rng.sample_bernoulli(0.6).unwrap()).count();
        assert!((hits as f64 / n as f64 - 0.6).abs() < 0.005);
        assert!(rng.sample_bernoulli(1.5).is_err());
        assert!(rng.sample_bernoulli(-0.1).is_err());
        assert!(rng.sample_bernoulli(f64::NAN).is_err());
    }

    #[test]
    fn gaussian_moments_and_tail() {
        let mut rng = make_rng(11, 0);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.sample_gaussian()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        let above = xs.iter().filter(|&&x| x > 1.0).count() as f64 / n as f64;
        assert!(mean.abs() < 0.003, "mean {mean}");
        assert!((var - 1.0).abs() < 0.005, "var {var}");
        assert!((above - 0.158_655_25).abs() < 0.0011, "tail {above}");
    }
}
