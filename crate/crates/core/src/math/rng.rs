//! Counter-based random streams.
//!
//! Every draw is a pure function of `(master_seed, stream_id, counter)`: the
//! stream key is derived by hashing seed and id, and the `counter`-th 64-bit
//! word is a keyed hash of the counter. Work split across threads therefore
//! reproduces the single-threaded result as long as each task owns its stream.

use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stafford "mix13" finalizer (the SplitMix64 output function).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    counter: u64,
    key: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self::at(master_seed, stream_id, 0)
    }

    /// A stream positioned at an explicit counter value.
    pub fn at(master_seed: u64, stream_id: u64, counter: u64) -> Self {
        let key = mix64(master_seed ^ mix64(stream_id.wrapping_add(GOLDEN)));
        Self {
            master_seed,
            stream_id,
            counter,
            key,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// An independent stream under the same master seed, keyed by this
    /// stream's id and `tag`. Does not advance `self`.
    pub fn substream(&self, tag: u64) -> Self {
        let id = mix64(self.stream_id ^ mix64(tag.wrapping_mul(GOLDEN).wrapping_add(0x632B_E59B_D9B4_E019)));
        Self::new(self.master_seed, id)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let c = self.counter;
        self.counter = self.counter.wrapping_add(1);
        let x = mix64(self.key.wrapping_add(c.wrapping_mul(GOLDEN)));
        mix64(x ^ self.key.rotate_left(29))
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller; consumes exactly two counter values.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.standard_normal();
        }
    }
}

/// `mean + sqrt(variance) * u` with `u` the stream's next standard normal.
pub fn gaussian_draw(stream: &mut RngStream, mean: f64, variance: f64) -> Result<f64> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::Domain(format!(
            "gaussian variance must be finite and >= 0, got {variance}"
        )));
    }
    let u = stream.standard_normal();
    Ok(mean + variance.sqrt() * u)
}
