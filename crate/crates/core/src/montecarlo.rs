//! Seeding, index sampling and interval estimates shared by every experiment.
//!
//! Each trial draws from its own ChaCha8 stream selected by the trial index,
//! so results do not depend on how trials are scheduled across threads.
//! Aggregation always happens serially over trial-ordered vectors.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

/// Generator for stream `stream` under master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent sub-seed for a named stage of an experiment.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, then mixed with the master seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(seed ^ splitmix64(h))
}

/// Runs `f(trial)` for every trial index on the current rayon pool and
/// returns the results in trial order.
pub fn par_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(f).collect()
}

/// Draws indices from a fixed discrete distribution using integer
/// thresholds on a 64-bit uniform. Uniform distributions over `2^b` atoms
/// consume `b` bits per draw instead of a whole word.
#[derive(Clone, Debug)]
pub struct IndexSampler {
    thresholds: Vec<u64>,
    bits: u32,
}

impl IndexSampler {
    pub fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        assert!(n > 0, "empty distribution");
        let equal = weights.iter().all(|w| (w - weights[0]).abs() <= 1e-15);
        let bits = if equal && n.is_power_of_two() { n.trailing_zeros() } else { u32::MAX };
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut thresholds = Vec::with_capacity(n);
        for (i, w) in weights.iter().enumerate() {
            acc += w / total;
            let t = if i + 1 == n { u64::MAX } else { (acc * 18_446_744_073_709_551_616.0).min(u64::MAX as f64) as u64 };
            thresholds.push(t);
        }
        IndexSampler { thresholds, bits }
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    /// A fresh draw state; holds buffered random bits for the uniform case.
    pub fn stream(&self) -> IndexStream<'_> {
        IndexStream { sampler: self, buf: 0, left: 0 }
    }
}

pub struct IndexStream<'a> {
    sampler: &'a IndexSampler,
    buf: u64,
    left: u32,
}

impl IndexStream<'_> {
    #[inline]
    pub fn draw<R: RngCore>(&mut self, rng: &mut R) -> usize {
        let s = self.sampler;
        if s.bits == 0 {
            return 0;
        }
        if s.bits != u32::MAX {
            if self.left < s.bits {
                self.buf = rng.next_u64();
                self.left = 64;
            }
            let idx = (self.buf & ((1u64 << s.bits) - 1)) as usize;
            self.buf >>= s.bits;
            self.left -= s.bits;
            return idx;
        }
        let u = rng.next_u64();
        let t = &s.thresholds;
        if t.len() <= 16 {
            t.iter().position(|&x| u < x).unwrap_or(t.len() - 1)
        } else {
            t.partition_point(|&x| x <= u).min(t.len() - 1)
        }
    }
}

/// Wilson score interval for `hits` successes in `trials`; returns
/// `(lower, upper)`.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Half-width of the 99% Wilson interval.
pub fn wilson_radius(hits: u64, trials: u64) -> f64 {
    let (lo, hi) = wilson_interval(hits, trials, Z99);
    0.5 * (hi - lo)
}

/// Sample mean and 99% normal-approximation half-width.
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::INFINITY);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Z99 * (var / n as f64).sqrt())
}

/// One empirical deviation frequency `P(|X − nℓ| ≥ nt)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailCell {
    pub n: usize,
    pub t: f64,
    pub hits: u64,
    pub trials: u64,
    pub frequency: f64,
    pub wilson_radius: f64,
}

impl TailCell {
    pub fn new(n: usize, t: f64, hits: u64, trials: u64) -> Self {
        let frequency = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        TailCell { n, t, hits, trials, frequency, wilson_radius: wilson_radius(hits, trials) }
    }
}

/// Tail frequencies over a `t` grid from absolute deviations `|X − nℓ|`.
pub fn tail_cells(n: usize, deviations: &[f64], t_grid: &[f64]) -> Vec<TailCell> {
    t_grid
        .iter()
        .map(|&t| {
            let thr = n as f64 * t;
            let hits = deviations.iter().filter(|&&d| d >= thr).count() as u64;
            TailCell::new(n, t, hits, deviations.len() as u64)
        })
        .collect()
}
