//! Stochastic fault models: random diagonal multipliers, bit flips, and the
//! seeded counter-based streams that make every run replayable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(h: u64, v: u64) -> u64 {
    mix(h ^ mix(v.wrapping_add(GOLDEN)))
}

/// Identifies one fault-drawing context inside a run. Streams with distinct
/// keys are statistically independent; identical (seed, key) pairs replay
/// the identical sample sequence regardless of execution interleaving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub site: u8,
    pub level: u8,
    /// Monotone event index within a run (cycle engines bump it once per
    /// fault-site application, so repeated visits to a level stay
    /// independent).
    pub iteration: u64,
    pub replica: u32,
}

/// SplitMix64 counter generator. Cheap, fully deterministic, and good
/// enough statistically for fault sampling; never use for secrets.
#[derive(Debug, Clone)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            state: mix(seed ^ GOLDEN),
        }
    }

    pub fn keyed(seed: u64, key: StreamKey) -> Self {
        let mut h = mix(seed ^ GOLDEN);
        h = absorb(h, key.site as u64 ^ 0x5174_0000);
        h = absorb(h, key.level as u64 ^ 0x1EE1_0000);
        h = absorb(h, key.iteration);
        h = absorb(h, key.replica as u64 ^ 0x4E11_0000);
        RngStream { state: h }
    }

    /// Derive a child seed; used by the harness to give every sweep point
    /// its own reproducible stream family.
    pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
        let mut h = mix(seed ^ GOLDEN);
        for &p in parts {
            h = absorb(h, p);
        }
        h
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform in (0, 1]; safe to feed to ln().
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    /// Standard normal via Box-Muller.
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_open01();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Number of failures before the next success of a Bernoulli(p) process
    /// (geometric on {0, 1, 2, ...}); used to skip-sample sparse masks.
    pub fn geometric(&mut self, p: f64) -> u64 {
        debug_assert!(p > 0.0 && p <= 1.0);
        if p >= 1.0 {
            return 0;
        }
        let g = (self.next_open01().ln() / (-p).ln_1p()).floor();
        if g >= u64::MAX as f64 {
            u64::MAX
        } else {
            g as u64
        }
    }
}

/// Amplitude distribution of silent multiplicative upsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "lowercase")]
pub enum SilentMagnitude {
    /// eta ~ Uniform(-a, a)
    Uniform { half_width: f64 },
    /// eta ~ Normal(0, sigma^2)
    Gaussian { sigma: f64 },
}

impl SilentMagnitude {
    pub fn mean(&self) -> f64 {
        0.0
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            SilentMagnitude::Uniform { half_width } => half_width * half_width / 3.0,
            SilentMagnitude::Gaussian { sigma } => sigma * sigma,
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            SilentMagnitude::Uniform { half_width } => half_width * (2.0 * rng.next_f64() - 1.0),
            SilentMagnitude::Gaussian { sigma } => sigma * rng.next_normal(),
        }
    }
}

/// Node-loss granularity used when a config does not set one.
pub const DEFAULT_BLOCK_SIZE: usize = 1 << 14;

fn default_block_size() -> usize {
    DEFAULT_BLOCK_SIZE
}

/// Stochastic description of one fault site.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FaultModel {
    /// Fault-free; the site never consults its random stream.
    #[default]
    None,
    /// Every component independently zeroed with probability `rate`
    /// (detected fault plus laissez-faire mitigation).
    Componentwise { rate: f64 },
    /// Contiguous blocks of `block_size` components share one Bernoulli
    /// draw, modelling node loss; the last block may be short.
    Blockwise {
        rate: f64,
        #[serde(default = "default_block_size")]
        block_size: usize,
    },
    /// Undetected multiplicative upset: multiplier 1 + eta*chi with
    /// chi ~ Bernoulli(rate).
    Silent {
        rate: f64,
        magnitude: SilentMagnitude,
    },
    /// One uniformly chosen bit of the IEEE-754 word flips per corrupted
    /// value; a value is corrupted with probability `rate`.
    Bitflip { rate: f64 },
}

impl FaultModel {
    pub fn is_none(&self) -> bool {
        matches!(self, FaultModel::None)
    }

    pub fn rate(&self) -> f64 {
        match *self {
            FaultModel::None => 0.0,
            FaultModel::Componentwise { rate }
            | FaultModel::Blockwise { rate, .. }
            | FaultModel::Silent { rate, .. }
            | FaultModel::Bitflip { rate } => rate,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FaultModel::None => "none",
            FaultModel::Componentwise { .. } => "componentwise",
            FaultModel::Blockwise { .. } => "blockwise",
            FaultModel::Silent { .. } => "silent",
            FaultModel::Bitflip { .. } => "bitflip",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rate = self.rate();
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidSpec(format!(
                "fault rate {rate} outside [0, 1]"
            )));
        }
        match *self {
            FaultModel::Blockwise { block_size: 0, .. } => Err(Error::InvalidSpec(
                "blockwise fault needs block_size >= 1".into(),
            )),
            FaultModel::Silent { magnitude, .. } if magnitude.second_moment() > 1.0 + 1e-12 => {
                // keeps ||Var[X]|| = rate * E[eta^2] <= rate, the epsilon
                // scaling the variance assumption requires
                Err(Error::InvalidSpec(format!(
                    "silent magnitude second moment {} exceeds 1; variance would exceed the fault rate",
                    magnitude.second_moment()
                )))
            }
            FaultModel::Bitflip { rate } if rate >= 1.0 => Err(Error::InvalidSpec(
                "bitflip rate must be < 1".into(),
            )),
            _ => Ok(()),
        }
    }

    /// (e, var) with E[X] = e I and ||Var[X]|| = var. Bit flips have no
    /// closed-form diagonal-multiplier moments and are rejected.
    pub fn moments(&self) -> Result<(f64, f64)> {
        match *self {
            FaultModel::None => Ok((1.0, 0.0)),
            FaultModel::Componentwise { rate } | FaultModel::Blockwise { rate, .. } => {
                Ok((1.0 - rate, rate * (1.0 - rate)))
            }
            FaultModel::Silent { rate, magnitude } => {
                let m1 = rate * magnitude.mean();
                let m2 = rate * magnitude.second_moment();
                Ok((1.0 + m1, m2 - m1 * m1))
            }
            FaultModel::Bitflip { .. } => Err(Error::UnsupportedModel {
                context: "model_moments",
                kind: "bitflip",
            }),
        }
    }
}

/// One realization of the random diagonal: per-component multipliers with
/// 1 = clean, 0 = laissez-faire zeroed, anything else a silent corruption.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultMask {
    pub multipliers: Vec<f64>,
}

impl FaultMask {
    pub fn len(&self) -> usize {
        self.multipliers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multipliers.is_empty()
    }

    pub fn ones(n: usize) -> Self {
        FaultMask {
            multipliers: vec![1.0; n],
        }
    }
}

/// Draw one mask realization. Bit flips are not mask-representable (the
/// corruption depends on the value's bit pattern) and are rejected.
pub fn sample_mask(model: &FaultModel, n: usize, rng: &mut RngStream) -> Result<FaultMask> {
    let mut m = vec![1.0; n];
    match *model {
        FaultModel::None => {}
        FaultModel::Componentwise { rate } => {
            if rate >= 1.0 {
                m.iter_mut().for_each(|v| *v = 0.0);
            } else if rate > 0.0 {
                for v in m.iter_mut() {
                    if rng.bernoulli(rate) {
                        *v = 0.0;
                    }
                }
            }
        }
        FaultModel::Blockwise { rate, block_size } => {
            if rate > 0.0 {
                let mut start = 0;
                while start < n {
                    let end = (start + block_size).min(n);
                    if rng.bernoulli(rate) {
                        m[start..end].iter_mut().for_each(|v| *v = 0.0);
                    }
                    start = end;
                }
            }
        }
        FaultModel::Silent { rate, magnitude } => {
            if rate > 0.0 {
                for v in m.iter_mut() {
                    if rng.bernoulli(rate) {
                        *v = 1.0 + magnitude.sample(rng);
                    }
                }
            }
        }
        FaultModel::Bitflip { .. } => {
            return Err(Error::UnsupportedModel {
                context: "sample_mask",
                kind: "bitflip",
            })
        }
    }
    Ok(FaultMask { multipliers: m })
}

/// Componentwise product with exact zeros where the mask is zero
/// (laissez-faire semantics even for NaN or infinite inputs).
pub fn apply_mask(y: &[f64], mask: &FaultMask) -> Result<Vec<f64>> {
    if y.len() != mask.len() {
        return Err(Error::DimensionMismatch {
            context: "apply_mask",
            expected: y.len(),
            got: mask.len(),
        });
    }
    Ok(y.iter()
        .zip(&mask.multipliers)
        .map(|(&v, &m)| if m == 0.0 { 0.0 } else { v * m })
        .collect())
}

/// Flip bit `bit` (0 = least significant) of the IEEE-754 representation.
#[inline]
pub fn flip_bit(v: f64, bit: u32) -> f64 {
    f64::from_bits(v.to_bits() ^ (1u64 << bit))
}

/// Independently corrupt each component with probability `rate` by flipping
/// exactly one uniformly chosen bit of its 64-bit representation.
pub fn bitflip_corrupt(y: &[f64], rate: f64, rng: &mut RngStream) -> Vec<f64> {
    let mut out = y.to_vec();
    if rate <= 0.0 {
        return out;
    }
    for v in out.iter_mut() {
        if rng.bernoulli(rate) {
            *v = flip_bit(*v, rng.below(64) as u32);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn none_mask_is_all_ones() {
        let mut rng = RngStream::new(1);
        let m = sample_mask(&FaultModel::None, 5, &mut rng).unwrap();
        assert_eq!(m.multipliers, vec![1.0; 5]);
    }

    #[test]
    fn degenerate_rates() {
        let mut rng = RngStream::new(1);
        let m0 = sample_mask(&FaultModel::Componentwise { rate: 0.0 }, 6, &mut rng).unwrap();
        assert_eq!(m0.multipliers, vec![1.0; 6]);
        let m1 = sample_mask(&FaultModel::Componentwise { rate: 1.0 }, 6, &mut rng).unwrap();
        assert_eq!(m1.multipliers, vec![0.0; 6]);
    }

    #[test]
    fn componentwise_zero_fraction_concentrates() {
        // binomial concentration: 0.3 +- 10 sigma at n = 1e6
        let n = 1_000_000;
        let mut rng = RngStream::new(2024);
        let m = sample_mask(&FaultModel::Componentwise { rate: 0.3 }, n, &mut rng).unwrap();
        let zeros = m.multipliers.iter().filter(|&&v| v == 0.0).count();
        let frac = zeros as f64 / n as f64;
        assert!((frac - 0.3).abs() < 0.0046, "zero fraction {frac}");
    }

    #[test]
    fn blockwise_blocks_are_constant() {
        let model = FaultModel::Blockwise {
            rate: 0.5,
            block_size: 7,
        };
        let mut rng = RngStream::new(3);
        let n = 100; // last block short (100 = 14*7 + 2)
        let m = sample_mask(&model, n, &mut rng).unwrap();
        for b in 0..(n + 6) / 7 {
            let lo = b * 7;
            let hi = (lo + 7).min(n);
            let first = m.multipliers[lo];
            assert!(m.multipliers[lo..hi].iter().all(|&v| v == first));
        }
        // across many draws the block values must not be all equal
        let mut saw_mixed = false;
        for _ in 0..32 {
            let m = sample_mask(&model, n, &mut rng).unwrap();
            let first = m.multipliers[0];
            if m.multipliers.iter().step_by(7).any(|&v| v != first) {
                saw_mixed = true;
            }
        }
        assert!(saw_mixed);
    }

    #[test]
    fn silent_mask_matches_model_mean() {
        // empirical mean within 5 sigma of e at n = 1e6
        let model = FaultModel::Silent {
            rate: 0.5,
            magnitude: SilentMagnitude::Uniform { half_width: 1.0 },
        };
        let (e, var) = model.moments().unwrap();
        assert_eq!(e, 1.0);
        assert!((var - 1.0 / 6.0).abs() < 1e-15);
        let n = 1_000_000;
        let mut rng = RngStream::new(4);
        let m = sample_mask(&model, n, &mut rng).unwrap();
        let mean = m.multipliers.iter().sum::<f64>() / n as f64;
        let sigma = (var / n as f64).sqrt();
        assert!((mean - e).abs() < 5.0 * sigma, "mean {mean}");
    }

    #[test]
    fn componentwise_mask_mean_matches_moments() {
        let model = FaultModel::Componentwise { rate: 0.1 };
        let (e, var) = model.moments().unwrap();
        assert_eq!((e, var), (0.9, 0.1 * 0.9));
        let n = 1_000_000;
        let mut rng = RngStream::new(5);
        let m = sample_mask(&model, n, &mut rng).unwrap();
        let mean = m.multipliers.iter().sum::<f64>() / n as f64;
        assert!((mean - e).abs() < 5.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn moments_examples() {
        assert_eq!(
            FaultModel::Componentwise { rate: 0.0 }.moments().unwrap(),
            (1.0, 0.0)
        );
        assert!(matches!(
            FaultModel::Bitflip { rate: 0.1 }.moments(),
            Err(Error::UnsupportedModel { .. })
        ));
    }

    #[test]
    fn apply_mask_semantics() {
        let ones = FaultMask::ones(3);
        let y = [2.0, 4.0, 6.0];
        assert_eq!(apply_mask(&y, &ones).unwrap(), y.to_vec());

        let zeros = FaultMask {
            multipliers: vec![0.0; 3],
        };
        assert_eq!(apply_mask(&y, &zeros).unwrap(), vec![0.0; 3]);

        let m = FaultMask {
            multipliers: vec![1.0, 0.0, 1.0],
        };
        assert_eq!(apply_mask(&y, &m).unwrap(), vec![2.0, 0.0, 6.0]);

        // exact zero even for non-finite input
        let bad = [f64::NAN, f64::INFINITY, 1.0];
        let masked = apply_mask(&bad, &zeros).unwrap();
        assert_eq!(masked, vec![0.0; 3]);

        assert!(apply_mask(&y, &FaultMask::ones(2)).is_err());
    }

    #[test]
    fn apply_ones_is_bitwise_identity() {
        let mut rng = RngStream::new(6);
        let y: Vec<f64> = (0..64).map(|_| rng.next_normal() * 1e8).collect();
        let out = apply_mask(&y, &FaultMask::ones(64)).unwrap();
        for (a, b) in y.iter().zip(&out) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn bitflip_examples() {
        let mut rng = RngStream::new(7);
        let y = [1.0, 2.0, 3.0];
        assert_eq!(bitflip_corrupt(&y, 0.0, &mut rng), y.to_vec());
        // sign bit of 1.0 -> -1.0
        assert_eq!(flip_bit(1.0, 63), -1.0);
        // bit-level oracle: implementation must equal a raw word XOR
        for bit in 0..64u32 {
            let via_impl = flip_bit(1.0, bit);
            let via_oracle = f64::from_bits(1.0f64.to_bits() ^ (1u64 << bit));
            assert_eq!(via_impl.to_bits(), via_oracle.to_bits());
        }
        // exponent bit 52 of 1.0: exponent 0x3FF -> 0x3FE, i.e. 0.5
        assert_eq!(flip_bit(1.0, 52), 0.5);
    }

    #[test]
    fn bitflip_rate_statistics() {
        let n = 200_000;
        let y = vec![1.0; n];
        let mut rng = RngStream::new(8);
        let out = bitflip_corrupt(&y, 0.2, &mut rng);
        let changed = out
            .iter()
            .filter(|&&v| v.to_bits() != 1.0f64.to_bits())
            .count();
        let frac = changed as f64 / n as f64;
        let sigma = (0.2 * 0.8 / n as f64).sqrt();
        assert!((frac - 0.2).abs() < 6.0 * sigma, "fraction {frac}");
    }

    #[test]
    fn streams_replay_and_separate() {
        let key = StreamKey {
            site: 3,
            level: 2,
            iteration: 41,
            replica: 0,
        };
        let a: Vec<u64> = {
            let mut r = RngStream::keyed(99, key);
            (0..32).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RngStream::keyed(99, key);
            (0..32).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        let c: Vec<u64> = {
            let mut r = RngStream::keyed(
                99,
                StreamKey {
                    replica: 1,
                    ..key
                },
            );
            (0..32).map(|_| r.next_u64()).collect()
        };
        assert_ne!(a, c);
    }

    #[test]
    fn replica_streams_pass_chi_square_smoke() {
        // 2x2 contingency table over 1e4 bit pairs from replica 0 / 1 streams
        let mut counts = [[0u32; 2]; 2];
        for i in 0..10_000u64 {
            let key0 = StreamKey {
                site: 1,
                level: 1,
                iteration: i,
                replica: 0,
            };
            let key1 = StreamKey {
                replica: 1,
                ..key0
            };
            let a = RngStream::keyed(12345, key0).next_u64() & 1;
            let b = RngStream::keyed(12345, key1).next_u64() & 1;
            counts[a as usize][b as usize] += 1;
        }
        let total: u32 = 10_000;
        let row: [f64; 2] = [
            (counts[0][0] + counts[0][1]) as f64,
            (counts[1][0] + counts[1][1]) as f64,
        ];
        let col: [f64; 2] = [
            (counts[0][0] + counts[1][0]) as f64,
            (counts[0][1] + counts[1][1]) as f64,
        ];
        let mut chi2 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let expect = row[i] * col[j] / total as f64;
                let diff = counts[i][j] as f64 - expect;
                chi2 += diff * diff / expect;
            }
        }
        // 99.9% quantile of chi-square with 1 dof is 10.83
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    #[test]
    fn geometric_skip_matches_direct_rate() {
        let mut rng = RngStream::new(9);
        let p = 0.01;
        let n = 2_000_000u64;
        let mut hits = 0u64;
        let mut pos = 0u64;
        loop {
            let skip = rng.geometric(p);
            if pos + skip >= n {
                break;
            }
            pos += skip + 1;
            hits += 1;
        }
        let frac = hits as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((frac - p).abs() < 6.0 * sigma, "fraction {frac}");
    }

    #[test]
    fn silent_variance_guard() {
        let bad = FaultModel::Silent {
            rate: 0.5,
            magnitude: SilentMagnitude::Gaussian { sigma: 2.0 },
        };
        assert!(bad.validate().is_err());
        let ok = FaultModel::Silent {
            rate: 0.5,
            magnitude: SilentMagnitude::Uniform { half_width: 1.0 },
        };
        ok.validate().unwrap();
    }
}
