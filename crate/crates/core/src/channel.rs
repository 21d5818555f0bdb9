//! BPSK over AWGN, channel LLRs, and the Monte-Carlo FER driver.
//!
//! Randomness: frame `i` of a run seeded with `s` draws everything (message
//! bits, then noise) from a ChaCha8 stream keyed by `frame_seed(s, i)`, a
//! SplitMix64 mix of the pair. Results therefore do not depend on thread
//! count or on the order frames are processed in. Gaussian samples come from
//! `rand_distr::StandardNormal`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{config_err, Error, Result};
use crate::polar_code::{encode, CodeConfig, Codeword, MessageWord};

/// LLR magnitude of a noiseless observation, and the default fixed-point clamp (2^7 - 1).
pub const LLR_SATURATION: f64 = 127.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelLlr {
    values: Vec<f64>,
}

impl ChannelLlr {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("LLR {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Clamps every value to `±limit`.
    pub fn saturate(&self, limit: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v.clamp(-limit, limit)).collect(),
        }
    }

    /// One value per line, as used by golden fixtures.
    pub fn to_csv(&self) -> String {
        self.values.iter().map(|v| format!("{v:?}\n")).collect()
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let values = text
            .split([',', '\n'])
            .map(str::trim)
            .filter(|t| !t.is_empty() && !t.starts_with('#'))
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad LLR {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Eb/N0 in dB; `f64::INFINITY` means a noiseless channel.
    pub snr_db: f64,
    pub rate: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, rate: f64, seed: u64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(config_err(format!("rate {rate} outside (0, 1]")));
        }
        if snr_db.is_nan() {
            return Err(config_err("SNR is NaN"));
        }
        Ok(Self { snr_db, rate, seed })
    }

    pub fn noiseless(rate: f64, seed: u64) -> Result<Self> {
        Self::new(f64::INFINITY, rate, seed)
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }

    /// Noise variance per real dimension, `1 / (2 R Eb/N0)`.
    pub fn sigma2(&self) -> f64 {
        1.0 / (2.0 * self.rate * 10f64.powf(self.snr_db / 10.0))
    }
}

/// SplitMix64 finalizer applied to `seed ^ mix(index)`.
pub fn frame_seed(seed: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(seed ^ mix(index))
}

pub fn frame_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(frame_seed(seed, index))
}

fn llr_from_received(r: f64, amplitude: f64, sigma2: f64) -> f64 {
    2.0 * amplitude * r / sigma2
}

/// Modulates, adds noise drawn from `rng`, and returns channel LLRs.
pub fn transmit_with<R: Rng>(x: &Codeword, spec: &NoiseSpec, rng: &mut R) -> ChannelLlr {
    let symbols = x.bits().iter().map(|&b| if b { -1.0 } else { 1.0 });
    let values = if spec.is_noiseless() {
        symbols.map(|s| s * LLR_SATURATION).collect()
    } else {
        let sigma2 = spec.sigma2();
        let sigma = sigma2.sqrt();
        symbols
            .map(|s| {
                let noise: f64 = rng.sample(StandardNormal);
                llr_from_received(s + sigma * noise, 1.0, sigma2)
            })
            .collect()
    };
    ChannelLlr { values }
}

/// Deterministic transmission keyed by `spec.seed`.
pub fn transmit(x: &Codeword, spec: &NoiseSpec) -> ChannelLlr {
    transmit_with(x, spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))
}

/// One Monte-Carlo frame.
#[derive(Debug, Clone)]
pub struct Frame {
    pub index: u64,
    pub message: MessageWord,
    pub codeword: Codeword,
    pub llr: ChannelLlr,
}

impl Frame {
    pub fn generate(config: &CodeConfig, spec: &NoiseSpec, index: u64) -> Self {
        let mut rng = frame_rng(spec.seed, index);
        let info: Vec<bool> = (0..config.k()).map(|_| rng.random()).collect();
        let message = config
            .message_from_info(&info)
            .expect("info length equals k");
        let codeword = encode(&message, config).expect("message length equals n");
        let llr = transmit_with(&codeword, spec, &mut rng);
        Self {
            index,
            message,
            codeword,
            llr,
        }
    }
}

/// Anything that maps channel LLRs to a message estimate.
pub trait FrameDecoder: Sync {
    fn decode_frame(&self, llr: &ChannelLlr) -> Result<MessageWord>;
}

impl<F> FrameDecoder for F
where
    F: Fn(&ChannelLlr) -> Result<MessageWord> + Sync,
{
    fn decode_frame(&self, llr: &ChannelLlr) -> Result<MessageWord> {
        self(llr)
    }
}

/// Runs `per_frame` on frames `0..trials` in parallel and returns the results
/// in frame order.
pub fn simulate_frames<T, F>(
    config: &CodeConfig,
    spec: &NoiseSpec,
    trials: u64,
    per_frame: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Frame) -> Result<T> + Sync,
{
    if trials == 0 {
        return Err(config_err("trials must be at least 1"));
    }
    (0..trials)
        .into_par_iter()
        .map(|i| per_frame(&Frame::generate(config, spec, i)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FerResult {
    pub fer: f64,
    pub ber: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
}

impl FerResult {
    pub fn from_counts(frames: u64, frame_errors: u64, bit_errors: u64, k: usize) -> Self {
        Self {
            fer: frame_errors as f64 / frames as f64,
            ber: bit_errors as f64 / (frames as f64 * k as f64),
            frames,
            frame_errors,
            bit_errors,
        }
    }
}

/// Information-bit errors between a decoded and a transmitted message.
pub fn info_bit_errors(config: &CodeConfig, sent: &MessageWord, decoded: &MessageWord) -> u64 {
    config
        .info_positions()
        .iter()
        .filter(|&&i| sent.bits()[i] != decoded.bits()[i])
        .count() as u64
}

pub fn monte_carlo_fer<D: FrameDecoder + ?Sized>(
    config: &CodeConfig,
    decoder: &D,
    spec: &NoiseSpec,
    trials: u64,
) -> Result<FerResult> {
    let errors = simulate_frames(config, spec, trials, |frame| {
        let decoded = decoder.decode_frame(&frame.llr)?;
        Ok(info_bit_errors(config, &frame.message, &decoded))
    })?;
    let frame_errors = errors.iter().filter(|&&e| e > 0).count() as u64;
    let bit_errors = errors.iter().sum();
    Ok(FerResult::from_counts(
        trials,
        frame_errors,
        bit_errors,
        config.k(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::erf::erfc;

    fn q(x: f64) -> f64 {
        0.5 * erfc(x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn noiseless_llrs_saturate() {
        let cfg = CodeConfig::bec(16, 8).unwrap();
        let x = encode(&MessageWord::zeros(16), &cfg).unwrap();
        let llr = transmit(&x, &NoiseSpec::noiseless(0.5, 1).unwrap());
        assert!(llr.values().iter().all(|&v| v == LLR_SATURATION));
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let cfg = CodeConfig::bec(64, 32).unwrap();
        let spec = NoiseSpec::new(2.0, 0.5, 77).unwrap();
        let a = Frame::generate(&cfg, &spec, 12);
        let b = Frame::generate(&cfg, &spec, 12);
        assert_eq!(a.llr, b.llr);
        assert_eq!(a.message, b.message);
        let c = Frame::generate(&cfg, &spec, 13);
        assert_ne!(a.llr, c.llr);
    }

    #[test]
    fn sign_errors_follow_q_function() {
        let cfg = CodeConfig::bec(64, 32).unwrap();
        let spec = NoiseSpec::new(5.0, 0.5, 2024).unwrap();
        let errs = simulate_frames(&cfg, &spec, 10_000, |f| {
            Ok(f.llr
                .values()
                .iter()
                .zip(f.codeword.bits())
                .filter(|(&l, &b)| (l < 0.0) != b)
                .count())
        })
        .unwrap();
        let bits = 10_000.0 * 64.0;
        let observed = errs.iter().sum::<usize>() as f64 / bits;
        let p = q(1.0 / spec.sigma2().sqrt());
        let sd = (p * (1.0 - p) / bits).sqrt();
        assert!(
            (observed - p).abs() <= 3.0 * sd,
            "observed {observed}, expected {p}"
        );
    }

    #[test]
    fn scaling_amplitude_and_sigma_keeps_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let r: f64 = rng.random_range(-3.0..3.0);
            let a = llr_from_received(r, 1.0, 0.5);
            let b = llr_from_received(2.0 * r, 2.0, 4.0 * 0.5);
            assert_eq!(a.signum(), b.signum());
        }
    }

    #[test]
    fn identity_decoder_on_noiseless_channel() {
        let cfg = CodeConfig::bec(32, 16).unwrap();
        let spec = NoiseSpec::noiseless(cfg.rate(), 3).unwrap();
        // genie: hard decision on the channel, then invert the transform
        let genie = |llr: &ChannelLlr| {
            let mut bits: Vec<bool> = llr.values().iter().map(|&v| v < 0.0).collect();
            crate::polar_code::polar_transform(&mut bits);
            Ok(MessageWord::from_decoded(bits))
        };
        let res = monte_carlo_fer(&cfg, &genie, &spec, 100).unwrap();
        assert_eq!(res.fer, 0.0);
        assert_eq!(res.frames, 100);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = CodeConfig::bec(8, 4).unwrap();
        let spec = NoiseSpec::new(1.0, 0.5, 0).unwrap();
        let dec = |_: &ChannelLlr| Ok(MessageWord::zeros(8));
        assert!(monte_carlo_fer(&cfg, &dec, &spec, 0).is_err());
    }

    #[test]
    fn rate_validated() {
        assert!(NoiseSpec::new(1.0, 0.0, 0).is_err());
        assert!(NoiseSpec::new(1.0, 1.5, 0).is_err());
    }

    #[test]
    fn llr_csv_round_trip() {
        let llr = ChannelLlr::new(vec![1.5, -0.25, 3.0e-7]).unwrap();
        assert_eq!(ChannelLlr::from_csv(&llr.to_csv()).unwrap(), llr);
        assert!(ChannelLlr::from_csv("1.0\nfoo\n").is_err());
    }
}
