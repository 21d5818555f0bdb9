//! LLR update kernels, stage memory, and the reference SC decoder.
//!
//! LLRs are natural-log ratios `ln P(0)/P(1)`; a positive value favours bit 0
//! and a value of exactly zero decides 0.

use crate::channel::ChannelLlr;
use crate::error::{Error, Result};
use crate::polar_code::{CodeConfig, MessageWord};

/// Check-node update flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LlrMode {
    #[default]
    MinSum,
    /// `2·atanh(tanh(a/2)·tanh(b/2))`, evaluated in log-sum form.
    Exact,
}

pub fn f_update(a: f64, b: f64, mode: LlrMode) -> f64 {
    let mag = a.abs().min(b.abs());
    let signed = if (a < 0.0) ^ (b < 0.0) { -mag } else { mag };
    match mode {
        LlrMode::MinSum => signed,
        // Exact identity; avoids tanh saturating to ±1 for large inputs.
        LlrMode::Exact => signed + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p(),
    }
}

pub fn g_update(a: f64, b: f64, s: bool) -> f64 {
    if s {
        b - a
    } else {
        b + a
    }
}

pub fn hard_decision(llr: f64) -> bool {
    llr < 0.0
}

/// Update rule plus optional LLR saturation (fixed-point emulation).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Kernel {
    pub mode: LlrMode,
    pub saturation: Option<f64>,
}

impl Kernel {
    pub fn new(mode: LlrMode) -> Self {
        Self {
            mode,
            saturation: None,
        }
    }

    pub fn saturated(mode: LlrMode, limit: f64) -> Self {
        Self {
            mode,
            saturation: Some(limit),
        }
    }

    #[inline]
    fn clamp(&self, x: f64) -> f64 {
        match self.saturation {
            Some(lim) => x.clamp(-lim, lim),
            None => x,
        }
    }

    #[inline]
    pub fn f(&self, a: f64, b: f64) -> f64 {
        self.clamp(f_update(a, b, self.mode))
    }

    #[inline]
    pub fn g(&self, a: f64, b: f64, s: bool) -> f64 {
        self.clamp(g_update(a, b, s))
    }
}

/// Per-stage LLR and partial-sum buffers of one decoding path.
///
/// Stage `s` holds `2^s` values: stage `m` is the channel side, stage 0 the
/// single bit LLR. `psum[s][..2^(s-1)]` holds the re-encoded bits of the most
/// recently finished left child of the active stage-`s` node, which is what
/// the g update consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct StageMemory {
    llr: Vec<Vec<f64>>,
    psum: Vec<Vec<bool>>,
}

impl StageMemory {
    pub fn new(channel: &[f64]) -> Self {
        let m = channel.len().trailing_zeros() as usize;
        let mut llr: Vec<Vec<f64>> = (0..=m).map(|s| vec![0.0; 1 << s]).collect();
        llr[m].copy_from_slice(channel);
        let psum = (0..=m).map(|s| vec![false; 1 << s]).collect();
        Self { llr, psum }
    }

    pub fn stages(&self) -> usize {
        self.llr.len() - 1
    }

    pub fn stage_llr(&self, s: usize) -> &[f64] {
        &self.llr[s]
    }

    /// Re-encoded partial sums currently held at stage `s`.
    pub fn stage_psum(&self, s: usize) -> &[bool] {
        &self.psum[s]
    }

    /// LLR of the bit currently being decided.
    pub fn bit_llr(&self) -> f64 {
        self.llr[0][0]
    }

    /// Stage-`s` node feeds its left child (stage `s - 1`).
    pub fn f_stage(&mut self, s: usize, kernel: &Kernel) {
        let (lower, upper) = self.llr.split_at_mut(s);
        let src = &upper[0];
        let dst = &mut lower[s - 1];
        let half = dst.len();
        for i in 0..half {
            dst[i] = kernel.f(src[i], src[i + half]);
        }
    }

    /// Stage-`s` node feeds its right child using the left child's partial sums.
    pub fn g_stage(&mut self, s: usize, kernel: &Kernel) {
        let (lower, upper) = self.llr.split_at_mut(s);
        let src = &upper[0];
        let dst = &mut lower[s - 1];
        let half = dst.len();
        let ps = &self.psum[s];
        for i in 0..half {
            dst[i] = kernel.g(src[i], src[i + half], ps[i]);
        }
    }

    /// Records the decision for `bit` and propagates partial sums upward
    /// through every node that `bit` completes.
    pub fn commit_bit(&mut self, bit: usize, value: bool) {
        self.psum[0][0] = value;
        let m = self.stages();
        for s in 0..m {
            let half = 1 << s;
            let (lower, upper) = self.psum.split_at_mut(s + 1);
            let child = &lower[s];
            let parent = &mut upper[0];
            if (bit >> s) & 1 == 0 {
                parent[..half].copy_from_slice(child);
                return;
            }
            for i in 0..half {
                let right = child[i];
                parent[i] ^= right;
                parent[half + i] = right;
            }
        }
    }
}

fn check_llr_len(llr: &ChannelLlr, config: &CodeConfig) -> Result<()> {
    if llr.len() != config.n() {
        return Err(Error::LengthMismatch {
            expected: config.n(),
            actual: llr.len(),
        });
    }
    Ok(())
}

/// Single-path successive-cancellation decoder.
#[derive(Debug, Clone)]
pub struct ScDecoder<'a> {
    config: &'a CodeConfig,
    kernel: Kernel,
}

impl<'a> ScDecoder<'a> {
    pub fn new(config: &'a CodeConfig, kernel: Kernel) -> Self {
        Self { config, kernel }
    }

    pub fn decode(&self, llr: &ChannelLlr) -> Result<MessageWord> {
        check_llr_len(llr, self.config)?;
        let mut mem = StageMemory::new(llr.values());
        let mut bits = vec![false; self.config.n()];
        self.descend(&mut mem, self.config.stages(), 0, &mut bits);
        Ok(MessageWord::from_decoded(bits))
    }

    fn descend(&self, mem: &mut StageMemory, s: usize, offset: usize, bits: &mut [bool]) {
        if s == 0 {
            let u = !self.config.is_frozen(offset) && hard_decision(mem.bit_llr());
            bits[offset] = u;
            mem.commit_bit(offset, u);
            return;
        }
        mem.f_stage(s, &self.kernel);
        self.descend(mem, s - 1, offset, bits);
        mem.g_stage(s, &self.kernel);
        self.descend(mem, s - 1, offset + (1 << (s - 1)), bits);
    }
}

pub fn sc_decode(llr: &ChannelLlr, config: &CodeConfig, mode: LlrMode) -> Result<MessageWord> {
    ScDecoder::new(config, Kernel::new(mode)).decode(llr)
}
