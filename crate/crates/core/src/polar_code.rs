//! Polar code construction and encoding.
//!
//! Construction uses the Bhattacharyya-parameter recursion of a binary erasure
//! channel. Channel `i` is polarized starting from its most significant bit:
//! a `0` bit takes the degraded branch `2z - z²`, a `1` bit the upgraded
//! branch `z²`. The `k` channels with the smallest parameter carry
//! information; ties go to the lower index.

use crate::error::{config_err, Error, Result};

/// Default BEC erasure probability used for construction.
pub const DEFAULT_DESIGN_PARAM: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct CodeConfig {
    n: usize,
    k: usize,
    frozen_mask: Vec<bool>,
    design_param: f64,
}

impl CodeConfig {
    /// Builds an `(n, k)` code with the BEC construction.
    pub fn new(n: usize, k: usize, design_param: f64) -> Result<Self> {
        let frozen_mask = construct_frozen_set(n, k, design_param)?;
        Ok(Self {
            n,
            k,
            frozen_mask,
            design_param,
        })
    }

    /// `(n, k)` code at the default erasure probability.
    pub fn bec(n: usize, k: usize) -> Result<Self> {
        Self::new(n, k, DEFAULT_DESIGN_PARAM)
    }

    /// Wraps an explicit frozen mask (`true` = frozen).
    pub fn from_mask(frozen_mask: Vec<bool>) -> Result<Self> {
        let n = frozen_mask.len();
        check_length(n)?;
        let k = frozen_mask.iter().filter(|&&f| !f).count();
        if k == 0 {
            return Err(config_err("mask has no information bits"));
        }
        Ok(Self {
            n,
            k,
            frozen_mask,
            design_param: f64::NAN,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of decoding stages, `log2 n`.
    pub fn stages(&self) -> usize {
        self.n.trailing_zeros() as usize
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn design_param(&self) -> f64 {
        self.design_param
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen_mask
    }

    pub fn is_frozen(&self, bit: usize) -> bool {
        self.frozen_mask[bit]
    }

    pub fn info_positions(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.frozen_mask[i]).collect()
    }

    /// Places `info` bits on the information positions, zeros elsewhere.
    pub fn message_from_info(&self, info: &[bool]) -> Result<MessageWord> {
        if info.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                actual: info.len(),
            });
        }
        let mut bits = vec![false; self.n];
        for (pos, &b) in self.info_positions().iter().zip(info) {
            bits[*pos] = b;
        }
        Ok(MessageWord { bits })
    }

    /// Mask as a `'0'` (information) / `'1'` (frozen) string.
    pub fn mask_string(&self) -> String {
        mask_to_string(&self.frozen_mask)
    }
}

/// Bit vector `u` with zeros on the frozen positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MessageWord {
    bits: Vec<bool>,
}

impl MessageWord {
    /// Checks the frozen constraint against `config`.
    pub fn new(bits: Vec<bool>, config: &CodeConfig) -> Result<Self> {
        if bits.len() != config.n {
            return Err(Error::LengthMismatch {
                expected: config.n,
                actual: bits.len(),
            });
        }
        if let Some(i) = (0..bits.len()).find(|&i| bits[i] && config.frozen_mask[i]) {
            return Err(config_err(format!("frozen bit {i} is set")));
        }
        Ok(Self { bits })
    }

    /// Wraps decoder output; decoders only ever write zeros on frozen bits.
    pub(crate) fn from_decoded(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            bits: vec![false; n],
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn info_bits(&self, config: &CodeConfig) -> Vec<bool> {
        config
            .info_positions()
            .iter()
            .map(|&i| self.bits[i])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword {
    bits: Vec<bool>,
}

impl Codeword {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

fn check_length(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(config_err(format!(
            "block length {n} must be a power of two and at least 2"
        )));
    }
    Ok(())
}

/// Bhattacharyya parameters of the `n` synthesized channels of a BEC(`erasure`).
pub fn bhattacharyya_parameters(n: usize, erasure: f64) -> Result<Vec<f64>> {
    check_length(n)?;
    if !(0.0..=1.0).contains(&erasure) {
        return Err(config_err(format!(
            "erasure probability {erasure} outside [0, 1]"
        )));
    }
    // z[i] after processing the top `level` bits of i lives at z[i >> (m - level)].
    let mut z = vec![erasure];
    while z.len() < n {
        z = z
            .iter()
            .flat_map(|&zi| [2.0 * zi - zi * zi, zi * zi])
            .collect();
    }
    Ok(z)
}

/// Frozen mask (`true` = frozen) selecting the `k` most reliable channels.
pub fn construct_frozen_set(n: usize, k: usize, design_param: f64) -> Result<Vec<bool>> {
    check_length(n)?;
    if k == 0 || k > n {
        return Err(config_err(format!("k = {k} must satisfy 1 <= k <= {n}")));
    }
    let z = bhattacharyya_parameters(n, design_param)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    let mut mask = vec![true; n];
    for &i in &order[..k] {
        mask[i] = false;
    }
    Ok(mask)
}

/// In-place `x = u·F^{⊗m}` over GF(2).
pub fn polar_transform(bits: &mut [bool]) {
    let n = bits.len();
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(2 * half) {
            for i in block..block + half {
                bits[i] ^= bits[i + half];
            }
        }
        half *= 2;
    }
}

pub fn encode(u: &MessageWord, config: &CodeConfig) -> Result<Codeword> {
    if u.bits.len() != config.n {
        return Err(Error::LengthMismatch {
            expected: config.n,
            actual: u.bits.len(),
        });
    }
    let mut bits = u.bits.clone();
    polar_transform(&mut bits);
    Ok(Codeword { bits })
}

pub fn mask_to_string(mask: &[bool]) -> String {
    mask.iter().map(|&f| if f { '1' } else { '0' }).collect()
}

pub fn parse_mask(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse(format!("invalid mask character {other:?}"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn info_set(n: usize, k: usize) -> Vec<usize> {
        CodeConfig::new(n, k, 0.5).unwrap().info_positions()
    }

    /// Brute force: for each channel walk its bits MSB-first through the BEC recursion.
    fn z_oracle(n: usize, i: usize, erasure: f64) -> f64 {
        let m = n.trailing_zeros();
        let mut z = erasure;
        for level in (0..m).rev() {
            z = if (i >> level) & 1 == 1 {
                z * z
            } else {
                2.0 * z - z * z
            };
        }
        z
    }

    #[test]
    fn rate_one_has_no_frozen_bits() {
        let mask = construct_frozen_set(8, 8, 0.3).unwrap();
        assert!(mask.iter().all(|&f| !f));
    }

    #[test]
    fn single_info_bit_is_last_channel() {
        assert_eq!(info_set(8, 1), vec![7]);
    }

    #[test]
    fn eight_four_golden_info_set() {
        // z(3) = 0.3164, z(4) = 0.6836 at erasure 0.5
        assert_eq!(info_set(8, 4), vec![3, 5, 6, 7]);
        let cfg = CodeConfig::bec(8, 4).unwrap();
        assert_eq!(cfg.mask_string(), "11101000");
    }

    #[test]
    fn recursion_matches_bitwise_oracle() {
        for n in [2, 4, 8, 64, 256] {
            let z = bhattacharyya_parameters(n, 0.5).unwrap();
            for (i, zi) in z.iter().enumerate() {
                assert!((zi - z_oracle(n, i, 0.5)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(construct_frozen_set(8, 0, 0.5).is_err());
        assert!(construct_frozen_set(8, 9, 0.5).is_err());
        assert!(construct_frozen_set(12, 4, 0.5).is_err());
        assert!(construct_frozen_set(1, 1, 0.5).is_err());
    }

    #[test]
    fn unit_vectors() {
        let cfg = CodeConfig::bec(16, 16).unwrap();
        let x = encode(&MessageWord::zeros(16), &cfg).unwrap();
        assert!(x.bits().iter().all(|&b| !b));
        let mut bits = vec![false; 16];
        bits[15] = true;
        let x = encode(&MessageWord::new(bits, &cfg).unwrap(), &cfg).unwrap();
        assert!(x.bits().iter().all(|&b| b));
    }

    #[test]
    fn frozen_constraint_enforced() {
        let cfg = CodeConfig::bec(8, 4).unwrap();
        let mut bits = vec![false; 8];
        bits[0] = true;
        assert!(MessageWord::new(bits, &cfg).is_err());
        assert!(encode(&MessageWord::zeros(4), &cfg).is_err());
    }

    #[test]
    fn mask_string_round_trip() {
        let cfg = CodeConfig::bec(32, 11).unwrap();
        assert_eq!(parse_mask(&cfg.mask_string()).unwrap(), cfg.frozen_mask());
        assert!(parse_mask("0102").is_err());
    }

    proptest! {
        #[test]
        fn transform_is_linear_and_involutive(
            a in proptest::collection::vec(any::<bool>(), 64),
            b in proptest::collection::vec(any::<bool>(), 64),
        ) {
            let mut ta = a.clone();
            let mut tb = b.clone();
            let mut tab: Vec<bool> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            polar_transform(&mut ta);
            polar_transform(&mut tb);
            polar_transform(&mut tab);
            let sum: Vec<bool> = ta.iter().zip(&tb).map(|(x, y)| x ^ y).collect();
            prop_assert_eq!(&tab, &sum);
            polar_transform(&mut ta);
            prop_assert_eq!(ta, a);
        }

        #[test]
        fn frozen_count_matches(m in 1u32..11, frac in 0.0f64..1.0, e in 0.05f64..0.95) {
            let n = 1usize << m;
            let k = ((frac * n as f64) as usize).clamp(1, n);
            let mask = construct_frozen_set(n, k, e).unwrap();
            prop_assert_eq!(mask.iter().filter(|&&f| f).count(), n - k);
            prop_assert_eq!(construct_frozen_set(n, k, e).unwrap(), mask);
        }
    }
}
