//! Closed-form latency overhead of the path-overlapped list decoder.
//!
//! All functions take the list size as a power of two and return cycles on
//! top of the conventional decoder.

use std::fmt::Write as _;

use crate::error::{config_err, Result};
use crate::fastssc::count_s;
use crate::overlap_sim::Scheme;
use crate::polar_code::CodeConfig;

/// `log2 l` for a power-of-two list size.
pub fn list_depth(l: usize) -> Result<usize> {
    if l == 0 || !l.is_power_of_two() {
        return Err(config_err(format!("list size {l} is not a power of two")));
    }
    Ok(l.trailing_zeros() as usize)
}

fn epochs_after_fill(k: usize, l: usize) -> Result<usize> {
    let depth = list_depth(l)?;
    if depth > k {
        return Err(config_err(format!("log2 l = {depth} exceeds k = {k}")));
    }
    Ok(k - depth)
}

/// `(k - log2 l)(l - 1)`.
pub fn overhead_plain(k: usize, l: usize) -> Result<u64> {
    Ok((epochs_after_fill(k, l)? * (l - 1)) as u64)
}

/// Decision epochs with `m` bits each: `ceil((k - log2 l) / m)`.
pub fn decision_epochs(k: usize, l: usize, m: usize) -> Result<usize> {
    if m == 0 {
        return Err(config_err("multi-decision width must be >= 1"));
    }
    Ok(epochs_after_fill(k, l)?.div_ceil(m))
}

/// `ceil((k - log2 l) / m)(l - 1)`.
pub fn overhead_regular_md(k: usize, l: usize, m: usize) -> Result<u64> {
    Ok((decision_epochs(k, l, m)? * (l - 1)) as u64)
}

/// `(S - log2 l)(l - 1)` for `S` constituent codes.
pub fn overhead_irregular(s: usize, l: usize) -> Result<u64> {
    let depth = list_depth(l)?;
    if s < depth {
        return Err(config_err(format!("S = {s} is below log2 l = {depth}")));
    }
    Ok(((s - depth) * (l - 1)) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlcasBounds {
    pub lower: u64,
    pub upper: u64,
}

/// Every speculation hits (pipeline fill only) versus none does.
pub fn plcas_bounds(k: usize, l: usize) -> Result<PlcasBounds> {
    Ok(PlcasBounds {
        lower: (l - 1) as u64 * u64::from(l > 1),
        upper: overhead_plain(k, l)?,
    })
}

/// Pipeline fill `l - 1` plus `live - 1` for every later decision epoch.
pub fn overhead_adaptive(profile: &[usize], l: usize) -> Result<u64> {
    if l == 0 {
        return Err(config_err("list size must be >= 1"));
    }
    if let Some(bad) = profile.iter().find(|&&p| p == 0 || p > l) {
        return Err(config_err(format!(
            "live path count {bad} outside [1, {l}]"
        )));
    }
    Ok((l - 1 + profile.iter().map(|p| p - 1).sum::<usize>()) as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverheadRow {
    pub rate: f64,
    pub scheme: Scheme,
    pub k: usize,
    pub l: usize,
    /// Decision width for regular schemes, `S` for the irregular one.
    pub m_or_s: usize,
    pub overhead: u64,
}

/// Information length used for a nominal rate.
pub fn k_for_rate(n: usize, rate: f64) -> Result<usize> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(config_err(format!("rate {rate} outside (0, 1]")));
    }
    Ok(((rate * n as f64).round() as usize).clamp(1, n))
}

/// Overhead of a data-independent scheme on a constructed code.
pub fn overhead_for(config: &CodeConfig, l: usize, scheme: Scheme) -> Result<(usize, u64)> {
    let k = config.k();
    match scheme {
        Scheme::Plain => Ok((1, overhead_plain(k, l)?)),
        Scheme::MultiDecision(m) => Ok((m, overhead_regular_md(k, l, m)?)),
        Scheme::Irregular(cap) => {
            let s = count_s(config, cap)?;
            Ok((s, overhead_irregular(s, l)?))
        }
        Scheme::Plcas | Scheme::Adaptive(_) => Err(config_err(format!(
            "{scheme} overhead depends on the received frame"
        ))),
    }
}

/// Overhead curves over a rate sweep for BEC-constructed codes of length `n`.
pub fn overhead_table(n: usize, l: usize, rates: &[f64], schemes: &[Scheme]) -> Result<Vec<OverheadRow>> {
    let mut rows = Vec::with_capacity(rates.len() * schemes.len());
    for &rate in rates {
        let config = CodeConfig::bec(n, k_for_rate(n, rate)?)?;
        for &scheme in schemes {
            let (m_or_s, overhead) = overhead_for(&config, l, scheme)?;
            rows.push(OverheadRow {
                rate,
                scheme,
                k: config.k(),
                l,
                m_or_s,
                overhead,
            });
        }
    }
    Ok(rows)
}

pub fn overhead_csv(rows: &[OverheadRow]) -> String {
    let mut out = String::from("rate,scheme,k,l,m_or_S,overhead_cycles\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.rate, r.scheme, r.k, r.l, r.m_or_s, r.overhead
        );
    }
    out
}
