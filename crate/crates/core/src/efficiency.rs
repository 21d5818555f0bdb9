//! Throughput, parametric area and hardware efficiency `e = throughput / area`
//! of the conventional and path-overlapped list decoders.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::channel::{simulate_frames, NoiseSpec};
use crate::error::{config_err, Error, Result};
use crate::latency_models::{k_for_rate, overhead_for, plcas_bounds};
use crate::overlap_sim::{baseline_cycles, build_stage_plan, OverlapSimulator, Scheme, StagePlan};
use crate::polar_code::CodeConfig;
use crate::sc_kernel::LlrMode;

/// Area coefficients in abstract units.
///
/// A tree SC decoder has `n - 1` processing units, `2^(s-1)` of them in
/// stage `s`. The sorter costs `sorter_coeff * l * log2(max(l, 2))` and path
/// memory `memory_coeff * l * n * (llr_bits + 1)` in both architectures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaModel {
    pub pu_cost: f64,
    pub sorter_coeff: f64,
    pub memory_coeff: f64,
    pub llr_bits: u32,
    /// Clock ratio of the overlapped design over the conventional one.
    pub frequency_multiplier: f64,
}

impl Default for AreaModel {
    fn default() -> Self {
        Self {
            pu_cost: 1.0,
            sorter_coeff: 4.0,
            memory_coeff: 1.0 / 64.0,
            llr_bits: 6,
            frequency_multiplier: 1.0,
        }
    }
}

impl AreaModel {
    pub fn validate(&self) -> Result<()> {
        let costs = [self.pu_cost, self.sorter_coeff, self.memory_coeff];
        if costs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(config_err("area coefficients must be finite and >= 0"));
        }
        if !(self.frequency_multiplier.is_finite() && self.frequency_multiplier >= 1.0) {
            return Err(config_err("frequency_multiplier must be >= 1"));
        }
        Ok(())
    }

    /// Sets one coefficient by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let real = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("{key}: {value:?} is not a number")))
        };
        match key.trim() {
            "pu_cost" => self.pu_cost = real()?,
            "sorter_coeff" => self.sorter_coeff = real()?,
            "memory_coeff" => self.memory_coeff = real()?,
            "frequency_multiplier" => self.frequency_multiplier = real()?,
            "llr_bits" => {
                self.llr_bits = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("llr_bits: {value:?} is not an integer")))?
            }
            other => return Err(Error::Parse(format!("unknown area coefficient {other:?}"))),
        }
        Ok(())
    }

    pub fn sc_core(&self, n: usize) -> f64 {
        (n - 1) as f64 * self.pu_cost
    }

    pub fn sorter(&self, l: usize) -> f64 {
        self.sorter_coeff * l as f64 * (l.max(2) as f64).log2()
    }

    pub fn memory(&self, n: usize, l: usize) -> f64 {
        self.memory_coeff * (l * n) as f64 * f64::from(self.llr_bits + 1)
    }

    /// Processing units added by duplicated stage instances.
    pub fn dup_overhead(&self, plan: &StagePlan) -> f64 {
        let pus: usize = (1..=plan.stages())
            .map(|s| (plan.instances(s) - 1) << (s - 1))
            .sum();
        pus as f64 * self.pu_cost
    }
}

/// Parses `key = value` lines; `#` starts a comment.
impl FromStr for AreaModel {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut model = Self::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {line:?}")))?;
            model.set(key, value)?;
        }
        model.validate()?;
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Arch {
    Conventional,
    Overlapped(StagePlan),
}

pub fn area(arch: &Arch, model: &AreaModel, n: usize, l: usize) -> f64 {
    let shared = model.sorter(l) + model.memory(n, l);
    match arch {
        Arch::Conventional => l as f64 * model.sc_core(n) + shared,
        Arch::Overlapped(plan) => model.sc_core(n) + model.dup_overhead(plan) + shared,
    }
}

/// Information bits per cycle, or per second when `frequency` (Hz) is given.
pub fn throughput(k: usize, total_cycles: f64, frequency: Option<f64>) -> Result<f64> {
    if total_cycles.is_nan() || total_cycles < 1.0 {
        return Err(config_err(format!(
            "cycle count {total_cycles} must be >= 1"
        )));
    }
    Ok(k as f64 / total_cycles * frequency.unwrap_or(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyReport {
    pub cycles: f64,
    pub throughput: f64,
    pub area: f64,
    pub e: f64,
}

impl EfficiencyReport {
    pub fn new(k: usize, cycles: f64, frequency: Option<f64>, area: f64) -> Result<Self> {
        let throughput = throughput(k, cycles, frequency)?;
        Ok(Self {
            cycles,
            throughput,
            area,
            e: throughput / area,
        })
    }
}

/// `e_overlapped / e_conventional` for a given overlapped cycle count.
pub fn efficiency_ratio(
    config: &CodeConfig,
    l: usize,
    overlapped_cycles: f64,
    model: &AreaModel,
) -> Result<f64> {
    model.validate()?;
    let n = config.n();
    let plan = build_stage_plan(n, l)?;
    let conv = EfficiencyReport::new(
        config.k(),
        baseline_cycles(config, Scheme::Plain) as f64,
        None,
        area(&Arch::Conventional, model, n, l),
    )?;
    let over = EfficiencyReport::new(
        config.k(),
        overlapped_cycles,
        Some(model.frequency_multiplier),
        area(&Arch::Overlapped(plan), model, n, l),
    )?;
    Ok(over.e / conv.e)
}

/// Channel used to average data-dependent schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSettings {
    pub snr_db: f64,
    pub frames: u64,
    pub seed: u64,
    pub mode: LlrMode,
}

impl Default for FrameSettings {
    fn default() -> Self {
        Self {
            snr_db: 2.0,
            frames: 200,
            seed: 1,
            mode: LlrMode::MinSum,
        }
    }
}

/// Mean overlapped cycles over simulated frames.
pub fn mean_simulated_cycles(
    config: &CodeConfig,
    l: usize,
    scheme: Scheme,
    frames: &FrameSettings,
) -> Result<f64> {
    let sim = OverlapSimulator::new(config, l, scheme, frames.mode)?;
    let spec = NoiseSpec::new(frames.snr_db, config.rate(), frames.seed)?;
    let cycles = simulate_frames(config, &spec, frames.frames, |frame| {
        sim.run(&frame.llr).map(|out| out.report.total_cycles)
    })?;
    Ok(cycles.iter().sum::<u64>() as f64 / cycles.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyRow {
    pub rate: f64,
    pub scheme: Scheme,
    /// Worst case; equals `ratio_upper` except for PLCAS.
    pub ratio_lower: f64,
    pub ratio_upper: f64,
}

/// Efficiency ratios over a rate sweep. PLCAS yields its best/worst band;
/// adaptive uses the mean simulated cycle count.
pub fn efficiency_table(
    n: usize,
    l: usize,
    rates: &[f64],
    schemes: &[Scheme],
    model: &AreaModel,
    frames: &FrameSettings,
) -> Result<Vec<EfficiencyRow>> {
    let mut rows = Vec::with_capacity(rates.len() * schemes.len());
    for &rate in rates {
        let config = CodeConfig::bec(n, k_for_rate(n, rate)?)?;
        let base = baseline_cycles(&config, Scheme::Plain) as f64;
        for &scheme in schemes {
            let (lower, upper) = match scheme {
                Scheme::Plcas => {
                    let b = plcas_bounds(config.k(), l)?;
                    (base + b.upper as f64, base + b.lower as f64)
                }
                Scheme::Adaptive(_) => {
                    let c = mean_simulated_cycles(&config, l, scheme, frames)?;
                    (c, c)
                }
                _ => {
                    let c = base + overhead_for(&config, l, scheme)?.1 as f64;
                    (c, c)
                }
            };
            rows.push(EfficiencyRow {
                rate,
                scheme,
                ratio_lower: efficiency_ratio(&config, l, lower, model)?,
                ratio_upper: efficiency_ratio(&config, l, upper, model)?,
            });
        }
    }
    Ok(rows)
}

pub fn efficiency_csv(rows: &[EfficiencyRow]) -> String {
    let mut out = String::from("rate,scheme,ratio_lower,ratio_upper\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6}",
            r.rate, r.scheme, r.ratio_lower, r.ratio_upper
        );
    }
    out
}
