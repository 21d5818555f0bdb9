use crate::error::{config_err, Result};

/// Physical instances per logical stage of the single tree SC decoder.
///
/// Stage 1 is nearest the bit side, stage `m` nearest the channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagePlan {
    instances: Vec<usize>,
}

impl StagePlan {
    /// One instance per stage, i.e. the plain tree decoder.
    pub fn single(m: usize) -> Self {
        Self {
            instances: vec![1; m],
        }
    }

    pub fn from_instances(instances: Vec<usize>) -> Result<Self> {
        if let Some(s) = instances.iter().position(|&d| d == 0) {
            return Err(config_err(format!("stage {} has no instances", s + 1)));
        }
        Ok(Self { instances })
    }

    pub fn stages(&self) -> usize {
        self.instances.len()
    }

    /// Instances of logical stage `stage` (1-based).
    pub fn instances(&self, stage: usize) -> usize {
        self.instances[stage - 1]
    }

    pub fn all_instances(&self) -> &[usize] {
        &self.instances
    }

    /// Logical stages with more than one instance.
    pub fn duplicated_stages(&self) -> usize {
        self.instances.iter().filter(|&&d| d > 1).count()
    }

    /// Extra stage instances beyond the plain tree decoder.
    pub fn duplicates(&self) -> usize {
        self.instances.iter().map(|d| d - 1).sum()
    }
}

/// Least `i` with `l <= 2^i - 1`.
pub fn overlap_order(l: usize) -> u32 {
    let mut i = 1;
    while (1usize << i) - 1 < l {
        i += 1;
    }
    i
}

/// Stage copies needed for `l` overlapped paths, `2^{i-1} - 1`.
pub fn duplication_bound(l: usize) -> usize {
    (1usize << (overlap_order(l) - 1)) - 1
}

/// Spends the `2^{i-1} - 1` stage copies on the stages nearest the bit side,
/// halving per stage: stage `s < i` gets `2^{i-1-s}` extra instances. Stages
/// beyond `m` are dropped.
pub fn build_stage_plan(n: usize, l: usize) -> Result<StagePlan> {
    if l == 0 {
        return Err(config_err("list size must be at least 1"));
    }
    if n < 2 || !n.is_power_of_two() {
        return Err(config_err(format!(
            "block length {n} must be a power of two >= 2"
        )));
    }
    let m = n.trailing_zeros() as usize;
    let i = overlap_order(l) as usize;
    Ok(StagePlan {
        instances: (1..=m)
            .map(|s| if s < i { 1 + (1 << (i - 1 - s)) } else { 1 })
            .collect(),
    })
}
