//! Golden list-SC decoder.
//!
//! Path metric: a decision that contradicts the sign of its LLR adds `|llr|`,
//! an agreeing one adds nothing, so lower is better. In [`LlrMode::Exact`] the
//! metric is the exact `ln(1 + e^{-(1-2u)·llr})` increment instead, which makes
//! a list holding every codeword an ML decoder. At an information bit
//! every path forks and the `l` best children survive; children are ranked by
//! `(metric, parent id, decision)` with decision 0 before 1. Survivors are
//! renumbered `0..` in rank order. Surviving children deep-copy the parent's
//! stage memory. The final estimate is the minimum-metric path (lowest id on
//! ties); there is no CRC selection.

use std::cmp::Ordering;

use crate::channel::ChannelLlr;
use crate::error::{config_err, Error, Result};
use crate::polar_code::{CodeConfig, MessageWord};
use crate::sc_kernel::{hard_decision, Kernel, LlrMode, StageMemory};

pub fn metric_penalty(pm: f64, llr: f64, decision: bool) -> f64 {
    let contradicts = (llr > 0.0 && decision) || (llr < 0.0 && !decision);
    if contradicts {
        pm + llr.abs()
    } else {
        pm
    }
}

/// Metric increment matching the kernel mode.
pub fn metric_update(mode: LlrMode, pm: f64, llr: f64, decision: bool) -> f64 {
    match mode {
        LlrMode::MinSum => metric_penalty(pm, llr, decision),
        LlrMode::Exact => {
            let x = if decision { -llr } else { llr };
            let inc = if x >= 0.0 {
                (-x).exp().ln_1p()
            } else {
                -x + x.exp().ln_1p()
            };
            pm + inc
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecoderPath {
    pub id: usize,
    pub metric: f64,
    pub stage_mem: StageMemory,
    pub decisions: Vec<bool>,
}

impl DecoderPath {
    fn root(channel: &[f64]) -> Self {
        Self {
            id: 0,
            metric: 0.0,
            stage_mem: StageMemory::new(channel),
            decisions: Vec::with_capacity(channel.len()),
        }
    }

    fn push_decision(&mut self, mode: LlrMode, bit: usize, value: bool, llr: f64) {
        self.metric = metric_update(mode, self.metric, llr, value);
        self.stage_mem.commit_bit(bit, value);
        self.decisions.push(value);
    }
}

#[derive(Debug, Clone)]
pub struct ListState {
    pub paths: Vec<DecoderPath>,
    pub l: usize,
    pub bit_index: usize,
    pub mode: LlrMode,
}

impl ListState {
    pub fn new(channel: &ChannelLlr, l: usize, mode: LlrMode) -> Result<Self> {
        if l == 0 {
            return Err(config_err("list size must be at least 1"));
        }
        Ok(Self {
            paths: vec![DecoderPath::root(channel.values())],
            l,
            bit_index: 0,
            mode,
        })
    }

    /// Minimum-metric path, lowest id on ties.
    pub fn best(&self) -> &DecoderPath {
        self.paths
            .iter()
            .min_by(|a, b| path_order(a, b))
            .expect("list is never empty")
    }
}

/// A candidate child produced at an information bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Child {
    /// Index of the parent within the current path list.
    pub parent: usize,
    pub decision: bool,
    pub metric: f64,
}

/// Ranks the `2·|parents|` children of `(id, metric, llr)` parents and keeps
/// the best `l`, in rank order.
pub fn rank_children(parents: &[(usize, f64, f64)], l: usize, mode: LlrMode) -> Vec<Child> {
    let mut children: Vec<(usize, Child)> = parents
        .iter()
        .enumerate()
        .flat_map(|(idx, &(id, pm, llr))| {
            [false, true].map(|d| {
                (
                    id,
                    Child {
                        parent: idx,
                        decision: d,
                        metric: metric_update(mode, pm, llr, d),
                    },
                )
            })
        })
        .collect();
    children.sort_by(|(ida, a), (idb, b)| {
        a.metric
            .total_cmp(&b.metric)
            .then(ida.cmp(idb))
            .then(a.decision.cmp(&b.decision))
    });
    children.truncate(l);
    children.into_iter().map(|(_, c)| c).collect()
}

/// What happened to the list at one information bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForkRecord {
    pub bit: usize,
    pub live_before: usize,
    /// More children than list slots, so a sort over all paths was needed.
    pub pruned: bool,
    /// Every parent's sign-following child survived and nothing else did.
    pub speculation_hit: bool,
    pub live_after: usize,
}

/// Forks every path at the current (information) bit and keeps the `l` best
/// children.
pub fn expand_and_prune(state: &mut ListState) -> ForkRecord {
    let bit = state.bit_index;
    let live_before = state.paths.len();
    let parents: Vec<(usize, f64, f64)> = state
        .paths
        .iter()
        .map(|p| (p.id, p.metric, p.stage_mem.bit_llr()))
        .collect();
    let survivors = rank_children(&parents, state.l, state.mode);
    let pruned = 2 * live_before > state.l;
    let speculation_hit = survivors.len() == live_before
        && survivors
            .iter()
            .all(|c| c.decision == hard_decision(parents[c.parent].2));

    let mut uses = vec![0usize; live_before];
    for c in &survivors {
        uses[c.parent] += 1;
    }
    let mut old: Vec<Option<DecoderPath>> = std::mem::take(&mut state.paths)
        .into_iter()
        .map(Some)
        .collect();
    state.paths = survivors
        .iter()
        .enumerate()
        .map(|(rank, c)| {
            uses[c.parent] -= 1;
            let mut path = if uses[c.parent] == 0 {
                old[c.parent].take().expect("parent consumed once")
            } else {
                old[c.parent].clone().expect("parent still present")
            };
            let llr = parents[c.parent].2;
            path.id = rank;
            path.push_decision(state.mode, bit, c.decision, llr);
            path
        })
        .collect();
    state.bit_index += 1;
    ForkRecord {
        bit,
        live_before,
        pruned,
        speculation_hit,
        live_after: state.paths.len(),
    }
}

/// Every path decides 0 at a frozen bit.
pub fn extend_frozen(state: &mut ListState) {
    let bit = state.bit_index;
    let mode = state.mode;
    for p in &mut state.paths {
        let llr = p.stage_mem.bit_llr();
        p.push_decision(mode, bit, false, llr);
    }
    state.bit_index += 1;
}

/// Drops paths whose metric exceeds `best + gamma`; the best path always stays.
pub fn adaptive_prune(state: &mut ListState, gamma: f64) -> Result<()> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(config_err(format!("gamma {gamma} must be >= 0")));
    }
    let best_id = state.best().id;
    let limit = state.best().metric + gamma;
    state.paths.retain(|p| p.metric <= limit || p.id == best_id);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ListSettings {
    pub l: usize,
    pub kernel: Kernel,
    /// Adaptive threshold, applied after every fork that needed a sort.
    pub gamma: Option<f64>,
}

impl ListSettings {
    pub fn new(l: usize, mode: LlrMode) -> Self {
        Self {
            l,
            kernel: Kernel::new(mode),
            gamma: None,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(config_err("list size must be at least 1"));
        }
        if let Some(g) = self.gamma {
            if g.is_nan() || g < 0.0 {
                return Err(config_err(format!("gamma {g} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Decides bit `state.bit_index` for every path.
pub fn decide_bit(
    state: &mut ListState,
    config: &CodeConfig,
    settings: &ListSettings,
) -> Result<Option<ForkRecord>> {
    if config.is_frozen(state.bit_index) {
        extend_frozen(state);
        return Ok(None);
    }
    let mut rec = expand_and_prune(state);
    if let (Some(gamma), true) = (settings.gamma, rec.pruned) {
        adaptive_prune(state, gamma)?;
        rec.live_after = state.paths.len();
    }
    Ok(Some(rec))
}

#[derive(Debug, Clone)]
pub struct ListOutput {
    pub best: MessageWord,
    pub best_metric: f64,
    /// Surviving paths with their metrics, in list order.
    pub list: Vec<(MessageWord, f64)>,
    pub forks: Vec<ForkRecord>,
}

impl ListOutput {
    fn from_state(state: ListState, forks: Vec<ForkRecord>) -> Self {
        let best = state.best();
        Self {
            best: MessageWord::from_decoded(best.decisions.clone()),
            best_metric: best.metric,
            list: state
                .paths
                .into_iter()
                .map(|p| (MessageWord::from_decoded(p.decisions), p.metric))
                .collect(),
            forks,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ListDecoder<'a> {
    config: &'a CodeConfig,
    settings: ListSettings,
}

impl<'a> ListDecoder<'a> {
    pub fn new(config: &'a CodeConfig, settings: ListSettings) -> Result<Self> {
        settings.validate()?;
        Ok(Self { config, settings })
    }

    pub fn decode(&self, llr: &ChannelLlr) -> Result<ListOutput> {
        if llr.len() != self.config.n() {
            return Err(Error::LengthMismatch {
                expected: self.config.n(),
                actual: llr.len(),
            });
        }
        let mut state = ListState::new(llr, self.settings.l, self.settings.kernel.mode)?;
        let mut forks = Vec::with_capacity(self.config.k());
        self.descend(&mut state, self.config.stages(), &mut forks)?;
        Ok(ListOutput::from_state(state, forks))
    }

    fn descend(&self, state: &mut ListState, s: usize, forks: &mut Vec<ForkRecord>) -> Result<()> {
        if s == 0 {
            if let Some(rec) = decide_bit(state, self.config, &self.settings)? {
                forks.push(rec);
            }
            return Ok(());
        }
        for p in &mut state.paths {
            p.stage_mem.f_stage(s, &self.settings.kernel);
        }
        self.descend(state, s - 1, forks)?;
        for p in &mut state.paths {
            p.stage_mem.g_stage(s, &self.settings.kernel);
        }
        self.descend(state, s - 1, forks)
    }
}

pub fn lsc_decode(
    llr: &ChannelLlr,
    config: &CodeConfig,
    l: usize,
    mode: LlrMode,
) -> Result<ListOutput> {
    ListDecoder::new(config, ListSettings::new(l, mode))?.decode(llr)
}

/// Orders paths by `(metric, id)`.
pub fn path_order(a: &DecoderPath, b: &DecoderPath) -> Ordering {
    a.metric.total_cmp(&b.metric).then(a.id.cmp(&b.id))
}
