//! Cycle-accurate model of a list SC decoder that runs all list paths through
//! one pipelined tree SC decoder.
//!
//! Timing model: one logical stage activation per instance per clock; a path
//! executes the depth-first activation program of [`program::sc_program`],
//! whose length (`2n - 2`) is also the cycle count of the conventional
//! architecture with `l` decoders in lockstep and a combinational sorter.
//! Each path runs one cycle behind the previous one. Whenever a decision epoch needs a
//! sort over all paths, every path waits for the last one to decide and the
//! survivors re-enter one cycle apart; that spread is the only overhead.
//!
//! Decoding itself executes the same activation program on every path in
//! lockstep with the list primitives of [`crate::list_decoder`], so the output
//! is independent of the timetable.

pub mod engine;
pub mod plan;
pub mod program;
pub mod trace;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelLlr;
use crate::error::{config_err, Error, Result};
use crate::fastssc::decompose;
use crate::list_decoder::{decide_bit, ForkRecord, ListSettings, ListState};
use crate::polar_code::{CodeConfig, MessageWord};
use crate::sc_kernel::{Kernel, LlrMode};

pub use engine::Segment;
pub use plan::{build_stage_plan, duplication_bound, overlap_order, StagePlan};
pub use program::{sc_program, Activation, Step};
pub use trace::{verify_trace, Op, ScheduleTrace, TraceDiagnostics, TraceEvent, TraceViolation};

/// Latency-reduction scheme applied on top of path overlapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// One sort per information bit once the list is full.
    Plain,
    /// `m` consecutive information bits share one decision epoch.
    MultiDecision(usize),
    /// One decision epoch per constituent code; `None` = no leaf-size cap.
    Irregular(Option<usize>),
    /// Path-LLR compute-ahead: a stalled path runs on with its better child.
    Plcas,
    /// Metric-threshold list shrinking with threshold `gamma`.
    Adaptive(f64),
}

impl Scheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Scheme::MultiDecision(0) => Err(config_err("multi-decision width must be >= 1")),
            Scheme::Irregular(Some(0)) => Err(config_err("max leaf size must be >= 1")),
            Scheme::Adaptive(g) if g.is_nan() || g < 0.0 => {
                Err(config_err(format!("gamma {g} must be >= 0")))
            }
            _ => Ok(()),
        }
    }

    /// Whether the timetable depends on the received frame.
    pub fn is_data_dependent(&self) -> bool {
        matches!(self, Scheme::Plcas | Scheme::Adaptive(_))
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Plain => write!(f, "plain"),
            Scheme::MultiDecision(m) => write!(f, "md{m}"),
            Scheme::Irregular(None) => write!(f, "irregular"),
            Scheme::Irregular(Some(cap)) => write!(f, "irregular:{cap}"),
            Scheme::Plcas => write!(f, "plcas"),
            Scheme::Adaptive(g) => write!(f, "adaptive:{g}"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    /// Accepts `plain`, `md<m>` / `multidecision:<m>`, `irregular[:<cap>]`,
    /// `plcas`, `adaptive:<gamma>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s.as_str(), None),
        };
        let bad = || Error::Parse(format!("unknown scheme {s:?}"));
        let scheme = match (head, arg) {
            ("plain", None) => Scheme::Plain,
            ("plcas", None) => Scheme::Plcas,
            ("multidecision", Some(a)) => Scheme::MultiDecision(a.parse().map_err(|_| bad())?),
            ("irregular", None) => Scheme::Irregular(None),
            ("irregular", Some(a)) => Scheme::Irregular(Some(a.parse().map_err(|_| bad())?)),
            ("adaptive", Some(a)) => Scheme::Adaptive(a.parse().map_err(|_| bad())?),
            (h, None) if h.starts_with("md") => {
                Scheme::MultiDecision(h[2..].parse().map_err(|_| bad())?)
            }
            _ => return Err(bad()),
        };
        scheme.validate()?;
        Ok(scheme)
    }
}

/// Overhead of the overlapped decoder relative to the conventional one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatencyReport {
    pub total_cycles: u64,
    pub baseline_cycles: u64,
    /// Pipeline fill: entry spread of the first segment.
    pub l_p: u64,
    /// Waiting accumulated at sort barriers.
    pub l_w: u64,
    pub l_m: u64,
    /// Segments between sort barriers (the last one ends the frame).
    pub segments: usize,
    pub resource_waits: u64,
}

impl LatencyReport {
    pub const CSV_HEADER: &'static str =
        "total_cycles,baseline_cycles,l_p,l_w,l_m,segments,resource_waits";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.total_cycles,
            self.baseline_cycles,
            self.l_p,
            self.l_w,
            self.l_m,
            self.segments,
            self.resource_waits
        )
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub decoded: MessageWord,
    pub best_metric: f64,
    pub forks: Vec<ForkRecord>,
    pub trace: ScheduleTrace,
    pub report: LatencyReport,
    /// Paths in flight in each segment after the first.
    pub live_profile: Vec<usize>,
    pub diagnostics: TraceDiagnostics,
}

/// Cycles of the conventional architecture (`l` decoders in lockstep,
/// combinational sorter): the tree SC schedule length, `2n - 2`. The scheme
/// changes how often paths must synchronise, not the per-path schedule.
pub fn baseline_cycles(config: &CodeConfig, _scheme: Scheme) -> u64 {
    sc_program(config.stages()).len() as u64
}

/// Least `j` with `2^j >= l`: information decisions before the list is full.
pub fn fill_decisions(l: usize) -> usize {
    l.next_power_of_two().trailing_zeros() as usize
}

#[derive(Debug, Clone)]
pub struct OverlapSimulator<'a> {
    config: &'a CodeConfig,
    scheme: Scheme,
    settings: ListSettings,
    plan: StagePlan,
    program: Vec<Step>,
    /// Program index of the step that decides each bit.
    decision_step: Vec<usize>,
    /// Epoch-closing bits for schemes whose epochs do not depend on data.
    fixed_epochs: Option<BTreeSet<usize>>,
}

impl<'a> OverlapSimulator<'a> {
    pub fn new(config: &'a CodeConfig, l: usize, scheme: Scheme, mode: LlrMode) -> Result<Self> {
        Self::with_kernel(config, l, scheme, Kernel::new(mode))
    }

    pub fn with_kernel(
        config: &'a CodeConfig,
        l: usize,
        scheme: Scheme,
        kernel: Kernel,
    ) -> Result<Self> {
        scheme.validate()?;
        let mut settings = ListSettings {
            l,
            kernel,
            gamma: None,
        };
        if let Scheme::Adaptive(g) = scheme {
            settings.gamma = Some(g);
        }
        settings.validate()?;
        let plan = build_stage_plan(config.n(), l)?;
        let program = sc_program(config.stages());
        let mut decision_step = vec![0; config.n()];
        for (i, step) in program.iter().enumerate() {
            if let Some(b) = step.decides {
                decision_step[b] = i;
            }
        }
        let fixed_epochs = match scheme {
            Scheme::Irregular(cap) => {
                let tree = decompose(config.frozen_mask(), cap.unwrap_or(config.n()))?;
                Some(
                    tree.leaves()
                        .iter()
                        .skip(fill_decisions(l))
                        .map(|leaf| leaf.start + leaf.len - 1)
                        .collect(),
                )
            }
            _ => None,
        };
        Ok(Self {
            config,
            scheme,
            settings,
            plan,
            program,
            decision_step,
            fixed_epochs,
        })
    }

    /// Replaces the default worst-case duplication plan.
    pub fn with_plan(mut self, plan: StagePlan) -> Result<Self> {
        if plan.stages() != self.config.stages() {
            return Err(config_err(format!(
                "plan has {} stages, code has {}",
                plan.stages(),
                self.config.stages()
            )));
        }
        self.plan = plan;
        Ok(self)
    }

    pub fn plan(&self) -> &StagePlan {
        &self.plan
    }

    pub fn l(&self) -> usize {
        self.settings.l
    }

    pub fn run(&self, llr: &ChannelLlr) -> Result<SimOutput> {
        if llr.len() != self.config.n() {
            return Err(Error::LengthMismatch {
                expected: self.config.n(),
                actual: llr.len(),
            });
        }
        let (state, forks) = self.execute(llr)?;
        let closing = self.closing_bits(&forks);
        let segments = self.segments(&forks, &closing);
        let epoch_bits = match self.scheme {
            Scheme::Irregular(_) => closing.clone(),
            _ => self.config.info_positions().into_iter().collect(),
        };
        let timing = engine::run(&self.program, &self.plan, &segments, epoch_bits);
        let diagnostics = verify_trace(&timing.trace, &self.plan, self.settings.l)
            .map_err(|v| Error::Schedule(v.to_string()))?;

        let baseline = self.program.len() as u64;
        let l_m = timing.total_cycles - baseline;
        let l_p = segments[0].lanes() as u64 - 1;
        let report = LatencyReport {
            total_cycles: timing.total_cycles,
            baseline_cycles: baseline,
            l_p,
            l_w: l_m.saturating_sub(l_p),
            l_m,
            segments: segments.len(),
            resource_waits: timing.resource_waits,
        };
        let best = state.best();
        Ok(SimOutput {
            decoded: MessageWord::from_decoded(best.decisions.clone()),
            best_metric: best.metric,
            forks,
            trace: timing.trace,
            report,
            live_profile: segments[1..].iter().map(Segment::lanes).collect(),
            diagnostics,
        })
    }

    /// Runs the activation program on every path in lockstep.
    fn execute(&self, llr: &ChannelLlr) -> Result<(ListState, Vec<ForkRecord>)> {
        let mut state = ListState::new(llr, self.settings.l, self.settings.kernel.mode)?;
        let mut forks = Vec::with_capacity(self.config.k());
        let kernel = &self.settings.kernel;
        for step in &self.program {
            for path in &mut state.paths {
                match step.kind {
                    Activation::F => path.stage_mem.f_stage(step.stage, kernel),
                    Activation::G => path.stage_mem.g_stage(step.stage, kernel),
                }
            }
            if let Some(bit) = step.decides {
                debug_assert_eq!(bit, state.bit_index);
                if let Some(rec) = decide_bit(&mut state, self.config, &self.settings)? {
                    forks.push(rec);
                }
            }
        }
        Ok((state, forks))
    }

    /// Bits after whose decision all paths synchronise for a sort.
    fn closing_bits(&self, forks: &[ForkRecord]) -> BTreeSet<usize> {
        if let Some(fixed) = &self.fixed_epochs {
            return fixed.clone();
        }
        let pruned = forks.iter().filter(|f| f.pruned);
        match self.scheme {
            Scheme::Plain | Scheme::Adaptive(_) => pruned.map(|f| f.bit).collect(),
            Scheme::Plcas => pruned
                .filter(|f| !f.speculation_hit)
                .map(|f| f.bit)
                .collect(),
            Scheme::MultiDecision(m) => {
                let bits: Vec<usize> = pruned.map(|f| f.bit).collect();
                bits.chunks(m)
                    .map(|chunk| *chunk.last().expect("chunks are non-empty"))
                    .collect()
            }
            Scheme::Irregular(_) => unreachable!("irregular epochs are precomputed"),
        }
    }

    /// Splits the program at the closing decisions. A segment starts with
    /// the survivors of the previous sort; forks inside it add lanes that
    /// start right after the forking decision.
    fn segments(&self, forks: &[ForkRecord], closing: &BTreeSet<usize>) -> Vec<Segment> {
        let n = self.config.n();
        let mut fork_at = vec![None; n];
        for f in forks {
            fork_at[f.bit] = Some(*f);
        }
        let mut segments = Vec::new();
        let mut births = vec![0usize];
        for (bit, &fork) in fork_at.iter().enumerate().take(n - 1) {
            let step = self.decision_step[bit];
            if closing.contains(&bit) {
                let live = fork.map_or(births.len(), |f| f.live_after);
                segments.push(Segment {
                    end_step: step,
                    births: std::mem::replace(&mut births, vec![step + 1; live]),
                });
            } else if let Some(f) = fork {
                while births.len() < f.live_after {
                    births.push(step + 1);
                }
            }
        }
        segments.push(Segment {
            end_step: self.program.len() - 1,
            births,
        });
        segments
    }
}

/// Simulates one frame with min-sum kernels.
pub fn simulate(
    llr: &ChannelLlr,
    config: &CodeConfig,
    l: usize,
    scheme: Scheme,
) -> Result<SimOutput> {
    OverlapSimulator::new(config, l, scheme, LlrMode::MinSum)?.run(llr)
}

/// Timetable of the conventional single-path tree decoder.
pub fn conventional_trace(config: &CodeConfig) -> ScheduleTrace {
    let segments = [Segment {
        end_step: sc_program(config.stages()).len() - 1,
        births: vec![0],
    }];
    engine::run(
        &sc_program(config.stages()),
        &StagePlan::single(config.stages()),
        &segments,
        BTreeSet::new(),
    )
    .trace
}
