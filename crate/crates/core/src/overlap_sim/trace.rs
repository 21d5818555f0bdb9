use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use super::plan::StagePlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    F,
    G,
    Decide,
    Stall,
    Sort,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::F => "F",
            Op::G => "G",
            Op::Decide => "DECIDE",
            Op::Stall => "STALL",
            Op::Sort => "SORT",
        })
    }
}

/// One timetable entry. `F`/`G` occupy `(cycle, stage, instance)`; `DECIDE`
/// rides on the stage-1 instance that produced the bit LLR and is reported
/// at stage 0; `STALL` and `SORT` are bookkeeping at stage 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub cycle: u64,
    pub stage: usize,
    pub instance: usize,
    pub path: usize,
    pub op: Op,
    /// Decided bit for `DECIDE`, epoch-closing bit for `SORT`.
    pub bit: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScheduleTrace {
    pub events: Vec<TraceEvent>,
    /// Bits whose decision closes a decision epoch; stalls may only follow these.
    pub epoch_bits: BTreeSet<usize>,
}

impl ScheduleTrace {
    /// Last cycle with any event, plus one.
    pub fn total_cycles(&self) -> u64 {
        self.events.iter().map(|e| e.cycle + 1).max().unwrap_or(0)
    }

    /// Only the PU activations and decisions, in emission order.
    pub fn activations(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events
            .iter()
            .filter(|e| matches!(e.op, Op::F | Op::G | Op::Decide))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle,stage,instance,path,op\n");
        for e in &self.events {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                e.cycle, e.stage, e.instance, e.path, e.op
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceViolation {
    #[error(
        "cycle {cycle}: stage {stage} instance {instance} claimed by paths {first} and {second}"
    )]
    ResourceConflict {
        cycle: u64,
        stage: usize,
        instance: usize,
        first: usize,
        second: usize,
    },
    #[error(
        "cycle {cycle}: path {path} uses stage {stage} instance {instance}, plan has {available}"
    )]
    MissingInstance {
        cycle: u64,
        stage: usize,
        instance: usize,
        path: usize,
        available: usize,
    },
    #[error("path {path} enters at cycle {cycle}, expected no earlier than {expected}")]
    EntryOffset {
        path: usize,
        cycle: u64,
        expected: u64,
    },
    #[error("cycle {cycle}: path {path} stalls outside a decision epoch")]
    MisplacedStall { cycle: u64, path: usize },
    #[error("cycle {cycle}: path {path} resumes before the sort closing bit {bit} at cycle {sort_cycle}")]
    EarlyResume {
        cycle: u64,
        path: usize,
        bit: usize,
        sort_cycle: u64,
    },
    #[error("cycle {cycle}: path {path} issues two activations")]
    DoubleIssue { cycle: u64, path: usize },
    #[error("path id {path} out of range for list size {l}")]
    PathOutOfRange { path: usize, l: usize },
    #[error("stage {stage} not in plan")]
    UnknownStage { stage: usize },
}

/// Peak concurrent activations per logical stage (index 0 = stage 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceDiagnostics {
    pub max_occupancy: Vec<usize>,
}

impl TraceDiagnostics {
    /// Stages that ever needed more than one instance.
    pub fn duplicated_stages_used(&self) -> usize {
        self.max_occupancy.iter().filter(|&&o| o > 1).count()
    }
}

/// Checks a timetable against the stage plan and the overlap rules.
pub fn verify_trace(
    trace: &ScheduleTrace,
    plan: &StagePlan,
    l: usize,
) -> Result<TraceDiagnostics, TraceViolation> {
    let m = plan.stages();
    let mut claimed: HashMap<(u64, usize, usize), usize> = HashMap::new();
    let mut issued: HashSet<(u64, usize)> = HashSet::new();
    let mut per_cycle: HashMap<(u64, usize), usize> = HashMap::new();
    let mut first_seen: HashMap<usize, u64> = HashMap::new();
    let sorts: HashMap<usize, u64> = trace
        .events
        .iter()
        .filter(|e| e.op == Op::Sort)
        .filter_map(|e| e.bit.map(|b| (b, e.cycle)))
        .collect();
    // per path: last non-stall event, and a pending sort barrier
    let mut last_op: HashMap<usize, (Op, Option<usize>)> = HashMap::new();
    let mut barrier: HashMap<usize, (usize, u64)> = HashMap::new();

    for e in &trace.events {
        if e.op == Op::Sort {
            continue;
        }
        if e.path >= l {
            return Err(TraceViolation::PathOutOfRange { path: e.path, l });
        }
        first_seen.entry(e.path).or_insert(e.cycle);
        match e.op {
            Op::F | Op::G => {
                if e.stage == 0 || e.stage > m {
                    return Err(TraceViolation::UnknownStage { stage: e.stage });
                }
                let available = plan.instances(e.stage);
                if e.instance >= available {
                    return Err(TraceViolation::MissingInstance {
                        cycle: e.cycle,
                        stage: e.stage,
                        instance: e.instance,
                        path: e.path,
                        available,
                    });
                }
                if let Some(&other) = claimed.get(&(e.cycle, e.stage, e.instance)) {
                    return Err(TraceViolation::ResourceConflict {
                        cycle: e.cycle,
                        stage: e.stage,
                        instance: e.instance,
                        first: other,
                        second: e.path,
                    });
                }
                claimed.insert((e.cycle, e.stage, e.instance), e.path);
                if !issued.insert((e.cycle, e.path)) {
                    return Err(TraceViolation::DoubleIssue {
                        cycle: e.cycle,
                        path: e.path,
                    });
                }
                *per_cycle.entry((e.cycle, e.stage)).or_insert(0) += 1;
                if let Some((bit, sort_cycle)) = barrier.remove(&e.path) {
                    if e.cycle <= sort_cycle {
                        return Err(TraceViolation::EarlyResume {
                            cycle: e.cycle,
                            path: e.path,
                            bit,
                            sort_cycle,
                        });
                    }
                }
                last_op.insert(e.path, (e.op, None));
            }
            Op::Decide => {
                if let Some(bit) = e.bit {
                    if let Some(&sc) = sorts.get(&bit) {
                        barrier.insert(e.path, (bit, sc));
                    }
                }
                last_op.insert(e.path, (Op::Decide, e.bit));
            }
            Op::Stall => {
                let ok = matches!(
                    last_op.get(&e.path),
                    Some((Op::Decide, Some(b))) if trace.epoch_bits.contains(b)
                );
                if !ok {
                    return Err(TraceViolation::MisplacedStall {
                        cycle: e.cycle,
                        path: e.path,
                    });
                }
            }
            Op::Sort => unreachable!(),
        }
    }

    // path p runs at least one cycle behind path p - 1
    let mut previous: Option<u64> = None;
    for path in 0..first_seen.len() {
        let Some(&cycle) = first_seen.get(&path) else {
            return Err(TraceViolation::EntryOffset {
                path,
                cycle: u64::MAX,
                expected: previous.map_or(0, |c| c + 1),
            });
        };
        let expected = previous.map_or(0, |c| c + 1).max(path as u64);
        if cycle < expected {
            return Err(TraceViolation::EntryOffset {
                path,
                cycle,
                expected,
            });
        }
        previous = Some(cycle);
    }

    let mut max_occupancy = vec![0; m];
    for ((_, stage), count) in per_cycle {
        let slot = &mut max_occupancy[stage - 1];
        *slot = (*slot).max(count);
    }
    Ok(TraceDiagnostics { max_occupancy })
}
