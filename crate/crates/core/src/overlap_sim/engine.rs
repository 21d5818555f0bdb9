//! Cycle-level timing of overlapped paths on one tree decoder.
//!
//! Execution is split into segments separated by sort barriers. In a segment
//! with `p` lanes, lane `r` runs `r` cycles behind the segment start and
//! issues one activation per cycle, in program order from its birth step on,
//! whenever an instance of the needed stage is free. Later lanes win arbitration: the last lane
//! bounds the segment length, so it never waits. A barrier opens the next
//! segment the cycle after the last lane's closing decision, which is when
//! the pipelined sorter has seen every path.

use std::collections::BTreeSet;

use super::plan::StagePlan;
use super::program::{Activation, Step};
use super::trace::{Op, ScheduleTrace, TraceEvent};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Index of the segment's last program step (inclusive).
    pub end_step: usize,
    /// First program step of each lane; lanes created by a fork inside the
    /// segment start after that fork's decision.
    pub births: Vec<usize>,
}

impl Segment {
    pub fn lanes(&self) -> usize {
        self.births.len()
    }
}

#[derive(Debug, Clone)]
pub struct Timing {
    pub trace: ScheduleTrace,
    pub total_cycles: u64,
    /// Lane-cycles lost to a busy stage.
    pub resource_waits: u64,
}

pub fn run(
    program: &[Step],
    plan: &StagePlan,
    segments: &[Segment],
    epoch_bits: BTreeSet<usize>,
) -> Timing {
    let mut events = Vec::with_capacity(program.len() * segments.first().map_or(1, Segment::lanes));
    let mut resource_waits = 0u64;
    let mut open = 0u64;
    let mut start = 0usize;
    let mut last_cycle = 0u64;

    for (idx, seg) in segments.iter().enumerate() {
        let lanes = seg.lanes();
        let mut next = seg.births.clone();
        let mut ready: Vec<u64> = (0..lanes)
            .map(|r| open + (r + seg.births[r] - start) as u64)
            .collect();
        let mut done_at = vec![None::<u64>; lanes];
        let mut busy = vec![0usize; plan.stages() + 1];
        let mut cycle = open;

        while done_at.iter().any(Option::is_none) {
            busy.iter_mut().for_each(|b| *b = 0);
            for r in (0..lanes).rev() {
                if done_at[r].is_some() || ready[r] > cycle {
                    continue;
                }
                let step = program[next[r]];
                if busy[step.stage] >= plan.instances(step.stage) {
                    resource_waits += 1;
                    continue;
                }
                let instance = busy[step.stage];
                busy[step.stage] += 1;
                events.push(TraceEvent {
                    cycle,
                    stage: step.stage,
                    instance,
                    path: r,
                    op: match step.kind {
                        Activation::F => Op::F,
                        Activation::G => Op::G,
                    },
                    bit: None,
                });
                if let Some(bit) = step.decides {
                    events.push(TraceEvent {
                        cycle,
                        stage: 0,
                        instance,
                        path: r,
                        op: Op::Decide,
                        bit: Some(bit),
                    });
                }
                if next[r] == seg.end_step {
                    done_at[r] = Some(cycle);
                } else {
                    next[r] += 1;
                    ready[r] = cycle + 1;
                }
            }
            cycle += 1;
        }

        let close = done_at.iter().flatten().copied().max().unwrap_or(open);
        last_cycle = close;
        let Some(following) = segments.get(idx + 1) else {
            break;
        };
        let closing_bit = program[seg.end_step].decides;
        if lanes > 1 || following.lanes() > 1 {
            events.push(TraceEvent {
                cycle: close,
                stage: 0,
                instance: 0,
                path: 0,
                op: Op::Sort,
                bit: closing_bit,
            });
        }
        for (r, done) in done_at.iter().enumerate() {
            let done = done.expect("segment finished");
            let resume = if r < following.lanes() {
                close + 1 + r as u64
            } else {
                close + 1
            };
            for c in done + 1..resume {
                events.push(TraceEvent {
                    cycle: c,
                    stage: 0,
                    instance: 0,
                    path: r,
                    op: Op::Stall,
                    bit: None,
                });
            }
        }
        open = close + 1;
        start = seg.end_step + 1;
    }

    events.sort_by_key(|e| (e.cycle, e.op == Op::Sort));
    Timing {
        trace: ScheduleTrace { events, epoch_bits },
        total_cycles: if program.is_empty() {
            0
        } else {
            last_cycle + 1
        },
        resource_waits,
    }
}
